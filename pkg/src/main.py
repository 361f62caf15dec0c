#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import sys
import re
import argparse

from sympy import Symbol

from core.algebra import parse_polynomial
from core.cad import cc_partition, component_count, original_sample
from core.errors import CapsExceededError, InputError, SapersError
from core.fields import Field
from core.manifest import Manifest
from core.persistence import ConstructibleModule, ModuleBuilder, restrict
from core.posetmod import FinitePosetModule, check_functor, classify, example_ab
from core.settings_manager import SettingsManager, build_settings
from core.speed import count_classes, enumerated_components, optm_bound
from core.version import APP_NAME, VERSION
from utils.file_manager import FileManager
from utils.logger import logger, set_verbose
from utils.serialization import dumps, point_to_json, points_from_json

# Try importing tqdm for progress bar
try:
    from tqdm import tqdm
    TQDM_AVAILABLE = True
except ImportError:
    TQDM_AVAILABLE = False

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CAPS = 2

_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


def parse_arguments(argv=None):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="Path to JSON configuration file (default: ~/.sapers/config.json)")
    common.add_argument("--threads", type=int, help="Worker threads (default: $SAPERS_THREADS or 1)")
    common.add_argument("--seed", type=int, help="Seed for shears and sampling (default: 0)")
    common.add_argument("--field", type=str, help="Coefficient field: gf<p> or qq (default: gf2)")
    common.add_argument("--ell", type=int, help="Highest homology degree (default: 0)")
    common.add_argument("--verbose", "-v", action="store_true", help="Debug logging")

    parser = argparse.ArgumentParser(prog=APP_NAME, description="Semi-algebraic multi-parameter persistence")
    parser.add_argument("--version", action="version", version=f"{APP_NAME} {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", parents=[common], help="Sign-condition component bound")
    p.add_argument("--s", type=int, help="Number of polynomials")
    p.add_argument("--d", type=int, help="Degree bound")
    p.add_argument("--n", type=int, help="Number of variables")
    p.add_argument("--count", nargs="+", metavar="POLY", help="Also enumerate the components of these polynomials")
    p.add_argument("--vars", nargs="+", help="Variable order for --count (default: sorted symbols)")

    p = sub.add_parser("decompose", parents=[common], help="Sign-invariant decomposition with components")
    p.add_argument("--input", "-i", required=True, help="Manifest with a polynomial family")
    p.add_argument("--out", "-o", help="Output JSON (default: stdout)")

    p = sub.add_parser("persist", parents=[common], help="Build the constructible persistence module")
    p.add_argument("--input", "-i", required=True, help="Filtration manifest")
    p.add_argument("--out", "-o", help="Output module JSON (default: stdout)")
    p.add_argument("--plot", help="Write an SVG of dims over a parameter grid")
    p.add_argument("--grid", type=int, help="Plot grid points per axis (default: 21)")
    p.add_argument("--box", nargs=2, metavar=("LO", "HI"), default=("-2", "2"), help="Plot range per axis")

    p = sub.add_parser("restrict", parents=[common], help="Restrict a module to a finite point set")
    p.add_argument("--module", "-m", required=True, help="Module JSON from persist")
    p.add_argument("--points", "-p", required=True, help="Points JSON")
    p.add_argument("--out", "-o", help="Output poset module JSON (default: stdout)")

    p = sub.add_parser("classify", parents=[common], help="Equivalence classes of finite poset modules")
    p.add_argument("modules", nargs="*", help="Poset module JSON files")
    p.add_argument("--mode", choices=["strong", "weak"], default="strong")
    p.add_argument("--example-ab", action="store_true", help="Classify the modules P_(a,b) over a finite field")
    p.add_argument("--out", "-o", help="Output JSON (default: stdout)")

    p = sub.add_parser("speed", parents=[common], help="Count classes of restrictions to N-point tuples")
    p.add_argument("--module", "-m", required=True, help="Module JSON from persist")
    p.add_argument("--N", type=int, required=True, help="Points per tuple")
    p.add_argument("--mode", choices=["exact", "sample"], default="exact")
    p.add_argument("--samples", type=int, help="Random tuples in sample mode (default: 20)")
    p.add_argument("--equivalence", choices=["strong", "weak"], default="strong")
    p.add_argument("--box", nargs=2, metavar=("LO", "HI"),
                   help="Coordinate range (default: unbounded for exact, [-2, 2] for sample)")
    p.add_argument("--allow-ties", action="store_true", help="Keep tuples with repeated coordinates")
    p.add_argument("--out", "-o", help="Output report JSON (default: stdout)")

    return parser.parse_args(argv)


def load_config(config_path):
    """Load configuration from a JSON file, or the saved user settings when no path is given."""
    if not config_path:
        return SettingsManager().get_all()
    config = FileManager.read_json(config_path)
    if not isinstance(config, dict):
        raise InputError(f"{config_path}: configuration must be a JSON object")
    logger.info(f"Loaded configuration from {config_path}")
    return config


def emit(document, out=None):
    if out:
        if not FileManager.write_json(out, document):
            raise SapersError(f"could not write {out}")
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(dumps(document))


class Progress:
    """tqdm bar driven by ``(percent, message)`` callbacks; log lines without tqdm."""

    def __init__(self, enabled=True):
        self.pbar = None
        self.enabled = enabled and TQDM_AVAILABLE

    def __call__(self, val, msg):
        if not self.enabled:
            logger.debug(f"[{val:.0f}%] {msg}")
            return
        if self.pbar is None:
            self.pbar = tqdm(total=100, unit="%", file=sys.stderr,
                             bar_format='{l_bar}{bar}| {n_fmt}/{total_fmt}% [{elapsed}<{remaining}]')
        self.pbar.set_description(msg.split(":")[0])
        self.pbar.n = round(min(val, 100), 1)
        self.pbar.refresh()

    def close(self):
        if self.pbar is not None:
            self.pbar.close()
            self.pbar = None


def builder_options(settings, progress=None):
    caps = settings['caps']
    return {
        "threads": settings['threads'],
        "seed": settings['seed'],
        "retries": caps['max_shear_retries'],
        "bound": caps['shear_bound'],
        "caps": caps,
        "progress_callback": progress,
    }


def load_module(path, settings, progress=None) -> ConstructibleModule:
    data = FileManager.read_json(path)
    if not isinstance(data, dict):
        raise InputError(f"{path}: a module document is a JSON object")
    return ConstructibleModule.from_dict(data, **builder_options(settings, progress))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_bound(args, settings, manifest=None):
    if args.count:
        names = args.vars or sorted({name for text in args.count for name in _NAME.findall(text)})
        polys = [parse_polynomial(text, names) for text in args.count]
        s = args.s or len(polys)
        d = args.d or max(max(q.total_degree(), 1) for q in polys)
        n = args.n or len(names)
        bound = optm_bound(s, d, n)
        components = enumerated_components(polys, [Symbol(v) for v in names], seed=settings['seed'])
        emit({"s": s, "d": d, "n": n, "optm_bound": bound, "components": components})
        return EXIT_OK
    if args.s is None or args.d is None or args.n is None:
        raise InputError("bound needs --s, --d and --n (or --count)")
    print(optm_bound(args.s, args.d, args.n))
    return EXIT_OK


def cmd_decompose(args, settings, manifest=None):
    polys = manifest.family()
    variables = [Symbol(v) for v in manifest.variables]
    caps = settings['caps']
    decomposition = cc_partition(polys, variables, seed=settings['seed'], retries=caps['max_shear_retries'],
                                 bound=caps['shear_bound'])
    cells = [
        {"id": c.id, "index": list(c.index), "dim": c.dim, "signs": list(c.signs), "component": c.component_id,
         "sample": point_to_json(original_sample(decomposition, c))}
        for c in decomposition.cells
    ]
    degree = max(max(q.total_degree(), 1) for q in polys)
    emit({
        "variables": manifest.variables,
        "polynomials": list(manifest.settings.get('polynomials', {})),
        "shear": decomposition.shear.factor if decomposition.shear else 0,
        "cells": cells,
        "cell_count": len(cells),
        "components": component_count(decomposition),
        "optm_bound": optm_bound(len(polys), degree, len(variables)),
    }, args.out)
    return EXIT_OK


def cmd_persist(args, settings, manifest=None):
    logger.info(f"{manifest.filename}: {manifest.summary()}")
    inp = manifest.to_input(settings)
    progress = Progress(enabled=args.out is not None)
    try:
        module = ModuleBuilder(inp, **builder_options(settings, progress)).build()
    finally:
        progress.close()
    logger.info(f"K = {module.K}, {len(module.cells)} C-cells, complexity witness {module.witness}")
    emit(module.to_dict(), args.out)
    if args.plot:
        from core.plotting import plot_dims
        if not plot_dims(module, args.plot, settings['plot_grid'], tuple(args.box)):
            raise SapersError(f"could not write {args.plot}")
    return EXIT_OK


def cmd_restrict(args, settings, manifest=None):
    points = points_from_json(FileManager.read_json(args.points))
    if not points:
        raise InputError(f"{args.points}: no points to restrict to")
    module = load_module(args.module, settings)
    result = restrict(module, points)
    problems = check_functor(result)
    for problem in problems:
        logger.error(problem)
    if problems:
        raise SapersError(f"restriction violates {len(problems)} functor laws")
    emit(result.to_dict(), args.out)
    return EXIT_OK


def cmd_classify(args, settings, manifest=None):
    search = {"budget": settings['caps']['search_budget'], "max_dim": settings['caps']['max_search_dim']}
    labels = []
    if args.example_ab:
        fld = Field(settings['field'])
        if not fld.is_finite:
            raise InputError("--example-ab enumerates a finite field")
        modules = []
        for a in fld.elements():
            for b in fld.elements():
                if a or b:
                    modules.append(example_ab(a, b, fld))
                    labels.append([fld.to_str(a), fld.to_str(b)])
    else:
        if not args.modules:
            raise InputError("classify needs poset module files (or --example-ab)")
        modules = [FinitePosetModule.from_dict(FileManager.read_json(path)) for path in args.modules]
        labels = list(args.modules)
    result = classify(modules, mode=args.mode, **search)
    emit({
        "mode": args.mode,
        "count": result.count,
        "classes": [[labels[i] for i in members] for members in result.classes],
        "undecided": [[labels[i], labels[j]] for i, j in result.undecided],
    }, args.out)
    return EXIT_OK


def cmd_speed(args, settings, manifest=None):
    progress = Progress(enabled=args.out is not None)
    try:
        module = load_module(args.module, settings)
        report = count_classes(module, args.N, strategy=args.mode, samples=settings['samples'],
                               seed=settings['seed'], box=args.box, distinct=not args.allow_ties,
                               equivalence=args.equivalence, caps=settings['caps'], threads=settings['threads'],
                               progress_callback=progress)
    finally:
        progress.close()
    for line in report.table().splitlines():
        logger.info(line)
    emit(report.to_dict(), args.out)
    return EXIT_OK


COMMANDS = {
    "bound": cmd_bound,
    "decompose": cmd_decompose,
    "persist": cmd_persist,
    "restrict": cmd_restrict,
    "classify": cmd_classify,
    "speed": cmd_speed,
}


def run_cli(args):
    set_verbose(args.verbose)
    config = load_config(args.config)
    manifest = None
    if getattr(args, "input", None):
        manifest = Manifest.load(args.input)
    settings = build_settings(args, config, manifest)
    logger.debug(f"settings: {settings}")
    return COMMANDS[args.command](args, settings, manifest)


def main(argv=None):
    args = parse_arguments(argv)
    try:
        return run_cli(args)
    except KeyboardInterrupt:
        logger.info("Process interrupted by user.")
        return EXIT_INPUT
    except SapersError as e:
        logger.error(f"{e.kind}: {e}")
        sys.stdout.write(dumps({"error": e.kind, "message": str(e)}))
        return EXIT_CAPS if isinstance(e, CapsExceededError) else EXIT_INPUT
    except Exception as e:
        logger.error(f"An unexpected error occurred: {e}", exc_info=True)
        sys.stdout.write(dumps({"error": "error", "message": str(e)}))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
