"""Constructible encoding of the multi-parameter persistence module.

Pipeline (``ModuleBuilder``):

1. thicken S into S~ = {(x, y) : x in S, f(x) <= y} and triangulate it over
   parameter space: a C-partition of R^p with a labelled fiber complex K_C
   per cell;
2. per C-cell, Delta_C = (l+1)-skeleton of the nerve of the closed cover of
   K_C by its maximal simplices, with fixed homology bases;
3. a D-partition of R^p x R^p from the joint projection of the family at
   Y and Y' together with Y'_i - Y_i; for each D-cell inside pairs(R^p)
   the inclusion-induced map is computed at the cell's sample in the fixed
   Delta bases and stored K x K padded.

Maps are computed on a common refinement of the two fibers (the joint fiber
CAD), carried to the fiber complexes by cell containment, and expressed
against the images of the nerve bases.
"""
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import Poly, QQ, Rational, Symbol

from core.algebra import Point, RationalPoint, compare, format_polynomial, parse_polynomial
from core.cad import Decomposition, decompose, in_variables, projection_levels
from core.complexes import (HomologyBasis, SimplicialComplex, chain_map, homology, homology_from_cycles,
                            induced_map, nerve, nerve_chain_map, skeleton)
from core.errors import CapsExceededError, InputError
from core.fields import Field, FieldMatrix
from core.posetmod import FinitePoset, FinitePosetModule
from core.triangulation import (ClosedFormula, ParamTriangulation, as_point, cell_complex,
                                triangulate, triangulate_parametrized)
from utils.logger import logger
from utils.serialization import point_to_json
from utils.workers import map_ordered


def primed(symbol: Symbol) -> Symbol:
    return Symbol(f"{symbol.name}_p")


# ---------------------------------------------------------------------------
# Input
# ---------------------------------------------------------------------------

@dataclass
class FiltrationInput:
    """S in R^n (closed, bounded) with a continuous f: S -> R^p.

    ``f`` is either polynomial components over ``variables`` or a graph
    formula over ``variables + aux`` (one auxiliary variable per parameter).
    """
    variables: Tuple[Symbol, ...]
    params: Tuple[Symbol, ...]
    s_formula: ClosedFormula
    f: Optional[List[Poly]] = None
    f_graph: Optional[ClosedFormula] = None
    aux: Tuple[Symbol, ...] = ()
    ell: int = 0
    field: Field = field(default_factory=Field)
    d_override: Optional[List[Poly]] = None

    def __post_init__(self):
        if (self.f is None) == (self.f_graph is None):
            raise InputError("give exactly one of f (polynomials) or f_graph (graph formula)")
        if self.f is not None and len(self.f) != len(self.params):
            raise InputError(f"f has {len(self.f)} components for {len(self.params)} parameters")
        if self.f_graph is not None and len(self.aux) != len(self.params):
            raise InputError("a graph formula needs one auxiliary variable per parameter")
        if self.ell < 0:
            raise InputError("ell must be non-negative")

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def p(self) -> int:
        return len(self.params)

    @property
    def fiber_variables(self) -> Tuple[Symbol, ...]:
        return tuple(self.variables) + tuple(self.aux)

    @property
    def all_variables(self) -> Tuple[Symbol, ...]:
        return tuple(self.params) + self.fiber_variables

    def check_caps(self, caps: dict):
        if len(self.fiber_variables) > caps.get("max_fiber_dim", 2):
            raise CapsExceededError(f"fiber dimension {len(self.fiber_variables)} exceeds {caps.get('max_fiber_dim', 2)}")
        if self.p > caps.get("max_params", 2):
            raise CapsExceededError(f"{self.p} parameters exceed {caps.get('max_params', 2)}")
        if self.ell > caps.get("max_ell", 1):
            raise CapsExceededError(f"ell = {self.ell} exceeds {caps.get('max_ell', 1)}")

    def to_dict(self) -> dict:
        out = {
            "variables": [v.name for v in self.variables],
            "params": [v.name for v in self.params],
            "S": self.s_formula.to_dict(),
            "ell": self.ell,
            "field": self.field.name,
        }
        if self.f is not None:
            out["f"] = [format_polynomial(p) for p in self.f]
        else:
            out["f_graph"] = self.f_graph.to_dict()
            out["aux"] = [v.name for v in self.aux]
        if self.d_override is not None:
            out["d_override"] = [format_polynomial(p) for p in self.d_override]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> 'FiltrationInput':
        try:
            names = [str(v) for v in data["variables"]]
            params = [str(v) for v in data["params"]]
            aux = [str(v) for v in data.get("aux", [])]
            ell = int(data.get("ell", 0))
            fld = Field(data.get("field", "gf2"))
            s_formula = ClosedFormula.from_dict(data["S"], names)
        except KeyError as e:
            raise InputError(f"module input misses {e}") from e
        f = [parse_polynomial(t, names) for t in data["f"]] if "f" in data else None
        graph = ClosedFormula.from_dict(data["f_graph"], names + aux) if "f_graph" in data else None
        override = None
        if data.get("d_override") is not None:
            override = [parse_polynomial(t, params + [primed(Symbol(y)).name for y in params])
                        for t in data["d_override"]]
        return cls(tuple(Symbol(v) for v in names), tuple(Symbol(v) for v in params), s_formula, f, graph,
                   tuple(Symbol(v) for v in aux), ell, fld, override)


def thicken(inp: FiltrationInput) -> ClosedFormula:
    """S~ over ``params + fiber variables``: S, and f_i(x) <= y_i (through Z_i when f is a graph)."""
    variables = inp.all_variables
    parts = [inp.s_formula.map_polys(lambda p: in_variables(p, variables))]
    if inp.f is not None:
        for fi, y in zip(inp.f, inp.params):
            parts.append(ClosedFormula.atom(Poly(fi.as_expr() - y, *variables, domain=QQ), '<='))
    else:
        parts.append(inp.f_graph.map_polys(lambda p: in_variables(p, variables)))
        for z, y in zip(inp.aux, inp.params):
            parts.append(ClosedFormula.atom(Poly(z - y, *variables, domain=QQ), '<='))
    return ClosedFormula.conj(*parts)


def check_graph(inp: FiltrationInput):
    """A graph formula must meet each vertical line over S in exactly one point (checked per CAD cell)."""
    if inp.f_graph is None:
        return
    variables = inp.variables + inp.aux
    phi = ClosedFormula.conj(inp.s_formula.map_polys(lambda p: in_variables(p, variables)),
                             inp.f_graph.map_polys(lambda p: in_variables(p, variables)))
    family = phi.polys()
    s_only = inp.s_formula.map_polys(lambda p: in_variables(p, inp.variables))
    levels = projection_levels(family, variables)
    base = decompose(s_only.polys(), inp.variables, levels=levels[:inp.n])
    for cell in base.cells:
        if not s_only.holds_at(cell.sample):
            continue
        fiber = decompose(family, variables, anchor=cell.sample, n_fixed=inp.n, levels=levels)
        hits = [c for c in fiber.cells if phi.holds_at(c.sample)]
        if len(hits) != 1 or hits[0].dim != 0:
            raise InputError(f"f_graph is not single-valued over the cell of S at {point_to_json(cell.sample)}")


def specialize(inp: FiltrationInput, y: Sequence) -> ClosedFormula:
    """S_{f <= y} as a formula over the fiber variables."""
    values = {s: Rational(v) for s, v in zip(inp.params, y)}
    return thicken(inp).specialize(values, inp.fiber_variables)


# ---------------------------------------------------------------------------
# Per-cell data
# ---------------------------------------------------------------------------

@dataclass
class CellRecord:
    """A C-cell with its fiber complex, nerve skeleton and fixed homology bases."""
    id: int
    index: Tuple[int, ...]
    sample: Point
    complex: SimplicialComplex
    cover: List[tuple]
    nerve: SimplicialComplex
    bases: List[HomologyBasis]
    carried: List[Optional[HomologyBasis]]

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(b.rank for b in self.bases)


def nerve_data(complex_: SimplicialComplex, ell: int, fld: Field, cell_id=None, index=(), sample=None):
    cover = complex_.facets()
    if not cover:
        empty = SimplicialComplex()
        bases = [homology(empty, i, fld) for i in range(ell + 1)]
        return CellRecord(cell_id, index, sample, complex_, [], empty, bases, [None] * (ell + 1))
    delta = skeleton(nerve(cover, max_dim=ell + 1), ell + 1)
    bases = []
    carried = []
    for i in range(ell + 1):
        basis = homology(delta, i, fld)
        images = [nerve_chain_map(cover, z, fld) for z in basis.cycles]
        bases.append(basis)
        carried.append(homology_from_cycles(complex_, i, images, fld))
    return CellRecord(cell_id, index, sample, complex_, cover, delta, bases, carried)


# ---------------------------------------------------------------------------
# The constructible module
# ---------------------------------------------------------------------------

@dataclass
class ConstructibleModule:
    """C-partition dims and D-partition maps (K x K padded, rows = target, cols = source)."""
    input: FiltrationInput
    K: int
    c_partition: Decomposition
    cells: Dict[int, CellRecord]
    d_partition: Decomposition
    d_family: List[Poly]
    maps: Dict[Tuple[int, ...], List[FieldMatrix]] = field(default_factory=dict)
    witness: int = 0
    pipeline_witness: int = 0
    builder: Optional['ModuleBuilder'] = field(default=None, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @property
    def ell(self) -> int:
        return self.input.ell

    @property
    def field(self) -> Field:
        return self.input.field

    @property
    def p(self) -> int:
        return self.input.p

    def locate(self, point, part: str = "C"):
        """C-cell id of a parameter point, or D-cell index of a pair point (y, y')."""
        point = as_point(point)
        if part == "C":
            return self.c_partition.locate(point).id
        if part == "D":
            return self.d_partition.locate_index(point)
        raise ValueError(f"unknown partition {part!r}")

    def dims_at(self, y) -> Tuple[int, ...]:
        return self.cells[self.locate(y)].dims

    def padded_maps(self, d_index: Tuple[int, ...]) -> List[FieldMatrix]:
        with self._lock:
            found = self.maps.get(d_index)
        if found is not None:
            return found
        if self.builder is None:
            raise InputError(f"no map stored for D-cell {list(d_index)}")
        computed = self.builder.cell_maps(self, d_index)
        with self._lock:
            self.maps.setdefault(d_index, computed)
        return computed

    def matrices(self, a, b) -> List[FieldMatrix]:
        """Un-padded matrices of H_i(S_{f<=a}) -> H_i(S_{f<=b}), one per degree."""
        pair = pair_point(as_point(a), as_point(b))
        return self.pair_matrices(pair)

    def pair_matrices(self, pair: Point) -> List[FieldMatrix]:
        p = self.p
        if not all(compare(pair.value(i), pair.value(i + p)) <= 0 for i in range(p)):
            raise InputError("the pair is not comparable (a must precede b coordinatewise)")
        source = self.cells[self.c_partition.locate(pair.project(range(p))).id].dims
        target = self.cells[self.c_partition.locate(pair.project(range(p, 2 * p))).id].dims
        padded = self.padded_maps(self.d_partition.locate_index(pair))
        return [m.unpad(target[i], source[i]) for i, m in enumerate(padded)]

    def rank_invariant(self, a, b, degree: int) -> int:
        return self.matrices(a, b)[degree].rank()

    def __eq__(self, other):
        if not isinstance(other, ConstructibleModule):
            return NotImplemented
        mine = {c.index: c.dims for c in self.cells.values()}
        theirs = {c.index: c.dims for c in other.cells.values()}
        return (self.K, self.ell, self.field) == (other.K, other.ell, other.field) and mine == theirs \
            and self.maps == other.maps

    def to_dict(self) -> dict:
        return {
            "input": self.input.to_dict(),
            "K": self.K,
            "ell": self.ell,
            "field": self.field.name,
            "complexity_witness": self.witness,
            "pipeline_witness": self.pipeline_witness,
            "d_family": [format_polynomial(p) for p in self.d_family],
            "c_cells": [
                {"index": list(c.index), "sample": point_to_json(c.sample), "dims": list(c.dims),
                 "complex": [list(s) for s in c.complex.facets()]}
                for c in sorted(self.cells.values(), key=lambda c: c.id)
            ],
            "d_cells": [
                {"index": list(index), "matrices": [m.to_list() for m in mats]}
                for index, mats in sorted(self.maps.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: dict, **options) -> 'ConstructibleModule':
        """Rebuild the partitions from the embedded input and restore the stored maps."""
        try:
            inp = FiltrationInput.from_dict(data["input"])
            builder = ModuleBuilder(inp, **options)
            module = builder.prepare(lazy=True)
            fld = module.field
            for entry in data.get("d_cells", []):
                module.maps[tuple(entry["index"])] = [FieldMatrix.from_rows(fld, rows, cols=module.K)
                                                      for rows in entry["matrices"]]
        except (KeyError, TypeError, ValueError) as e:
            raise InputError(f"malformed module document: {e}") from e
        if int(data.get("K", module.K)) != module.K:
            raise InputError("stored padding dimension does not match the rebuilt module")
        return module


def pair_point(a: Point, b: Point) -> Point:
    if isinstance(a, RationalPoint) and isinstance(b, RationalPoint):
        return RationalPoint(a.coords + b.coords)
    if isinstance(a, RationalPoint) and a.dim == 0:
        return b
    raise InputError("pairs of algebraic points need a joint representation")


def family_witness(polys: Sequence[Poly]) -> int:
    """card(D) * deg(D)."""
    if not polys:
        return 0
    return len(polys) * max(p.total_degree() for p in polys)


class ModuleBuilder:
    """Runs the pipeline; maps for lazily materialised D-cells are computed on demand."""

    def __init__(self, inp: FiltrationInput, threads: int = 1, seed: int = 0, retries: int = 6, bound: int = 1,
                 caps: Optional[dict] = None, progress_callback=None):
        self.input = inp
        self.threads = max(1, int(threads))
        self.seed = seed
        self.retries = retries
        self.bound = bound
        self.caps = caps or {}
        self.progress_callback = progress_callback
        self.pt: Optional[ParamTriangulation] = None
        self.joint_family: List[Poly] = []
        self.joint_levels = None

    def _progress(self, value, message):
        if self.progress_callback:
            self.progress_callback(value, message)

    # -- stages -------------------------------------------------------------

    def prepare(self, lazy: Optional[bool] = None) -> ConstructibleModule:
        """C-partition with per-cell data and the (possibly lazy) D-partition; no maps yet."""
        inp = self.input
        inp.check_caps(self.caps)
        triangulate(inp.s_formula, inp.variables, seed=self.seed, retries=self.retries, bound=self.bound)
        check_graph(inp)
        phi = thicken(inp)
        self._progress(5, "triangulating fibers over parameter space")
        self.pt = triangulate_parametrized(phi, inp.params, inp.fiber_variables, seed=self.seed,
                                           retries=self.retries, bound=self.bound, threads=self.threads,
                                           progress_callback=self._scaled(5, 40))
        partition = self.pt.param_partition
        records = map_ordered(
            lambda c: nerve_data(self.pt.per_cell[c.id].complex, inp.ell, inp.field, c.id, c.index, c.sample),
            partition.cells, self.threads, self._scaled(40, 55), "nerves")
        cells = {r.id: r for r in records}
        K = max((d for r in records for d in r.dims), default=0)
        logger.info(f"{len(cells)} parameter cells, padding dimension K = {K}")

        p = inp.p
        params = tuple(inp.params)
        primes = tuple(primed(y) for y in params)
        variables = params + primes + tuple(inp.fiber_variables)
        renaming = dict(zip(params, primes))
        own = [in_variables(q, variables) for q in self.pt.family]
        moved = [Poly(q.as_expr().subs(renaming, simultaneous=True), *variables, domain=QQ) for q in self.pt.family]
        diffs = [Poly(yp - y, *variables, domain=QQ) for y, yp in zip(params, primes)]
        self.joint_family = own + moved + diffs
        self._progress(55, "projecting the pair family")
        self.joint_levels = projection_levels(self.joint_family, variables, derivative_closure=True)
        if lazy is None:
            lazy = p > 1
        d_partition = decompose(diffs, params + primes, levels=self.joint_levels[:2 * p], lazy=lazy)
        d_family = [in_variables(q, params + primes) for level in self.joint_levels[:2 * p] for q in level]
        pipeline_witness = family_witness(d_family)
        witness = family_witness(inp.d_override) if inp.d_override else pipeline_witness
        return ConstructibleModule(inp, K, partition, cells, d_partition, d_family, {}, witness,
                                   pipeline_witness, builder=self)

    def build(self) -> ConstructibleModule:
        module = self.prepare()
        if module.d_partition.cells is not None:
            targets = [c for c in module.d_partition.cells if all(s >= 0 for s in c.signs)]
            logger.info(f"computing maps for {len(targets)} D-cells in pairs")
            results = map_ordered(lambda c: self.cell_maps(module, c.index), targets, self.threads,
                                 self._scaled(60, 100), "D-cell maps")
            module.maps = {c.index: r for c, r in zip(targets, results)}
        else:
            logger.info("D-partition is materialised lazily; maps are computed per located cell")
        self._progress(100, "done")
        return module

    def _scaled(self, lo, hi):
        def callback(value, message):
            self._progress(lo + (hi - lo) * value / 100, message)
        return callback

    # -- maps ---------------------------------------------------------------

    def cell_maps(self, module: ConstructibleModule, d_index: Tuple[int, ...]) -> List[FieldMatrix]:
        """Padded maps of a D-cell, computed at its canonical sample."""
        sample = module.d_partition.sample_at(d_index)
        return [m.pad(module.K) for m in self.map_at(module, sample)]

    def map_at(self, module: ConstructibleModule, pair: Point) -> List[FieldMatrix]:
        """Un-padded maps in the fixed nerve bases at a pair point (y, y') with y <= y'."""
        inp = self.input
        p = inp.p
        fld = inp.field
        gaps = [compare(pair.value(i + p), pair.value(i)) for i in range(p)]
        if any(g < 0 for g in gaps):
            raise InputError("D-cell outside pairs(R^p)")
        y = pair.project(range(p))
        y2 = pair.project(range(p, 2 * p))
        source = module.cells[module.c_partition.locate(y).id]
        target = module.cells[module.c_partition.locate(y2).id]
        if all(g == 0 for g in gaps):
            return [FieldMatrix.identity(fld, d) for d in source.dims]
        if not any(source.dims) or not any(target.dims):
            return [FieldMatrix.zeros(fld, b, a) for a, b in zip(source.dims, target.dims)]

        pt = self.pt
        n_fixed = 2 * p
        variables = tuple(inp.params) + tuple(primed(v) for v in inp.params) + tuple(inp.fiber_variables)
        joint = decompose(self.joint_family, variables, anchor=pair, n_fixed=n_fixed, levels=self.joint_levels)
        joint.shear = pt.shear
        m = len(pt.family)
        index = {q: i for i, q in reversed(list(enumerate(pt.family)))}
        sheared = pt.formula.map_polys(pt.shear.apply)

        def holds(cell, offset):
            return sheared.evaluate(lambda q: cell.signs[offset + index[q]])

        big = [c for c in joint.cells if holds(c, m)]
        small = {c.id for c in big if holds(c, 0)}
        complex_, _, _ = cell_complex(joint, big)
        sub = SimplicialComplex(s for s in complex_.all_simplices() if set(s) <= small)

        fiber_idx = list(range(n_fixed, n_fixed + len(inp.fiber_variables)))
        fiber_y = pt.fiber(y).decomposition
        fiber_y2 = pt.fiber(y2).decomposition
        to_source = {c.id: fiber_y.locate_index(c.sample.project(list(range(p)) + fiber_idx))
                     for c in big if c.id in small}
        to_target = {c.id: fiber_y2.locate_index(c.sample.project(list(range(p, 2 * p)) + fiber_idx))
                     for c in big}

        out = []
        for i in range(inp.ell + 1):
            d1, d2 = source.dims[i], target.dims[i]
            if d1 == 0 or d2 == 0:
                out.append(FieldMatrix.zeros(fld, d2, d1))
                continue
            cycles = homology(sub, i, fld).cycles
            if len(cycles) != d1:
                raise ValueError(f"degree {i}: refined fiber has rank {len(cycles)}, expected {d1}")
            p0 = FieldMatrix.from_columns(
                fld, [source.carried[i].coordinates(chain_map(to_source, z, fld)) for z in cycles], d1)
            q = FieldMatrix.from_columns(
                fld, [target.carried[i].coordinates(chain_map(to_target, z, fld)) for z in cycles], d2)
            out.append(q @ p0.inverse())
        return out


def build(inp: FiltrationInput, **options) -> ConstructibleModule:
    return ModuleBuilder(inp, **options).build()


def locate(point, module: ConstructibleModule, part: str = "C"):
    return module.locate(point, part)


# ---------------------------------------------------------------------------
# Restriction to finite point sets
# ---------------------------------------------------------------------------

def _precedes(a: Point, b: Point) -> bool:
    return all(compare(a.value(i), b.value(i)) <= 0 for i in range(a.dim))


def restrict(module: ConstructibleModule, points: Sequence, joint: Optional[Point] = None) -> FinitePosetModule:
    """The finite poset module on ``points`` ordered coordinatewise.

    ``joint`` is an optional single point of R^(pN) holding all of ``points``
    (needed when they are algebraic and share one representation).
    """
    if not points and joint is None:
        raise InputError("restriction needs at least one point")
    p = module.p
    if joint is not None:
        count = joint.dim // p
        pts = [joint.project(range(j * p, (j + 1) * p)) for j in range(count)]
    else:
        pts = [as_point(t) for t in points]
    for t in pts:
        if t.dim != p:
            raise InputError(f"point of dimension {t.dim} for {p} parameters")
    size = len(pts)
    poset = FinitePoset.from_pairs(size, [(a, b) for a in range(size) for b in range(size)
                                          if a != b and _precedes(pts[a], pts[b])]) \
        if not _has_ties(pts) else _tied_poset(pts)
    c_dims = [module.dims_at(t) for t in pts]
    dims = tuple(tuple(c_dims[j][i] for j in range(size)) for i in range(module.ell + 1))
    maps: List[Dict] = [dict() for _ in range(module.ell + 1)]
    for a, b in poset.strict_pairs():
        if joint is not None:
            pair = joint.project(list(range(a * p, (a + 1) * p)) + list(range(b * p, (b + 1) * p)))
        else:
            pair = pair_point(pts[a], pts[b])
        for i, m in enumerate(module.pair_matrices(pair)):
            maps[i][(a, b)] = m
    return FinitePosetModule(poset, module.field, dims, tuple(maps))


def _has_ties(pts) -> bool:
    return any(a is not b and _precedes(a, b) and _precedes(b, a) for a in pts for b in pts)


def _tied_poset(pts) -> FinitePoset:
    # equal points precede each other; keep the order on first occurrences and
    # let later copies sit above earlier ones
    size = len(pts)
    pairs = []
    for a in range(size):
        for b in range(size):
            if a == b or not _precedes(pts[a], pts[b]):
                continue
            if _precedes(pts[b], pts[a]) and b < a:
                continue
            pairs.append((a, b))
    return FinitePoset.from_pairs(size, pairs)


# ---------------------------------------------------------------------------
# Direct oracles
# ---------------------------------------------------------------------------

def direct_betti(inp: FiltrationInput, y: Sequence, seed: int = 0) -> List[int]:
    """Betti numbers (degrees 0..ell) of S_{f<=y} from an independent triangulation."""
    t = triangulate(specialize(inp, y), inp.fiber_variables, seed=seed)
    return t.betti(inp.field, inp.ell)


def direct_map_rank(inp: FiltrationInput, a: Sequence, b: Sequence, degree: int, seed: int = 0) -> int:
    """Rank of H_degree(S_{f<=a}) -> H_degree(S_{f<=b}) via a triangulation of S_{f<=b} refined by S_{f<=a}."""
    t = triangulate(specialize(inp, b), inp.fiber_variables, subsets=[specialize(inp, a)], seed=seed)
    return induced_map(t.subcomplexes[0], t.complex, degree, inp.field).rank()
