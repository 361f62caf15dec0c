"""Speed of multi-parameter persistence: the counting bounds and class-count experiments.

A tuple T = (t_1, ..., t_N) of parameter points determines the finite poset
module restrict(M, T); its strong class only depends on which D-cell each
pair (t_a, t_b) falls in.  ``count_classes`` counts the classes that occur,
either exactly (one tuple per cell of a CAD of the pulled-back D family) or
from random rational tuples.
"""
from dataclasses import dataclass, field
from math import comb
from typing import List, Optional, Sequence, Tuple

import numpy as np
from sympy import Poly, QQ, Rational, Symbol

from core.algebra import RationalPoint, compare
from core.cad import cc_partition, component_count, decompose, factor_family, in_variables
from core.errors import CapsExceededError, InputError
from core.persistence import ConstructibleModule, primed, restrict
from core.posetmod import classify
from utils.logger import logger
from utils.serialization import point_to_json, rational_to_str
from utils.workers import map_ordered

SAMPLE_DENOMINATOR = 64


def optm_bound(s: int, d: int, n: int) -> int:
    """Bound on the number of connected components of realizable sign conditions of s polynomials of degree <= d in R^n."""
    if min(s, d, n) < 1:
        raise InputError("optm_bound needs s, d, n >= 1")
    return sum(comb(s, j) * 4 ** j for j in range(1, n + 1)) * d * (2 * d - 1) ** (n - 1)


def speed_bound(C: int, p: int, N: int) -> int:
    """Bound on the number of strong classes of restrictions to N-point tuples."""
    if min(C, p, N) < 1:
        raise InputError("speed_bound needs C, p, N >= 1")
    return sum(comb(C * N * N, j) for j in range(1, p * N + 1)) * C ** (p * N)


@dataclass
class SpeedReport:
    N: int
    p: int
    observed_classes: int
    bound_value: int
    method: str
    samples: int
    complexity: int = 0
    equivalence: str = "strong"
    box: Optional[Tuple[Rational, Rational]] = None
    distinct: bool = True
    witnesses: List[list] = field(default_factory=list)
    undecided: int = 0

    @property
    def within_bound(self) -> bool:
        return self.observed_classes <= self.bound_value

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "p": self.p,
            "observed_classes": self.observed_classes,
            "bound_value": str(self.bound_value),
            "within_bound": self.within_bound,
            "method": self.method,
            "samples": self.samples,
            "complexity_witness": self.complexity,
            "equivalence": self.equivalence,
            "box": [rational_to_str(v) for v in self.box] if self.box else None,
            "distinct": self.distinct,
            "witnesses": self.witnesses,
            "undecided_pairs": self.undecided,
        }

    def table(self) -> str:
        rows = [
            ("tuples of", f"N = {self.N} points in R^{self.p}"),
            ("method", f"{self.method} ({self.samples} tuples)"),
            ("equivalence", self.equivalence),
            ("observed classes", str(self.observed_classes)),
            ("complexity C", str(self.complexity)),
            ("speed bound", str(self.bound_value)),
            ("within bound", "yes" if self.within_bound else "NO"),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def tuple_variables(p: int, N: int) -> Tuple[Symbol, ...]:
    return tuple(Symbol(f"t{a + 1}_{i + 1}") for a in range(N) for i in range(p))


def pulled_back_family(module: ConstructibleModule, N: int, box=None) -> List[Poly]:
    """D(t_a, t_b) over all ordered pairs plus the box faces, factored over the tuple variables.

    The diagonal pairs carry the C family at each t_a.
    """
    p = module.p
    variables = tuple_variables(p, N)
    params = tuple(module.input.params)
    primes = tuple(primed(y) for y in params)
    exprs = []
    for poly in module.d_family:
        expr = poly.as_expr()
        for a in range(N):
            for b in range(N):
                subs = {params[i]: variables[a * p + i] for i in range(p)}
                subs.update({primes[i]: variables[b * p + i] for i in range(p)})
                exprs.append(expr.subs(subs, simultaneous=True))
    if box is not None:
        lo, hi = box
        for t in variables:
            exprs.extend([t - lo, t - hi])
    polys = [Poly(e, *variables, domain=QQ) for e in exprs]
    return factor_family([q.as_expr() for q in polys if q.total_degree() > 0], variables)


def _in_box(point, box) -> bool:
    if box is None:
        return True
    lo, hi = box
    return all(compare(point.value(i), lo) >= 0 and compare(point.value(i), hi) <= 0 for i in range(point.dim))


def _distinct(point, p: int, N: int) -> bool:
    """Pairwise distinct values in every parameter coordinate."""
    for i in range(p):
        values = [point.value(a * p + i) for a in range(N)]
        for a in range(N):
            for b in range(a + 1, N):
                if compare(values[a], values[b]) == 0:
                    return False
    return True


def _normalize_box(box):
    if box is None:
        return None
    lo, hi = Rational(box[0]), Rational(box[1])
    if lo > hi:
        raise InputError(f"empty box [{lo}, {hi}]")
    return lo, hi


def count_classes(module: ConstructibleModule, N: int, strategy: str = "exact", samples: int = 20, seed: int = 0,
                  box=None, distinct: bool = True, equivalence: str = "strong", caps: Optional[dict] = None,
                  threads: int = 1, progress_callback=None) -> SpeedReport:
    """Count equivalence classes of restrict(module, T) over N-point tuples T."""
    if N < 1:
        raise InputError("N must be at least 1")
    caps = caps or {}
    box = _normalize_box(box)
    p = module.p
    search = {"budget": caps.get("search_budget", 200000), "max_dim": caps.get("max_search_dim", 8)}
    if strategy == "exact":
        limit = caps.get("max_exact_pn", 4)
        if p * N > limit:
            raise CapsExceededError(f"exact enumeration over (R^{p})^{N} exceeds p*N <= {limit}")
        tuples = _enumerate_tuples(module, N, box, distinct)
        method = "enumeration"
    elif strategy == "sample":
        tuples = _sample_tuples(p, N, samples, seed, box or (Rational(-2), Rational(2)), distinct)
        method = "sampling"
    else:
        raise InputError(f"unknown strategy {strategy!r} (expected exact or sample)")
    logger.info(f"{len(tuples)} tuples of {N} points ({method})")
    modules = map_ordered(lambda t: restrict(module, [], joint=t), tuples, threads, progress_callback,
                         "restrictions")
    classes = classify(modules, mode=equivalence, **search)
    witnesses = [[point_to_json(tuples[members[0]].project(range(a * p, (a + 1) * p))) for a in range(N)]
                 for members in classes.classes]
    complexity = max(module.witness, 1)
    report = SpeedReport(N, p, classes.count, speed_bound(complexity, p, N), method, len(tuples), complexity,
                         equivalence, box, distinct, witnesses, len(classes.undecided))
    if method == "enumeration" and not report.within_bound:
        logger.error(f"{report.observed_classes} classes exceed the speed bound {report.bound_value}")
    return report


def _enumerate_tuples(module: ConstructibleModule, N: int, box, distinct: bool) -> list:
    p = module.p
    variables = tuple_variables(p, N)
    family = pulled_back_family(module, N, box)
    decomposition = decompose(family, variables)
    out = []
    for cell in decomposition.cells:
        if not _in_box(cell.sample, box):
            continue
        if distinct and not _distinct(cell.sample, p, N):
            continue
        out.append(cell.sample)
    logger.debug(f"{len(decomposition.cells)} cells in (R^{p})^{N}, {len(out)} kept")
    return out


def _sample_tuples(p: int, N: int, samples: int, seed: int, box, distinct: bool) -> list:
    rng = np.random.default_rng(seed)
    lo, hi = box
    low = int(np.ceil(float(lo * SAMPLE_DENOMINATOR)))
    high = int(np.floor(float(hi * SAMPLE_DENOMINATOR)))
    if distinct and high - low + 1 < N:
        raise InputError(f"the box holds fewer than {N} distinct sample values")
    out = []
    for _ in range(samples):
        while True:
            draws = rng.integers(low, high + 1, size=(N, p))
            if not distinct or all(len(set(draws[:, i])) == N for i in range(p)):
                break
        out.append(RationalPoint(tuple(Rational(int(v), SAMPLE_DENOMINATOR) for v in draws.reshape(-1))))
    return out


def enumerated_components(polys: Sequence[Poly], variables: Sequence[Symbol], seed: int = 0) -> int:
    """card(Cc(polys)) from the cylindrical decomposition (at most 2 variables)."""
    polys = [in_variables(q, variables) for q in polys]
    return component_count(cc_partition(polys, variables, seed=seed))
