"""Exact real algebra over the rationals.

Polynomials are sympy ``Poly`` objects over ``QQ``.  Real algebraic numbers
are handled through Sturm-isolated roots of univariate polynomials, Thom
encodings and real univariate representations (RUR): a point of R^k whose
coordinates are polynomials, modulo ``f``, in one real root ``t`` of ``f``.

Every univariate polynomial produced here uses the private generator ``T``.
"""
import logging
from dataclasses import dataclass, field
from itertools import count
from typing import List, Optional, Sequence, Tuple, Union

from sympy import Poly, QQ, Rational, Symbol, floor, resultant
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from core.errors import InputError

logger = logging.getLogger(__name__)

T = Symbol('_T')
_S = Symbol('_S')
_C = Symbol('_C')
_Z = Symbol('_Z')

_TRANSFORMATIONS = standard_transformations + (convert_xor,)


def sgn(value) -> int:
    if value > 0:
        return 1
    if value < 0:
        return -1
    return 0


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------

def parse_polynomial(text, variables: Sequence[str]) -> Poly:
    """Parse ``text`` (``^`` for powers, ``*`` for products) into a Poly over QQ."""
    if not variables:
        raise InputError("a polynomial needs at least one declared variable")
    symbols = {name: Symbol(name) for name in variables}
    try:
        expr = parse_expr(str(text), local_dict=dict(symbols), transformations=_TRANSFORMATIONS)
    except Exception as e:
        raise InputError(f"cannot parse polynomial {text!r}: {e}") from e
    unknown = {str(s) for s in getattr(expr, 'free_symbols', set())} - set(symbols)
    if unknown:
        raise InputError(f"polynomial {text!r} uses undeclared variables {sorted(unknown)}")
    try:
        return Poly(expr, *[symbols[name] for name in variables], domain=QQ)
    except Exception as e:
        raise InputError(f"{text!r} is not a polynomial with rational coefficients: {e}") from e


def format_polynomial(poly: Poly) -> str:
    """Text form in graded-lex order, parseable back by ``parse_polynomial``."""
    if poly.is_zero:
        return "0"
    names = [str(g) for g in poly.gens]
    pieces = []
    for monom, coeff in poly.terms(order='grlex'):
        factors = []
        for name, exponent in zip(names, monom):
            if exponent == 1:
                factors.append(name)
            elif exponent > 1:
                factors.append(f"{name}^{exponent}")
        magnitude = abs(coeff)
        if factors:
            body = '*'.join(factors)
            text = body if magnitude == 1 else f"{magnitude}*{body}"
        else:
            text = str(magnitude)
        pieces.append(('-' if coeff < 0 else '+', text))
    head_sign, head = pieces[0]
    out = ('-' if head_sign == '-' else '') + head
    for sign, text in pieces[1:]:
        out += f" {sign} {text}"
    return out


def univariate(poly: Poly) -> Poly:
    """The same univariate polynomial over the generator ``T``."""
    if len(poly.gens) != 1:
        raise ValueError(f"expected a univariate polynomial, got generators {poly.gens}")
    if poly.gen == T:
        return poly
    return Poly(poly.as_expr().subs(poly.gen, T), T, domain=QQ)


def from_coefficients(coeffs) -> Poly:
    """Univariate polynomial in ``T`` from coefficients, highest degree first."""
    coeffs = [Rational(c) for c in coeffs] or [Rational(0)]
    return Poly(coeffs, T, domain=QQ)


def sign_at(poly: Poly, x: Sequence) -> int:
    """Exact sign of ``poly`` at a rational point."""
    if len(x) != len(poly.gens):
        raise ValueError(f"point of dimension {len(x)} for a polynomial in {len(poly.gens)} variables")
    return sgn(poly(*[Rational(v) for v in x]))


def main_variable_index(poly: Poly, variables: Sequence) -> int:
    """Index of the last variable of ``variables`` that ``poly`` depends on (-1 if constant)."""
    used = poly.free_symbols
    for index in range(len(variables) - 1, -1, -1):
        if variables[index] in used and poly.degree(variables[index]) > 0:
            return index
    return -1


# ---------------------------------------------------------------------------
# Root isolation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IsolatingInterval:
    lo: Rational
    hi: Rational
    poly: Poly

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi


def _sign_changes(sequence, x) -> int:
    signs = [s for s in (sgn(q.eval(x)) for q in sequence) if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _root_bound(poly: Poly):
    coeffs = poly.all_coeffs()
    lead = abs(coeffs[0])
    return 1 + max((abs(c) / lead for c in coeffs[1:]), default=Rational(0))


def _bisect(sqf, sequence, lo, hi, out):
    roots = _sign_changes(sequence, lo) - _sign_changes(sequence, hi)
    if roots == 0:
        return
    if roots == 1:
        if sqf.eval(hi) == 0:
            out.append(IsolatingInterval(hi, hi, sqf))
            return
        if sqf.eval(lo) != 0:
            out.append(IsolatingInterval(lo, hi, sqf))
            return
    mid = (lo + hi) / 2
    _bisect(sqf, sequence, lo, mid, out)
    _bisect(sqf, sequence, mid, hi, out)


def _pull_in(sqf, sequence, interval: IsolatingInterval, side: str) -> IsolatingInterval:
    """Move one endpoint of a non-exact interval strictly towards its root."""
    lo, hi = interval.lo, interval.hi
    while True:
        mid = (lo + hi) / 2
        if sqf.eval(mid) == 0:
            return IsolatingInterval(mid, mid, sqf)
        left = _sign_changes(sequence, lo) - _sign_changes(sequence, mid)
        if side == "hi":
            if left > 0:
                return IsolatingInterval(interval.lo, mid, sqf)
            lo = mid
        else:
            if left == 0:
                return IsolatingInterval(mid, interval.hi, sqf)
            hi = mid


def _separate_roots(sqf, sequence, roots: List[IsolatingInterval]) -> List[IsolatingInterval]:
    # neighbours from the bisection may share an endpoint
    roots = list(roots)
    for i in range(len(roots) - 1):
        if roots[i].hi < roots[i + 1].lo:
            continue
        if not roots[i].is_exact:
            roots[i] = _pull_in(sqf, sequence, roots[i], "hi")
        if not roots[i + 1].is_exact:
            roots[i + 1] = _pull_in(sqf, sequence, roots[i + 1], "lo")
    return roots


def isolate_real_roots(poly: Poly):
    """Sorted, pairwise disjoint isolating intervals, one per distinct real root.

    The intervals carry the squarefree part of ``poly``.  Counting uses the
    Sturm sequence over ``(lo, hi]``; no endpoint is shared between two
    intervals.
    """
    poly = univariate(poly)
    if poly.is_zero:
        raise ValueError("the zero polynomial has no isolated roots")
    if poly.degree() < 1:
        return []
    sqf = poly.sqf_part()
    sequence = sqf.sturm()
    bound = Rational(_root_bound(sqf))
    out = []
    _bisect(sqf, sequence, -bound, bound, out)
    return _separate_roots(sqf, sequence, out)


def count_real_roots(poly: Poly) -> int:
    """Number of distinct real roots, by the Sturm count over the whole line."""
    poly = univariate(poly)
    if poly.degree() < 1:
        return 0
    sqf = poly.sqf_part()
    bound = Rational(_root_bound(sqf))
    sequence = sqf.sturm()
    return _sign_changes(sequence, -bound) - _sign_changes(sequence, bound)


def refine(interval: IsolatingInterval) -> IsolatingInterval:
    """Halve a non-exact isolating interval."""
    if interval.is_exact:
        return interval
    mid = (interval.lo + interval.hi) / 2
    s_mid = sgn(interval.poly.eval(mid))
    if s_mid == 0:
        return IsolatingInterval(mid, mid, interval.poly)
    if sgn(interval.poly.eval(interval.lo)) * s_mid < 0:
        return IsolatingInterval(interval.lo, mid, interval.poly)
    return IsolatingInterval(mid, interval.hi, interval.poly)


def sign_at_root(q: Poly, interval: IsolatingInterval) -> int:
    """Exact sign of ``q`` at the root isolated by ``interval``.

    Zero is decided with a gcd against the isolating polynomial; a nonzero
    sign is read off once refinement leaves no root of ``q`` in the interval.
    """
    q = univariate(q)
    if q.is_zero:
        return 0
    if q.degree() < 1:
        return sgn(q.LC())
    if interval.is_exact:
        return sgn(q.eval(interval.lo))
    common = interval.poly.gcd(q)
    if common.degree() > 0 and sgn(common.eval(interval.lo)) * sgn(common.eval(interval.hi)) < 0:
        return 0
    sqf = q.sqf_part()
    sequence = sqf.sturm()
    current = interval
    while True:
        if current.is_exact:
            return sgn(q.eval(current.lo))
        lo, hi = current.lo, current.hi
        if sqf.eval(lo) != 0 and sqf.eval(hi) != 0 and _sign_changes(sequence, lo) == _sign_changes(sequence, hi):
            return sgn(q.eval(lo))
        current = refine(current)


# ---------------------------------------------------------------------------
# Thom encodings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThomEncoding:
    poly: Poly
    signs: Tuple[int, ...]


def derivatives(poly: Poly):
    """Der(poly) = (poly, poly', ..., poly^(deg))."""
    out = [poly]
    for _ in range(max(poly.degree(), 0)):
        out.append(out[-1].diff(T))
    return out


def thom_encoding(poly: Poly, root: IsolatingInterval) -> ThomEncoding:
    poly = univariate(poly)
    signs = tuple(sign_at_root(d, root) for d in derivatives(poly))
    if signs[0] != 0:
        raise ValueError(f"interval [{root.lo}, {root.hi}] does not isolate a root of {poly.as_expr()}")
    return ThomEncoding(poly, signs)


def root_from_thom(poly: Poly, signs: Sequence[int]) -> IsolatingInterval:
    """The isolating interval of the root of ``poly`` with Thom encoding ``signs``."""
    poly = univariate(poly)
    wanted = tuple(int(s) for s in signs)
    for interval in isolate_real_roots(poly):
        if thom_encoding(poly, interval).signs == wanted:
            return interval
    raise ValueError(f"no real root of {poly.as_expr()} has Thom encoding {wanted}")


# ---------------------------------------------------------------------------
# Real algebraic numbers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RealAlgebraic:
    """The real number ``expr(s)``, ``s`` being the root isolated by ``interval``."""
    interval: IsolatingInterval
    expr: Poly

    def sign(self) -> int:
        return sign_at_root(self.expr, self.interval)

    def bounds(self):
        return _poly_bounds(self.expr, self.interval.lo, self.interval.hi)

    def refined(self) -> 'RealAlgebraic':
        return RealAlgebraic(refine(self.interval), self.expr)


Number = Union[Rational, RealAlgebraic]


def _interval_mul(a, b):
    products = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
    return min(products), max(products)


def _poly_bounds(poly: Poly, lo, hi):
    acc = (Rational(0), Rational(0))
    for c in poly.all_coeffs():
        acc = _interval_mul(acc, (lo, hi))
        acc = (acc[0] + c, acc[1] + c)
    return acc


def bounds(value: Number):
    if isinstance(value, RealAlgebraic):
        return value.bounds()
    return value, value


def _refined(value: Number) -> Number:
    return value.refined() if isinstance(value, RealAlgebraic) else value


def compose_mod(poly: Poly, inner: Poly, modulus: Optional[Poly] = None) -> Poly:
    """``poly(inner)`` reduced modulo ``modulus`` (both univariate in ``T``)."""
    acc = Poly(0, T, domain=QQ)
    for c in poly.all_coeffs():
        acc = acc * inner + c
        if modulus is not None:
            acc = acc.rem(modulus)
    return acc


def _is_identity(value: RealAlgebraic) -> bool:
    return value.expr == Poly(T, T, domain=QQ)


def _as_root(value: RealAlgebraic) -> RealAlgebraic:
    """Rewrite ``value`` as a root of its norm polynomial (identity expression)."""
    norm = Poly(resultant(value.interval.poly.as_expr(), _Z - value.expr.as_expr(), T), _Z, domain=QQ)
    candidates = isolate_real_roots(norm)
    current = value
    while True:
        lo, hi = current.bounds()
        hits = [c for c in candidates if not (c.hi < lo or hi < c.lo)]
        if len(hits) == 1:
            return RealAlgebraic(hits[0], Poly(T, T, domain=QQ))
        candidates = [refine(c) for c in candidates]
        current = current.refined()


def _equal(a: RealAlgebraic, b: RealAlgebraic) -> bool:
    if not _is_identity(b):
        if _is_identity(a):
            a, b = b, a
        else:
            b = _as_root(b)
    # b is the root of b.interval.poly isolated by b.interval
    image = compose_mod(b.interval.poly, a.expr, a.interval.poly)
    if sign_at_root(image, a.interval) != 0:
        return False
    if b.interval.is_exact:
        return sign_at_root(a.expr - b.interval.lo, a.interval) == 0
    return (sign_at_root(a.expr - b.interval.lo, a.interval) > 0
            and sign_at_root(a.expr - b.interval.hi, a.interval) < 0)


def compare(a: Number, b: Number) -> int:
    """Exact sign of ``a - b``."""
    if not isinstance(a, RealAlgebraic) and not isinstance(b, RealAlgebraic):
        return sgn(Rational(a) - Rational(b))
    if not isinstance(b, RealAlgebraic):
        return -compare(b, a)
    if not isinstance(a, RealAlgebraic):
        return -sign_at_root(b.expr - Rational(a), b.interval)
    if a.interval == b.interval:
        return sign_at_root(a.expr - b.expr, a.interval)
    if _equal(a, b):
        return 0
    while True:
        a_lo, a_hi = a.bounds()
        b_lo, b_hi = b.bounds()
        if a_hi < b_lo:
            return -1
        if b_hi < a_lo:
            return 1
        a, b = a.refined(), b.refined()


def _separate(values):
    """Refine ``values`` until their bounds are pairwise disjoint.

    Returns the increasing order (indices) and the refined values.
    """
    current = list(values)
    while True:
        spans = [bounds(v) for v in current]
        order = sorted(range(len(current)), key=lambda i: spans[i][0])
        clash = set()
        for i, j in zip(order, order[1:]):
            if not spans[i][1] < spans[j][0]:
                clash.update((i, j))
        if not clash:
            return order, current
        for i in clash:
            current[i] = _refined(current[i])


def simplest_rational_between(lo, hi) -> Rational:
    """The rational of least denominator (then least magnitude) in the open interval (lo, hi)."""
    lo, hi = Rational(lo), Rational(hi)
    if not lo < hi:
        raise ValueError(f"empty interval ({lo}, {hi})")
    if lo < 0 < hi:
        return Rational(0)
    if hi <= 0:
        return -simplest_rational_between(-hi, -lo)
    whole = floor(lo)
    if whole + 1 < hi:
        return Rational(whole + 1)
    if lo == whole:
        return whole + Rational(1, floor(1 / (hi - whole)) + 1)
    return whole + 1 / simplest_rational_between(1 / (hi - whole), 1 / (lo - whole))


# ---------------------------------------------------------------------------
# Points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalPoint:
    coords: Tuple[Rational, ...]

    is_rational = True

    @property
    def dim(self) -> int:
        return len(self.coords)

    def value(self, i: int) -> Number:
        return self.coords[i]

    def sign(self, poly: Poly) -> int:
        return sign_at(poly, self.coords)

    def extend(self, value) -> 'RationalPoint':
        return RationalPoint(self.coords + (Rational(value),))

    def project(self, indices: Sequence[int]) -> 'RationalPoint':
        return RationalPoint(tuple(self.coords[i] for i in indices))


@dataclass(frozen=True)
class RurPoint:
    """Real univariate representation ``(f, g0, g1..gk, sigma)`` of a point of R^k."""
    f: Poly
    g: Tuple[Poly, ...]
    sigma: ThomEncoding
    interval: IsolatingInterval = field(default=None, compare=False, repr=False)

    is_rational = False

    def __post_init__(self):
        if self.interval is None:
            object.__setattr__(self, 'interval', root_from_thom(self.f, self.sigma.signs))

    @property
    def dim(self) -> int:
        return len(self.g) - 1

    def coordinate(self, i: int) -> Poly:
        """Coordinate ``i`` as a polynomial in ``T`` reduced modulo ``f``."""
        g0 = self.g[0]
        if g0 == Poly(1, T, domain=QQ):
            return self.g[i + 1].rem(self.f)
        return (self.g[i + 1] * g0.invert(self.f)).rem(self.f)

    def value(self, i: int) -> Number:
        return RealAlgebraic(self.interval, self.coordinate(i))

    def sign(self, poly: Poly) -> int:
        return rur_associated_point_sign(self, poly)

    def extend(self, value) -> 'RurPoint':
        return RurPoint(self.f, self.g + (self.g[0] * Rational(value),),
                        self.sigma, self.interval)

    def project(self, indices: Sequence[int]) -> 'Point':
        return make_point([self.coordinate(i) for i in indices], self.interval)


Point = Union[RationalPoint, RurPoint]


def make_point(coords: Sequence[Poly], interval: IsolatingInterval) -> Point:
    """Canonical point from coordinate polynomials in the root isolated by ``interval``.

    Rational whenever the root or every coordinate is rational; otherwise a
    RUR with ``g0 = 1`` and coordinates reduced modulo ``interval.poly``.
    """
    h = interval.poly
    if interval.is_exact or h.degree() == 1:
        root = interval.lo if interval.is_exact else -h.nth(0) / h.nth(1)
        return RationalPoint(tuple(Rational(c.eval(root)) for c in coords))
    reduced = [c.rem(h) for c in coords]
    if all(c.degree() < 1 for c in reduced):
        return RationalPoint(tuple(Rational(c.LC()) for c in reduced))
    return RurPoint(h, (Poly(1, T, domain=QQ),) + tuple(reduced), thom_encoding(h, interval), interval)


def canonical(point: Point) -> Point:
    if isinstance(point, RurPoint):
        return make_point([point.coordinate(i) for i in range(point.dim)], point.interval)
    return point


def _evaluate_at_coordinates(poly: Poly, coords: Sequence[Poly], modulus: Poly) -> Poly:
    acc = Poly(0, T, domain=QQ)
    powers = {}
    for monom, coeff in poly.terms():
        term = Poly(coeff, T, domain=QQ)
        for i, exponent in enumerate(monom):
            if exponent:
                key = (i, exponent)
                if key not in powers:
                    powers[key] = (coords[i] ** exponent).rem(modulus)
                term = (term * powers[key]).rem(modulus)
        acc += term
    return acc.rem(modulus)


def rur_associated_point_sign(point: RurPoint, poly: Poly) -> int:
    """Exact sign of ``poly`` at ass(point) = (g1/g0, ..., gk/g0)(t)."""
    if len(poly.gens) != point.dim:
        raise ValueError(f"polynomial in {len(poly.gens)} variables at a point of dimension {point.dim}")
    g0_sign = sign_at_root(point.g[0], point.interval)
    if g0_sign == 0:
        raise ValueError("g0 vanishes at the root of f: malformed real univariate representation")
    degree = max(poly.total_degree(), 0)
    acc = Poly(0, T, domain=QQ)
    for monom, coeff in poly.terms():
        term = Poly(coeff, T, domain=QQ)
        for g, exponent in zip(point.g[1:], monom):
            if exponent:
                term = (term * g ** exponent).rem(point.f)
        missing = degree - sum(monom)
        if missing:
            term = (term * point.g[0] ** missing).rem(point.f)
        acc += term
    return sign_at_root(acc.rem(point.f), point.interval) * g0_sign ** degree


def sign_at_point(poly: Poly, point: Point) -> int:
    return point.sign(poly)


# ---------------------------------------------------------------------------
# Lifting: roots of a family over an exact base point
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RootInfo:
    value: Number
    point: Point
    vanishing: frozenset
    base_generator: Optional[Poly] = None


@dataclass(frozen=True)
class RootStack:
    """Roots of a family in the next variable over a base point, with sector samples."""
    base: Point
    nullified: frozenset
    roots: Tuple[RootInfo, ...]
    sectors: Tuple[Point, ...]

    def samples(self):
        """Sample points in cylindrical order: sector, section, sector, ..."""
        out = []
        for sector, root in zip(self.sectors, self.roots):
            out.extend((sector, root.point))
        out.append(self.sectors[-1])
        return out


def _sector_values(values):
    if not values:
        return [Rational(0)]
    spans = [bounds(v) for v in values]
    out = [simplest_rational_between(spans[0][0] - 2, spans[0][0])]
    for (_, hi), (lo, _) in zip(spans, spans[1:]):
        out.append(simplest_rational_between(hi, lo))
    out.append(simplest_rational_between(spans[-1][1], spans[-1][1] + 2))
    return out


def _specialize_rational(poly: Poly, coords) -> Poly:
    gens = poly.gens
    expr = poly.as_expr()
    if len(gens) > 1:
        expr = expr.subs(dict(zip(gens[:-1], coords)), simultaneous=True)
    return Poly(expr.subs(gens[-1], T), T, domain=QQ)


def _roots_over_rational(base: RationalPoint, polys: Sequence[Poly]) -> RootStack:
    nullified = set()
    specialized = []
    factors = {}
    for j, poly in enumerate(polys):
        u = _specialize_rational(poly, base.coords)
        specialized.append(u)
        if u.is_zero:
            nullified.add(j)
            continue
        if u.degree() < 1:
            continue
        for factor, _ in u.factor_list()[1]:
            factors.setdefault(factor.monic(), None)
    entries = []
    for factor in factors:
        for interval in isolate_real_roots(factor):
            if factor.degree() == 1:
                value = -factor.nth(0) / factor.nth(1)
            else:
                value = RealAlgebraic(interval, Poly(T, T, domain=QQ))
            entries.append((value, factor, interval))
    order, refined = _separate([e[0] for e in entries])
    roots = []
    for i in order:
        value, factor, interval = refined[i], entries[i][1], entries[i][2]
        vanishing = frozenset(
            j for j, u in enumerate(specialized)
            if j not in nullified and u.degree() >= 1 and u.rem(factor).is_zero
        )
        if isinstance(value, RealAlgebraic):
            coords = [Poly(c, T, domain=QQ) for c in base.coords] + [Poly(T, T, domain=QQ)]
            point = make_point(coords, value.interval)
        else:
            point = base.extend(value)
        roots.append(RootInfo(value, point, vanishing))
    sectors = tuple(base.extend(q) for q in _sector_values([r.value for r in roots]))
    return RootStack(base, frozenset(nullified), tuple(roots), sectors)


def _specialize_rur(poly: Poly, coords, modulus):
    """Coefficients in the last variable (lowest degree first) as polynomials in ``T``."""
    gens = poly.gens
    by_degree = Poly(poly.as_expr(), gens[-1]).all_coeffs()
    terms = []
    for coeff in reversed(by_degree):
        terms.append(_evaluate_at_coordinates(Poly(coeff, *gens[:-1], domain=QQ), coords, modulus))
    while terms and terms[-1].is_zero:
        terms.pop()
    return terms


def _shift_candidates():
    yield 0
    for k in count(1):
        yield k
        yield -k


def _roots_over_rur(base: RurPoint, polys: Sequence[Poly]) -> RootStack:
    modulus = base.interval.poly
    coords = [base.coordinate(i) for i in range(base.dim)]
    nullified = set()
    product = 1
    for j, poly in enumerate(polys):
        terms = _specialize_rur(poly, coords, modulus)
        if not terms:
            nullified.add(j)
            continue
        if len(terms) > 1:
            product *= sum(t.as_expr() * _Z ** k for k, t in enumerate(terms))
    roots = []
    if product != 1:
        shifted = product.subs(_Z, _S - _C * T)
        joint = Poly(resultant(modulus.as_expr(), shifted, T), _S, _C, domain=QQ)
        if joint.is_zero:
            raise ValueError("family vanishes at a conjugate of the base point")
        joint = joint.sqf_part()
        if joint.degree(_S) > 0:
            roots = _primitive_roots(base, polys, nullified, coords, joint)
    sectors = tuple(base.extend(q) for q in _sector_values([r.value for r in roots]))
    return RootStack(base, frozenset(nullified), tuple(roots), sectors)


def _primitive_roots(base, polys, nullified, coords, joint):
    degree = joint.degree(_S)
    for shift in _shift_candidates():
        q_c = Poly(joint.as_expr().subs(_C, shift), _S, domain=QQ)
        if q_c.degree() == degree and q_c.gcd(q_c.diff(_S)).degree() == 0:
            break
        if abs(shift) > 64:
            raise ValueError("no separating linear form found for the lifted roots")
    numerator = Poly((-joint.diff(_C)).as_expr().subs({_C: shift, _S: T}), T, domain=QQ)
    denominator = Poly(joint.diff(_S).as_expr().subs({_C: shift, _S: T}), T, domain=QQ)
    q_c = Poly(q_c.as_expr().subs(_S, T), T, domain=QQ)
    lo_t, hi_t = base.interval.lo, base.interval.hi
    found = []
    for factor, _ in q_c.factor_list()[1]:
        factor = factor.monic()
        if factor.degree() < 2:
            continue
        t_in_s = (numerator * denominator.rem(factor).invert(factor)).rem(factor)
        for interval in isolate_real_roots(factor):
            if sign_at_root(t_in_s - lo_t, interval) <= 0 or sign_at_root(t_in_s - hi_t, interval) >= 0:
                continue
            new_coords = [compose_mod(c, t_in_s, factor) for c in coords]
            x_in_s = (Poly(T, T, domain=QQ) - shift * t_in_s).rem(factor)
            point = make_point(new_coords + [x_in_s], interval)
            vanishing = frozenset(j for j, poly in enumerate(polys)
                                  if j not in nullified and point.sign(poly) == 0)
            found.append(RootInfo(RealAlgebraic(interval, x_in_s), point, vanishing, t_in_s))
    order, refined = _separate([r.value for r in found])
    return [RootInfo(refined[i], found[i].point, found[i].vanishing, found[i].base_generator) for i in order]


def real_roots_over(base: Point, polys: Sequence[Poly]) -> RootStack:
    """Real roots in the last variable of ``polys`` over the exact point ``base``.

    ``polys`` live in ``base.dim + 1`` variables.  Members identically zero
    over ``base`` are reported as nullified and contribute no roots.
    """
    base = canonical(base)
    if isinstance(base, RurPoint):
        return _roots_over_rur(base, polys)
    return _roots_over_rational(base, polys)


def stack_index(point: Point, stack: RootStack) -> int:
    """Cylindrical index (even: sector, odd: section) of ``point`` in ``stack``.

    ``stack`` must be the stack over ``point``'s projection.
    """
    k = stack.base.dim
    if isinstance(point, RurPoint) and isinstance(stack.base, RurPoint):
        expr = point.coordinate(k)
        for i, root in enumerate(stack.roots):
            value = root.value
            mine = compose_mod(expr, root.base_generator, value.interval.poly)
            c = sign_at_root(mine - value.expr, value.interval)
            if c == 0:
                return 2 * i + 1
            if c < 0:
                return 2 * i
        return 2 * len(stack.roots)
    value = point.value(k)
    for i, root in enumerate(stack.roots):
        c = compare(value, root.value)
        if c == 0:
            return 2 * i + 1
        if c < 0:
            return 2 * i
    return 2 * len(stack.roots)
