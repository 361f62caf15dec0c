"""Triangulation of closed bounded semi-algebraic sets.

A closed bounded union of cells of a well-based CAD is a regular cell
complex; its triangulation is the order complex (barycentric subdivision) of
the face poset of those cells, with each vertex placed at its cell's sample
point.  The parametrized version runs the same construction in the fibers
over the cells of a CAD of parameter space built from the joint projection,
so the labelled fiber complex is constant on each parameter cell.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from sympy import Poly, QQ, Rational, Symbol

from core.algebra import Point, RationalPoint, RurPoint, format_polynomial, parse_polynomial
from core.cad import (Cell, Decomposition, Shear, closure_faces, decompose, in_variables, is_quasi_monic,
                      original_sample, projection_levels, shear_candidates)
from core.complexes import SimplicialComplex, betti_numbers
from core.errors import CapsExceededError, InputError, WellBasedError
from core.fields import Field
from utils.workers import map_ordered

logger = logging.getLogger(__name__)

RELATIONS = ('>=', '<=', '==')


# ---------------------------------------------------------------------------
# Closed formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClosedFormula:
    """Negation-free AND/OR tree over atoms ``poly >= 0``, ``poly <= 0``, ``poly == 0``."""
    kind: str
    children: Tuple['ClosedFormula', ...] = ()
    poly: Optional[Poly] = None
    rel: str = '>='
    name: str = ''

    @classmethod
    def atom(cls, poly: Poly, rel: str = '>=', name: str = '') -> 'ClosedFormula':
        if rel not in RELATIONS:
            raise InputError(f"relation {rel!r} is not allowed in a closed formula (use one of {RELATIONS})")
        return cls('atom', poly=poly, rel=rel, name=name)

    @classmethod
    def conj(cls, *children: 'ClosedFormula') -> 'ClosedFormula':
        return cls('and', tuple(children))

    @classmethod
    def disj(cls, *children: 'ClosedFormula') -> 'ClosedFormula':
        return cls('or', tuple(children))

    def polys(self) -> List[Poly]:
        out = []
        if self.kind == 'atom':
            return [self.poly]
        for child in self.children:
            for poly in child.polys():
                if poly not in out:
                    out.append(poly)
        return out

    def evaluate(self, sign_of: Callable[[Poly], int]) -> bool:
        if self.kind == 'atom':
            s = sign_of(self.poly)
            if self.rel == '>=':
                return s >= 0
            if self.rel == '<=':
                return s <= 0
            return s == 0
        if self.kind == 'and':
            return all(c.evaluate(sign_of) for c in self.children)
        return any(c.evaluate(sign_of) for c in self.children)

    def holds_at(self, point: Point) -> bool:
        return self.evaluate(point.sign)

    def map_polys(self, fn: Callable[[Poly], Poly]) -> 'ClosedFormula':
        if self.kind == 'atom':
            return ClosedFormula('atom', poly=fn(self.poly), rel=self.rel, name=self.name)
        return ClosedFormula(self.kind, tuple(c.map_polys(fn) for c in self.children))

    def specialize(self, values: Dict[Symbol, Rational], variables: Sequence[Symbol]) -> 'ClosedFormula':
        """Substitute rational values and re-express over ``variables``."""
        def substitute(poly):
            return Poly(poly.as_expr().subs(values, simultaneous=True), *variables, domain=QQ)
        return self.map_polys(substitute)

    def to_dict(self) -> dict:
        if self.kind == 'atom':
            out = {"atom": self.name or format_polynomial(self.poly), "rel": self.rel,
                   "poly": format_polynomial(self.poly)}
            return out
        return {self.kind: [c.to_dict() for c in self.children]}

    @classmethod
    def from_dict(cls, data, variables: Sequence[str], named: Optional[Dict[str, Poly]] = None) -> 'ClosedFormula':
        named = named or {}
        if not isinstance(data, dict) or len(data) == 0:
            raise InputError(f"malformed formula node {data!r}")
        if 'atom' in data:
            rel = data.get('rel', '>=')
            name = str(data['atom'])
            if name in named:
                poly = named[name]
            elif 'poly' in data:
                poly = parse_polynomial(data['poly'], variables)
            else:
                raise InputError(f"atom references undeclared polynomial {name!r}")
            return cls.atom(poly, rel, name)
        for kind in ('and', 'or'):
            if kind in data:
                children = data[kind]
                if not isinstance(children, list) or not children:
                    raise InputError(f"'{kind}' needs a nonempty list of formulas")
                return cls(kind, tuple(cls.from_dict(c, variables, named) for c in children))
        if 'not' in data:
            raise InputError("negation is not allowed in a closed formula")
        raise InputError(f"unknown formula node {sorted(data)}")


# ---------------------------------------------------------------------------
# Triangulations
# ---------------------------------------------------------------------------

def _chains(members: Sequence, faces: Dict) -> List[tuple]:
    """All chains of the face poset, each listed bottom to top."""
    memo: Dict = {}

    def ending_at(cell):
        if cell not in memo:
            out = [(cell,)]
            for face in sorted(faces[cell]):
                out.extend(chain + (cell,) for chain in ending_at(face))
            memo[cell] = out
        return memo[cell]

    out = []
    for cell in members:
        out.extend(ending_at(cell))
    return out


def cell_complex(decomposition: Decomposition, members: Sequence[Cell], label=None):
    """Order complex of the face poset of ``members`` (a closed union of cells).

    Returns the complex, its top-cell map and the face relation, all in terms
    of ``label(cell)`` (cell id by default).
    """
    label = label or (lambda c: c.id)
    ids = {c.id for c in members}
    faces_by_id = closure_faces(decomposition, ids)
    for cell in members:
        if not faces_by_id[cell.id] <= ids:
            raise InputError("the set is not closed: a cell's boundary leaves the set")
    names = {c.id: label(c) for c in members}
    faces = {names[i]: frozenset(names[f] for f in fs) for i, fs in faces_by_id.items()}
    chains = _chains([names[c.id] for c in members], faces)
    complex_ = SimplicialComplex(chains)
    cell_of_simplex = {tuple(sorted(chain)): chain[-1] for chain in chains}
    return complex_, cell_of_simplex, faces


@dataclass
class Triangulation:
    complex: SimplicialComplex
    vertex_coords: Dict[object, Point]
    cell_of_simplex: Dict[tuple, object]
    decomposition: Decomposition
    cells: Tuple
    faces: Dict
    formula: ClosedFormula
    variables: Tuple[Symbol, ...]
    family: List[Poly] = field(default_factory=list)
    subcomplexes: List[SimplicialComplex] = field(default_factory=list)
    refinement_maps: List[Dict] = field(default_factory=list)

    @property
    def shear(self) -> Optional[Shear]:
        return self.decomposition.shear

    def betti(self, fld: Field, max_degree: Optional[int] = None) -> List[int]:
        top = self.complex.dim if max_degree is None else max_degree
        return betti_numbers(self.complex, fld, top)

    def _cell(self, key) -> Cell:
        if isinstance(key, tuple):
            return self.decomposition.by_index[key]
        return self.decomposition.cells[key]

    def cell_euler_characteristic(self) -> int:
        return sum((-1) ** self._cell(c).dim for c in self.cells)

    def cell_count(self, dim: int) -> int:
        return sum(1 for c in self.cells if self._cell(c).dim == dim)


def _dedupe(polys):
    out = []
    for p in polys:
        if p not in out:
            out.append(p)
    return out


def _check_dimension(n: int):
    if n < 1:
        raise InputError("a formula needs at least one variable")
    if n > 2:
        raise CapsExceededError(f"triangulation is supported in at most 2 variables, got {n}")


def _build(phi: ClosedFormula, variables, family, subsets, factors) -> Triangulation:
    n = len(variables)
    last_error = None
    for factor in factors:
        shear = Shear(variables, factor)
        sheared = [shear.apply(p) for p in family]
        if n == 2 and not is_quasi_monic(sheared, variables[-1]):
            continue
        decomposition = decompose(sheared, variables, derivative_closure=(n == 2))
        decomposition.shear = shear
        index = {p: i for i, p in reversed(list(enumerate(family)))}

        def sign_lookup(cell):
            return lambda p: cell.signs[index[p]]

        members = [c for c in decomposition.cells if phi.evaluate(sign_lookup(c))]
        unbounded = [c for c in members if not c.bounded]
        if unbounded:
            raise InputError(f"the set is unbounded (cell {unbounded[0].index} is not bounded)")
        try:
            complex_, cell_of_simplex, faces = cell_complex(decomposition, members)
        except WellBasedError as e:
            last_error = e
            logger.debug(f"shear {factor} rejected: {e}")
            continue
        subcomplexes = []
        for subset in subsets:
            inside = {c.id for c in members if subset.evaluate(sign_lookup(c))}
            subcomplexes.append(SimplicialComplex(s for s in complex_.all_simplices() if set(s) <= inside))
        coords = {c.id: original_sample(decomposition, c) for c in members}
        return Triangulation(complex_, coords, cell_of_simplex, decomposition, tuple(c.id for c in members),
                             faces, phi, tuple(variables), list(family), subcomplexes)
    raise WellBasedError(f"no well-based coordinate shear found ({last_error})",
                         shear=getattr(last_error, 'shear', None))


def triangulate(phi: ClosedFormula, variables: Optional[Sequence[Symbol]] = None, subsets: Sequence = (),
                extra_polys: Sequence[Poly] = (), seed: int = 0, retries: int = 6, bound: int = 1,
                prefer_shear: Optional[int] = None) -> Triangulation:
    """Triangulate R(phi), closed and bounded, in at most two variables.

    ``subsets`` are closed formulas whose parts inside R(phi) are returned
    as subcomplexes; ``extra_polys`` only refine the decomposition.
    """
    polys = phi.polys()
    variables = tuple(variables or polys[0].gens)
    _check_dimension(len(variables))
    family = _dedupe([in_variables(p, variables) for p in polys]
                     + [in_variables(p, variables) for s in subsets for p in s.polys()]
                     + [in_variables(p, variables) for p in extra_polys])
    phi = phi.map_polys(lambda p: in_variables(p, variables))
    subsets = [s.map_polys(lambda p: in_variables(p, variables)) for s in subsets]
    factors = list(shear_candidates(seed, retries, bound))
    if prefer_shear is not None:
        factors = [prefer_shear] + [f for f in factors if f != prefer_shear]
    return _build(phi, variables, family, subsets, factors)


def _coarse_cell(coarse: Triangulation, point: Point) -> int:
    shear = coarse.decomposition.shear
    sheared = shear.to_sheared(point) if shear else point
    return coarse.decomposition.locate(sheared).id


def refinement_map(fine: Triangulation, coarse: Triangulation) -> Dict:
    """Cell of ``coarse`` containing each vertex cell of ``fine``."""
    return {v: _coarse_cell(coarse, p) for v, p in fine.vertex_coords.items()}


def is_refinement(fine: Triangulation, coarse: Triangulation) -> bool:
    """Every fine simplex maps into a chain of the coarse face poset."""
    mapping = refinement_map(fine, coarse)
    coarse_cells = set(coarse.cells)
    if not set(mapping.values()) <= coarse_cells:
        return False
    for simplex in fine.complex.all_simplices():
        image = sorted({mapping[v] for v in simplex})
        for i, a in enumerate(image):
            for b in image[i + 1:]:
                if a not in coarse.faces[b] and b not in coarse.faces[a]:
                    return False
    return True


def common_refinement(t1: Triangulation, t2: Triangulation, seed: int = 0, retries: int = 6,
                      bound: int = 1) -> Triangulation:
    """Triangulation of the same set refining both inputs.

    Inputs built with another shear are rebuilt with the common one, since
    cylindrical cells only nest under a shared coordinate system.
    """
    if tuple(t1.variables) != tuple(t2.variables):
        raise InputError("triangulations live in different variables")
    for a, b in ((t1, t2), (t2, t1)):
        for point in a.vertex_coords.values():
            if not b.formula.holds_at(point):
                raise InputError("triangulations are not over the same set")
    variables = t1.variables
    factor = t1.shear.factor if t1.shear else 0
    merged = triangulate(t1.formula, variables, extra_polys=t1.family + t2.family, seed=seed,
                         retries=retries, bound=bound, prefer_shear=factor)
    common = merged.shear.factor if merged.shear else 0
    for source in (t1, t2):
        if (source.shear.factor if source.shear else 0) != common:
            logger.debug(f"rebuilding an input triangulation with shear {common}")
            source = triangulate(source.formula, variables, extra_polys=source.family, prefer_shear=common,
                                 seed=seed, retries=retries, bound=bound)
        merged.refinement_maps.append(refinement_map(merged, source))
    return merged


# ---------------------------------------------------------------------------
# Parametrized triangulation
# ---------------------------------------------------------------------------

@dataclass
class FiberComplex:
    """Fiber triangulation over one parameter point; vertices are fiber cylindrical indices."""
    complex: SimplicialComplex
    cells: Tuple[tuple, ...]
    cell_of_simplex: Dict[tuple, tuple]
    faces: Dict[tuple, frozenset]
    decomposition: Decomposition


def _sign_lookup(index, cell):
    return lambda p: cell.signs[index[p]]


@dataclass
class ParamTriangulation:
    formula: ClosedFormula
    params: Tuple[Symbol, ...]
    fiber_variables: Tuple[Symbol, ...]
    family: List[Poly]
    levels: list
    shear: Shear
    param_partition: Decomposition
    per_cell: Dict[int, FiberComplex] = field(default_factory=dict)

    @property
    def variables(self):
        return self.params + self.fiber_variables

    def fiber(self, anchor: Point, formula: Optional[ClosedFormula] = None) -> FiberComplex:
        """Fiber decomposition and complex of ``formula`` (default: the formula) over ``anchor``."""
        return fiber_complex(self, anchor, formula or self.formula)

    def locate(self, y) -> Cell:
        return self.param_partition.locate(as_point(y))

    def specialize(self, y) -> Triangulation:
        point = as_point(y)
        fib = self.fiber(point)
        decomposition = fib.decomposition
        coords = {}
        for cell in decomposition.cells:
            if cell.index in fib.cells:
                coords[cell.index] = original_sample(decomposition, cell)
        return Triangulation(fib.complex, coords, fib.cell_of_simplex, decomposition, fib.cells, fib.faces,
                             self.formula, self.fiber_variables, list(self.family))


def as_point(y) -> Point:
    if isinstance(y, (RationalPoint, RurPoint)):
        return y
    return RationalPoint(tuple(Rational(v) for v in y))


def fiber_complex(pt: ParamTriangulation, anchor: Point, formula: ClosedFormula) -> FiberComplex:
    p = len(pt.params)
    decomposition = decompose(pt.family, pt.variables, anchor=anchor, n_fixed=p, levels=pt.levels)
    decomposition.shear = pt.shear
    index = {poly: i for i, poly in reversed(list(enumerate(pt.family)))}
    sheared_formula = formula.map_polys(pt.shear.apply)
    members = [c for c in decomposition.cells if sheared_formula.evaluate(_sign_lookup(index, c))]
    unbounded = [c for c in members if not c.bounded]
    if unbounded:
        raise InputError(f"fiber over {anchor} is unbounded")
    complex_, cell_of_simplex, faces = cell_complex(decomposition, members, label=lambda c: c.index)
    return FiberComplex(complex_, tuple(c.index for c in members), cell_of_simplex, faces, decomposition)


def triangulate_parametrized(phi: ClosedFormula, params: Sequence[Symbol], fiber_variables: Sequence[Symbol],
                             extra_polys: Sequence[Poly] = (), seed: int = 0, retries: int = 6, bound: int = 1,
                             threads: int = 1, progress_callback=None) -> ParamTriangulation:
    """Parameter partition with a labelled fiber complex K_C per parameter cell.

    ``phi`` lives in ``params + fiber_variables``; every fiber must be closed
    and bounded.  The fiber block is sheared to make the family quasi-monic in
    its last variable; the shear is shared by all fibers.
    """
    params = tuple(params)
    fiber_variables = tuple(fiber_variables)
    if len(fiber_variables) > 2:
        raise CapsExceededError(f"fiber dimension {len(fiber_variables)} exceeds 2")
    if not fiber_variables:
        raise InputError("no fiber variables")
    variables = params + fiber_variables
    base_family = _dedupe([in_variables(q, variables) for q in phi.polys()]
                          + [in_variables(q, variables) for q in extra_polys])
    phi = phi.map_polys(lambda q: in_variables(q, variables))
    last_error = None
    for factor in shear_candidates(seed, retries, bound):
        shear = Shear(fiber_variables, factor)
        sheared = [shear.apply(q) for q in base_family]
        if len(fiber_variables) == 2 and not is_quasi_monic(sheared, fiber_variables[-1]):
            continue
        levels = projection_levels(sheared, variables, derivative_closure=True)
        partition = decompose([], params, levels=levels[:len(params)])
        pt = ParamTriangulation(phi, params, fiber_variables, sheared, levels, shear, partition)
        cells = partition.cells
        try:
            results = map_ordered(lambda c: fiber_complex(pt, c.sample, phi), cells, threads, progress_callback,
                                 "fiber triangulations")
        except WellBasedError as e:
            last_error = e
            logger.debug(f"shear {factor} rejected: {e}")
            continue
        pt.per_cell = {c.id: r for c, r in zip(cells, results)}
        logger.debug(f"{len(cells)} parameter cells (shear {factor})")
        return pt
    raise WellBasedError(f"no well-based coordinate shear found ({last_error})",
                         shear=getattr(last_error, 'shear', None))
