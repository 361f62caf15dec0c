"""Cylindrical algebraic decomposition.

Projection is Collins-style (coefficients, discriminant and resultant
subresultant coefficients over reducta), factored into irreducibles.  Lifting
isolates the roots of each level's family over exact sample points.  Cell
closure in two free variables is decided from the stacks: the limit of a
section over an endpoint of its base interval is the unique root whose Thom
encoding is compatible with the section's.
"""
import logging
import threading
from collections import deque
from dataclasses import dataclass, replace
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy import Matrix, Poly, QQ, resultant

from core.algebra import (Point, RationalPoint, RurPoint, canonical, main_variable_index, make_point,
                          real_roots_over, stack_index)
from core.errors import CapsExceededError, InputError, WellBasedError

logger = logging.getLogger(__name__)


def in_variables(poly: Poly, variables: Sequence) -> Poly:
    return Poly(poly.as_expr(), *variables, domain=QQ)


# ---------------------------------------------------------------------------
# Projection
# ---------------------------------------------------------------------------

def _coefficients(poly: Poly, var):
    return Poly(poly.as_expr(), var).all_coeffs()


def _reducta(poly: Poly, var):
    out = []
    current = poly
    while current.degree(var) >= 1:
        out.append(current)
        lead = _coefficients(current, var)[0]
        if lead.is_number:
            break
        current = current - Poly(lead * var ** current.degree(var), *poly.gens, domain=QQ)
    return out


def principal_subresultant_coefficient(a: Poly, b: Poly, var, j: int):
    """psc_j(a, b) in ``var``: determinant of the leading square block of the j-th Sylvester-Habicht matrix."""
    if j == 0:
        return resultant(a.as_expr(), b.as_expr(), var)
    ca = _coefficients(a, var)
    cb = _coefficients(b, var)
    p, q = len(ca) - 1, len(cb) - 1
    size = p + q - 2 * j
    width = p + q - j
    rows = []
    for shift in range(q - j):
        rows.append(([0] * shift + ca + [0] * width)[:size])
    for shift in range(p - j):
        rows.append(([0] * shift + cb + [0] * width)[:size])
    return Matrix(rows).det(method='bareiss')


def factor_family(exprs, variables) -> List[Poly]:
    """Distinct monic irreducible non-constant factors of ``exprs``."""
    out = []
    for expr in exprs:
        poly = Poly(expr, *variables, domain=QQ)
        if poly.is_zero or poly.is_ground:
            continue
        for factor, _ in poly.factor_list()[1]:
            if factor.is_ground:
                continue
            factor = factor.monic()
            if factor not in out:
                out.append(factor)
    return out


def project(polys: Sequence[Poly], var) -> List[Poly]:
    """Eliminate ``var`` (the last variable of the polys' main order).

    Returns factors in the remaining generators whose sign-invariant cells
    are delineable bases for the roots of ``polys`` in ``var``.
    """
    if not polys:
        return []
    gens = polys[0].gens
    others = tuple(g for g in gens if g != var)
    if not others:
        return []
    exprs = []
    reducta = []
    for poly in polys:
        poly = in_variables(poly, gens)
        if poly.degree(var) < 1:
            exprs.append(poly.as_expr())
            continue
        exprs.extend(_coefficients(poly, var))
        reds = _reducta(poly, var)
        reducta.append(reds)
        for red in reds:
            derivative = red.diff(var)
            for j in range(red.degree(var) - 1):
                exprs.append(principal_subresultant_coefficient(red, derivative, var, j))
    for reds_a, reds_b in combinations(reducta, 2):
        for a in reds_a:
            for b in reds_b:
                for j in range(min(a.degree(var), b.degree(var))):
                    exprs.append(principal_subresultant_coefficient(a, b, var, j))
    return factor_family(exprs, others)


def projection_levels(polys: Sequence[Poly], variables: Sequence, derivative_closure: bool = False):
    """Projection factors grouped by main variable, ``levels[k]`` for ``variables[k]``.

    With ``derivative_closure`` the last level is closed under derivation in
    the last variable, which makes Thom encodings of its roots sign-invariant.
    """
    variables = tuple(variables)
    n = len(variables)
    levels: List[List[Poly]] = [[] for _ in range(n)]

    def insert(factors):
        added = []
        for factor in factors:
            idx = main_variable_index(factor, variables)
            if idx < 0:
                continue
            factor = in_variables(factor, variables)
            if factor not in levels[idx]:
                levels[idx].append(factor)
                added.append((idx, factor))
        return added

    insert(factor_family([p.as_expr() for p in polys], variables))
    if derivative_closure and n:
        top = variables[-1]
        work = list(levels[-1])
        while work:
            derivative = work.pop(0).diff(top)
            if derivative.degree(top) < 1:
                continue
            for idx, factor in insert(factor_family([derivative.as_expr()], variables)):
                if idx == n - 1:
                    work.append(factor)
    for k in range(n - 1, 0, -1):
        insert(project(levels[k], variables[k]))
    return levels


# ---------------------------------------------------------------------------
# Cells and decompositions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cell:
    id: int
    index: Tuple[int, ...]
    sample: Point
    signs: Tuple[int, ...]
    base_id: Optional[int] = None
    bounded: bool = True
    component_id: int = -1

    @property
    def level(self) -> int:
        return len(self.index)

    @property
    def dim(self) -> int:
        return sum(1 for i in self.index if i % 2 == 0)

    @property
    def sign_condition(self) -> Dict[int, int]:
        return dict(enumerate(self.signs))


@dataclass(frozen=True)
class Shear:
    """Linear change ``X_i -> X_i + factor * X_last`` on a block of variables."""
    variables: Tuple
    factor: int = 0

    def apply(self, poly: Poly) -> Poly:
        if not self.factor or len(self.variables) < 2:
            return poly
        last = self.variables[-1]
        mapping = {v: v + self.factor * last for v in self.variables[:-1]}
        return Poly(poly.as_expr().subs(mapping, simultaneous=True), *poly.gens, domain=QQ)

    def _map(self, point: Point, offset: int, factor: int) -> Point:
        if not factor or len(self.variables) < 2:
            return point
        last = offset + len(self.variables) - 1
        block = range(offset, last)
        if isinstance(point, RationalPoint):
            coords = list(point.coords)
            for i in block:
                coords[i] = coords[i] + factor * coords[last]
            return RationalPoint(tuple(coords))
        coords = [point.coordinate(i) for i in range(point.dim)]
        for i in block:
            coords[i] = coords[i] + factor * coords[last]
        return make_point(coords, point.interval)

    def to_original(self, point: Point, offset: int = 0) -> Point:
        return self._map(point, offset, self.factor)

    def to_sheared(self, point: Point, offset: int = 0) -> Point:
        return self._map(point, offset, -self.factor)


def shear_candidates(seed: int = 0, retries: int = 6, bound: int = 1):
    """0 first, then seeded random integer shears in [-B, B] with B doubling."""
    yield 0
    rng = np.random.default_rng(seed)
    seen = {0}
    for _ in range(retries):
        for _ in range(16):
            c = int(rng.integers(-bound, bound + 1))
            if c not in seen:
                break
        else:
            c = max(seen) + 1
        seen.add(c)
        yield c
        bound *= 2


def is_quasi_monic(polys: Sequence[Poly], var) -> bool:
    """True when every member of positive degree in ``var`` has a constant leading coefficient."""
    for poly in polys:
        if poly.degree(var) >= 1 and not _coefficients(poly, var)[0].is_number:
            return False
    return True


class Decomposition:
    """One level of a CAD: cells over the cells of ``base``.

    ``variables`` are all generators up to this level; the first ``n_fixed``
    are pinned to ``anchor`` (fiber decompositions over a parameter point).
    ``family`` holds the projection factors whose main variable is the last
    one; ``polys`` is the family whose signs each cell records.
    """

    def __init__(self, variables, family=(), polys=(), base=None, anchor=None, n_fixed=0):
        self.variables = tuple(variables)
        self.family = list(family)
        self.polys = list(polys)
        self.base = base
        self.anchor = anchor if anchor is not None else RationalPoint(())
        self.n_fixed = n_fixed
        self.cells: Optional[List[Cell]] = None
        self.by_index: Dict[Tuple[int, ...], Cell] = {}
        self.stacks: Dict[int, tuple] = {}
        self.levels = None
        self.shear: Optional[Shear] = None
        self.adjacency = set()
        self._derivatives: Dict[int, list] = {}
        self._lazy_stacks: Dict[Tuple[int, ...], object] = {}
        self._lock = threading.Lock()

    @classmethod
    def root(cls, variables=(), anchor=None):
        decomposition = cls(variables, anchor=anchor, n_fixed=len(variables))
        decomposition.cells = [Cell(0, (), decomposition.anchor, ())]
        decomposition.by_index = {(): decomposition.cells[0]}
        return decomposition

    @property
    def free_dim(self) -> int:
        return len(self.variables) - self.n_fixed

    def enumerate(self):
        """Materialize every cell (no-op when already enumerated)."""
        if self.cells is not None:
            return
        self.base.enumerate()
        cells = []
        for base_cell in self.base.cells:
            stack = real_roots_over(base_cell.sample, self.family)
            ids = []
            top = 2 * len(stack.roots)
            for i, sample in enumerate(stack.samples()):
                cell = Cell(
                    id=len(cells),
                    index=base_cell.index + (i,),
                    sample=sample,
                    signs=tuple(sample.sign(p) for p in self.polys),
                    base_id=base_cell.id,
                    bounded=base_cell.bounded and 0 < i < top,
                )
                cells.append(cell)
                ids.append(cell.id)
            self.stacks[base_cell.id] = (stack, ids)
        self.cells = cells
        self.by_index = {c.index: c for c in cells}

    def levels_chain(self):
        chain = []
        node = self
        while node is not None:
            chain.append(node)
            node = node.base
        return list(reversed(chain))

    # -- point location -----------------------------------------------------

    def locate_index(self, point: Point) -> Tuple[int, ...]:
        """Cylindrical index of the cell containing ``point`` (full coordinates)."""
        if self.base is None:
            return ()
        point = canonical(point)
        prefix = self.base.locate_index(point.project(range(point.dim - 1)) if point.dim > 1 else RationalPoint(()))
        base_point = canonical(point.project(range(len(self.variables) - 1)))
        stack = real_roots_over(base_point, self.family)
        return prefix + (stack_index(point, stack),)

    def locate(self, point: Point) -> Cell:
        self.enumerate()
        return self.by_index[self.locate_index(point)]

    def sample_at(self, index: Tuple[int, ...]) -> Point:
        """Sample of the cell with ``index`` without enumerating the decomposition."""
        if self.base is None:
            return self.anchor
        if self.cells is not None:
            return self.by_index[index].sample
        key = index[:-1]
        with self._lock:
            stack = self._lazy_stacks.get(key)
        if stack is None:
            stack = real_roots_over(self.base.sample_at(key), self.family)
            with self._lock:
                self._lazy_stacks[key] = stack
        return stack.samples()[index[-1]]

    # -- adjacency ----------------------------------------------------------

    def derivative_family(self, j: int):
        if j not in self._derivatives:
            last = self.variables[-1]
            ders = [self.family[j]]
            while ders[-1].degree(last) >= 1:
                ders.append(ders[-1].diff(last))
            self._derivatives[j] = ders
        return self._derivatives[j]

    def limit_index(self, base_cell: Cell, i: int, endpoint: Cell) -> int:
        """Index over ``endpoint`` of the limit of section ``i`` over ``base_cell``."""
        stack, _ = self.stacks[base_cell.id]
        stack_end, _ = self.stacks[endpoint.id]
        root = stack.roots[i]
        for j in sorted(root.vanishing):
            if j in stack_end.nullified:
                continue
            ders = self.derivative_family(j)
            sigma = [root.point.sign(d) for d in ders]
            matches = []
            for r, eta in enumerate(stack_end.roots):
                if j not in eta.vanishing:
                    continue
                tau = [eta.point.sign(d) for d in ders]
                if all(t == s or t == 0 for t, s in zip(tau, sigma)):
                    matches.append(2 * r + 1)
            if len(matches) == 1:
                return matches[0]
        raise WellBasedError(
            f"section {i} over cell {base_cell.index} has no unique limit over {endpoint.index}",
            shear=self.shear.factor if self.shear else 0,
        )


def lift(polys: Sequence[Poly], base: Decomposition, variable=None, signs_of=None, lazy=False) -> Decomposition:
    """Stack the roots of ``polys`` in the next variable over every cell of ``base``."""
    if variable is None:
        if not polys:
            raise ValueError("lift needs the new variable when the family is empty")
        variable = polys[0].gens[-1]
    variables = base.variables + (variable,)
    family = [in_variables(p, variables) for p in polys]
    tracked = family if signs_of is None else [in_variables(p, variables) for p in signs_of]
    decomposition = Decomposition(variables, family, tracked, base=base, anchor=base.anchor, n_fixed=base.n_fixed)
    if not lazy:
        decomposition.enumerate()
    return decomposition


def decompose(polys: Sequence[Poly], variables: Sequence, anchor: Optional[Point] = None, n_fixed: int = 0,
              levels=None, derivative_closure: bool = False, lazy: bool = False) -> Decomposition:
    """CAD of ``polys`` in ``variables``; the first ``n_fixed`` variables are pinned to ``anchor``."""
    variables = tuple(variables)
    polys = [in_variables(p, variables) for p in polys]
    if levels is None:
        levels = projection_levels(polys, variables, derivative_closure)
    decomposition = Decomposition.root(variables[:n_fixed], anchor)
    for k in range(n_fixed, len(variables)):
        scope = variables[:k + 1]
        tracked = [p for p in polys if main_variable_index(p, variables) <= k]
        decomposition = lift([in_variables(p, scope) for p in levels[k]], decomposition,
                             variable=variables[k], signs_of=[in_variables(p, scope) for p in tracked], lazy=lazy)
    decomposition.levels = levels
    return decomposition


# ---------------------------------------------------------------------------
# Closure and components
# ---------------------------------------------------------------------------

def _one_dim_faces(stack_ids, top):
    faces = {}
    for i, cell_id in enumerate(stack_ids):
        if i % 2 == 0:
            faces[cell_id] = frozenset(stack_ids[k] for k in (i - 1, i + 1) if 0 <= k <= top)
        else:
            faces[cell_id] = frozenset()
    return faces


def closure_faces(decomposition: Decomposition, cell_ids=None) -> Dict[int, frozenset]:
    """Proper faces (cells in the closure) of the requested cells; one or two free variables."""
    decomposition.enumerate()
    if decomposition.free_dim > 2:
        raise CapsExceededError("cell adjacency is supported for at most two free variables")
    wanted = set(range(len(decomposition.cells))) if cell_ids is None else set(cell_ids)
    faces: Dict[int, frozenset] = {}
    if decomposition.free_dim == 0:
        return {c: frozenset() for c in wanted}
    if decomposition.free_dim == 1:
        stack, ids = decomposition.stacks[0]
        for cell_id, fs in _one_dim_faces(ids, 2 * len(stack.roots)).items():
            if cell_id in wanted:
                faces[cell_id] = fs
        return faces
    base = decomposition.base
    for base_cell in base.cells:
        stack, ids = decomposition.stacks[base_cell.id]
        if not wanted.intersection(ids):
            continue
        m = len(stack.roots)
        last = base_cell.index[-1]
        if last % 2 == 1:
            for cell_id, fs in _one_dim_faces(ids, 2 * m).items():
                if cell_id in wanted:
                    faces[cell_id] = fs
            continue
        base_top = 2 * len(base.stacks[0][0].roots)
        endpoints = [base.by_index[base_cell.index[:-1] + (k,)] for k in (last - 1, last + 1) if 0 <= k <= base_top]
        limits = {}

        def limit(i, endpoint):
            key = (i, endpoint.id)
            if key not in limits:
                limits[key] = decomposition.limit_index(base_cell, i, endpoint)
            return limits[key]

        for position, cell_id in enumerate(ids):
            if cell_id not in wanted:
                continue
            out = set()
            if position % 2 == 1:
                i = position // 2
                for endpoint in endpoints:
                    out.add(decomposition.stacks[endpoint.id][1][limit(i, endpoint)])
            else:
                i = position // 2
                if i > 0:
                    out.add(ids[position - 1])
                if i < m:
                    out.add(ids[position + 1])
                for endpoint in endpoints:
                    end_stack, end_ids = decomposition.stacks[endpoint.id]
                    lo = limit(i - 1, endpoint) if i > 0 else 0
                    hi = limit(i, endpoint) if i < m else 2 * len(end_stack.roots)
                    out.update(end_ids[lo:hi + 1])
            faces[cell_id] = frozenset(out)
    return faces


def assign_components(decomposition: Decomposition, faces: Dict[int, frozenset]) -> int:
    """Label connected components of equal sign condition by BFS from the lowest cell id."""
    neighbours: Dict[int, set] = {c.id: set() for c in decomposition.cells}
    for cell_id, fs in faces.items():
        for face in fs:
            decomposition.adjacency.add((min(cell_id, face), max(cell_id, face)))
            if decomposition.cells[cell_id].signs == decomposition.cells[face].signs:
                neighbours[cell_id].add(face)
                neighbours[face].add(cell_id)
    labels: Dict[int, int] = {}
    component = 0
    for cell in decomposition.cells:
        if cell.id in labels:
            continue
        queue = deque([cell.id])
        labels[cell.id] = component
        while queue:
            current = queue.popleft()
            for other in sorted(neighbours[current]):
                if other not in labels:
                    labels[other] = component
                    queue.append(other)
        component += 1
    decomposition.cells = [replace(c, component_id=labels[c.id]) for c in decomposition.cells]
    decomposition.by_index = {c.index: c for c in decomposition.cells}
    return component


def cc_partition(polys: Sequence[Poly], variables=None, seed: int = 0, retries: int = 6,
                 bound: int = 1) -> Decomposition:
    """Full CAD with connected components of realizable sign conditions.

    Samples stay in the sheared coordinates recorded on ``decomposition.shear``;
    use ``original_sample`` to map them back.
    """
    if not polys:
        raise InputError("cc_partition needs at least one polynomial")
    if any(p.is_zero for p in polys):
        raise InputError("zero polynomial in the family")
    variables = tuple(variables or polys[0].gens)
    n = len(variables)
    if n > 2:
        raise CapsExceededError(f"connected components are supported for at most 2 variables, got {n}")
    last_error = None
    for factor in shear_candidates(seed, retries, bound):
        shear = Shear(variables, factor)
        sheared = [shear.apply(in_variables(p, variables)) for p in polys]
        if n == 2 and not is_quasi_monic(sheared, variables[-1]):
            continue
        decomposition = decompose(sheared, variables, derivative_closure=(n == 2))
        decomposition.shear = shear
        try:
            faces = closure_faces(decomposition)
        except WellBasedError as e:
            last_error = e
            logger.debug(f"shear {factor} rejected: {e}")
            continue
        count = assign_components(decomposition, faces)
        logger.debug(f"{len(decomposition.cells)} cells, {count} components (shear {factor})")
        return decomposition
    raise WellBasedError(f"no well-based shear found after {retries} retries ({last_error})",
                         shear=getattr(last_error, 'shear', None))


def original_sample(decomposition: Decomposition, cell: Cell) -> Point:
    if decomposition.shear is None:
        return cell.sample
    return decomposition.shear.to_original(cell.sample, offset=decomposition.n_fixed)


def component_count(decomposition: Decomposition) -> int:
    return len({c.component_id for c in decomposition.cells})


def component_samples(decomposition: Decomposition) -> Dict[int, Point]:
    """One designated sample (lowest cell id) per component, in original coordinates."""
    out = {}
    for cell in decomposition.cells:
        if cell.component_id not in out:
            out[cell.component_id] = original_sample(decomposition, cell)
    return out
