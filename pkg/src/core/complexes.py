"""Simplicial complexes, nerves and homology over a field.

Simplices are tuples of vertices sorted in the complex's vertex order; the
orientation of a simplex is the one given by that order.
"""
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence

from core.fields import Field, FieldMatrix

logger = logging.getLogger(__name__)


class SimplicialComplex:
    """Downward-closed set of simplices over sortable vertices."""

    def __init__(self, simplices: Iterable = ()):
        faces = set()
        for simplex in simplices:
            simplex = tuple(sorted(set(simplex)))
            if not simplex or simplex in faces:
                continue
            for k in range(1, len(simplex) + 1):
                faces.update(combinations(simplex, k))
        self._simplices = frozenset(faces)
        self._by_dim: Dict[int, List[tuple]] = {}
        for simplex in sorted(self._simplices):
            self._by_dim.setdefault(len(simplex) - 1, []).append(simplex)

    @property
    def dim(self) -> int:
        return max(self._by_dim, default=-1)

    @property
    def vertices(self) -> List:
        return [s[0] for s in self._by_dim.get(0, [])]

    def simplices(self, k: int) -> List[tuple]:
        return self._by_dim.get(k, [])

    def all_simplices(self) -> frozenset:
        return self._simplices

    def facets(self) -> List[tuple]:
        """Maximal simplices, sorted."""
        covered = set()
        for k in range(1, self.dim + 1):
            for simplex in self.simplices(k):
                covered.update(simplex[:j] + simplex[j + 1:] for j in range(len(simplex)))
        return [s for s in sorted(self._simplices) if s not in covered]

    def __contains__(self, simplex) -> bool:
        return tuple(sorted(simplex)) in self._simplices

    def __eq__(self, other):
        return isinstance(other, SimplicialComplex) and self._simplices == other._simplices

    def __hash__(self):
        return hash(self._simplices)

    def __len__(self):
        return len(self._simplices)

    def __repr__(self):
        counts = [len(self.simplices(k)) for k in range(self.dim + 1)]
        return f"SimplicialComplex(f-vector={counts})"

    def is_subcomplex_of(self, other: 'SimplicialComplex') -> bool:
        return self._simplices <= other._simplices

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * len(self.simplices(k)) for k in range(self.dim + 1))

    def relabel(self, mapping) -> 'SimplicialComplex':
        return SimplicialComplex(tuple(mapping[v] for v in s) for s in self._simplices)


def skeleton(complex_: SimplicialComplex, m: int) -> SimplicialComplex:
    if m < 0:
        raise ValueError("skeleton dimension must be non-negative")
    return SimplicialComplex(s for k in range(min(m, complex_.dim) + 1) for s in complex_.simplices(k))


def nerve(cover: Sequence[Iterable], max_dim: Optional[int] = None) -> SimplicialComplex:
    """Nerve of a cover given by the vertex sets of closed simplices.

    Vertex ``j`` stands for ``cover[j]``; a subfamily spans a simplex when the
    sets share a vertex (closed simplices meet exactly in a common face).
    """
    sets = [frozenset(c) for c in cover]
    if any(not s for s in sets):
        raise ValueError("cover elements must be nonempty")
    simplices = []

    def grow(simplex, common, start):
        simplices.append(simplex)
        if max_dim is not None and len(simplex) > max_dim:
            return
        for j in range(start, len(sets)):
            shared = common & sets[j]
            if shared:
                grow(simplex + (j,), shared, j + 1)

    for j, s in enumerate(sets):
        grow((j,), s, j + 1)
    return SimplicialComplex(simplices)


# ---------------------------------------------------------------------------
# Chains and homology
# ---------------------------------------------------------------------------

def boundary(simplex: tuple, fld: Field) -> Dict[tuple, object]:
    out = {}
    if len(simplex) < 2:
        return out
    for j in range(len(simplex)):
        face = simplex[:j] + simplex[j + 1:]
        out[face] = fld.one if j % 2 == 0 else -fld.one
    return out


def boundary_matrix(complex_: SimplicialComplex, k: int, fld: Field) -> FieldMatrix:
    """Matrix of the boundary map C_k -> C_{k-1} in sorted simplex order."""
    rows = complex_.simplices(k - 1) if k > 0 else []
    cols = complex_.simplices(k)
    row_index = {s: i for i, s in enumerate(rows)}
    m = FieldMatrix.zeros(fld, len(rows), len(cols))
    for j, simplex in enumerate(cols):
        for face, coeff in boundary(simplex, fld).items():
            m.entries[row_index[face]][j] = coeff
    return m


def _add(target: dict, chain: dict, scale, fld: Field):
    for key, value in chain.items():
        updated = target.get(key, fld.zero) + scale * value
        if updated:
            target[key] = updated
        else:
            target.pop(key, None)


class _Echelon:
    """Sparse vectors in echelon form keyed by their largest index, with tags."""

    def __init__(self, fld: Field, order: Dict[tuple, int], width: int):
        self.field = fld
        self.order = order
        self.width = width
        self.rows: Dict[int, tuple] = {}

    def _low(self, vector):
        return max(self.order[k] for k in vector)

    def reduce(self, vector: dict):
        """Reduce ``vector``; returns the residual and the accumulated tag."""
        vector = dict(vector)
        tag = [self.field.zero] * self.width
        while vector:
            low = self._low(vector)
            if low not in self.rows:
                break
            row, row_tag, key = self.rows[low]
            scale = self.field.div(vector[key], row[key])
            _add(vector, row, -scale, self.field)
            tag = [t + scale * r for t, r in zip(tag, row_tag)]
        return vector, tag

    def insert(self, vector: dict, tag) -> bool:
        residual, acc = self.reduce(vector)
        if not residual:
            return False
        low = self._low(residual)
        key = next(k for k in residual if self.order[k] == low)
        self.rows[low] = (residual, [t - a for t, a in zip(tag, acc)], key)
        return True


@dataclass
class HomologyBasis:
    """Cycles representing a basis of H_degree(complex; field)."""
    degree: int
    cycles: List[Dict[tuple, object]]
    complex: SimplicialComplex
    field: Field
    _echelon: Optional[_Echelon] = field(default=None, repr=False, compare=False)

    @property
    def rank(self) -> int:
        return len(self.cycles)

    def coordinates(self, cycle: Dict[tuple, object]) -> list:
        """Coordinates of the class of ``cycle`` in this basis."""
        return homology_coordinates(self, cycle)


def _kernel_basis(complex_: SimplicialComplex, k: int, fld: Field) -> List[dict]:
    """Cycle basis of C_k by column reduction of the boundary map."""
    cols = complex_.simplices(k)
    if k == 0:
        return [{s: fld.one} for s in cols]
    rows = complex_.simplices(k - 1)
    order = {s: i for i, s in enumerate(rows)}
    reduced: Dict[int, tuple] = {}
    cycles = []
    for simplex in cols:
        image = boundary(simplex, fld)
        combo = {simplex: fld.one}
        while image:
            low = max(order[s] for s in image)
            if low not in reduced:
                break
            other_image, other_combo, key = reduced[low]
            scale = fld.div(image[key], other_image[key])
            _add(image, other_image, -scale, fld)
            _add(combo, other_combo, -scale, fld)
        if image:
            low = max(order[s] for s in image)
            key = next(s for s in image if order[s] == low)
            reduced[low] = (image, combo, key)
        else:
            cycles.append(combo)
    return cycles


def _boundary_echelon(complex_: SimplicialComplex, k: int, fld: Field, width: int) -> _Echelon:
    order = {s: i for i, s in enumerate(complex_.simplices(k))}
    echelon = _Echelon(fld, order, width)
    for simplex in complex_.simplices(k + 1):
        echelon.insert(boundary(simplex, fld), [fld.zero] * width)
    return echelon


def homology(complex_: SimplicialComplex, degree: int, fld: Field) -> HomologyBasis:
    """Deterministic basis of H_degree: cycles independent modulo boundaries, in simplex order."""
    if degree < 0:
        raise ValueError("homology degree must be non-negative")
    candidates = _kernel_basis(complex_, degree, fld)
    probe = _boundary_echelon(complex_, degree, fld, 0)
    chosen = []
    for cycle in candidates:
        if probe.insert(cycle, []):
            chosen.append(cycle)
    return homology_from_cycles(complex_, degree, chosen, fld)


def homology_from_cycles(complex_: SimplicialComplex, degree: int, cycles: Sequence[dict],
                         fld: Field) -> HomologyBasis:
    """Use ``cycles`` as the basis; they must be independent modulo boundaries."""
    width = len(cycles)
    echelon = _boundary_echelon(complex_, degree, fld, width)
    for j, cycle in enumerate(cycles):
        for s in cycle:
            if s not in echelon.order:
                raise ValueError(f"chain uses {s}, not a {degree}-simplex of the complex")
        tag = [fld.one if i == j else fld.zero for i in range(width)]
        if not echelon.insert(cycle, tag):
            raise ValueError("cycles are dependent modulo boundaries")
    return HomologyBasis(degree, [dict(c) for c in cycles], complex_, fld, echelon)


def homology_coordinates(basis: HomologyBasis, cycle: Dict[tuple, object]) -> list:
    residual, tag = basis._echelon.reduce({s: v for s, v in cycle.items() if v})
    if residual:
        raise ValueError("chain is not a cycle of the complex")
    return tag


def betti_numbers(complex_: SimplicialComplex, fld: Field, max_degree: Optional[int] = None) -> List[int]:
    top = complex_.dim if max_degree is None else max_degree
    return [homology(complex_, i, fld).rank for i in range(max(top, 0) + 1)]


def chain_map(vertex_map, chain: Dict[tuple, object], fld: Field) -> Dict[tuple, object]:
    """Image of a chain under the simplicial map given on vertices (degenerate simplices vanish)."""
    out: Dict[tuple, object] = {}
    for simplex, coeff in chain.items():
        image = [vertex_map[v] for v in simplex]
        if len(set(image)) < len(image):
            continue
        order = sorted(range(len(image)), key=lambda i: image[i])
        inversions = sum(1 for a, b in combinations(order, 2) if a > b)
        key = tuple(image[i] for i in order)
        _add(out, {key: coeff}, -fld.one if inversions % 2 else fld.one, fld)
    return out


def induced_map(sub: SimplicialComplex, complex_: SimplicialComplex, degree: int, fld: Field,
                source: Optional[HomologyBasis] = None, target: Optional[HomologyBasis] = None) -> FieldMatrix:
    """Matrix of H_degree(sub) -> H_degree(complex) induced by inclusion, in the given bases."""
    if not sub.is_subcomplex_of(complex_):
        raise ValueError("not a subcomplex")
    source = source or homology(sub, degree, fld)
    target = target or homology(complex_, degree, fld)
    columns = [homology_coordinates(target, cycle) for cycle in source.cycles]
    return FieldMatrix.from_columns(fld, columns, target.rank)


def nerve_chain_map(cover: Sequence[Iterable], chain: Dict[tuple, object], fld: Field) -> Dict[tuple, object]:
    """Carry a 0- or 1-chain of the nerve of ``cover`` back to the covered complex.

    A nerve vertex goes to the least vertex of its cover element; a nerve
    edge goes to the path through the least vertex the two elements share.
    """
    sets = [sorted(c) for c in cover]
    out: Dict[tuple, object] = {}
    for simplex, coeff in chain.items():
        if len(simplex) == 1:
            _add(out, {(sets[simplex[0]][0],): fld.one}, coeff, fld)
        elif len(simplex) == 2:
            a, b = simplex
            u, v = sets[a][0], sets[b][0]
            w = min(set(sets[a]) & set(sets[b]))
            for start, end in ((u, w), (w, v)):
                if start == end:
                    continue
                if start < end:
                    _add(out, {(start, end): fld.one}, coeff, fld)
                else:
                    _add(out, {(end, start): fld.one}, -coeff, fld)
        else:
            raise ValueError("nerve chains are carried in degrees 0 and 1 only")
    return out
