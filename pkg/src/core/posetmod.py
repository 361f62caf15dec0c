"""Finite poset modules: structure, invariants and equivalence.

Elements are numbered 0..N-1.  A module stores, per homology degree, a
dimension per element and a matrix per strictly comparable pair ``a < b``
(the map from the space at ``a`` to the space at ``b``).
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from core.errors import CapsExceededError, IndeterminateError, InputError
from core.fields import Field, FieldMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FinitePoset:
    size: int
    relation: frozenset

    @classmethod
    def from_pairs(cls, size: int, pairs: Iterable[Tuple[int, int]]) -> 'FinitePoset':
        """Reflexive-transitive closure of ``pairs``; rejects cycles."""
        leq = [[a == b for b in range(size)] for a in range(size)]
        for a, b in pairs:
            if not (0 <= a < size and 0 <= b < size):
                raise InputError(f"pair ({a}, {b}) outside 0..{size - 1}")
            leq[a][b] = True
        for k in range(size):
            for a in range(size):
                if leq[a][k]:
                    for b in range(size):
                        if leq[k][b]:
                            leq[a][b] = True
        for a in range(size):
            for b in range(a + 1, size):
                if leq[a][b] and leq[b][a]:
                    raise InputError(f"elements {a} and {b} precede each other: not a partial order")
        return cls(size, frozenset((a, b) for a in range(size) for b in range(size) if leq[a][b]))

    def leq(self, a: int, b: int) -> bool:
        return (a, b) in self.relation

    def strict_pairs(self) -> List[Tuple[int, int]]:
        return sorted((a, b) for a, b in self.relation if a != b)

    def topological_order(self) -> List[int]:
        below = {a: sum(1 for b in range(self.size) if b != a and self.leq(b, a)) for a in range(self.size)}
        return sorted(range(self.size), key=lambda a: (below[a], a))

    def relabel(self, phi: Sequence[int]) -> 'FinitePoset':
        """The poset on the same labels with ``a <= b`` iff ``phi[a] <= phi[b]`` here."""
        return FinitePoset(self.size, frozenset((a, b) for a in range(self.size) for b in range(self.size)
                                                if self.leq(phi[a], phi[b])))


@dataclass
class FinitePosetModule:
    poset: FinitePoset
    field: Field
    dims: Tuple[Tuple[int, ...], ...]
    maps: Tuple[Dict[Tuple[int, int], FieldMatrix], ...]

    @property
    def degrees(self) -> int:
        return len(self.dims)

    def matrix(self, degree: int, a: int, b: int) -> FieldMatrix:
        if a == b:
            return FieldMatrix.identity(self.field, self.dims[degree][a])
        if not self.poset.leq(a, b):
            raise KeyError(f"{a} does not precede {b}")
        return self.maps[degree][(a, b)]

    def degree_part(self, degree: int) -> 'FinitePosetModule':
        return FinitePosetModule(self.poset, self.field, (self.dims[degree],), (self.maps[degree],))

    def pullback(self, phi: Sequence[int]) -> 'FinitePosetModule':
        """The module ``a -> self(phi[a])`` over the relabelled poset."""
        poset = self.poset.relabel(phi)
        dims = tuple(tuple(d[phi[a]] for a in range(poset.size)) for d in self.dims)
        maps = tuple({(a, b): m[(phi[a], phi[b])] for a, b in poset.strict_pairs()} for m in self.maps)
        return FinitePosetModule(poset, self.field, dims, maps)

    def to_dict(self) -> dict:
        return {
            "field": self.field.name,
            "size": self.poset.size,
            "order": [list(p) for p in self.poset.strict_pairs()],
            "dims": [list(d) for d in self.dims],
            "maps": [
                {"degree": i, "from": a, "to": b, "matrix": m[(a, b)].to_list()}
                for i, m in enumerate(self.maps) for a, b in sorted(m)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'FinitePosetModule':
        try:
            fld = Field(data["field"])
            poset = FinitePoset.from_pairs(int(data["size"]), [tuple(p) for p in data["order"]])
            dims = tuple(tuple(int(v) for v in d) for d in data["dims"])
            maps: List[Dict] = [dict() for _ in dims]
            for entry in data.get("maps", []):
                i, a, b = int(entry["degree"]), int(entry["from"]), int(entry["to"])
                rows = entry["matrix"]
                maps[i][(a, b)] = FieldMatrix.from_rows(fld, rows, cols=dims[i][a])
        except (KeyError, TypeError, ValueError, IndexError) as e:
            raise InputError(f"malformed poset module: {e}") from e
        module = cls(poset, fld, dims, tuple(maps))
        problems = check_functor(module)
        if problems:
            raise InputError(f"not a functor: {problems[0]}")
        return module


def check_functor(module: FinitePosetModule) -> List[str]:
    """Violations of the shape, identity and composition laws (empty when lawful)."""
    problems = []
    poset = module.poset
    for i, (dims, maps) in enumerate(zip(module.dims, module.maps)):
        if len(dims) != poset.size:
            problems.append(f"degree {i}: {len(dims)} dimensions for {poset.size} elements")
            continue
        for a, b in poset.strict_pairs():
            m = maps.get((a, b))
            if m is None:
                problems.append(f"degree {i}: missing map {a}->{b}")
            elif (m.rows, m.cols) != (dims[b], dims[a]):
                problems.append(f"degree {i}: map {a}->{b} is {m.rows}x{m.cols}, expected {dims[b]}x{dims[a]}")
        if problems:
            continue
        for a, b in poset.strict_pairs():
            for c in range(poset.size):
                if c != b and poset.leq(b, c):
                    if maps[(b, c)] @ maps[(a, b)] != maps[(a, c)]:
                        problems.append(f"degree {i}: M[{a},{c}] != M[{b},{c}] M[{a},{b}]")
    return problems


# ---------------------------------------------------------------------------
# Invariants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModuleInvariants:
    dims: Tuple[Tuple[int, ...], ...]
    ranks: Tuple[Tuple[Tuple[int, int, int], int], ...]

    def weak_fingerprint(self, poset: FinitePoset):
        """Label-free summary preserved by poset isomorphisms."""
        profile = []
        for a in range(poset.size):
            up = sum(1 for b in range(poset.size) if b != a and poset.leq(a, b))
            down = sum(1 for b in range(poset.size) if b != a and poset.leq(b, a))
            profile.append((tuple(d[a] for d in self.dims), up, down))
        return tuple(sorted(profile)), tuple(sorted((k[0], r) for k, r in self.ranks))


def invariants(module: FinitePosetModule) -> ModuleInvariants:
    ranks = []
    for i, maps in enumerate(module.maps):
        for (a, b) in sorted(maps):
            ranks.append(((i, a, b), maps[(a, b)].rank()))
    return ModuleInvariants(tuple(module.dims), tuple(ranks))


# ---------------------------------------------------------------------------
# Equivalence
# ---------------------------------------------------------------------------

@dataclass
class EquivalenceResult:
    """Verdict True/False, or None when the search could not decide."""
    verdict: Optional[bool]
    witness: Optional[dict] = None
    report: str = ""

    def __bool__(self):
        if self.verdict is None:
            raise IndeterminateError(self.report or "equivalence could not be decided")
        return self.verdict


class _BudgetExceeded(Exception):
    pass


def _invertible_matrices(fld: Field, size: int, height: int):
    if size == 0:
        yield FieldMatrix(fld, 0, 0, [])
        return
    if fld.is_finite:
        values = fld.elements()
    else:
        values = [fld(v) for v in sorted(range(-height, height + 1), key=lambda v: (abs(v), -v))]
    for entries in itertools.product(values, repeat=size * size):
        m = FieldMatrix(fld, size, size, [list(entries[r * size:(r + 1) * size]) for r in range(size)])
        if m.rank() == size:
            yield m


def _search_degree(m1: FinitePosetModule, m2: FinitePosetModule, degree: int, budget: int, height: int):
    poset = m1.poset
    dims = m1.dims[degree]
    topo = {a: k for k, a in enumerate(poset.topological_order())}
    order = sorted(range(poset.size), key=lambda a: (-dims[a], topo[a]))
    pairs = poset.strict_pairs()
    candidates: Dict[int, list] = {}
    assigned: Dict[int, FieldMatrix] = {}
    nodes = [0]

    def consistent(a):
        for x, y in pairs:
            if a not in (x, y) or x not in assigned or y not in assigned:
                continue
            if assigned[y] @ m1.maps[degree][(x, y)] != m2.maps[degree][(x, y)] @ assigned[x]:
                return False
        return True

    def backtrack(k):
        if k == len(order):
            return True
        a = order[k]
        size = dims[a]
        if size not in candidates:
            candidates[size] = list(_invertible_matrices(m1.field, size, height))
        for g in candidates[size]:
            nodes[0] += 1
            if nodes[0] > budget:
                raise _BudgetExceeded()
            assigned[a] = g
            if consistent(a) and backtrack(k + 1):
                return True
            del assigned[a]
        return False

    if backtrack(0):
        return dict(assigned)
    return None


def strong_equivalent(m1: FinitePosetModule, m2: FinitePosetModule, budget: int = 200000,
                      max_dim: int = 8, height: int = 1) -> EquivalenceResult:
    """Decide whether ``m1`` and ``m2`` are isomorphic over the same poset.

    Finite fields: invariant screening, then backtracking over invertible
    base changes in decreasing-dimension, topological order.  Rationals:
    screening plus a search over integer matrices of entries at most
    ``height``; failure there is reported as undecided.
    """
    if m1.field != m2.field:
        raise InputError(f"modules over different fields ({m1.field.name}, {m2.field.name})")
    if m1.poset != m2.poset:
        return EquivalenceResult(False, report="posets differ")
    if m1.degrees != m2.degrees:
        return EquivalenceResult(False, report="different numbers of degrees")
    if invariants(m1) != invariants(m2):
        return EquivalenceResult(False, report="dimension vectors or rank functions differ")
    witness = {}
    for degree in range(m1.degrees):
        total = sum(m1.dims[degree])
        if total > max_dim:
            return EquivalenceResult(None, report=f"degree {degree}: total dimension {total} exceeds {max_dim}")
        try:
            found = _search_degree(m1, m2, degree, budget, height)
        except _BudgetExceeded:
            return EquivalenceResult(None, report=f"degree {degree}: search budget of {budget} exhausted")
        if found is None:
            if not m1.field.is_finite:
                return EquivalenceResult(None, report=f"degree {degree}: no base change of height <= {height}")
            return EquivalenceResult(False, report=f"degree {degree}: no invertible base change commutes")
        witness[degree] = found
    return EquivalenceResult(True, witness=witness, report="base change found")


def poset_isomorphisms(p1: FinitePoset, p2: FinitePoset, dims1=None, dims2=None):
    """Bijections ``phi`` with ``a <= b`` in p1 iff ``phi[a] <= phi[b]`` in p2 (optionally dimension-preserving)."""
    if p1.size != p2.size or len(p1.relation) != len(p2.relation):
        return
    n = p1.size

    def profile(poset, dims, a):
        up = sum(1 for b in range(n) if poset.leq(a, b))
        down = sum(1 for b in range(n) if poset.leq(b, a))
        return up, down, tuple(d[a] for d in dims) if dims else ()

    prof1 = [profile(p1, dims1, a) for a in range(n)]
    prof2 = [profile(p2, dims2, a) for a in range(n)]
    phi: List[int] = []
    used = set()

    def extend():
        a = len(phi)
        if a == n:
            yield tuple(phi)
            return
        for b in range(n):
            if b in used or prof1[a] != prof2[b]:
                continue
            if all(p1.leq(x, a) == p2.leq(phi[x], b) and p1.leq(a, x) == p2.leq(b, phi[x]) for x in range(a)):
                phi.append(b)
                used.add(b)
                yield from extend()
                phi.pop()
                used.discard(b)

    yield from extend()


def weak_equivalent(m1: FinitePosetModule, m2: FinitePosetModule, budget: int = 200000,
                    max_dim: int = 8, max_size: int = 8, height: int = 1) -> EquivalenceResult:
    """Isomorphic after relabelling along some poset isomorphism."""
    if m1.poset.size > max_size:
        raise CapsExceededError(f"poset of {m1.poset.size} elements exceeds {max_size}")
    if m1.degrees != m2.degrees:
        return EquivalenceResult(False, report="different numbers of degrees")
    undecided = None
    tried = 0
    for phi in poset_isomorphisms(m1.poset, m2.poset, m1.dims, m2.dims):
        tried += 1
        result = strong_equivalent(m1, m2.pullback(phi), budget, max_dim, height)
        if result.verdict:
            result.witness = {"isomorphism": list(phi), "base_change": result.witness}
            return result
        if result.verdict is None:
            undecided = result
    if undecided is not None:
        return EquivalenceResult(None, report=f"undecided under some poset isomorphism: {undecided.report}")
    if not tried:
        return EquivalenceResult(False, report="posets are not isomorphic (with matching dimensions)")
    return EquivalenceResult(False, report=f"{tried} poset isomorphisms tried, none carries a base change")


@dataclass
class Classification:
    classes: List[List[int]]
    undecided: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.classes)


def classify(modules: Sequence[FinitePosetModule], mode: str = "strong", **search) -> Classification:
    """Partition ``modules`` into equivalence classes; undecided pairs stay apart and are listed."""
    if mode not in ("strong", "weak"):
        raise InputError(f"unknown equivalence mode {mode!r}")
    decide = strong_equivalent if mode == "strong" else weak_equivalent
    classes: List[List[int]] = []
    prints: List[object] = []
    undecided = []
    for i, module in enumerate(modules):
        inv = invariants(module)
        fingerprint = (module.poset, inv) if mode == "strong" else inv.weak_fingerprint(module.poset)
        for members, fp in zip(classes, prints):
            if fp != fingerprint:
                continue
            result = decide(modules[members[0]], module, **search)
            if result.verdict:
                members.append(i)
                break
            if result.verdict is None:
                undecided.append((members[0], i))
        else:
            classes.append([i])
            prints.append(fingerprint)
    return Classification(classes, undecided)


def example_ab(a, b, fld: Field) -> FinitePosetModule:
    """Five-element module: a 2-dimensional top ``v`` (element 0) receiving four lines.

    Elements 1..4 map into ``v`` by the columns [1,0], [0,1], [1,1] and [a,b].
    """
    a, b = fld(a), fld(b)
    if not a and not b:
        raise InputError("(a, b) = (0, 0) is not allowed")
    poset = FinitePoset.from_pairs(5, [(j, 0) for j in range(1, 5)])
    columns = [(fld.one, fld.zero), (fld.zero, fld.one), (fld.one, fld.one), (a, b)]
    maps = {(j, 0): FieldMatrix.from_columns(fld, [list(columns[j - 1])], 2) for j in range(1, 5)}
    return FinitePosetModule(poset, fld, ((2, 1, 1, 1, 1),), (maps,))
