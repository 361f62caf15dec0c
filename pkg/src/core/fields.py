"""Coefficient fields and small dense matrices over them."""
from dataclasses import dataclass
from typing import List, Sequence

from sympy import Rational, isprime
from sympy.polys.domains import GF, QQ

from core.errors import InputError


class Field:
    """GF(p) or the rationals, backed by a sympy domain."""

    def __init__(self, name: str = "gf2"):
        name = str(name).lower()
        if name in ("qq", "q", "rationals"):
            self.name = "qq"
            self.characteristic = 0
            self.domain = QQ
        elif name.startswith("gf"):
            try:
                p = int(name[2:])
            except ValueError:
                raise InputError(f"unknown field {name!r}")
            if not isprime(p):
                raise InputError(f"GF({p}) is not a prime field")
            self.name = name
            self.characteristic = p
            self.domain = GF(p, symmetric=False)
        else:
            raise InputError(f"unknown field {name!r} (expected gfP or qq)")
        self.zero = self.domain.zero
        self.one = self.domain.one

    @property
    def is_finite(self) -> bool:
        return self.characteristic > 0

    def __eq__(self, other):
        return isinstance(other, Field) and other.name == self.name

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return f"Field({self.name!r})"

    def __call__(self, value):
        if isinstance(value, str):
            value = Rational(value)
        if self.characteristic and isinstance(value, Rational) and value.q != 1:
            return self.div(self.domain.convert(int(value.p)), self.domain.convert(int(value.q)))
        return self.domain.convert(value)

    def div(self, a, b):
        if not b:
            raise ZeroDivisionError("division by zero in the coefficient field")
        return self.domain.quo(a, b)

    def to_str(self, value) -> str:
        return str(self.domain.to_sympy(value))

    def elements(self):
        """All elements of a finite field, 0 first."""
        if not self.is_finite:
            raise ValueError("the rationals cannot be enumerated")
        return [self.domain.convert(i) for i in range(self.characteristic)]


@dataclass
class FieldMatrix:
    """Dense ``rows x cols`` matrix over ``field`` (a linear map k^cols -> k^rows)."""
    field: Field
    rows: int
    cols: int
    entries: List[list]

    @classmethod
    def zeros(cls, field: Field, rows: int, cols: int) -> 'FieldMatrix':
        return cls(field, rows, cols, [[field.zero] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, field: Field, size: int) -> 'FieldMatrix':
        m = cls.zeros(field, size, size)
        for i in range(size):
            m.entries[i][i] = field.one
        return m

    @classmethod
    def from_rows(cls, field: Field, rows: Sequence[Sequence], cols: int = None) -> 'FieldMatrix':
        data = [[field(v) for v in row] for row in rows]
        width = len(data[0]) if data else (cols or 0)
        if any(len(row) != width for row in data):
            raise InputError("ragged matrix rows")
        return cls(field, len(data), width, data)

    @classmethod
    def from_columns(cls, field: Field, columns: Sequence[Sequence], rows: int) -> 'FieldMatrix':
        m = cls.zeros(field, rows, len(columns))
        for j, column in enumerate(columns):
            for i, v in enumerate(column):
                m.entries[i][j] = v
        return m

    def __eq__(self, other):
        return (isinstance(other, FieldMatrix) and self.field == other.field
                and (self.rows, self.cols) == (other.rows, other.cols) and self.entries == other.entries)

    def __matmul__(self, other: 'FieldMatrix') -> 'FieldMatrix':
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        out = FieldMatrix.zeros(self.field, self.rows, other.cols)
        for i in range(self.rows):
            row = self.entries[i]
            for j in range(other.cols):
                acc = self.field.zero
                for k in range(self.cols):
                    if row[k]:
                        acc += row[k] * other.entries[k][j]
                out.entries[i][j] = acc
        return out

    def column(self, j: int) -> list:
        return [self.entries[i][j] for i in range(self.rows)]

    def _echelon(self):
        rows = [list(r) for r in self.entries]
        pivots = []
        r = 0
        for c in range(self.cols):
            pivot = next((i for i in range(r, self.rows) if rows[i][c]), None)
            if pivot is None:
                continue
            rows[r], rows[pivot] = rows[pivot], rows[r]
            inv = self.field.div(self.field.one, rows[r][c])
            rows[r] = [v * inv for v in rows[r]]
            for i in range(self.rows):
                if i != r and rows[i][c]:
                    factor = rows[i][c]
                    rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
            pivots.append(c)
            r += 1
        return rows, pivots

    def rank(self) -> int:
        return len(self._echelon()[1])

    def inverse(self) -> 'FieldMatrix':
        if self.rows != self.cols:
            raise ValueError("only square matrices are invertible")
        n = self.rows
        augmented = FieldMatrix(self.field, n, 2 * n,
                                [list(row) + [self.field.one if i == j else self.field.zero for j in range(n)]
                                 for i, row in enumerate(self.entries)])
        rows, pivots = augmented._echelon()
        if pivots[:n] != list(range(n)):
            raise ValueError("matrix is singular")
        return FieldMatrix(self.field, n, n, [row[n:] for row in rows])

    def is_identity(self) -> bool:
        return self == FieldMatrix.identity(self.field, self.rows) and self.rows == self.cols

    def pad(self, size: int) -> 'FieldMatrix':
        """Embed into a ``size x size`` matrix: the block sits in the first rows and columns."""
        if self.rows > size or self.cols > size:
            raise ValueError(f"{self.rows}x{self.cols} block does not fit in {size}x{size}")
        out = FieldMatrix.zeros(self.field, size, size)
        for i in range(self.rows):
            for j in range(self.cols):
                out.entries[i][j] = self.entries[i][j]
        return out

    def unpad(self, rows: int, cols: int) -> 'FieldMatrix':
        """The leading ``rows x cols`` block."""
        return FieldMatrix(self.field, rows, cols, [list(self.entries[i][:cols]) for i in range(rows)])

    def to_list(self):
        return [[self.field.to_str(v) for v in row] for row in self.entries]
