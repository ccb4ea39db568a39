"""Exact rational scalars, vectors, matrices, interval boxes and rounding.

Scalars are `fractions.Fraction` throughout (arbitrary precision, always
reduced, positive denominator).  Vectors are plain tuples of Fractions;
matrices carry a row-major tuple grid.  All geometry is taken in the
infinity norm, and balls are open: B(x, R) = {y : |x_i - y_i| < R for all i}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from numbers import Rational as _RationalABC
from typing import Iterable, Sequence

from .errors import DimensionMismatchError, SingularMatrixError

Rational = Fraction
Vec = tuple[Fraction, ...]

HALF = Fraction(1, 2)


def rat(x) -> Fraction:
    """Coerce an int, Fraction or exact-rational string to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str, _RationalABC)):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


def vec(coords: Iterable) -> Vec:
    return tuple(rat(c) for c in coords)


def round_scalar(x) -> int:
    """The unique integer k with k - 1/2 < x <= k + 1/2 (ties go down)."""
    return math.ceil(rat(x) - HALF)


def round_vector(x: Sequence) -> Vec:
    """Componentwise round_scalar, landing on the integer lattice."""
    return tuple(Fraction(round_scalar(c)) for c in x)


def ball_volume(radius, dim: int) -> Fraction:
    """Lebesgue volume (2R)^n of the open infinity-norm ball of radius R."""
    radius = rat(radius)
    if radius <= 0:
        raise ValueError(f"ball radius must be positive, got {radius}")
    if dim < 1:
        raise ValueError(f"dimension must be positive, got {dim}")
    return (2 * radius) ** dim


def inf_norm(x: Sequence) -> Fraction:
    return max((abs(rat(c)) for c in x), default=Fraction(0))


def vec_add(x: Vec, y: Vec) -> Vec:
    if len(x) != len(y):
        raise DimensionMismatchError(f"vector dims {len(x)} vs {len(y)}")
    return tuple(a + b for a, b in zip(x, y))


def vec_sub(x: Vec, y: Vec) -> Vec:
    if len(x) != len(y):
        raise DimensionMismatchError(f"vector dims {len(x)} vs {len(y)}")
    return tuple(a - b for a, b in zip(x, y))


@dataclass(frozen=True)
class RMatrix:
    """Immutable rational matrix, row-major."""

    rows: int
    cols: int
    entries: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "RMatrix":
        grid = tuple(tuple(rat(e) for e in row) for row in rows)
        if not grid or not grid[0]:
            raise ValueError("matrix needs at least one row and column")
        width = len(grid[0])
        if any(len(row) != width for row in grid):
            raise ValueError("ragged matrix rows")
        return cls(len(grid), width, grid)

    @classmethod
    def identity(cls, n: int) -> "RMatrix":
        one, zero = Fraction(1), Fraction(0)
        return cls.from_rows(
            [[one if i == j else zero for j in range(n)] for i in range(n)]
        )

    def row(self, i: int) -> Vec:
        return self.entries[i]

    def col(self, j: int) -> Vec:
        return tuple(row[j] for row in self.entries)

    def apply(self, x: Sequence) -> Vec:
        """Matrix-vector product."""
        if len(x) != self.cols:
            raise DimensionMismatchError(
                f"matrix is {self.rows}x{self.cols}, vector has length {len(x)}"
            )
        xs = [rat(c) for c in x]
        return tuple(sum(a * b for a, b in zip(row, xs)) for row in self.entries)

    def matmul(self, other: "RMatrix") -> "RMatrix":
        if self.cols != other.rows:
            raise DimensionMismatchError(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}"
            )
        return RMatrix.from_rows(
            [
                [
                    sum(self.entries[i][k] * other.entries[k][j] for k in range(self.cols))
                    for j in range(other.cols)
                ]
                for i in range(self.rows)
            ]
        )

    def determinant(self) -> Fraction:
        if self.rows != self.cols:
            raise ValueError("determinant needs a square matrix")
        n = self.rows
        work = [list(row) for row in self.entries]
        det = Fraction(1)
        for col in range(n):
            pivot = next((r for r in range(col, n) if work[r][col] != 0), None)
            if pivot is None:
                return Fraction(0)
            if pivot != col:
                work[col], work[pivot] = work[pivot], work[col]
                det = -det
            det *= work[col][col]
            inv = 1 / work[col][col]
            for r in range(col + 1, n):
                factor = work[r][col] * inv
                if factor:
                    for c in range(col, n):
                        work[r][c] -= factor * work[col][c]
        return det

    def op_norm_inf(self) -> Fraction:
        """Operator norm for the infinity norm: max absolute row sum."""
        return max(sum(abs(e) for e in row) for row in self.entries)


def invert_matrix(m: RMatrix) -> RMatrix:
    """Exact inverse by Gauss-Jordan elimination; raises on zero determinant."""
    if m.rows != m.cols:
        raise ValueError("only square matrices can be inverted")
    n = m.rows
    work = [list(row) + [Fraction(int(i == j)) for j in range(n)]
            for i, row in enumerate(m.entries)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if work[r][col] != 0), None)
        if pivot is None:
            raise SingularMatrixError("matrix is singular")
        work[col], work[pivot] = work[pivot], work[col]
        inv = 1 / work[col][col]
        work[col] = [e * inv for e in work[col]]
        for r in range(n):
            if r != col and work[r][col]:
                factor = work[r][col]
                work[r] = [a - factor * b for a, b in zip(work[r], work[col])]
    return RMatrix.from_rows([row[n:] for row in work])


@dataclass(frozen=True)
class IntervalBox:
    """Axis-aligned box with per-face open/closed flags.

    Axis i spans lo[i]..hi[i]; a face flag True means that face is closed.
    A zero-axis box is allowed and contains the unique point of R^0.
    """

    lo: Vec
    hi: Vec
    lo_closed: tuple[bool, ...]
    hi_closed: tuple[bool, ...]

    @classmethod
    def closed(cls, lo: Sequence, hi: Sequence) -> "IntervalBox":
        lo, hi = vec(lo), vec(hi)
        return cls(lo, hi, (True,) * len(lo), (True,) * len(hi))

    @classmethod
    def from_faces(cls, faces: Sequence[tuple]) -> "IntervalBox":
        """Build from (lo, lo_closed, hi, hi_closed) per axis."""
        lo = vec(f[0] for f in faces)
        hi = vec(f[2] for f in faces)
        return cls(lo, hi, tuple(bool(f[1]) for f in faces),
                   tuple(bool(f[3]) for f in faces))

    def __post_init__(self):
        if not (len(self.lo) == len(self.hi) == len(self.lo_closed) == len(self.hi_closed)):
            raise DimensionMismatchError("box faces have inconsistent lengths")
        for a, b in zip(self.lo, self.hi):
            if a > b:
                raise ValueError(f"box axis has lo {a} > hi {b}")

    @property
    def dim(self) -> int:
        return len(self.lo)

    def is_empty(self) -> bool:
        """True when some axis degenerates to an excluded point."""
        for a, b, ac, bc in zip(self.lo, self.hi, self.lo_closed, self.hi_closed):
            if a == b and not (ac and bc):
                return True
        return False

    def contains(self, point: Sequence) -> bool:
        if len(point) != self.dim:
            raise DimensionMismatchError(
                f"box dim {self.dim}, point dim {len(point)}"
            )
        for x, a, b, ac, bc in zip(point, self.lo, self.hi, self.lo_closed, self.hi_closed):
            x = rat(x)
            if x < a or (x == a and not ac):
                return False
            if x > b or (x == b and not bc):
                return False
        return True

    def translate(self, shift: Sequence) -> "IntervalBox":
        shift = vec(shift)
        return IntervalBox(vec_add(self.lo, shift), vec_add(self.hi, shift),
                           self.lo_closed, self.hi_closed)

    def corners(self) -> list[Vec]:
        if self.dim == 0:
            return [()]
        return [tuple(c) for c in product(*zip(self.lo, self.hi))]


def ball_box(center: Sequence, radius, closed: bool = False) -> IntervalBox:
    """The box underlying B(center, radius); open faces unless closed=True."""
    center, radius = vec(center), rat(radius)
    lo = tuple(c - radius for c in center)
    hi = tuple(c + radius for c in center)
    flags = (closed,) * len(center)
    return IntervalBox(lo, hi, flags, flags)


def preimage_bounds(m: RMatrix, box: IntervalBox) -> IntervalBox:
    """A closed box guaranteed to contain the preimage M^-1(box).

    Computed by pushing every corner of the box through the exact inverse
    and taking the componentwise hull; corner count 2^dim stays small at
    the dimensions this package works in.
    """
    if m.rows != m.cols:
        raise ValueError("preimage bounds need a square matrix")
    if box.dim != m.rows:
        raise DimensionMismatchError(f"matrix dim {m.rows}, box dim {box.dim}")
    inv = invert_matrix(m)
    images = [inv.apply(corner) for corner in box.corners()]
    lo = tuple(min(img[i] for img in images) for i in range(m.rows))
    hi = tuple(max(img[i] for img in images) for i in range(m.rows))
    return IntervalBox(lo, hi, (True,) * m.rows, (True,) * m.rows)
