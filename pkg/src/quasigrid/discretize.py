"""Discretized linear maps on integer points and the random-chain sampler.

The discretization of an invertible map A sends an integer point x to the
componentwise rounding of A*x (ties toward the lower integer).  Chains of
such maps applied to the full integer lattice are computed soundly: the
needed input region is back-propagated through exact preimages with a
closed unit-cube slack per rounding step, so the final patch is complete
inside the requested ball.

Random chains follow a rotation * diagonal * rotation decomposition with
angles uniform on a turn and log-stretch uniform on [-1/2, 1/2].  The
trigonometric and exponential values are evaluated by exact rational
series, so sampling is bit-identical across platforms, and the resulting
entries are quantized to denominator 2**32.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import BudgetError, DimensionMismatchError, FormatError
from .cutproject import enumeration_budget
from .pointset import PointSet
from .ratmath import (
    HALF,
    IntervalBox,
    RMatrix,
    Vec,
    inf_norm,
    invert_matrix,
    preimage_bounds,
    rat,
    round_vector,
)
from .rng import RngState
from .textio import format_rational, parse_int, parse_rational, split_lines

_QUANT = 1 << 32
# 64 fractional bits of pi, enough that quantization to 2**-32 dominates.
_PI = Fraction(0x3243F6A8885A308D3, 1 << 64)
_SERIES_EPS = Fraction(1, 1 << 80)


@dataclass(frozen=True)
class MapChain:
    """Ordered invertible square maps; matrices[0] is applied first."""

    dim: int
    matrices: tuple[RMatrix, ...]

    def __post_init__(self):
        if not self.matrices:
            raise ValueError("a chain needs at least one matrix")
        for a in self.matrices:
            if a.rows != self.dim or a.cols != self.dim:
                raise DimensionMismatchError(
                    f"chain maps must be {self.dim}x{self.dim}"
                )
            invert_matrix(a)  # raises SingularMatrixError if not invertible


def hat_point(a: RMatrix, x: Sequence) -> Vec:
    return round_vector(a.apply(x))


def apply_hat(a: RMatrix, s: PointSet) -> PointSet:
    """Image of a point set under the discretized map, deduplicated.

    The returned domain is only a bounding ball for the image and is marked
    incomplete: rounding can pull points of the underlying set that lie just
    outside the input patch into any target ball, so completeness is only
    restored by a sound margin computation such as apply_chain's.
    """
    if a.rows != a.cols or a.rows != s.dim:
        raise DimensionMismatchError(f"map must be {s.dim}x{s.dim}")
    invert_matrix(a)
    for p in s.points:
        if any(c.denominator != 1 for c in p):
            raise ValueError(f"apply_hat needs integer points, got {p}")
    images = {hat_point(a, p) for p in s.points}
    center = round_vector(a.apply(s.center))
    radius = Fraction(math.ceil(a.op_norm_inf() * s.radius) + 1)
    return PointSet.build(s.dim, images, center, radius, complete=False)


# --- exact back-propagated input regions -------------------------------------


def _hull_2d(points):
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _mink_cube_2d(hull, r: Fraction):
    return _hull_2d(
        [(x + sx * r, y + sy * r)
         for x, y in hull for sx in (-1, 1) for sy in (-1, 1)]
    )


def _map_region_2d(inv: RMatrix, hull):
    return _hull_2d([tuple(inv.apply(v)) for v in hull])


_SNAP = Fraction(1, 1 << 13)


def _simplify_2d(hull):
    """Outer approximation with denominators capped at 2**13.

    Inflate by a cube of radius 2*SNAP, then snap vertices to the nearest
    grid point (error at most SNAP/2 per coordinate).  The inflation margin
    dominates the snapping error, so the result contains the input; it keeps
    vertex coordinates small across long preimage chains.
    """
    fat = _mink_cube_2d(hull, 2 * _SNAP)
    snapped = [
        (round(x / _SNAP) * _SNAP, round(y / _SNAP) * _SNAP) for x, y in fat
    ]
    return _hull_2d(snapped)


def _column_bounds(hull, budget: int):
    """Per integer x column, the closed y-interval of a convex hull."""
    if not hull:
        return
    xs = [v[0] for v in hull]
    x_lo, x_hi = math.ceil(min(xs)), math.floor(max(xs))
    if x_hi - x_lo + 1 > budget:
        raise BudgetError("input grid for the chain exceeds the budget")
    for x in range(x_lo, x_hi + 1):
        ys = []
        count = len(hull)
        for i in range(count):
            p, q = hull[i], hull[(i + 1) % count]
            if p[0] == q[0]:
                if p[0] == x:
                    ys.extend((p[1], q[1]))
            elif min(p[0], q[0]) <= x <= max(p[0], q[0]):
                t = (rat(x) - p[0]) / (q[0] - p[0])
                ys.append(p[1] + t * (q[1] - p[1]))
        if ys:
            yield x, min(ys), max(ys)


def _input_region(chain: MapChain, r_out: Fraction, scale: Fraction):
    """Closed region of Z^dim inputs needed for completeness in B(0, r_out).

    dim 1 and 2 propagate the exact preimage (interval / convex polygon);
    higher dimensions fall back to the bounding-box preimage, which is
    sound but wider.
    """
    n = chain.dim
    if n == 2:
        region = [(-r_out, -r_out), (-r_out, r_out), (r_out, r_out),
                  (r_out, -r_out)]
        for a in reversed(chain.matrices):
            inv = invert_matrix(a)
            region = _simplify_2d(
                _map_region_2d(inv, _mink_cube_2d(region, HALF))
            )
        return [(x * scale, y * scale) for x, y in _hull_2d(region)]
    if n == 1:
        lo, hi = -r_out, r_out
        for a in reversed(chain.matrices):
            inv = invert_matrix(a).entries[0][0]
            ends = sorted((inv * (lo - HALF), inv * (hi + HALF)))
            lo, hi = ends
        return (lo * scale, hi * scale)
    box = IntervalBox.closed((-r_out,) * n, (r_out,) * n)
    for a in reversed(chain.matrices):
        grown = IntervalBox.closed(
            [l - HALF for l in box.lo], [h + HALF for h in box.hi]
        )
        box = preimage_bounds(a, grown)
    return IntervalBox.closed([l * scale for l in box.lo],
                              [h * scale for h in box.hi])


def _region_int_points(region, n: int, budget: int) -> np.ndarray:
    rows: list[tuple[int, ...]] = []
    if n == 1:
        lo, hi = math.ceil(region[0]), math.floor(region[1])
        if hi - lo + 1 > budget:
            raise BudgetError("input grid for the chain exceeds the budget")
        rows = [(x,) for x in range(lo, hi + 1)]
    elif n == 2:
        total = 0
        for x, y_lo, y_hi in _column_bounds(region, budget):
            a, b = math.ceil(y_lo), math.floor(y_hi)
            total += max(0, b - a + 1)
            if total > budget:
                raise BudgetError("input grid for the chain exceeds the budget")
            rows.extend((x, y) for y in range(a, b + 1))
    else:
        spans = [range(math.ceil(l), math.floor(h) + 1)
                 for l, h in zip(region.lo, region.hi)]
        total = 1
        for span in spans:
            total *= max(0, len(span))
        if total > budget:
            raise BudgetError("input grid for the chain exceeds the budget")
        grid = [[]]
        for span in spans:
            grid = [g + [x] for g in grid for x in span]
        rows = [tuple(g) for g in grid]
    if not rows:
        return np.empty((0, n), dtype=np.int64)
    return np.array(rows, dtype=np.int64)


def _hat_int_array(a: RMatrix, pts: np.ndarray) -> np.ndarray:
    """Rounded images A*x over an integer point array, deduplicated.

    Runs vectorized on int64 when a worst-case bound rules out overflow,
    otherwise falls back to exact big-int arithmetic row by row.
    """
    if pts.shape[0] == 0:
        return pts
    q = math.lcm(*[e.denominator for row in a.entries for e in row])
    numer = [[int(e * q) for e in row] for row in a.entries]
    peak = int(np.abs(pts).max())
    worst = 2 * max(sum(abs(c) * peak for c in row) for row in numer) + q
    if pts.dtype == np.int64 and worst < (1 << 62):
        mat = np.array(numer, dtype=np.int64)
        num = pts @ mat.T
        rounded = -((-(2 * num - q)) // (2 * q))
        return np.unique(rounded, axis=0)
    images = {
        tuple(
            -((-(2 * sum(c * x for c, x in zip(row, p)) - q)) // (2 * q))
            for row in numer
        )
        for p in map(tuple, pts.tolist())
    }
    out = sorted(images)
    if max(abs(x) for p in out for x in p) < (1 << 62):
        return np.array(out, dtype=np.int64)
    return np.array(out, dtype=object)


def apply_chain(chain: MapChain, r_out, budget: int | None = None,
                input_scale=1) -> PointSet:
    """The chain applied to the full integer lattice, complete in B(0, r_out).

    input_scale enlarges the back-propagated input region about the origin;
    1 is already sound, larger values exist so soundness can be cross-checked.
    """
    r_out = rat(r_out)
    if r_out <= 0:
        raise ValueError("output radius must be positive")
    if budget is None:
        budget = enumeration_budget()
    region = _input_region(chain, r_out, rat(input_scale))
    pts = _region_int_points(region, chain.dim, budget)
    for a in chain.matrices:
        pts = _hat_int_array(a, pts)
    if pts.dtype == np.int64 and pts.shape[0]:
        # cheap superset screen; the exact strict test runs below
        pts = pts[(np.abs(pts) <= math.ceil(r_out)).all(axis=1)]
    points = []
    for row in pts.tolist():
        p = tuple(Fraction(int(x)) for x in row)
        if inf_norm(p) < r_out:
            points.append(p)
    return PointSet.build(chain.dim, points, (0,) * chain.dim, r_out)


# --- random chains (rotation * stretch * rotation) ---------------------------


def _cos_sin_turn(f: Fraction) -> tuple[Fraction, Fraction]:
    """Exact-series cosine and sine of (2*pi*f), f a fraction of a turn."""
    f = f - math.floor(f + HALF)
    x = 2 * _PI * f
    x2 = x * x
    cos_val, term, k = Fraction(1), Fraction(1), 0
    while abs(term) >= _SERIES_EPS:
        term = -term * x2 / ((2 * k + 1) * (2 * k + 2))
        cos_val += term
        k += 1
    sin_val, term, k = x, x, 0
    while abs(term) >= _SERIES_EPS:
        term = -term * x2 / ((2 * k + 2) * (2 * k + 3))
        sin_val += term
        k += 1
    return cos_val, sin_val


def _exp(t: Fraction) -> Fraction:
    total, term, k = Fraction(1), Fraction(1), 1
    while abs(term) >= _SERIES_EPS:
        term = term * t / k
        total += term
        k += 1
    return total


def _quantize(x: Fraction) -> Fraction:
    return Fraction(round(x * _QUANT), _QUANT)


def rotation_stretch_matrix(turn1: Fraction, stretch: Fraction,
                            turn2: Fraction) -> RMatrix:
    """R(turn1) * Diag(e^t, e^-t) * R(turn2), entries quantized to 2**-32."""
    c1, s1 = _cos_sin_turn(turn1)
    c2, s2 = _cos_sin_turn(turn2)
    d, dinv = _exp(stretch), _exp(-stretch)
    entries = [
        [c1 * d * c2 - s1 * dinv * s2, -c1 * d * s2 - s1 * dinv * c2],
        [s1 * d * c2 + c1 * dinv * s2, -s1 * d * s2 + c1 * dinv * c2],
    ]
    return RMatrix.from_rows([[_quantize(e) for e in row] for row in entries])


def sample_sl2_chain(rng: RngState, k: int) -> MapChain:
    """k random area-preserving maps, deterministic in the stream state.

    Determinants land within 10**-6 of 1; exact unit determinant is not
    possible after quantization and is not enforced.
    """
    if k < 1:
        raise ValueError("chain length must be at least 1")
    mats = []
    for _ in range(k):
        turn1 = rng.unit()
        turn2 = rng.unit()
        stretch = rng.unit() - HALF
        mats.append(rotation_stretch_matrix(turn1, stretch, turn2))
    return MapChain(2, tuple(mats))


# --- chain text format --------------------------------------------------------
#
# line 1: `chain <k> <n>`; then k blocks of n lines with n rationals each.


def dumps_chain(chain: MapChain) -> str:
    lines = [f"chain {len(chain.matrices)} {chain.dim}"]
    for a in chain.matrices:
        for row in a.entries:
            lines.append(" ".join(format_rational(e) for e in row))
    return "\n".join(lines) + "\n"


def loads_chain(text: str) -> MapChain:
    lines = split_lines(text, "chain file")
    if not lines:
        raise FormatError("empty chain file")
    head = lines[0].split(" ")
    if len(head) != 3 or head[0] != "chain":
        raise FormatError(f"bad chain header: {lines[0]!r}")
    k = parse_int(head[1], "chain length")
    n = parse_int(head[2], "chain dimension")
    if k < 1 or n < 1:
        raise FormatError("chain needs k >= 1 and n >= 1")
    if len(lines) != 1 + k * n:
        raise FormatError(f"expected {k * n} matrix rows, found {len(lines) - 1}")
    mats = []
    for b in range(k):
        rows = []
        for i in range(n):
            tokens = lines[1 + b * n + i].split(" ")
            if len(tokens) != n:
                raise FormatError(f"matrix row needs {n} entries")
            rows.append([parse_rational(t) for t in tokens])
        mats.append(RMatrix.from_rows(rows))
    try:
        return MapChain(n, tuple(mats))
    except Exception as exc:
        raise FormatError(f"chain content invalid: {exc}") from exc


def chain_model_witness(chain: MapChain, radius, budget: int | None = None,
                        scheme=None):
    """Compare the direct rounding pipeline against model-set enumeration.

    Both pipelines compute the chain image of the integer lattice inside
    B(0, radius); on agreement returns None, otherwise the lexicographically
    first differing point.  A scheme override exists so deliberately broken
    schemes can be probed.
    """
    from .cutproject import enumerate_model_set, iterated_scheme

    if scheme is None:
        scheme = iterated_scheme(chain.matrices)
    direct = apply_chain(chain, radius, budget)
    modeled = enumerate_model_set(scheme, (0,) * chain.dim, radius, budget)
    diff = set(direct.points) ^ set(modeled.patch.points)
    if not diff:
        return None
    return min(diff)


def write_chain(path_or_stream, chain: MapChain) -> None:
    text = dumps_chain(chain)
    if hasattr(path_or_stream, "write"):
        path_or_stream.write(text)
    else:
        with open(path_or_stream, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def read_chain(path_or_stream) -> MapChain:
    if hasattr(path_or_stream, "read"):
        return loads_chain(path_or_stream.read())
    with open(path_or_stream, "r", encoding="utf-8", newline="") as fh:
        return loads_chain(fh.read())
