"""Integer solutions of box-bounded exact linear systems.

Solves {c in Z^d : lo_r <= sum_j a_rj c_j <= hi_r for every row r} where all
coefficients and bounds are integers (callers scale rationals by a common
denominator and fold strict faces into the integer bounds beforehand).

The solver fixes variables one at a time, narrowing the ranges of the
remaining ones by exact interval propagation over the rows after each fix.
That keeps sheared systems (lattice bases far from diagonal) enumerable
without walking the full product of the global ranges.  The bulk arithmetic
runs vectorized on int64 when a precomputed worst-case bound shows no
intermediate value can overflow; otherwise a scalar big-int path is used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetError

_CHUNK = 1 << 19  # max prefixes materialized per batch
_INT64_SAFE = 1 << 61


@dataclass
class IntConstraints:
    coeffs: list[tuple[int, ...]]
    lo: list[int]
    hi: list[int]
    var_lo: list[int]
    var_hi: list[int]

    @property
    def dim(self) -> int:
        return len(self.var_lo)


class _BudgetMeter:
    def __init__(self, budget: int):
        self.budget = budget
        self.visited = 0

    def charge(self, count: int) -> None:
        self.visited += count
        if self.visited > self.budget:
            raise BudgetError(
                f"enumeration would visit more than {self.budget} candidate "
                "coefficient vectors (raise QUASIGRID_BUDGET to override)"
            )


def solve_integer_box(cons: IntConstraints, budget: int) -> list[tuple[int, ...]]:
    """All integer vectors satisfying every row, in no particular order."""
    d = cons.dim
    if any(lo > hi for lo, hi in zip(cons.var_lo, cons.var_hi)):
        return []
    order = _choose_order(cons)
    meter = _BudgetMeter(budget)
    if _fits_int64(cons):
        solutions = _solve_numpy(cons, order, meter)
    else:
        solutions = _solve_python(cons, order, meter)
    return solutions


def _choose_order(cons: IntConstraints) -> list[int]:
    """Fix variables in the order the propagation can pin them down.

    Greedy: repeatedly pick the variable whose post-fix range estimate is
    smallest, assuming already-ordered variables contribute nothing and the
    rest their global width.  The estimate mirrors the sweep's two powers,
    single-row narrowing and exact 2x2 pair elimination, so chained block
    systems get walked block by block instead of by raw range size.
    """
    d = cons.dim
    width = [hi - lo for lo, hi in zip(cons.var_lo, cons.var_hi)]
    span = [hi - lo for lo, hi in zip(cons.lo, cons.hi)]
    remaining = set(range(d))
    order: list[int] = []
    while remaining:
        pairs = _row_pairs(cons.coeffs,
                           [jj not in remaining for jj in range(d)])
        best = None
        for j in sorted(remaining):
            est = width[j]
            for r, row in enumerate(cons.coeffs):
                if row[j] == 0:
                    continue
                others = [jj for jj in remaining if jj != j and row[jj] != 0]
                slack = span[r] + sum(abs(row[jj]) * width[jj] for jj in others)
                est = min(est, slack // abs(row[j]))
            for r, s, u, v, det in pairs:
                if j == u:
                    est = min(est, (abs(cons.coeffs[s][v]) * span[r]
                                    + abs(cons.coeffs[r][v]) * span[s])
                              // abs(det))
                elif j == v:
                    est = min(est, (abs(cons.coeffs[r][u]) * span[s]
                                    + abs(cons.coeffs[s][u]) * span[r])
                              // abs(det))
            if best is None or est < best[0]:
                best = (est, j)
        order.append(best[1])
        remaining.remove(best[1])
    return order


def _fits_int64(cons: IntConstraints) -> bool:
    bound = 0
    for row, lo, hi in zip(cons.coeffs, cons.lo, cons.hi):
        row_bound = sum(
            abs(a) * max(abs(vl), abs(vh))
            for a, vl, vh in zip(row, cons.var_lo, cons.var_hi)
        )
        bound = max(bound, row_bound + abs(lo), row_bound + abs(hi))
    max_coeff = max(
        (abs(a) for row in cons.coeffs for a in row), default=1
    )
    # pair elimination multiplies residual intervals by single coefficients
    return bound * max(1, max_coeff) * 4 < _INT64_SAFE


def _row_pairs(coeffs, fixed_mask):
    """Pairs of rows whose unfixed support is the same two variables."""
    by_support: dict[tuple[int, int], list[int]] = {}
    for r, row in enumerate(coeffs):
        support = tuple(
            j for j, a in enumerate(row) if a != 0 and not fixed_mask[j]
        )
        if len(support) == 2:
            by_support.setdefault(support, []).append(r)
    pairs = []
    for support, rows in by_support.items():
        for r, s in zip(rows, rows[1:]):
            u, v = support
            det = coeffs[r][u] * coeffs[s][v] - coeffs[r][v] * coeffs[s][u]
            if det != 0:
                pairs.append((r, s, u, v, det))
    return pairs


# --- vectorized path --------------------------------------------------------


def _interval_scale(factor, lo, hi):
    if factor >= 0:
        return factor * lo, factor * hi
    return factor * hi, factor * lo


def _interval_div(num_lo, num_hi, det):
    if det > 0:
        return -((-num_lo) // det), num_hi // det
    return -((-num_hi) // det), num_lo // det


def _sweep_numpy(a, lo, hi, LO, HI, fixed_mask, pairs):
    """Two propagation passes; returns (LO, HI, alive mask).

    Each pass narrows every unfixed variable against every row, then solves
    row pairs with a shared two-variable support exactly; without the pair
    step, rotation-like 2x2 blocks never contract (interval dependency).
    """
    n_rows = a.shape[0]
    alive = np.ones(LO.shape[0], dtype=bool)
    for _ in range(2):
        for r in range(n_rows):
            arow = a[r]
            term_lo = np.minimum(arow * LO, arow * HI)
            term_hi = np.maximum(arow * LO, arow * HI)
            tot_lo = term_lo.sum(axis=1)
            tot_hi = term_hi.sum(axis=1)
            alive &= (tot_lo <= hi[r]) & (tot_hi >= lo[r])
            for j in range(a.shape[1]):
                if arow[j] == 0 or fixed_mask[j]:
                    continue
                other_lo = tot_lo - term_lo[:, j]
                other_hi = tot_hi - term_hi[:, j]
                num_lo = lo[r] - other_hi
                num_hi = hi[r] - other_lo
                new_lo, new_hi = _interval_div(num_lo, num_hi, int(arow[j]))
                np.maximum(LO[:, j], new_lo, out=LO[:, j])
                np.minimum(HI[:, j], new_hi, out=HI[:, j])
                alive &= LO[:, j] <= HI[:, j]
                # keep dead rows self-consistent so later passes stay valid
                np.minimum(LO[:, j], HI[:, j], out=LO[:, j])
        fixed_cols = np.flatnonzero(fixed_mask)
        for r, s, u, v, det in pairs:
            if fixed_cols.size:
                fr = (a[r, fixed_cols] * LO[:, fixed_cols]).sum(axis=1)
                fs = (a[s, fixed_cols] * LO[:, fixed_cols]).sum(axis=1)
            else:
                fr = fs = np.zeros(LO.shape[0], dtype=np.int64)
            ir = (lo[r] - fr, hi[r] - fr)
            is_ = (lo[s] - fs, hi[s] - fs)
            # Cramer: u = (a_sv*b_r - a_rv*b_s)/det, v symmetric
            for var, t1, t2 in (
                (u, _interval_scale(int(a[s, v]), *ir),
                 _interval_scale(-int(a[r, v]), *is_)),
                (v, _interval_scale(int(a[r, u]), *is_),
                 _interval_scale(-int(a[s, u]), *ir)),
            ):
                new_lo, new_hi = _interval_div(t1[0] + t2[0], t1[1] + t2[1],
                                               det)
                np.maximum(LO[:, var], new_lo, out=LO[:, var])
                np.minimum(HI[:, var], new_hi, out=HI[:, var])
                alive &= LO[:, var] <= HI[:, var]
                np.minimum(LO[:, var], HI[:, var], out=LO[:, var])
    return LO, HI, alive


def _solve_numpy(cons: IntConstraints, order, meter) -> list[tuple[int, ...]]:
    d = cons.dim
    a = np.array(cons.coeffs, dtype=np.int64)
    lo = np.array(cons.lo, dtype=np.int64)
    hi = np.array(cons.hi, dtype=np.int64)
    LO0 = np.array([cons.var_lo], dtype=np.int64)
    HI0 = np.array([cons.var_hi], dtype=np.int64)
    out: list[tuple[int, ...]] = []
    stack = [(0, LO0, HI0)]
    while stack:
        level, LO, HI = stack.pop()
        fixed_mask = np.zeros(d, dtype=bool)
        for j in order[:level]:
            fixed_mask[j] = True
        pairs = _row_pairs(cons.coeffs, fixed_mask)
        LO, HI, alive = _sweep_numpy(a, lo, hi, LO, HI, fixed_mask, pairs)
        LO, HI = LO[alive], HI[alive]
        if LO.shape[0] == 0:
            continue
        if level == d:
            out.extend(map(tuple, LO.tolist()))
            continue
        var = order[level]
        counts = HI[:, var] - LO[:, var] + 1
        approx = float(counts.sum(dtype=np.float64))
        if approx > 4 * meter.budget:
            raise BudgetError(
                f"enumeration would visit more than {meter.budget} candidate "
                "coefficient vectors (raise QUASIGRID_BUDGET to override)"
            )
        total = int(counts.sum())
        meter.charge(total)
        if total == 0:
            continue
        index = np.repeat(np.arange(LO.shape[0]), counts)
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        values = LO[index, var] + (np.arange(total) - starts[index])
        LO, HI = LO[index], HI[index]
        LO[:, var] = values
        HI[:, var] = values
        for begin in range(0, total, _CHUNK):
            end = min(begin + _CHUNK, total)
            stack.append((level + 1, LO[begin:end].copy(), HI[begin:end].copy()))
    return out


# --- scalar big-int path ----------------------------------------------------


def _solve_python(cons: IntConstraints, order, meter) -> list[tuple[int, ...]]:
    d = cons.dim
    rows = list(zip(cons.coeffs, cons.lo, cons.hi))
    out: list[tuple[int, ...]] = []

    def sweep(LO, HI, fixed):
        for _ in range(2):
            for row, rlo, rhi in rows:
                terms = [
                    (min(a * l, a * h), max(a * l, a * h))
                    for a, l, h in zip(row, LO, HI)
                ]
                tot_lo = sum(t[0] for t in terms)
                tot_hi = sum(t[1] for t in terms)
                if tot_lo > rhi or tot_hi < rlo:
                    return False
                for j in range(d):
                    a = row[j]
                    if a == 0 or fixed[j]:
                        continue
                    other_lo = tot_lo - terms[j][0]
                    other_hi = tot_hi - terms[j][1]
                    new_lo, new_hi = _interval_div(rlo - other_hi,
                                                   rhi - other_lo, a)
                    if new_lo > LO[j]:
                        LO[j] = new_lo
                    if new_hi < HI[j]:
                        HI[j] = new_hi
                    if LO[j] > HI[j]:
                        return False
            for r, s, u, v, det in _row_pairs(cons.coeffs, fixed):
                fr = sum(cons.coeffs[r][j] * LO[j] for j in range(d) if fixed[j])
                fs = sum(cons.coeffs[s][j] * LO[j] for j in range(d) if fixed[j])
                ir = (cons.lo[r] - fr, cons.hi[r] - fr)
                is_ = (cons.lo[s] - fs, cons.hi[s] - fs)
                for var, t1, t2 in (
                    (u, _interval_scale(cons.coeffs[s][v], *ir),
                     _interval_scale(-cons.coeffs[r][v], *is_)),
                    (v, _interval_scale(cons.coeffs[r][u], *is_),
                     _interval_scale(-cons.coeffs[s][u], *ir)),
                ):
                    new_lo, new_hi = _interval_div(t1[0] + t2[0],
                                                   t1[1] + t2[1], det)
                    if new_lo > LO[var]:
                        LO[var] = new_lo
                    if new_hi < HI[var]:
                        HI[var] = new_hi
                    if LO[var] > HI[var]:
                        return False
        return True

    def descend(level, LO, HI):
        LO, HI = list(LO), list(HI)
        fixed = [order.index(j) < level for j in range(d)]
        if not sweep(LO, HI, fixed):
            return
        if level == d:
            out.append(tuple(LO))
            return
        var = order[level]
        meter.charge(HI[var] - LO[var] + 1)
        for value in range(LO[var], HI[var] + 1):
            nLO, nHI = list(LO), list(HI)
            nLO[var] = nHI[var] = value
            descend(level + 1, nLO, nHI)

    descend(0, cons.var_lo, cons.var_hi)
    return out
