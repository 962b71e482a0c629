"""Hot loops over the m-adic tree.

Each kernel has a loop version (numba-compiled when available) and a
vectorized numpy version producing bit-identical output. The module-level
names pick one according to ``maxbell._accel.USE_NUMBA``.

Node sums for a level are stored flat: level ``k`` occupies
``sums[level_offset(m, k) : level_offset(m, k + 1)]``.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, jit


def level_offset(m, k):
    return (m**k - 1) // (m - 1)


def total_nodes(m, d):
    return level_offset(m, d + 1)


# ---------------------------------------------------------------- node sums
#
# Children are accumulated left to right in double-double (TwoSum). The
# residual of each node is exact unless one of the additions folding
# residuals together rounded; kernels report that per node. Where the
# residual is exact, ``hi = fl(hi + lo)`` is the correctly rounded sum. Where
# it is not and ``lo`` sits within a hair of half an ulp, ``node_sums``
# re-sums the node with ``math.fsum``. Every stored sum is thus the correctly
# rounded sum of its leaves, and averages of equal leaf multisets are
# bit-identical regardless of leaf order.


@jit
def _node_sums_loops(values, m, d):
    n_total = (m ** (d + 1) - 1) // (m - 1)
    out = np.empty(n_total, dtype=np.float64)
    res = np.zeros(n_total, dtype=np.float64)
    rough = np.zeros(n_total, dtype=np.bool_)
    off = (m**d - 1) // (m - 1)
    out[off:] = values
    for k in range(d - 1, -1, -1):
        coff = off
        off = (m**k - 1) // (m - 1)
        for j in range(m**k):
            base = coff + j * m
            s = out[base]
            e = res[base]
            inexact = rough[base]
            for c in range(1, m):
                b = out[base + c]
                t = s + b
                bp = t - s
                err = (s - (t - bp)) + (b - bp)
                s = t
                a = res[base + c]
                x = err + a
                xp = x - err
                r1 = (err - (x - xp)) + (a - xp)
                y = e + x
                yp = y - e
                r2 = (e - (y - yp)) + (x - yp)
                e = y
                inexact = inexact | (r1 != 0.0) | (r2 != 0.0) | rough[base + c]
            t = s + e
            out[off + j] = t
            res[off + j] = e - (t - s)
            rough[off + j] = inexact
    return out, res, rough


def _two_sum_err(a, b):
    x = a + b
    bp = x - a
    return x, (a - (x - bp)) + (b - bp)


def _node_sums_numpy(values, m, d):
    out = np.empty(total_nodes(m, d), dtype=np.float64)
    res = np.zeros(total_nodes(m, d), dtype=np.float64)
    rough = np.zeros(total_nodes(m, d), dtype=bool)
    hi = np.array(values, dtype=np.float64, copy=True)
    lo = np.zeros_like(hi)
    fl = np.zeros(hi.size, dtype=bool)
    off = level_offset(m, d)
    out[off : off + hi.size] = hi
    for k in range(d - 1, -1, -1):
        H = hi.reshape(-1, m)
        L = lo.reshape(-1, m)
        Fl = fl.reshape(-1, m)
        s = H[:, 0].copy()
        e = L[:, 0].copy()
        inexact = Fl[:, 0].copy()
        for c in range(1, m):
            s, err = _two_sum_err(s, H[:, c])
            x, r1 = _two_sum_err(err, L[:, c])
            e, r2 = _two_sum_err(e, x)
            inexact |= (r1 != 0) | (r2 != 0) | Fl[:, c]
        t = s + e
        e = e - (t - s)
        hi, lo, fl = t, e, inexact
        off = level_offset(m, k)
        out[off : off + hi.size] = hi
        res[off : off + hi.size] = lo
        rough[off : off + hi.size] = fl
    return out, res, rough


TIE_MARGIN = 2.0**-20


def _exact_fixup(values, m, d, hi, lo, rough):
    """Re-sum with ``math.fsum`` the nodes whose rounding the residual error
    could have flipped."""
    up = np.spacing(hi)
    down = hi - np.nextafter(hi, -np.inf)
    near = (np.abs(lo - 0.5 * up) <= TIE_MARGIN * up) | (np.abs(lo + 0.5 * down) <= TIE_MARGIN * up)
    near &= rough & (hi != 0)
    idx = np.nonzero(near)[0]
    if idx.size:
        offsets = np.array([level_offset(m, k) for k in range(d + 1)])
        for i in idx:
            k = int(np.searchsorted(offsets, i, side="right") - 1)
            w = m ** (d - k)
            a = (int(i) - int(offsets[k])) * w
            hi[i] = math.fsum(values[a : a + w].tolist())
    return hi


# ----------------------------------------------------------- maximal pass


@jit
def _maximal_pass_loops(avgs, m, d):
    best = np.empty(1, dtype=np.float64)
    lvl = np.zeros(1, dtype=np.int64)
    best[0] = avgs[0]
    for k in range(1, d + 1):
        n = m**k
        off = (m**k - 1) // (m - 1)
        nb = np.empty(n, dtype=np.float64)
        nl = np.empty(n, dtype=np.int64)
        for j in range(n):
            a = avgs[off + j]
            b = best[j // m]
            if a > b:
                nb[j] = a
                nl[j] = k
            else:
                nb[j] = b
                nl[j] = lvl[j // m]
        best = nb
        lvl = nl
    return best, lvl


def _maximal_pass_numpy(avgs, m, d):
    best = avgs[0:1].copy()
    lvl = np.zeros(1, dtype=np.int64)
    for k in range(1, d + 1):
        off = level_offset(m, k)
        a = avgs[off : off + m**k]
        b = np.repeat(best, m)
        up = a > b
        best = np.where(up, a, b)
        lvl = np.where(up, k, np.repeat(lvl, m))
    return best, lvl


# ----------------------------------------------------------- spine order
#
# Assigns ranks (0 = largest value) to leaves. A work item is a cell holding
# a sorted rank set and a count ``nb`` of its lowest ranks that form the
# cell's own band. The remaining "top" ranks are thinned evenly into pure
# child cells (each a scaled copy of the top part), the leftover top ranks
# share one mixed child with the highest band ranks, and the rest of the band
# fills the remaining children in sorted order.


@jit
def _fresh_band(size, band):
    return np.int64(np.floor(band * size + 0.5))


@jit
def _spine_order_loops(m, d, band):
    n = m**d
    order = np.empty(n, dtype=np.int64)
    starts = [np.int64(0)]
    rank_sets = [np.arange(n, dtype=np.int64)]
    bands = [_fresh_band(n, band)]
    while len(starts) > 0:
        start = starts.pop()
        ranks = rank_sets.pop()
        nb = bands.pop()
        size = ranks.shape[0]
        if size == 1:
            order[start] = ranks[0]
            continue
        if nb >= size:
            order[start : start + size] = ranks
            continue
        h = size // m
        if nb == 0:
            for c in range(m):
                child = ranks[c::m].copy()
                starts.append(start + c * h)
                rank_sets.append(child)
                bands.append(_fresh_band(h, band))
            continue
        ntop = size - nb
        kp = ntop // h
        nsel = kp * h
        sel = np.empty(nsel, dtype=np.int64)
        rest = np.empty(ntop - nsel, dtype=np.int64)
        taken = np.zeros(ntop, dtype=np.bool_)
        for j in range(nsel):
            taken[((2 * j + 1) * ntop) // (2 * nsel)] = True
        a = 0
        r = 0
        for i in range(ntop):
            if taken[i]:
                sel[a] = ranks[i]
                a += 1
            else:
                rest[r] = ranks[i]
                r += 1
        pos = start
        for c in range(kp):
            starts.append(pos)
            rank_sets.append(sel[c::kp].copy())
            bands.append(_fresh_band(h, band))
            pos += h
        used = 0
        left = ntop - nsel
        if left > 0:
            fill = h - left
            mixed = np.empty(h, dtype=np.int64)
            mixed[:left] = rest
            mixed[left:] = ranks[ntop : ntop + fill]
            starts.append(pos)
            rank_sets.append(mixed)
            bands.append(np.int64(fill))
            pos += h
            used = fill
        order[pos : start + size] = ranks[ntop + used :]
    return order


def _spine_order_numpy(m, d, band):
    n = m**d
    order = np.empty(n, dtype=np.int64)

    def fresh(size):
        return int(np.floor(band * size + 0.5))

    stack = [(0, np.arange(n, dtype=np.int64), fresh(n))]
    while stack:
        start, ranks, nb = stack.pop()
        size = ranks.shape[0]
        if size == 1:
            order[start] = ranks[0]
            continue
        if nb >= size:
            order[start : start + size] = ranks
            continue
        h = size // m
        if nb == 0:
            for c in range(m):
                stack.append((start + c * h, ranks[c::m].copy(), fresh(h)))
            continue
        ntop = size - nb
        kp = ntop // h
        nsel = kp * h
        taken = np.zeros(ntop, dtype=bool)
        taken[((2 * np.arange(nsel) + 1) * ntop) // (2 * nsel)] = True
        top = ranks[:ntop]
        sel, rest = top[taken], top[~taken]
        pos = start
        for c in range(kp):
            stack.append((pos, sel[c::kp].copy(), fresh(h)))
            pos += h
        used = 0
        left = ntop - nsel
        if left > 0:
            fill = h - left
            stack.append((pos, np.concatenate([rest, ranks[ntop : ntop + fill]]), fill))
            pos += h
            used = fill
        order[pos : start + size] = ranks[ntop + used :]
    return order


_node_sums_impl = _node_sums_loops if USE_NUMBA else _node_sums_numpy


def node_sums(values, m, d):
    """Correctly rounded leaf sums of every node, levels stored flat."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    hi, lo, rough = _node_sums_impl(values, m, d)
    return _exact_fixup(values, m, d, hi, lo, rough)


if USE_NUMBA:
    maximal_pass = _maximal_pass_loops
    spine_order = _spine_order_loops
else:
    maximal_pass = _maximal_pass_numpy
    spine_order = _spine_order_numpy
