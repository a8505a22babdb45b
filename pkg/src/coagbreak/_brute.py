"""Triple-loop reference for the collision operators (numba-compiled).

For every output cell ``k`` and every ordered pair ``(i, j)`` the share of
the pair's products that lands on pivot ``k`` is computed from scratch.
Nothing is precomputed or reordered; kernel formulas are restated here
rather than imported so the oracle shares no code with the fast path.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def _phi(z, z1, c, a, b):
    return c * (z**a * z1**b + z**b * z1**a)


@njit(cache=True)
def _coalescence(z, z1, kind, value):
    if kind == 1:
        p = z * z1
        return p / (1.0 + p)
    if kind == 2:
        return 1.0
    return value


@njit(cache=True)
def _coag_share(k, v, x):
    last = x.size - 1
    if v >= x[last]:
        if k == last:
            return v / x[last]
        return 0.0
    share = 0.0
    if k < last and x[k] <= v and v < x[k + 1]:
        share += (x[k + 1] - v) / (x[k + 1] - x[k])
    if k > 0 and x[k - 1] <= v and v < x[k]:
        share += (v - x[k - 1]) / (x[k] - x[k - 1])
    return share


@njit(cache=True)
def _fragment_share(k, m, s, x, e, theta):
    """Fragments of one breakage event (total volume s) in cell m landing on pivot k."""
    last = x.size - 1
    if e[m] >= s:
        return 0.0
    top = min(e[m + 1], s)
    p1 = theta + 1.0
    p2 = theta + 2.0
    d_num = p2 / p1 * ((top / s) ** p1 - (e[m] / s) ** p1)
    d_mass = (top**p2 - e[m] ** p2) / s**p1
    if d_num <= 0.0:
        return 0.0
    mean = d_mass / d_num
    if mean >= x[m]:
        lo = m
        hi = m + 1
    else:
        lo = m - 1
        hi = m
    if lo < 0 or hi > last:
        if k == m:
            return d_mass / x[m]
        return 0.0
    a = (x[hi] - mean) / (x[hi] - x[lo])
    if k == lo:
        return d_num * a
    if k == hi:
        return d_num * (1.0 - a)
    return 0.0


@njit(cache=True)
def brute_force_parts(e, x, w, g, c, a, b, eff_kind, eff_value, theta, n):
    size = x.size
    gain_coag = np.zeros(size)
    gain_break = np.zeros(size)
    loss = np.zeros(size)
    flux = 0.0
    for k in range(size):
        coag = 0.0
        brk = 0.0
        for i in range(size):
            for j in range(size):
                s = x[i] + x[j]
                if s >= n:
                    continue
                rate = _phi(x[i], x[j], c, a, b) * g[i] * w[i] * g[j] * w[j]
                if rate == 0.0:
                    continue
                e_coal = _coalescence(x[i], x[j], eff_kind, eff_value)
                e_break = 1.0 - e_coal
                coag += 0.5 * e_coal * rate * _coag_share(k, s, x)
                frag = 0.0
                for m in range(max(k - 1, 0), min(k + 2, size)):
                    frag += _fragment_share(k, m, s, x, e, theta)
                if k == 0:
                    frag += e[0] ** (theta + 2.0) / s ** (theta + 1.0) / x[0]
                brk += 0.5 * e_break * rate * frag
        gain_coag[k] = coag / w[k]
        gain_break[k] = brk / w[k]
        total = 0.0
        for j in range(size):
            total += _phi(x[k], x[j], c, a, b) * g[j] * w[j]
        loss[k] = g[k] * total
    for i in range(size):
        for j in range(size):
            if x[i] + x[j] >= n:
                flux += x[i] * _phi(x[i], x[j], c, a, b) * g[i] * w[i] * g[j] * w[j]
    return gain_coag, loss, gain_break, flux
