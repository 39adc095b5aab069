"""Compiled inner loops for contention and drop simulation.

Positions are relative to the window center, which is where the typical
user sits. Channel indices are 0-based here, -1 meaning "not transmitting".
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _torus_d2(xi, yi, xj, yj, width, height, torus):
    dx = abs(xi - xj)
    dy = abs(yi - yj)
    if torus:
        if dx > 0.5 * width:
            dx = width - dx
        if dy > 0.5 * height:
            dy = height - dy
    return dx * dx + dy * dy


@njit(cache=True)
def matern_assign(x, y, rat, mark, choice, radius, m, width, height, torus):
    """Sequential CSMA in increasing mark order; returns the channel per point.

    Point i sees a channel as busy if an earlier-mark point within
    radius[rat[i]] already holds it. Neighbor search uses a uniform grid
    with cell size max(radius).
    """
    n = x.shape[0]
    ch = np.full(n, -1, np.int64)
    if n == 0:
        return ch
    cell = radius.max()
    nx = max(1, int(width // cell))
    ny = max(1, int(height // cell))
    cw = width / nx
    chh = height / ny
    cx = np.empty(n, np.int64)
    cy = np.empty(n, np.int64)
    counts = np.zeros(nx * ny + 1, np.int64)
    for i in range(n):
        a = int((x[i] + 0.5 * width) / cw)
        b = int((y[i] + 0.5 * height) / chh)
        a = min(max(a, 0), nx - 1)
        b = min(max(b, 0), ny - 1)
        cx[i] = a
        cy[i] = b
        counts[a * ny + b + 1] += 1
    start = np.cumsum(counts)
    fill = start[:-1].copy()
    items = np.empty(n, np.int64)
    for i in range(n):
        c = cx[i] * ny + cy[i]
        items[fill[c]] = i
        fill[c] += 1

    # neighbor column/row offsets; scan everything when the grid is too small
    # to have three distinct neighbors per axis
    if nx < 3:
        offx = np.arange(nx)
    else:
        offx = np.array([-1, 0, 1])
    if ny < 3:
        offy = np.arange(ny)
    else:
        offy = np.array([-1, 0, 1])

    done = np.zeros(n, np.bool_)
    busy = np.zeros(m, np.bool_)
    order = np.argsort(mark)
    for i in order:
        r2 = radius[rat[i]] ** 2
        busy[:] = False
        for ox in offx:
            a = ox if nx < 3 else cx[i] + ox
            if a < 0 or a >= nx:
                if not torus:
                    continue
                a %= nx
            for oy in offy:
                b = oy if ny < 3 else cy[i] + oy
                if b < 0 or b >= ny:
                    if not torus:
                        continue
                    b %= ny
                c = a * ny + b
                for p in range(start[c], start[c + 1]):
                    j = items[p]
                    if done[j] and ch[j] >= 0:
                        if _torus_d2(x[i], y[i], x[j], y[j], width, height, torus) <= r2:
                            busy[ch[j]] = True
        free = 0
        for c in range(m):
            if not busy[c]:
                free += 1
        if free > 0:
            pick = min(int(choice[i] * free), free - 1)
            for c in range(m):
                if not busy[c]:
                    if pick == 0:
                        ch[i] = c
                        break
                    pick -= 1
        done[i] = True
    return ch


@njit(cache=True)
def simulate_chunk(
    rng, n_drops, width, height, dom_mean, keep, eta, power, radius,
    channels, matern, alpha, torus, out_dist, out_sig, out_int,
):
    """Simulate ``n_drops`` drops for K scenarios sharing one dominating PPP.

    Per drop, RAT r gets Poisson(dom_mean[r]) candidate APs; scenario k keeps
    each with probability keep[k, r], so every scenario sees an exact PPP and
    all scenarios share their randomness. Per point the draws are, in order:
    x, y, keep mark, transmit mark, channel mark, interference gain, and (if
    any scenario uses Matern contention) the contention mark and channel
    choice. The serving-link gains H come last, one per RAT. ``matern[k]``
    selects sequential CSMA for scenario k, otherwise APs are thinned
    independently with probability eta[k, r].

    Writes serving distance (inf if none), signal power and interference
    power into ``out_*[k, drop, r]``.
    """
    n_rats = dom_mean.shape[0]
    n_cfg = keep.shape[0]
    half = alpha / 2.0
    draw_marks = matern.any()
    for d in range(n_drops):
        counts = np.empty(n_rats, np.int64)
        for r in range(n_rats):
            counts[r] = rng.poisson(dom_mean[r])
        n = counts.sum()
        x = np.empty(n)
        y = np.empty(n)
        rat = np.empty(n, np.int64)
        v = np.empty(n)
        utx = np.empty(n)
        uch = np.empty(n)
        g = np.empty(n)
        mark = np.empty(n)
        choice = np.empty(n)
        i = 0
        for r in range(n_rats):
            for _ in range(counts[r]):
                x[i] = (rng.random() - 0.5) * width
                y[i] = (rng.random() - 0.5) * height
                rat[i] = r
                v[i] = rng.random()
                utx[i] = rng.random()
                uch[i] = rng.random()
                g[i] = rng.standard_exponential()
                if draw_marks:
                    mark[i] = rng.random()
                    choice[i] = rng.random()
                i += 1
        h = np.empty(n_rats)
        for r in range(n_rats):
            h[r] = rng.standard_exponential()

        d2 = x * x + y * y
        gain = np.empty(n)
        for i in range(n):
            gain[i] = d2[i] ** -half if d2[i] > 0 else np.inf

        ch = np.empty(n, np.int64)
        for k in range(n_cfg):
            m = channels[k]
            if matern[k]:
                kept = np.empty(n, np.int64)
                nk = 0
                for i in range(n):
                    if v[i] < keep[k, rat[i]]:
                        kept[nk] = i
                        nk += 1
                kept = kept[:nk]
                sub = matern_assign(
                    x[kept], y[kept], rat[kept], mark[kept], choice[kept],
                    radius[k], m, width, height, torus,
                )
                ch[:] = -1
                for p in range(nk):
                    ch[kept[p]] = sub[p]
            else:
                for i in range(n):
                    if v[i] < keep[k, rat[i]] and utx[i] < eta[k, rat[i]]:
                        ch[i] = min(int(uch[i] * m), m - 1)
                    else:
                        ch[i] = -1

            best = np.full(n_rats, -1, np.int64)
            bestd = np.full(n_rats, np.inf)
            for i in range(n):
                if ch[i] >= 0 and d2[i] < bestd[rat[i]]:
                    bestd[rat[i]] = d2[i]
                    best[rat[i]] = i
            for r in range(n_rats):
                s = best[r]
                if s < 0:
                    out_dist[k, d, r] = np.inf
                    out_sig[k, d, r] = 0.0
                    out_int[k, d, r] = 0.0
                    continue
                c = ch[s]
                tot = 0.0
                for i in range(n):
                    if ch[i] == c and i != s:
                        tot += power[k, rat[i]] * g[i] * gain[i]
                out_dist[k, d, r] = np.sqrt(bestd[r])
                out_sig[k, d, r] = power[k, r] * h[r] * gain[s]
                out_int[k, d, r] = tot
