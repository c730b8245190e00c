"""Compiled inner loops shared by the CTRW and limit samplers.

Every routine draws from a ``numpy.random.Generator`` passed in by the
caller, so the Python-level reference routes (which build full paths) and
the fast block samplers consume identical random streams and agree bitwise.

Model parameters travel as a flat float array; see ``ModelSpec.kernel_args``.
"""

import math

import numpy as np
from numba import njit

# model kinds
UNC_GAUSS = 0
UNC_STABLE = 1
LEVY_WALK = 2
GAUSS_COUPLED = 3
DRIFTED = 4
PURE_DRIFT = 5

# slots of the parameter array
BETA = 0
ALPHA = 1
GAMMA = 2
SIGMA2 = 3
WEIGHT = 4
SYMMETRIC = 5
WAIT_STABLE = 6
C_J = 7
C_W = 8
J_EXP = 9
W_EXP = 10
HAS_CONT = 11
HAS_JUMP = 12
LATTICE = 13
N_PARAMS = 14

_OPTS = dict(cache=True, nogil=True)
_INLINE = dict(cache=True, nogil=True, inline="always")


@njit(**_INLINE)
def positive_stable(rng, beta, scale):
    """One draw with Laplace transform exp(-scale * s**beta)."""
    if beta == 0.5:
        # Levy law: 1/Z**2 has transform exp(-sqrt(2 s))
        z = 0.0
        while z == 0.0:
            z = rng.standard_normal()
        return scale * scale / (2.0 * z * z)
    # Kanter's representation,
    #   S = sin(beta U) / sin(U)**(1/beta) * (sin((1-beta) U) / E)**((1-beta)/beta),
    # with the two powers combined in one exp so beta near 0 or 1 stays finite
    u = 0.0
    while u == 0.0:
        u = math.pi * rng.random()
    e = rng.standard_exponential()
    one_m = 1.0 - beta
    z = (one_m / beta) * math.log(math.sin(one_m * u) / e) - math.log(math.sin(u)) / beta
    return scale ** (1.0 / beta) * math.sin(beta * u) * math.exp(z)


@njit(**_INLINE)
def symmetric_stable(rng, alpha, scale):
    """One draw with characteristic function exp(-scale * |k|**alpha)."""
    if alpha == 2.0:
        return math.sqrt(2.0 * scale) * rng.standard_normal()
    v = math.pi * (rng.random() - 0.5)
    e = rng.standard_exponential()
    if alpha == 1.0:
        return scale * math.tan(v)
    x = math.sin(alpha * v) / math.cos(v) ** (1.0 / alpha) \
        * (math.cos((1.0 - alpha) * v) / e) ** ((1.0 - alpha) / alpha)
    return scale ** (1.0 / alpha) * x


@njit(**_INLINE)
def pareto(rng, beta):
    """Pareto draw with P(W > w) = w**-beta for w >= 1."""
    return (1.0 - rng.random()) ** (-1.0 / beta)


@njit(**_OPTS)
def positive_stable_many(rng, beta, scale, size):
    out = np.empty(size)
    for i in range(size):
        out[i] = positive_stable(rng, beta, scale)
    return out


@njit(**_OPTS)
def symmetric_stable_many(rng, alpha, scale, size):
    out = np.empty(size)
    for i in range(size):
        out[i] = symmetric_stable(rng, alpha, scale)
    return out


# ---------------------------------------------------------------- CTRW steps

@njit(**_INLINE)
def raw_pair(rng, kind, wstable, sym, P, d, jout, lattice=False):
    """Unscaled (J, W); J is written into ``jout`` and W is returned."""
    if kind == PURE_DRIFT:
        w = P[GAMMA]
    elif wstable:
        w = positive_stable(rng, P[BETA], 1.0)
    else:
        w = pareto(rng, P[BETA])

    if kind == UNC_STABLE:
        for i in range(d):
            jout[i] = symmetric_stable(rng, P[ALPHA], 1.0)
    elif kind == LEVY_WALK:
        sign = 1.0
        if sym and rng.random() < 0.5:
            sign = -1.0
        jout[0] = sign * w
    elif kind == GAUSS_COUPLED:
        sd = math.sqrt(w)
        for i in range(d):
            jout[i] = sd * rng.standard_normal()
    elif lattice:
        sd = math.sqrt(P[SIGMA2])
        for i in range(d):
            jout[i] = sd if rng.random() < 0.5 else -sd
    else:
        sd = math.sqrt(P[SIGMA2])
        for i in range(d):
            jout[i] = sd * rng.standard_normal()
    return w


@njit(**_OPTS)
def raw_pairs(rng, kind, wstable, sym, P, d, lattice, size):
    """``size`` raw pairs in the order ``raw_pair`` would draw them."""
    J = np.empty((size, d))
    W = np.empty(size)
    j = np.empty(d)
    for i in range(size):
        W[i] = raw_pair(rng, kind, wstable, sym, P, d, j, lattice)
        for m in range(d):
            J[i, m] = j[m]
    return J, W


@njit(**_INLINE)
def row_factors(P, n):
    """Jump and wait scale factors of row ``n``."""
    return P[C_J] * n ** (-P[J_EXP]), P[C_W] * n ** (-P[W_EXP])


@njit(**_INLINE)
def scale_pair(kind, P, b, d, n, fj, fw, jout, w):
    """Rescale a raw pair in place to row ``n`` of the triangular array."""
    for i in range(d):
        jout[i] = fj * jout[i] + b[i] / n
    if kind == PURE_DRIFT:
        return w / n
    wn = fw * w
    if kind == DRIFTED:
        wn = P[GAMMA] / n + wn
    return wn


def _make_ctrw_row(KIND, DIM, WSTABLE, SYM, LAT):
    @njit(**_OPTS)
    def ctrw_row(rng, P, b, n, horizon, max_steps):
        """Scaled steps until the cumulative wait exceeds ``horizon``.

        Returns (jumps, waits, ok); ``ok`` is False when the budget ran out.
        """
        kind = KIND
        d = DIM
        wstable = WSTABLE
        sym = SYM
        lattice = LAT
        fj, fw = row_factors(P, n)
        cap = 256
        jumps = np.empty((cap, d))
        waits = np.empty(cap)
        jt = np.empty(d)
        clock = 0.0
        k = 0
        while True:
            if k >= max_steps:
                return jumps[:k], waits[:k], False
            w = raw_pair(rng, kind, wstable, sym, P, d, jt, lattice)
            wn = scale_pair(kind, P, b, d, n, fj, fw, jt, w)
            if k == cap:
                cap *= 2
                nj = np.empty((cap, d))
                nj[:k] = jumps[:k]
                nw = np.empty(cap)
                nw[:k] = waits[:k]
                jumps = nj
                waits = nw
            jumps[k, :] = jt
            waits[k] = wn
            k += 1
            clock += wn
            if clock > horizon:
                return jumps[:k], waits[:k], True

    return ctrw_row


def _make_ctrw_state_block(KIND, DIM, WSTABLE, SYM, LAT):
    @njit(**_OPTS)
    def ctrw_state_block(rng, P, b, n, t, count, max_steps, X, G, Y, D, N):
        """(X, G, Y, D) at time t for ``count`` independent CTRWs.

        Returns -1 on success, else the replica index that hit the budget.
        """
        kind = KIND
        d = DIM
        wstable = WSTABLE
        sym = SYM
        lattice = LAT
        fj, fw = row_factors(P, n)
        jt = np.empty(d)
        pos = np.empty(d)
        for i in range(count):
            pos[:] = 0.0
            clock = 0.0
            k = 0
            while True:
                if k >= max_steps:
                    return i
                w = raw_pair(rng, kind, wstable, sym, P, d, jt, lattice)
                wn = scale_pair(kind, P, b, d, n, fj, fw, jt, w)
                if clock + wn > t:
                    for j in range(d):
                        X[i, j] = pos[j]
                        Y[i, j] = pos[j] + jt[j]
                    G[i] = clock
                    D[i] = clock + wn
                    N[i] = k
                    break
                for j in range(d):
                    pos[j] += jt[j]
                clock += wn
                k += 1
        return -1

    return ctrw_state_block


# ---------------------------------------------------------- limit skeleton

@njit(**_INLINE)
def clock_jump(rng, kind, sym, P, d, du, jb):
    """Pure-jump clock increment over one cell, plus the position jump tied to it."""
    beta = P[BETA]
    if kind == LEVY_WALK:
        if sym:
            sp = positive_stable(rng, beta, 0.5 * du)
            sm = positive_stable(rng, beta, 0.5 * du)
            jb[0] = sp - sm
            return sp + sm
        js = positive_stable(rng, beta, du)
        jb[0] = js
        return js
    if kind == GAUSS_COUPLED:
        js = positive_stable(rng, beta, du)
        sd = math.sqrt(js)
        for i in range(d):
            jb[i] = sd * rng.standard_normal()
        return js
    for i in range(d):
        jb[i] = 0.0
    if kind == UNC_GAUSS or kind == UNC_STABLE:
        return positive_stable(rng, beta, du)
    if kind == DRIFTED and P[WEIGHT] > 0.0:
        return positive_stable(rng, beta, P[WEIGHT] * du)
    return 0.0


@njit(**_INLINE)
def cont_position(rng, kind, P, b, d, h, out):
    """Position increment over operational time h that is independent of the clock."""
    if kind == UNC_STABLE:
        for i in range(d):
            out[i] = b[i] * h + symmetric_stable(rng, P[ALPHA], h)
    elif (kind == UNC_GAUSS or kind == DRIFTED or kind == PURE_DRIFT) and P[SIGMA2] > 0.0:
        sd = math.sqrt(P[SIGMA2] * h)
        for i in range(d):
            out[i] = b[i] * h + sd * rng.standard_normal()
    else:
        for i in range(d):
            out[i] = b[i] * h


@njit(**_OPTS)
def resolve_crossing(rng, kind, P, b, d, t, du, k, jsum, pos, js, jb, pre, post, x, y):
    """Locate the passage over t inside the crossing cell.

    Within a cell the clock drift runs linearly and the lumped clock jump
    sits at a uniform position ``theta_j``. Returns
    (g, dnext, theta_j, theta_s, case) where case 0/2 is a passage by drift
    before/after the jump (g = dnext = t) and case 1 a passage by the jump.
    """
    gamma = P[GAMMA]
    s0 = gamma * (k * du) + jsum
    has_jump = P[HAS_JUMP] != 0.0
    theta_j = 1.0
    if has_jump and (gamma > 0.0 or P[HAS_CONT] != 0.0):
        theta_j = rng.random()
    if gamma > 0.0:
        ramp = gamma * theta_j * du
        if (not has_jump) or s0 + ramp > t:
            theta_s = (t - s0) / (gamma * du)
            case = 0
        elif s0 + ramp + js > t:
            theta_s = theta_j
            case = 1
        else:
            theta_s = (t - s0 - js) / (gamma * du)
            case = 2
    else:
        theta_s = theta_j
        case = 1
    theta_s = min(max(theta_s, 0.0), 1.0)
    cont_position(rng, kind, P, b, d, theta_s * du, pre)
    cont_position(rng, kind, P, b, d, (1.0 - theta_s) * du, post)
    if case == 1:
        g = s0 + gamma * theta_j * du
        dnext = g + js
        for i in range(d):
            x[i] = pos[i] + pre[i]
            y[i] = x[i] + jb[i]
    else:
        g = t
        dnext = t
        for i in range(d):
            x[i] = pos[i] + pre[i]
            if case == 2:
                x[i] += jb[i]
            y[i] = x[i]
    return g, dnext, theta_j, theta_s, case


def _make_skeleton_cells(KIND, DIM, WSTABLE, SYM, LAT):
    @njit(**_OPTS)
    def skeleton_cells(rng, P, b, t, du, max_cells):
        """Record every cell of the skeleton up to and including the crossing cell.

        Returns (js, inc, crossing, jb, pre, ok) with ``inc`` the per-cell
        position increments, ``crossing`` = (g, dnext, theta_j, theta_s, case, k)
        and ``jb``/``pre`` the crossing cell's jump and pre-passage position parts.
        """
        kind = KIND
        d = DIM
        wstable = WSTABLE
        sym = SYM
        lattice = LAT
        cap = 1024
        js_arr = np.empty(cap)
        inc = np.empty((cap, d))
        jb = np.empty(d)
        cb = np.empty(d)
        pos = np.zeros(d)
        pre = np.zeros(d)
        post = np.zeros(d)
        x = np.zeros(d)
        y = np.zeros(d)
        gamma = P[GAMMA]
        jsum = 0.0
        k = 0
        while True:
            if k >= max_cells:
                return js_arr[:k], inc[:k], (0.0, 0.0, 0.0, 0.0, -1, k), jb, pre, False
            if k == cap:
                cap *= 2
                nj = np.empty(cap)
                nj[:k] = js_arr[:k]
                ni = np.empty((cap, d))
                ni[:k] = inc[:k]
                js_arr = nj
                inc = ni
            js = clock_jump(rng, kind, sym, P, d, du, jb)
            js_arr[k] = js
            if gamma * ((k + 1) * du) + (jsum + js) > t:
                g, dn, tj, ts, case = resolve_crossing(
                    rng, kind, P, b, d, t, du, k, jsum, pos, js, jb, pre, post, x, y)
                for i in range(d):
                    inc[k, i] = jb[i] + pre[i] + post[i]
                return js_arr[:k + 1], inc[:k + 1], (g, dn, tj, ts, case, k), jb, pre, True
            cont_position(rng, kind, P, b, d, du, cb)
            for i in range(d):
                inc[k, i] = jb[i] + cb[i]
                pos[i] = pos[i] + inc[k, i]
            jsum = jsum + js
            k += 1

    return skeleton_cells


def _make_limit_block(KIND, DIM, WSTABLE, SYM, LAT):
    @njit(**_OPTS)
    def limit_block(rng, P, b, t, du, count, max_cells, X, A, Y, R, ONM):
        """Joint draws (x, a, y, r, on_M) for ``count`` skeletons, without storing paths.

        Consumes the stream exactly as ``skeleton_cells`` does. Returns -1 on
        success, else the replica index that exhausted the cell budget.
        """
        kind = KIND
        d = DIM
        wstable = WSTABLE
        sym = SYM
        lattice = LAT
        jb = np.empty(d)
        cb = np.empty(d)
        pos = np.empty(d)
        pre = np.empty(d)
        post = np.empty(d)
        x = np.empty(d)
        y = np.empty(d)
        gamma = P[GAMMA]
        on_tol = 0.0 if gamma > 0.0 else du
        for i in range(count):
            pos[:] = 0.0
            jsum = 0.0
            k = 0
            while True:
                if k >= max_cells:
                    return i
                js = clock_jump(rng, kind, sym, P, d, du, jb)
                if gamma * ((k + 1) * du) + (jsum + js) > t:
                    g, dn, tj, ts, case = resolve_crossing(
                        rng, kind, P, b, d, t, du, k, jsum, pos, js, jb, pre, post, x, y)
                    break
                cont_position(rng, kind, P, b, d, du, cb)
                for j in range(d):
                    pos[j] = pos[j] + (jb[j] + cb[j])
                jsum = jsum + js
                k += 1
            for j in range(d):
                X[i, j] = x[j]
                Y[i, j] = y[j]
            A[i] = t - g
            R[i] = dn - t
            ONM[i] = R[i] <= on_tol
        return -1

    return limit_block


_FACTORIES = {
    "ctrw_row": _make_ctrw_row,
    "ctrw_state_block": _make_ctrw_state_block,
    "skeleton_cells": _make_skeleton_cells,
    "limit_block": _make_limit_block,
}
_SPECIALIZED = {}


def specialized(name, kind, d, P):
    """Kernel ``name`` compiled for fixed model kind, dimension, wait law, sign mode and jump law.

    Freezing these as compile-time constants lets LLVM drop the unused model
    branches; a generic loop runs several times slower per step.
    """
    key = (name, int(kind), int(d), bool(P[WAIT_STABLE]), bool(P[SYMMETRIC]), bool(P[LATTICE]))
    fn = _SPECIALIZED.get(key)
    if fn is None:
        fn = _SPECIALIZED[key] = _FACTORIES[name](*key[1:])
    return fn
