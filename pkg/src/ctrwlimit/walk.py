"""Triangular-array CTRWs: row sums, renewal counts and the lagging/leading processes.

For row ``n`` with scaled steps ``(J_k, W_k)`` the renewal count is
``N_t = max{k : W_1 + ... + W_k <= t}`` and

* ``(X_t, G_t)`` is the sum of the first ``N_t`` steps (lagging walk, last renewal),
* ``(Y_t, D_t)`` is the sum of the first ``N_t + 1`` steps (leading walk, next renewal).

All partial sums are formed left to right in double precision, both here
and in the compiled batch sampler, so the two routes agree bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import BudgetError, ConfigError, HorizonError
from .models import ModelSpec
from .paths import StepPath
from .seeding import check_seed, run_blocks

DEFAULT_MAX_STEPS = 10**8


def _check_n(n):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ConfigError(f"must be an integer >= 1, got {n!r}", "n")
    return int(n)


def scaled_step(model: ModelSpec, n: int, rng: np.random.Generator):
    """One step ``(J^n, W^n)`` of row ``n``.

    The raw pair is rescaled by ``n**-e_J`` and ``n**-e_W`` (the model's
    scaling exponents); stable waits are used as drawn and Pareto waits are
    additionally divided by ``Gamma(1 - beta)**(1/beta)`` so that the row
    sums converge to a clock with Laplace exponent ``s**beta``. The drift
    ``b`` contributes ``b / n`` per step.
    """
    n = _check_n(n)
    code, P, b = model.kernel_args()
    j = np.empty(model.d)
    w = K.raw_pair(rng, code, P[K.WAIT_STABLE] != 0, P[K.SYMMETRIC] != 0, P, model.d, j,
                  P[K.LATTICE] != 0)
    fj, fw = K.row_factors(P, float(n))
    w = K.scale_pair(code, P, b, model.d, float(n), fj, fw, j, w)
    return j, w


@dataclass(frozen=True)
class CTRWRealization:
    """One row of the triangular array, generated past a clock horizon.

    Attributes
    ----------
    n : int
    jumps : ndarray, shape (K, d)
    waits : ndarray, shape (K,)
    row_sum : StepPath
        ``u -> (B^n_u, S^n_u)`` with epochs ``k / n``.
    """

    n: int
    jumps: np.ndarray
    waits: np.ndarray
    row_sum: StepPath

    @property
    def horizon(self) -> float:
        return self.row_sum.horizon

    @property
    def steps(self):
        return list(zip(self.jumps, self.waits))


def build_row_sum(model: ModelSpec, n: int, horizon_t: float, rng: np.random.Generator,
                  max_steps: int = DEFAULT_MAX_STEPS) -> CTRWRealization:
    """Generate scaled steps until the clock exceeds ``horizon_t``.

    Raises
    ------
    BudgetError
        If more than ``max_steps`` steps are needed.
    """
    n = _check_n(n)
    horizon_t = float(horizon_t)
    if not horizon_t > 0:
        raise ConfigError("must be > 0", "horizon_t")
    code, P, b = model.kernel_args()
    row = K.specialized("ctrw_row", code, model.d, P)
    jumps, waits, ok = row(rng, P, b, float(n), horizon_t, int(max_steps))
    if not ok:
        raise BudgetError(f"step budget {max_steps} exhausted before the clock passed {horizon_t}")
    k = waits.shape[0]
    times = np.arange(k + 1) / n
    pos = np.zeros((k + 1, model.d))
    np.cumsum(jumps, axis=0, out=pos[1:])
    clk = np.zeros(k + 1)
    np.cumsum(waits, out=clk[1:])
    path = StepPath(times, pos, clk, horizon_t, validate=False)
    return CTRWRealization(n, jumps.copy(), waits.copy(), path)


def renewal_count(waits, t) -> int:
    """``max{k : W_1 + ... + W_k <= t}`` (boundary inclusive).

    Raises
    ------
    HorizonError
        If the waits do not sum past ``t``.
    """
    waits = np.asarray(waits, dtype=float)
    if np.any(waits <= 0):
        raise ConfigError("waiting times must be positive", "waits")
    cum = np.cumsum(waits)
    if cum.size == 0 or not cum[-1] > t:
        raise HorizonError(f"waiting times sum to {cum[-1] if cum.size else 0.0}, not past t={t}")
    return int(np.searchsorted(cum, t, side="right"))


def ctrw_state(realization: CTRWRealization, t: float):
    """``(X_t, G_t, Y_t, D_t)`` by direct summation of the steps.

    Returns
    -------
    x : ndarray (d,)
    g : float
    y : ndarray (d,)
    dnext : float
    """
    t = float(t)
    if t < 0 or t > realization.horizon:
        raise HorizonError(f"t={t} outside [0, {realization.horizon}]")
    N = renewal_count(realization.waits, t)
    pos = np.cumsum(realization.jumps[:N + 1], axis=0)
    clk = np.cumsum(realization.waits[:N + 1])
    d = realization.jumps.shape[1]
    x = pos[N - 1] if N > 0 else np.zeros(d)
    g = float(clk[N - 1]) if N > 0 else 0.0
    return x.copy(), g, pos[N].copy(), float(clk[N])


def ctrw_states(realization: CTRWRealization, ts):
    """Vectorised ``ctrw_state`` at several times of one realization.

    Returns
    -------
    N : ndarray of int
    X, G, Y, D : ndarrays with a leading axis over ``ts``
    """
    ts = np.asarray(ts, dtype=float)
    if np.any(ts < 0) or np.any(ts > realization.horizon):
        raise HorizonError(f"query times outside [0, {realization.horizon}]")
    d = realization.jumps.shape[1]
    pos = np.zeros((realization.jumps.shape[0] + 1, d))
    np.cumsum(realization.jumps, axis=0, out=pos[1:])
    clk = np.zeros(realization.waits.shape[0] + 1)
    np.cumsum(realization.waits, out=clk[1:])
    N = np.searchsorted(clk[1:], ts, side="right")
    if np.any(N >= realization.waits.shape[0]):
        raise HorizonError("waiting times do not sum past every query time")
    return N, pos[N], clk[N], pos[N + 1], clk[N + 1]


@dataclass(frozen=True)
class CTRWStateBatch:
    """Arrays of ``(X, G, Y, D, N)`` at time ``t`` for replicas ``start..start+len-1``."""

    model: ModelSpec
    n: int
    t: float
    master_seed: int
    start: int
    X: np.ndarray
    G: np.ndarray
    Y: np.ndarray
    D: np.ndarray
    N: np.ndarray

    def __len__(self):
        return self.G.shape[0]

    @property
    def A(self):
        return self.t - self.G

    @property
    def R(self):
        return self.D - self.t


def ctrw_batch(model: ModelSpec, n: int, t: float, reps: int, master_seed: int,
               start: int = 0, threads: int = 1, max_steps: int = DEFAULT_MAX_STEPS):
    """CTRW states at time ``t`` for replicas ``start, ..., start + reps - 1``.

    Replica ``i`` is the same draw regardless of ``start``, ``reps`` and
    ``threads``; replica 0 coincides with ``build_row_sum`` followed by
    ``ctrw_state`` on the generator ``seeding.block_rng(master_seed, 0)``.
    """
    n = _check_n(n)
    t = float(t)
    if not t > 0:
        raise ConfigError("must be > 0", "t")
    if reps < 1:
        raise ConfigError("must be >= 1", "reps")
    master_seed = check_seed(master_seed)
    code, P, b = model.kernel_args()
    d = model.d

    kernel = K.specialized("ctrw_state_block", code, d, P)

    def draw(rng, count):
        X = np.empty((count, d))
        Y = np.empty((count, d))
        G = np.empty(count)
        D = np.empty(count)
        N = np.empty(count, dtype=np.int64)
        bad = kernel(rng, P, b, float(n), t, count, int(max_steps), X, G, Y, D, N)
        if bad >= 0:
            raise BudgetError(f"step budget {max_steps} exhausted in a replica at scale n={n}")
        return dict(X=X, G=G, Y=Y, D=D, N=N)

    out = run_blocks(draw, start, start + reps, master_seed, threads)
    return CTRWStateBatch(model, n, t, master_seed, start, **out)


@dataclass(frozen=True)
class MatchingReport:
    """Outcome of ``matching_audit``; ``rows`` holds one tuple per realization.

    Each row is ``(replica, n, queries, mismatches)``.
    """

    rows: list
    checks: int

    @property
    def mismatches(self) -> int:
        return sum(r[3] for r in self.rows)

    def to_csv(self, dest=None):
        from .limit import write_table
        cols = np.array(self.rows, dtype=np.int64).reshape(-1, 4)
        return write_table(dest, "replica,n,queries,mismatches", [cols[:, j] for j in range(4)])


def _match_one(path, real, times):
    """Number of query times at which the two routes disagree."""
    N, x, g, y, dn = ctrw_states(real, times)
    k = path.inverse_index(times)
    km = np.maximum(k - 1, 0)
    ok = ((k == N + 1) & (path.clocks[km] == g) & (path.clocks[k] == dn)
          & np.all(path.positions[km] == x, axis=1) & np.all(path.positions[k] == y, axis=1))
    t0 = float(times[0])
    xs, gs, ys, ds = ctrw_state(real, t0)
    px, pg = path.phi_at(t0)
    qy, qd = path.psi_at(t0)
    scalar_ok = (pg == gs and qd == ds and np.array_equal(px, xs) and np.array_equal(qy, ys)
                 and gs == g[0] and np.array_equal(xs, x[0]))
    return int(np.count_nonzero(~ok)) + (0 if scalar_ok else 1)


def matching_audit(models, reps, master_seed, n=None, queries=200, horizon_t=4.0,
                   max_steps=DEFAULT_MAX_STEPS) -> MatchingReport:
    """Check ``Phi(row sum)(t) = (X, G)`` and ``Psi(row sum)(t) = (Y, D)`` exactly.

    Realization ``i`` uses the model ``models[i % len(models)]``, the scale
    ``n`` (or a uniform draw from 1..100 when ``n`` is None) and the
    generator of replica block ``i``. At each of ``queries`` uniform times
    in ``(0, horizon_t)`` the index of the first clock value above ``t``
    must equal ``N_t + 1`` and the selected partial sums must equal the
    directly summed state bit for bit. The scalar routes and the compiled
    batch sampler are also compared at the first query time.
    """
    from .seeding import BLOCK_SIZE, block_rng
    models = [models] if isinstance(models, ModelSpec) else list(models)
    master_seed = check_seed(master_seed)
    aux = np.random.default_rng(master_seed)
    rows = []
    checks = 0
    for i in range(int(reps)):
        model = models[i % len(models)]
        ni = int(aux.integers(1, 101)) if n is None else _check_n(n)
        times = aux.uniform(0.0, horizon_t, size=int(queries))
        real = build_row_sum(model, ni, horizon_t, block_rng(master_seed, i), max_steps)
        path = real.row_sum
        bad = _match_one(path, real, times)
        fast = ctrw_batch(model, ni, float(times[0]), 1, master_seed, start=i * BLOCK_SIZE,
                          max_steps=max_steps)
        x, g, y, dn = ctrw_state(real, float(times[0]))
        if not (fast.G[0] == g and fast.D[0] == dn and np.array_equal(fast.X[0], x)
                and np.array_equal(fast.Y[0], y)):
            bad += 1
        checks += len(times) + 2
        rows.append((i, ni, len(times) + 2, bad))
    return MatchingReport(rows, checks)
