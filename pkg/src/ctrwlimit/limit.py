"""Sampling the limit processes from a grid skeleton of the Levy process (B, S).

The skeleton advances in operational-time cells of width ``du``. Each cell
carries an exact increment of (B, S): a pure-jump clock increment (with the
position jump coupled to it), a linear clock drift ``gamma du`` and a
position part independent of the clock. Jumps are lumped into one jump per
cell; in the cell where the clock passes ``t`` the jump is placed at a
uniform position so drift passages and jump passages are resolved inside
the cell.

With ``k`` the crossing cell, ``Phi`` of the skeleton at ``t`` selects the
grid value at epoch ``k du`` and ``Psi`` the value at ``(k + 1) du``; the
sample refines both using the recorded position of the jump inside cell
``k``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import BudgetError, ConfigError
from .models import ModelSpec
from .paths import StepPath
from .seeding import check_seed, run_blocks

DEFAULT_MAX_CELLS = 10**8


def _check_t_du(t, du):
    t = float(t)
    du = float(du)
    if not t > 0:
        raise ConfigError(f"must be > 0, got {t}", "t")
    if not du > 0:
        raise ConfigError(f"must be > 0, got {du}", "du")
    return t, du


@dataclass(frozen=True)
class CrossingCell:
    """Where the clock passes the query time inside the crossing cell.

    ``case`` is 0 for a passage by drift before the cell's jump, 1 for a
    passage by the jump, 2 for a passage by drift after the jump.
    """

    k: int
    g: float
    d: float
    theta_j: float
    theta_s: float
    case: int
    jump_clock: float
    jump_position: np.ndarray
    pre: np.ndarray


class Skeleton(StepPath):
    """Grid skeleton of (B, S) with the crossing cell of its horizon recorded."""

    __slots__ = ("du", "crossing")

    def __init__(self, times, positions, clocks, horizon, du, crossing):
        super().__init__(times, positions, clocks, horizon, validate=False)
        self.du = du
        self.crossing = crossing


def levy_skeleton(model: ModelSpec, horizon_t: float, du: float, rng: np.random.Generator,
                  max_cells: int = DEFAULT_MAX_CELLS) -> Skeleton:
    """Grid skeleton with epochs ``k du`` run until the clock exceeds ``horizon_t``.

    The clock at epoch ``k`` is ``gamma (k du)`` plus the running sum of the
    clock jumps, so a pure drift is reproduced exactly.
    """
    horizon_t, du = _check_t_du(horizon_t, du)
    code, P, b = model.kernel_args()
    cells = K.specialized("skeleton_cells", code, model.d, P)
    js, inc, cross, jb, pre, ok = cells(rng, P, b, horizon_t, du, int(max_cells))
    if not ok:
        raise BudgetError(f"cell budget {max_cells} exhausted before the clock passed {horizon_t}")
    m = js.shape[0]
    k_idx = np.arange(m + 1)
    times = k_idx * du
    clocks = np.zeros(m + 1)
    np.cumsum(js, out=clocks[1:])
    clocks = model.gamma * times + clocks if model.gamma > 0 else clocks
    pos = np.zeros((m + 1, model.d))
    np.cumsum(inc, axis=0, out=pos[1:])
    g, dn, tj, ts, case, k = cross
    crossing = CrossingCell(int(k), g, dn, tj, ts, int(case), float(js[k]), jb.copy(), pre.copy())
    return Skeleton(times, pos, clocks, horizon_t, du, crossing)


@dataclass(frozen=True)
class JointSample:
    """One draw of ``(X_t, A_t, Y_t, R_t)`` with the on-M flag."""

    x: np.ndarray
    a: float
    y: np.ndarray
    r: float
    on_M: bool
    t: float
    du: float

    @property
    def g(self) -> float:
        return self.t - self.a

    @property
    def d(self) -> float:
        return self.t + self.r


def on_m_tolerance(model: ModelSpec, du: float) -> float:
    """Threshold on ``r`` below which a sample counts as on M.

    With a clock drift, passages by drift give ``r = 0`` exactly and the
    threshold is 0. Without drift ``r = 0`` has probability zero and the
    threshold is one cell, ``du``.
    """
    return 0.0 if model.gamma > 0 else float(du)


def age_tolerance(model: ModelSpec, du: float) -> float:
    return float(du) * (1.0 + model.gamma)


def sample_from_skeleton(model: ModelSpec, skel: Skeleton, t: float) -> JointSample:
    """Apply Phi and Psi to the skeleton at ``t`` and refine inside the crossing cell."""
    c = skel.crossing
    k = skel.first_exceeding(t)
    if k - 1 != c.k:
        raise AssertionError(f"inverse index {k} disagrees with crossing cell {c.k}")
    xg, gg = skel.phi_at(t)
    gamma = model.gamma
    du = skel.du
    if c.case == 1:
        g = gg + gamma * c.theta_j * du
        dn = g + c.jump_clock
        x = xg + c.pre
        y = x + c.jump_position
    else:
        g = t
        dn = t
        x = xg + c.pre
        if c.case == 2:
            x = x + c.jump_position
        y = x
    r = dn - t
    return JointSample(x, t - g, y, r, bool(r <= on_m_tolerance(model, du)), t, du)


def joint_sample(model: ModelSpec, t: float, du: float, rng: np.random.Generator,
                 max_cells: int = DEFAULT_MAX_CELLS) -> JointSample:
    """One joint draw via an explicit skeleton (reference route)."""
    t, du = _check_t_du(t, du)
    skel = levy_skeleton(model, t, du, rng, max_cells)
    return sample_from_skeleton(model, skel, t)


class JointSampleBatch:
    """Column store of joint samples for replicas ``start .. start + len - 1``.

    Indexing returns ``JointSample`` objects, so the batch also behaves as a
    list of samples.
    """

    def __init__(self, model, t, du, master_seed, start, X, A, Y, R, on_M, replica=None):
        self.model = model
        self.t = float(t)
        self.du = float(du)
        self.master_seed = master_seed
        self.X = X
        self.A = A
        self.Y = Y
        self.R = R
        self.on_M = on_M
        self.replica = (np.arange(start, start + len(A), dtype=np.int64)
                        if replica is None else np.asarray(replica, dtype=np.int64))

    def __len__(self):
        return self.A.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return JointSampleBatch(self.model, self.t, self.du, self.master_seed, 0,
                                    self.X[i], self.A[i], self.Y[i], self.R[i], self.on_M[i],
                                    replica=self.replica[i])
        return JointSample(self.X[i].copy(), float(self.A[i]), self.Y[i].copy(),
                           float(self.R[i]), bool(self.on_M[i]), self.t, self.du)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other):
        if not isinstance(other, JointSampleBatch):
            return NotImplemented
        return (self.t == other.t and self.du == other.du
                and all(np.array_equal(getattr(self, f), getattr(other, f))
                        for f in ("replica", "X", "A", "Y", "R", "on_M")))

    @property
    def G(self):
        return self.t - self.A

    @property
    def D(self):
        return self.t + self.R

    @classmethod
    def merge(cls, batches):
        """Union of batches from the same run, ordered by replica index."""
        batches = list(batches)
        if not batches:
            raise ConfigError("nothing to merge", "batches")
        first = batches[0]
        rep = np.concatenate([b.replica for b in batches])
        order = np.argsort(rep, kind="stable")
        if np.any(np.diff(rep[order]) == 0):
            raise ConfigError("overlapping replica ranges", "batches")

        def cat(name):
            return np.concatenate([getattr(b, name) for b in batches])[order]

        return cls(first.model, first.t, first.du, first.master_seed, 0, cat("X"), cat("A"),
                   cat("Y"), cat("R"), cat("on_M"), replica=rep[order])

    def to_csv(self, dest=None):
        """Columns ``replica, x_1..x_d, a, y_1..y_d, r, on_M``."""
        d = self.X.shape[1]
        header = ",".join(["replica"] + [f"x_{j + 1}" for j in range(d)] + ["a"]
                          + [f"y_{j + 1}" for j in range(d)] + ["r", "on_M"])
        return write_table(dest, header,
                           [self.replica, self.X, self.A, self.Y, self.R, self.on_M.astype(int)])


def write_table(dest, header, columns):
    """Write integer and float columns as CSV; floats use 17 significant digits."""
    cols = []
    fmts = []
    for c in columns:
        c = np.asarray(c)
        if c.ndim == 1:
            c = c[:, None]
        cols.append(c)
        fmt = "%d" if np.issubdtype(c.dtype, np.integer) else "%.17g"
        fmts.extend([fmt] * c.shape[1])
    table = np.hstack([c.astype(object) for c in cols]) if cols else np.empty((0, 0))
    buf = io.StringIO()
    buf.write(header + "\n")
    for row in table:
        buf.write(",".join(f % v for f, v in zip(fmts, row)))
        buf.write("\n")
    text = buf.getvalue()
    if dest is None:
        return text
    with open(dest, "w", newline="") as fh:
        fh.write(text)
    return None


def batch_sample(model: ModelSpec, t: float, du: float, reps: int, master_seed: int,
                 start: int = 0, threads: int = 1,
                 max_cells: int = DEFAULT_MAX_CELLS) -> JointSampleBatch:
    """Joint draws for replicas ``start, ..., start + reps - 1``.

    The output is a deterministic function of ``master_seed`` and the replica
    indices; the thread count only affects speed. Replica 0 equals
    ``joint_sample`` on ``seeding.block_rng(master_seed, 0)``.
    """
    t, du = _check_t_du(t, du)
    if isinstance(reps, bool) or int(reps) != reps or reps < 1:
        raise ConfigError(f"must be an integer >= 1, got {reps!r}", "reps")
    master_seed = check_seed(master_seed)
    code, P, b = model.kernel_args()
    d = model.d

    kernel = K.specialized("limit_block", code, d, P)

    def draw(rng, count):
        X = np.empty((count, d))
        Y = np.empty((count, d))
        A = np.empty(count)
        R = np.empty(count)
        M = np.empty(count, dtype=np.bool_)
        bad = kernel(rng, P, b, t, du, count, int(max_cells), X, A, Y, R, M)
        if bad >= 0:
            raise BudgetError(f"cell budget {max_cells} exhausted (t={t}, du={du})")
        return dict(X=X, A=A, Y=Y, R=R, on_M=M)

    out = run_blocks(draw, start, start + int(reps), master_seed, threads)
    return JointSampleBatch(model, t, du, master_seed, start, **out)
