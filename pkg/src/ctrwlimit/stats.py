"""Empirical laws, distances between laws and convergence diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special, stats

from . import laws
from .errors import ConfigError, UnsupportedModelError
from .limit import batch_sample
from .models import ModelSpec
from .walk import ctrw_batch

KS_LEVEL = 0.99
# replica offset of the limit draws inside a sweep, far from the CTRW replicas
LIMIT_REPLICA_OFFSET = 1 << 52


@dataclass
class LawEstimate:
    """Empirical one-dimensional law (sorted sample) with provenance.

    Attributes
    ----------
    values : ndarray
        Sorted sample.
    fingerprint, seed, t, scale
        Model fingerprint, master seed, query time and the scale (``n`` for a
        CTRW, ``du`` for a limit sample).
    """

    values: np.ndarray
    fingerprint: str = ""
    seed: int | None = None
    t: float | None = None
    scale: float | None = None

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=float).ravel())
        if v.size == 0:
            raise ConfigError("empty sample", "values")
        if np.isnan(v).any():
            raise ConfigError("sample contains NaN", "values")
        self.values = v

    @property
    def n_samples(self) -> int:
        return self.values.size

    def cdf(self, x):
        """Right-continuous ECDF."""
        return np.searchsorted(self.values, x, side="right") / self.n_samples

    def cdf_left(self, x):
        return np.searchsorted(self.values, x, side="left") / self.n_samples


@dataclass
class Histogram2D:
    """Binned counts of a two-dimensional sample."""

    counts: np.ndarray
    edges_x: np.ndarray
    edges_y: np.ndarray
    n_samples: int
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_samples(cls, x, y, bins, ranges):
        counts, ex, ey = np.histogram2d(np.asarray(x, float), np.asarray(y, float),
                                        bins=bins, range=ranges)
        return cls(counts, ex, ey, int(np.size(x)))

    @property
    def density(self):
        area = np.outer(np.diff(self.edges_x), np.diff(self.edges_y))
        return self.counts / (self.n_samples * area)


def _as_law(obj):
    if isinstance(obj, LawEstimate):
        return obj
    if callable(obj):
        return obj
    return LawEstimate(obj)


def ks_distance(A, B) -> float:
    """Sup distance between two CDFs.

    Each argument is a ``LawEstimate``, a raw sample, or (for at most one of
    them) a callable CDF. Ties and atoms are handled exactly: the supremum
    is taken over the sample points and their left limits.
    """
    A, B = _as_law(A), _as_law(B)
    if callable(A) and callable(B):
        raise ConfigError("at least one argument must be a sample", "B")
    if callable(A):
        A, B = B, A
    pts = A.values if callable(B) else np.union1d(A.values, B.values)
    pts = np.unique(pts)
    if callable(B):
        right = np.abs(A.cdf(pts) - np.asarray(B(pts), dtype=float))
        below = np.nextafter(pts, -np.inf)
        left = np.abs(A.cdf_left(pts) - np.asarray(B(below), dtype=float))
        return float(max(right.max(), left.max()))
    return float(np.max(np.abs(A.cdf(pts) - B.cdf(pts))))


def ks_critical(n, m=None, level=KS_LEVEL) -> float:
    """Asymptotic Kolmogorov critical value at confidence ``level``.

    One-sample for ``m=None``, otherwise two-sample with effective size
    ``n m / (n + m)``.
    """
    n_eff = n if m is None else n * m / (n + m)
    return float(special.kolmogi(1.0 - level) / np.sqrt(n_eff))


def wasserstein1(A, B, grid=None) -> float:
    """Area between two CDFs.

    Two samples use the exact formula; a callable CDF needs ``grid``, on
    which both CDFs are integrated by the trapezoid rule.
    """
    A, B = _as_law(A), _as_law(B)
    if not callable(A) and not callable(B):
        return float(stats.wasserstein_distance(A.values, B.values))
    if grid is None:
        raise ConfigError("a grid is required for analytic CDFs", "grid")
    grid = np.asarray(grid, dtype=float)
    fa = A(grid) if callable(A) else A.cdf(grid)
    fb = B(grid) if callable(B) else B.cdf(grid)
    return float(integrate.trapezoid(np.abs(np.asarray(fa) - np.asarray(fb)), grid))


def _gauss_cell_averages(density, ex, ey, order=8):
    xg, wg = np.polynomial.legendre.leggauss(order)
    out = np.empty((len(ex) - 1, len(ey) - 1))
    for i in range(len(ex) - 1):
        ax = 0.5 * (ex[i + 1] - ex[i]) * xg + 0.5 * (ex[i + 1] + ex[i])
        for j in range(len(ey) - 1):
            ay = 0.5 * (ey[j + 1] - ey[j]) * xg + 0.5 * (ey[j + 1] + ey[j])
            vals = density(ax[:, None], ay[None, :])
            out[i, j] = 0.25 * np.sum(wg[:, None] * wg[None, :] * vals)
    return out


def histogram2d_relative_error(a, r, density, bins=40, ranges=((0.0, 1.0), (0.0, 2.0)),
                               min_count=100) -> float:
    """Mean relative error of a 2-d histogram against an analytic density.

    Parameters
    ----------
    a, r : array_like
        Sample coordinates. Points outside ``ranges`` still count towards
        the normalisation.
    density : callable or ndarray or DensityGrid
        Either ``f(a, r)`` (cell averages are then taken with an 8x8
        Gauss-Legendre rule), or precomputed cell averages.
    bins : int or (int, int)
    min_count : int
        Only cells with at least this many samples contribute.

    Raises
    ------
    ConfigError
        If no cell qualifies.
    """
    hist = Histogram2D.from_samples(a, r, bins, ranges)
    if callable(density):
        analytic = _gauss_cell_averages(density, hist.edges_x, hist.edges_y)
    else:
        analytic = np.asarray(getattr(density, "values", density), dtype=float)
    if analytic.shape != hist.counts.shape:
        raise ConfigError(f"density grid shape {analytic.shape} != {hist.counts.shape}", "density")
    use = (hist.counts >= min_count) & (analytic > 0)
    if not np.any(use):
        raise ConfigError(f"no bin has at least {min_count} samples", "min_count")
    rel = np.abs(hist.density[use] - analytic[use]) / analytic[use]
    return float(rel.mean())


# ------------------------------------------------------------ convergence

def exact_references(model: ModelSpec, t) -> dict:
    """Closed-form limit CDFs available for ``model`` at time ``t``, keyed by marginal.

    ``X`` and ``Y`` are covered for uncoupled Gaussian jumps at ``beta = 1/2``
    and ``A`` for pure stable clocks; other marginals are absent.
    """
    refs = {}
    try:
        laws.lagging_position_cdf(model, t, 0.0)
    except UnsupportedModelError:
        pass
    else:
        refs["X"] = refs["Y"] = lambda x: laws.lagging_position_cdf(model, t, x)
    if model.d == 1 and model.gamma == 0.0 and model.kind != "pure-drift":
        refs["A"] = lambda a: laws.age_cdf(model, t, a)
    return refs


@dataclass
class SweepTable:
    """Rows ``(n, marginal, distance, reps, seed)``."""

    rows: list

    def distances(self, marginal):
        return [(n, d) for n, m, d, _, _ in self.rows if m == marginal]

    def to_csv(self, dest=None):
        n = np.array([r[0] for r in self.rows], dtype=np.int64)
        marg = [r[1] for r in self.rows]
        dist = np.array([r[2] for r in self.rows])
        reps = np.array([r[3] for r in self.rows], dtype=np.int64)
        seed = np.array([r[4] for r in self.rows], dtype=np.int64)
        lines = ["n,marginal,distance,reps,seed"]
        lines += [f"{a},{b},{c:.17g},{d},{e}" for a, b, c, d, e in zip(n, marg, dist, reps, seed)]
        text = "\n".join(lines) + "\n"
        if dest is None:
            return text
        with open(dest, "w", newline="") as fh:
            fh.write(text)
        return None


def convergence_sweep(model: ModelSpec, t, n_list, reps, master_seed, du=None,
                      limit_reps=None, reference=None, marginals=("X", "Y", "A", "R"),
                      threads=1) -> SweepTable:
    """KS distances between CTRW marginals at scale ``n`` and the limit marginals.

    The limit sample (``limit_reps`` draws at grid step ``du``, default
    ``1e-3 t``) uses the same master seed at a far replica offset, so it is
    independent of the CTRW draws and shared across all ``n``. ``reference``
    may map a marginal name to an exact CDF, which then replaces the limit
    sample for that marginal. Position marginals use the first coordinate.
    """
    n_list = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ConfigError("must be strictly increasing", "n_list")
    t = float(t)
    du = 1e-3 * t if du is None else float(du)
    limit_reps = reps if limit_reps is None else int(limit_reps)
    reference = dict(reference or {})
    need_limit = any(m not in reference for m in marginals)
    lim = {}
    if need_limit:
        lb = batch_sample(model, t, du, limit_reps, master_seed, start=LIMIT_REPLICA_OFFSET,
                          threads=threads)
        lim = {"X": lb.X[:, 0], "Y": lb.Y[:, 0], "A": lb.A, "R": lb.R}
    rows = []
    for n in n_list:
        cb = ctrw_batch(model, n, t, reps, master_seed, threads=threads)
        emp = {"X": cb.X[:, 0], "Y": cb.Y[:, 0], "A": cb.A, "R": cb.R}
        for m in marginals:
            ref = reference.get(m, lim.get(m))
            rows.append((n, m, ks_distance(emp[m], ref), int(reps), int(master_seed)))
    return SweepTable(rows)
