"""Closed-form limit laws of age and remaining lifetime, and numerical Laplace inversion.

For a clock with drift ``gamma``, renewal density ``u`` and Levy density
``nu`` (tail ``Pibar``), the limit at time ``t`` satisfies

* ``P(R_t = 0) = gamma u(t)``, and on that event ``A_t = 0``;
* ``(A_t, R_t)`` has density ``u(t - a) nu(a + r)`` on ``(0, t) x (0, inf)``;
* ``A_t`` has density ``u(t - a) Pibar(a)`` on ``(0, t)``.

For a pure ``beta``-stable clock ``A_t / t`` is Beta(1 - beta, beta).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy import integrate, special

from .errors import ConfigError, NumericalError, UnsupportedModelError
from .models import ModelSpec, levy_density, renewal_density, tail_function

QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-10


def _check_t(t):
    t = float(t)
    if not t > 0:
        raise ConfigError(f"must be > 0, got {t}", "t")
    return t


def _require_1d(model):
    if model.d != 1:
        raise UnsupportedModelError("analytic laws are available for d = 1 only")


def _pure_stable(model):
    return model.gamma == 0.0


# ----------------------------------------------------------------- age law

def age_density(model: ModelSpec, t, a):
    """Density of the absolutely continuous part of ``A_t``.

    Returns 0 outside ``(0, t)``. For a pure stable clock this is
    ``sin(pi beta)/pi (t-a)**(beta-1) a**-beta``.
    """
    _require_1d(model)
    t = _check_t(t)
    a = np.asarray(a, dtype=float)
    inside = (a > 0) & (a < t)
    safe = np.where(inside, a, 0.5 * t)
    if model.kind == "pure-drift":
        out = np.zeros_like(safe)
    elif _pure_stable(model):
        b = model.beta
        out = math.sin(math.pi * b) / math.pi * (t - safe) ** (b - 1.0) * safe ** (-b)
    else:
        out = renewal_density(model, t - safe) * tail_function(model, safe)
    out = np.where(inside, out, 0.0)
    return out[()] if out.ndim == 0 else out


def age_cdf(model: ModelSpec, t, a):
    """``P(A_t <= a)``, including the atom at 0 when the clock drifts."""
    _require_1d(model)
    t = _check_t(t)
    a = np.asarray(a, dtype=float)
    if _pure_stable(model):
        out = special.betainc(1.0 - model.beta, model.beta, np.clip(a / t, 0.0, 1.0))
    else:
        atom = atom_mass_R0(model, t)
        flat = np.atleast_1d(a)
        vals = np.empty(flat.shape)
        for i, ai in enumerate(flat):
            if ai < 0:
                vals[i] = 0.0
            elif ai >= t:
                vals[i] = 1.0
            else:
                vals[i] = atom + _quad(lambda x: float(age_density(model, t, x)), 0.0, ai)
        out = vals.reshape(a.shape)
    out = np.where(a < 0, 0.0, out)
    return out[()] if out.ndim == 0 else out


def _quad(f, lo, hi, points=None):
    if hi <= lo:
        return 0.0
    val, err = integrate.quad(f, lo, hi, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=400,
                              points=points)
    return val


# --------------------------------------------------------- joint (A, R) law

def joint_ar_density(model: ModelSpec, t, a, r):
    """Density ``u(t - a) nu(a + r)`` of ``(A_t, R_t)`` on ``R_t > 0``."""
    _require_1d(model)
    t = _check_t(t)
    a, r = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(r, dtype=float))
    inside = (a > 0) & (a < t) & (r > 0)
    sa = np.where(inside, a, 0.5 * t)
    sr = np.where(inside, r, 1.0)
    if model.kind == "pure-drift":
        out = np.zeros_like(sa)
    else:
        out = renewal_density(model, t - sa) * levy_density(model, sa + sr)
    out = np.where(inside, out, 0.0)
    return out[()] if out.ndim == 0 else out


def joint_ar_cell_average(model: ModelSpec, t, a0, a1, r0, r1):
    """Average of ``joint_ar_density`` over ``[a0, a1] x [r0, r1]``.

    The ``r`` integral is done exactly, ``int nu(a + r) dr = Pibar(a + r0) - Pibar(a + r1)``,
    leaving a one-dimensional quadrature in ``a``.
    """
    _require_1d(model)
    t = _check_t(t)
    lo, hi = max(a0, 0.0), min(a1, t)
    rlo = max(r0, 0.0)
    if hi <= lo or r1 <= rlo:
        return 0.0

    def f(a):
        upper = np.inf if rlo == 0.0 and a == 0.0 else float(tail_function(model, a + rlo))
        return float(renewal_density(model, t - a)) * (upper - float(tail_function(model, a + r1)))

    return _quad(f, lo, hi) / ((a1 - a0) * (r1 - r0))


def atom_mass_R0(model: ModelSpec, t, method="auto", **inv_kw):
    """``P(R_t = 0) = gamma u(t)``.

    Parameters
    ----------
    method : {"auto", "laplace"}
        ``auto`` uses the closed-form renewal density when there is one and
        Laplace inversion of ``1/psi(0, s)`` otherwise; ``laplace`` always
        inverts.
    """
    t = _check_t(t)
    if model.gamma == 0.0:
        return 0.0
    if model.kind == "pure-drift":
        return 1.0
    if method == "auto":
        try:
            return model.gamma * float(renewal_density(model, t))
        except UnsupportedModelError:
            pass
    elif method != "laplace":
        raise ConfigError(f"unknown method {method!r}", "method")
    return model.gamma * renewal_density_numeric(model, t, **inv_kw).value


# --------------------------------------------------------- Laplace inversion

@dataclass
class InversionResult:
    """Gaver-Stehfest estimate with its order-doubling history."""

    value: float
    order: int
    estimates: dict = field(default_factory=dict)
    converged: bool = True

    @property
    def diagnostics(self):
        return {"order": self.order, "estimates": dict(self.estimates),
                "converged": self.converged}


def _stehfest_weights(N):
    M = N // 2
    V = []
    for k in range(1, N + 1):
        acc = mpmath.mpf(0)
        for j in range((k + 1) // 2, min(k, M) + 1):
            acc += (mpmath.mpf(j) ** M * mpmath.factorial(2 * j)
                    / (mpmath.factorial(M - j) * mpmath.factorial(j) * mpmath.factorial(j - 1)
                       * mpmath.factorial(k - j) * mpmath.factorial(2 * j - k)))
        V.append((-1) ** (M + k) * acc)
    return V


def _gaver_stehfest(F, t, N):
    with mpmath.workdps(N + 20):
        ln2 = mpmath.log(2)
        tt = mpmath.mpf(t)
        total = mpmath.mpf(0)
        for k, v in enumerate(_stehfest_weights(N), start=1):
            total += v * F(k * ln2 / tt)
        return float(ln2 / tt * total)


def laplace_invert(transform, t, orders=(8, 16, 32, 64), rtol=1e-7, atol=1e-12):
    """Invert a Laplace transform at ``t > 0`` by the Gaver-Stehfest formula.

    The order is doubled through ``orders`` until two successive estimates
    agree within ``atol + rtol |f|``. The transform is called with mpmath
    numbers and should compute in mpmath (e.g. ``mpmath.sqrt``) so the
    alternating sum keeps enough digits.

    Returns
    -------
    InversionResult

    Raises
    ------
    NumericalError
        If the estimates overflow or never settle.
    """
    t = _check_t(t)
    est = {}
    prev = None
    for N in orders:
        if N % 2:
            raise ConfigError("orders must be even", "orders")
        try:
            val = _gaver_stehfest(transform, t, N)
        except (OverflowError, ZeroDivisionError, ValueError) as exc:
            raise NumericalError(f"transform evaluation failed at order {N}: {exc}",
                                 {"order": N, "estimates": est}) from None
        if not math.isfinite(val):
            raise NumericalError(f"non-finite estimate at order {N}", {"order": N, "estimates": est})
        est[N] = val
        if prev is not None and abs(val - prev) <= atol + rtol * abs(val):
            return InversionResult(val, N, est, True)
        prev = val
    raise NumericalError(f"Gaver-Stehfest did not converge at t={t}",
                         {"estimates": est, "rtol": rtol, "atol": atol})


def clock_exponent_mp(model: ModelSpec):
    """``s -> psi(0, s)`` evaluated in mpmath."""
    g = mpmath.mpf(model.gamma)
    w = mpmath.mpf(0 if model.kind == "pure-drift" else
                   (model.weight if model.kind == "drifted-subordinator" else 1.0))
    b = mpmath.mpf(model.beta)
    return lambda s: g * s + (w * mpmath.power(s, b) if w else 0)


def renewal_density_numeric(model: ModelSpec, t, **kw) -> InversionResult:
    """``u(t)`` by inverting ``1 / psi(0, s)``."""
    psi0 = clock_exponent_mp(model)
    return laplace_invert(lambda s: 1 / psi0(s), t, **kw)


def renewal_mass(model: ModelSpec, eps, **kw) -> InversionResult:
    """``U([0, eps])`` by inverting ``1 / (s psi(0, s))``."""
    psi0 = clock_exponent_mp(model)
    return laplace_invert(lambda s: 1 / (s * psi0(s)), eps, **kw)


def tauberian_ratio(model: ModelSpec, eps) -> float:
    """``gamma U([0, eps]) / eps``, which tends to 1 as ``eps -> 0``."""
    if model.gamma <= 0.0:
        raise ConfigError("needs a clock drift gamma > 0", "gamma")
    eps = _check_t(eps)
    return model.gamma * renewal_mass(model, eps).value / eps


# --------------------------------------------------------------- density grids

@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    bins: int

    @property
    def edges(self):
        return np.linspace(self.lo, self.hi, self.bins + 1)

    @property
    def centers(self):
        e = self.edges
        return 0.5 * (e[:-1] + e[1:])


@dataclass
class DensityGrid:
    """Cell-averaged densities on a 1-d or 2-d grid, plus the mass of the ``R_t = 0`` atom."""

    axes: list
    values: np.ndarray
    atom_at_zero: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def cell_volume(self):
        vol = 1.0
        for ax in self.axes:
            vol *= (ax.hi - ax.lo) / ax.bins
        return vol

    @property
    def total_mass(self):
        return float(np.sum(self.values) * self.cell_volume)

    def to_csv(self, dest=None):
        """Columns: one per axis (cell centres), then ``density``."""
        names = [ax.name for ax in self.axes]
        grids = np.meshgrid(*[ax.centers for ax in self.axes], indexing="ij")
        table = np.column_stack([g.ravel() for g in grids] + [self.values.ravel()])
        lines = [",".join(names + ["density"])]
        lines += [",".join("%.17g" % v for v in row) for row in table]
        text = "\n".join(lines) + "\n"
        if dest is None:
            return text
        with open(dest, "w", newline="") as fh:
            fh.write(text)
        return None

    def sidecar(self) -> dict:
        return {
            "axes": [{"name": ax.name, "lo": ax.lo, "hi": ax.hi, "bins": ax.bins}
                     for ax in self.axes],
            "values": "cell averages",
            "total_mass": self.total_mass,
            "atom_at_zero": self.atom_at_zero,
            **self.meta,
        }

    def write(self, directory, stem="law"):
        import os
        self.to_csv(os.path.join(directory, f"{stem}.csv"))
        with open(os.path.join(directory, f"{stem}.json"), "w") as fh:
            json.dump(self.sidecar(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def age_grid(model: ModelSpec, t, bins=200) -> DensityGrid:
    """Cell averages of the age density on ``(0, t)``."""
    t = _check_t(t)
    ax = Axis("a", 0.0, t, int(bins))
    cdf = np.asarray(age_cdf(model, t, ax.edges), dtype=float)
    atom = atom_mass_R0(model, t)
    cdf[0] = atom
    vals = np.diff(cdf) / (t / bins)
    return DensityGrid([ax], np.maximum(vals, 0.0), atom,
                       {"model": model.to_dict(), "t": t, "variable": "age",
                        "quad_epsabs": QUAD_EPSABS})


def joint_ar_grid(model: ModelSpec, t, bins=40, r_max=None, r_bins=None) -> DensityGrid:
    """Cell averages of the joint ``(A_t, R_t)`` density on ``(0, t) x (0, r_max)``."""
    t = _check_t(t)
    r_max = 2.0 * t if r_max is None else float(r_max)
    r_bins = int(bins) if r_bins is None else int(r_bins)
    ax_a = Axis("a", 0.0, t, int(bins))
    ax_r = Axis("r", 0.0, r_max, r_bins)
    ea, er = ax_a.edges, ax_r.edges
    vals = np.empty((ax_a.bins, ax_r.bins))
    for i in range(ax_a.bins):
        for j in range(ax_r.bins):
            vals[i, j] = joint_ar_cell_average(model, t, ea[i], ea[i + 1], er[j], er[j + 1])
    return DensityGrid([ax_a, ax_r], vals, atom_mass_R0(model, t),
                       {"model": model.to_dict(), "t": t, "variable": "ar",
                        "quad_epsabs": QUAD_EPSABS})


# ------------------------------------------------------------ position law

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(256)


def lagging_position_cdf(model: ModelSpec, t, x):
    """CDF of ``X_t`` for a Brownian motion run by an independent 1/2-stable clock.

    Then ``L_t = sqrt(2 t) |Z|`` with Z standard normal, and
    ``X_t = b L_t + sqrt(sigma2 L_t) N``; the mixture over ``|Z|`` is
    integrated by Gauss-Legendre on ``(0, 12)``. ``Y_t`` has the same law.

    Raises
    ------
    UnsupportedModelError
        Unless the model is ``uncoupled-gaussian`` with ``beta = 1/2`` and d = 1.
    """
    _require_1d(model)
    if model.kind != "uncoupled-gaussian" or model.beta != 0.5 or model.sigma2 <= 0:
        raise UnsupportedModelError("closed-form position law needs uncoupled-gaussian, beta=1/2")
    t = _check_t(t)
    x = np.asarray(x, dtype=float)
    z = 6.0 * (_GL_NODES + 1.0)
    w = 6.0 * _GL_WEIGHTS * 2.0 * np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    L = math.sqrt(2.0 * t) * z
    b = model.b[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = (x[..., None] - b * L) / np.sqrt(model.sigma2 * L)
    out = np.sum(w * special.ndtr(arg), axis=-1)
    return out[()] if out.ndim == 0 else out
