"""Built-in coupled jump/waiting-time models and their limit characteristics.

Each model describes the raw pair (J, W), how rows of the triangular array
are obtained by rescaling it, and the Levy exponent of the limit (B, S)

    E exp(i<k, B_u> - s S_u) = exp(-u psi(k, s)).

Conventions: ``sigma2`` is the variance of B_1 (so the Gaussian part of psi
is ``sigma2 |k|^2 / 2``), the drift ``b`` enters as ``-i<b, k>``, and every
stable clock is normalised so that its Laplace exponent is ``s**beta``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from typing import Any

import numpy as np
from scipy import special

from . import _kernels as K
from .errors import ConfigError, UnsupportedModelError

KINDS = {
    "uncoupled-gaussian": K.UNC_GAUSS,
    "uncoupled-stable": K.UNC_STABLE,
    "levy-walk": K.LEVY_WALK,
    "gaussian-coupled": K.GAUSS_COUPLED,
    "drifted-subordinator": K.DRIFTED,
    "pure-drift": K.PURE_DRIFT,
}

_ALIASES = {
    "uncoupledgaussian": "uncoupled-gaussian",
    "uncoupledstablejump": "uncoupled-stable",
    "uncoupledstable": "uncoupled-stable",
    "fullycoupledlevywalk": "levy-walk",
    "levywalk": "levy-walk",
    "gaussiancoupled": "gaussian-coupled",
    "driftedsubordinator": "drifted-subordinator",
    "puredrift": "pure-drift",
}

FIELDS = ("kind", "beta", "alpha", "gamma", "sigma2", "weight",
          "sign_mode", "b", "d", "wait_law", "jump_law")


def _canonical_kind(kind):
    if not isinstance(kind, str):
        raise ConfigError(f"must be a string, got {kind!r}", "kind")
    if kind in KINDS:
        return kind
    key = kind.replace("-", "").replace("_", "").replace(" ", "").lower()
    if key in _ALIASES:
        return _ALIASES[key]
    raise ConfigError(f"unknown model kind {kind!r}; choose from {sorted(KINDS)}", "kind")


def _number(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"must be a number, got {value!r}", name)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError("must be finite", name)
    return value


@dataclass(frozen=True)
class ModelSpec:
    """A coupled CTRW model.

    Parameters
    ----------
    kind : str
        One of ``uncoupled-gaussian``, ``uncoupled-stable``, ``levy-walk``,
        ``gaussian-coupled``, ``drifted-subordinator``, ``pure-drift``.
    beta : float
        Stability index of the waiting times, in (0, 1). Ignored by
        ``pure-drift``.
    alpha : float
        Stability index of symmetric stable jumps, in (0, 2].
    gamma : float
        Clock drift; must be positive for the drifted and pure-drift models
        and zero otherwise.
    sigma2 : float, optional
        Variance of the Brownian component of B per unit operational time.
        Defaults to 1 for ``uncoupled-gaussian`` and 0 otherwise.
    weight : float
        Mixing weight of the stable clock part in ``drifted-subordinator``.
    sign_mode : {"deterministic", "symmetric"}
        Jump direction of the Levy walk.
    b : tuple of float
        Drift of B, length ``d``.
    d : int
        Spatial dimension.
    wait_law : {"pareto", "stable"}
        Raw waiting-time law: Pareto with ``P(W > w) = w**-beta`` for
        ``w >= 1``, or positive stable with Laplace transform
        ``exp(-s**beta)``.
    jump_law : {"normal", "rademacher"}
        Raw jumps of ``uncoupled-gaussian``: Normal(0, sigma2) or
        ``+-sqrt(sigma2)`` with equal probability. Both have the same
        Brownian limit; the lattice law approaches it only at rate
        ``n**-1/2``.
    """

    kind: str
    beta: float = 0.5
    alpha: float = 2.0
    gamma: float = 0.0
    sigma2: float | None = None
    weight: float = 1.0
    sign_mode: str = "deterministic"
    b: tuple = field(default=())
    d: int = 1
    wait_law: str = "pareto"
    jump_law: str = "normal"

    def __post_init__(self):
        kind = _canonical_kind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.sigma2 is None:
            object.__setattr__(self, "sigma2", 1.0 if kind == "uncoupled-gaussian" else 0.0)
        for name in ("beta", "alpha", "gamma", "sigma2", "weight"):
            object.__setattr__(self, name, _number(getattr(self, name), name))
        d = self.d
        if isinstance(d, bool) or not isinstance(d, (int, np.integer)) or d < 1:
            raise ConfigError(f"must be a positive integer, got {d!r}", "d")
        object.__setattr__(self, "d", int(d))
        b = self.b
        if b is None or (not isinstance(b, (str, bytes)) and len(b) == 0):
            b = (0.0,) * self.d
        if isinstance(b, (int, float)):
            b = (b,)
        b = tuple(_number(v, "b") for v in b)
        if len(b) != self.d:
            raise ConfigError(f"has length {len(b)} but d = {self.d}", "b")
        object.__setattr__(self, "b", b)
        self._validate()

    def _validate(self):
        kind = self.kind
        if kind != "pure-drift" and not 0.0 < self.beta < 1.0:
            raise ConfigError(f"must lie in (0, 1), got {self.beta}", "beta")
        if not 0.0 < self.alpha <= 2.0:
            raise ConfigError(f"must lie in (0, 2], got {self.alpha}", "alpha")
        if self.gamma < 0.0:
            raise ConfigError(f"must be >= 0, got {self.gamma}", "gamma")
        if kind in ("drifted-subordinator", "pure-drift"):
            if self.gamma <= 0.0:
                raise ConfigError(f"must be > 0 for {kind}", "gamma")
        elif self.gamma != 0.0:
            raise ConfigError(f"is not supported for {kind}; use drifted-subordinator", "gamma")
        if self.sigma2 < 0.0:
            raise ConfigError(f"must be >= 0, got {self.sigma2}", "sigma2")
        if self.sigma2 > 0.0 and kind not in ("uncoupled-gaussian", "drifted-subordinator",
                                              "pure-drift"):
            raise ConfigError(f"a Brownian component is not available for {kind}", "sigma2")
        if not 0.0 <= self.weight <= 1.0:
            raise ConfigError(f"must lie in [0, 1], got {self.weight}", "weight")
        if self.weight != 1.0 and kind != "drifted-subordinator":
            raise ConfigError("only applies to drifted-subordinator", "weight")
        if self.sign_mode not in ("deterministic", "symmetric"):
            raise ConfigError(f"must be 'deterministic' or 'symmetric', got {self.sign_mode!r}",
                              "sign_mode")
        if self.sign_mode != "deterministic" and kind != "levy-walk":
            raise ConfigError("only applies to levy-walk", "sign_mode")
        if kind == "levy-walk" and self.d != 1:
            raise ConfigError("levy-walk requires d = 1", "d")
        if self.alpha != 2.0 and kind != "uncoupled-stable":
            raise ConfigError("only applies to uncoupled-stable", "alpha")
        if self.jump_law not in ("normal", "rademacher"):
            raise ConfigError(f"must be 'normal' or 'rademacher', got {self.jump_law!r}",
                              "jump_law")
        if self.jump_law != "normal" and kind != "uncoupled-gaussian":
            raise ConfigError("only applies to uncoupled-gaussian", "jump_law")
        if self.wait_law not in ("pareto", "stable"):
            raise ConfigError(f"must be 'pareto' or 'stable', got {self.wait_law!r}", "wait_law")

    # ------------------------------------------------------------ serialization
    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ModelSpec":
        """Build a model from its JSON object, rejecting unknown keys."""
        if not isinstance(data, dict):
            raise ConfigError("model must be a JSON object", "model")
        unknown = sorted(set(data) - set(FIELDS))
        if unknown:
            raise ConfigError(f"unknown model field(s) {unknown}", unknown[0])
        if "kind" not in data:
            raise ConfigError("missing", "kind")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}", "model") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["b"] = list(self.b)
        return out

    def fingerprint(self) -> str:
        """Canonical JSON text identifying the model."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    # ------------------------------------------------------------ scaling
    @property
    def code(self) -> int:
        return KINDS[self.kind]

    @property
    def scaling_exponents(self) -> tuple[float, float]:
        """Per-row exponents (jump, wait): row n uses factors n**-e."""
        if self.kind == "pure-drift":
            return 0.5, 1.0
        if self.kind == "uncoupled-stable":
            return 1.0 / self.alpha, 1.0 / self.beta
        if self.kind == "levy-walk":
            return 1.0 / self.beta, 1.0 / self.beta
        if self.kind == "gaussian-coupled":
            return 0.5 / self.beta, 1.0 / self.beta
        return 0.5, 1.0 / self.beta

    @property
    def wait_constant(self) -> float:
        """Constant c with c * W in the domain of attraction of exp(-s**beta).

        Pareto waits have ``E exp(-s W / m**(1/beta))**m -> exp(-Gamma(1-beta) s**beta)``,
        so they are divided by ``Gamma(1-beta)**(1/beta)``.
        """
        if self.kind == "pure-drift" or self.wait_law == "stable":
            return 1.0
        return special.gamma(1.0 - self.beta) ** (-1.0 / self.beta)

    @property
    def has_clock_jumps(self) -> bool:
        if self.kind == "pure-drift":
            return False
        if self.kind == "drifted-subordinator":
            return self.weight > 0.0
        return True

    @property
    def has_continuous_position(self) -> bool:
        """Whether B has a part that moves between clock jumps."""
        if any(v != 0.0 for v in self.b):
            return True
        if self.kind == "uncoupled-stable":
            return True
        return self.kind in ("uncoupled-gaussian", "drifted-subordinator", "pure-drift") \
            and self.sigma2 > 0.0

    def kernel_args(self):
        """(code, params, b) as consumed by the compiled samplers."""
        P = np.zeros(K.N_PARAMS)
        P[K.BETA] = self.beta
        P[K.ALPHA] = self.alpha
        P[K.GAMMA] = self.gamma
        P[K.SIGMA2] = self.sigma2
        P[K.WEIGHT] = self.weight
        P[K.SYMMETRIC] = 1.0 if self.sign_mode == "symmetric" else 0.0
        P[K.WAIT_STABLE] = 1.0 if self.wait_law == "stable" else 0.0
        P[K.LATTICE] = 1.0 if self.jump_law == "rademacher" else 0.0
        jexp, wexp = self.scaling_exponents
        cw = self.wait_constant
        if self.kind == "drifted-subordinator":
            cw = self.weight ** (1.0 / self.beta) * cw
        cj = 1.0
        if self.kind == "levy-walk":
            cj = cw
        elif self.kind == "gaussian-coupled":
            cj = math.sqrt(cw)
        P[K.C_J] = cj
        P[K.C_W] = cw
        P[K.J_EXP] = jexp
        P[K.W_EXP] = wexp
        P[K.HAS_CONT] = 1.0 if self.has_continuous_position else 0.0
        P[K.HAS_JUMP] = 1.0 if self.has_clock_jumps else 0.0
        return self.code, P, np.asarray(self.b, dtype=float)


def model_from_any(obj) -> ModelSpec:
    """Accept a ModelSpec, a dict or JSON text."""
    if isinstance(obj, ModelSpec):
        return obj
    if isinstance(obj, str):
        return ModelSpec.from_json(obj)
    return ModelSpec.from_dict(obj)


# ------------------------------------------------------------------ samplers

def _check_rng(rng):
    if not isinstance(rng, np.random.Generator):
        raise ConfigError("expected a numpy.random.Generator", "rng")
    return rng


def sample_pair(model: ModelSpec, rng: np.random.Generator):
    """Draw one raw pair (J, W).

    Returns
    -------
    J : ndarray, shape (d,)
    W : float
    """
    _check_rng(rng)
    code, P, _ = model.kernel_args()
    j = np.empty(model.d)
    w = K.raw_pair(rng, code, P[K.WAIT_STABLE] != 0, P[K.SYMMETRIC] != 0, P, model.d, j,
                  P[K.LATTICE] != 0)
    if model.kind == "drifted-subordinator":
        w = model.gamma + model.weight ** (1.0 / model.beta) * w
    return j, w


def sample_pairs(model: ModelSpec, size: int, rng: np.random.Generator):
    """``size`` raw pairs as arrays of shape (size, d) and (size,).

    Consumes ``rng`` exactly as ``size`` calls of ``sample_pair`` would.
    """
    _check_rng(rng)
    code, P, _ = model.kernel_args()
    J, W = K.raw_pairs(rng, code, P[K.WAIT_STABLE] != 0, P[K.SYMMETRIC] != 0, P, model.d,
                       P[K.LATTICE] != 0, int(size))
    if model.kind == "drifted-subordinator":
        W = model.gamma + model.weight ** (1.0 / model.beta) * W
    return J, W


def stable_subordinator_increment(beta, scale, rng, size=None):
    """Positive stable variate(s) with Laplace transform ``exp(-scale * s**beta)``."""
    beta = _number(beta, "beta")
    scale = _number(scale, "scale")
    if not 0.0 < beta < 1.0:
        raise ConfigError(f"must lie in (0, 1), got {beta}", "beta")
    if scale <= 0.0:
        raise ConfigError(f"must be > 0, got {scale}", "scale")
    _check_rng(rng)
    if size is None:
        return K.positive_stable(rng, beta, scale)
    return K.positive_stable_many(rng, beta, scale, int(size))


def symmetric_stable_increment(alpha, scale, rng, size=None):
    """Symmetric stable variate(s) with characteristic function ``exp(-scale |k|**alpha)``."""
    alpha = _number(alpha, "alpha")
    if not 0.0 < alpha <= 2.0:
        raise ConfigError(f"must lie in (0, 2], got {alpha}", "alpha")
    _check_rng(rng)
    if size is None:
        return K.symmetric_stable(rng, alpha, float(scale))
    return K.symmetric_stable_many(rng, alpha, float(scale), int(size))


# ------------------------------------------------------- limit characteristics

def _stable_weight(model):
    if model.kind == "pure-drift":
        return 0.0
    if model.kind == "drifted-subordinator":
        return model.weight
    return 1.0


def tail_function(model: ModelSpec, a):
    """Tail of the clock Levy measure, ``Pi(R^d x (a, inf))``.

    Equals ``w a**-beta / Gamma(1 - beta)`` for the stable clock with weight
    ``w`` and is infinite at ``a = 0``.
    """
    a = np.asarray(a, dtype=float)
    if np.any(a < 0):
        raise ConfigError("must be >= 0", "a")
    w = _stable_weight(model)
    if w == 0.0:
        out = np.zeros_like(a)
    else:
        with np.errstate(divide="ignore"):
            out = w * a ** (-model.beta) / special.gamma(1.0 - model.beta)
        out = np.where(a == 0.0, np.inf, out)
    return out[()] if out.ndim == 0 else out


def levy_density(model: ModelSpec, w):
    """Density of the clock Levy measure, ``beta w**(-1-beta) / Gamma(1-beta)`` scaled by the weight."""
    w = np.asarray(w, dtype=float)
    c = _stable_weight(model)
    if c == 0.0:
        out = np.zeros_like(w)
    else:
        with np.errstate(divide="ignore"):
            out = c * model.beta * w ** (-1.0 - model.beta) / special.gamma(1.0 - model.beta)
        out = np.where(w > 0.0, out, 0.0)
    return out[()] if out.ndim == 0 else out


def renewal_density(model: ModelSpec, s):
    """Density ``u_S`` of the clock marginal of the potential measure.

    Closed forms: ``s**(beta-1) / Gamma(beta)`` for a pure stable clock,
    ``1 / gamma`` for a pure drift, and for a drifted clock with
    ``beta = 1/2`` the function ``erfcx(c sqrt(s)) / gamma`` with
    ``c = weight / gamma``.

    Raises
    ------
    UnsupportedModelError
        For a drifted clock with ``beta != 1/2``; invert ``1/psi(0, s)``
        numerically instead (see ``laws.renewal_density_numeric``).
    """
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ConfigError("must be > 0", "s")
    w = _stable_weight(model)
    if model.gamma == 0.0:
        out = s ** (model.beta - 1.0) / special.gamma(model.beta)
    elif w == 0.0:
        out = np.full_like(s, 1.0 / model.gamma)
    elif model.beta == 0.5:
        out = special.erfcx((w / model.gamma) * np.sqrt(s)) / model.gamma
    else:
        raise UnsupportedModelError(
            f"no closed-form renewal density for {model.kind} with beta={model.beta}")
    return out[()] if out.ndim == 0 else out


def laplace_exponent(model: ModelSpec, s):
    """``psi(0, s)`` of the clock, ``gamma s + w s**beta``."""
    s = np.asarray(s, dtype=float)
    out = model.gamma * s + _stable_weight(model) * s ** model.beta
    return out[()] if out.ndim == 0 else out


def psi(model: ModelSpec, k, s) -> complex:
    """Levy exponent ``psi(k, s)`` of the limit (B, S)."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if k.shape != (model.d,):
        raise ConfigError(f"k must have length {model.d}", "k")
    s = float(s)
    if s < 0:
        raise ConfigError("must be >= 0", "s")
    kind = model.kind
    drift = -1j * float(np.dot(model.b, k))
    k2 = float(np.dot(k, k))
    if kind == "levy-walk":
        z = complex(s, -k[0]) ** model.beta
        if model.sign_mode == "symmetric":
            z = 0.5 * (z + complex(s, k[0]) ** model.beta)
        return drift + z
    if kind == "gaussian-coupled":
        return drift + complex(s + 0.5 * k2) ** model.beta
    out = drift + 0.5 * model.sigma2 * k2 + model.gamma * s
    if kind == "uncoupled-stable":
        out += float(np.sum(np.abs(k) ** model.alpha))
    if kind != "pure-drift":
        out += _stable_weight(model) * s ** model.beta
    return complex(out)
