import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from _zoo import ALL_MODELS, model_id
from ctrwlimit.errors import ConfigError, UnsupportedModelError
from ctrwlimit.models import (
    ModelSpec, levy_density, model_from_any, psi, renewal_density, sample_pair, sample_pairs,
    stable_subordinator_increment, symmetric_stable_increment, tail_function,
)


def rng(seed=0):
    return np.random.Generator(np.random.Philox(seed))


# ----------------------------------------------------------- construction

@pytest.mark.parametrize("alias", ["UncoupledGaussian", "uncoupled_gaussian", "uncoupled-gaussian"])
def test_kind_aliases(alias):
    assert ModelSpec(alias).kind == "uncoupled-gaussian"


@pytest.mark.parametrize("kwargs, field", [
    (dict(kind="uncoupled-gaussian", beta=1.5), "beta"),
    (dict(kind="uncoupled-gaussian", beta=0.0), "beta"),
    (dict(kind="uncoupled-stable", alpha=2.5), "alpha"),
    (dict(kind="levy-walk", gamma=1.0), "gamma"),
    (dict(kind="drifted-subordinator"), "gamma"),
    (dict(kind="levy-walk", sigma2=1.0), "sigma2"),
    (dict(kind="levy-walk", sign_mode="sideways"), "sign_mode"),
    (dict(kind="levy-walk", d=2, b=(0.0, 0.0)), "d"),
    (dict(kind="uncoupled-gaussian", d=2, b=(1.0,)), "b"),
    (dict(kind="levy-walk", jump_law="rademacher"), "jump_law"),
    (dict(kind="teleport"), "kind"),
])
def test_invalid_parameters_name_the_field(kwargs, field):
    with pytest.raises(ConfigError) as exc:
        ModelSpec(**kwargs)
    assert exc.value.field == field
    assert field in str(exc.value)


def test_from_dict_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="colour"):
        ModelSpec.from_dict({"kind": "levy-walk", "colour": "red"})


def test_driftless_clocks_have_infinite_activity():
    # the compound Poisson case (finite tail at 0 without drift) is not representable
    with pytest.raises(ConfigError):
        ModelSpec("drifted-subordinator", gamma=0.0, weight=1.0)
    for m in ALL_MODELS:
        if m.gamma == 0.0:
            assert tail_function(m, 0.0) == math.inf


@given(beta=st.floats(0.05, 0.95), d=st.integers(1, 3), sigma2=st.floats(0.0, 4.0))
def test_json_round_trip(beta, d, sigma2):
    m = ModelSpec("uncoupled-gaussian", beta=beta, d=d, sigma2=sigma2, b=[0.5] * d)
    again = model_from_any(m.fingerprint())
    assert again == m
    assert again.fingerprint() == m.fingerprint()


def test_scaling_exponents():
    assert ModelSpec("uncoupled-stable", alpha=1.5, beta=0.6).scaling_exponents == (1 / 1.5, 1 / 0.6)
    assert ModelSpec("uncoupled-gaussian", beta=0.4).scaling_exponents == (0.5, 2.5)
    assert ModelSpec("gaussian-coupled", beta=0.5).scaling_exponents == (1.0, 2.0)


# ------------------------------------------------------------- samplers

def test_levy_walk_pairs_are_equal():
    J, W = sample_pairs(ModelSpec("levy-walk", beta=0.7), 10_000, rng(1))
    assert np.all(W > 0)
    assert np.array_equal(J[:, 0], W)


def test_pareto_wait_median():
    _, W = sample_pairs(ModelSpec("uncoupled-gaussian", beta=0.5), 100_000, rng(2))
    assert np.median(W) == pytest.approx(4.0, rel=0.05)


def test_gaussian_coupled_conditional_variance():
    J, W = sample_pairs(ModelSpec("gaussian-coupled", beta=0.5), 1_000_000, rng(3))
    edges = np.quantile(W, [0.0, 0.2, 0.4, 0.6, 0.8])
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (W >= lo) & (W < hi)
        assert np.var(J[sel, 0]) == pytest.approx(np.mean(W[sel]), rel=0.05)


def test_rademacher_jumps():
    J, _ = sample_pairs(ModelSpec("uncoupled-gaussian", sigma2=4.0, jump_law="rademacher"),
                        10_000, rng(4))
    assert set(np.unique(J)) == {-2.0, 2.0}
    assert abs(np.mean(J > 0) - 0.5) < 0.02


def test_sample_pair_stream_determinism():
    for m in ALL_MODELS:
        a = [sample_pair(m, r) for r in [rng(7)] for _ in range(3)]
        b = [sample_pair(m, r) for r in [rng(7)] for _ in range(3)]
        for (ja, wa), (jb, wb) in zip(a, b):
            assert wa == wb and np.array_equal(ja, jb)


@pytest.mark.parametrize("beta", [0.3, 0.5, 0.7])
def test_stable_laplace_transform(beta):
    S = stable_subordinator_increment(beta, 1.0, rng(5), size=1_000_000)
    assert np.all(S > 0)
    for s in (0.5, 1.0, 2.0):
        assert np.mean(np.exp(-s * S)) == pytest.approx(math.exp(-s**beta), rel=0.005)


def test_stable_half_median():
    S = stable_subordinator_increment(0.5, 1.0, rng(6), size=200_000)
    # P(S <= x) = erfc(1 / (2 sqrt x)) solves to x = 1 / (4 erfcinv(1/2)**2)
    median = 1.0 / (4.0 * special.erfcinv(0.5) ** 2)
    assert median == pytest.approx(1.099, abs=1e-3)
    assert np.median(S) == pytest.approx(median, rel=0.02)


def test_stable_near_one_concentrates():
    # the law tends to a point mass at 1; its tail mass is of order 1 - beta
    S = stable_subordinator_increment(0.999, 1.0, rng(8), size=10_000)
    q25, q50, q75 = np.quantile(S, [0.25, 0.5, 0.75])
    assert abs(q50 - 1.0) < 0.01 and q75 - q25 < 0.01


def test_stable_scaling_with_scale():
    a = stable_subordinator_increment(0.4, 1.0, rng(9), size=1000)
    b = stable_subordinator_increment(0.4, 3.0, rng(9), size=1000)
    assert np.allclose(b, 3.0 ** (1 / 0.4) * a, rtol=1e-12)


@pytest.mark.parametrize("alpha", [0.8, 1.0, 1.5, 2.0])
def test_symmetric_stable_characteristic_function(alpha):
    X = symmetric_stable_increment(alpha, 1.0, rng(10), size=400_000)
    for k in (0.5, 1.0):
        assert np.mean(np.cos(k * X)) == pytest.approx(math.exp(-k**alpha), abs=4e-3)


# ------------------------------------------------------- characteristics

def test_tail_function_values():
    m = ModelSpec("uncoupled-gaussian", beta=0.5)
    assert tail_function(m, 1.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-12)
    assert tail_function(m, 0.0) == math.inf
    a = np.geomspace(1e-3, 1e6, 50)
    v = tail_function(m, a)
    assert np.all(np.diff(v) < 0) and v[-1] < 1e-3


def test_levy_density_integrates_to_tail():
    m = ModelSpec("levy-walk", beta=0.7)
    val, _ = integrate.quad(lambda w: levy_density(m, w), 0.5, np.inf)
    assert val == pytest.approx(tail_function(m, 0.5), rel=1e-8)


def test_renewal_density_values():
    assert renewal_density(ModelSpec("levy-walk", beta=0.5), 1.0) == pytest.approx(
        1 / math.sqrt(math.pi), rel=1e-12)
    assert renewal_density(ModelSpec("pure-drift", gamma=2.0), 3.7) == 0.5
    # erfcx form of the inverse transform of 1 / (s + sqrt s) at t = 1
    u = renewal_density(ModelSpec("drifted-subordinator", beta=0.5, gamma=1.0), 1.0)
    assert u == pytest.approx(0.4275835762, rel=1e-9)


@pytest.mark.parametrize("model", [ModelSpec("levy-walk", beta=0.5),
                                   ModelSpec("levy-walk", beta=0.3),
                                   ModelSpec("drifted-subordinator", beta=0.5, gamma=1.0)])
def test_renewal_density_laplace_transform(model):
    for s in (0.5, 2.0):
        val, _ = integrate.quad(lambda x: math.exp(-s * x) * renewal_density(model, x), 0, np.inf,
                                limit=200)
        assert val == pytest.approx(1 / psi(model, 0.0, s).real, rel=1e-6)
    if model.beta == 0.5 and model.gamma == 0:
        assert 1 / psi(model, 0.0, 2.0).real == pytest.approx(0.7071, abs=1e-4)


def test_renewal_density_unsupported():
    with pytest.raises(UnsupportedModelError):
        renewal_density(ModelSpec("drifted-subordinator", beta=0.3, gamma=1.0), 1.0)


def test_psi_examples():
    for m in ALL_MODELS:
        assert psi(m, 0.0, 0.0) == 0
    assert psi(ModelSpec("levy-walk", beta=0.5), 0.0, 4.0) == pytest.approx(2.0)
    assert psi(ModelSpec("pure-drift", gamma=3.0), 0.0, 2.0) == pytest.approx(6.0)


@given(k=st.floats(-5, 5), s=st.floats(0, 5))
@settings(max_examples=50)
def test_psi_real_part_nonnegative(k, s):
    for m in ALL_MODELS:
        assert psi(m, k, s).real >= -1e-12


def pareto_row_exponent(beta, z, n):
    """n (1 - E exp(-z W)) for Pareto W with P(W > w) = w**-beta, by quadrature in log w."""
    def part(f):
        return integrate.quad(lambda y: f(1 - np.exp(-z * np.exp(y))) * beta * np.exp(-beta * y),
                              0.0, 40.0 / beta, limit=500)[0]
    return n * complex(part(np.real), part(np.imag))


@pytest.mark.parametrize("model", [
    ModelSpec("levy-walk", beta=0.3), ModelSpec("levy-walk", beta=0.7),
    ModelSpec("levy-walk", beta=0.5, sign_mode="symmetric"),
    ModelSpec("gaussian-coupled", beta=0.6), ModelSpec("uncoupled-gaussian", beta=0.4),
], ids=model_id)
def test_triangular_array_premise(model):
    # n (1 - E exp(i k J^n - s W^n)) approaches psi(k, s), with the row factors of the kernels
    from ctrwlimit import _kernels as K
    _, P, _ = model.kernel_args()
    k, s = 0.7, 1.3
    errs = []
    for n in (10, 100_000):
        fj, fw = K.row_factors(P, float(n))
        if model.kind == "levy-walk":
            zs = [s * fw - 1j * k * fj]
            if model.sign_mode == "symmetric":
                zs.append(s * fw + 1j * k * fj)
            val = sum(pareto_row_exponent(model.beta, z, n) for z in zs) / len(zs)
        elif model.kind == "gaussian-coupled":
            val = pareto_row_exponent(model.beta, s * fw + 0.5 * (k * fj) ** 2, n)
        else:
            # clock only; the Gaussian jump part is exact at every n
            val = pareto_row_exponent(model.beta, s * fw, n) + 0.5 * model.sigma2 * k * k
        errs.append(abs(val - psi(model, k, s)) / abs(psi(model, k, s)))
    assert errs[1] < errs[0]
    assert errs[1] < 1e-2
