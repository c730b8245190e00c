import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from ctrwlimit import laws
from ctrwlimit.errors import ConfigError, NumericalError, UnsupportedModelError
from ctrwlimit.models import ModelSpec, renewal_density
from ctrwlimit.stats import ks_distance

HALF = ModelSpec("levy-walk", beta=0.5)
DRIFTED = ModelSpec("drifted-subordinator", beta=0.5, gamma=1.0)


# ----------------------------------------------------------------- age law

def test_arcsine_density_at_midpoint():
    assert laws.age_density(HALF, 1.0, 0.5) == pytest.approx(2 / math.pi, rel=1e-12)
    assert laws.age_density(HALF, 1.0, 0.0) == 0.0
    assert laws.age_density(HALF, 1.0, 1.2) == 0.0


@pytest.mark.parametrize("model", [ModelSpec("levy-walk", beta=0.7),
                                   ModelSpec("uncoupled-gaussian", beta=0.3), DRIFTED])
def test_age_law_has_unit_mass(model):
    body, _ = integrate.quad(lambda a: laws.age_density(model, 2.0, a), 0, 2.0, limit=200)
    assert body + laws.atom_mass_R0(model, 2.0) == pytest.approx(1.0, abs=1e-6)


def test_age_cdf_is_generalized_arcsine():
    a = np.linspace(0, 1, 11)
    beta = 0.3
    m = ModelSpec("levy-walk", beta=beta)
    assert np.allclose(laws.age_cdf(m, 1.0, a), special.betainc(1 - beta, beta, a), atol=1e-14)


def test_age_cdf_with_drift_starts_at_the_atom():
    atom = laws.atom_mass_R0(DRIFTED, 1.0)
    assert laws.age_cdf(DRIFTED, 1.0, 0.0) == pytest.approx(atom, rel=1e-12)
    assert laws.age_cdf(DRIFTED, 1.0, 1.0) == 1.0
    assert laws.age_cdf(DRIFTED, 1.0, -0.1) == 0.0


def test_age_needs_one_dimension():
    with pytest.raises(UnsupportedModelError):
        laws.age_density(ModelSpec("uncoupled-gaussian", d=2, b=(0.0, 0.0)), 1.0, 0.5)


# --------------------------------------------------------- joint (A, R) law

def test_joint_density_desk_value():
    assert laws.joint_ar_density(HALF, 1.0, 0.5, 0.5) == pytest.approx(0.2251, abs=1e-4)
    # u(1/2) nu(1) in closed form
    exact = (0.5 ** -0.5 / math.sqrt(math.pi)) * (0.5 / math.sqrt(math.pi))
    assert laws.joint_ar_density(HALF, 1.0, 0.5, 0.5) == pytest.approx(exact, rel=1e-12)


@pytest.mark.parametrize("a", [0.1, 0.5, 0.9])
def test_marginalizing_r_recovers_age(a):
    val, _ = integrate.quad(lambda r: laws.joint_ar_density(HALF, 1.0, a, r), 0, np.inf)
    assert val == pytest.approx(laws.age_density(HALF, 1.0, a), abs=1e-4)


def test_cell_average_matches_dblquad():
    m = ModelSpec("levy-walk", beta=0.7)
    ref, _ = integrate.dblquad(lambda r, a: laws.joint_ar_density(m, 1.0, a, r), 0.2, 0.3, 0.4, 0.6)
    assert laws.joint_ar_cell_average(m, 1.0, 0.2, 0.3, 0.4, 0.6) == pytest.approx(ref / 0.02,
                                                                                  rel=1e-7)


def test_joint_grid_mass():
    g = laws.joint_ar_grid(HALF, 1.0, bins=10, r_max=50.0, r_bins=200)
    # what is missing is P(R > 50), which is of order 50 ** -1/2
    tail = 1.0 - g.total_mass
    assert 0 < tail < 0.1


# ------------------------------------------------------------------ atom

def test_atom_values():
    assert laws.atom_mass_R0(HALF, 1.0) == 0.0
    assert laws.atom_mass_R0(ModelSpec("pure-drift", gamma=2.0), 1.0) == 1.0
    assert laws.atom_mass_R0(DRIFTED, 1.0) == pytest.approx(0.4275835762, rel=1e-9)
    via_laplace = laws.atom_mass_R0(DRIFTED, 1.0, method="laplace")
    assert via_laplace == pytest.approx(0.4275835762, rel=1e-6)


def test_atom_by_inversion_when_no_closed_form():
    m = ModelSpec("drifted-subordinator", beta=0.3, gamma=0.5)
    val = laws.atom_mass_R0(m, 1.0)
    assert 0 < val < 1
    with pytest.raises(ConfigError):
        laws.atom_mass_R0(m, 1.0, method="bogus")


# -------------------------------------------------------- Laplace inversion

def test_invert_exponential():
    res = laws.laplace_invert(lambda s: 1 / (s + 1), 1.0)
    assert res.value == pytest.approx(math.exp(-1), rel=1e-7)
    assert res.converged and res.order in res.estimates


@pytest.mark.parametrize("beta", [0.3, 0.5, 0.7])
def test_invert_power(beta):
    for t in np.geomspace(0.1, 10, 7):
        res = laws.laplace_invert(lambda s: mpmath.power(s, -beta), t)
        assert res.value == pytest.approx(t ** (beta - 1) / math.gamma(beta), rel=1e-6)


def test_inversion_failure_carries_diagnostics():
    # a transform with an oscillating inverse defeats Gaver-Stehfest
    with pytest.raises(NumericalError) as exc:
        laws.laplace_invert(lambda s: 1 / (s * s + 400), 3.0, orders=(8, 16))
    assert "estimates" in exc.value.diagnostics


def test_renewal_density_numeric_matches_closed_form():
    res = laws.renewal_density_numeric(DRIFTED, 1.0)
    assert res.value == pytest.approx(float(renewal_density(DRIFTED, 1.0)), rel=1e-6)


def test_tauberian_ratios_approach_one():
    ratios = [laws.tauberian_ratio(DRIFTED, eps) for eps in (1e-1, 1e-2, 1e-3)]
    gaps = [abs(r - 1) for r in ratios]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.05
    with pytest.raises(ConfigError):
        laws.tauberian_ratio(HALF, 1e-2)


# ---------------------------------------------------------------- grids

def test_age_grid_values(tmp_path):
    g = laws.age_grid(HALF, 1.0, bins=200)
    centers = g.axes[0].centers
    i = np.argmin(abs(centers - 0.5))
    assert g.values[i] == pytest.approx(0.6366, abs=1e-4)
    assert g.total_mass == pytest.approx(1.0, abs=1e-12)
    g.write(tmp_path)
    assert (tmp_path / "law.csv").read_text().splitlines()[0] == "a,density"
    assert '"atom_at_zero": 0.0' in (tmp_path / "law.json").read_text()


def test_age_grid_with_atom_sums_to_one():
    g = laws.age_grid(DRIFTED, 1.0, bins=50)
    assert g.total_mass + g.atom_at_zero == pytest.approx(1.0, abs=1e-8)


@given(t=st.floats(0.1, 10.0), beta=st.floats(0.1, 0.9))
@settings(max_examples=25, deadline=None)
def test_age_grid_mass_property(t, beta):
    g = laws.age_grid(ModelSpec("levy-walk", beta=beta), t, bins=20)
    assert g.total_mass == pytest.approx(1.0, abs=1e-10)
    assert np.all(g.values >= 0)


# --------------------------------------------------------- position law

def test_lagging_position_cdf_against_direct_draws():
    m = ModelSpec("uncoupled-gaussian", beta=0.5, sigma2=2.0, b=(0.3,))
    rng = np.random.default_rng(0)
    L = math.sqrt(2.0) * abs(rng.standard_normal(200_000))
    X = 0.3 * L + np.sqrt(2.0 * L) * rng.standard_normal(L.size)
    assert ks_distance(X, lambda x: laws.lagging_position_cdf(m, 1.0, x)) < 0.005


def test_lagging_position_cdf_shape():
    m = ModelSpec("uncoupled-gaussian", beta=0.5)
    assert laws.lagging_position_cdf(m, 1.0, 0.0) == pytest.approx(0.5, abs=1e-12)
    x = np.linspace(-5, 5, 101)
    F = laws.lagging_position_cdf(m, 2.0, x)
    assert np.all(np.diff(F) > 0) and F[0] < 0.01 and F[-1] > 0.99


@pytest.mark.parametrize("model", [ModelSpec("uncoupled-gaussian", beta=0.6),
                                   ModelSpec("levy-walk", beta=0.5),
                                   ModelSpec("uncoupled-gaussian", beta=0.5, sigma2=0.0)])
def test_lagging_position_cdf_unsupported(model):
    with pytest.raises(UnsupportedModelError):
        laws.lagging_position_cdf(model, 1.0, 0.0)

