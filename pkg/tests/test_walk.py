import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _zoo import ALL_MODELS, model_id

from ctrwlimit.errors import BudgetError, ConfigError, HorizonError
from ctrwlimit.models import ModelSpec, sample_pair, sample_pairs
from ctrwlimit.seeding import BLOCK_SIZE, block_rng
from ctrwlimit.walk import (
    CTRWRealization, build_row_sum, ctrw_batch, ctrw_state, ctrw_states, matching_audit,
    renewal_count, scaled_step,
)
from ctrwlimit.paths import StepPath


def realization_from(jumps, waits, n, horizon):
    jumps = np.asarray(jumps, float).reshape(len(waits), -1)
    waits = np.asarray(waits, float)
    times = np.arange(len(waits) + 1) / n
    pos = np.vstack([np.zeros(jumps.shape[1]), np.cumsum(jumps, axis=0)])
    clk = np.concatenate(([0.0], np.cumsum(waits)))
    return CTRWRealization(n, jumps, waits, StepPath(times, pos, clk, horizon, validate=False))


# ---------------------------------------------------------- renewal count

def test_renewal_count_examples():
    assert renewal_count([0.5, 1.0], 0.2) == 0
    assert renewal_count([0.5, 1.0], 0.5) == 1  # boundary inclusive
    assert renewal_count([0.5, 1.0], 1.49) == 1
    with pytest.raises(HorizonError):
        renewal_count([0.5, 1.0], 1.5)
    with pytest.raises(ConfigError):
        renewal_count([0.5, 0.0, 1.0], 0.1)


def test_renewal_count_vs_linear_scan():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        w = rng.exponential(size=rng.integers(1, 20))
        t = rng.uniform(0, w.sum())
        total, count = 0.0, 0
        for wi in w:
            total += wi
            if total <= t:
                count += 1
            else:
                break
        assert renewal_count(w, t) == count


# ---------------------------------------------------------------- row sum

def test_row_sum_floor_arithmetic():
    real = realization_from([[1.0], [2.0]], [0.3, 0.9], n=2, horizon=1.0)
    path = real.row_sum
    assert path.eval(0.49)[1] == 0.0
    assert path.eval(0.5)[1] == 0.3
    assert path.eval(0.0)[1] == 0.0 and path.eval(0.0)[0][0] == 0.0


def test_state_before_first_renewal():
    real = realization_from([[1.0], [2.0]], [0.3, 0.9], n=2, horizon=1.0)
    x, g, y, d = ctrw_state(real, 0.1)
    assert x[0] == 0.0 and g == 0.0 and y[0] == 1.0 and d == 0.3


def test_build_row_sum_generates_past_horizon():
    m = ModelSpec("uncoupled-gaussian", beta=0.5)
    real = build_row_sum(m, 50, 2.0, block_rng(1, 0))
    assert real.row_sum.clocks[-1] > 2.0
    assert real.row_sum.clocks[-2] <= 2.0
    k = len(real.waits)
    assert np.array_equal(real.row_sum.positions[-1], np.cumsum(real.jumps, axis=0)[-1])
    assert np.allclose(real.row_sum.times, np.arange(k + 1) / 50)


def test_budget_error():
    with pytest.raises(BudgetError):
        build_row_sum(ModelSpec("pure-drift", gamma=1.0), 100, 10.0, block_rng(1, 0), max_steps=50)


def test_scaled_step_n1_matches_raw_pair():
    m = ModelSpec("levy-walk", beta=0.7)
    j, w = scaled_step(m, 1, block_rng(3, 0))
    jr, wr = sample_pair(m, block_rng(3, 0))
    assert w == pytest.approx(m.wait_constant * wr, rel=1e-15)
    assert j[0] == w  # J = W survives the scaling


def test_scaled_pareto_tail():
    # P(W^n > w) = P(W > w n**(1/beta) / c) for Pareto raw waits
    m = ModelSpec("uncoupled-gaussian", beta=0.5)
    n, w = 10_000, 1e-6
    Wn = np.array([scaled_step(m, n, r)[1] for r in [block_rng(5, 0)] for _ in range(200_000)])
    _, raw = sample_pairs(m, 200_000, block_rng(6, 0))
    resampled = m.wait_constant * raw / n**2
    from ctrwlimit.stats import ks_distance
    assert ks_distance(Wn, resampled) < 0.01
    expected = (w * n**2 / m.wait_constant) ** -0.5
    assert np.mean(Wn > w) == pytest.approx(expected, rel=0.05)


def test_sample_pairs_matches_sample_pair():
    for m in ALL_MODELS:
        J, W = sample_pairs(m, 5, block_rng(2, 0))
        r = block_rng(2, 0)
        for i in range(5):
            j, w = sample_pair(m, r)
            assert w == W[i] and np.array_equal(j, J[i])


# ------------------------------------------------------- matching identity

@pytest.mark.parametrize("model", ALL_MODELS, ids=model_id)
def test_matching_identity(model):
    rep = matching_audit(model, 20, 17, queries=200)
    assert rep.mismatches == 0
    assert rep.checks == 20 * 202


def test_matching_audit_detects_an_off_by_one(monkeypatch):
    from ctrwlimit import paths
    monkeypatch.setattr(paths.StepPath, "phi_at", paths.StepPath.psi_at)
    rep = matching_audit(ModelSpec("levy-walk", beta=0.7), 5, 1, n=10, queries=10)
    assert rep.mismatches > 0


def test_index_identity_n_L_equals_N_plus_one():
    m = ModelSpec("gaussian-coupled", beta=0.6)
    real = build_row_sum(m, 40, 3.0, block_rng(9, 0))
    for t in np.linspace(0.01, 2.99, 50):
        N = renewal_count(real.waits, t)
        L = real.row_sum.generalized_inverse(t)
        assert round(40 * L) == N + 1


@given(seed=st.integers(0, 2**32), n=st.integers(1, 100), t=st.floats(0.01, 3.0))
@settings(max_examples=40, deadline=None)
def test_state_properties(seed, n, t):
    m = ModelSpec("levy-walk", beta=0.6)
    real = build_row_sum(m, n, 3.0, block_rng(seed, 0))
    x, g, y, d = ctrw_state(real, t)
    assert g <= t < d
    assert x[0] == g and y[0] == d  # X = G and Y = D as reals
    N = renewal_count(real.waits, t)
    assert d - g == pytest.approx(real.waits[N], rel=1e-12, abs=1e-15)
    # monotone in t
    x2, g2, y2, d2 = ctrw_state(real, min(3.0, t + 0.1))
    assert g2 >= g and d2 >= d


def test_ctrw_states_vectorised_matches_scalar():
    m = ModelSpec("uncoupled-stable", beta=0.6, alpha=1.2)
    real = build_row_sum(m, 30, 2.0, block_rng(4, 0))
    ts = np.linspace(0, 2.0, 41)
    N, X, G, Y, D = ctrw_states(real, ts)
    for i, t in enumerate(ts):
        x, g, y, d = ctrw_state(real, t)
        assert g == G[i] and d == D[i] and np.array_equal(x, X[i]) and np.array_equal(y, Y[i])


# ------------------------------------------------------------------ batches

def test_batch_replica_zero_equals_reference_route():
    for m in ALL_MODELS:
        b = ctrw_batch(m, 25, 1.3, 3, 99)
        real = build_row_sum(m, 25, 1.3, block_rng(99, 0))
        x, g, y, d = ctrw_state(real, 1.3)
        assert b.G[0] == g and b.D[0] == d
        assert np.array_equal(b.X[0], x) and np.array_equal(b.Y[0], y)


def test_batch_determinism_and_ranges():
    m = ModelSpec("gaussian-coupled", beta=0.5)
    full = ctrw_batch(m, 20, 1.0, 700, 5)
    again = ctrw_batch(m, 20, 1.0, 700, 5, threads=3)
    for f in ("X", "G", "Y", "D", "N"):
        assert np.array_equal(getattr(full, f), getattr(again, f))
    part = ctrw_batch(m, 20, 1.0, 300, 5, start=300)
    assert np.array_equal(part.G, full.G[300:600])
    assert np.array_equal(part.X, full.X[300:600])


def test_batch_matches_block_draws():
    m = ModelSpec("uncoupled-gaussian", beta=0.5)
    b = ctrw_batch(m, 10, 1.0, BLOCK_SIZE + 1, 8)
    real = build_row_sum(m, 10, 1.0, block_rng(8, 1))
    assert b.G[BLOCK_SIZE] == ctrw_state(real, 1.0)[1]


def test_batch_age_and_remaining_life():
    m = ModelSpec("uncoupled-gaussian", beta=0.5)
    b = ctrw_batch(m, 100, 1.0, 2000, 1)
    assert np.all(b.A >= 0) and np.all(b.A <= 1.0) and np.all(b.R > 0)


def test_batch_requires_seed():
    with pytest.raises(ConfigError, match="seed"):
        ctrw_batch(ModelSpec("levy-walk"), 10, 1.0, 10, None)
