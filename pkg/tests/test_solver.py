"""Solver: quadrature weights, stepping, oracles, MGT, fixed-point iteration."""

import math

import numpy as np
import pytest
from scipy import integrate

from memwave.errors import ConfigError, UnsupportedError
from memwave.exponents import ProblemParams
from memwave.kernels import (
    Constant,
    Exponential,
    IteratedExponential,
    OscillatingPolynomial,
    PolynomialShifted,
    RiemannLiouville,
)
from memwave.solver import (
    HistoryWeights,
    Profile,
    SystemConfig,
    convolve_history,
    dalembert_reference,
    discrete_energy,
    initial_mgt_state,
    initial_state,
    conv_derivative_identity,
    mgt_step,
    picard_iterate,
    run_simulation,
    step,
)

PARAMS = ProblemParams(1, 2.0, 2.0)


def _config(**kw):
    defaults = dict(
        params=PARAMS,
        kernels=(Constant(1.0), Constant(1.0)),
        u0=Profile("gaussian", 1.0, 1.0),
        u1=Profile("zero"),
        t_max=1.0,
        dr=0.02,
        mode="single",
    )
    defaults.update(kw)
    return SystemConfig(**defaults)


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("kind", ["cosine_bump", "smoothed_indicator", "gaussian"])
def test_profile_support(kind):
    prof = Profile(kind, 2.0, 1.5)
    r = np.linspace(0.0, 4.0, 200)
    vals = prof(r)
    assert np.all(vals[r >= 1.5] == 0.0)
    assert vals[0] > 0.0
    assert np.max(vals) <= 2.0 + 1e-12


def test_profile_amplitude_scaling():
    r = np.linspace(0.0, 1.0, 50)
    assert np.allclose(Profile("cosine_bump", 3.0, 1.0)(r),
                       3.0 * Profile("cosine_bump", 1.0, 1.0)(r))


def test_profile_rejects_unknown_kind():
    with pytest.raises(ConfigError):
        Profile("triangle", 1.0, 1.0)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

QUAD_FAMILIES = [
    RiemannLiouville(0.5),
    RiemannLiouville(0.2),
    PolynomialShifted(0.5),
    PolynomialShifted(1.0),
    Exponential(1.0),
    Exponential(3.0),
    Constant(2.0),
    IteratedExponential(1, 1.0),
    OscillatingPolynomial(0.5),
]


@pytest.mark.parametrize("kernel", QUAD_FAMILIES, ids=lambda k: repr(type(k).__name__))
def test_weights_row_sum_telescopes(kernel):
    # the weights integrate g exactly, so ones must reproduce G(t_m)
    slow = isinstance(kernel, (OscillatingPolynomial, IteratedExponential))
    steps = 100 if slow else 1000
    hw = HistoryWeights(kernel, 0.01)
    for m in (1, 7, steps // 2, steps):
        w = hw.weights(m)
        want = kernel.antiderivative(m * 0.01)
        assert w @ np.ones(m + 1) == pytest.approx(want, rel=1e-10, abs=1e-12)


def test_convolution_examples():
    # g = 1, f = 1, t = 2 -> 2
    hw = HistoryWeights(Constant(1.0), 0.01)
    assert hw.weights(200) @ np.ones(201) == pytest.approx(2.0, rel=1e-12)
    # fractional integral of 1 at t = 1: t^0.5 / Gamma(1.5)
    hw = HistoryWeights(RiemannLiouville(0.5), 0.01)
    assert hw.weights(100) @ np.ones(101) == pytest.approx(1.1283791671, abs=1e-8)
    # exponential convolution of 1: 1 - e^-t
    hw = HistoryWeights(Exponential(1.0), 0.01)
    assert hw.weights(100) @ np.ones(101) == pytest.approx(1.0 - math.exp(-1.0), rel=1e-8)


def test_weights_exact_for_linear_samples():
    # oracle: adaptive quadrature of g(t - tau)(2 + 3 tau)
    dt = 0.05
    m = 40
    t_m = m * dt
    samples = 2.0 + 3.0 * dt * np.arange(m + 1)
    for kernel in (Exponential(1.5), Constant(0.7), PolynomialShifted(0.5)):
        want, _ = integrate.quad(lambda s: kernel(t_m - s) * (2.0 + 3.0 * s), 0.0, t_m,
                                 epsrel=1e-12, limit=200)
        got = convolve_history(HistoryWeights(kernel, dt).weights(m), samples)
        assert got == pytest.approx(want, rel=1e-10)


def test_weights_exact_for_singular_kernel_linear_samples():
    dt = 0.05
    m = 40
    t_m = m * dt
    kernel = RiemannLiouville(0.5)
    samples = 1.0 + 0.5 * dt * np.arange(m + 1)
    # quad's weight="alg" supplies the (t_m - s)^-0.5 factor; the integrand is
    # just the smooth part, renormalized by Gamma(0.5) afterwards
    want, _ = integrate.quad(
        lambda s: 1.0 + 0.5 * s, 0.0, t_m,
        weight="alg", wvar=(0.0, -0.5), epsrel=1e-12, limit=200,
    )
    want = want / math.gamma(0.5)
    got = convolve_history(HistoryWeights(kernel, dt).weights(m), samples)
    assert got == pytest.approx(want, rel=1e-9)


def test_convolve_history_length_mismatch():
    hw = HistoryWeights(Constant(1.0), 0.1)
    with pytest.raises(ValueError):
        convolve_history(hw.weights(5), np.ones(4))


def test_tail_truncation_matches_full():
    kernel = Exponential(0.5)
    full = HistoryWeights(kernel, 0.01)
    trunc = HistoryWeights(kernel, 0.01, tail_truncation=True)
    samples = np.sin(0.01 * np.arange(1001)) ** 2
    a = full.weights(1000) @ samples
    b = trunc.weights(1000) @ samples
    assert b == pytest.approx(a, rel=1e-9)


# ---------------------------------------------------------------------------
# stepping
# ---------------------------------------------------------------------------


def test_zero_data_stays_zero():
    cfg = _config(u0=Profile("zero"), u1=Profile("zero"), t_max=0.5)
    state = initial_state(cfg)
    for _ in range(10):
        step(state, cfg)
    assert np.all(state.u == 0.0)


def test_support_invariant():
    cfg = _config(t_max=1.0, dr=0.02, mode="coupled",
                  v0=Profile("gaussian", 0.5, 1.0), v1=Profile("zero"))
    state = initial_state(cfg)
    n_steps = int(round(cfg.t_max / cfg.dt))
    for _ in range(n_steps):
        step(state, cfg)
        assert state.support_violation(cfg) < 1e-12


def test_linear_run_matches_dalembert():
    cfg = _config(dr=0.01, t_max=1.0, linear=True, cfl=0.5)
    state = initial_state(cfg)
    for _ in range(int(round(cfg.t_max / cfg.dt))):
        step(state, cfg)
    u0 = lambda x: cfg.u0(np.abs(np.asarray(x, dtype=float)))
    sel = state.r <= 2.5
    ref = np.array([dalembert_reference(u0, lambda x: 0.0 * np.asarray(x), None,
                                        state.t, x) for x in state.r[sel]])
    assert np.max(np.abs(state.u[sel] - ref)) < 5e-3  # O(dr^2) regime


def test_constant_forcing_grows_like_t():
    # frozen v = 1 history with g = 1: forcing = t on the support interior
    cfg = _config(mode="single", t_max=0.3)
    state = initial_state(cfg)
    hw = HistoryWeights(Constant(1.0), cfg.dt)
    m = 10
    forcing = hw.weights(m) @ np.ones(m + 1)
    assert forcing == pytest.approx(m * cfg.dt, rel=1e-12)


def test_energy_drift_linear():
    cfg = _config(dr=1.0 / 200.0, t_max=5.0, linear=True)
    state = initial_state(cfg)
    energies = []
    for _ in range(int(round(cfg.t_max / cfg.dt))):
        step(state, cfg)
        energies.append(discrete_energy(state, cfg))
    energies = np.asarray(energies)
    drift = np.max(np.abs(energies - energies[0])) / energies[0]
    assert drift < 0.005


def test_run_simulation_linear_reaches_tmax():
    cfg = _config(t_max=0.5, linear=True)
    res = run_simulation(cfg)
    assert res.trigger == "reached_tmax"
    assert res.t_stop == pytest.approx(0.5, abs=cfg.dt)
    assert len(res.trace) > 10


def test_run_simulation_snapshot_capture():
    cfg = _config(t_max=0.5, snapshot_times=(0.25,))
    res = run_simulation(cfg)
    assert len(res.snapshots) == 1
    (u, v), = res.snapshots.values()
    assert u.shape == cfg.radii().shape and v is None


# ---------------------------------------------------------------------------
# d'Alembert oracle
# ---------------------------------------------------------------------------


def test_dalembert_velocity_indicator():
    u1 = lambda x: np.where(np.abs(np.asarray(x, dtype=float)) <= 1.0, 1.0, 0.0)
    val = dalembert_reference(lambda x: 0.0 * np.asarray(x), u1, None, 0.5, 0.0,
                              resolution=1e-4)
    assert val == pytest.approx(0.5, abs=1e-3)


def test_dalembert_source_cone_area():
    val = dalembert_reference(lambda x: 0.0 * np.asarray(x),
                              lambda x: 0.0 * np.asarray(x),
                              lambda t, x: 1.0, 1.0, 0.0, resolution=1e-3)
    assert val == pytest.approx(0.5, rel=1e-6)  # half the unit cone area


def test_dalembert_splitting():
    prof = Profile("gaussian", 1.0, 1.0)
    u0 = lambda x: prof(np.abs(np.asarray(x, dtype=float)))
    t = 3.0
    val = dalembert_reference(u0, lambda x: 0.0 * np.asarray(x), None, t, 3.0)
    assert val == pytest.approx(0.5 * float(u0(np.array(0.0))), rel=1e-10)


# ---------------------------------------------------------------------------
# fixed-point iteration
# ---------------------------------------------------------------------------


def test_picard_zero_data_fixed_point():
    cfg = _config(mode="coupled", u0=Profile("zero"), u1=Profile("zero"),
                  v0=Profile("zero"), v1=Profile("zero"))
    d = picard_iterate(cfg, 0.25, 3, dx=0.05)
    assert all(x == 0.0 for x in d)


def test_picard_contracts():
    cfg = _config(mode="coupled", dr=0.02,
                  kernels=(RiemannLiouville(0.5), Exponential(1.0)),
                  v0=Profile("gaussian", 1.0, 1.0), v1=Profile("zero"))
    d = picard_iterate(cfg, 0.25, 3, dx=0.025)
    assert d[1] < d[0] and d[2] < d[1]


def test_picard_rejects_higher_dimension():
    cfg = _config(params=ProblemParams(2, 2.0, 2.0))
    with pytest.raises(UnsupportedError):
        picard_iterate(cfg, 0.25, 2)


def test_picard_rejects_long_window():
    with pytest.raises(ConfigError):
        picard_iterate(_config(mode="coupled"), 0.75, 2)


# ---------------------------------------------------------------------------
# third-order-in-time reformulation
# ---------------------------------------------------------------------------


def test_mgt_requires_exponential_kernel():
    with pytest.raises(ConfigError):
        _config(mode="mgt", kernels=(Constant(1.0), Constant(1.0)))


def test_mgt_zero_data_stays_zero():
    cfg = _config(mode="mgt", kernels=(Exponential(1.0), Exponential(1.0)),
                  u0=Profile("zero"), u1=Profile("zero"), t_max=0.5)
    state = initial_mgt_state(cfg)
    for _ in range(10):
        mgt_step(state, cfg)
    assert np.all(state.u == 0.0)


def test_conv_derivative_identity_zero():
    t = np.arange(0.0, 1.0, 1e-3)
    assert conv_derivative_identity(Exponential(1.0), np.zeros_like(t), t) == 0.0


def test_conv_derivative_identity_constant():
    t = np.arange(0.0, 2.0 + 1e-12, 1e-3)
    resid = conv_derivative_identity(Exponential(1.0), np.ones_like(t), t)
    assert resid < 1e-4


def test_conv_derivative_identity_linear():
    t = np.arange(0.0, 2.0 + 1e-12, 1e-3)
    resid = conv_derivative_identity(Exponential(2.0), t.copy(), t)
    assert resid < 1e-4


def test_conv_derivative_identity_rejects_other_kernels():
    t = np.arange(0.0, 1.0, 1e-2)
    with pytest.raises(ConfigError):
        conv_derivative_identity(Constant(1.0), np.ones_like(t), t)


# ---------------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------------


def test_config_rejects_bad_cfl():
    with pytest.raises(ConfigError):
        _config(cfl=1.5)


def test_config_rejects_bad_mode():
    with pytest.raises(ConfigError):
        _config(mode="implicit")


def test_config_grid_covers_light_cone():
    cfg = _config(t_max=2.0, dr=0.05)
    assert cfg.n_cells * cfg.dr >= cfg.R + cfg.t_max + 2 * cfg.dr
