"""Half-line flux closure: kernel, companion solution, exit curve."""

import numpy as np
import pytest
from scipy.special import erf, erfc

from coltrans import (
    FluxTransformError,
    ParameterError,
    SmoothFn,
    TransportParams,
    exit_concentration,
    exit_concentration_large_t,
    exit_curve,
    heat_kernel,
    resolve_exit,
)
from coltrans.exitflux import HalfLineProblem, eval_u
from conftest import make_data


def erfc_pair(p, t):
    """Flux concentration at the exit for a unit inlet step on clean ground."""
    t = np.asarray(t, dtype=float)
    den = 2.0 * np.sqrt(p.D * t / p.R)
    a = erfc((p.ell - p.v * t / p.R) / den)
    b = np.exp(p.v * p.ell / p.D) * erfc((p.ell + p.v * t / p.R) / den)
    return 0.5 * (a + b)


# -- kernel -------------------------------------------------------------------

def test_heat_kernel_values():
    for th in (0.04, 0.5, 3.0):
        K0, Kx0 = heat_kernel(0.0, th)
        assert K0 == pytest.approx(1.0 / np.sqrt(4.0 * np.pi * th), rel=1e-14)
        assert Kx0 == 0.0
        xi = np.linspace(-14.0 * np.sqrt(th), 14.0 * np.sqrt(th), 4001)
        K, Kx = heat_kernel(xi, th)
        assert np.trapezoid(K, xi) == pytest.approx(1.0, abs=1e-12)
        dK = np.gradient(K, xi)
        assert np.max(np.abs(dK - Kx)) <= 1e-4 * np.max(np.abs(Kx))
        Km, _ = heat_kernel(-xi, th)
        assert np.array_equal(K, Km)


def test_heat_kernel_rejects_bad_theta():
    with pytest.raises(ParameterError):
        heat_kernel(0.5, 0.0)
    with pytest.raises(ParameterError):
        heat_kernel(np.array([0.1, 0.2]), np.array([1.0, -1.0]))


# -- companion solution oracles -----------------------------------------------

def test_half_line_erf_oracle():
    """Unit scaled initial state, quiet inlet: u e^{-s t} is a pure erf front."""
    p = TransportParams(R=1.0, D=0.5, v=1.0, mu=0.0, gamma=0.0, ell=1.0)
    hp = HalfLineProblem(
        params=p, t0=0.0, g=SmoothFn.constant(0.0), gm=0.0,
        phi_flux=lambda x: np.exp(p.r * np.asarray(x, dtype=float)),
        zeta_knots=())
    kap = p.D / p.R
    for x in (0.3, 1.0, 2.5):
        for t in (0.25, 1.0, 4.0):
            want = np.exp(-p.s * t) * erf(x / (2.0 * np.sqrt(kap * t)))
            assert eval_u(hp, x, t) == pytest.approx(want, rel=1e-9, abs=1e-12)
    un = eval_u(hp, 1.0, 0.5, scaled=False)
    assert un == pytest.approx(erf(1.0 / (2.0 * np.sqrt(kap * 0.5))), rel=1e-9)


def test_zero_data_gives_zero_exit():
    data = make_data()
    hp = HalfLineProblem.from_data(data)
    for t in (0.3, 1.0, 2.0):
        assert eval_u(hp, 0.7, t) == pytest.approx(0.0, abs=1e-13)
        assert exit_concentration(hp, t) == pytest.approx(0.0, abs=1e-12)


def test_exit_matches_erfc_pair(smoke_data):
    hp = HalfLineProblem.from_data(smoke_data)
    for t in np.linspace(0.05, 2.0, 15):
        want = float(erfc_pair(smoke_data.params, t))
        assert exit_concentration(hp, float(t)) == pytest.approx(
            want, rel=1e-6, abs=1e-9)


def test_equilibrium_exit_level(equilibrium_data):
    hp = HalfLineProblem.from_data(equilibrium_data)
    assert hp.gm == pytest.approx(2.0)
    for t in (0.5, 2.0):
        assert exit_concentration(hp, t) == pytest.approx(2.0, abs=1e-9)


# -- edges and continuity -----------------------------------------------------

def test_eval_u_edge_cases(loaded_data):
    hp = HalfLineProblem.from_data(loaded_data)
    assert eval_u(hp, 0.7, 0.0) == pytest.approx(
        float(hp.initial_scaled(0.7)), rel=1e-14)
    assert eval_u(hp, 0.0, 1.3) == pytest.approx(
        float(hp.boundary_scaled(1.3, 1.3)), rel=1e-14)
    with pytest.raises(ParameterError):
        eval_u(hp, -0.1, 1.0)
    with pytest.raises(ParameterError):
        eval_u(hp, 0.5, -0.2)


def test_solution_continuous_at_start(loaded_data):
    hp = HalfLineProblem.from_data(loaded_data)
    for x in (0.4, 0.9):
        want = float(hp.initial_scaled(x))
        assert eval_u(hp, x, 1e-8) == pytest.approx(want, abs=1e-6)


def test_solution_continuous_at_inlet(smoke_data):
    hp = HalfLineProblem.from_data(smoke_data)
    for t in (0.5, 1.5):
        wall = float(hp.boundary_scaled(t, t))
        assert abs(eval_u(hp, 1e-3, t) - wall) <= 0.01


def test_unscaled_overflow_is_refused():
    data = make_data(v=60.0, D=0.1)
    hp = HalfLineProblem.from_data(data)
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(ParameterError, match="scaled"):
            eval_u(hp, 0.5, 1.0, scaled=False)


# -- memoized curve and resolution --------------------------------------------

def test_exit_curve_interpolation_defect(smoke_data):
    hp = HalfLineProblem.from_data(smoke_data)
    curve = exit_curve(smoke_data, 2.0, n_grid=256)
    probes = np.linspace(0.13, 1.93, 9)
    worst = max(abs(float(curve.eval(t)) - exit_concentration(hp, float(t)))
                for t in probes)
    assert worst <= 1e-5


def test_resolve_exit_attaches_and_is_idempotent():
    data = make_data(g=SmoothFn.constant(1.0))
    assert data.exit is None
    done = resolve_exit(data, 2.0, n_grid=64)
    assert done.exit is not None
    assert done.exit_computed
    again = resolve_exit(done, 5.0, n_grid=128)
    assert again is done
    measured = make_data(g=SmoothFn.constant(1.0), exit=SmoothFn.constant(0.0))
    assert not resolve_exit(measured, 2.0).exit_computed


def test_exit_curve_validation(smoke_data):
    with pytest.raises(ParameterError):
        exit_curve(smoke_data, smoke_data.t0)
    with pytest.raises(ParameterError):
        exit_curve(smoke_data, 2.0, n_grid=7)


def test_tabulated_inlet_curve():
    """Dense interpolated inlet tables must not choke the quadrature."""
    ts = np.linspace(0.0, 2.0, 256)
    table = SmoothFn.from_table(ts, np.sin(np.pi * ts / 2.0) ** 2)
    smooth = SmoothFn.from_callable(
        lambda t: np.sin(np.pi * np.asarray(t) / 2.0) ** 2,
        lambda t: np.pi / 2.0 * np.sin(np.pi * np.asarray(t)))
    a = HalfLineProblem.from_data(make_data(D=0.4, g=table))
    b = HalfLineProblem.from_data(make_data(D=0.4, g=smooth))
    for t in (0.6, 1.2, 1.9):
        va = exit_concentration(a, t)
        vb = exit_concentration(b, t)
        assert np.isfinite(va)
        assert va == pytest.approx(vb, abs=2e-6)


# -- long-time closure --------------------------------------------------------

def test_large_t_matches_direct_evaluation():
    data = make_data(D=0.5, mu=0.3, g=SmoothFn.constant(1.0))
    hp = HalfLineProblem.from_data(data)
    direct = exit_concentration(hp, 30.0)
    boundary_only = exit_concentration_large_t(data.params, data.g, 30.0)
    assert abs(direct - boundary_only) <= 1e-9


def test_large_t_steady_closed_form():
    # steady exit level: gm + (g - gm) e^{m ell}, m the decaying spatial rate
    cases = [
        (TransportParams(R=1.0, D=0.5, v=1.0, mu=0.3, gamma=0.0, ell=1.0), 1.0),
        (TransportParams(R=1.5, D=0.8, v=1.2, mu=0.5, gamma=1.0, ell=1.3), 3.0),
    ]
    for p, g_level in cases:
        gm = p.gamma / p.mu
        m = (p.v - np.sqrt(p.v * p.v + 4.0 * p.D * p.mu)) / (2.0 * p.D)
        want = gm + (g_level - gm) * np.exp(m * p.ell)
        got = exit_concentration_large_t(p, SmoothFn.constant(g_level), 40.0)
        assert got == pytest.approx(want, rel=1e-9)


def test_production_without_decay_is_rejected():
    with pytest.warns(UserWarning):
        data = make_data(mu=0.0, gamma=0.3, g=SmoothFn.constant(1.0))
    with pytest.raises(FluxTransformError):
        HalfLineProblem.from_data(data)
    with pytest.raises(FluxTransformError):
        exit_curve(data, 1.0)
    with pytest.raises(FluxTransformError):
        exit_concentration_large_t(data.params, data.g, 5.0)
