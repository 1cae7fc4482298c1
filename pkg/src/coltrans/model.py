"""Problem data and the change of variables for finite-column solute transport.

The physical model is one-dimensional convective-dispersive transport with
linear equilibrium sorption, first-order decay and zero-order production,

    R C_t = D C_xx - v C_x - mu C + gamma      on 0 <= x <= ell,

closed by flux (third-type) conditions at both faces,

    v C(0,t) - D C_x(0,t) = v g(t),
    v C(ell,t) - D C_x(ell,t) = v C_E(t),

where g is the influent flux concentration and C_E the effluent flux
concentration.  The substitution C = (w + e^{s t} H) e^{r x - s t} with
r = v/(2D) and s = (v^2/(4D) + mu)/R turns this into a heat problem for w
with homogeneous boundaries; H is the lifting function that absorbs the
boundary data and F collects the forcing that the substitution produces.
This module owns the parameter set, the smooth-function wrapper used for
phi, g and C_E, and the lift/forcing/initial-condition algebra.  The
eigenfunction machinery that consumes these lives in `eigensystem` and
`series`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ParameterError

__all__ = [
    "TransportParams",
    "SmoothFn",
    "ProblemData",
    "derive_params",
    "lift_H",
    "forcing_F",
    "initial_w",
    "invert",
]


@dataclass(frozen=True)
class TransportParams:
    """Constant coefficients of the column transport problem.

    R     retardation factor (dimensionless, >= 1 physically, > 0 required)
    D     dispersion coefficient, length^2/time, > 0
    v     pore-water velocity, length/time, > 0
    mu    first-order decay rate, 1/time, >= 0
    gamma zero-order production, mass/(volume time), sign free
    ell   column length, > 0
    """

    R: float
    D: float
    v: float
    mu: float
    gamma: float
    ell: float

    def __post_init__(self):
        for name in ("R", "D", "v", "ell"):
            val = getattr(self, name)
            if not np.isfinite(val) or val <= 0.0:
                raise ParameterError(f"{name} must be positive and finite, got {val!r}")
        if not np.isfinite(self.mu) or self.mu < 0.0:
            raise ParameterError(f"mu must be nonnegative and finite, got {self.mu!r}")
        if not np.isfinite(self.gamma):
            raise ParameterError(f"gamma must be finite, got {self.gamma!r}")
        if self.mu == 0.0 and self.gamma != 0.0:
            # Accepted, but the half-line exit closure cannot absorb the
            # production term without decay; exitflux raises if asked to.
            warnings.warn(
                "gamma != 0 with mu = 0: production has no equilibrium, "
                "computed exit concentrations are unavailable",
                UserWarning,
                stacklevel=2,
            )

    @property
    def r(self) -> float:
        """Exponential tilt rate of the substitution, v / (2 D)."""
        return self.v / (2.0 * self.D)

    @property
    def s(self) -> float:
        """Temporal rate of the substitution, (v^2/(4 D) + mu) / R."""
        return (self.v * self.v / (4.0 * self.D) + self.mu) / self.R


def derive_params(params: TransportParams) -> tuple[float, float]:
    """Return the derived substitution rates (r, s)."""
    return params.r, params.s


def _as_callable_pair(fn, dfn):
    def eval_(t):
        return np.asarray(fn(np.asarray(t, dtype=float)), dtype=float)[()]

    def deriv_(t):
        return np.asarray(dfn(np.asarray(t, dtype=float)), dtype=float)[()]

    return eval_, deriv_


@dataclass(frozen=True)
class SmoothFn:
    """A C^1 scalar function bundled with its derivative.

    `eval` and `deriv` accept floats or numpy arrays.  `knots` lists interior
    points where higher derivatives may jump (quadrature routines split
    there).  `const_value` is set when the function is a known constant so
    downstream code can take closed-form shortcuts.
    """

    eval: Callable
    deriv: Callable
    knots: tuple = ()
    const_value: Optional[float] = None
    domain: Optional[tuple] = None

    @classmethod
    def constant(cls, value: float) -> "SmoothFn":
        value = float(value)
        ev, dv = _as_callable_pair(
            lambda t: np.full_like(t, value, dtype=float),
            lambda t: np.zeros_like(t, dtype=float),
        )
        return cls(eval=ev, deriv=dv, const_value=value)

    @classmethod
    def polynomial(cls, coeffs) -> "SmoothFn":
        """Polynomial sum(c_k t^k) from low-order-first coefficients."""
        poly = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
        dpoly = poly.deriv()
        ev, dv = _as_callable_pair(poly, dpoly)
        const = float(poly.coef[0]) if poly.degree() == 0 else None
        return cls(eval=ev, deriv=dv, const_value=const)

    @classmethod
    def exp_pulse(cls, level: float, center: float, width: float) -> "SmoothFn":
        """Gaussian-shaped pulse level * exp(-((t - center)/width)^2)."""
        if width <= 0.0:
            raise ParameterError("pulse width must be positive")
        level, center, width = float(level), float(center), float(width)

        def f(t):
            z = (t - center) / width
            return level * np.exp(-z * z)

        def df(t):
            z = (t - center) / width
            return level * np.exp(-z * z) * (-2.0 * z / width)

        ev, dv = _as_callable_pair(f, df)
        return cls(eval=ev, deriv=dv)

    @classmethod
    def smooth_pulse(cls, start: float, stop: float, level: float,
                     ramp: Optional[float] = None) -> "SmoothFn":
        """Boxcar from start to stop with C^1 smoothstep ramps.

        `ramp` is the edge width; default 5% of the pulse length.
        """
        if stop <= start:
            raise ParameterError("pulse needs stop > start")
        if ramp is None:
            ramp = 0.05 * (stop - start)
        if ramp <= 0.0 or 2.0 * ramp > (stop - start):
            raise ParameterError("ramp must be positive and fit inside the pulse")
        start, stop, level, ramp = map(float, (start, stop, level, ramp))

        def edge(u):
            # smoothstep: 0 below, 1 above, C^1 across.
            u = np.clip(u, 0.0, 1.0)
            return u * u * (3.0 - 2.0 * u)

        def dedge(u):
            inside = (u > 0.0) & (u < 1.0)
            u = np.clip(u, 0.0, 1.0)
            return np.where(inside, 6.0 * u * (1.0 - u), 0.0)

        def f(t):
            return level * (edge((t - start) / ramp) - edge((t - stop) / ramp))

        def df(t):
            return level * (dedge((t - start) / ramp) - dedge((t - stop) / ramp)) / ramp

        ev, dv = _as_callable_pair(f, df)
        knots = (start, start + ramp, stop, stop + ramp)
        return cls(eval=ev, deriv=dv, knots=knots)

    @classmethod
    def from_table(cls, t_knots, values) -> "SmoothFn":
        """Monotone-safe C^1 cubic through tabulated samples.

        The interpolant passes through every knot exactly and does not
        overshoot between monotone samples.  Outside the table the end
        values are held constant (derivative zero).
        """
        t_knots = np.asarray(t_knots, dtype=float)
        values = np.asarray(values, dtype=float)
        if t_knots.ndim != 1 or t_knots.size < 2:
            raise ParameterError("table needs at least two knots")
        if np.any(np.diff(t_knots) <= 0.0):
            raise ParameterError("table knots must be strictly increasing")
        if not (np.all(np.isfinite(t_knots)) and np.all(np.isfinite(values))):
            raise ParameterError("table entries must be finite")
        # flat runs make pchip's harmonic slope mean divide by zero on the
        # way to its (correct) zero-slope answer; keep that quiet
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            interp = PchipInterpolator(t_knots, values, extrapolate=False)
            dinterp = interp.derivative()
        lo, hi = t_knots[0], t_knots[-1]
        vlo, vhi = values[0], values[-1]

        def f(t):
            t = np.asarray(t, dtype=float)
            out = interp(np.clip(t, lo, hi))
            return np.where(t < lo, vlo, np.where(t > hi, vhi, out))

        def df(t):
            t = np.asarray(t, dtype=float)
            out = dinterp(np.clip(t, lo, hi))
            return np.where((t < lo) | (t > hi), 0.0, out)

        ev, dv = _as_callable_pair(f, df)
        return cls(eval=ev, deriv=dv, knots=tuple(t_knots), domain=(lo, hi))

    @classmethod
    def from_callable(cls, fn, dfn, knots=()) -> "SmoothFn":
        ev, dv = _as_callable_pair(fn, dfn)
        return cls(eval=ev, deriv=dv, knots=tuple(knots))


def _check_finite_on(fn: SmoothFn, lo: float, hi: float, what: str, n: int = 33):
    ts = np.linspace(lo, hi, n)
    if not (np.all(np.isfinite(fn.eval(ts))) and np.all(np.isfinite(fn.deriv(ts)))):
        raise ParameterError(f"{what} is not finite everywhere on [{lo}, {hi}]")


@dataclass(frozen=True)
class ProblemData:
    """One column problem: coefficients, initial profile, boundary data.

    `exit` is the effluent flux concentration C_E.  None means it is not
    measured and must be computed from the half-line flux closure
    (`exitflux.resolve_exit`) before the series machinery can run.
    """

    params: TransportParams
    phi: SmoothFn
    g: SmoothFn
    exit: Optional[SmoothFn] = None
    t0: float = 0.0
    # Set by exitflux.resolve_exit when `exit` was computed rather than given.
    exit_computed: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not np.isfinite(self.t0):
            raise ParameterError("t0 must be finite")
        _check_finite_on(self.phi, 0.0, self.params.ell, "phi")
        if not np.isfinite(self.g.eval(self.t0)):
            raise ParameterError("g must be finite at t0")

    @property
    def resolved(self) -> bool:
        return self.exit is not None

    def require_exit(self) -> SmoothFn:
        if self.exit is None:
            raise ParameterError(
                "exit concentration not resolved; run exitflux.resolve_exit first"
            )
        return self.exit

    def with_exit(self, exit_fn: SmoothFn, computed: bool = False) -> "ProblemData":
        return replace(self, exit=exit_fn, exit_computed=computed)


def lift_H(data: ProblemData, x, t):
    """Lifting function and the partials the forcing needs.

    Returns (H, H_t, H_xx) at (x, t), broadcasting over array input.
    H interpolates the boundary data so that w = (C e^{-r x} - H) e^{s t}
    satisfies homogeneous flux conditions:

        H(0,t) = 2 g(t),   H(ell,t) = 2 e^{-r ell} C_E(t),
        H_x = 0 at both faces.
    """
    p = data.params
    cE = data.require_exit()
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    cosx = np.cos(np.pi * x / p.ell)
    scale = np.exp(-p.r * p.ell)
    ge, gd = data.g.eval(t), data.g.deriv(t)
    ce, cd = scale * cE.eval(t), scale * cE.deriv(t)
    H = (1.0 + cosx) * ge + (1.0 - cosx) * ce
    H_t = (1.0 + cosx) * gd + (1.0 - cosx) * cd
    H_xx = (np.pi / p.ell) ** 2 * (ce - ge) * cosx
    return H[()], H_t[()], H_xx[()]


def forcing_F(data: ProblemData, x, t):
    """Forcing of the transformed heat problem, split by data source.

    Returns (F, F1, F2) where F1 carries the production and influent terms,
    F2 the effluent terms, and F = F1 + F2 equals
    (gamma/R) e^{-r x} - (s H + H_t) + (D/R) H_xx.
    """
    p = data.params
    cE = data.require_exit()
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    cosx = np.cos(np.pi * x / p.ell)
    pref = np.pi * np.pi * p.D / (p.ell * p.ell * p.R) + p.s
    scale = np.exp(-p.r * p.ell)
    ge, gd = data.g.eval(t), data.g.deriv(t)
    ce, cd = scale * cE.eval(t), scale * cE.deriv(t)
    F1 = (p.gamma / p.R) * np.exp(-p.r * x) - (pref * cosx + p.s) * ge - (1.0 + cosx) * gd
    F2 = (pref * cosx - p.s) * ce - (1.0 - cosx) * cd
    return (F1 + F2)[()], F1[()], F2[()]


def initial_w(data: ProblemData, x):
    """Initial value of the transformed unknown, e^{s t0}(e^{-r x} phi - H)."""
    p = data.params
    x = np.asarray(x, dtype=float)
    H0, _, _ = lift_H(data, x, data.t0)
    out = np.exp(p.s * data.t0) * (np.exp(-p.r * x) * data.phi.eval(x) - H0)
    return out[()]


def invert(w, H, x, t, r: float, s: float):
    """Map transformed values back to concentration.

    Algebraically C = (w + e^{s t} H) e^{r x - s t}; evaluated as
    w e^{r x - s t} + H e^{r x} so that large s t cannot overflow through
    the intermediate e^{s t}.
    """
    w = np.asarray(w, dtype=float)
    H = np.asarray(H, dtype=float)
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    out = w * np.exp(r * x - s * t) + H * np.exp(r * x)
    return out[()]
