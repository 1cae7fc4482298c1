"""Eigenpairs of the transformed column problem.

The substitution in `model` leaves a heat problem for w whose separated
spatial part solves phi'' = -lambda phi under one of two boundary sets:

  flux exit (Robin at both faces):  phi'(0) - r phi(0) = 0,
                                    phi'(ell) - r phi(ell) = 0
  zero-gradient exit (Danckwerts):  phi'(0) - r phi(0) = 0,
                                    phi'(ell) + r phi(ell) = 0

The Robin family is fully explicit: one negative eigenvalue -r^2 with
phi_0 = e^{r x}, then lambda_n = (n pi / ell)^2 with a cos + sin
combination.  The Danckwerts comparison family has no explicit
eigenvalues: lambda_Dn is the single tangent-equation root bracketed
between consecutive Robin eigenvalues, located by Brent's method on a
pole-free rearrangement.  Writing kappa = sqrt(lambda), the tangent
equation also has one root with kappa ell = 2 atan(r / kappa) below
pi/ell; the comparison family is defined over the brackets n >= 1 and
omits it (see `danckwerts_omitted_root`), which is what makes the
zero-gradient closure an approximation rather than a solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import BracketingError, ParameterError, QuadratureError
from .model import TransportParams

__all__ = [
    "EigenPair",
    "robin_eigenpair",
    "danckwerts_eigenvalue",
    "danckwerts_eigenpair",
    "danckwerts_omitted_root",
    "eval_phi",
    "inner_product",
    "half_wave_points",
]

ROBIN = "robin"
DANCKWERTS = "danckwerts"


@dataclass(frozen=True)
class EigenPair:
    """One eigenvalue with the squared L2 norm of its eigenfunction."""

    n: int
    lam: float
    norm: float
    kind: str

    def __post_init__(self):
        if self.kind not in (ROBIN, DANCKWERTS):
            raise ParameterError(f"unknown eigenpair kind {self.kind!r}")
        if self.norm <= 0.0:
            raise ParameterError("eigenfunction norm must be positive")
        if self.kind == DANCKWERTS and self.n < 1:
            raise ParameterError("the comparison family is indexed from n = 1")


def _general_norm(kappa: float, r: float, ell: float) -> float:
    """Closed form of int_0^ell (cos(kappa x) + (r/kappa) sin(kappa x))^2 dx."""
    q = r / kappa
    s2 = np.sin(2.0 * kappa * ell)
    c2 = np.cos(2.0 * kappa * ell)
    return (
        0.5 * ell * (1.0 + q * q)
        + s2 / (4.0 * kappa) * (1.0 - q * q)
        + r / (2.0 * kappa * kappa) * (1.0 - c2)
    )


def robin_eigenpair(n: int, params: TransportParams) -> EigenPair:
    """Eigenpair of the double-flux family.

    n = 0 is the negative mode lambda_0 = -r^2 with phi_0 = e^{r x} and
    squared norm (e^{2 r ell} - 1)/(2 r); n >= 1 gives
    lambda_n = (n pi/ell)^2 with squared norm (r^2 + lambda_n) ell /
    (2 lambda_n).
    """
    if n < 0:
        raise ParameterError("mode index must be nonnegative")
    r, ell = params.r, params.ell
    if n == 0:
        lam = -r * r
        norm = (np.exp(2.0 * r * ell) - 1.0) / (2.0 * r)
    else:
        lam = (n * np.pi / ell) ** 2
        norm = (r * r + lam) * ell / (2.0 * lam)
    return EigenPair(n=n, lam=float(lam), norm=float(norm), kind=ROBIN)


def _danckwerts_residual(kappa: float, r: float, ell: float) -> float:
    # Pole-free form of tan(kappa ell) = 2 r kappa / (kappa^2 - r^2):
    # the tangent's poles are cleared by multiplying through by
    # cos(kappa ell) (kappa^2 - r^2).
    return (kappa * kappa - r * r) * np.sin(kappa * ell) - 2.0 * r * kappa * np.cos(
        kappa * ell
    )


def _bracketed_root(k_lo: float, k_hi: float, r: float, ell: float,
                    n: int) -> float:
    f_lo = _danckwerts_residual(k_lo, r, ell)
    f_hi = _danckwerts_residual(k_hi, r, ell)
    if f_lo == 0.0:  # cannot happen for r > 0, guard anyway
        return k_lo * k_lo
    if f_lo * f_hi >= 0.0:
        raise BracketingError(
            f"no sign change for mode {n} on ({k_lo:.6g}, {k_hi:.6g})"
        )
    kappa = brentq(
        _danckwerts_residual,
        k_lo,
        k_hi,
        args=(r, ell),
        xtol=1e-15 * k_hi,
        rtol=4.0 * np.finfo(float).eps,
        maxiter=200,
    )
    return float(kappa * kappa)


def danckwerts_eigenvalue(n: int, params: TransportParams) -> float:
    """n-th zero-gradient-exit eigenvalue, bracketed by Robin neighbours.

    lambda_Dn lies strictly inside (n^2 pi^2/ell^2, (n+1)^2 pi^2/ell^2);
    the root of the pole-free residual is refined by Brent's method to
    relative precision a few eps.  The family starts at n = 1 and by
    construction omits the tangent equation's root below pi/ell.
    """
    if n < 1:
        raise ParameterError("comparison modes start at n = 1")
    r, ell = params.r, params.ell
    return _bracketed_root(n * np.pi / ell, (n + 1) * np.pi / ell, r, ell, n)


def danckwerts_omitted_root(params: TransportParams) -> float:
    """The tangent equation's slow root that the comparison family skips.

    kappa ell = 2 atan(r / kappa) has exactly one solution below pi/ell;
    the eigenvalue kappa^2 would carry the slowest-decaying term of a
    complete zero-gradient expansion.  The comparison series is defined
    without it, so its defect against a zero-gradient reference relaxes at
    precisely this root's rate; the function exists to expose that
    rate to diagnostics and tests.
    """
    r, ell = params.r, params.ell
    # residual ~ -r kappa (r ell + 2) < 0 just right of zero
    return _bracketed_root(1e-15 * np.pi / ell, np.pi / ell, r, ell, 0)


def danckwerts_eigenpair(n: int, params: TransportParams) -> EigenPair:
    lam = danckwerts_eigenvalue(n, params)
    kappa = np.sqrt(lam)
    norm = _general_norm(kappa, params.r, params.ell)
    return EigenPair(n=n, lam=lam, norm=float(norm), kind=DANCKWERTS)


def eval_phi(pair: EigenPair, x, r: float):
    """Eigenfunction value and spatial derivative at x.

    The entrance condition phi'(0) = r phi(0) fixes the normalization
    phi(0) = 1 for every mode.
    """
    x = np.asarray(x, dtype=float)
    if pair.kind == ROBIN and pair.n == 0:
        e = np.exp(r * x)
        return e[()], (r * e)[()]
    kappa = np.sqrt(pair.lam)
    c, s = np.cos(kappa * x), np.sin(kappa * x)
    phi = c + (r / kappa) * s
    dphi = -kappa * s + r * c
    return phi[()], dphi[()]


def half_wave_points(pair: EigenPair, params: TransportParams) -> tuple:
    """Interior half-period marks of an oscillatory mode on (0, ell).

    Used to split quadrature panels once a mode oscillates enough that a
    single adaptive pass would alias it.
    """
    if pair.kind == ROBIN and pair.n == 0:
        return ()
    kappa = np.sqrt(pair.lam)
    step = np.pi / kappa
    k = int(np.floor(params.ell / step))
    return tuple(j * step for j in range(1, k + 1) if 0.0 < j * step < params.ell)


def inner_product(f, h, a: float, b: float, *, abs_tol: float = 1e-10,
                  rel_tol: float = 1e-10, points=None) -> float:
    """Adaptive quadrature of int_a^b f(x) h(x) dx.

    `points` lists interior abscissae where the integrand kinks or where an
    oscillation should be fenced; the integral is accumulated piecewise
    between them.  Raises QuadratureError when the QUADPACK estimate misses
    the requested tolerance.
    """
    if not (np.isfinite(a) and np.isfinite(b) and b > a):
        raise ParameterError("need a finite interval with b > a")
    cuts = [a, b]
    if points is not None:
        cuts.extend(p for p in points if a < p < b)
    cuts = sorted(set(cuts))
    total = 0.0
    err = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        out = quad(
            lambda x: f(x) * h(x),
            lo,
            hi,
            epsabs=abs_tol / max(1, len(cuts) - 1),
            epsrel=rel_tol,
            limit=200,
            full_output=1,
        )
        if len(out) > 3:
            raise QuadratureError(f"quadrature failed on [{lo:.6g}, {hi:.6g}]: {out[3]}")
        total += out[0]
        err += out[1]
    if err > 10.0 * max(abs_tol, rel_tol * abs(total)):
        raise QuadratureError(
            f"quadrature error estimate {err:.3g} exceeds tolerance for [{a}, {b}]"
        )
    return total
