"""Numerical checks of the special-function identities behind the exact formulas.

Each check returns an IdentityReport with both sides, the discrepancy and a
pass flag.  Oscillatory integrals use Gauss-Legendre panels about one
half-period wide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, roots_legendre

from .specfun import arccosh_sq, gamma_abs_sq_closed, log_gamma_quad

__all__ = [
    "IdentityReport",
    "check_arccosh_expansion",
    "check_gamma_fourier_2d",
    "check_sinh_ratio_fourier",
    "check_log_sine_bound",
    "check_arccosh_lower_bound",
    "check_sampled_bounds",
    "check_gamma_closed_forms",
    "run_identity_suite",
]

_NODES = 24
_X, _W = roots_legendre(_NODES)


@dataclass(frozen=True)
class IdentityReport:
    name: str
    lhs: float
    rhs: float
    abs_diff: float
    rel_diff: float
    tolerance: float
    passed: bool
    detail: str = ""


def _report(name, lhs, rhs, tol, relative=True, detail=""):
    ad = abs(lhs - rhs)
    rd = ad / abs(lhs) if lhs != 0 else ad
    measure = rd if relative else ad
    return IdentityReport(name, float(lhs), float(rhs), float(ad), float(rd), tol, bool(measure <= tol), detail)


def _panel_nodes(a: float, b: float, width: float):
    n = max(1, int(math.ceil((b - a) / width)))
    edges = np.linspace(a, b, n + 1)
    h = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + h[:, None] * _X[None, :]).ravel()
    w = (h[:, None] * _W[None, :]).ravel()
    return x, w


def check_arccosh_expansion(z: float, k: float, beta: float, L: int = 30,
                            w_max: float = 60.0, tol: float = 1e-6) -> IdentityReport:
    """cos(2k sqrt(arccosh^2(cosh(beta/2) - z))) against its series in z.

    The series is cos(k beta) + 2k sinh(2 pi k) int_0^inf sum_l
    |Gamma(l/2 +- ik +- iw)|^2 / (2 pi^2 Gamma(l)) (2z)^l / l! cos(w beta) dw,
    truncated at l = L.
    """
    if not abs(z) < 2.0:
        raise ValueError("the expansion needs |z| < 2")
    if z == 0:
        v = math.cos(k * beta)
        return _report("arccosh_expansion", v, v, tol, detail=f"z=0;k={k:g};beta={beta:g};L={L}")
    inner = np.sqrt(complex(arccosh_sq(math.cosh(beta / 2.0) - z)))
    lhs = float(np.real(np.cos(2.0 * k * inner)))
    w, q = _panel_nodes(0.0, w_max, math.pi / max(abs(beta), abs(k), 1.0))
    total = np.zeros_like(w)
    last = 0.0
    for l in range(1, L + 1):
        lg = log_gamma_quad(l / 2.0, k, w)
        coeff = l * math.log(abs(2.0 * z)) - gammaln(l + 1) - gammaln(l) - math.log(2.0 * math.pi**2)
        term = np.sign(z) ** l * np.exp(lg + coeff)
        total = total + term
        last = float(np.sum(q * np.abs(term)))
    integral = float(np.sum(q * total * np.cos(w * beta)))
    rhs = math.cos(k * beta) + 2.0 * k * math.sinh(2.0 * math.pi * k) * integral
    return _report("arccosh_expansion", lhs, rhs, tol,
                   detail=f"z={z:g};k={k:g};beta={beta:g};L={L};last_term={last:.3g}")


def check_gamma_fourier_2d(l: float, k: float, w: float, box: float | None = None,
                           tol: float = 1e-6) -> IdentityReport:
    """|Gamma(l +- ik +- iw)|^2 / Gamma(2l)^2 as a 2D Fourier transform.

    The right side is (1/2) int int (2 cosh(a/2) + 2 cosh(b/2))^{-2l}
    cos(ka + wb) da db; the sine part, which vanishes by symmetry, is
    reported in the detail string.
    """
    lhs = float(np.exp(log_gamma_quad(l, k, w) - 2.0 * gammaln(2.0 * l)))
    A = box if box is not None else 40.0 / l + 5.0
    x, q = _panel_nodes(-A, A, math.pi / max(abs(k), abs(w), 1.0))
    ch = 2.0 * np.cosh(x / 2.0)
    base = (ch[:, None] + ch[None, :]) ** (-2.0 * l)
    qq = q[:, None] * q[None, :]
    # cos(ka + wb) = cos ka cos wb - sin ka sin wb, and likewise for sin.
    ca, sa = np.cos(k * x), np.sin(k * x)
    cb, sb = np.cos(w * x), np.sin(w * x)
    M = base * qq
    re = 0.5 * (ca @ M @ cb - sa @ M @ sb)
    im = 0.5 * (sa @ M @ cb + ca @ M @ sb)
    return _report("gamma_fourier_2d", lhs, float(re), tol,
                   detail=f"l={l:g};k={k:g};w={w:g};imag={im:.3g}")


def check_sinh_ratio_fourier(p: float, q: float, omega: float, x_max: float = 60.0,
                             tol: float = 1e-8) -> IdentityReport:
    """(cos p w - cos q w) / sinh(pi w) as a Fourier integral in x.

    The transform is (i / 2 pi) int sinh x (cosh p - cosh q) /
    ((cosh q + cosh x)(cosh p + cosh x)) e^{i x w} dx.  The integrand is odd,
    so only the sine part survives; the cosine part is reported as detail.
    """
    if omega == 0:
        lhs = 0.0
    else:
        lhs = (math.cos(p * omega) - math.cos(q * omega)) / math.sinh(math.pi * omega)
    x, wts = _panel_nodes(-x_max, x_max, math.pi / max(abs(omega), 1.0))
    g = np.sinh(x) * (math.cosh(p) - math.cosh(q)) / ((math.cosh(q) + np.cosh(x)) * (math.cosh(p) + np.cosh(x)))
    # (i/2pi)(C + iS) = -S/2pi + i C/2pi
    C = float(np.sum(wts * g * np.cos(x * omega)))
    S = float(np.sum(wts * g * np.sin(x * omega)))
    rhs = -S / (2.0 * math.pi)
    return _report("sinh_ratio_fourier", lhs, rhs, tol, relative=lhs != 0,
                   detail=f"p={p:g};q={q:g};omega={omega:g};imag={C / (2 * math.pi):.3g}")


def check_log_sine_bound(n_samples: int = 10000, seed: int = 0) -> IdentityReport:
    """|log(sin(pi x) / sin(alpha x))| <= (pi - alpha) / sin(pi delta / 2).

    Sampled over delta in (0, 1/10), x in (0, 1 - delta) and
    alpha in (9 pi / 10, pi).  Reports the number of violations.
    """
    rng = np.random.default_rng(seed)
    delta = rng.uniform(0.0, 0.1, n_samples)
    delta = np.where(delta == 0.0, 1e-3, delta)
    x = rng.uniform(0.0, 1.0, n_samples) * (1.0 - delta)
    x = np.where(x == 0.0, 1e-6, x)
    alpha = rng.uniform(0.9 * np.pi, np.pi, n_samples)
    lhs = np.abs(np.log(np.sin(np.pi * x) / np.sin(alpha * x)))
    bound = (np.pi - alpha) / np.sin(np.pi * delta / 2.0)
    bad = int(np.sum(lhs > bound * (1 + 1e-12)))
    worst = float(np.max(lhs / np.where(bound > 0, bound, np.inf)))
    return IdentityReport("log_sine_bound", float(bad), 0.0, float(bad), float(bad), 0.0, bad == 0,
                          detail=f"n={n_samples};max_ratio={worst:.4g}")


def check_arccosh_lower_bound(n_samples: int = 10000, seed: int = 1) -> IdentityReport:
    """arccosh^2(cosh x - 2) > x^2 - 1000 for x in [-50, 50]."""
    rng = np.random.default_rng(seed)
    x = np.concatenate([rng.uniform(-50.0, 50.0, n_samples), np.linspace(-50.0, 50.0, 1001)])
    lhs = arccosh_sq(np.cosh(x) - 2.0)
    margin = lhs - (x * x - 1000.0)
    bad = int(np.sum(~(margin > 0)))
    return IdentityReport("arccosh_lower_bound", float(bad), 0.0, float(bad), float(bad), 0.0, bad == 0,
                          detail=f"n={x.size};min_margin={float(np.min(margin)):.4g}")


def check_sampled_bounds(n_samples: int = 10000, seed: int = 0) -> list[IdentityReport]:
    """Both sampled inequality checks."""
    return [check_log_sine_bound(n_samples, seed), check_arccosh_lower_bound(n_samples, seed + 1)]


def check_gamma_closed_forms(n_points: int = 1000, seed: int = 2, tol: float = 1e-10) -> IdentityReport:
    """Elementary closed forms of |Gamma(l +- ik +- iw)|^2 against complex log-gamma.

    Covers l = 1, 2, 3 and l = 1/2, 3/2, 5/2 at random (k, w) in [-20, 20]^2.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_points):
        n = int(rng.integers(0, 3))
        half = bool(rng.integers(0, 2))
        k, w = rng.uniform(-20.0, 20.0, 2)
        l = n + (0.5 if half else 1.0)
        closed = gamma_abs_sq_closed(n, k + w, half=half) * gamma_abs_sq_closed(n, k - w, half=half)
        ref = float(np.exp(log_gamma_quad(l, k, w)))
        worst = max(worst, abs(closed / ref - 1.0))
    return IdentityReport("gamma_closed_forms", worst, 0.0, worst, worst, tol, worst <= tol,
                          detail=f"n={n_points}")


def run_identity_suite() -> list[IdentityReport]:
    """The default battery used by the verify command."""
    return [
        check_arccosh_expansion(0.5, 0.4, 0.0),
        check_arccosh_expansion(0.5, 0.4, 0.3),
        check_arccosh_expansion(-0.7, 0.25, 1.1),
        check_gamma_fourier_2d(1.0, 0.3, 0.7),
        check_gamma_fourier_2d(1.0, 0.0, 0.0),
        check_gamma_fourier_2d(1.5, 1.2, 0.4),
        check_sinh_ratio_fourier(1.0, 0.5, 2.0),
        check_sinh_ratio_fourier(2.0, 0.3, 0.7),
        *check_sampled_bounds(),
        check_gamma_closed_forms(),
    ]
