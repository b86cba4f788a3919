"""Stress-energy correlators: the limiting formula and its epsilon-regularised pre-limit.

A stress insertion at r multiplies the circle integrand by sigma^4 k(r)^2,
where k(r) is the variable of the face owning the arc through r.  The
pre-limit replaces it by 6 (chi(r, r+eps)^2 - eps^-2 - sigma^4/240).  A short
chord (r, r+eps) of power 2 enclosed by face f adds a new face of length eps
and shortens f by eps; integrating the new face variable out leaves face f
multiplied by the single-variable function

    L(eps, k) = e^{eps s^2 k^2/2} int_0^inf e^{-eps s^2 k1^2/2} sinh(2 pi k1)
                Gamma(1 +- i k1 +- i k) / (2 pi^2) (s^2/2)^2 2 k1 dk1,

so the whole pre-limit is the base integral with per-face multipliers
6 (L(eps_p, k) - eps_p^-2 - s^4/240).  L is evaluated with its Gaussian
moments split off in closed form, which keeps the eps^-2 cancellation exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import roots_legendre

from .correlator import (
    CorrelatorSpec,
    QuadratureConfig,
    Value,
    correlator_circle,
    default_k_max,
    evaluate_tree,
    log_face_weight,
)
from .diagram import (
    ENDPOINT_TOL,
    Chord,
    CircleDiagram,
    DiagramError,
    decompose_circle,
    face_of_point,
)

__all__ = [
    "StressSpec",
    "stress_correlator",
    "spectral_moment",
    "short_chord_value",
    "short_chord_offset",
    "short_chord_fit",
    "k2_coefficient_fit",
    "regularized_stress_lhs",
    "regularized_stress_lhs_expanded",
    "stress_prelimit_sweep",
    "remainder_exponent",
    "geometric_sweep",
]


@dataclass(frozen=True)
class StressSpec:
    """Insertion points r_p on the circle, a base diagram and sigma."""

    diagram: CircleDiagram
    insertion_points: tuple[float, ...]
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "insertion_points", tuple(float(r) % 1.0 for r in self.insertion_points))
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        pts = self.insertion_points
        for a, b in itertools.combinations(pts, 2):
            if abs(a - b) <= ENDPOINT_TOL:
                raise DiagramError("insertion points must be distinct")
        ends = [p % 1.0 for c in self.diagram.chords for p in (c.s, c.t)]
        for r in pts:
            if any(abs(r - e) <= ENDPOINT_TOL or abs(abs(r - e) - 1.0) <= ENDPOINT_TOL for e in ends):
                raise DiagramError(f"insertion point {r:g} coincides with a chord endpoint")

    @property
    def M(self) -> int:
        return len(self.insertion_points)


def _faces_of_points(spec: StressSpec):
    decomp = decompose_circle(spec.diagram)
    return decomp, [face_of_point(decomp, r) for r in spec.insertion_points]


def _k_max_for(decomp, sigma, M, cfg):
    if cfg.k_max is not None:
        return cfg.k_max
    # The k^{2M} insertions push the bulk outward by about sqrt(2M)/sigma.
    return default_k_max(decomp.taus, sigma) + 2.0 * math.sqrt(2.0 * M) / sigma


def stress_correlator(spec: StressSpec, cfg: QuadratureConfig = QuadratureConfig()) -> Value:
    """Circle integral with the extra factor sigma^{4M} prod_p k(r_p)^2."""
    decomp, faces = _faces_of_points(spec)
    counts = {m: faces.count(m) for m in set(faces)}
    s = spec.sigma
    pref = 4 * spec.M * math.log(s)

    def weights(m, k):
        lw = log_face_weight(k, decomp.faces[m].tau, s)
        if m in counts:
            lw = lw + 2 * counts[m] * np.log(k)
        if m == decomp.root_face:
            lw = lw + pref
        return lw, None

    return evaluate_tree(decomp, s, cfg, weights, k_max=_k_max_for(decomp, s, spec.M, cfg))


def spectral_moment(M: int, sigma: float, cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """sigma^{4M} int_0^inf exp(-sigma^2 k^2/2) sinh(2 pi k) 2 k^{2M+1} dk."""
    if M < 1:
        raise ValueError("M must be at least 1")
    spec = StressSpec(CircleDiagram(()), tuple(0.5 / M * i for i in range(M)), sigma)
    return float(stress_correlator(spec, cfg).estimate)


_GL_X, _GL_W = roots_legendre(160)


def _gl(a: float, b: float):
    return 0.5 * (b - a) * (_GL_X + 1.0) + a, 0.5 * (b - a) * _GL_W


def _x_over_expm1(y):
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < 1e-8
    safe = np.where(small, 1.0, y)
    with np.errstate(over="ignore"):
        val = safe / np.expm1(safe)
    return np.where(small, 1.0 - 0.5 * y, val)


def _remainder_integral(eps: float, k2: float, sigma: float) -> float:
    """(s^4/4) int k1 (k1^2 - k2^2) [coth pi(k1-k2) + coth pi(k1+k2) - 2] e^{-eps s^2 k1^2/2} dk1."""
    a = eps * sigma**2
    k2 = abs(k2)
    edges = sorted({0.0, k2, k2 + 2.0, k2 + 6.0, k2 + 14.0})
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        k1, w = _gl(lo, hi)
        g_minus = _x_over_expm1(2.0 * math.pi * (k1 - k2))
        g_plus = _x_over_expm1(2.0 * math.pi * (k1 + k2))
        f = k1 * ((k1 + k2) * g_minus + (k1 - k2) * g_plus) / math.pi
        total += float(np.sum(w * f * np.exp(-0.5 * a * k1 * k1)))
    return 0.25 * sigma**4 * total


def _neg_series(x: float) -> float:
    # (expm1(x) - x e^x) / x = -sum_{m>=1} m x^m / (m+1)!
    if abs(x) > 0.5:
        return (math.expm1(x) - x * math.exp(x)) / x
    term, total, m = 1.0, 0.0, 1
    fact = 2.0
    while True:
        term = m * x**m / fact
        total += term
        if abs(term) < 1e-18 * max(abs(total), 1e-300) or m > 60:
            break
        m += 1
        fact *= m + 1
    return -total


def short_chord_offset(eps: float, k2: float, sigma: float) -> float:
    """L(eps, k2) - eps^-2, computed without cancellation.

    The asymptote 2 k1 (k1^2 - k2^2) of the k1-integrand integrates against
    the Gaussian to (s^4/4)(4/a^2 - 2 k2^2/a) with a = eps s^2; the rest
    decays exponentially in k1.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    x = 0.5 * eps * sigma**2 * k2 * k2
    gauss_part = (sigma**2 * k2 * k2 / (2.0 * eps)) * _neg_series(x) if k2 != 0 else 0.0
    return gauss_part + math.exp(x) * _remainder_integral(eps, k2, sigma)


def short_chord_value(eps: float, k2: float, sigma: float) -> float:
    """The single-face function L(eps, k2), with the (s^2/2)^2 kernel factor."""
    return eps**-2 + short_chord_offset(eps, k2, sigma)


def geometric_sweep(lo: float = 1e-2, hi: float = 1e-5, n: int = 13) -> np.ndarray:
    return np.geomspace(lo, hi, n)


def short_chord_fit(k2: float, sigma: float, eps: Sequence[float] | None = None):
    """Least-squares fit of L(eps, k2) to A eps^-2 + B + C eps^{1/2}.

    The fit runs on L - eps^-2 (so the returned A is one plus the fitted
    correction).  Returns dict with A, B, C.
    """
    eps = geometric_sweep() if eps is None else np.asarray(eps, dtype=float)
    y = np.array([short_chord_offset(e, k2, sigma) for e in eps])
    X = np.column_stack([eps**-2.0, np.ones_like(eps), np.sqrt(eps)])
    scale = np.abs(X).max(axis=0)
    coef, *_ = np.linalg.lstsq(X / scale, y, rcond=None)
    coef = coef / scale
    return {"A": 1.0 + coef[0], "B": coef[1], "C": coef[2]}


def k2_coefficient_fit(sigma: float, k2_values: Sequence[float] = (0.0, 1.0, 2.0), eps=None):
    """Slope of the fitted constant B(k2) against k2^2."""
    ks = np.asarray(k2_values, dtype=float)
    bs = np.array([short_chord_fit(k, sigma, eps)["B"] for k in ks])
    X = np.column_stack([np.ones_like(ks), ks**2])
    coef, *_ = np.linalg.lstsq(X, bs, rcond=None)
    return {"intercept": coef[0], "slope": coef[1], "B": bs}


def _check_insertion_arcs(spec: StressSpec, eps: Sequence[float], decomp, faces):
    arcs = []
    for r, e, m in zip(spec.insertion_points, eps, faces):
        if not e > 0:
            raise ValueError("eps must be positive")
        ok = False
        for a, b in decomp.faces[m].arcs:
            rel = (r - a) % 1.0
            if ENDPOINT_TOL < rel and rel + e < (b - a) - ENDPOINT_TOL:
                ok = True
        if not ok:
            raise DiagramError(
                f"chord ({r:g}, {r + e:g}) would cross or touch the diagram; shrink eps"
            )
        arcs.append((r, e))
    for (r1, e1), (r2, e2) in itertools.combinations(arcs, 2):
        if (r2 - r1) % 1.0 < e1 + ENDPOINT_TOL or (r1 - r2) % 1.0 < e2 + ENDPOINT_TOL:
            raise DiagramError("regularising chords overlap; shrink eps")


def regularized_stress_lhs(spec: StressSpec, eps: Sequence[float] | float,
                           cfg: QuadratureConfig = QuadratureConfig()) -> Value:
    """6^M-weighted pre-limit prod_p (chi(r_p, r_p+eps_p)^2 - eps_p^-2 - s^4/240).

    Each factor acts as the face multiplier 6 (L(eps_p, k) - eps_p^-2 - s^4/240),
    which is the inclusion-exclusion over augmented diagrams summed in closed
    form.  Multipliers can be negative, so messages carry signs.
    """
    eps = [float(eps)] * spec.M if np.isscalar(eps) else [float(e) for e in eps]
    if len(eps) != spec.M:
        raise ValueError("need one eps per insertion point")
    decomp, faces = _faces_of_points(spec)
    _check_insertion_arcs(spec, eps, decomp, faces)
    s = spec.sigma
    shift = s**4 / 240.0
    km = _k_max_for(decomp, s, spec.M, cfg)
    cache: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}

    def multiplier(e, k):
        key = (e, k.size, float(k[-1]))
        if key not in cache:
            vals = 6.0 * (np.array([short_chord_offset(e, kk, s) for kk in k]) - shift)
            with np.errstate(divide="ignore"):
                cache[key] = (np.log(np.abs(vals)), np.sign(vals))
        return cache[key]

    def weights(m, k):
        lw = log_face_weight(k, decomp.faces[m].tau, s)
        sign = None
        for e, f in zip(eps, faces):
            if f != m:
                continue
            lm, sm = multiplier(e, k)
            lw = lw + lm
            sign = sm if sign is None else sign * sm
        return lw, sign

    return evaluate_tree(decomp, s, cfg, weights, k_max=km)


def regularized_stress_lhs_expanded(spec: StressSpec, eps: Sequence[float] | float,
                                    cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """The same pre-limit by explicit inclusion-exclusion over augmented diagrams.

    Loses about log10(eps^-2) digits to cancellation; meant as a cross-check
    at moderate eps.
    """
    eps = [float(eps)] * spec.M if np.isscalar(eps) else [float(e) for e in eps]
    decomp, faces = _faces_of_points(spec)
    _check_insertion_arcs(spec, eps, decomp, faces)
    s = spec.sigma
    consts = [e**-2 + s**4 / 240.0 for e in eps]
    total = 0.0
    for subset in itertools.product((False, True), repeat=spec.M):
        extra = [Chord(r % 1.0, (r + e) % 1.0, 2) for r, e, use in zip(spec.insertion_points, eps, subset) if use]
        coeff = 1.0
        for c, use in zip(consts, subset):
            if not use:
                coeff *= -c
        d = CircleDiagram(tuple(spec.diagram.chords) + tuple(extra))
        total += coeff * float(correlator_circle(CorrelatorSpec(d, s), cfg).estimate)
    return 6.0**spec.M * total


def stress_prelimit_sweep(spec: StressSpec, eps: Sequence[float], cfg: QuadratureConfig = QuadratureConfig()):
    """Pre-limit values over a sweep of a common eps for all insertions."""
    return np.array([float(regularized_stress_lhs(spec, e, cfg).estimate) for e in eps])


def remainder_exponent(eps: Sequence[float], values: Sequence[float], target: float) -> dict:
    """Fit |value - target| = C eps^p by least squares in log-log."""
    eps = np.asarray(eps, dtype=float)
    r = np.abs(np.asarray(values, dtype=float) - target)
    X = np.column_stack([np.ones_like(eps), np.log(eps)])
    coef, *_ = np.linalg.lstsq(X, np.log(r), rcond=None)
    return {"C": float(math.exp(coef[0])), "p": float(coef[1])}
