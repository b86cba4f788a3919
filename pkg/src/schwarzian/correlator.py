"""Exact correlators by quadrature over the face Fourier variables.

Every face variable lives on one shared k-grid.  The integrand factorises
over the nesting forest of faces, so the (N+1)-fold integral is evaluated by
passing messages from leaves to the root: each chord contributes a G x G
kernel matrix and each face a weight vector.  Messages are kept in log
domain (with a sign vector when weights can be negative) because sinh(2 pi k)
and the Gamma kernels span hundreds of orders of magnitude on the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from scipy.special import logsumexp, roots_legendre

from .diagram import (
    CircleDiagram,
    Chord,
    FaceDecomposition,
    IntervalDiagram,
    decompose_circle,
    decompose_interval,
)
from .specfun import log_gamma_quad

__all__ = [
    "QuadratureConfig",
    "CorrelatorSpec",
    "Value",
    "default_k_max",
    "k_grid",
    "face_weight",
    "log_face_weight",
    "chord_kernel",
    "log_chord_kernel",
    "correlator_circle",
    "correlator_circle_direct",
    "partition_function",
    "partition_function_quadrature",
    "moment",
    "correlator_interval",
    "correlator_interval_with_exp",
    "exp_moment_interval",
    "regularized_circle_correlator",
    "evaluate_tree",
]

Diagram = Union[CircleDiagram, IntervalDiagram]
LOG_PI = math.log(math.pi)


@dataclass(frozen=True)
class QuadratureConfig:
    """Shared k-grid: truncation k_max (None picks a default), node count, rule."""

    k_max: float | None = None
    n_nodes: int = 400
    rule: str = "gauss-legendre"
    tolerance: float = 1e-6
    estimate_error: bool = True

    def __post_init__(self):
        if self.k_max is not None and not self.k_max > 0:
            raise ValueError("k_max must be positive")
        if self.n_nodes < 16:
            raise ValueError("n_nodes must be at least 16")
        if self.rule not in ("gauss-legendre", "trapezoid"):
            raise ValueError(f"unknown quadrature rule {self.rule!r}")


@dataclass(frozen=True)
class CorrelatorSpec:
    diagram: Diagram
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class Value:
    """Quadrature result with the |I_n - I_{n/2}| refinement difference."""

    estimate: complex
    quadrature_error: float = 0.0
    converged: bool = True
    k_max: float = float("nan")
    n_nodes: int = 0

    def __float__(self) -> float:
        return float(np.real(self.estimate))


def default_k_max(taus, sigma: float, total: float = 1.0) -> float:
    """Truncation covering the bulk near 2 pi / (T sigma^2) plus Gaussian tails.

    The widest Gaussian among faces with positive arc length sets the tail
    margin; ten widths leave a factor e^-50 of the peak.
    """
    pos = [t for t in taus if t > 1e-12]
    tau_min = min(pos) if pos else total
    return max(10.0, 2.0 * math.pi / (total * sigma**2) + 10.0 / (sigma * math.sqrt(tau_min)))


@lru_cache(maxsize=64)
def _grid_cached(k_max: float, n: int, rule: str):
    if rule == "gauss-legendre":
        x, w = roots_legendre(n)
        k = 0.5 * k_max * (x + 1.0)
        q = 0.5 * k_max * w
    else:
        k = np.linspace(0.0, k_max, n)
        q = np.full(n, k_max / (n - 1))
        q[0] *= 0.5
        q[-1] *= 0.5
    k.setflags(write=False)
    q.setflags(write=False)
    return k, q


def k_grid(k_max: float, n: int, rule: str = "gauss-legendre"):
    """Nodes and weights on [0, k_max]."""
    return _grid_cached(float(k_max), int(n), rule)


def _log_sinh(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return x + np.log(-np.expm1(-2.0 * x)) - math.log(2.0)


def _log_cosh(x):
    x = np.abs(np.asarray(x, dtype=float))
    return x + np.log1p(np.exp(-2.0 * x)) - math.log(2.0)


def log_face_weight(k, tau: float, sigma: float):
    """log of exp(-tau sigma^2 k^2 / 2) sinh(2 pi k) 2k."""
    k = np.asarray(k, dtype=float)
    with np.errstate(divide="ignore"):
        return -0.5 * tau * sigma**2 * k * k + _log_sinh(2.0 * math.pi * k) + np.log(2.0 * k)


def face_weight(k, tau: float, sigma: float):
    """exp(-tau sigma^2 k^2 / 2) sinh(2 pi k) 2k; zero at k = 0."""
    k = np.asarray(k, dtype=float)
    out = np.exp(log_face_weight(np.where(k > 0, k, 1.0), tau, sigma))
    return np.where(k > 0, out, 0.0)


def log_chord_kernel(l: int, k, w, sigma: float):
    """log of Gamma(l/2 +- ik +- iw) (sigma^2/2)^l / (2 pi^2 Gamma(l))."""
    return (
        log_gamma_quad(0.5 * l, k, w)
        - math.log(2.0 * math.pi**2)
        - math.lgamma(l)
        + l * math.log(0.5 * sigma**2)
    )


def chord_kernel(l: int, k, w, sigma: float):
    return np.exp(log_chord_kernel(l, k, w, sigma))


@lru_cache(maxsize=32)
def _kernel_matrix(l: int, sigma: float, k_max: float, n: int, rule: str):
    k, _ = k_grid(k_max, n, rule)
    m = log_chord_kernel(l, k[:, None], k[None, :], sigma)
    m.setflags(write=False)
    return m


# A face weight is returned as (log|w|, sign) with sign None meaning all positive.
FaceWeightFn = Callable[[int, np.ndarray], tuple]


def _tree_sum(decomp: FaceDecomposition, sigma: float, k_max: float, n: int, rule: str,
              face_log_weight: FaceWeightFn, root_linear=None):
    k, q = k_grid(k_max, n, rule)
    with np.errstate(divide="ignore"):
        lq = np.log(q)
    logs: dict[int, np.ndarray] = {}
    signs: dict[int, np.ndarray | None] = {}
    for m in decomp.postorder():
        if m == decomp.root_face and root_linear is not None:
            lm, sm = np.zeros_like(k), None
        else:
            lm, sm = face_log_weight(m, k)
            lm = np.array(lm, dtype=float)
        for j, c in decomp.children(m):
            kern = _kernel_matrix(decomp.powers[j], float(sigma), float(k_max), n, rule)
            src = lq + logs[c]
            if signs[c] is None:
                inc = logsumexp(kern + src[None, :], axis=1)
                sgn = None
            else:
                inc, sgn = logsumexp(kern + src[None, :], axis=1, b=signs[c][None, :], return_sign=True)
            lm = lm + inc
            if sgn is not None:
                sm = sgn if sm is None else sm * sgn
        logs[m], signs[m] = lm, sm
    root = decomp.root_face
    l_root = lq + logs[root]
    finite = np.isfinite(l_root)
    if not np.any(finite):
        return 0.0
    top = np.max(l_root[finite])
    terms = np.exp(l_root - top)
    if signs[root] is not None:
        terms = terms * signs[root]
    if root_linear is not None:
        terms = terms * root_linear(k)
    total = np.sum(terms)
    with np.errstate(over="ignore"):
        return total * math.exp(top) if top < 709 else total * np.exp(np.float64(top))


def evaluate_tree(decomp: FaceDecomposition, sigma: float, cfg: QuadratureConfig,
                  face_log_weight: FaceWeightFn, root_linear=None, k_max: float | None = None,
                  total: float = 1.0) -> Value:
    """Message-passing sum with a refinement estimate from n/2 nodes."""
    km = k_max if k_max is not None else (
        cfg.k_max if cfg.k_max is not None else default_k_max(decomp.taus, sigma, total)
    )
    fine = _tree_sum(decomp, sigma, km, cfg.n_nodes, cfg.rule, face_log_weight, root_linear)
    err = 0.0
    if cfg.estimate_error:
        coarse = _tree_sum(decomp, sigma, km, cfg.n_nodes // 2, cfg.rule, face_log_weight, root_linear)
        err = float(abs(fine - coarse))
    scale = abs(fine)
    converged = bool(np.isfinite(scale) and err <= cfg.tolerance * max(scale, 1e-300))
    est = fine if np.iscomplexobj(fine) and np.imag(fine) != 0 else float(np.real(fine))
    return Value(est, err, converged, float(km), cfg.n_nodes)


def _standard_weights(decomp: FaceDecomposition, sigma: float) -> FaceWeightFn:
    def fn(m, k):
        return log_face_weight(k, decomp.faces[m].tau, sigma), None

    return fn


def _check_integrable(decomp: FaceDecomposition, interval: bool) -> None:
    for f in decomp.faces:
        if f.tau > 1e-12:
            continue
        degree = sum(1 for pc in decomp.chord_adjacency if f.id in pc)
        need = 2 if (interval and f.id == decomp.root_face) else 3
        if degree < need:
            raise ValueError(
                f"face {f.id} has zero arc length and only {degree} adjacent chords; "
                "the integral does not converge"
            )


def _circle_decomp(spec: CorrelatorSpec) -> FaceDecomposition:
    if not isinstance(spec.diagram, CircleDiagram):
        raise TypeError("expected a CircleDiagram")
    return decompose_circle(spec.diagram)


def correlator_circle(spec: CorrelatorSpec, cfg: QuadratureConfig = QuadratureConfig()) -> Value:
    """Circle correlator of non-interlaced chords by tree message passing."""
    decomp = _circle_decomp(spec)
    _check_integrable(decomp, interval=False)
    return evaluate_tree(decomp, spec.sigma, cfg, _standard_weights(decomp, spec.sigma))


def _direct_sum(decomp: FaceDecomposition, sigma: float, k_max: float, n: int, rule: str) -> float:
    k, q = k_grid(k_max, n, rule)
    lqw = [np.log(q) + log_face_weight(k, f.tau, sigma) for f in decomp.faces]
    n_f = decomp.n_faces
    if n_f == 1:
        return float(np.sum(np.exp(lqw[0] - lqw[0].max())) * math.exp(lqw[0].max()))
    kern = [_kernel_matrix(decomp.powers[j], float(sigma), float(k_max), n, rule)
            for j in range(len(decomp.chord_adjacency))]
    others = [m for m in range(n_f) if m != decomp.root_face]
    axis = {m: i for i, m in enumerate(others)}
    shape = (n,) * len(others)

    def along(vec, ax):
        s = [1] * len(others)
        s[ax] = n
        return vec.reshape(s)

    running_max, running_sum = -np.inf, 0.0
    for i in range(n):
        block = np.full(shape, lqw[decomp.root_face][i])
        for m in others:
            block = block + along(lqw[m], axis[m])
        for j, (p, c) in enumerate(decomp.chord_adjacency):
            if p == decomp.root_face:
                block = block + along(kern[j][i, :], axis[c])
            else:
                mat = kern[j]
                if axis[p] > axis[c]:
                    mat = mat.T
                s = [1] * len(others)
                s[axis[p]] = n
                s[axis[c]] = n
                block = block + mat.reshape(s)
        m_blk = block.max()
        if m_blk > running_max:
            running_sum = running_sum * math.exp(running_max - m_blk) if np.isfinite(running_max) else 0.0
            running_max = m_blk
        running_sum += float(np.sum(np.exp(block - running_max)))
    return running_sum * math.exp(running_max)


def correlator_circle_direct(spec: CorrelatorSpec, cfg: QuadratureConfig = QuadratureConfig()) -> Value:
    """Brute-force tensor-product quadrature of the same integral, N <= 2."""
    decomp = _circle_decomp(spec)
    if decomp.n_faces > 3:
        raise ValueError("direct tensor quadrature is limited to N <= 2 chords")
    km = cfg.k_max if cfg.k_max is not None else default_k_max(decomp.taus, spec.sigma)
    fine = _direct_sum(decomp, spec.sigma, km, cfg.n_nodes, cfg.rule)
    err = abs(fine - _direct_sum(decomp, spec.sigma, km, cfg.n_nodes // 2, cfg.rule)) if cfg.estimate_error else 0.0
    return Value(fine, float(err), bool(err <= cfg.tolerance * abs(fine)), float(km), cfg.n_nodes)


def partition_function(sigma: float) -> float:
    """Total mass (2 pi / sigma^2)^{3/2} exp(2 pi^2 / sigma^2)."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return (2.0 * math.pi / sigma**2) ** 1.5 * math.exp(2.0 * math.pi**2 / sigma**2)


def partition_function_quadrature(sigma: float, cfg: QuadratureConfig = QuadratureConfig()) -> Value:
    """The chordless circle integral, evaluated numerically."""
    return correlator_circle(CorrelatorSpec(CircleDiagram(()), sigma), cfg)


def moment(l: int, gap: float, sigma: float, cfg: QuadratureConfig = QuadratureConfig()) -> Value:
    """Two-face integral for a single chord of power l and arc length gap."""
    if not 0.0 < gap < 1.0:
        raise ValueError("gap must lie in (0, 1)")
    return correlator_circle(CorrelatorSpec(CircleDiagram((Chord(0.0, gap, l),)), sigma), cfg)


def _interval_decomp(spec: CorrelatorSpec):
    if not isinstance(spec.diagram, IntervalDiagram):
        raise TypeError("expected an IntervalDiagram")
    d = spec.diagram
    decomp = decompose_interval(d)
    _check_integrable(decomp, interval=True)
    return d, decomp


def correlator_interval(spec: CorrelatorSpec, cfg: QuadratureConfig = QuadratureConfig()) -> Value:
    """Interval correlator; the unbounded face carries exp(-tau0 s^2 k^2/2) cos(a k)/pi.

    Complex a is accepted with |a| < 2 pi provided no chord spans [0, T].
    """
    d = spec.diagram
    a = complex(getattr(d, "a", 0.0))
    if a.imag != 0.0:
        spanning = any(c.s <= 1e-12 and c.t >= d.T - 1e-12 for c in d.chords)
        if spanning:
            raise NotImplementedError("complex endpoint datum with a chord spanning [0, T]")
        if abs(a) >= 2.0 * math.pi:
            raise ValueError("complex endpoint datum must satisfy |a| < 2 pi")
    d, decomp = _interval_decomp(spec)
    tau0 = decomp.faces[decomp.root_face].tau
    s2 = spec.sigma**2
    a_val = a if a.imag != 0.0 else a.real

    def root(k):
        return np.exp(-0.5 * tau0 * s2 * k * k) * np.cos(a_val * k) / math.pi

    return evaluate_tree(decomp, spec.sigma, cfg, _standard_weights(decomp, spec.sigma),
                         root_linear=root, total=d.T)


def correlator_interval_with_exp(spec: CorrelatorSpec, alpha: float,
                                 cfg: QuadratureConfig = QuadratureConfig()) -> Value:
    """Interval correlator with the unbounded-face weight cosh(2 alpha k)/pi.

    This is the expectation with exp{(8 sin^2(alpha/2)/sigma^2) chi_0(0, T)}
    inserted, for chords strictly inside (0, T) and a = 0.
    """
    if not 0.0 <= alpha < math.pi:
        raise ValueError("alpha must lie in [0, pi)")
    d, decomp = _interval_decomp(spec)
    if complex(d.a) != 0:
        raise ValueError("the exponential insertion requires a = 0")
    if any(c.s <= 1e-12 or c.t >= d.T - 1e-12 for c in d.chords):
        raise ValueError("chords must lie strictly inside (0, T)")
    base = _standard_weights(decomp, spec.sigma)
    s2 = spec.sigma**2

    def weights(m, k):
        if m == decomp.root_face:
            tau0 = decomp.faces[m].tau
            return -0.5 * tau0 * s2 * k * k + _log_cosh(2.0 * alpha * k) - LOG_PI, None
        return base(m, k)

    return evaluate_tree(decomp, spec.sigma, cfg, weights, total=d.T)


def exp_moment_interval(z, a, T: float, sigma: float):
    """Closed form of E[exp{(z/sigma^2) chi_0(0,T)}] against the unnormalised bridge.

    Equals exp(-(2/(T sigma^2)) arccosh^2(cosh(a/2) - z/4)) / (sqrt(2 pi T) sigma).
    """
    from .specfun import arccosh_sq

    arg = np.cosh(np.asarray(a) / 2.0) - np.asarray(z) / 4.0
    if np.any(np.real(arg) < -1.0):
        raise ValueError("cosh(a/2) - z/4 must have real part >= -1")
    return np.exp(-2.0 / (T * sigma**2) * arccosh_sq(arg)) / (math.sqrt(2.0 * math.pi * T) * sigma)


def _reg_prefactor(alpha: float) -> float:
    return 1.0 if alpha == math.pi else (math.pi - alpha) / math.sin(alpha)


def regularized_circle_correlator(spec: CorrelatorSpec, alpha: float,
                                  cfg: QuadratureConfig = QuadratureConfig()) -> Value:
    """alpha-regularised circle correlator.

    Computes ((pi - alpha)/sin alpha) * sum_m tau_m J_m(alpha), where J_m has
    face m's weight exp(-tau s^2 k^2/2) 2k sinh(2 pi k) replaced by
    exp(-tau s^2 k^2/2) 2k sinh(2 alpha k).  With I_m the integral using
    2k sinh(2 alpha k)/pi, J_m = pi I_m, so this is the usual
    pi (pi - alpha)/sin(alpha) sum tau_m I_m.  At alpha = pi every J_m is
    the plain correlator.
    """
    if not 0.0 < alpha <= math.pi:
        raise ValueError("alpha must lie in (0, pi]")
    decomp = _circle_decomp(spec)
    if any(f.tau <= 1e-12 for f in decomp.faces):
        raise ValueError("every face needs positive arc length for the regularised evaluator")
    base = _standard_weights(decomp, spec.sigma)
    s2 = spec.sigma**2
    km = cfg.k_max if cfg.k_max is not None else default_k_max(decomp.taus, spec.sigma)
    total, err = 0.0, 0.0
    for face in decomp.faces:
        if alpha == math.pi:
            weights = base
        else:
            def weights(m, k, _target=face.id):
                if m != _target:
                    return base(m, k)
                tau = decomp.faces[m].tau
                with np.errstate(divide="ignore"):
                    return (-0.5 * tau * s2 * k * k + _log_sinh(2.0 * alpha * k) + np.log(2.0 * k)), None
        v = evaluate_tree(decomp, spec.sigma, cfg, weights, k_max=km)
        total += face.tau * v.estimate
        err += face.tau * v.quadrature_error
    pref = _reg_prefactor(alpha)
    est = pref * total
    err = abs(pref) * err
    return Value(est, err, bool(err <= cfg.tolerance * abs(est)), km, cfg.n_nodes)
