"""Monte Carlo over Brownian bridges, independent of the exact formulas.

Paths are generated by the Levy midpoint construction on a uniform grid.
Samples are produced in blocks; block b of stream s always draws from the
substream ``SeedSequence(seed, spawn_key=(s, b))``, and per-sample values are
reduced in block order, so estimates do not depend on the number of worker
threads.  Expectations are taken against unnormalised bridge measures: the
sample mean over the normalised bridge is multiplied by the analytic total
mass exp(-a^2/(2 T s^2)) / (sqrt(2 pi T) s).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate
from scipy.optimize import brentq
from scipy.special import logsumexp

from .diagram import (
    ENDPOINT_TOL,
    Chord,
    CircleDiagram,
    IntervalDiagram,
    cut_circle_at,
    decompose_circle,
)
from .specfun import arccosh_sq

__all__ = [
    "SamplerConfig",
    "MCEstimate",
    "BridgePath",
    "bridge_mass",
    "sample_bridge",
    "q_map",
    "p_map",
    "chi0",
    "chi_alpha",
    "chi_pi",
    "mc_expectation",
    "mc_interval_correlator",
    "mc_circle_correlator",
    "mc_exp_moment",
    "endpoint_shift",
    "mc_endpoint_shift_check",
    "fractional_linear",
    "mc_girsanov_check",
    "mc_concatenation_check",
    "circle_observables",
    "gauge_fix",
    "reconstruct_phi",
    "ReconstructionError",
]


@dataclass(frozen=True)
class SamplerConfig:
    """Path resolution, sample count, master seed and blocking."""

    n_steps: int = 1024
    n_samples: int = 100_000
    seed: int = 0
    block_size: int = 10_000
    workers: int = 1

    def __post_init__(self):
        if self.n_steps < 2:
            raise ValueError("n_steps must be at least 2")
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        if self.block_size < 1:
            raise ValueError("block_size must be positive")


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    n: int
    n_excluded: int = 0

    def zscore(self, target: float) -> float:
        return (self.mean - target) / self.stderr if self.stderr > 0 else (
            0.0 if self.mean == target else math.inf
        )


@dataclass
class BridgePath:
    """A batch of bridge paths sharing one grid; xi has shape (n_paths, n_steps + 1)."""

    T: float
    a: float
    sigma: float
    grid: np.ndarray
    xi: np.ndarray

    @property
    def n_steps(self) -> int:
        return self.grid.size - 1

    @property
    def dt(self) -> float:
        return self.T / self.n_steps

    def index(self, t: float) -> int:
        """Grid index nearest to time t."""
        i = int(round(t / self.dt))
        if not 0 <= i <= self.n_steps:
            raise ValueError(f"time {t:g} outside [0, {self.T:g}]")
        return i


def bridge_mass(a, T: float, sigma: float):
    """Total mass of the unnormalised bridge measure."""
    return np.exp(-np.asarray(a) ** 2 / (2.0 * T * sigma**2)) / (math.sqrt(2.0 * math.pi * T) * sigma)


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def _levy_bridge(rng: np.random.Generator, n_paths: int, n_steps: int, T: float, sigma: float) -> np.ndarray:
    """Zero-to-zero bridge by midpoint refinement (power-of-two n_steps)."""
    xi = np.zeros((n_paths, n_steps + 1))
    dt = T / n_steps
    h = n_steps
    while h > 1:
        half = h // 2
        mid = np.arange(half, n_steps, h)
        sd = sigma * math.sqrt(half * dt / 2.0)
        xi[:, mid] = 0.5 * (xi[:, mid - half] + xi[:, mid + half]) + sd * rng.standard_normal((n_paths, mid.size))
        h = half
    return xi


def _cumsum_bridge(rng: np.random.Generator, n_paths: int, n_steps: int, T: float, sigma: float) -> np.ndarray:
    dt = T / n_steps
    w = np.zeros((n_paths, n_steps + 1))
    w[:, 1:] = np.cumsum(sigma * math.sqrt(dt) * rng.standard_normal((n_paths, n_steps)), axis=1)
    t = np.linspace(0.0, T, n_steps + 1)
    return w - (t / T)[None, :] * w[:, -1:]


def _bridge_values(rng, n_paths, n_steps, T, sigma, a):
    build = _levy_bridge if _is_pow2(n_steps) else _cumsum_bridge
    xi = build(rng, n_paths, n_steps, T, sigma)
    t = np.linspace(0.0, T, n_steps + 1)
    xi += (a / T) * t[None, :]
    xi[:, 0] = 0.0
    xi[:, -1] = a
    return t, xi


def _block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, block)))


def sample_bridge(a: float, T: float, sigma: float, cfg: SamplerConfig, stream: int = 0,
                  block: int = 0, n_paths: int | None = None) -> BridgePath:
    """Draw a batch of normalised bridges from 0 to a on [0, T]."""
    if not T > 0:
        raise ValueError("T must be positive")
    n = cfg.block_size if n_paths is None else n_paths
    t, xi = _bridge_values(_block_rng(cfg.seed, stream, block), n, cfg.n_steps, T, sigma, a)
    return BridgePath(T, a, sigma, t, xi)


def _cumtrapz(f: np.ndarray, dt: float) -> np.ndarray:
    out = np.zeros(f.shape, dtype=f.dtype)
    out[..., 1:] = np.cumsum(0.5 * dt * (f[..., 1:] + f[..., :-1]), axis=-1)
    return out


def q_map(path: BridgePath) -> np.ndarray:
    """Q(t_i) = int_0^{t_i} e^xi by the cumulative trapezoid rule."""
    return _cumtrapz(np.exp(path.xi), path.dt)


def p_map(path: BridgePath, Q: np.ndarray | None = None) -> np.ndarray:
    """Normalised diffeomorphism P = Q / Q(T), so P(T) = 1."""
    Q = q_map(path) if Q is None else Q
    return Q / Q[:, -1:]


def chi0(path: BridgePath, s: float, t: float, Q: np.ndarray | None = None) -> np.ndarray:
    """exp((xi(s) + xi(t))/2) / (Q(t) - Q(s)) for s < t, endpoints snapped to the grid."""
    if abs(t - s) <= ENDPOINT_TOL:
        raise ValueError("chi0 needs s != t")
    s, t = min(s, t), max(s, t)
    i, j = path.index(s), path.index(t)
    if i == j:
        raise ValueError("s and t snap to the same grid point")
    Q = q_map(path) if Q is None else Q
    return np.exp(0.5 * (path.xi[:, i] + path.xi[:, j])) / (Q[:, j] - Q[:, i])


def _phi_and_derivative(path: BridgePath, Q: np.ndarray | None = None):
    Q = q_map(path) if Q is None else Q
    total = Q[:, -1:]
    return Q / total, np.exp(path.xi) / total


def chi_alpha(path: BridgePath, s: float, t: float, alpha: float, Q: np.ndarray | None = None) -> np.ndarray:
    """alpha sqrt(phi'(s) phi'(t)) / sin(alpha [phi(t) - phi(s)]) with phi = P on [0, 1].

    The difference is taken counterclockwise, (phi(t) - phi(s)) mod 1, and the
    exact pair (0, 1) uses phi(1) - phi(0) = 1.  Pairs whose counterclockwise
    separation is within 1e-9 of a full turn are rejected.
    """
    if path.T != 1.0:
        raise ValueError("circle observables need T = 1")
    if abs(t - s) <= ENDPOINT_TOL:
        raise ValueError("chi_alpha needs s != t")
    phi, dphi = _phi_and_derivative(path, Q)
    i, j = path.index(s), path.index(t)
    if (s, t) == (0.0, 1.0) or (i, j) == (0, path.n_steps):
        diff = np.ones(phi.shape[0])
    else:
        sep = (t - s) % 1.0
        if sep > 1.0 - 1e-9:
            raise ValueError("near-wrap pair has no defined regularisation")
        diff = (phi[:, j] - phi[:, i]) % 1.0
    den = np.sin(alpha * diff)
    if np.any(np.abs(den) < 1e-300):
        raise ValueError("sin(alpha (phi(t) - phi(s))) vanishes")
    return alpha * np.sqrt(dphi[:, i] * dphi[:, j]) / den


def chi_pi(path: BridgePath, s: float, t: float, Q: np.ndarray | None = None) -> np.ndarray:
    return chi_alpha(path, s, t, math.pi, Q)


BlockFn = Callable[[np.random.Generator, int], np.ndarray]


def _run_blocks(cfg: SamplerConfig, stream: int, block_fn: BlockFn) -> tuple[np.ndarray, int]:
    sizes = [cfg.block_size] * (cfg.n_samples // cfg.block_size)
    if cfg.n_samples % cfg.block_size:
        sizes.append(cfg.n_samples % cfg.block_size)

    def job(b):
        return np.asarray(block_fn(_block_rng(cfg.seed, stream, b), sizes[b]), dtype=float)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    else:
        parts = [job(b) for b in range(len(sizes))]
    values = np.concatenate(parts)
    finite = np.isfinite(values)
    n_bad = int(values.size - finite.sum())
    if n_bad > 1e-3 * values.size:
        warnings.warn(f"{n_bad} of {values.size} Monte Carlo samples were non-finite and excluded")
    return values[finite], n_bad


def _estimate(values: np.ndarray, n_bad: int, scale: float) -> MCEstimate:
    n = values.size
    mean = float(np.mean(values)) * scale
    stderr = float(np.std(values, ddof=1) / math.sqrt(n)) * abs(scale) if n > 1 else 0.0
    return MCEstimate(mean, stderr, n, n_bad)


def mc_expectation(functional: Callable[[BridgePath], np.ndarray], a: float, T: float, sigma: float,
                   cfg: SamplerConfig, stream: int = 0) -> MCEstimate:
    """Expectation of a path functional against the unnormalised bridge W^{a,T}.

    ``functional`` maps a BridgePath batch to one value per path.
    """
    def block(rng, n):
        t, xi = _bridge_values(rng, n, cfg.n_steps, T, sigma, a)
        vals = functional(BridgePath(T, a, sigma, t, xi))
        return np.broadcast_to(np.real(np.asarray(vals, dtype=complex)), (n,))

    values, n_bad = _run_blocks(cfg, stream, block)
    return _estimate(values, n_bad, float(bridge_mass(a, T, sigma)))


def _chord_product(path: BridgePath, chords: Sequence[Chord], Q: np.ndarray | None = None) -> np.ndarray:
    Q = q_map(path) if Q is None else Q
    out = np.ones(path.xi.shape[0])
    for c in chords:
        out = out * chi0(path, c.s, c.t, Q) ** c.l
    return out


def mc_interval_correlator(d: IntervalDiagram, sigma: float, cfg: SamplerConfig, stream: int = 0) -> MCEstimate:
    """Monte Carlo of prod_j chi_0(s_j, t_j)^{l_j} against W^{a,T}."""
    a = complex(d.a)
    if a.imag != 0:
        raise ValueError("Monte Carlo needs a real endpoint datum")

    def functional(path):
        return _chord_product(path, d.chords)

    return mc_expectation(functional, a.real, d.T, sigma, cfg, stream)


def _best_cut(d: CircleDiagram):
    decomp = decompose_circle(d)
    best = None
    for f in decomp.faces:
        if not any(b - a > ENDPOINT_TOL for a, b in f.arcs):
            continue
        interval, _ = cut_circle_at(d, f.id, decomp)
        span = max((c.t - c.s for c in interval.chords), default=0.0)
        if best is None or span < best[0] - 1e-15:
            best = (span, interval)
    return best


def mc_circle_correlator(d: CircleDiagram, sigma: float, cfg: SamplerConfig, stream: int = 0) -> MCEstimate:
    """Circle correlator from pinned bridges with a complex endpoint shift.

    After cutting the circle inside a face m, the correlator equals
    pi d/d(alpha) J(alpha) at alpha = pi, where J(alpha) is the interval
    expectation of prod chi_0^l at the complex endpoint 2 i alpha.  Writing
    the path as eta + 2 i alpha t with eta a real 0-to-0 bridge gives a
    pathwise derivative whose variance is finite as long as every chord of
    the cut diagram spans at most half the circle; the face minimising the
    largest span is used.
    """
    best = _best_cut(d)
    if best is None:
        raise ValueError("no face with a positive boundary arc to cut")
    span, interval = best
    if span > 0.5 + 1e-12:
        raise ValueError("every cut leaves a chord spanning more than half the circle")
    alpha = math.pi
    s2 = sigma**2
    chords = interval.chords

    def block(rng, n):
        t, eta = _bridge_values(rng, n, cfg.n_steps, 1.0, sigma, 0.0)
        dt = 1.0 / cfg.n_steps
        e = np.exp(eta + 2j * alpha * t[None, :])
        c1 = _cumtrapz(e, dt)
        c2 = _cumtrapz(2j * t[None, :] * e, dt)
        f = np.ones(n, dtype=complex)
        dlog = np.full(n, 4.0 * alpha / s2, dtype=complex)
        for c in chords:
            i, j = int(round(c.s / dt)), int(round(c.t / dt))
            den = c1[:, j] - c1[:, i]
            dden = c2[:, j] - c2[:, i]
            chi = np.exp(0.5 * (eta[:, i] + eta[:, j]) + 1j * alpha * (t[i] + t[j])) / den
            f *= chi ** c.l
            dlog += c.l * (1j * (t[i] + t[j]) - dden / den)
        return math.pi * np.real(f * dlog)

    mass = math.exp(2.0 * alpha**2 / s2) / (math.sqrt(2.0 * math.pi) * sigma)
    values, n_bad = _run_blocks(cfg, stream, block)
    return _estimate(values, n_bad, mass)


def _saddle_drift(beta: float, u: np.ndarray) -> np.ndarray:
    # Stationary path of the tilted action; chi_0(0,1) on it equals beta / sin(beta).
    if beta == 0.0:
        return np.zeros_like(u)
    return 2.0 * np.log(math.cos(beta / 2.0) / np.cos(beta * (u - 0.5)))


def _saddle_mixture(z: float, sigma: float, T: float, n_components: int = 48):
    rate = max(8.0 - z, 0.5) / (sigma**2 * T)
    x_max = min(1.0 + 30.0 / rate, 200.0)
    xs = np.linspace(1.0, x_max, n_components)
    betas = [0.0] + [brentq(lambda b, x=x: b / math.sin(b) - x, 1e-12, math.pi - 1e-15) for x in xs[1:]]
    rho = np.exp(-rate * (xs - 1.0))
    rho = 0.5 * rho / rho.sum()
    rho[0] += 0.5
    return np.array(betas), rho


def mc_exp_moment(z: float, a: float, T: float, sigma: float, cfg: SamplerConfig,
                  chords: Sequence[Chord] = (), importance: bool | str = "auto", stream: int = 0) -> MCEstimate:
    """E[exp{(z/s^2) chi_0(0,T)} prod chi_0^l] against the unnormalised W^{a,T}.

    For z >= 4 the plain estimator has infinite variance (the tail of
    chi_0(0,T) decays like exp(-8x/s^2)).  With importance sampling the
    bridge is shifted by a drift drawn from a mixture of stationary paths of
    the tilted action, and the exact discrete Cameron-Martin density of the
    mixture is divided out.  ``importance="auto"`` enables this for z > 3.
    """
    use_is = (z > 3.0) if importance == "auto" else bool(importance)
    s2 = sigma**2
    n = cfg.n_steps
    dt = T / n
    u = np.linspace(0.0, 1.0, n + 1)
    if use_is:
        betas, rho = _saddle_mixture(z, sigma, T)
        drifts = np.array([_saddle_drift(b, u) for b in betas])
        d_drift = np.diff(drifts, axis=1)
        half_norm = 0.5 * np.sum(d_drift**2, axis=1) / (s2 * dt)
        log_rho = np.log(rho)

    def block(rng, m):
        t, xi = _bridge_values(rng, m, n, T, sigma, a)
        log_w = 0.0
        if use_is:
            comp = rng.choice(rho.size, size=m, p=rho)
            xi = xi + drifts[comp]
            log_r = np.diff(xi, axis=1) @ d_drift.T / (s2 * dt) - half_norm[None, :]
            log_w = -logsumexp(log_r + log_rho[None, :], axis=1)
        path = BridgePath(T, a, sigma, t, xi)
        Q = q_map(path)
        val = (z / s2) * chi0(path, 0.0, T, Q) + log_w
        return np.exp(val) * _chord_product(path, chords, Q)

    values, n_bad = _run_blocks(cfg, stream, block)
    return _estimate(values, n_bad, float(bridge_mass(a, T, sigma)))


def endpoint_shift(z, a):
    """b = 2 arccosh(cosh(a/2) - z/4), real for z < 0."""
    return 2.0 * np.sqrt(arccosh_sq(np.cosh(np.asarray(a) / 2.0) - np.asarray(z) / 4.0))


def mc_endpoint_shift_check(z: float, a: float, T: float, sigma: float, chords: Sequence[Chord],
                            cfg: SamplerConfig) -> tuple[MCEstimate, MCEstimate]:
    """Estimate both sides of the exponential-for-endpoint trade.

    LHS: insertion exp{(z/s^2) chi_0(0,T)} at endpoint a.  RHS: no insertion
    at endpoint b.  The two use independent substreams.
    """
    if not z < 0:
        raise ValueError("the endpoint shift check needs z < 0")
    lhs = mc_exp_moment(z, a, T, sigma, cfg, chords, importance=False, stream=1)
    b = float(endpoint_shift(z, a))
    rhs = mc_expectation(lambda p: _chord_product(p, chords), b, T, sigma, cfg, stream=2)
    return lhs, rhs


@dataclass(frozen=True)
class FractionalLinear:
    """f(u) = e^lam u / ((e^lam - 1) u + 1) on [0, 1]; its Schwarzian vanishes."""

    lam: float

    @property
    def c(self) -> float:
        return math.expm1(self.lam)

    def __call__(self, u):
        return math.exp(self.lam) * u / (self.c * u + 1.0)

    def derivative(self, u):
        return math.exp(self.lam) / (self.c * u + 1.0) ** 2

    def inverse(self, u):
        return u / (math.exp(self.lam) - self.c * u)

    def inverse_derivative(self, u):
        return math.exp(self.lam) / (math.exp(self.lam) - self.c * u) ** 2

    def log_derivative_jump(self) -> float:
        """b = log f'(1) - log f'(0), which equals -2 lam."""
        return math.log(self.derivative(1.0)) - math.log(self.derivative(0.0))

    def second_over_first(self, u):
        return -2.0 * self.c / (self.c * u + 1.0)


def fractional_linear(lam: float) -> FractionalLinear:
    return FractionalLinear(lam)


def _default_battery():
    def chi_quarter(phi, dphi, idx):
        i, j = idx(0.25), idx(0.75)
        return np.sqrt(dphi[:, i] * dphi[:, j]) / (phi[:, j] - phi[:, i])

    def phi_half(phi, dphi, idx):
        return phi[:, idx(0.5)]

    def damped_slope(phi, dphi, idx):
        return np.exp(-dphi[:, idx(0.5)])

    def one(phi, dphi, idx):
        return np.ones(phi.shape[0])

    return {"chi0(1/4,3/4)": chi_quarter, "phi(1/2)": phi_half, "exp(-phi'(1/2))": damped_slope, "1": one}


def mc_girsanov_check(lam: float, a: float, sigma: float, cfg: SamplerConfig, functionals=None) -> dict:
    """Check the reparametrisation identity for the fractional-linear map f.

    With P the diffeomorphism of a bridge, the law of f^{-1} o P under W^{a}
    equals the law of P under W^{a - b}, b = log f'(1) - log f'(0) = -2 lam,
    reweighted by (f'(0) f'(1))^{-1/2} exp{[f''(0)/f'(0) P'(0)
    - f''(1)/f'(1) P'(1)] / s^2}.  Returns {name: (lhs, rhs)}.
    """
    f = fractional_linear(lam)
    functionals = functionals or _default_battery()
    s2 = sigma**2
    b = f.log_derivative_jump()
    pref = 1.0 / math.sqrt(f.derivative(0.0) * f.derivative(1.0))
    n = cfg.n_steps

    def idx(t):
        return int(round(t * n))

    def lhs_values(phi, dphi):
        new_phi = f.inverse(phi)
        new_dphi = f.inverse_derivative(phi) * dphi
        return new_phi, new_dphi

    report = {}
    for k, (name, fn) in enumerate(functionals.items()):
        def lhs_fn(path, fn=fn):
            phi, dphi = _phi_and_derivative(path)
            return fn(*lhs_values(phi, dphi), idx)

        def rhs_fn(path, fn=fn):
            phi, dphi = _phi_and_derivative(path)
            dens = pref * np.exp((f.second_over_first(0.0) * dphi[:, 0] - f.second_over_first(1.0) * dphi[:, -1]) / s2)
            return fn(phi, dphi, idx) * dens

        lhs = mc_expectation(lhs_fn, a, 1.0, sigma, cfg, stream=10 + 2 * k)
        rhs = mc_expectation(rhs_fn, a - b, 1.0, sigma, cfg, stream=11 + 2 * k)
        report[name] = (lhs, rhs)
    return report


def mc_concatenation_check(T1: float, T2: float, a: float, sigma: float, cfg: SamplerConfig,
                           g: Callable[[np.ndarray], np.ndarray] | None = None):
    """Bridge on [0, T1+T2] split at T1: sampled LHS against a 1D quadrature RHS.

    Returns (lhs MCEstimate, rhs float) for F = g(xi(T1)), default g(x) = exp(-x^2).
    """
    if not (T1 > 0 and T2 > 0):
        raise ValueError("T1 and T2 must be positive")
    g = g or (lambda x: np.exp(-np.asarray(x) ** 2))
    T = T1 + T2
    i = int(round(T1 / T * cfg.n_steps))
    if abs(i * T / cfg.n_steps - T1) > 1e-12 * T:
        raise ValueError("T1 must fall on the time grid")
    lhs = mc_expectation(lambda p: g(p.xi[:, i]), a, T, sigma, cfg, stream=20)

    def integrand(b):
        return float(bridge_mass(b, T1, sigma) * bridge_mass(a - b, T2, sigma) * g(b))

    rhs, _ = integrate.quad(integrand, -np.inf, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)
    return lhs, rhs


class ReconstructionError(ValueError):
    """Observable values inconsistent with an increasing diffeomorphism."""


def circle_observables(phi: np.ndarray, dphi: np.ndarray):
    """chi(phi; 0, t_j) for j >= 1 and chi(phi; t_j, t_{j+1}) for j >= 1.

    ``phi`` and ``dphi`` are values on a grid t_0 = 0 < t_1 < ... < t_K < 1.
    """
    phi = np.asarray(phi, dtype=float)
    dphi = np.asarray(dphi, dtype=float)
    c0 = math.pi * np.sqrt(dphi[..., :1] * dphi[..., 1:]) / np.sin(math.pi * (phi[..., 1:] - phi[..., :1]))
    adj = math.pi * np.sqrt(dphi[..., 1:-1] * dphi[..., 2:]) / np.sin(math.pi * (phi[..., 2:] - phi[..., 1:-1]))
    return c0, adj


def gauge_fix(phi: np.ndarray, dphi: np.ndarray, mid: int):
    """Compose with a Mobius map so that phi(0)=0, phi'(0)=1 and phi(t_mid)=1/2.

    In the coordinate y = -cot(pi u) the point u = 0 sits at infinity and the
    stabiliser acts by affine maps y -> A y + B.  A = phi'(0) normalises the
    slope at 0 and B = -A y(phi(t_mid)) sends t_mid to u = 1/2.
    """
    phi = np.asarray(phi, dtype=float)
    dphi = np.asarray(dphi, dtype=float)
    A = dphi[..., :1]
    y_mid = -1.0 / np.tan(math.pi * phi[..., mid:mid + 1])
    B = -A * y_mid
    inner = phi[..., 1:]
    y = A * (-1.0 / np.tan(math.pi * inner)) + B
    new_inner = (math.pi / 2.0 + np.arctan(y)) / math.pi
    new_dinner = A * dphi[..., 1:] * (math.pi / np.sin(math.pi * inner) ** 2) / (math.pi * (1.0 + y * y))
    new_phi = np.concatenate([np.zeros_like(A), new_inner], axis=-1)
    new_dphi = np.concatenate([dphi[..., :1] / A, new_dinner], axis=-1)
    return new_phi, new_dphi


def reconstruct_phi(chi_0t: np.ndarray, chi_adj: np.ndarray, mid: int):
    """Recover phi(t_j), phi'(t_j) for j >= 1 from gauge-fixed observables.

    chi_0t[j-1] = chi(phi; 0, t_j) and chi_adj[j-1] = chi(phi; t_j, t_{j+1});
    ``mid`` is the index with t_mid = 1/2.  cot(pi phi) is telescoped outward
    from cot(pi phi(t_mid)) = 0 using
    cot(pi phi_j) - cot(pi phi_{j+1}) = chi(0,t_j) chi(0,t_{j+1}) / (pi chi(t_j,t_{j+1})).
    """
    c0 = np.asarray(chi_0t, dtype=float)
    adj = np.asarray(chi_adj, dtype=float)
    K = c0.shape[-1]
    if adj.shape[-1] != K - 1:
        raise ReconstructionError("need one adjacent observable per consecutive pair")
    if not 1 <= mid <= K:
        raise ReconstructionError("anchor index outside the grid")
    incr = c0[..., :-1] * c0[..., 1:] / (math.pi * adj)
    cot = np.zeros(c0.shape)
    m = mid - 1
    for j in range(m - 1, -1, -1):
        cot[..., j] = cot[..., j + 1] + incr[..., j]
    for j in range(m + 1, K):
        cot[..., j] = cot[..., j - 1] - incr[..., j - 1]
    phi = (math.pi / 2.0 - np.arctan(cot)) / math.pi
    if np.any(np.diff(phi, axis=-1) <= 0) or np.any(phi <= 0) or np.any(phi >= 1):
        raise ReconstructionError("recovered phi is not increasing in (0, 1)")
    dphi = (c0 * np.sin(math.pi * phi) / math.pi) ** 2
    return phi, dphi
