"""Command line front end: JSON diagram specs in, CSV rows out.

Input files look like

    {"geometry": "circle", "sigma": 1.0, "chords": [[0.0, 0.5, 1]]}
    {"geometry": "interval", "T": 1.0, "a": 0.0, "sigma": 1.0,
     "chords": [{"s": 0.1, "t": 0.9, "l": 1}]}

``sigma_sq`` may replace ``sigma``; stress specs add ``"insertions": [r, ...]``.
Every row carries sigma, a hash of the diagram and the numerical config, so
it can be reproduced.  The exit status is 1 when a check row fails and 2 on
bad input.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .correlator import (
    CorrelatorSpec,
    QuadratureConfig,
    correlator_circle,
    correlator_interval,
    partition_function,
    partition_function_quadrature,
    regularized_circle_correlator,
)
from .diagram import Chord, CircleDiagram, DiagramError, IntervalDiagram
from .identities import run_identity_suite
from .montecarlo import SamplerConfig, mc_circle_correlator, mc_interval_correlator
from .stress_energy import (
    StressSpec,
    k2_coefficient_fit,
    short_chord_fit,
    remainder_exponent,
    stress_correlator,
    stress_prelimit_sweep,
)

HEADER = ("subcommand", "label", "value", "error", "extra")
OUTPUT_DIR_ENV = "SCHWARZIAN_OUTPUT_DIR"


class InputError(Exception):
    """Unreadable or malformed input spec."""


@dataclass
class RunConfig:
    subcommand: str
    input: str | None = None
    output: str | None = None
    sigma_sq: float | None = None
    k_max: float | None = None
    nodes: int = 400
    seed: int = 0
    samples: int = 100000
    steps: int = 1024
    alpha: list[float] = field(default_factory=list)
    eps_sweep: tuple[float, float, int] = (1e-2, 1e-5, 7)
    tolerance: float | None = None

    def quadrature(self) -> QuadratureConfig:
        return QuadratureConfig(k_max=self.k_max, n_nodes=self.nodes)

    def sampler(self) -> SamplerConfig:
        return SamplerConfig(n_steps=self.steps, n_samples=self.samples, seed=self.seed)


@dataclass
class LoadedSpec:
    geometry: str
    sigma: float
    diagram: CircleDiagram | IntervalDiagram
    insertions: tuple[float, ...]
    digest: str


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def _chord(obj, idx: int) -> Chord:
    if isinstance(obj, dict):
        return Chord(float(obj["s"]), float(obj["t"]), int(obj.get("l", 1)))
    if isinstance(obj, (list, tuple)) and len(obj) in (2, 3):
        return Chord(float(obj[0]), float(obj[1]), int(obj[2]) if len(obj) == 3 else 1)
    raise InputError(f"chord {idx}: expected [s, t, l] or {{s, t, l}}")


def load_spec(path: str, sigma_sq: float | None = None) -> LoadedSpec:
    """Read a JSON spec, reporting parse errors with their position."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno} (char {exc.pos}): {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise InputError(f"{path}: top level must be an object")
    geometry = raw.get("geometry", "circle")
    if sigma_sq is not None:
        sigma = math.sqrt(sigma_sq)
    elif "sigma" in raw:
        sigma = float(raw["sigma"])
    elif "sigma_sq" in raw:
        sigma = math.sqrt(float(raw["sigma_sq"]))
    else:
        sigma = 1.0
    try:
        chords = tuple(_chord(c, i) for i, c in enumerate(raw.get("chords", [])))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: bad chord entry ({exc})") from exc
    if geometry == "circle":
        diagram = CircleDiagram(chords)
    elif geometry == "interval":
        diagram = IntervalDiagram(float(raw.get("T", 1.0)), float(raw.get("a", 0.0)), chords)
    else:
        raise InputError(f"{path}: unknown geometry {geometry!r}")
    insertions = tuple(float(r) for r in raw.get("insertions", []))
    canon = {
        "geometry": geometry,
        "T": getattr(diagram, "T", 1.0),
        "a": float(np.real(getattr(diagram, "a", 0.0))),
        "chords": [[c.s, c.t, c.l] for c in chords],
        "insertions": list(insertions),
    }
    digest = hashlib.sha256(json.dumps(canon, sort_keys=True).encode()).hexdigest()[:12]
    return LoadedSpec(geometry, sigma, diagram, insertions, digest)


def _meta(**kw) -> str:
    return ";".join(f"{k}={_fmt(v) if isinstance(v, (float, np.floating)) else v}" for k, v in kw.items())


def _exact_value(spec: LoadedSpec, cfg: QuadratureConfig):
    cs = CorrelatorSpec(spec.diagram, spec.sigma)
    if spec.geometry == "circle":
        return correlator_circle(cs, cfg)
    return correlator_interval(cs, cfg)


def _require_input(rc: RunConfig) -> LoadedSpec:
    if rc.input is None:
        raise InputError(f"{rc.subcommand} needs --input")
    return load_spec(rc.input, rc.sigma_sq)


def cmd_exact(rc: RunConfig):
    spec = _require_input(rc)
    v = _exact_value(spec, rc.quadrature())
    meta = _meta(sigma=spec.sigma, hash=spec.digest, k_max=v.k_max, nodes=v.n_nodes, converged=str(v.converged).lower())
    return [("exact", "correlator", v.estimate, v.quadrature_error, meta)], True


def cmd_partition(rc: RunConfig):
    s2 = 1.0 if rc.sigma_sq is None else rc.sigma_sq
    sigma = math.sqrt(s2)
    tol = 1e-8 if rc.tolerance is None else rc.tolerance
    closed = partition_function(sigma)
    q = partition_function_quadrature(sigma, rc.quadrature())
    rel = abs(q.estimate - closed) / closed
    ok = rel <= tol
    meta = _meta(sigma_sq=s2, k_max=q.k_max, nodes=q.n_nodes)
    return [
        ("partition", "closed_form", closed, None, _meta(sigma_sq=s2)),
        ("partition", "quadrature", q.estimate, abs(q.estimate - closed), meta),
        ("partition", "check", rel, tol, _meta(sigma_sq=s2, passed=str(ok).lower())),
    ], ok


def cmd_mc(rc: RunConfig):
    spec = _require_input(rc)
    scfg = rc.sampler()
    if spec.geometry == "circle":
        est = mc_circle_correlator(spec.diagram, spec.sigma, scfg)
    else:
        est = mc_interval_correlator(spec.diagram, spec.sigma, scfg)
    exact = _exact_value(spec, rc.quadrature())
    z = est.zscore(exact.estimate)
    limit = 3.0 if rc.tolerance is None else rc.tolerance
    ok = bool(abs(z) <= limit)
    meta = _meta(sigma=spec.sigma, hash=spec.digest, seed=rc.seed, samples=rc.samples, steps=rc.steps,
                 excluded=est.n_excluded)
    return [
        ("mc", "estimate", est.mean, est.stderr, meta),
        ("mc", "exact", exact.estimate, exact.quadrature_error,
         _meta(sigma=spec.sigma, hash=spec.digest, k_max=exact.k_max, nodes=exact.n_nodes)),
        ("mc", "zscore", z, limit, _meta(hash=spec.digest, passed=str(ok).lower())),
    ], ok


def cmd_reg_sweep(rc: RunConfig):
    spec = _require_input(rc)
    if spec.geometry != "circle":
        raise InputError("reg-sweep needs a circle spec")
    cfg = rc.quadrature()
    cs = CorrelatorSpec(spec.diagram, spec.sigma)
    exact = correlator_circle(cs, cfg).estimate
    alphas = rc.alpha or [math.pi - d for d in (0.2, 0.1, 0.05, 0.0)]
    rows = [("reg-sweep", "exact", exact, None, _meta(sigma=spec.sigma, hash=spec.digest))]
    for a in alphas:
        v = regularized_circle_correlator(cs, a, cfg)
        rows.append(("reg-sweep", f"alpha={_fmt(a)}", v.estimate, abs(v.estimate - exact),
                     _meta(sigma=spec.sigma, hash=spec.digest, k_max=v.k_max, nodes=v.n_nodes)))
    return rows, True


def cmd_stress(rc: RunConfig):
    spec = _require_input(rc)
    if spec.geometry != "circle":
        raise InputError("stress needs a circle spec")
    cfg = rc.quadrature()
    ss = StressSpec(spec.diagram, spec.insertions, spec.sigma)
    meta = _meta(sigma=spec.sigma, hash=spec.digest, M=ss.M)
    rows = []
    exact = stress_correlator(ss, cfg)
    rows.append(("stress", "stress_correlator", exact.estimate, exact.quadrature_error, meta))
    lo, hi, n = rc.eps_sweep
    eps = np.geomspace(lo, hi, n)
    if ss.M > 0:
        vals = stress_prelimit_sweep(ss, eps, cfg)
        for e, v in zip(eps, vals):
            rows.append(("stress", f"prelimit eps={_fmt(e)}", v, None, meta))
        fit = remainder_exponent(eps, vals, exact.estimate)
        rows.append(("stress", "remainder_exponent", fit["p"], None, meta + ";target=stress_correlator"))
        rows.append(("stress", "limit_ratio", vals[-1] / exact.estimate, None, meta + f";eps={_fmt(eps[-1])}"))
    f0 = short_chord_fit(0.0, spec.sigma, eps)
    slope = k2_coefficient_fit(spec.sigma, eps=eps)
    rows.append(("stress", "short_chord_constant", f0["B"], None, _meta(sigma=spec.sigma, k2=0.0)))
    rows.append(("stress", "short_chord_k2_slope", slope["slope"], None, _meta(sigma=spec.sigma)))
    return rows, True


def cmd_verify(rc: RunConfig):
    rows, ok = [], True
    for r in run_identity_suite():
        ok &= r.passed
        rows.append(("verify", r.name, r.rhs, r.abs_diff,
                     f"lhs={_fmt(r.lhs)};rel={_fmt(r.rel_diff)};tol={_fmt(r.tolerance)};"
                     f"passed={str(r.passed).lower()};{r.detail}"))
    return rows, ok


COMMANDS = {
    "exact": cmd_exact,
    "partition": cmd_partition,
    "mc": cmd_mc,
    "reg-sweep": cmd_reg_sweep,
    "stress": cmd_stress,
    "verify": cmd_verify,
}


def _parse_alpha(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad alpha list {text!r}") from exc


def _parse_sweep(text: str):
    parts = text.split(":")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except (IndexError, ValueError) as exc:
        raise argparse.ArgumentTypeError(f"expected a:b:n, got {text!r}") from exc
    if len(parts) != 3 or lo <= 0 or hi <= 0 or n < 2:
        raise argparse.ArgumentTypeError("eps sweep needs positive a, b and n >= 2")
    return lo, hi, n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="schwarzian", description="Exact and Monte Carlo Schwarzian correlators.")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp, needs_input=True):
        if needs_input:
            sp.add_argument("--input", required=True, help="JSON diagram spec")
        sp.add_argument("--output", help="CSV path (default: stdout or $%s/<cmd>.csv)" % OUTPUT_DIR_ENV)
        sp.add_argument("--sigma-sq", type=float, help="override sigma^2 from the input file")
        sp.add_argument("--k-max", type=float, help="quadrature cutoff")
        sp.add_argument("--nodes", type=int, default=400, help="quadrature nodes per face")

    common(sub.add_parser("exact", help="exact correlator"))
    sp = sub.add_parser("partition", help="closed form and quadrature of the total mass")
    common(sp, needs_input=False)
    sp.add_argument("--tolerance", type=float, help="relative tolerance (default 1e-8)")
    sp = sub.add_parser("mc", help="Monte Carlo estimate compared with the exact value")
    common(sp)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--samples", type=int, default=100000)
    sp.add_argument("--steps", type=int, default=1024)
    sp.add_argument("--tolerance", type=float, help="allowed |z-score| (default 3)")
    sp = sub.add_parser("reg-sweep", help="regularised correlator over alpha values")
    common(sp)
    sp.add_argument("--alpha", type=_parse_alpha, default=[], help="comma-separated alpha values")
    sp = sub.add_parser("stress", help="stress correlator and eps sweep")
    common(sp)
    sp.add_argument("--eps-sweep", type=_parse_sweep, default=(1e-2, 1e-5, 7), help="a:b:n geometric sweep")
    sp = sub.add_parser("verify", help="identity suite")
    sp.add_argument("--output")
    return p


def _write(rows, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(HEADER)
    for sc, label, value, err, extra in rows:
        w.writerow((sc, label, _fmt(value), _fmt(err), extra))


def run(rc: RunConfig, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    rows, ok = COMMANDS[rc.subcommand](rc)
    buf = io.StringIO()
    _write(rows, buf)
    target = rc.output
    if target is None and os.environ.get(OUTPUT_DIR_ENV):
        target = os.path.join(os.environ[OUTPUT_DIR_ENV], f"{rc.subcommand}.csv")
    if target is None:
        stdout.write(buf.getvalue())
    else:
        with open(target, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    return 0 if ok else 1


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    fields = {k: v for k, v in vars(args).items() if v is not None}
    fields["subcommand"] = args.subcommand
    for k in list(fields):
        if k not in RunConfig.__dataclass_fields__:
            fields.pop(k)
    rc = RunConfig(**fields)
    try:
        return run(rc)
    except (InputError, DiagramError) as exc:
        print(f"schwarzian: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
