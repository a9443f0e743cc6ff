"""Configuration-driven experiment runner.

Usage::

    spectral-perturb <experiment> --config <path> [--out <path>]
                     [--format json|csv|text] [--seed <u64>]

The config is a JSON document::

    {"schema": "config-v1", "experiment": "counterexample",
     "parameters": {"m_max": 10}, "output": {"path": "r.json", "format": "json"}}

Exit codes: 0 when every verdict passes, 1 when a check fails, 2 for an
invalid config or unusable input.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels, basis, hilbert, oscillator
from .enclosure import contour_nodes, power_enclosures, uniform_enclosures
from .errors import (CriterionFailure, HypothesisFailure, InvalidInputError, SpectralPerturbError,
                     VerificationFailure)
from .operators import PerturbationSpec, assemble
from .report import DiagnosticsReport, check, emit_report, software_versions, write_report
from .resolvent import enclosure_spectrum_report, family_projections, max_neumann_factor
from .spectrum import EigenSequence, GapProfile, cluster_uniform, make_sequence, verify_gap

CONFIG_SCHEMA = "config-v1"
FORMATS = ("json", "csv", "text")
THREADS_ENV = "SPECTRAL_PERTURB_THREADS"

EXIT_PASS, EXIT_FAIL, EXIT_INVALID = 0, 1, 2

# Per-experiment defaults; keys listed in REQUIRED must appear in the config.
DEFAULTS = {
    "enclose-uniform": dict(p=1, d=1.0, n=64, c=0.05, spacing=1.25, kind="random-column", seed=1,
                            per_edge=64),
    "enclose-power": dict(kappa=2.0, alpha=2.0, c=0.05, n=64, t1=1.0, kind="random-column", seed=1,
                          head_height="literal", per_edge=64),
    "project": dict(kappa=2.0, alpha=2.0, c=0.05, n=64, t1=1.0, kind="random-column", seed=1,
                    head_height="literal", homotopy=True),
    "dht-bounds": dict(sizes=[100, 500, 2000], deltas=[0.5, 1.0, 2.0], trials=100, n=200, seed=1,
                       floor=2.5, ceiling_tol=1e-9),
    "dht-divergence": dict(alphas_bounded=[0.6, 0.75, 1.5, 2.0], sizes=[250, 500, 1000, 2000],
                           alphas_divergent=[0.3, 0.4, 0.5], N=2500, ratio_max=1.2, ratio_min=1.1),
    "riesz-verify": dict(kappa=2.0, alpha=2.0, c=0.05, n=64, t1=1.0, kind="random-column", seed=1,
                         n_samples=64, n_subsets=200, conj_tol=1e-8),
    "counterexample": dict(m_max=10, n_subsets=200, seed=0, rel_tol=1e-8, slope_tol=0.01),
    "oscillator": dict(beta=2.0, n_modes=40, multiplier="x", p_exp="inf", alpha_w=1.0,
                       gap_tol=0.05, slack=0.1, exact_tol=1e-3, eigen_csv=None),
}
REQUIRED = {
    "enclose-uniform": ("p", "d", "n"),
    "enclose-power": ("kappa", "alpha", "c", "n"),
    "project": ("kappa", "alpha", "c", "n"),
    "dht-bounds": (),
    "dht-divergence": (),
    "riesz-verify": ("kappa", "alpha", "c", "n"),
    "counterexample": ("m_max",),
    "oscillator": ("beta",),
}
EXPERIMENTS = tuple(sorted(DEFAULTS)) + ("full-suite",)
MULTIPLIERS = {
    "x": lambda x: x,
    "inverse-quadratic": lambda x: 1.0 / (1.0 + x * x),
    "one": lambda x: np.ones_like(x),
}


@dataclass
class ExperimentConfig:
    experiment: str
    parameters: dict = field(default_factory=dict)
    output_path: Optional[str] = None
    output_format: str = "json"
    schema: str = CONFIG_SCHEMA

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise InvalidInputError("config must be a JSON object")
        unknown = set(d) - {"schema", "experiment", "parameters", "output"}
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        out = d.get("output") or {}
        if not isinstance(out, dict):
            raise InvalidInputError("output must be an object with path and format")
        cfg = cls(experiment=d.get("experiment"), parameters=dict(d.get("parameters") or {}),
                  output_path=out.get("path"), output_format=out.get("format", "json"),
                  schema=d.get("schema", CONFIG_SCHEMA))
        cfg.validate()
        return cfg

    def validate(self):
        if self.schema != CONFIG_SCHEMA:
            raise InvalidInputError(f"unsupported config schema {self.schema!r}, expected {CONFIG_SCHEMA!r}")
        if self.experiment not in EXPERIMENTS:
            raise InvalidInputError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.output_format not in FORMATS:
            raise InvalidInputError(f"format must be one of {FORMATS}")
        if self.experiment == "full-suite":
            for name, sub in self.parameters.items():
                if name == "seed":
                    continue
                if name not in DEFAULTS or not isinstance(sub, dict):
                    raise InvalidInputError(
                        f"full-suite parameters map experiment names to records, got {name!r}")
                _resolve(name, sub, require=False)
        else:
            _resolve(self.experiment, self.parameters)
        return self


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise InvalidInputError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"config {path} is not valid JSON: {exc}") from exc
    return ExperimentConfig.from_dict(raw)


def _resolve(name, params, require=True):
    """Defaults merged with ``params``; checks required and unknown keys and tolerances."""
    if require:
        missing = [k for k in REQUIRED[name] if k not in params]
        if missing:
            raise InvalidInputError(f"{name} needs parameters {missing}")
    unknown = set(params) - set(DEFAULTS[name])
    if unknown:
        raise InvalidInputError(f"unknown {name} parameters: {sorted(unknown)}")
    merged = dict(DEFAULTS[name])
    merged.update(params)
    for k, v in merged.items():
        if k.endswith("_tol") or k in ("slack", "floor", "ratio_max", "ratio_min"):
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
                raise InvalidInputError(f"{name}.{k} must be a positive number, got {v!r}")
    return merged


def _as_float(v, key):
    if isinstance(v, str) and v.lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(v)
    except (TypeError, ValueError):
        raise InvalidInputError(f"{key} must be a number, got {v!r}") from None


def _as_int(v, key, lo=None):
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)) and not (
            isinstance(v, float) and v.is_integer()):
        raise InvalidInputError(f"{key} must be an integer, got {v!r}")
    v = int(v)
    if lo is not None and v < lo:
        raise InvalidInputError(f"{key} must be at least {lo}, got {v}")
    return v


# ---------------------------------------------------------------- experiments

def _power_model(P):
    kappa, alpha = _as_float(P["kappa"], "kappa"), _as_float(P["alpha"], "alpha")
    n = _as_int(P["n"], "n", lo=2)
    t = make_sequence(EigenSequence.power_law(kappa, alpha, n, t1=_as_float(P["t1"], "t1")))
    c = np.broadcast_to(np.abs(np.asarray(P["c"], dtype=float)), (n,)).copy()
    op = assemble(t, PerturbationSpec(kind=P["kind"], c=c, alpha=alpha, seed=_as_int(P["seed"], "seed")))
    return t, c, op


def _inclusion_rows(rep, op, family, per_edge):
    lam = np.linalg.eigvals(op.l)
    scale = max(1.0, float(np.abs(op.t).max()))
    inside = family.contains(lam, tol=1e-12 * scale)
    rep.add(check("spectral inclusion", "spectrum inside head and tail rectangles",
                  int(np.count_nonzero(~inside)), 0, bool(inside.all())))
    for z in lam[~inside][:20]:
        rep.add(check("containment-failure", "spectrum inside head and tail rectangles",
                      complex(z), "inside union", False))
    counts = [int(np.count_nonzero(r.contains(lam, 1e-12 * scale))) for r in family.tail]
    bad = [j for j, c, e in zip(family.tail_indices, counts, family.tail_counts) if c != e]
    rep.add(check("tail counts match reference", "eventual simplicity / dimension preservation",
                  len(bad), 0, not bad, f"indices {bad[:10]}"))
    rep.add(check("rectangle interiors disjoint", "enclosure geometry", family.overlap(), 0.0,
                  family.overlap() == 0.0))
    nodes = np.concatenate([contour_nodes(r, per_edge, "gauss").nodes for r in family.rectangles()])
    nf = max_neumann_factor(op.t, op.b, nodes)
    rep.add(check("Neumann factor ||B R0(z)|| <= 1/2 on contours",
                  "Neumann series for the perturbed resolvent", nf, 0.5,
                  (nf <= 0.5) if family.hypotheses_hold else None))


def _hypothesis_row(rep, exc):
    rep.add(check(f"hypothesis: {exc.inequality}", "enclosure construction hypothesis",
                  str(exc), "holds", False))


def run_enclose_uniform(P, rep):
    p, d = _as_int(P["p"], "p", lo=1), _as_float(P["d"], "d")
    n = _as_int(P["n"], "n", lo=p + 1)
    if not d > 0:
        raise InvalidInputError("d must be positive")
    spacing = _as_float(P["spacing"], "spacing") * d / p
    t = spacing * np.arange(n, dtype=float)
    norms = np.full(n, _as_float(P["c"], "c"))
    op = assemble(t, PerturbationSpec(kind=P["kind"], norms=norms, seed=_as_int(P["seed"], "seed")))
    gap = verify_gap(t, GapProfile.uniform(p, d))
    rep.add(check("uniform gap condition", "t_(k+p) - t_k > d", gap.first_violation, None, gap.ok))
    try:
        fam = uniform_enclosures(cluster_uniform(t, p, d), norms ** 2, p, d, t=t)
    except HypothesisFailure as exc:
        _hypothesis_row(rep, exc)
        return
    for name, ok in fam.hypotheses.items():
        rep.add(check(f"hypothesis: {name}", "enclosure construction hypothesis", ok, True, ok))
    rep.add(check("enclosure constants", "cluster cutoff and head height",
                  {k: fam.constants[k] for k in ("M", "N", "K", "h")}, None, None))
    _inclusion_rows(rep, op, fam, _as_int(P["per_edge"], "per_edge", lo=4))


def run_enclose_power(P, rep):
    t, c, op = _power_model(P)
    kappa, alpha = _as_float(P["kappa"], "kappa"), _as_float(P["alpha"], "alpha")
    gap = verify_gap(t, GapProfile.power(kappa, alpha))
    rep.add(check("power gap condition", "t_(k+1) - t_k >= kappa k^(alpha-1)",
                  gap.first_violation, None, gap.ok))
    try:
        fam = power_enclosures(t, c, kappa, alpha, head_height=P["head_height"])
    except HypothesisFailure as exc:
        _hypothesis_row(rep, exc)
        return
    for name, ok in fam.hypotheses.items():
        rep.add(check(f"hypothesis: {name}", "enclosure construction hypothesis", ok, True, ok))
    rep.add(check("enclosure constants", "dyadic cutoff and head height",
                  {k: fam.constants[k] for k in ("N", "ell", "Y", "v")}, None, None))
    _inclusion_rows(rep, op, fam, _as_int(P["per_edge"], "per_edge", lo=4))


def run_project(P, rep):
    t, c, op = _power_model(P)
    kappa, alpha = _as_float(P["kappa"], "kappa"), _as_float(P["alpha"], "alpha")
    fam = power_enclosures(t, c, kappa, alpha, strict=False, head_height=P["head_height"])
    rep.extend(enclosure_spectrum_report(op, fam, homotopy=bool(P["homotopy"])))


def run_riesz_verify(P, rep):
    t, c, op = _power_model(P)
    fam = power_enclosures(t, c, _as_float(P["kappa"], "kappa"), _as_float(P["alpha"], "alpha"))
    fp = family_projections(op, fam)
    pf = basis.ProjectionFamily.from_projections(fp)
    rep.extend(basis.riesz_report(pf, _as_int(P["n_samples"], "n_samples", lo=1),
                                  _as_int(P["n_subsets"], "n_subsets", lo=0),
                                  seed=_as_int(P["seed"], "seed")))


def run_counterexample(P, rep):
    m_max = _as_int(P["m_max"], "m_max", lo=2)
    rel = P["rel_tol"]
    ms = list(range(2, m_max + 1))
    try:
        growth = basis.counterexample_growth(m_max)
        dev = max(abs(g - m) / m for g, m in zip(growth, ms))
        rep.add(check("projection norms equal m", "block projection norms grow like m",
                      growth, ms, dev <= rel, f"max relative deviation {dev:.3g}"))
    except VerificationFailure as exc:
        rep.add(check("projection norms equal m", "block projection norms grow like m",
                      str(exc), ms, False))
        return
    closed = [basis.counterexample_closed_form(m) for m in ms]
    dev = max(abs(g - m) / m for g, m in zip(closed, ms))
    rep.add(check("closed-form eigenvector angle", "1/sin(angle) = m", dev, rel, dev <= rel))
    slope, intercept, r2 = basis.linear_fit(ms, growth)
    rep.add(check("growth slope", "linear growth of block projection norms", slope, 1.0,
                  abs(slope - 1.0) <= P["slope_tol"], f"intercept {intercept:.3g}, R^2 {r2:.6f}"))
    fam = basis.counterexample_family(m_max)
    ks = basis.kato_sum(fam)
    rep.add(check("kato sum exceeds 1", "Kato criterion must fail", ks, 1.0, ks > 1.0))
    try:
        basis.similarity_transform(fam, kato=ks)
        refused = False
    except CriterionFailure:
        refused = True
    rep.add(check("similarity refused", "no bounded similarity", refused, True, refused))
    bc = basis.basis_constant(fam, _as_int(P["n_subsets"], "n_subsets", lo=0),
                              seed=_as_int(P["seed"], "seed"))
    rep.add(check("basis constant >= m_max - 1", "unbounded basis constant", bc, m_max - 1,
                  bc >= m_max - 1))


def run_oscillator(P, rep):
    beta = _as_float(P["beta"], "beta")
    if not beta > 1:
        raise InvalidInputError("beta must exceed 1")
    n_modes = _as_int(P["n_modes"], "n_modes", lo=20)
    if P["multiplier"] not in MULTIPLIERS:
        raise InvalidInputError(f"multiplier must be one of {sorted(MULTIPLIERS)}")
    p_exp, alpha_w = _as_float(P["p_exp"], "p_exp"), _as_float(P["alpha_w"], "alpha_w")
    model = oscillator.solve_eigen(beta, n_modes)
    rep.parameters.update(X=model.X, m=model.m, dx=model.dx)
    rep.add(check("Richardson change", "grid convergence", model.richardson_change,
                  oscillator.RICHARDSON_RTOL, model.richardson_change < oscillator.RICHARDSON_RTOL))
    g = oscillator.gram_defect(model)
    rep.add(check("orthonormality", "selfadjoint eigenbasis", g, 1e-8, g < 1e-8))
    pd = oscillator.parity_defect(model)
    rep.add(check("parity", "even potential", pd, 1e-6, pd < 1e-6))
    if beta == 2:
        n = np.arange(min(6, n_modes))
        dev = float(np.max(np.abs(model.eigenvalues[n] - (2 * n + 1))))
        rep.add(check("harmonic eigenvalues 2n+1", "exact spectrum at beta = 2", dev,
                      P["exact_tol"], dev < P["exact_tol"]))
    r = oscillator.wkb_residual(model)
    if beta == 2:
        rmax = float(np.max(np.abs(r)))
        rep.add(check("WKB residual", "quantization is exact at beta = 2", rmax,
                      P["exact_tol"], rmax < P["exact_tol"]))
    else:
        k = min(20, n_modes - 1)
        ok = abs(r[k]) < abs(r[5]) and abs(r[k]) < 0.05
        rep.add(check(f"WKB residual decays (|r_{k}| < |r_5|, < 0.05)", "WKB quantization",
                      [float(r[5]), float(r[k])], 0.05, ok))
    fitted, predicted = oscillator.gap_exponent_fit(model, strict=False)
    rep.add(check("gap exponent", "lambda_(n+1) - lambda_n ~ n^(2beta/(beta+2) - 1)", fitted,
                  predicted, abs(fitted - predicted) < P["gap_tol"]))
    mult = oscillator.MultiplierSpec(MULTIPLIERS[P["multiplier"]], p=p_exp, alpha_w=alpha_w)
    _, mfit, mpred = oscillator.multiplier_norms(model, mult, slack=P["slack"], strict=False)
    rep.add(check("multiplier exponent", "|b phi_n| = O(n^(2 beta xi/(beta+2)))", mfit, mpred,
                  bool(mfit <= mpred + P["slack"])))
    rep.add(check("unconditional basis predicate", "sufficient condition on beta, p, alpha_w",
                  oscillator.unconditional_basis_predicate(beta, p_exp, alpha_w), None, None))
    if P["eigen_csv"]:
        oscillator.write_eigen_csv(model, P["eigen_csv"])


def run_dht_bounds(P, rep):
    sizes = [_as_int(s, "sizes", lo=2) for s in P["sizes"]]
    classical = hilbert.TransformSpec.make("classical")
    norms = [hilbert.estimate_opnorm(classical, s) for s in sizes]
    ceiling = hilbert.G_NORM + P["ceiling_tol"]
    ok = all(P["floor"] <= x <= ceiling for x in norms) and all(np.diff(norms) >= 0)
    rep.add(check("classical section norms in [floor, pi] and nondecreasing",
                  "||G|| = pi", norms, [P["floor"], ceiling], ok))
    rng = np.random.default_rng(_as_int(P["seed"], "seed"))
    n, trials = _as_int(P["n"], "n", lo=2), _as_int(P["trials"], "trials", lo=1)
    for delta in P["deltas"]:
        delta = _as_float(delta, "deltas")
        worst_sep, worst_shift = 0.0, 0.0
        for _ in range(trials):
            a = hilbert.separated_sequence(n, delta, rng)
            spec = hilbert.TransformSpec.make("gdht", a=a, delta=delta)
            worst_sep = max(worst_sep, hilbert.estimate_opnorm(spec, n) / hilbert.theoretical_bound(spec))
            a2 = hilbert.separated_sequence(n, 2 * delta, rng)
            z = hilbert.shifted_targets(a2, delta, rng)
            Delta = float(np.max(np.abs(z.real - a2))) * (1 + 1e-9)
            spec = hilbert.TransformSpec.make("shifted", a=a2, z=z, delta=delta, Delta=Delta)
            worst_shift = max(worst_shift,
                              hilbert.estimate_opnorm(spec, n) / hilbert.theoretical_bound(spec))
        rep.add(check(f"separated nodes, delta={delta}", "norm <= (2pi^2/3 + 2pi)/delta",
                      worst_sep, 1.0, worst_sep <= 1.0, f"max ratio over {trials} trials"))
        rep.add(check(f"shifted nodes, delta={delta}", "norm <= pi/(2 delta) + 2 delta pi^2/(3 Delta^2)",
                      worst_shift, 1.0, worst_shift <= 1.0, f"max ratio over {trials} trials"))


def run_dht_divergence(P, rep):
    sizes = [_as_int(s, "sizes", lo=2) for s in P["sizes"]]
    for alpha in P["alphas_bounded"]:
        alpha = _as_float(alpha, "alphas_bounded")
        norms = hilbert.weighted_section_norms(alpha, sizes)
        ratio = norms[-1] / norms[0]
        rep.add(check(f"weighted transform bounded, alpha={alpha}",
                      "weighted transform bounded for alpha > 1/2", ratio, P["ratio_max"],
                      ratio < P["ratio_max"], f"norms {[round(x, 6) for x in norms]}"))
    N = _as_int(P["N"], "N", lo=2)
    for alpha in P["alphas_divergent"]:
        alpha = _as_float(alpha, "alphas_divergent")
        t = hilbert.power_law_nodes(alpha, 4 * N)
        s1, s4 = hilbert.divergence_witness(alpha, t, [N, 4 * N])
        ratio = s4 / s1
        rep.add(check(f"divergence witness, alpha={alpha}", "weighted transform unbounded for alpha <= 1/2",
                      ratio, P["ratio_min"], ratio > P["ratio_min"], f"S(N)={s1:.6g}, S(4N)={s4:.6g}"))


RUNNERS = {
    "counterexample": run_counterexample,
    "dht-bounds": run_dht_bounds,
    "dht-divergence": run_dht_divergence,
    "enclose-power": run_enclose_power,
    "enclose-uniform": run_enclose_uniform,
    "oscillator": run_oscillator,
    "project": run_project,
    "riesz-verify": run_riesz_verify,
}


def _run_one(name, params, seed=None, require=True):
    P = _resolve(name, params, require)
    if seed is not None and "seed" in P:
        P["seed"] = int(seed)
    rep = DiagnosticsReport(experiment=name, parameters=dict(P), seed=P.get("seed"),
                            versions=software_versions())
    try:
        RUNNERS[name](P, rep)
    except InvalidInputError:
        raise
    except HypothesisFailure as exc:
        _hypothesis_row(rep, exc)
    except SpectralPerturbError as exc:
        rep.add(check("experiment aborted", type(exc).__name__, str(exc), "completes", False))
    return rep


def run_experiment(config: ExperimentConfig, seed=None) -> DiagnosticsReport:
    """Run one named suite; ``seed`` overrides the configured seed."""
    config.validate()
    start = time.perf_counter()
    if config.experiment != "full-suite":
        rep = _run_one(config.experiment, config.parameters, seed)
    else:
        seed = config.parameters.get("seed", seed) if seed is None else seed
        rep = DiagnosticsReport(experiment="full-suite", seed=seed, versions=software_versions())
        # sub-suites run in name order so the combined report is stable
        for name in sorted(RUNNERS):
            sub = _run_one(name, config.parameters.get(name, {}), seed, require=False)
            rep.parameters[name] = sub.parameters
            rep.extend(sub, prefix=f"{name}: ")
    rep.runtime = time.perf_counter() - start
    return rep


def _epilog():
    lines = ["experiments and their default parameters (required keys marked *):"]
    for name in sorted(DEFAULTS):
        req = REQUIRED[name]
        items = ", ".join(f"{'*' if k in req else ''}{k}={json.dumps(v)}" for k, v in DEFAULTS[name].items())
        lines.append(f"  {name}: {items}")
    lines += [
        "  full-suite: parameters map experiment names to records like the above",
        "",
        f'config: {{"schema": "{CONFIG_SCHEMA}", "experiment": ..., "parameters": {{...}},',
        '          "output": {"path": ..., "format": "json"}}  (output optional)',
        "tolerances (keys ending in _tol, slack, floor, ratio_*) must be positive",
        f"{THREADS_ENV}=<n> caps BLAS and numba threads",
        "exit codes: 0 all checks pass, 1 a check fails, 2 invalid input",
    ]
    return "\n".join(lines)


def build_parser():
    ap = argparse.ArgumentParser(prog="spectral-perturb", epilog=_epilog(),
                                 formatter_class=argparse.RawDescriptionHelpFormatter,
                                 description="Run a named verification suite and emit a report.")
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", help="JSON config file (default: experiment defaults)")
    ap.add_argument("--out", help="report path (default: config output.path, else stdout)")
    ap.add_argument("--format", choices=FORMATS, help="report format (default: config or json)")
    ap.add_argument("--seed", type=int, help="overrides the configured seed (unsigned 64-bit)")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        threads = os.environ.get(THREADS_ENV)
        if threads:
            try:
                n = int(threads)
            except ValueError:
                raise InvalidInputError(f"{THREADS_ENV} must be a positive integer") from None
            if n < 1:
                raise InvalidInputError(f"{THREADS_ENV} must be a positive integer")
            _kernels.set_threads(n)
        if args.seed is not None and not 0 <= args.seed < 2 ** 64:
            raise InvalidInputError("seed must be an unsigned 64-bit integer")
        if args.config:
            cfg = load_config(args.config)
            if cfg.experiment != args.experiment:
                raise InvalidInputError(
                    f"config is for {cfg.experiment!r}, command line asks for {args.experiment!r}")
        else:
            cfg = ExperimentConfig(experiment=args.experiment,
                                   parameters={k: v for k, v in DEFAULTS.get(args.experiment, {}).items()})
        fmt = args.format or cfg.output_format
        out = args.out or cfg.output_path
        rep = run_experiment(cfg, seed=args.seed)
    except InvalidInputError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        if out:
            write_report(rep, out, fmt)
        else:
            sys.stdout.write(emit_report(rep, fmt))
    except OSError as exc:
        print(f"cannot write report: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_PASS if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
