"""Batch experiment runner.

Reads a declarative experiment file (sectioned key = value text), solves
the configured initial/boundary-value problem, runs the requested
verification checks, and writes deterministic reports and two-column plot
data. Exit status 0 means every configured check passed.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import configparser
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import estimates
from .estimates import EstimateReport, write_series
from .expressions import compile_expression
from .fields import Grid, ScalarField, sample
from .operators import COEFFICIENT_PRESETS, parse_coefficient_preset
from .solver import IVBProblem, solve_ivbp


class SpecError(ValueError):
    """Experiment-file parse or validation error."""


def _get(section, key, cast=str, default=None, where=""):
    if key not in section:
        if default is not None:
            return default
        raise SpecError(f"missing key {key!r} in section [{where}]")
    raw = section[key]
    try:
        return cast(raw)
    except ValueError as exc:
        raise SpecError(f"bad value for {key!r} in [{where}]: {exc}") from exc


def _floats(text: str):
    return [float(tok) for tok in text.split()]


class ExperimentSpec:
    """Parsed experiment file: problem, grid, and the checks to run."""

    def __init__(self, path, seed_override=None):
        parser = configparser.ConfigParser()
        read = parser.read([str(path)])
        if not read:
            raise SpecError(f"cannot read experiment file {path}")
        if "experiment" not in parser:
            raise SpecError("missing [experiment] section")
        exp = parser["experiment"]
        self.name = _get(exp, "name", where="experiment")
        self.seed = seed_override if seed_override is not None else \
            _get(exp, "seed", int, 0, "experiment")
        self.nu = _get(exp, "nu", float, where="experiment")
        if not 0.0 < self.nu < 1.0:
            raise SpecError(
                f"nu = {self.nu:g} is outside the admissible open interval (0, 1)")
        preset = _get(exp, "coefficients", where="experiment")
        if preset.startswith("random:") and seed_override is not None:
            preset = f"random:seed={self.seed}"
        self.coefficient_preset = preset

        if "grid" not in parser:
            raise SpecError("missing [grid] section")
        gsec = parser["grid"]
        def triple(key):
            vals = _floats(gsec[key])
            if len(vals) != 3 or vals[2] < 3 or vals[2] != int(vals[2]):
                raise SpecError(f"grid axis {key!r} needs 'lo hi count'")
            return (vals[0], vals[1], int(vals[2]))
        if "s" not in gsec or "t" not in gsec:
            raise SpecError("[grid] needs axes 's' and 't'")
        y_keys = sorted(k for k in gsec if k.startswith("y"))
        if not y_keys:
            raise SpecError("[grid] needs at least one tangential axis (y2, ...)")
        self.grid = Grid.uniform(triple("s"), [triple(k) for k in y_keys],
                                 triple("t"))
        self.n = self.grid.n
        self.coefficients = parse_coefficient_preset(preset, self.n)

        if "problem" not in parser:
            raise SpecError("missing [problem] section")
        prob = parser["problem"]
        self.solution = compile_expression(_get(prob, "solution", where="problem"))
        self.forcing = compile_expression(_get(prob, "forcing", str, "0", "problem"))

        self.checks = []
        for sec in parser.sections():
            if not sec.startswith("check "):
                continue
            name = sec[len("check "):].strip()
            body = dict(parser[sec])
            if "type" not in body:
                raise SpecError(f"check {name!r} is missing its 'type'")
            self.checks.append((name, body))
        if not self.checks:
            raise SpecError("experiment defines no checks")

    def model_v(self) -> float:
        desc = self.coefficient_preset
        if desc.startswith("model:v="):
            return float(desc[len("model:v="):])
        if desc == "identity":
            return 1.0
        raise SpecError(
            "this check needs a model-operator coefficient preset, "
            f"got {desc!r}")


def _solve(spec: ExperimentSpec) -> ScalarField:
    problem = IVBProblem(coeffs=spec.coefficients, forcing=spec.forcing,
                         initial=spec.solution, lateral=spec.solution)
    return solve_ivbp(problem, spec.grid)


def _check_manufactured(spec, name, body, u, g_field):
    tol = float(body.get("tol", 1e-10))
    exact = sample(spec.solution, spec.grid)
    err = np.max(np.abs(u.values - exact.values), axis=tuple(range(u.values.ndim - 1)))
    worst = float(np.max(err))
    report = EstimateReport(
        name="manufactured_error", lhs=worst,
        rhs_components={"tolerance": tol},
        measured_constant=worst / tol if tol > 0 else math.inf,
        margins={"tolerance": tol - worst},
        passed=worst <= tol,
        provenance=f"solution '{spec.solution.text}' on "
                   + "x".join(str(k) for k in spec.grid.shape))
    return report, (spec.grid.t, err)


def _check_harnack(spec, name, body, u, g_field):
    s0 = float(body["s0"])
    y0 = _floats(body.get("y0", " ".join(["0"] * (spec.n - 1))))
    t0 = float(body["t0"])
    rho = float(body["rho"])
    c_max = float(body.get("c_max", "inf"))
    report = estimates.harnack_quotient(u, g_field, s0, y0, t0, rho,
                                        spec.nu, c_max)
    return report, None


def _check_oscillation(spec, name, body, u, g_field):
    s0 = float(body["s0"])
    y0 = _floats(body.get("y0", " ".join(["0"] * (spec.n - 1))))
    t0 = float(body["t0"])
    rho = float(body["rho"])
    levels = int(body.get("levels", 2))
    theta_max = float(body.get("theta_max", 0.95))
    report = estimates.oscillation_decay(u, (s0, y0, t0), rho, levels,
                                         g_field, spec.nu, theta_max)
    radii = [rho / 2.0 ** j for j in range(levels)]
    oscs = [report.rhs_components.get(f"osc_{j}", 0.0) for j in range(levels)]
    return report, (radii, oscs)


def _check_holder(spec, name, body, u, g_field):
    s0 = float(body["s0"])
    y0 = _floats(body.get("y0", " ".join(["0"] * (spec.n - 1))))
    t0 = float(body["t0"])
    r = float(body["r"])
    rho = float(body["rho"])
    alpha = float(body.get("alpha", 0.5))
    report = estimates.holder_bound_check(u, g_field, (s0, y0, t0), r, rho,
                                          spec.nu, alpha)
    return report, None


def _check_schauder(spec, name, body, u, g_field):
    from .geometry import Point

    r = float(body.get("r", 0.5))
    alpha = float(body.get("alpha", 0.5))
    x0 = float(body.get("x0", 0.0))
    y0 = _floats(body.get("y0", " ".join(["0"] * (spec.n - 1))))
    t0 = float(body.get("t0", 1.0))
    v = spec.model_v()
    report = estimates.schauder_ratio(u, v, r, alpha, Point(x0, y0, t0))
    return report, None


_CHECK_TYPES = {
    "manufactured_error": _check_manufactured,
    "harnack_quotient": _check_harnack,
    "oscillation_decay": _check_oscillation,
    "holder_bound": _check_holder,
    "schauder_ratio": _check_schauder,
}


def run_experiment(spec: ExperimentSpec, out_dir, threads: int = 1) -> bool:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    u = _solve(spec)
    g_field = sample(spec.forcing, spec.grid)

    def run_one(item):
        name, body = item
        kind = body["type"].strip()
        if kind not in _CHECK_TYPES:
            raise SpecError(f"check {name!r} has unknown type {kind!r}")
        return name, _CHECK_TYPES[kind](spec, name, body, u, g_field)

    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_one, spec.checks))
    else:
        results = [run_one(item) for item in spec.checks]

    summary_lines = [f"experiment = {spec.name}",
                     f"seed = {spec.seed}",
                     f"checks = {len(results)}"]
    all_pass = True
    body_lines = []
    for name, (report, series) in results:
        all_pass = all_pass and report.passed
        (out / f"{name}.report.txt").write_text(report.to_text())
        (out / f"{name}.records").write_text(report.to_record() + "\n")
        if series is not None:
            write_series(out / f"{name}.dat", series[0], series[1])
        body_lines.append(
            f"{name}\t{'PASS' if report.passed else 'FAIL'}\t"
            f"constant={report.measured_constant:.17g}")
    summary_lines.append(f"passed = {sum(1 for _, (r, _) in results if r.passed)}")
    summary_lines.append(f"failed = {sum(1 for _, (r, _) in results if not r.passed)}")
    summary_lines.extend(body_lines)
    summary_lines.append(f"result = {'PASS' if all_pass else 'FAIL'}")
    (out / "summary.txt").write_text("\n".join(summary_lines) + "\n")
    return all_pass


def bundled_spec_path(name: str) -> Path:
    ref = resources.files("degenpde") / "specs" / f"{name}.spec"
    if not ref.is_file():
        raise SpecError(f"no bundled experiment named {name!r}")
    return Path(str(ref))


def _bundled_names():
    specs = resources.files("degenpde") / "specs"
    return sorted(p.name[:-5] for p in specs.iterdir() if p.name.endswith(".spec"))


def list_presets() -> str:
    lines = ["coefficient presets:"]
    for key, desc in COEFFICIENT_PRESETS.items():
        lines.append(f"  {key:24s} {desc}")
    lines.append("experiment presets (run with: degenpde run <name>):")
    for name in _bundled_names():
        lines.append(f"  {name}")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="degenpde",
        description="run verification experiments for the degenerate "
                    "parabolic toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run an experiment file or bundled preset")
    run_p.add_argument("spec", help="path to an experiment file, or a bundled name")
    run_p.add_argument("--out", default=None, help="output directory")
    run_p.add_argument("--threads", type=int, default=1,
                       help="worker threads for independent checks")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the experiment seed")
    sub.add_parser("list-presets", help="list coefficient and experiment presets")
    args = parser.parse_args(argv)

    if args.command == "list-presets":
        sys.stdout.write(list_presets())
        return 0

    if args.threads < 1:
        parser.error("--threads must be >= 1")
    path = Path(args.spec)
    try:
        if not path.is_file():
            path = bundled_spec_path(args.spec)
        spec = ExperimentSpec(path, seed_override=args.seed)
        out_dir = args.out if args.out is not None else f"{spec.name}_out"
        ok = run_experiment(spec, out_dir, threads=args.threads)
    except (SpecError, configparser.Error) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
