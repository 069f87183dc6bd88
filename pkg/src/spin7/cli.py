"""Command-line front end.

Commands: ``identities``, ``decompose``, ``torsion``, ``curvature`` and
``killing``.  Reports are JSON with a schema version; exit status is 0 when
every gating check passes, 1 when an identity fails and 2 on bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis
from . import spin7_algebra as algebra
from .exterior_kernel import KForm
from .geometry_fields import (
    FIXTURE_KINDS,
    SingularCoframe,
    default_fixture,
    field_from_json,
    field_to_json,
    sample_points,
    scalar_from_json,
    structure_jet,
)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    inputs: tuple[str, ...]
    out: str | None
    seed: int
    samples: int
    tol: float | None
    verbose: int

    def __post_init__(self):
        if self.samples < 1:
            raise InputError("--samples must be at least 1")
        if self.tol is not None and not self.tol > 0:
            raise InputError("--tol must be positive")

    def tolerance(self, default: float) -> float:
        return default if self.tol is None else self.tol

    def points(self) -> np.ndarray:
        return sample_points(self.samples, seed=self.seed)


SCHEMAS = {
    "form": {
        "description": "a k-form by its nonzero coefficients on ordered basis monomials",
        "type": "object",
        "required": ["degree", "terms"],
        "properties": {
            "degree": {"type": "integer", "minimum": 0, "maximum": 8},
            "terms": {"type": "array", "items": {
                "type": "object", "required": ["indices", "coeff"],
                "properties": {"indices": {"type": "array", "items": {"type": "integer"}},
                               "coeff": {"type": "number"}}}},
        },
        "example": {"degree": 2, "terms": [{"indices": [0, 1], "coeff": 1.0}]},
    },
    "fixture": {
        "description": "coframe field; terms are amplitude*sin(sum frequency[j]*x[axes[j]] + phase)",
        "type": "object",
        "required": ["kind"],
        "properties": {
            "kind": {"enum": list(FIXTURE_KINDS)},
            "epsilon": {"type": "number"},
            "terms": {"type": "array", "items": {
                "type": "object", "required": ["axes", "amplitude", "frequency"],
                "properties": {
                    "axes": {"type": "array", "items": {"type": "integer"}},
                    "amplitude": {"type": "number"},
                    "frequency": {"type": "array", "items": {"type": "number"}},
                    "phase": {"type": "number"},
                    "entry": {"type": "array", "items": {"type": "integer"},
                              "description": "matrix entry [row, col]; required for perturbed"},
                }}},
            "base": {"description": "conformal only: fixture to rescale (default flat)"},
        },
        "example": {"kind": "conformal", "epsilon": 0.01,
                    "terms": [{"axes": [0], "amplitude": 1.0, "frequency": [1.0]}]},
    },
    "dilation": {
        "description": "scalar field: trig series like a fixture, or a constant",
        "type": "object",
        "properties": {"kind": {"enum": ["trig", "constant"]}, "epsilon": {"type": "number"},
                       "terms": {"type": "array"}, "value": {"type": "number"}},
        "example": {"kind": "trig", "epsilon": -0.0233333,
                    "terms": [{"axes": [0], "amplitude": 1.0, "frequency": [1.0]}]},
    },
    "report": {
        "description": "every report carries schema, command, passed and a list of checks",
        "type": "object",
        "required": ["schema", "command", "passed"],
        "properties": {"schema": {"const": SCHEMA_VERSION}},
    },
}


# ---------------------------------------------------------------------------
# Input helpers


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def load_fixture(name: str):
    """A fixture JSON path, or one of the built-in names flat/conformal/perturbed."""
    if name in FIXTURE_KINDS and not Path(name).exists():
        return default_fixture(name)
    try:
        return field_from_json(_load_json(name))
    except InputError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{name}: {exc}") from None


def load_form(path: str) -> KForm:
    try:
        return KForm.from_json(_load_json(path))
    except InputError:
        raise
    except (ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _require_inputs(cfg: RunConfig, n: int, names: str) -> None:
    if len(cfg.inputs) != n:
        raise InputError(f"{cfg.command} expects {names}")


def _checks_json(results, verbose: int) -> list[dict]:
    return [r.to_json(verbose > 0) for r in results]


def _report(cfg: RunConfig, results, **extra) -> dict:
    out = {
        "schema": SCHEMA_VERSION,
        "command": cfg.command,
        "seed": cfg.seed,
        "samples": cfg.samples,
        "passed": analysis.all_passed(results),
        "checks": _checks_json(results, cfg.verbose),
    }
    out.update(extra)
    return out


def _failures(results) -> list[str]:
    return [r.name for r in results if r.gating and not r.passed]


# ---------------------------------------------------------------------------
# Commands


def cmd_identities(cfg: RunConfig) -> tuple[int, dict]:
    phi = None
    if cfg.inputs:
        _require_inputs(cfg, 1, "at most one form JSON (a replacement fundamental form)")
        phi = load_form(cfg.inputs[0])
        if phi.degree != 4:
            raise InputError("the replacement fundamental form must be a 4-form")
    results = analysis.algebraic_suite(phi, seed=cfg.seed, samples=cfg.samples,
                                       tol=cfg.tolerance(1e-10))
    failed = _failures(results)
    return (EXIT_FAIL if failed else EXIT_OK), _report(cfg, results, failures=failed)


def cmd_decompose(cfg: RunConfig) -> tuple[int, dict]:
    _require_inputs(cfg, 1, "one form JSON")
    form = load_form(cfg.inputs[0])
    try:
        parts = algebra.decompose(form)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    pyth = abs(sum(n * n for n in parts.norms().values()) - form.norm() ** 2)
    check = analysis.CheckResult("pythagoras", "sum of squared component norms equals |a|^2",
                                 [pyth], cfg.tolerance(1e-10))
    body = parts.to_json(1e-14)
    if not cfg.verbose:
        for comp in body["components"]:
            comp.pop("coeffs")
    return (EXIT_OK if check.passed else EXIT_FAIL), _report(cfg, [check], decomposition=body)


def cmd_torsion(cfg: RunConfig) -> tuple[int, dict]:
    _require_inputs(cfg, 1, "one fixture")
    field_ = load_fixture(cfg.inputs[0])
    pts = cfg.points()
    tol = cfg.tolerance(1e-8)
    results = analysis.torsion_suite(field_, pts, tol)
    cls = analysis.classify(field_, pts, cfg.tolerance(analysis.DEFAULT_TOL))
    fmt = (lambda v: v) if cfg.verbose else analysis.round_sig
    per_point = []
    gaps = []
    for x in pts:
        sj = structure_jet(field_, x)
        lhs, rhs, gap = analysis.lee_bound_check(sj)
        gaps.append((x, gap))
        if cfg.verbose:
            per_point.append({
                "x": [float(v) for v in x],
                "theta": [fmt(v) for v in sj.theta.coeffs],
                "torsion": sj.T.to_json(1e-15),
                "torsion_norm2": fmt(lhs),
                "lee_bound": fmt(rhs),
            })
    gap = analysis.collect("lee_gap", "|T|^2 - 7/6 |theta|^2 = |T + 1/6 *(theta ^ Phi)|^2",
                           tol, gaps, gating=False)
    results = results + [gap]
    extra = {"class": cls.to_json(cfg.verbose > 0), "fixture": field_to_json(field_)}
    if per_point:
        extra["points"] = per_point
    failed = _failures(results)
    return (EXIT_FAIL if failed else EXIT_OK), _report(cfg, results, failures=failed, **extra)


def cmd_curvature(cfg: RunConfig) -> tuple[int, dict]:
    _require_inputs(cfg, 1, "one fixture")
    field_ = load_fixture(cfg.inputs[0])
    results = analysis.curvature_suite(field_, cfg.points(), cfg.tolerance(1e-6))
    failed = _failures(results)
    return (EXIT_FAIL if failed else EXIT_OK), _report(cfg, results, failures=failed)


def cmd_killing(cfg: RunConfig) -> tuple[int, dict]:
    _require_inputs(cfg, 2, "a fixture and a dilation JSON")
    field_ = load_fixture(cfg.inputs[0])
    try:
        psi = scalar_from_json(_load_json(cfg.inputs[1]))
    except InputError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{cfg.inputs[1]}: {exc}") from None
    rep = analysis.killing_check(field_, psi, cfg.points(), cfg.tolerance(1e-6))
    out = {
        "schema": SCHEMA_VERSION,
        "command": cfg.command,
        "seed": cfg.seed,
        "samples": cfg.samples,
        "passed": rep.accepted,
        "killing": rep.to_json(cfg.verbose > 0),
        "conformal_exponent": analysis.balanced_conformal_exponent(),
    }
    return (EXIT_OK if rep.accepted else EXIT_FAIL), out


COMMANDS = {
    "identities": (cmd_identities, "run the algebraic invariant suite", "[form.json]"),
    "decompose": (cmd_decompose, "split a 2-, 3- or 4-form into irreducible pieces", "form.json"),
    "torsion": (cmd_torsion, "torsion, Lee form and class of a fixture", "fixture"),
    "curvature": (cmd_curvature, "curvature and spinor identity table for a fixture", "fixture"),
    "killing": (cmd_killing, "Killing spinor test for a fixture and dilation", "fixture dilation.json"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="sampling seed (PCG64)")
    common.add_argument("--samples", type=int, default=32, help="number of sample points")
    common.add_argument("--tol", type=float, default=None, help="override the check tolerance")
    common.add_argument("--out", default=None, help="write the JSON report here")
    common.add_argument("--verbose", "-v", action="count", default=0,
                        help="full-precision residuals and per-point data")
    parser = argparse.ArgumentParser(prog="spin7", description=__doc__.splitlines()[0])
    parser.add_argument("--schema", action="store_true", help="print input and report schemas")
    sub = parser.add_subparsers(dest="command")
    for name, (_, help_, metavar) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("inputs", nargs="*", metavar=metavar)
    return parser


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.schema:
        _emit(SCHEMAS, None)
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_INPUT
    try:
        cfg = RunConfig(args.command, tuple(args.inputs), args.out, args.seed, args.samples,
                        args.tol, args.verbose)
        code, report = COMMANDS[args.command][0](cfg)
    except (InputError, SingularCoframe) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(report, cfg.out)
    for name in report.get("failures", []):
        print(f"FAILED: {name}", file=sys.stderr)
    if args.command == "killing" and not report["passed"]:
        print("FAILED: killing (rejected)", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
