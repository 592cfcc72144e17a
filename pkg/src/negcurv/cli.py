"""``negcurv`` command-line front end.

Exit codes: 0 affirmative outcome (criterion holds, no witness, all sampled
curvatures negative, validation passes), 1 negative outcome, 2 input or
numerical error. Every command writes exactly one JSON document.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import catalog as cat
from .curvature import (
    FlagSpec,
    LeftInvariantMetric,
    flag_curvature,
    riemannian_report,
    scan_flags,
    witness_nonnegative,
)
from .errors import NegcurvError, NotApplicableError
from .heintze import check_heintze
from .lie_core import algebra_from_dict, load_algebra, validate
from .minkowski import RiemannianNorm, load_metric, metric_from_dict, validate_norm
from .submersion import LinearSubmersion, horizontal_lift, induced_norm, isometry_check
from .tolerances import DEFAULT, Tolerances

COMMANDS = ("validate", "check", "curvature", "scan", "witness", "submersion", "catalog")
EXIT_OK, EXIT_NEGATIVE, EXIT_ERROR = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    algebra_path: str = None
    metric_path: str = None
    flag: tuple = None
    projection_path: str = None
    target: tuple = None
    samples: int = 1000
    seed: int = 42
    jobs: int = 1
    method: str = "auto"
    tolerance_overrides: dict = field(default_factory=dict)
    output: str = "-"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise NegcurvError(f"unknown command {self.command!r}")
        if self.samples < 1:
            raise NegcurvError("--samples must be >= 1")
        needs_algebra = {"validate", "check", "curvature", "scan", "witness"}
        if self.command in needs_algebra and not self.algebra_path:
            raise NegcurvError(f"'{self.command}' needs an algebra file")
        if self.command == "curvature" and not self.flag:
            raise NegcurvError("'curvature' needs --flag POLE PARTNER")
        if self.command == "submersion" and not (self.metric_path and self.projection_path):
            raise NegcurvError("'submersion' needs --metric and --projection")


def _resolve(path, kind):
    """Parsed JSON from a readable file, or from a shipped fixture of that name."""
    p = Path(path)
    if p.is_file():
        return json.loads(p.read_text())
    try:
        return cat.load_fixture(p.name)
    except FileNotFoundError:
        raise NegcurvError(f"no such {kind} file or built-in fixture: {path}") from None


def _algebra(path):
    p = Path(path)
    if p.is_file():
        return load_algebra(p)
    return algebra_from_dict(_resolve(path, "algebra"))


def _metric(path, dim):
    if path is None:
        return RiemannianNorm(np.eye(dim))
    p = Path(path)
    norm = load_metric(p) if p.is_file() else metric_from_dict(_resolve(path, "metric"))
    return norm


def _vector(text):
    try:
        return np.array([float(x) for x in text.replace(";", ",").split(",") if x.strip()])
    except ValueError as exc:
        raise NegcurvError(f"cannot parse vector {text!r}") from exc


def _cmd_validate(cfg, tol):
    g = _algebra(cfg.algebra_path)
    rep = validate(g, tol)
    out = {"algebra": rep.to_dict()}
    passed = rep.passed
    if cfg.metric_path:
        nrep = validate_norm(_metric(cfg.metric_path, g.dim), min(cfg.samples, 1000), cfg.seed)
        out["metric"] = nrep.to_dict()
        passed = passed and nrep.passed
    return out, passed


def _cmd_check(cfg, tol):
    verdict = check_heintze(_algebra(cfg.algebra_path), tol)
    return verdict.to_dict(), verdict.holds


def _metric_for(cfg):
    g = _algebra(cfg.algebra_path)
    return LeftInvariantMetric(g, _metric(cfg.metric_path, g.dim))


def _cmd_curvature(cfg, tol):
    m = _metric_for(cfg)
    u, v = (_vector(x) for x in cfg.flag)
    flag = FlagSpec(u, v)
    out = {"flag": flag.to_dict()}
    try:
        rep = flag_curvature(m, flag, tol)
        out["report"] = rep.to_dict()
        if m.is_riemannian:
            out["oracle"] = riemannian_report(m, u, v).to_dict()
    except NotApplicableError as exc:
        if not m.is_riemannian:
            raise
        rep = riemannian_report(m, u, v)
        out["report"] = rep.to_dict()
        out["formula_residuals"] = exc.residuals
    return out, rep.value < 0


def _cmd_scan(cfg, tol):
    m = _metric_for(cfg)
    summary = scan_flags(m, cfg.samples, cfg.seed, cfg.jobs, cfg.method, tol)
    return summary.to_dict(), (not summary.empty) and summary.max < 0


def _cmd_witness(cfg, tol):
    m = _metric_for(cfg)
    w = witness_nonnegative(m, budget=cfg.samples, seed=cfg.seed, tol=tol)
    if w is None:
        return {"witness": None}, True
    return {"witness": {"flag": w.flag.to_dict(), "report": w.report.to_dict(), "case": w.case}}, False


def _cmd_submersion(cfg, tol):
    raw = _resolve(cfg.projection_path, "projection")
    matrix = raw["matrix"] if isinstance(raw, dict) else raw
    l = LinearSubmersion(np.array(matrix, dtype=float))
    norm = _metric(cfg.metric_path, l.source_dim)
    target = np.array(cfg.target if cfg.target is not None else np.eye(l.target_dim)[0], dtype=float)
    lift = horizontal_lift(norm, l, target)
    iso = isometry_check(norm, l, target, trials=min(cfg.samples, 100), seed=cfg.seed)
    return {
        "induced_norm": induced_norm(norm, l, target),
        "lift": lift.to_dict(),
        "isometry": iso.to_dict(),
    }, True


def _cmd_catalog(cfg, tol):
    rows = []
    ok = True
    for entry in cat.catalog():
        verdict = check_heintze(entry.algebra, tol)
        match = verdict.holds == entry.expected_verdict
        if entry.expected_graded_spectra is not None:
            for got, want in zip(verdict.spectra_graded, entry.expected_graded_spectra):
                match = match and got.distance(np.array(want, dtype=complex)) <= 1e-6
        ok = ok and match
        rows.append({
            "name": entry.name,
            "dim": entry.algebra.dim,
            "expected_verdict": entry.expected_verdict,
            "computed_verdict": verdict.holds,
            "expected_graded_spectra": None if entry.expected_graded_spectra is None else
            [[{"re": float(x), "im": 0.0} for x in s] for s in entry.expected_graded_spectra],
            "match": match,
            "note": entry.note,
        })
    return {"catalog": rows}, ok


HANDLERS = {
    "validate": _cmd_validate,
    "check": _cmd_check,
    "curvature": _cmd_curvature,
    "scan": _cmd_scan,
    "witness": _cmd_witness,
    "submersion": _cmd_submersion,
    "catalog": _cmd_catalog,
}


def _emit(cfg, doc):
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if cfg.output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(cfg.output).write_text(text)


def run(cfg: RunConfig) -> int:
    doc = {"command": cfg.command}
    try:
        tol = DEFAULT.override(**cfg.tolerance_overrides)
        result, affirmative = HANDLERS[cfg.command](cfg, tol)
    except (NegcurvError, KeyError, OSError, ValueError, np.linalg.LinAlgError) as exc:
        doc["error"] = f"{type(exc).__name__}: {exc}"
        print(f"negcurv: {doc['error']}", file=sys.stderr)
        _emit(cfg, doc)
        return EXIT_ERROR
    doc["result"] = result
    doc["affirmative"] = bool(affirmative)
    _emit(cfg, doc)
    return EXIT_OK if affirmative else EXIT_NEGATIVE


def build_parser():
    p = argparse.ArgumentParser(prog="negcurv", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("algebra", nargs="?", help="algebra JSON file or built-in fixture name")
    p.add_argument("--metric", help="metric JSON file or fixture name (default: Euclidean)")
    p.add_argument("--flag", nargs=2, metavar=("POLE", "PARTNER"), help="comma-separated vectors")
    p.add_argument("--projection", help="JSON file with a target x source matrix")
    p.add_argument("--target", help="comma-separated target vector for 'submersion'")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--method", choices=("auto", "oracle", "homogeneous"), default="auto")
    p.add_argument("--output", default="-", help="output file, '-' for standard output")
    for f in fields(Tolerances):
        p.add_argument(f"--tol-{f.name.replace('_', '-')}", dest=f"tol_{f.name}", type=type(f.default),
                       default=None, help=f"default {f.default}")
    return p


def config_from_args(args) -> RunConfig:
    overrides = {f.name: getattr(args, f"tol_{f.name}") for f in fields(Tolerances)
                 if getattr(args, f"tol_{f.name}") is not None}
    return RunConfig(
        command=args.command,
        algebra_path=args.algebra,
        metric_path=args.metric,
        flag=tuple(args.flag) if args.flag else None,
        projection_path=args.projection,
        target=tuple(_vector(args.target)) if args.target else None,
        samples=args.samples,
        seed=args.seed,
        jobs=args.jobs,
        method=args.method,
        tolerance_overrides=overrides,
        output=args.output,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except NegcurvError as exc:
        print(f"negcurv: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
