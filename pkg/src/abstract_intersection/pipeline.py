"""Full pipeline over a grid of cuts Y and the report it produces."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .axioms import (
    build_beta_form,
    build_span_basis,
    check_castelnuovo,
    check_int1,
    check_int2_hodge,
    check_pairing,
)
from .calculus import apply_cutoff_contour, apply_cutoff_spectral, build_cutoff
from .detector import detect_rh_violation, direct_rh_check, power_sums, sensitivity_table
from .loaders import load_input
from .model import check_ip, lefschetz_check, make_model_basis
from .spectral import EigenData, OperatorSpec, eigendata_of, validate_op_axioms

STAGES = ("calculus", "model", "axioms", "detect")

DEFAULT_TOLERANCES = {
    "cluster": 1e-8,
    "strip_margin": 1e-9,
    "contour_agreement": 1e-8,
    "ip": 1e-10,
    "lefschetz": 1e-9,
    "int": 1e-9,
    "rh_direct": 1e-9,
    "detection_slack": 1e-9,
}


@dataclass
class RunConfig:
    input_path: Optional[Path] = None
    q: float = 4.0
    Y_grid: Optional[list] = None
    n_max: int = 60
    N_detect: int = 500
    quadrature_nodes: int = 512
    seed: int = 0
    samples: int = 1000
    lefschetz_n_max: int = 20
    w2_dim: int = 0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output_format: str = "json"
    input_kind: str = "auto"
    allow_invalid: bool = False

    def __post_init__(self):
        if not self.q > 0 or self.q == 1.0:
            raise ValueError(f"q must be positive and different from 1, got {self.q}")
        if self.Y_grid is not None and (not self.Y_grid or any(not y > 0 for y in self.Y_grid)):
            raise ValueError("Y grid must be a non-empty list of positive values")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ValueError(f"unknown tolerance names: {sorted(unknown)}")
        if any(not v > 0 for v in self.tolerances.values()):
            raise ValueError("tolerances must be positive")
        self.tolerances = {**DEFAULT_TOLERANCES, **self.tolerances}
        if self.output_format not in ("json", "markdown"):
            raise ValueError(f"unknown output format {self.output_format!r}")
        for name in ("n_max", "N_detect", "quadrature_nodes", "samples", "lefschetz_n_max"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


def default_Y_grid(eig: EigenData) -> list:
    """Midpoints between consecutive distinct |Im s|, plus one cut above the whole spectrum."""
    heights = np.unique(np.round(np.abs(eig.eigenvalues.imag), 12))
    grid = [0.5 * (a + b) for a, b in zip(heights[:-1], heights[1:])]
    grid = [y for y in grid if y > 0]
    grid.append(float(heights[-1]) + 1.0)
    return [float(y) for y in grid]


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, complex to [re, im], non-finite to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(float(obj.real)), _clean(float(obj.imag))]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def _run_cut(op: OperatorSpec, eig: EigenData, Y: float, cfg: RunConfig, stages) -> dict:
    tol = cfg.tolerances
    phi = build_cutoff(eig, Y, cfg.q)
    calc = apply_cutoff_spectral(eig, phi)
    out = {"Y": Y, "epsilon_Y": phi.epsilon, "q": phi.q, "two_g": calc.image_dim,
           "genus": calc.genus, "rh_in_cut": bool(all(
               abs(s.real - 0.5) <= tol["rh_direct"] for s, keep in zip(phi.points, phi.support) if keep))}
    checks = {}
    if "calculus" in stages:
        contour, info = apply_cutoff_contour(op, phi, cfg.quadrature_nodes, full_output=True)
        err = float(np.linalg.norm(contour - calc.phiA))
        out["calculus"] = {"contour_vs_spectral": err, "tol": tol["contour_agreement"],
                           "quadrature_nodes": info.nodes, "quadrature_converged": info.converged,
                           "passed": err <= tol["contour_agreement"]}
        checks["calculus"] = out["calculus"]["passed"]
    if "model" in stages or "axioms" in stages:
        basis = make_model_basis(calc)
    if "model" in stages:
        ip = check_ip(phi, calc, basis, cfg.n_max, tol["ip"])
        lef = lefschetz_check(eig, phi, calc, basis, cfg.lefschetz_n_max, tol["lefschetz"])
        out["ip"] = ip.to_dict()
        out["lefschetz"] = lef.to_dict()
        checks["ip_a_to_e"] = ip.passed
        checks["ip_f_stable"] = ip.cf_stable()
        checks["lefschetz"] = lef.passed
    if "axioms" in stages:
        span = build_span_basis(phi, calc, basis)
        form, span = build_beta_form(span, cfg.w2_dim, cfg.seed)
        t = tol["int"]
        int1 = check_int1(form, span, phi, calc, cfg.n_max, seed=cfg.seed, tol=t)
        int2 = check_int2_hodge(form, span, cfg.samples, cfg.seed, t)
        cast = check_castelnuovo(form, span, cfg.samples, cfg.seed, t)
        pair = check_pairing(form, span, cfg.samples, cfg.seed, tol=t, psd_tol=tol["ip"])
        out["span"] = {"m_Y": span.m_Y, "dim": span.dim, "w2_dim": span.w2_dim,
                       "rank_ambiguous": span.ambiguous}
        out["int1"] = int1.to_dict()
        out["int2"] = int2.to_dict()
        out["castelnuovo"] = cast.to_dict()
        out["pairing"] = pair.to_dict()
        checks.update(int1=int1.passed, int2=int2.passed, castelnuovo=cast.passed,
                      pairing=pair.passed)
    if "detect" in stages:
        series = power_sums(phi, eig, cfg.N_detect)
        verdict = detect_rh_violation(series, tol["detection_slack"])
        out["detection"] = verdict.to_dict()
        out["detection"]["horizon_by_delta"] = sensitivity_table(phi.q, series.two_g)
        checks["no_violation"] = not verdict.violation
    out["checks"] = checks
    out["axioms_hold"] = all(checks.values())
    return out


def run_operator(op: OperatorSpec, cfg: RunConfig, stages=STAGES) -> dict:
    """Run the selected stages on ``op`` and return the report as a plain dict."""
    tol = cfg.tolerances
    validation = validate_op_axioms(op, tol["cluster"], tol["strip_margin"])
    cfg_view = {k: v for k, v in asdict(cfg).items() if k not in ("input_path", "output_format")}
    report = {
        "version": __version__,
        "config": cfg_view,
        "input": str(cfg.input_path) if cfg.input_path is not None else None,
        "dim": op.dim,
        "op_validation": validation.to_dict(),
    }
    if not validation.passed and not cfg.allow_invalid:
        report["status"] = "invalid-operator"
        return _clean(report)
    eig = eigendata_of(op, tol["cluster"])
    grid = sorted(cfg.Y_grid) if cfg.Y_grid else default_Y_grid(eig)
    report["config"]["Y_grid"] = grid
    report["spectrum"] = [{"s": p.s, "mult": p.mult} for p in eig.points]
    report["cuts"] = [_run_cut(op, eig, Y, cfg, stages) for Y in grid] if stages else []
    report["status"] = "ok"
    if set(stages) == set(STAGES):
        covered = max(grid)
        rh_true = bool(all(abs(p.s.real - 0.5) <= tol["rh_direct"]
                           for p in eig.points if abs(p.s.imag) <= covered))
        axioms_hold = all(c["axioms_hold"] for c in report["cuts"])
        report["overall"] = {
            "rh_direct_check": direct_rh_check(eig, tol["rh_direct"]),
            "rh_in_covered_cuts": rh_true,
            "axioms_hold_for_all_cuts": axioms_hold,
            "equivalence_consistent": rh_true == axioms_hold,
        }
    return _clean(report)


def run(cfg: RunConfig, stages=STAGES) -> dict:
    if cfg.input_path is None:
        raise ValueError("RunConfig.input_path is required")
    return run_operator(load_input(cfg.input_path, cfg.input_kind), cfg, stages)


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def to_markdown(report: dict) -> str:
    lines = [f"# Run report ({report.get('input') or 'in-memory operator'})", ""]
    lines.append(f"- dimension: {report['dim']}")
    val = report["op_validation"]
    lines.append(f"- operator axioms: {'pass' if val['passed'] else 'FAIL'}")
    for name, v in val["verdicts"].items():
        mark = "pass" if v["passed"] else "FAIL"
        lines.append(f"  - {name}: {mark} ({v['detail']})")
    if report.get("status") != "ok":
        lines.append(f"- status: {report.get('status')}")
        return "\n".join(lines) + "\n"
    if not report["cuts"]:
        return "\n".join(lines) + "\n"
    lines += ["", "| Y | 2g | checks failed | IP-f max ratio | Lefschetz err | verdict | margin |",
              "|---|---|---|---|---|---|---|"]
    for c in report["cuts"]:
        failed = ", ".join(k for k, ok in c["checks"].items() if not ok) or "-"
        ipf = c.get("ip", {}).get("ip_f_constant", "")
        lef = c.get("lefschetz", {}).get("max_relative_error", "")
        det = c.get("detection", {})
        witness = f" (n={det['witness_n']})" if "witness_n" in det else ""
        lines.append(f"| {c['Y']:.6g} | {c['two_g']} | {failed} | {_fmt(ipf)} | {_fmt(lef)} | "
                     f"{det.get('verdict', '')}{witness} | {_fmt(det.get('margin', ''))} |")
    if "overall" in report:
        o = report["overall"]
        lines += ["", f"- RH (direct check): {o['rh_direct_check']}",
                  f"- axioms hold for every cut: {o['axioms_hold_for_all_cuts']}",
                  f"- equivalence consistent: {o['equivalence_consistent']}"]
    tol = report["config"]["tolerances"]
    lines += ["", "Tolerances: " + ", ".join(f"{k}={v:g}" for k, v in sorted(tol.items()))]
    return "\n".join(lines) + "\n"


def _fmt(x) -> str:
    return f"{x:.4g}" if isinstance(x, float) else str(x)
