"""Command line front end.

Subcommands ``solve``, ``scan``, ``compare`` and ``generate``.  Exit codes:
0 all checks pass, 1 configuration error, 2 not dichotomous, 3 accuracy or
failed check, 4 contour/oracle disagreement.
"""

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .checks import Check
from .config import (format_number, load_config, system_to_config,
                     write_csv_matrix)
from .dichotomy import (compute_dichotomy, oracle_projections, range_basis,
                        sq_correction_check)
from .errors import (AccuracyError, NotAGraphError, NotDichotomousError,
                     ParameterError, SimilarityError, SingularityError)
from .hamiltonian import (assemble, axis_resolvent_scan, j_symmetry_check,
                          pbh_controllability, pbh_observability,
                          perturbation_radius, spectral_gap_check,
                          spectrum_symmetry_check)
from .problems import generate
from .riccati import (closed_loop, cograph_check, extract_solution,
                      f1f2_diagnostics, graph_check, residual_tolerance,
                      solution_properties)

EXIT_OK, EXIT_CONFIG, EXIT_NOT_DICHOTOMOUS, EXIT_ACCURACY, EXIT_DISAGREE = range(5)
AGREE_TOL = 1e-8
SMALL_MATRIX = 10


class PipelineFailure(Exception):
    """Carries a partial report and an exit code out of the pipeline."""

    def __init__(self, code, report):
        super().__init__(report.get("error", ""))
        self.code = code
        self.report = report


# -- serialisation helpers ----------------------------------------------------

def _num(x):
    """JSON-safe scalar: finite floats, complex as [re, im], others as str."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    z = complex(x)
    if z.imag != 0:
        return [_num(z.real), _num(z.imag)]
    v = float(z.real)
    return v if np.isfinite(v) else str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, str) or obj is None:
        return obj
    return _num(obj)


def _sorted_spectrum(ev):
    ev = np.asarray(ev, dtype=complex)
    return ev[np.lexsort((ev.imag.round(12), ev.real.round(12)))]


def _check_dict(c):
    return {"name": c.name, "passed": c.passed, "value": c.value,
            "threshold": c.threshold, "kind": c.kind, "margin": c.margin}


# -- pipeline -------------------------------------------------------------------

def _projection_norms(H, d):
    # observational only: no threshold is attached
    return {f"{name}_{space}": float(H.norm(P, space, space))
            for name, P in (("Pplus", d.Pplus), ("Pminus", d.Pminus))
            for space in ("V0", "V")}


def run_solve(config):
    """Run the full pipeline; returns ``(report, exit_code)``.

    The report is a dict with deterministic content (no timings).
    """
    policy = config.policy
    system = config.system()
    H = assemble(system)
    T0 = H.T0
    nT = float(np.linalg.norm(T0, 2))
    report = {
        "system": {"label": system.label, "n": system.n, "m": system.m,
                   "p": system.p, "r": system.r, "s": system.s,
                   "spectrum_A": _sorted_spectrum(np.linalg.eigvals(system.A)),
                   "spectrum_T0": _sorted_spectrum(np.linalg.eigvals(T0)),
                   "norm_T0": nT},
    }
    checks = []
    ctrl, obs = pbh_controllability(system), pbh_observability(system)
    gap = spectral_gap_check(system)
    report["analysis"] = {"pbh_controllable": bool(ctrl),
                          "pbh_observable": bool(obs),
                          "gap_condition": gap.condition_holds,
                          "axis_eigenvalues_T0": gap.axis_eigs_T0}
    spec_sym = spectrum_symmetry_check(H)
    checks.append(Check("spectrum_symmetry", spec_sym.max_distance,
                        spec_sym.threshold))
    if config.checks.get("symmetry"):
        js = j_symmetry_check(H, rng=np.random.default_rng(0))
        checks.append(Check("j_symmetry", js.j_defect,
                            1e-12 * max(1.0, nT)))
        checks.append(Check("jtilde_dissipative", js.max_re_jtilde,
                            1e-12 * max(1.0, nT)))

    try:
        d = compute_dichotomy(T0, policy=policy)
    except NotDichotomousError as exc:
        report["error"] = str(exc)
        report["offending_eigenvalues"] = list(exc.eigenvalues)
        raise PipelineFailure(EXIT_NOT_DICHOTOMOUS, report) from None
    except AccuracyError as exc:
        report["error"] = str(exc)
        raise PipelineFailure(EXIT_ACCURACY, report) from None

    o = oracle_projections(T0, policy=policy)
    p_err = max(np.linalg.norm(d.Pminus - o.Pminus_oracle, 2),
                np.linalg.norm(d.Pplus - o.Pplus_oracle, 2))
    report["dichotomy"] = {
        "h": d.spec.h, "t_max": d.spec.t_max, "nodes": d.nodes,
        "quadrature_error": d.quadrature_error_estimate,
        "tail_bound": d.tail_bound, "defects": d.defects,
        "oracle_method": o.method, "oracle_difference": p_err,
        "stable_count": o.n_stable,
        "projection_norms": _projection_norms(H, d),
        "L_norms_V0_to_V1": {"Lplus": H.norm(d.Lplus, "V0", "V1"),
                             "Lminus": H.norm(d.Lminus, "V0", "V1")},
    }
    for name, v in d.defects.items():
        if name != "trace_minus":
            checks.append(Check(f"projection_{name}", v, d.bound))
    checks.append(Check("trace_matches_stable_count",
                        float(abs(round(np.trace(d.Pminus).real) - o.n_stable)),
                        0.0))
    checks.append(Check("oracle_projections", p_err, AGREE_TOL))

    try:
        sol = extract_solution(H, d.basis_minus, d.basis_plus)
    except NotAGraphError as exc:
        report["error"] = str(exc)
        raise PipelineFailure(EXIT_ACCURACY, report) from None
    tol = residual_tolerance(policy.residual_tol, d.quadrature_error_estimate,
                             sol.graph_margin)
    rb = {"norms": sol.norms, "graph_margin": sol.graph_margin,
          "cograph_margin": sol.cograph_margin,
          "residual_weighted": sol.residual.weighted_rel,
          "residual_plain": sol.residual.plain_rel,
          "hermiticity_defect": sol.hermiticity_defect,
          "min_eig_X0minus": sol.min_eig}
    if system.n <= SMALL_MATRIX:
        rb["X0minus"] = sol.X0minus
        if sol.X0plus is not None:
            rb["X0plus"] = sol.X0plus
    checks.append(Check("residual_weighted", sol.residual.weighted_rel, tol))
    checks.append(Check("residual_plain", sol.residual.plain_rel, tol))
    checks += solution_properties(sol.X0minus, system, sol.X0plus, sol.Y0plus,
                                  pbh=(bool(ctrl), bool(obs)))

    radii = np.logspace(-1, 3, 9) if config.checks.get("closed_loop_scan") else None
    try:
        cl = closed_loop(system, sol.X0minus, T0, sector_radii=radii,
                         scale=H.scale)
    except SimilarityError as exc:
        report["riccati"] = rb
        report["error"] = str(exc)
        raise PipelineFailure(EXIT_ACCURACY, report) from None
    rb["closed_loop_spectrum"] = _sorted_spectrum(cl.spectrum)
    rb["closed_loop_max_real"] = cl.max_real
    checks.append(Check("closed_loop_spectrum", cl.match_distance,
                        cl.match_threshold))
    checks.append(Check("closed_loop_stable", cl.max_real,
                        -np.finfo(float).tiny))
    if radii is not None:
        rb["sector_max"] = max(v for *_, v in cl.sector_scan)
    report["riccati"] = rb

    if config.checks.get("f1f2"):
        diag = f1f2_diagnostics(d.Pminus, H=H, basis_minus=d.basis_minus)
        report["angular"] = {"cond_F1": diag.cond_F1, "cond_F2": diag.cond_F2,
                             "min_sv_F1": diag.min_sv_F1,
                             "min_sv_F2": diag.min_sv_F2,
                             "pq_diff_max_sv": float(diag.pq_diff_svals[0])}
        if graph_check(d.basis_minus) and cograph_check(d.basis_plus):
            checks.append(Check("F1_invertible", diag.min_sv_F1, 1e-10, "ge"))
            checks.append(Check("F2_invertible", diag.min_sv_F2, 1e-10, "ge"))

    if config.checks.get("sq_identity"):
        if np.linalg.eigvals(system.A).real.max() < 0:
            sq = sq_correction_check(H, abs_tol=1e-8, policy=policy)
            report["sq_identity"] = {"defect": sq.defect, "rho": sq.rho,
                                     "error_estimate": sq.error_estimate}
            checks.append(Check("sq_identity", sq.defect, 1e-6))
        else:
            report["sq_identity"] = "skipped: A not stable"

    if config.checks.get("decay_scan"):
        hi = max(4.0, 0.05 * float(np.linalg.norm(system.A, 2)))
        t = np.logspace(0, np.log10(hi), 9)
        rho1 = perturbation_radius(H, t)
        t = t[t >= 2 * rho1] if np.any(t >= 2 * rho1) else t[-1:]
        rows = axis_resolvent_scan(H, "V0norm", t)
        vals = [ti * v for ti, v in rows]
        report["decay_scan"] = {"rho1": rho1, "t": list(t),
                                "t_times_norm": vals}

    report["checks"] = [_check_dict(c) for c in checks]
    ok = all(c.passed for c in checks)
    return report, EXIT_OK if ok else EXIT_ACCURACY


def run_compare(config):
    """Contour and oracle paths side by side; exit 4 on disagreement."""
    policy = config.policy
    system = config.system()
    H = assemble(system)
    try:
        d = compute_dichotomy(H.T0, policy=policy)
        o = oracle_projections(H.T0, policy=policy)
    except NotDichotomousError as exc:
        raise PipelineFailure(EXIT_NOT_DICHOTOMOUS,
                              {"error": str(exc),
                               "offending_eigenvalues": list(exc.eigenvalues)}) from None
    except AccuracyError as exc:
        raise PipelineFailure(EXIT_ACCURACY, {"error": str(exc)}) from None
    dp = float(np.linalg.norm(d.Pplus - o.Pplus_oracle, 2))
    dm = float(np.linalg.norm(d.Pminus - o.Pminus_oracle, 2))
    sc = extract_solution(H, d.basis_minus, d.basis_plus, "contour")
    so = extract_solution(H, range_basis(o.Pminus_oracle, o.n_stable),
                          range_basis(o.Pplus_oracle, 2 * system.n - o.n_stable),
                          "oracle")
    nx = float(np.linalg.norm(so.X0minus, 2))
    dx = float(np.linalg.norm(sc.X0minus - so.X0minus, 2))
    checks = [Check("Pplus_agreement", dp, AGREE_TOL),
              Check("Pminus_agreement", dm, AGREE_TOL),
              Check("X0minus_agreement", dx, AGREE_TOL * nx)]
    report = {"system": {"label": system.label, "n": system.n},
              "Pplus_difference": dp, "Pminus_difference": dm,
              "X0minus_difference": dx,
              "X0minus_relative": dx / nx if nx > 0 else dx,
              "oracle_method": o.method,
              "checks": [_check_dict(c) for c in checks]}
    return report, EXIT_OK if all(c.passed for c in checks) else EXIT_DISAGREE


# -- scans ------------------------------------------------------------------------

SCAN_HEADER = ("parameter", "value", "metadata")


def _slope(rows):
    pts = [(p, v) for p, v, _ in rows
           if isinstance(v, float) and np.isfinite(v) and p > 0 and v > 0]
    if len(pts) < 2:
        return None
    x, y = np.log([p for p, _ in pts]), np.log([v for _, v in pts])
    return float(np.polyfit(x, y, 1)[0])


def run_scan(config, kind=None, grid=None):
    """Rows ``(parameter, value, metadata)`` in grid order, plus exit code."""
    kind = kind or config.scan.kind
    grid = config.scan.grid if grid is None else grid
    system = config.system()
    H = assemble(system)
    rows, code = [], EXIT_OK
    if kind == "axis_decay":
        if grid is None:
            grid = tuple(np.logspace(0, 3, 7))
        for t in grid:
            try:
                (_, v), = axis_resolvent_scan(H, config.scan.which, [t])
                rows.append((float(t), float(v), config.scan.which))
            except SingularityError:
                rows.append((float(t), float("nan"), "error:singular"))
                code = EXIT_ACCURACY
        slope = _slope(rows)
        if slope is not None and code == EXIT_OK:
            rows.append(("slope", slope, "loglog_fit"))
    elif kind == "sector":
        if grid is None:
            grid = tuple(np.logspace(-1, 3, 9))
        try:
            d = compute_dichotomy(H.T0, policy=config.policy)
        except NotDichotomousError:
            return rows, EXIT_NOT_DICHOTOMOUS
        sol = extract_solution(H, d.basis_minus, d.basis_plus)
        if grid:
            cl = closed_loop(system, sol.X0minus, H.T0,
                             sector_radii=np.asarray(grid, float), scale=H.scale)
            for phi, R, v in cl.sector_scan:
                rows.append((R, v, f"phi={phi!r}"))
    elif kind == "sv_probe":
        spec = config.problem
        if grid is None:
            grid = (spec.n,)
        for n in grid:
            sysn = generate(replace(spec, n=int(n)))
            Hn = assemble(sysn)
            try:
                dn = compute_dichotomy(Hn.T0, policy=config.policy)
            except NotDichotomousError:
                rows.append((int(n), float("nan"), "error:not_dichotomous"))
                code = EXIT_NOT_DICHOTOMOUS
                continue
            diag = f1f2_diagnostics(dn.Pminus, H=Hn, basis_minus=dn.basis_minus)
            for j, sv in enumerate(diag.pq_diff_svals[:5]):
                rows.append((int(n), float(sv), f"index={j}"))
            for key, v in _projection_norms(Hn, dn).items():
                rows.append((int(n), v, key))
    else:
        raise ParameterError(f"unknown scan kind {kind!r}")
    return rows, code


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_HEADER)
    for p, v, meta in rows:
        w.writerow([p if isinstance(p, str) else format_number(p),
                    format_number(v), meta])
    return buf.getvalue()


# -- report rendering ---------------------------------------------------------------

def _flatten(prefix, obj, out):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    else:
        out.append((prefix, obj))


def render_text(report, header):
    lines = [header]
    checks = report.get("checks", [])
    body = {k: v for k, v in report.items() if k != "checks"}
    flat = []
    _flatten("", _jsonable(body), flat)
    for k, v in flat:
        lines.append(f"{k}: {json.dumps(v)}")
    for c in checks:
        op = "<=" if c["kind"] == "le" else ">="
        lines.append(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}: "
                     f"{c['value']!r} {op} {c['threshold']!r}")
    return "\n".join(lines) + "\n"


def render_json(report, header):
    return json.dumps({"header": header, **_jsonable(report)}, indent=2) + "\n"


def _header(command, elapsed):
    stamp = time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime())
    return (f"# riccati-dichotomy {__version__} {command} "
            f"generated {stamp} elapsed {elapsed:.3f}s")


def _emit(report, code, args, command, elapsed, stem):
    report = dict(report)
    report["exit_code"] = code
    header = _header(command, elapsed)
    text = render_text(report, header)
    js = render_json(report, header)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{stem}.txt").write_text(text, encoding="utf-8")
        (out / f"{stem}.json").write_text(js, encoding="utf-8")
    sys.stdout.write(js if args.format == "json" else text)


# -- argument handling ------------------------------------------------------------

def _apply_overrides(config, args):
    policy = config.policy
    if args.tol is not None:
        policy = policy.with_(residual_tol=args.tol)
    if args.quad_tol is not None:
        policy = policy.with_(quad_tol=args.quad_tol)
    problem = config.problem
    if args.seed is not None and problem is not None:
        problem = replace(problem, seed=args.seed)
    return replace(config, policy=policy, problem=problem)


def build_parser():
    p = argparse.ArgumentParser(
        prog="riccati-dichotomy",
        description="Riccati solutions from dichotomy projections of the "
                    "Hamiltonian matrix.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="INI run configuration")
    common.add_argument("--out", help="output directory")
    common.add_argument("--tol", type=float, help="residual tolerance")
    common.add_argument("--quad-tol", type=float, help="quadrature tolerance")
    common.add_argument("--seed", type=int, help="override the problem seed")
    common.add_argument("--format", choices=("text", "json"), default="text")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="run the full pipeline")
    sc = sub.add_parser("scan", parents=[common], help="emit CSV scan data")
    sc.add_argument("--scan", choices=("axis_decay", "sector", "sv_probe"))
    sc.add_argument("--grid", help="comma separated grid (empty for none)")
    sub.add_parser("compare", parents=[common],
                   help="contour versus eigendecomposition")
    sub.add_parser("generate", parents=[common],
                   help="write the configured system as CSV files")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        config = _apply_overrides(load_config(args.config), args)
        if args.command == "generate":
            system = config.system()
            out = Path(args.out or ".")
            out.mkdir(parents=True, exist_ok=True)
            for name, M in zip(("A", "B", "C"), (system.A, system.B, system.C)):
                write_csv_matrix(out / f"{name}.csv", M)
            (out / "system.ini").write_text(system_to_config(system),
                                            encoding="utf-8")
            sys.stdout.write(f"wrote A.csv B.csv C.csv system.ini to {out}\n")
            return EXIT_OK
        if args.command == "scan":
            grid = None
            if args.grid is not None:
                grid = tuple(float(t) for t in args.grid.replace(",", " ").split())
            rows, code = run_scan(config, args.scan, grid)
            text = rows_to_csv(rows)
            if args.out:
                out = Path(args.out)
                out.mkdir(parents=True, exist_ok=True)
                kind = args.scan or config.scan.kind
                (out / f"scan_{kind}.csv").write_text(text, encoding="utf-8")
            sys.stdout.write(text)
            return code
        runner = run_solve if args.command == "solve" else run_compare
        try:
            report, code = runner(config)
        except PipelineFailure as exc:
            report, code = exc.report, exc.code
        _emit(report, code, args, args.command,
              time.perf_counter() - start, config.report)
        return code
    except (ParameterError, ValueError, OSError) as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
