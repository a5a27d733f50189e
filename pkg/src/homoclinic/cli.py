"""Command-line front end.

    homoclinic <subcommand> [--config FILE] [--allow-beyond-lambda-star]

Each subcommand writes its artifacts and a manifest.json into
<output.directory>/<subcommand>/.  Exit status: 0 success, 1 verification
failure, 2 configuration error, 3 solver failure (stall, exhausted starts,
no homoclinic).
"""

import argparse
import json
import math
from pathlib import Path
import sys

import numpy as np

from . import __version__
from .config import build_instance, load_config
from .constants import (certified_radius, constants_report, lambda_star,
                        nonexistence_threshold)
from .continuation import lambda_sweep, solve_homoclinic, solve_Pn
from .errors import (AsymptoticBoundBreach, ConfigError, HomoclinicError,
                     NoHomoclinic)
from .galerkin import strong_residual, weak_residual
from .problem import lstar_norm_a1, validate_hypotheses
from .strauss import StraussApproximant, lipschitz_estimate, uniform_error
from .verify import CheckResult, verify_homoclinic, verify_solution

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3

SUBCOMMANDS = ("validate", "constants-report", "strauss-report", "solve",
               "homoclinic", "sweep", "nonexistence-probe")


def _clean(obj):
    """JSON-safe copy: numpy scalars/arrays to Python, non-finite to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def write_json(path, obj):
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def write_csv(path, header, columns):
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    np.savetxt(path, data, fmt="%.17g", delimiter=",",
               header=",".join(header), comments="")


class Run:
    """State shared by the subcommand handlers."""

    def __init__(self, cfg, command, allow_beyond):
        self.cfg = cfg
        self.command = command
        self.allow_beyond = allow_beyond
        self.outdir = Path(cfg.output.directory) / command
        self.artifacts = []
        base = build_instance(cfg, 0.0)
        self.C2 = lstar_norm_a1(base, cfg.validation.truncation_radius)
        self.C, self.C1, _, self.delta1, self.r = certified_radius(
            base, C2=self.C2)
        self.Lambda_star = lambda_star(self.r, base.gamma, self.C2,
                                       self.delta1, base.q)
        lam = cfg.instance.lam
        if math.isnan(lam):
            if not math.isfinite(self.Lambda_star):
                raise ConfigError("config error: Lambda* is infinite for this "
                                  "weight; set lambda explicitly")
            lam = cfg.instance.lambda_fraction * self.Lambda_star
        self.check_lambda(lam)
        self.inst = base.with_lambda(lam)

    def check_lambda(self, lam):
        if lam > self.Lambda_star and not self.allow_beyond:
            raise ConfigError(
                f"config error: lambda = {lam:g} exceeds Lambda* = "
                f"{self.Lambda_star:g}; pass --allow-beyond-lambda-star")

    def pn_options(self):
        c, tol = self.cfg.continuation, self.cfg.tolerances
        return dict(C1=self.C1, C2=self.C2, k_cap=c.k_cap,
                    fallback_k=c.k_fallback, drift_tol=tol.k_drift,
                    approx_tol=tol.strauss_uniform,
                    cert_samples=c.certificate_samples, seed=c.seed,
                    ftol=tol.newton)

    def path(self, name):
        self.outdir.mkdir(parents=True, exist_ok=True)
        self.artifacts.append(name)
        return self.outdir / name

    def manifest(self, status, exit_code, results):
        doc = {
            "command": self.command,
            "version": __version__,
            "config_hash": self.cfg.source_hash,
            "config": self.cfg.to_dict(),
            "instance": self.inst.describe(),
            "lambda": self.inst.lam,
            "Lambda_star": self.Lambda_star,
            "status": status,
            "exit_code": exit_code,
            "results": results,
            "artifacts": list(self.artifacts),
        }
        write_json(self.path("manifest.json"), doc)


# ---------------------------------------------------------------------------
# handlers: each returns (exit_code, status message, results dict)


def cmd_validate(run):
    v = run.cfg.validation
    report = validate_hypotheses(run.inst, v.grid_radius, v.grid_points)
    write_json(run.path("hypotheses.json"), report.to_dict())
    code = EXIT_OK if report.passed else EXIT_VERIFY
    failed = [c.name for c in report.checks if not c.passed]
    msg = "hypotheses hold on the grid" if report.passed else (
        "hypotheses fail: " + ", ".join(failed))
    return code, msg, {"passed": report.passed, "C2": run.C2}


def cmd_constants_report(run):
    p = run.cfg.probe
    rep = constants_report(run.inst, n=run.cfg.discretization.n, R=p.R,
                           delta=p.delta, C1=run.C1, C2=run.C2)
    write_json(run.path("constants.json"), rep.to_dict())
    return EXIT_OK, "constants written", rep.to_dict()


def cmd_strauss_report(run):
    s = run.cfg.strauss_report
    rows = []
    for k in s.k_values:
        approx = StraussApproximant(run.inst.g, k, run.inst.theta)
        rows.append((k, uniform_error(approx, run.inst.g, s.radius, s.samples),
                     lipschitz_estimate(approx, s.radius, s.samples)))
    cols = list(zip(*rows))
    write_csv(run.path("strauss.csv"),
              ["k", "uniform_error", "lipschitz_estimate"], cols)
    return EXIT_OK, "Strauss table written", {
        "rows": [dict(zip(("k", "uniform_error", "lipschitz_estimate"), r))
                 for r in rows]}


def _residual_checks(solution, tol, prefix=""):
    wr = weak_residual(solution)
    checks = [CheckResult(prefix + "weak residual", wr <= tol, wr,
                          tolerance=tol)]
    cert = solution.certificate
    if cert is not None:
        checks.append(CheckResult(prefix + "sphere-sign certificate",
                                  cert.passed, cert.min_value, tolerance=0.0))
    return checks, wr


def _level_summary(sol, wr):
    return {"n": sol.n, "M": sol.M, "Q": sol.basis.Q, "k_final": sol.k,
            "forcing_1_over_k": 1.0 / sol.k, "norm_W12": sol.norm,
            "sup_norm": sol.sup_norm(), "residual_norm": sol.residual_norm,
            "weak_residual": wr, "strong_residual": strong_residual(sol),
            "drift": sol.drift, "k_history": sol.k_history,
            "certificate": (sol.certificate.to_dict()
                            if sol.certificate is not None else None)}


def cmd_solve(run):
    d = run.cfg.discretization
    M = d.M or int(math.ceil(d.M_per_unit * d.n))
    sol = solve_Pn(run.inst, d.n, M, **run.pn_options())
    report = verify_solution(run.inst, sol)
    checks, wr = _residual_checks(sol, run.cfg.tolerances.weak_residual)
    report.extend(checks)
    write_json(run.path("verification.json"), report.to_dict())
    results = {"solution": _level_summary(sol, wr),
               "verification_passed": report.passed}
    if not report.passed:
        return EXIT_VERIFY, _failure_message(run, report), results
    t, u, du = sol.sample()
    write_csv(run.path("solution.csv"), ["t", "u", "du"], [t, u, du])
    return EXIT_OK, f"solved on (-{d.n:g}, {d.n:g}), ||u|| = {sol.norm:.6e}", \
        results


def _failure_message(run, report):
    names = ", ".join(c.name for c in report.failures())
    return (f"verification failed ({names}); see "
            f"{run.outdir / 'verification.json'}")


def _homoclinic(run, inst):
    c, tol = run.cfg.continuation, run.cfg.tolerances
    return solve_homoclinic(inst, run.cfg.discretization.M_per_unit,
                            c.n_schedule, agreement_tol=tol.agreement,
                            tail_tol=tol.tail, **run.pn_options())


def cmd_homoclinic(run):
    tol = run.cfg.tolerances
    hs = _homoclinic(run, run.inst)
    report = verify_homoclinic(run.inst, hs, tol.agreement, tol.tail)
    levels = []
    for lvl in hs.levels:
        checks, wr = _residual_checks(lvl, tol.weak_residual,
                                      f"n={lvl.n:g}: ")
        report.extend(checks)
        levels.append(_level_summary(lvl, wr))
    write_json(run.path("verification.json"), report.to_dict())
    results = {"n_final": hs.n_final, "tail_sup": hs.tail_sup,
               "agreement": [{"n_coarse": a, "n_fine": b, "sup_diff": v}
                             for a, b, v in hs.agreement],
               "levels": levels, "verification_passed": report.passed}
    if not report.passed:
        return EXIT_VERIFY, _failure_message(run, report), results
    for lvl in hs.levels:
        t, u, du = lvl.sample()
        write_csv(run.path(f"level_n{lvl.n:g}.csv"), ["t", "u", "du"],
                  [t, u, du])
    write_csv(run.path("homoclinic.csv"), ["t", "v", "dv"],
              [hs.t, hs.v, hs.dv])
    return EXIT_OK, (f"homoclinic found: n_final = {hs.n_final:g}, "
                     f"tail sup = {hs.tail_sup:.3e}"), results


def cmd_sweep(run):
    c = run.cfg.continuation
    lambdas = [f * run.Lambda_star for f in c.lambda_fractions]
    for lam in lambdas:
        run.check_lambda(lam)
    opts = run.pn_options()
    rows = lambda_sweep(run.inst, lambdas, n=c.sweep_n,
                        M=int(math.ceil(run.cfg.discretization.M_per_unit
                                        * c.sweep_n)),
                        slack=run.cfg.tolerances.bound_slack,
                        threads=run.cfg.output.threads, **opts)
    checks = [CheckResult(f"sup bound at lambda={r.lam:g}", r.sup_ok,
                          r.sup_norm, tolerance=r.sup_bound) for r in rows]
    order = sorted(rows, key=lambda r: r.lam)
    norms = [r.norm_W12 for r in order]
    increasing = all(b > a for a, b in zip(norms, norms[1:]))
    checks.append(CheckResult("norms strictly increasing in lambda",
                              increasing))
    ok = all(ch.passed for ch in checks)
    write_json(run.path("verification.json"),
               {"passed": ok, "checks": [ch.to_dict() for ch in checks]})
    results = {"rows": [r.to_dict() for r in rows], "verification_passed": ok}
    if not ok:
        return EXIT_VERIFY, "sweep verification failed", results
    write_csv(run.path("sweep.csv"),
              ["lambda", "norm_W12", "sup_norm", "bound", "r_tilde",
               "sup_bound"],
              list(zip(*[(r.lam, r.norm_W12, r.sup_norm, r.bound, r.r_tilde,
                          r.sup_bound) for r in rows])))
    return EXIT_OK, f"sweep over {len(rows)} values of lambda", results


def cmd_nonexistence_probe(run):
    p = run.cfg.probe
    thr = nonexistence_threshold(run.inst, p.R, run.r, p.delta, details=True)
    lam = p.factor * thr.lambda0
    probe = {"lambda0": thr.lambda0, "lambda": lam, "factor": p.factor,
             "R": p.R, "r_tilde": thr.r_tilde, "delta": p.delta,
             "sigma1": thr.sigma1, "a_tilde_R": thr.a_tilde_R,
             "required_C_Lambda": thr.rhs}
    try:
        hs = _homoclinic(run, run.inst.with_lambda(lam))
    except NoHomoclinic as exc:
        probe.update(found=False, reason=exc.reason, detail=str(exc))
        write_json(run.path("probe.json"), probe)
        return EXIT_OK, (f"no solution found above the nonexistence threshold "
                         f"(lambda = {lam:g} = {p.factor:g} lambda0)"), probe
    probe.update(found=True, n_final=hs.n_final, tail_sup=hs.tail_sup)
    write_json(run.path("probe.json"), probe)
    return EXIT_VERIFY, (f"a homoclinic was found above the nonexistence "
                         f"threshold (lambda = {lam:g})"), probe


HANDLERS = {
    "validate": cmd_validate,
    "constants-report": cmd_constants_report,
    "strauss-report": cmd_strauss_report,
    "solve": cmd_solve,
    "homoclinic": cmd_homoclinic,
    "sweep": cmd_sweep,
    "nonexistence-probe": cmd_nonexistence_probe,
}


def run(subcommand, config_path=None, allow_beyond_lambda_star=False,
        out=None, err=None):
    """Execute one subcommand; returns the exit status."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        cfg = load_config(config_path)
        state = Run(cfg, subcommand,
                    allow_beyond_lambda_star or subcommand == "nonexistence-probe")
    except ConfigError as exc:
        print(exc, file=err)
        return EXIT_CONFIG
    try:
        code, msg, results = HANDLERS[subcommand](state)
    except ConfigError as exc:
        print(exc, file=err)
        return EXIT_CONFIG
    except AsymptoticBoundBreach as exc:
        code, msg, results = EXIT_VERIFY, str(exc), {"error": str(exc)}
    except HomoclinicError as exc:
        # stalls, exhausted starts, no homoclinic, numerical breakdowns
        code, msg, results = EXIT_SOLVER, str(exc), {"error": str(exc)}
    state.manifest(msg, code, results)
    print(msg, file=out if code == EXIT_OK else err)
    return code


def build_parser():
    parser = argparse.ArgumentParser(
        prog="homoclinic",
        description="Galerkin/continuation solver for even positive "
                    "homoclinic solutions.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", "-c", default=None,
                        help="INI configuration file (defaults apply to "
                             "missing keys)")
    parser.add_argument("--allow-beyond-lambda-star", action="store_true",
                        help="accept lambda values above Lambda*")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return run(args.subcommand, args.config, args.allow_beyond_lambda_star)


if __name__ == "__main__":
    sys.exit(main())
