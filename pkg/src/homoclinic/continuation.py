"""The three limits of the construction: k -> inf at fixed n (removing the
Strauss regularization), n -> inf (growing the interval, zero extension
between levels), and sweeps in lambda."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np

from .basis import build_basis
from .constants import (certified_radius, k_star, r_tilde, rho1,
                        sphere_sign_certificate)
from .errors import (AsymptoticBoundBreach, CertificateError,
                     ContinuationStalled, NoHomoclinic, SolverExhausted)
from .galerkin import GalerkinSystem, solve_in_ball
from .strauss import StraussApproximant


def k_schedule(k_start, k_cap=1e12, factor=2.0):
    """k_start, factor*k_start, ... up to and including k_cap."""
    if not k_start >= 1 or not factor > 1:
        raise ValueError("need k_start >= 1 and factor > 1")
    ks = []
    k = float(k_start)
    while k <= k_cap:
        ks.append(k)
        k *= factor
    return ks


def solve_Pn(inst, n, M, schedule=None, *, x0=None, basis=None, C1=None,
             C2=None, k_cap=1e12, fallback_k=1000.0, drift_tol=1e-8,
             approx_tol=1e-6, certify=True, cert_samples=200, seed=0,
             ftol=1e-10):
    """Solve the regularized problem on (-n, n) along an increasing schedule
    of k, warm-starting each level from the previous coefficients.

    The default schedule starts at k* (or at ``fallback_k`` when k* does not
    exist or exceeds ``k_cap``, in which case no certificate is claimed) and
    doubles up to ``k_cap``.  Stops once the coefficient drift is at most
    ``drift_tol`` and sup |f_k(|u'|) - g(|u'|)| on the output grid is at most
    ``approx_tol``.  The returned solution keeps its final 1/k forcing.
    """
    C, C1, C2, d1, r = certified_radius(inst, C1, C2)
    try:
        ks = k_star(rho1(inst.lam, r, inst.gamma, C2, d1, inst.q), C1, n, d1)
    except CertificateError:
        ks = None
    if ks is not None and ks > k_cap:
        # lam sits so close to Lambda* that k* is beyond reach
        ks = None
    if schedule is None:
        schedule = k_schedule(ks if ks is not None else fallback_k, k_cap)
    schedule = [float(k) for k in schedule]
    if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("k schedule must be nonempty and increasing")
    if ks is not None and schedule[0] < ks:
        raise ValueError(f"k schedule starts below k* = {ks}")
    basis = basis or build_basis(n, M)

    certificate = None
    drift = []
    history = []
    prev = None
    xi = None if x0 is None else np.asarray(x0, dtype=float)
    for j, k in enumerate(schedule):
        approx = StraussApproximant(inst.g, k, inst.theta)
        system = GalerkinSystem(inst, basis, approx)
        if j == 0 and certify and ks is not None:
            certificate = sphere_sign_certificate(
                inst, basis, approx, r, cert_samples, seed, system=system)
        sol = solve_in_ball(inst, basis, approx, r, xi, ftol=ftol,
                            system=system)
        history.append(k)
        if prev is not None:
            drift.append(float(np.linalg.norm(sol.xi - prev)))
        _, _, du = sol.sample()
        s = np.abs(du)
        approx_err = float(np.max(np.abs(approx(s) - inst.g(s))))
        prev = xi = sol.xi
        if drift and drift[-1] <= drift_tol and approx_err <= approx_tol:
            sol.certificate = certificate
            sol.drift = drift
            sol.k_history = history
            sol.approx_error = approx_err
            return sol
    raise ContinuationStalled(
        f"k-continuation stalled on (-{n}, {n}) after {len(schedule)} levels "
        f"(last drift {drift[-1] if drift else math.nan:.3e})", drift)


@dataclass
class HomoclinicSolution:
    lam: float
    n_final: float
    levels: list
    t: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    tail_sup: float
    agreement: list = field(default_factory=list)

    def level_norms(self):
        return [lvl.norm for lvl in self.levels]


def level_agreement(coarse, fine):
    """sup |u_coarse - u_fine| on [-(n_c - 1), n_c - 1], sampled on the
    coarse output grid."""
    j = coarse.n - 1.0
    t = coarse.t
    t = t[np.abs(t) <= j]
    if t.size == 0:
        return 0.0
    u_c = coarse.sample(t)[1]
    u_f = fine.sample(t)[1]
    return float(np.max(np.abs(u_c - u_f)))


def tail_sup(solution):
    """sup of |u| over |t| >= n/2 on the output grid."""
    t, u, _ = solution.sample()
    return float(np.max(np.abs(u[np.abs(t) >= 0.5 * solution.n])))


def solve_homoclinic(inst, M_per_unit=8.0, n_schedule=(2, 4, 8, 16, 32), *,
                     agreement_tol=1e-6, tail_tol=1e-6, on_level=None,
                     **pn_options):
    """Grow the interval along ``n_schedule`` until two consecutive levels
    agree to ``agreement_tol`` on the common interval and the tail of the
    last level is below ``tail_tol``.

    Each level is warm-started from the previous solution extended by zero
    and projected onto the new basis.  Failure to meet both conditions by the
    last level, or a level that cannot be solved, raises NoHomoclinic.
    """
    n_schedule = [float(n) for n in n_schedule]
    if not n_schedule or any(b <= a for a, b in zip(n_schedule,
                                                     n_schedule[1:])):
        raise ValueError("n schedule must be nonempty and increasing")
    levels = []
    agreement = []
    tail = math.inf
    C1, C2 = pn_options.pop("C1", None), pn_options.pop("C2", None)
    _, C1, C2, _, _ = certified_radius(inst, C1, C2)
    for n in n_schedule:
        M = int(math.ceil(M_per_unit * n))
        basis = build_basis(n, M)
        x0 = None
        if levels:
            x0 = basis.project_from(levels[-1].basis, levels[-1].xi)
        try:
            sol = solve_Pn(inst, n, M, basis=basis, x0=x0, C1=C1, C2=C2,
                           **pn_options)
        except (SolverExhausted, ContinuationStalled) as exc:
            raise NoHomoclinic(
                f"no numerical homoclinic at this lambda ({inst.lam:g}): "
                f"level n={n:g} failed: {exc}", levels,
                reason=type(exc).__name__) from exc
        tail = tail_sup(sol)
        if levels:
            agreement.append((levels[-1].n, n, level_agreement(levels[-1], sol)))
        levels.append(sol)
        if on_level is not None:
            on_level(sol)
        if agreement and agreement[-1][2] <= agreement_tol and tail <= tail_tol:
            t, v, dv = sol.sample()
            return HomoclinicSolution(lam=inst.lam, n_final=n, levels=levels,
                                      t=t, v=v, dv=dv, tail_sup=tail,
                                      agreement=agreement)
    last = agreement[-1][2] if agreement else math.nan
    raise NoHomoclinic(
        f"no numerical homoclinic at this lambda ({inst.lam:g}): by n="
        f"{n_schedule[-1]:g} the tail sup is {tail:.3e} and the last level "
        f"agreement is {last:.3e}", levels, reason="tail")


@dataclass
class SweepRow:
    lam: float
    norm_W12: float
    sup_norm: float
    bound: float
    r_tilde: float
    sup_bound: float
    k_final: float

    @property
    def bound_ok(self):
        return self.norm_W12 ** 2 <= self.bound

    @property
    def sup_ok(self):
        return self.sup_norm <= self.sup_bound

    def to_dict(self):
        return {"lambda": self.lam, "norm_W12": self.norm_W12,
                "sup_norm": self.sup_norm, "bound": self.bound,
                "r_tilde": self.r_tilde, "sup_bound": self.sup_bound,
                "k_final": self.k_final, "bound_ok": self.bound_ok,
                "sup_ok": self.sup_ok}


def lambda_sweep(inst, lambdas, n=5.0, M=None, *, slack=1e-8, threads=1,
                 **pn_options):
    """Solve at each lambda (independently, on (-n, n)) and tabulate
    ||u||_{H^1}, ||u||_inf, the bound lam 2 C2 r^q / gamma and C r~(lam).

    A row whose squared norm exceeds the bound by more than ``slack`` raises
    AsymptoticBoundBreach.  lam = 0 gives the trivial row without solving.
    """
    M = int(math.ceil(8 * n)) if M is None else M
    C, C1, C2, _, r = certified_radius(inst, pn_options.pop("C1", None),
                                       pn_options.pop("C2", None))
    factor = 2.0 * C2 * r ** inst.q / inst.gamma
    basis = build_basis(n, M)

    def row(lam):
        lam = float(lam)
        rt = r_tilde(lam, r, C2, inst.gamma, inst.q) if lam > 0 else 0.0
        if lam == 0:
            return SweepRow(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, math.nan)
        sol = solve_Pn(inst.with_lambda(lam), n, M, basis=basis, C1=C1, C2=C2,
                       **pn_options)
        return SweepRow(lam, sol.norm, sol.sup_norm(), lam * factor, rt,
                        C * rt, sol.k)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, lambdas))
    else:
        rows = [row(lam) for lam in lambdas]
    for rw in rows:
        if rw.norm_W12 ** 2 > rw.bound + slack:
            raise AsymptoticBoundBreach(
                f"asymptotic bound breach at lambda={rw.lam:g}: ||u||^2 = "
                f"{rw.norm_W12 ** 2:.3e} > {rw.bound:.3e}")
    return rows
