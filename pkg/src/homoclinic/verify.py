"""Finite checks of the qualitative conclusions on produced solutions:
evenness, positivity, the interior-minimum lower bound, the sub-solution
barrier, comparison premises, tail decay and the a priori envelopes.

Checks never raise on failure; they return CheckResult records.  u'' is
taken from the equation (not from differentiating the basis twice), so the
checks do not share a computational path with the synthesis.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .constants import (certified_radius, eigen_pair, embedding_constant,
                        lieberman_L, tau_subsolution_scale, weight_infimum)


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float = math.nan
    location: float = math.nan
    tolerance: float = math.nan
    skipped: bool = False
    detail: str = ""

    def to_dict(self):
        return {"name": self.name, "passed": self.passed,
                "skipped": self.skipped, "value": _json_float(self.value),
                "location": _json_float(self.location),
                "tolerance": _json_float(self.tolerance),
                "detail": self.detail}


def _json_float(x):
    x = float(x)
    return x if math.isfinite(x) else None


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed or c.skipped for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not (c.passed or c.skipped)]

    def extend(self, checks):
        self.checks.extend(checks)

    def to_dict(self):
        return {"passed": self.passed,
                "checks": [c.to_dict() for c in self.checks]}


@dataclass
class Profile:
    """Sampled function with derivatives (ddu may be None)."""
    t: np.ndarray
    u: np.ndarray
    du: np.ndarray
    ddu: np.ndarray = None

    @classmethod
    def from_solution(cls, solution, t=None):
        t, u, du = solution.sample(t)
        return cls(t, u, du, solution.second_derivative_strong(t))


def _worst(values, t, mode="max"):
    i = int(np.argmax(values) if mode == "max" else np.argmin(values))
    return float(values[i]), float(t[i])


def check_even_positive(solution, even_tol=1e-12, boundary_tol=1e-10,
                        prefix=""):
    t, u, _ = solution.sample()
    n = solution.n
    # the output grid is symmetric, so reversing it maps t to -t
    defect = np.abs(u - u[::-1])
    ev, ev_at = _worst(defect, t)
    interior = np.abs(t) < n
    mn, mn_at = _worst(u[interior], t[interior], "min")
    ends = np.abs(solution.basis.synthesize(solution.xi, [-n, n])[0])
    return [
        CheckResult(prefix + "evenness", ev <= even_tol, ev, ev_at, even_tol),
        CheckResult(prefix + "interior positivity", mn > 0, mn, mn_at, 0.0),
        CheckResult(prefix + "boundary values", float(ends.max()) <= boundary_tol,
                    float(ends.max()), n, boundary_tol),
    ]


def _interior(solution, margin):
    margin = 0.05 * solution.n if margin is None else margin
    t = solution.t
    return t[np.abs(t) <= solution.n - margin]


def check_interior_minimum_bound(inst, solution, margin=None, tol=0.0,
                                 prefix=""):
    """u(x) > (lam a~)^(1/(2-q)) - tol wherever u''(x) >= 0, |x| <= n - margin."""
    t = _interior(solution, margin)
    prof = Profile.from_solution(solution, t)
    a_tilde = weight_infimum(inst.a1, solution.n)
    bound = max(inst.lam * a_tilde, 0.0) ** (1.0 / (2.0 - inst.q))
    convex = prof.ddu >= 0
    name = prefix + "interior minimum bound"
    if not convex.any():
        return CheckResult(name, True, math.nan, math.nan, tol,
                           detail=f"no grid point with u'' >= 0; bound {bound:.3e}")
    slack = prof.u[convex] - bound
    worst, at = _worst(slack, t[convex], "min")
    ok = worst > -tol if tol > 0 else worst > 0
    return CheckResult(name, bool(ok), worst, at, tol,
                       detail=f"bound {bound:.6e} at {int(convex.sum())} points")


def check_subsolution_barrier(inst, solution, n=None, tol=1e-14, prefix=""):
    """u >= tau phi1 on the grid, applicable when u' >= 0 on (-n, 0)."""
    n = solution.n if n is None else n
    t, u, du = solution.sample()
    name = prefix + "sub-solution barrier"
    left = (t > -n) & (t < 0)
    if np.any(du[left] < 0):
        return CheckResult(name, False, skipped=True,
                           detail="non-monotone core: u' changes sign on (-n, 0)")
    tau = tau_subsolution_scale(inst, n)
    _, phi1 = eigen_pair(n)
    inside = np.abs(t) < n
    slack = u[inside] - tau * phi1(t[inside])
    worst, at = _worst(slack, t[inside], "min")
    return CheckResult(name, worst >= -tol, worst, at, tol,
                       detail=f"tau = {tau:.6e}")


def check_comparison_premises(v, w, sigma, rho, A, dA, rtol=1e-9,
                              name="comparison"):
    """Check the premises of the comparison principle for even profiles v, w
    on (-rho, rho), and the conclusion v <= w when they all hold.

    Premise 0: s -> sigma(s)/s strictly decreasing (on a grid of (0, max]).
    1. (A(w)w')' - w + sigma(w) <= 0 <= (A(v)v')' - v + sigma(v).
    2. v, w >= 0 and v(rho) <= w(rho).
    3. zero sets of v and w have no interior runs.
    4. v' w' >= 0.
    5. v', w' bounded.
    A premise failure gives a skipped result naming the premise; premises
    holding with the conclusion violated is reported as an inconsistency.
    """
    for prof in (v, w):
        if prof.ddu is None or prof.du is None:
            return CheckResult(name, False, detail="premise not checkable: "
                               "second derivative unavailable")
    t = v.t
    inside = np.abs(t) < rho
    top = max(float(np.max(v.u)), float(np.max(w.u)), 1e-300)
    s = np.geomspace(top * 1e-6, top, 2001)
    ratio = np.asarray(sigma(s), dtype=float) / s
    if not np.all(np.diff(ratio) < 0):
        return CheckResult(name, False, skipped=True,
                           detail="premise 0 fails: sigma(s)/s not strictly "
                           "decreasing")

    def operator(p):
        flux_d = dA(p.u) * p.du ** 2 + A(p.u) * p.ddu
        terms = np.abs(flux_d) + np.abs(p.u) + np.abs(sigma(p.u))
        return flux_d - p.u + sigma(p.u), rtol * terms

    ow, sw = operator(w)
    ov, sv = operator(v)
    premises = [
        ("premise 1 (w super-solution)", ow[inside] <= sw[inside], ow),
        ("premise 1 (v sub-solution)", ov[inside] >= -sv[inside], -ov),
        ("premise 2 (nonnegative)", (v.u[inside] >= 0) & (w.u[inside] >= 0),
         -np.minimum(v.u, w.u)),
    ]
    edge = np.argmin(np.abs(np.abs(t) - rho))
    premises.append(("premise 2 (boundary order)",
                     np.array([v.u[edge] <= w.u[edge]]),
                     np.array([v.u[edge] - w.u[edge]])))
    zeros = [(p.u[inside] == 0) for p in (v, w)]
    premises.append(("premise 3 (null zero sets)",
                     np.array([not np.any(z[1:] & z[:-1]) for z in zeros]),
                     np.zeros(1)))
    prod = v.du * w.du
    premises.append(("premise 4 (v' w' >= 0)", prod[inside] >= 0, -prod))
    premises.append(("premise 5 (bounded derivatives)",
                     np.isfinite(v.du) & np.isfinite(w.du), np.zeros(1)))
    for label, ok, _ in premises:
        if not np.all(ok):
            return CheckResult(name, False, skipped=True,
                               detail=f"{label} fails")
    gap = v.u[inside] - w.u[inside]
    worst, at = _worst(gap, t[inside])
    if worst > 0:
        return CheckResult(name, False, worst, at, 0.0,
                           detail="inconsistent: premises hold but v > w")
    return CheckResult(name, True, worst, at, 0.0, detail="v <= w")


def check_decay(t, v, dv=None, tail_tol=1e-6, mono_tol=1e-15, name="decay"):
    """Tail sup over |t| >= n_final/2, and |v| nonincreasing on [T, n_final]
    where T is the last interior critical point (last sign change of v' on
    (0, n_final); v' is differenced from the samples when not given)."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    n = float(np.max(np.abs(t)))
    tail = np.abs(t) >= 0.5 * n
    ts, at = _worst(np.abs(v[tail]), t[tail])
    right = (t >= 0) & (t < n)
    tr, vr = t[right], v[right]
    if dv is None:
        slope = np.sign(np.gradient(vr, tr))
    else:
        slope = np.sign(np.asarray(dv, dtype=float)[right])
    slope = slope * np.sign(vr)
    flips = np.flatnonzero(slope[1:] * slope[:-1] < 0)
    start = int(flips[-1]) + 1 if flips.size else 0
    T = float(tr[start])
    seg = np.abs(v[t >= T])
    rise = np.diff(seg)
    worst = float(rise.max()) if rise.size else 0.0
    return [
        CheckResult(name + " tail", ts <= tail_tol, ts, at, tail_tol),
        CheckResult(name + " monotone tail", worst <= mono_tol, worst, T,
                    mono_tol, detail=f"|v| checked on [{T:g}, {n:g}]"),
    ]


def check_lieberman_envelope(inst, solution, L=None, C1=None, samples=201,
                             prefix=""):
    """A priori envelope conditions with m = kappa = 0 on the solution graph:
    gamma <= A(u) <= L, |A(z) - A(w)||p| <= L (1+|p|)|z - w| for z on the
    graph and w in [-Cr, Cr], |B(x, u, u')| <= L (1+|u'|)^2, |u| <= Cr."""
    _, C1, _, _, r = certified_radius(inst, C1)
    L = lieberman_L(inst, r, C1, solution.n) if L is None else L
    t, u, du = solution.sample()
    cr = embedding_constant() * r
    A = np.asarray(inst.A(u), dtype=float)
    B = u - solution.system.rhs(t, u, du) + (solution.system.forcing(t)
                                            if solution.system.forcing else 0)
    out = []
    ab, at = _worst(np.abs(u), t)
    out.append(CheckResult(prefix + "envelope |u| <= Cr", ab <= cr, ab, at, cr))
    lo, at = _worst(A - inst.gamma, t, "min")
    out.append(CheckResult(prefix + "envelope A(u) >= gamma", lo >= 0, lo, at))
    hi, at = _worst(A, t)
    out.append(CheckResult(prefix + "envelope A(u) <= L", hi <= L, hi, at, L))
    wgrid = np.linspace(-cr, cr, samples)
    Aw = np.asarray(inst.A(wgrid), dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        lhs = np.abs(A[:, None] - Aw[None, :]) * np.abs(du)[:, None]
        rhs = L * (1 + np.abs(du))[:, None] * np.abs(u[:, None] - wgrid[None, :])
        excess = np.where(lhs > 0, lhs - rhs, -np.inf)
    i, j = np.unravel_index(int(np.argmax(excess)), excess.shape)
    out.append(CheckResult(prefix + "envelope flux Lipschitz",
                           bool(excess[i, j] <= 0), float(excess[i, j]),
                           float(t[i]), L))
    ratio = np.abs(B) / (L * (1 + np.abs(du)) ** 2)
    worst, at = _worst(ratio, t)
    out.append(CheckResult(prefix + "envelope |B| <= L(1+|p|)^2", worst <= 1,
                           worst, at, 1.0))
    return out


def verify_homoclinic(inst, hsol, agreement_tol=1e-6, tail_tol=1e-6):
    """All applicable checks on every level of a homoclinic run, plus the
    cross-level agreement and the decay of the merged profile."""
    report = VerificationReport()
    for lvl in hsol.levels:
        tag = f"n={lvl.n:g}: "
        report.extend(check_even_positive(lvl, prefix=tag))
        report.checks.append(check_interior_minimum_bound(inst, lvl, prefix=tag))
        report.checks.append(check_subsolution_barrier(inst, lvl, prefix=tag))
        report.extend(check_lieberman_envelope(inst, lvl, prefix=tag))
    if hsol.agreement:
        a, b, val = hsol.agreement[-1]
        report.checks.append(CheckResult(
            f"agreement n={a:g} vs n={b:g}", val <= agreement_tol, val,
            math.nan, agreement_tol))
    report.extend(check_decay(hsol.t, hsol.v, hsol.dv, tail_tol))
    return report


def verify_solution(inst, solution):
    report = VerificationReport()
    report.extend(check_even_positive(solution))
    report.checks.append(check_interior_minimum_bound(inst, solution))
    report.checks.append(check_subsolution_barrier(inst, solution))
    report.extend(check_lieberman_envelope(inst, solution))
    return report
