"""Galerkin system for the regularized problem on (-n, n):

    -(A(u) u')' + u = lam a1 |u|^(q-1) + |u|^(p-1) + f_k(|u'|) + 1/k,
    u(-n) = u(n) = 0,

with u = sum xi_l e_l.  Component j of the residual map is

    F_j(xi) = int A(u) u' e_j' + int u e_j - int (rhs) e_j,

so <F(xi), xi> is the weak form tested against u itself.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .basis import GalerkinCoeffs, symmetric_grid
from .errors import AssemblyFailure, HypothesisBreach, SolverExhausted

FD_STEP = 1e-7
ARMIJO_C = 1e-4


class GalerkinSystem:
    """Residual map F for one (instance, basis, approximant) triple.

    ``approx`` is a StraussApproximant; with ``approx=None`` the derivative
    term uses g itself and the 1/k forcing is dropped (the k -> inf limit).
    ``forcing`` is an optional extra right-hand side h(t), used for
    manufactured solutions.
    """

    def __init__(self, inst, basis, approx=None, forcing=None):
        self.inst = inst
        self.basis = basis
        self.approx = approx
        self.forcing = forcing
        self._tables = self._node_tables(basis)

    @property
    def k(self):
        return None if self.approx is None else float(self.approx.k)

    @property
    def inverse_k(self):
        return 0.0 if self.approx is None else 1.0 / self.approx.k

    def nonlinearity(self, s):
        f = self.approx if self.approx is not None else self.inst.g
        return np.asarray(f(s), dtype=float)

    def _node_tables(self, basis):
        t = basis.nodes
        a = np.asarray(self.inst.a1(t), dtype=float)
        h = (np.zeros_like(t) if self.forcing is None
             else np.asarray(self.forcing(t), dtype=float))
        return t, basis.weights, basis.phi, basis.dphi, a, h

    def rhs(self, t, u, du, a=None, h=None):
        """Right-hand side lam a1 |u|^(q-1) + |u|^(p-1) + f(|u'|) + 1/k + h."""
        inst = self.inst
        if a is None:
            a = np.asarray(inst.a1(t), dtype=float)
        if h is None:
            h = 0.0 if self.forcing is None else np.asarray(self.forcing(t))
        au = np.abs(u)
        return (inst.lam * a * au ** (inst.q - 1.0) + au ** (inst.p - 1.0)
                + self.nonlinearity(np.abs(du)) + self.inverse_k + h)

    def _integrands(self, xi, tables):
        t, w, phi, dphi, a, h = tables
        u, du = phi @ xi, dphi @ xi
        flux = np.asarray(self.inst.A(u), dtype=float) * du
        rest = u - self.rhs(t, u, du, a, h)
        bad = ~(np.isfinite(flux) & np.isfinite(rest))
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise AssemblyFailure(
                f"assembly failure: non-finite integrand at t={t[i]!r} "
                f"(u={u[i]!r}, u'={du[i]!r})")
        return w * flux, w * rest

    def __call__(self, xi):
        return self.assemble(xi)

    def assemble(self, xi, tables=None):
        tables = tables or self._tables
        xi = np.asarray(xi, dtype=float)
        wf, wr = self._integrands(xi, tables)
        return tables[3].T @ wf + tables[2].T @ wr

    def pairing(self, xi):
        """<F(xi), xi>."""
        return float(self.assemble(xi) @ np.asarray(xi, dtype=float))

    def jacobian(self, xi, f0=None):
        """Forward-difference Jacobian, step 1e-7 (1 + |xi_j|)."""
        xi = np.asarray(xi, dtype=float)
        f0 = self.assemble(xi) if f0 is None else f0
        J = np.empty((len(f0), len(xi)))
        for j in range(len(xi)):
            step = FD_STEP * (1.0 + abs(xi[j]))
            e = xi.copy()
            e[j] += step
            J[:, j] = (self.assemble(e) - f0) / step
        return J

    def weak_defect(self, xi, v, refine=2):
        """|a(u, v) - l(u; v)| for test coefficients v, evaluated on a
        quadrature refined by ``refine``."""
        basis = self.basis.refined(refine) if refine > 1 else self.basis
        tables = self._node_tables(basis)
        wf, wr = self._integrands(np.asarray(xi, dtype=float), tables)
        v = np.asarray(v, dtype=float)
        return abs(float((tables[3] @ v) @ wf + (tables[2] @ v) @ wr))


def assemble_F(inst, basis, approx, xi, forcing=None):
    return GalerkinSystem(inst, basis, approx, forcing).assemble(xi)


# ---------------------------------------------------------------------------
# solver


@dataclass
class NewtonResult:
    xi: np.ndarray
    residual: float
    iterations: int
    converged: bool
    start: str


def _project_to_ball(x, r):
    nx = np.linalg.norm(x)
    return x if nx <= r else x * (r / nx)


def damped_newton(system, x0, r=math.inf, ftol=1e-10, max_iter=60,
                  polish=3, start="x0"):
    """Damped Newton on F with Armijo backtracking on ||F||^2 and steps
    projected back into the closed ball of radius r."""
    x = _project_to_ball(np.array(x0, dtype=float), r)
    f = system.assemble(x)
    nf = float(np.linalg.norm(f))
    it = 0
    extra = 0
    while it < max_iter:
        if nf <= ftol:
            if extra >= polish:
                break
            extra += 1
        it += 1
        J = system.jacobian(x, f)
        try:
            d = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            d = np.linalg.lstsq(J, -f, rcond=None)[0]
        alpha = 1.0
        accepted = False
        while alpha > 1e-10:
            xn = _project_to_ball(x + alpha * d, r)
            fn = system.assemble(xn)
            nfn = float(np.linalg.norm(fn))
            if nfn ** 2 <= (1.0 - 2.0 * ARMIJO_C * alpha) * nf ** 2:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            # a converged iterate that cannot be improved is kept as is
            break
        x, f, nf = xn, fn, nfn
    return NewtonResult(x, nf, it, nf <= ftol, start)


def default_starts(M, r, x0=None):
    """Primary start (x0 or the origin) followed by the fallback starts:
    the origin and +-e_1..+-e_4 scaled to r/4."""
    primary = [("x0", np.asarray(x0, dtype=float))] if x0 is not None else []
    fallback = [("origin", np.zeros(M))]
    for l in range(min(4, M)):
        for sign in (1.0, -1.0):
            e = np.zeros(M)
            e[l] = sign * r / 4.0 if math.isfinite(r) else sign * 0.25
            fallback.append((f"{'+' if sign > 0 else '-'}e{l + 1}", e))
    if not primary:
        primary, fallback = fallback[:1], fallback[1:]
    return primary, fallback


def solve_in_ball(inst, basis, approx, r, x0=None, *, forcing=None,
                  ftol=1e-10, max_iter=60, exhaustive=False, certificate=None,
                  system=None):
    """Find a root of F in the closed ball ||xi|| <= r.

    The primary start is ``x0`` (or the origin).  If it fails, or when
    ``exhaustive`` is set, the deterministic fallback starts are tried and the
    converged root of largest norm is returned.
    """
    system = system or GalerkinSystem(inst, basis, approx, forcing)
    primary, fallback = default_starts(basis.M, r, x0)
    tried = []
    candidates = []
    for group in (primary, fallback):
        for label, start in group:
            res = damped_newton(system, start, r, ftol, max_iter, start=label)
            tried.append(res)
            if res.converged and np.linalg.norm(res.xi) <= r * (1 + 1e-12):
                candidates.append(res)
        if candidates and not exhaustive:
            break
    if not candidates:
        best = min(tried, key=lambda res: res.residual)
        raise SolverExhausted(
            f"solver exhausted: no root with ||F|| <= {ftol:g} in the ball "
            f"of radius {r:g} after {len(tried)} starts "
            f"(best ||F|| = {best.residual:.3e} from start {best.start})")
    best = max(candidates, key=lambda res: np.linalg.norm(res.xi))
    return GalerkinSolution(xi=best.xi, system=system, radius=r,
                            residual_norm=best.residual,
                            iterations=best.iterations,
                            certificate=certificate)


# ---------------------------------------------------------------------------
# solutions and residuals


@dataclass
class GalerkinSolution:
    xi: np.ndarray
    system: GalerkinSystem
    radius: float
    residual_norm: float
    iterations: int = 0
    certificate: object = None
    drift: list = field(default_factory=list)
    k_history: list = field(default_factory=list)
    approx_error: float = math.nan
    grid_per_unit: int = 50

    @property
    def coeffs(self):
        return GalerkinCoeffs(self.xi)

    @property
    def norm(self):
        return float(np.linalg.norm(self.xi))

    @property
    def basis(self):
        return self.system.basis

    @property
    def inst(self):
        return self.system.inst

    @property
    def n(self):
        return self.basis.n

    @property
    def M(self):
        return self.basis.M

    @property
    def k(self):
        return self.system.k

    @property
    def lam(self):
        return self.inst.lam

    @property
    def t(self):
        return symmetric_grid(self.n, self.grid_per_unit)

    def sample(self, t=None):
        """(t, u, u') on ``t`` (default: the symmetric output grid)."""
        t = self.t if t is None else np.asarray(t, dtype=float)
        u, du = self.basis.synthesize(self.xi, t)
        return t, u, du

    def second_derivative_strong(self, t=None):
        """u'' from the equation itself:
        (u - rhs - A'(u) u'^2) / A(u)."""
        t, u, du = self.sample(t)
        A = np.asarray(self.inst.A(u), dtype=float)
        if np.any(A < 0.5 * self.inst.gamma):
            i = int(np.argmin(A))
            raise HypothesisBreach(
                f"hypothesis breach: A(u)={A[i]!r} < gamma/2 at t={t[i]!r}")
        dA = np.asarray(self.inst.dA(u), dtype=float)
        return (u - self.system.rhs(t, u, du) - dA * du * du) / A

    def sup_norm(self):
        return float(np.max(np.abs(self.sample()[1])))


def weak_residual(solution, probe_count=None, random_probes=10, seed=0,
                  refine=2):
    """Largest weak-form defect over unit test functions: the first
    ``probe_count`` basis elements plus ``random_probes`` random unit
    combinations, all evaluated on a refined quadrature."""
    M = solution.M
    probe_count = M if probe_count is None else min(probe_count, M)
    probes = list(np.eye(M)[:probe_count])
    rng = np.random.default_rng(seed)
    for _ in range(random_probes):
        v = rng.standard_normal(M)
        probes.append(v / np.linalg.norm(v))
    system = solution.system
    basis = system.basis.refined(refine) if refine > 1 else system.basis
    tables = system._node_tables(basis)
    wf, wr = system._integrands(solution.xi, tables)
    V = np.array(probes).T
    defects = (tables[3] @ V).T @ wf + (tables[2] @ V).T @ wr
    return float(np.max(np.abs(defects)))


def strong_residual(solution, t=None, margin=None):
    """sup |u''_basis - u''_equation| over interior grid points.

    Default grid: the output grid restricted to |t| <= n - margin with
    margin = n/10.
    """
    if t is None:
        margin = 0.1 * solution.n if margin is None else margin
        t = solution.t
        t = t[np.abs(t) <= solution.n - margin]
    t = np.asarray(t, dtype=float)
    analytic = solution.basis.second_derivative(solution.xi, t)
    formula = solution.second_derivative_strong(t)
    return float(np.max(np.abs(analytic - formula)))


def manufactured_forcing(inst, approx, n, amplitude):
    """Forcing h that makes u*(t) = amplitude cos(pi t/(2n)) an exact solution
    of the regularized problem (approx=None: limit problem)."""
    w = math.pi / (2.0 * n)
    inv_k = 0.0 if approx is None else 1.0 / approx.k
    f = approx if approx is not None else inst.g

    def h(t):
        t = np.asarray(t, dtype=float)
        u = amplitude * np.cos(w * np.abs(t))
        du = -amplitude * w * np.sin(w * t)
        ddu = -w * w * u
        lhs = -inst.dA(u) * du * du - inst.A(u) * ddu + u
        au = np.abs(u)
        return (lhs - inst.lam * inst.a1(t) * au ** (inst.q - 1.0)
                - au ** (inst.p - 1.0) - f(np.abs(du)) - inv_k)

    return h
