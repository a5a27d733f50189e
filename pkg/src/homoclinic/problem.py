"""Problem data for

    -(A(u) u')' + u = lam a1(t) |u|^(q-1) + |u|^(p-1) + g(|u'|)   on R,
    u > 0,  u(t) -> 0 as |t| -> inf,

together with the built-in function catalog and sampled hypothesis checks.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np
from scipy import integrate, special

from .errors import InstanceEvaluationError, TruncationInsufficient

# ---------------------------------------------------------------------------
# catalog: diffusion coefficients A


@dataclass(frozen=True)
class ConstantDiffusion:
    gamma: float
    name = "constant"

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.gamma)

    def derivative(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def params(self):
        return {"gamma": self.gamma}


@dataclass(frozen=True)
class ArctanDiffusion:
    """A(t) = gamma + (1 - gamma) (1/2 + arctan(t)/pi); increasing, inf = gamma."""
    gamma: float
    name = "arctan"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.gamma + (1.0 - self.gamma) * (0.5 + np.arctan(t) / np.pi)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        return (1.0 - self.gamma) / (np.pi * (1.0 + t * t))

    def params(self):
        return {"gamma": self.gamma}


# ---------------------------------------------------------------------------
# catalog: weights a1 (each knows an upper bound for its L^s tail)


@dataclass(frozen=True)
class GaussianWeight:
    scale: float = 1.0
    name = "gaussian"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-(t / self.scale) ** 2)

    def tail_bound(self, radius, s):
        # int_{|t|>R} exp(-s t^2/sigma^2) dt, exact
        return float(self.scale * math.sqrt(math.pi / s)
                     * special.erfc(math.sqrt(s) * radius / self.scale))

    def params(self):
        return {"scale": self.scale}


@dataclass(frozen=True)
class ExponentialWeight:
    scale: float = 1.0
    name = "exponential"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-np.abs(t) / self.scale)

    def tail_bound(self, radius, s):
        return float(2.0 * self.scale / s * math.exp(-s * radius / self.scale))

    def params(self):
        return {"scale": self.scale}


@dataclass(frozen=True)
class ZeroWeight:
    name = "zero"

    def __call__(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def tail_bound(self, radius, s):
        return 0.0

    def params(self):
        return {}


# ---------------------------------------------------------------------------
# catalog: derivative nonlinearities g


@dataclass(frozen=True)
class SignedSquare:
    """g(s) = s|s|; satisfies 0 <= s g(s) <= |s|^3."""
    name = "signed_square"

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return s * np.abs(s)

    def params(self):
        return {}


@dataclass(frozen=True)
class SignedPower:
    """g(s) = sign(s) |s|^(theta - 1)."""
    theta: float
    name = "signed_power"

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return np.sign(s) * np.abs(s) ** (self.theta - 1.0)

    def params(self):
        return {"theta": self.theta}


@dataclass(frozen=True)
class ZeroNonlinearity:
    name = "zero"

    def __call__(self, s):
        return np.zeros_like(np.asarray(s, dtype=float))

    def params(self):
        return {}


DIFFUSIONS = {"constant": ConstantDiffusion, "arctan": ArctanDiffusion}
WEIGHTS = {"gaussian": GaussianWeight, "exponential": ExponentialWeight,
           "zero": ZeroWeight}
NONLINEARITIES = {"signed_square": SignedSquare, "signed_power": SignedPower,
                  "zero": ZeroNonlinearity}


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProblemInstance:
    """Immutable problem data. ``lam`` is the parameter lambda."""
    q: float
    p: float
    theta: float
    lam: float
    gamma: float
    A: object
    a1: object
    g: object
    name: str = "custom"

    @property
    def s_exponent(self):
        """Lebesgue exponent 2/(2-q) of the weight a1."""
        return 2.0 / (2.0 - self.q)

    def dA(self, t):
        return self.A.derivative(t)

    def with_lambda(self, lam):
        return replace(self, lam=float(lam))

    def describe(self):
        def part(f):
            return {"name": getattr(f, "name", type(f).__name__),
                    **(f.params() if hasattr(f, "params") else {})}
        return {"name": self.name, "q": self.q, "p": self.p,
                "theta": self.theta, "lambda": self.lam, "gamma": self.gamma,
                "A": part(self.A), "a1": part(self.a1), "g": part(self.g)}


def make_instance(diffusion="arctan", weight="gaussian",
                  nonlinearity="signed_square", *, q=1.5, p=3.0, theta=3.0,
                  lam=0.01, gamma=0.5, weight_scale=1.0, name=None):
    """Build an instance from catalog names plus numeric parameters."""
    try:
        A = DIFFUSIONS[diffusion](gamma)
        a1 = (WEIGHTS[weight]() if weight == "zero"
              else WEIGHTS[weight](weight_scale))
        if nonlinearity == "signed_power":
            g = SignedPower(theta)
        else:
            g = NONLINEARITIES[nonlinearity]()
    except KeyError as exc:
        raise ValueError(f"unknown catalog entry {exc}") from None
    return ProblemInstance(q=q, p=p, theta=theta, lam=lam, gamma=gamma,
                           A=A, a1=a1, g=g,
                           name=name or f"{diffusion}/{weight}/{nonlinearity}")


# registered built-in instances; all satisfy the standing hypotheses
CATALOG = {
    "quadratic": dict(diffusion="arctan", weight="gaussian",
                      nonlinearity="signed_square", theta=3.0),
    "subcritical": dict(diffusion="arctan", weight="gaussian",
                        nonlinearity="signed_power", theta=2.5),
    "degenerate": dict(diffusion="arctan", weight="gaussian",
                       nonlinearity="zero", theta=3.0),
    "constant_diffusion": dict(diffusion="constant", weight="gaussian",
                               nonlinearity="signed_square", theta=3.0),
}


def catalog_instance(name, **overrides):
    try:
        spec = dict(CATALOG[name])
    except KeyError:
        raise ValueError(f"unknown catalog instance {name!r}") from None
    spec.update(overrides)
    spec.setdefault("name", name)
    return make_instance(**spec)


# ---------------------------------------------------------------------------
# hypothesis validation


@dataclass
class HypothesisCheck:
    name: str
    passed: bool
    worst_value: float = 0.0
    worst_at: float | None = None
    ties: int = 0
    detail: str = ""

    def to_dict(self):
        return {"name": self.name, "passed": self.passed,
                "worst_value": self.worst_value, "worst_at": self.worst_at,
                "ties": self.ties, "detail": self.detail}


@dataclass
class HypothesisReport:
    checks: list = field(default_factory=list)
    grid_radius: float = 0.0
    grid_points: int = 0

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {"passed": self.passed, "grid_radius": self.grid_radius,
                "grid_points": self.grid_points,
                "checks": [c.to_dict() for c in self.checks]}


def _evaluate(f, x, what):
    y = np.asarray(f(x), dtype=float)
    bad = ~np.isfinite(y)
    if bad.any():
        i = int(np.argmax(bad))
        raise InstanceEvaluationError(what, float(x[i]), float(y[i]))
    return y


def _inequality(name, lhs, rhs, x, ulps=4):
    """Check lhs >= rhs pointwise. Violations smaller than a few ulps of the
    operands are rounding, counted as ties."""
    slack = lhs - rhs
    rounding = ulps * np.spacing(np.maximum(np.abs(lhs), np.abs(rhs)))
    ties = int(np.count_nonzero(np.abs(slack) <= rounding))
    i = int(np.argmin(slack))
    passed = bool(np.all(slack >= -rounding))
    return HypothesisCheck(name, passed, float(slack[i]), float(x[i]), ties)


def _scalar(name, ok, detail):
    return HypothesisCheck(name, bool(ok), detail=detail)


def validate_hypotheses(inst, grid_radius=20.0, grid_points=10_000,
                        fd_step=1e-6, fd_rtol=1e-4):
    """Spot-check the standing hypotheses on a uniform grid of [-R, R].

    Hard inequalities are checked with zero tolerance; only floating-point
    rounding of the two sides (a few ulps) is absorbed and counted in
    ``ties``.
    """
    if grid_points < 2 or grid_radius <= 0:
        raise ValueError("need grid_points >= 2 and grid_radius > 0")
    t = np.linspace(-grid_radius, grid_radius, grid_points)
    checks = []
    q, p, th, gam = inst.q, inst.p, inst.theta, inst.gamma

    checks.append(_scalar("exponents", 1 < q < 2 < p < math.inf,
                          f"q={q}, p={p}"))
    a = _evaluate(inst.a1, t, "a1")
    a_mirror = _evaluate(inst.a1, -t, "a1")
    i = int(np.argmin(a))
    checks.append(HypothesisCheck("a1 positive", bool(a[i] > 0),
                                  float(a[i]), float(t[i]),
                                  int(np.count_nonzero(a == 0))))
    diff = np.abs(a - a_mirror)
    i = int(np.argmax(diff))
    checks.append(HypothesisCheck("a1 even", bool(diff[i] == 0.0),
                                  float(diff[i]), float(t[i]),
                                  int(np.count_nonzero(diff == 0.0))))

    checks.append(_scalar("gamma range", 0 < gam < 1, f"gamma={gam}"))
    A = _evaluate(inst.A, t, "A")
    checks.append(_inequality("A >= gamma", A, np.full_like(A, gam), t))
    steps = np.diff(A)
    i = int(np.argmin(steps))
    checks.append(HypothesisCheck("A nondecreasing", bool(steps[i] >= 0),
                                  float(steps[i]), float(t[i]),
                                  int(np.count_nonzero(steps == 0))))
    dA = _evaluate(inst.dA, t, "A'")
    fd = (_evaluate(inst.A, t + fd_step, "A")
          - _evaluate(inst.A, t - fd_step, "A")) / (2 * fd_step)
    # absolute floor covers the O(eps/h) rounding of the centered quotient
    err = np.abs(fd - dA) - (fd_rtol * np.abs(dA) + 1e-9)
    i = int(np.argmax(err))
    checks.append(HypothesisCheck("A' consistent", bool(err[i] <= 0),
                                  float(np.abs(fd - dA)[i]), float(t[i]),
                                  detail=f"centered FD h={fd_step}"))

    checks.append(_scalar("theta range", 2 < th <= 3, f"theta={th}"))
    s = t
    sg = s * _evaluate(inst.g, s, "g")
    checks.append(_inequality("s g(s) >= 0", sg, np.zeros_like(sg), s))
    env = np.abs(s) ** th
    checks.append(_inequality("s g(s) <= |s|^theta", env, sg, s))
    return HypothesisReport(checks, grid_radius, grid_points)


def lstar_norm_a1(inst, truncation_radius=12.0, tol=1e-10):
    """||a1||_{L^s(R)} with s = 2/(2-q): adaptive quadrature on [-R, R] plus
    the weight's declared tail bound (which must be below ``tol``)."""
    s = inst.s_exponent
    R = float(truncation_radius)
    tail = inst.a1.tail_bound(R, s)
    if tail > tol:
        raise TruncationInsufficient(
            f"truncation insufficient: tail bound {tail:.3e} > {tol:.1e} at R={R}")

    def integrand(t):
        return float(np.abs(inst.a1(t)) ** s)

    total = 0.0
    for lo, hi in ((-R, 0.0), (0.0, R)):
        val, _ = integrate.quad(integrand, lo, hi, epsabs=1e-14,
                                epsrel=1e-13, limit=200)
        total += val
    return total ** (1.0 / s)
