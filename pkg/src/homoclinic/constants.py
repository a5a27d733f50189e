"""Explicit constants behind the existence and nonexistence arguments.

Notation: C is the H^1 -> L^inf embedding constant, C1 the growth constant of
the Strauss envelopes, C2 = ||a1||_{L^s} with s = 2/(2-q).  The certified
ball radius is r = delta1/2 and Lambda* is the largest lambda for which the
sphere-sign estimate is positive.
"""

from dataclasses import asdict, dataclass
import math

import numpy as np

from .errors import CertificateError, ThresholdUndefined, WeightVanishes
from .galerkin import GalerkinSystem
from .problem import lstar_norm_a1
from .strauss import growth_constant


def embedding_constant():
    """C = 2^(-1/2): ||u||_inf^2 <= ||u||_2 ||u'||_2 <= ||u||_{H^1}^2 / 2."""
    return 1.0 / math.sqrt(2.0)


def delta1(gamma, C, C1, p, theta):
    first = (gamma / (4.0 * C ** (p - 2.0))) ** (1.0 / (p - 2.0))
    second = (gamma / (4.0 * C1 * max(C ** (theta - 2.0), C))) ** (
        1.0 / (theta - 2.0))
    return min(first, second)


def lambda_star(r, gamma, C2, delta1, q):
    if C2 == 0:
        # no lambda term: every lambda is admissible
        return math.inf
    return r * r * gamma / (2.0 * C2 * delta1 ** q)


def rho1(lam, r, gamma, C2, delta1, q):
    return gamma * r * r / 2.0 - lam * C2 * delta1 ** q


def k_star(rho1, C1, n, delta1, psi_norm=None):
    """Smallest integer k with rho1 > (C1 sqrt(2n) + ||psi||) delta1 / k."""
    if not rho1 > 0:
        raise CertificateError(
            f"lambda too large for certificate: rho1 = {rho1!r} <= 0")
    psi_norm = math.sqrt(2.0 * n) if psi_norm is None else psi_norm
    c = (C1 * math.sqrt(2.0 * n) + psi_norm) * delta1
    k = max(1, math.floor(c / rho1) + 1)
    # guard the float inversion with the defining inequality
    while k > 1 and rho1 > c / (k - 1):
        k -= 1
    while not rho1 > c / k:
        k += 1
    return k


def Z_k(x, gamma, lam, C2, q, p, theta, C, C1, n, k):
    """Lower bound of <F(xi), xi> at ||xi|| = x."""
    tail = (C1 * math.sqrt(2.0 * n) + math.sqrt(2.0 * n)) / k
    return (gamma * x * x - lam * C2 * x ** q - C ** (p - 2.0) * x ** p
            - C1 * max(C ** (theta - 2.0), C) * x ** theta - tail * x)


@dataclass
class CertificateReport:
    min_value: float
    witness: np.ndarray
    passed: bool
    radius: float
    samples: int
    lower_bound: float = math.nan

    def to_dict(self):
        return {"min_value": self.min_value, "passed": self.passed,
                "radius": self.radius, "samples": self.samples,
                "lower_bound": self.lower_bound,
                "witness": [float(v) for v in self.witness]}


def sphere_sign_certificate(inst, basis, approx, r, samples=200, seed=0,
                            system=None):
    """Sample <F(xi), xi> over random directions on the sphere ||xi|| = r.

    Passes iff every sample is strictly positive; the minimizing direction is
    returned as the witness either way.
    """
    system = system or GalerkinSystem(inst, basis, approx)
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((samples, basis.M))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    values = np.array([system.pairing(r * d) for d in dirs])
    i = int(np.argmin(values))
    return CertificateReport(min_value=float(values[i]), witness=r * dirs[i],
                             passed=bool(values[i] > 0), radius=r,
                             samples=samples)


def eigen_pair(n):
    """First Dirichlet eigenpair of -u'' on (-n, n)."""
    lam1 = math.pi ** 2 / (2.0 * n) ** 2
    w = math.pi / (2.0 * n)

    def phi1(t):
        return np.cos(w * np.asarray(t, dtype=float))

    return lam1, phi1


def weight_infimum(a1, R, points=4001):
    """min of a1 over a uniform grid of [-R, R] (endpoints included)."""
    t = np.linspace(-R, R, points)
    return float(np.min(np.asarray(a1(t), dtype=float)))


def tau_subsolution_scale(inst, n, a_tilde=None):
    """Largest tau with tau^(2-q) (1 + gamma lambda1) <= lam a~, where
    a~ = inf of a1 on [-n, n]."""
    a_tilde = weight_infimum(inst.a1, n) if a_tilde is None else a_tilde
    if not a_tilde > 0:
        raise WeightVanishes(
            f"weight vanishes on interval [-{n}, {n}]: inf a1 = {a_tilde!r}")
    lam1, _ = eigen_pair(n)
    return (inst.lam * a_tilde / (1.0 + inst.gamma * lam1)) ** (
        1.0 / (2.0 - inst.q))


def r_tilde(lam, r, C2, gamma, q):
    return min(r, math.sqrt(lam) * math.sqrt(2.0 * C2 * r ** q / gamma))


def Q_function(s, Lambda, q, p):
    """Q(s) = (Lambda s^(q-1) + s^(p-1)) / s."""
    s = np.asarray(s, dtype=float)
    return (Lambda * s ** (q - 1.0) + s ** (p - 1.0)) / s


def q_min_and_threshold(Lambda, q, p):
    """Minimizer m of Q on (0, inf) and the minimum value C_Lambda = Q(m)."""
    if not Lambda > 0:
        raise ValueError("Lambda must be positive")
    m = (Lambda * (2.0 - q) / (p - 2.0)) ** (1.0 / (p - q))
    return m, float(Q_function(m, Lambda, q, p))


def _C_of_lambda(lam, a_tilde_R, q, p):
    if lam <= 0:
        return 0.0
    return q_min_and_threshold(lam * a_tilde_R, q, p)[1]


@dataclass
class NonexistenceThreshold:
    lambda0: float
    rhs: float
    R: float
    r_tilde: float
    delta: float
    sigma1: float
    a_tilde_R: float
    Lambda: float


def nonexistence_threshold(inst, R, r_tilde, delta=0.5, rtol=1e-15,
                           details=False):
    """Smallest lambda0 with C_Lambda >= A(C r~)(sigma1 + delta) + 1, where
    Lambda = lambda0 inf_{(-R,R)} a1 and sigma1 = pi^2/(2R)^2.

    C_Lambda is increasing in lambda, so the threshold is found by bisection.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    a_R = weight_infimum(inst.a1, R)
    if not a_R > 0:
        raise ThresholdUndefined(
            f"threshold undefined: inf a1 on (-{R}, {R}) is {a_R!r}")
    sigma1 = math.pi ** 2 / (2.0 * R) ** 2
    A_val = float(inst.A(embedding_constant() * r_tilde))
    rhs = A_val * (sigma1 + delta) + 1.0
    q, p = inst.q, inst.p
    lo, hi = 0.0, 1.0
    while _C_of_lambda(hi, a_R, q, p) < rhs:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise ThresholdUndefined("threshold undefined: no finite lambda0")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _C_of_lambda(mid, a_R, q, p) >= rhs:
            hi = mid
        else:
            lo = mid
    if not details:
        return hi
    return NonexistenceThreshold(lambda0=hi, rhs=rhs, R=R, r_tilde=r_tilde,
                                 delta=delta, sigma1=sigma1, a_tilde_R=a_R,
                                 Lambda=hi * a_R)


def lipschitz_of_A(A, radius=1.0, samples=10_001):
    """Largest sampled difference quotient of A on [-radius, radius].  A
    sampled value can only under-estimate the true constant."""
    t = np.linspace(-radius, radius, samples)
    a = np.asarray(A(t), dtype=float)
    return float(np.max(np.abs(np.diff(a)) / np.diff(t)))


def lieberman_L(inst, r, C1, n, A_lip=None):
    """L = 2T with T just above the largest of
    Cr + lam sup_{[-n,n]} a1 (Cr)^(q-1) + (Cr)^(p-1) + 1, 2 C1, A(Cr), A~."""
    C = embedding_constant()
    cr = C * r
    a_sup = float(np.max(np.asarray(inst.a1(np.linspace(-n, n, 4001)))))
    A_lip = lipschitz_of_A(inst.A) if A_lip is None else A_lip
    T = max(cr + inst.lam * a_sup * cr ** (inst.q - 1.0)
            + cr ** (inst.p - 1.0) + 1.0,
            2.0 * C1, float(inst.A(cr)), A_lip)
    return 2.0 * math.nextafter(T, math.inf)


@dataclass
class ConstantsReport:
    C: float
    C1: float
    C2: float
    delta1: float
    r: float
    rho1: float
    Lambda_star: float
    k_star: object
    lambda1: float
    tau: float
    r_tilde: float
    m: float
    C_Lambda: float
    nonexistence_threshold_ok: bool
    # context the symbols above depend on
    lam: float
    n: float
    a_tilde: float
    R: float
    a_tilde_R: float
    sigma1: float
    delta: float
    Lambda: float
    lambda0: float
    A_tilde: float
    L: float

    def to_dict(self):
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d


def certified_radius(inst, C1=None, C2=None):
    """(C, C1, C2, delta1, r) for an instance, r = delta1/2."""
    C = embedding_constant()
    C1 = growth_constant(inst.g, inst.theta) if C1 is None else C1
    C2 = lstar_norm_a1(inst) if C2 is None else C2
    d1 = delta1(inst.gamma, C, C1, inst.p, inst.theta)
    return C, C1, C2, d1, 0.5 * d1


def constants_report(inst, n=5.0, R=1.0, delta=0.5, C1=None, C2=None):
    """Every constant for ``inst`` at half-width n and nonexistence radius R.

    ``k_star`` is None when lam >= Lambda* (no certified k exists).  The
    nonexistence threshold is evaluated with r~ = r, the largest admissible
    value (A is nondecreasing, so this is the conservative choice).
    """
    C, C1, C2, d1, r = certified_radius(inst, C1, C2)
    q, p = inst.q, inst.p
    lstar = lambda_star(r, inst.gamma, C2, d1, q)
    rho = rho1(inst.lam, r, inst.gamma, C2, d1, q)
    try:
        ks = k_star(rho, C1, n, d1)
    except CertificateError:
        ks = None
    lam1, _ = eigen_pair(n)
    a_tilde = weight_infimum(inst.a1, n)
    tau = tau_subsolution_scale(inst, n, a_tilde) if a_tilde > 0 else 0.0
    rt = r_tilde(inst.lam, r, C2, inst.gamma, q)
    thr = nonexistence_threshold(inst, R, r, delta, details=True)
    Lam = inst.lam * thr.a_tilde_R
    if Lam > 0:
        m, CL = q_min_and_threshold(Lam, q, p)
    else:
        m, CL = 0.0, 0.0
    A_lip = lipschitz_of_A(inst.A)
    return ConstantsReport(
        C=C, C1=C1, C2=C2, delta1=d1, r=r, rho1=rho, Lambda_star=lstar,
        k_star=ks, lambda1=lam1, tau=tau, r_tilde=rt, m=m, C_Lambda=CL,
        nonexistence_threshold_ok=bool(CL >= thr.rhs),
        lam=inst.lam, n=n, a_tilde=a_tilde, R=R, a_tilde_R=thr.a_tilde_R,
        sigma1=thr.sigma1, delta=delta, Lambda=Lam, lambda0=thr.lambda0,
        A_tilde=A_lip, L=lieberman_L(inst, r, C1, n, A_lip))
