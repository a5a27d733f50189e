"""Even cosine basis of H^1_0(-n, n) and the quadrature used for every
Galerkin integral.

The basis functions are

    e_l(t) = nu_l cos(omega_l t),  omega_l = (2l - 1) pi / (2n),
    nu_l = 1 / sqrt(n (1 + omega_l^2)),

which vanish at +-n, are even, and are orthonormal in the Hilbert norm
(||u||^2 + ||u'||^2)^(1/2).  That norm is used everywhere in the package, so
the H^1 norm of a synthesis equals the Euclidean norm of its coefficients.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import QuadratureOrderInsufficient

PANEL_NODES = 16
GRAM_TARGET = 1e-10
GRAM_LIMIT = 1e-8
MAX_DOUBLINGS = 6

_PANEL_X, _PANEL_W = leggauss(PANEL_NODES)


def composite_gauss_legendre(a, b, Q):
    """Nodes and weights of a composite 16-point Gauss-Legendre rule on [a, b]
    with ceil(Q/16) equal panels."""
    panels = max(1, math.ceil(Q / PANEL_NODES))
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + half * (_PANEL_X[None, :] + 1.0)).ravel()
    weights = (half * _PANEL_W[None, :]).ravel()
    return nodes, weights


def frequencies(n, M):
    return (2.0 * np.arange(1, M + 1) - 1.0) * np.pi / (2.0 * n)


def normalizers(n, omega):
    return 1.0 / np.sqrt(n * (1.0 + omega ** 2))


@dataclass(frozen=True, eq=False)
class EvenBasis:
    n: float
    M: int
    Q: int
    freq: np.ndarray
    nu: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    gram_deviation: float
    # basis values and derivatives at the quadrature nodes, shape (nodes, M)
    phi: np.ndarray = field(repr=False)
    dphi: np.ndarray = field(repr=False)

    def values(self, t):
        """e_l(t) for all l; shape (len(t), M).  Evaluated at |t| so that
        evenness is exact."""
        t = np.abs(np.atleast_1d(np.asarray(t, dtype=float)))
        return self.nu * np.cos(np.outer(t, self.freq))

    def derivatives(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        s = np.sign(t)[:, None]
        return -s * (self.nu * self.freq) * np.sin(np.outer(np.abs(t), self.freq))

    def second_derivatives(self, t):
        return -(self.freq ** 2) * self.values(t)

    def synthesize(self, xi, t):
        """Return (u(t), u'(t)) for coefficient vector ``xi``."""
        xi = _coeff_array(xi, self.M)
        return self.values(t) @ xi, self.derivatives(t) @ xi

    def second_derivative(self, xi, t):
        return self.second_derivatives(t) @ _coeff_array(xi, self.M)

    def integrate(self, f):
        """Quadrature of samples ``f`` taken at ``self.nodes``."""
        return self.weights @ f

    def gram(self):
        """H^1 Gram matrix assembled by quadrature."""
        w = self.weights[:, None]
        return self.phi.T @ (w * self.phi) + self.dphi.T @ (w * self.dphi)

    def h1_norm_by_quadrature(self, xi):
        xi = _coeff_array(xi, self.M)
        u, du = self.phi @ xi, self.dphi @ xi
        return math.sqrt(self.integrate(u * u + du * du))

    def refined(self, factor=2):
        """Same basis on a quadrature rule with ``factor`` times the nodes."""
        return _assemble(self.n, self.M, self.Q * factor)

    def project_from(self, other, xi_other):
        """H^1 projection onto this basis of the synthesis ``xi_other`` on
        ``other``, extended by zero outside [-other.n, other.n].

        The integrals are taken on the quadrature of ``other``; the extended
        function vanishes off its support, so nothing is lost.
        """
        if other.n > self.n:
            raise ValueError("source interval must fit inside the target one")
        xi_other = _coeff_array(xi_other, other.M)
        u, du = other.phi @ xi_other, other.dphi @ xi_other
        t, w = other.nodes, other.weights
        return self.values(t).T @ (w * u) + self.derivatives(t).T @ (w * du)


def _coeff_array(xi, M):
    xi = np.asarray(getattr(xi, "xi", xi), dtype=float)
    if xi.shape != (M,):
        raise ValueError(f"expected {M} coefficients, got shape {xi.shape}")
    return xi


def _assemble(n, M, Q):
    omega = frequencies(n, M)
    nu = normalizers(n, omega)
    nodes, weights = composite_gauss_legendre(-n, n, Q)
    arg = np.outer(np.abs(nodes), omega)
    phi = nu * np.cos(arg)
    dphi = -np.sign(nodes)[:, None] * (nu * omega) * np.sin(arg)
    w = weights[:, None]
    gram = phi.T @ (w * phi) + dphi.T @ (w * dphi)
    dev = float(np.max(np.abs(gram - np.eye(M))))
    return EvenBasis(n=float(n), M=int(M), Q=int(Q), freq=omega, nu=nu,
                     nodes=nodes, weights=weights, gram_deviation=dev,
                     phi=phi, dphi=dphi)


def build_basis(n, M, Q=None):
    """Build the M-term even basis on (-n, n).

    Q defaults to max(2M + 8, 64) and is doubled until the Gram matrix is the
    identity to 1e-10 (at most ``MAX_DOUBLINGS`` times).  A final deviation
    above 1e-8 raises QuadratureOrderInsufficient.
    """
    if not n > 0:
        raise ValueError("n must be positive")
    if M < 1:
        raise ValueError("M must be at least 1")
    if Q is None:
        Q = max(2 * M + 8, 64)
    elif Q < 2 * M + 8:
        raise ValueError(f"quadrature order {Q} below 2M + 8 = {2 * M + 8}")
    basis = _assemble(n, M, Q)
    for _ in range(MAX_DOUBLINGS):
        if basis.gram_deviation < GRAM_TARGET:
            break
        basis = _assemble(n, M, 2 * basis.Q)
    if basis.gram_deviation > GRAM_LIMIT:
        raise QuadratureOrderInsufficient(
            f"quadrature order insufficient: Gram deviation "
            f"{basis.gram_deviation:.3e} at Q={basis.Q} (n={n}, M={M})")
    return basis


@dataclass(frozen=True)
class GalerkinCoeffs:
    """Coefficient vector; ``norm_W12`` is the H^1 norm of the synthesis,
    which by orthonormality is the Euclidean length of ``xi``."""
    xi: np.ndarray
    norm_W12: float = field(init=False)

    def __post_init__(self):
        xi = np.array(self.xi, dtype=float)
        xi.setflags(write=False)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "norm_W12", float(np.linalg.norm(xi)))

    def __len__(self):
        return len(self.xi)


def project(xi, M):
    """Truncate (or zero-pad) a coefficient vector to length M."""
    xi = np.asarray(getattr(xi, "xi", xi), dtype=float)
    out = np.zeros(M)
    m = min(M, len(xi))
    out[:m] = xi[:m]
    return out


def symmetric_grid(n, per_unit=50):
    """Output grid on [-n, n] that is symmetric bit for bit (the negative half
    is the mirrored positive half)."""
    count = max(2, int(math.ceil(per_unit * n)))
    half = np.linspace(0.0, n, count + 1)
    return np.concatenate([-half[:0:-1], half])
