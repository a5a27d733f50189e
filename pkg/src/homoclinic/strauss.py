"""Strauss approximation of the derivative nonlinearity.

For continuous g with G(s) = int_0^s g, the approximant f_k is built from
difference quotients of G:

    s <= -k          -k [G(-k - 1/k) - G(-k)]
    -k < s <= -1/k   -k [G(s - 1/k) - G(s)]
    -1/k < s <= 0    k^2 s [G(-2/k) - G(-1/k)]
    0 < s <= 1/k     k^2 s [G(2/k) - G(1/k)]
    1/k < s <= k     k [G(s + 1/k) - G(s)]
    s > k            k [G(k + 1/k) - G(k)]

Each f_k is Lipschitz, satisfies s f_k(s) >= 0, and f_k -> g uniformly on
bounded sets.  Ties at branch joins go to the branch listed first above.

Differences of G are evaluated as integrals of g over the short interval
directly (no cancellation between two large values of G).
"""

from dataclasses import dataclass
from functools import cached_property, lru_cache
import warnings

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from .errors import AntiderivativeFailure

_GL_X, _GL_W = leggauss(12)
_INCREMENT_RTOL = 1e-13


def _quad(g, a, b):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(lambda t: float(g(t)), a, b,
                                    epsabs=1e-12, epsrel=1e-12, limit=200)
        except integrate.IntegrationWarning as exc:
            raise AntiderivativeFailure(
                f"antiderivative failure on [{a}, {b}]: {exc}") from None
    return val


def antiderivative(g, s):
    """G(s) = int_0^s g(t) dt by adaptive Gauss-Kronrod (abs tol 1e-12)."""
    s = float(s)
    if s == 0.0:
        return 0.0
    return _quad(g, 0.0, s)


def _gl(g, s, h):
    nodes = s[:, None] + (0.5 * h) * (_GL_X[None, :] + 1.0)
    return (0.5 * h) * (np.asarray(g(nodes), dtype=float) @ _GL_W)


def increment(g, s, h):
    """int_s^{s+h} g for an array of left endpoints ``s`` (h may be negative,
    giving minus the integral over [s+h, s]).

    Fixed 12-point Gauss-Legendre, checked against the two-half composite;
    points that disagree are redone by adaptive quadrature.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    whole = _gl(g, s, h)
    halves = _gl(g, s, 0.5 * h) + _gl(g, s + 0.5 * h, 0.5 * h)
    bad = np.abs(whole - halves) > _INCREMENT_RTOL * np.abs(halves)
    if bad.any():
        for i in np.flatnonzero(bad):
            halves[i] = _quad(g, s[i], s[i] + h)
    return halves


@dataclass(frozen=True)
class StraussApproximant:
    g: object
    k: float
    theta: float = 3.0

    def __post_init__(self):
        if not self.k >= 1:
            raise ValueError("Strauss index k must be >= 1")

    @cached_property
    def _constants(self):
        k, h, g = float(self.k), 1.0 / self.k, self.g
        # integrals of g over [-k-h, -k], [-2h, -h], [h, 2h], [k, k+h]
        left, neg = -increment(g, [-k, -h], -h)
        pos, right = increment(g, [h, k], h)
        return {
            "left": k * left,
            "slope_neg": -k * k * neg,
            "slope_pos": k * k * pos,
            "right": k * right,
        }

    @cached_property
    def C1(self):
        """Growth constant of the envelopes, sampled (see growth_constant)."""
        return growth_constant(self.g, self.theta)

    @cached_property
    def lipschitz(self):
        """Sampled Lipschitz estimate c(k) over the non-constant range."""
        return lipschitz_estimate(self, self.k + 1.0 / self.k + 1.0, 20001)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        scalar = s.ndim == 0
        s = np.atleast_1d(s)
        k, h = float(self.k), 1.0 / self.k
        c = self._constants
        out = np.empty_like(s)

        b1 = s <= -k
        b2 = (s > -k) & (s <= -h)
        b3 = (s > -h) & (s <= 0)
        b4 = (s > 0) & (s <= h)
        b5 = (s > h) & (s <= k)
        b6 = s > k
        out[b1] = c["left"]
        if b2.any():
            out[b2] = -k * increment(self.g, s[b2], -h)
        out[b3] = c["slope_neg"] * s[b3]
        out[b4] = c["slope_pos"] * s[b4]
        if b5.any():
            out[b5] = k * increment(self.g, s[b5], h)
        out[b6] = c["right"]
        return out[0] if scalar else out


def eval_fk(approx, s):
    return approx(s)


def uniform_error(approx, g, m, samples=10_001):
    """max |f_k - g| over a uniform grid of [-m, m]."""
    if m <= 0:
        raise ValueError("radius must be positive")
    s = np.linspace(-m, m, samples)
    return float(np.max(np.abs(approx(s) - np.asarray(g(s), dtype=float))))


def lipschitz_estimate(approx, radius, samples=10_001):
    """Largest sampled difference quotient of f_k on [-radius, radius]."""
    if samples < 2:
        raise ValueError("need at least two samples")
    s = np.linspace(-radius, radius, samples)
    f = approx(s)
    return float(np.max(np.abs(np.diff(f)) / np.diff(s)))


@lru_cache(maxsize=64)
def growth_constant(g, theta, ks=(1.0, 10.0, 100.0, 1000.0), samples=400):
    """C1 = max(1, sup s f_k(s)/|s|^theta on |s| >= 1/k, sup s f_k(s)/s^2 on
    |s| <= 1/k) over sampled s and the reference indices ``ks``.

    The sample set always contains the joins s = +-1/k, where the envelope
    ratio of a homogeneous g peaks.
    """
    ratio = 1.0
    for k in ks:
        f = StraussApproximant(g, k, theta)
        h = 1.0 / k
        outer = np.concatenate([np.geomspace(h, 10.0 * max(k, 1.0), samples),
                                [h, 1.0, k, k + h]])
        inner = np.concatenate([np.geomspace(1e-3 * h, h, samples), [h]])
        for sign in (1.0, -1.0):
            so, si = sign * outer, sign * inner
            ratio = max(ratio,
                        float(np.max(so * f(so) / np.abs(so) ** theta)),
                        float(np.max(si * f(si) / si ** 2)))
    return ratio
