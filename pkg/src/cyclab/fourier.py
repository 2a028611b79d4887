"""Two-sided Fourier coefficient sequences on the circle and their weighted norms.

A sequence with finite support represents the trigonometric polynomial
``S(zeta) = sum_n c_n zeta^n`` on the unit circle.  The weighted norm of
exponent ``p`` and weight ``beta`` is

    ||S||^p = sum_n |c_n|^p (1 + |n|)^(p*beta)

which is an exact finite sum over the stored support.  Coefficients follow
the normalized measure convention: the n-th coefficient of a function f is
the mean of f(zeta) zeta^(-n) over the circle.  Geometric integrals elsewhere
in this package use the unnormalized arc-length measure; each routine states
which convention it follows.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np

# Relative drop tolerance for stored amplitudes.  Keeps supports finite after
# grid transforms without touching anything at the 1e-10 assertion level.
DROP_REL_TOL = 1e-15


@dataclass(frozen=True)
class SpaceIndex:
    """Exponent pair (p, beta) selecting a weighted coefficient space.

    ``p`` is the summability exponent, in [1, inf); ``beta >= 0`` is the
    weight exponent.  The conjugate exponent ``q = p/(p-1)`` (infinite at
    p = 1) is derived.  Negative weights never enter a SpaceIndex; dual-side
    norm evaluations pass an explicit negative beta to :func:`norm_ap_beta`
    instead.
    """

    p: float
    beta: float = 0.0

    def __post_init__(self):
        if not (self.p >= 1.0):
            raise ValueError("exponent p must satisfy p >= 1, got %r" % (self.p,))
        if not (self.beta >= 0.0):
            raise ValueError("weight beta must be >= 0, got %r" % (self.beta,))

    @property
    def q(self):
        """Conjugate exponent p/(p-1); math.inf when p == 1."""
        if self.p == 1.0:
            return math.inf
        return self.p / (self.p - 1.0)


@dataclass(frozen=True)
class PowerLogSequence:
    """Witness amplitude profile u_n = (1+|n|)^(-a) * log(2+|n|)^(-b)."""

    a: float
    b: float

    def amplitude(self, n):
        n = abs(n)
        return (1.0 + n) ** (-self.a) * math.log(2.0 + n) ** (-self.b)


class FourierSeries:
    """Finitely supported map from integer frequency to complex amplitude.

    Immutable.  On construction, amplitudes whose modulus does not exceed
    ``drop_tol`` times the largest stored modulus are removed, so exact
    zeros never survive and grid-transform noise stays out of the support.
    """

    __slots__ = ("_coeffs", "_degree")

    def __init__(self, coeffs=None, drop_tol=DROP_REL_TOL):
        cleaned = {}
        items = dict(coeffs) if coeffs else {}
        if items:
            peak = max(abs(c) for c in items.values())
            cutoff = drop_tol * peak
            for n, c in items.items():
                c = complex(c)
                if abs(c) > cutoff:
                    cleaned[int(n)] = c
        object.__setattr__(self, "_coeffs", MappingProxyType(cleaned))
        object.__setattr__(self, "_degree", max((abs(n) for n in cleaned), default=0))

    def __setattr__(self, name, value):
        raise AttributeError("FourierSeries is immutable")

    @property
    def coeffs(self):
        """Read-only frequency -> amplitude mapping."""
        return self._coeffs

    @property
    def degree(self):
        """Largest |n| in the support (0 for the zero series)."""
        return self._degree

    def coeff(self, n):
        return self._coeffs.get(int(n), 0j)

    def support(self):
        return sorted(self._coeffs)

    def __len__(self):
        return len(self._coeffs)

    def __eq__(self, other):
        if not isinstance(other, FourierSeries):
            return NotImplemented
        return dict(self._coeffs) == dict(other._coeffs)

    def __hash__(self):
        return hash(frozenset(self._coeffs.items()))

    def __repr__(self):
        return "FourierSeries(<%d terms, degree %d>)" % (len(self._coeffs), self._degree)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = _as_series(other)
        if other is None:
            return NotImplemented
        out = dict(self._coeffs)
        for n, c in other._coeffs.items():
            out[n] = out.get(n, 0j) + c
        return FourierSeries(out)

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        other = _as_series(other)
        if other is None:
            return NotImplemented
        out = dict(self._coeffs)
        for n, c in other._coeffs.items():
            out[n] = out.get(n, 0j) - c
        return FourierSeries(out)

    def __rsub__(self, other):
        other = _as_series(other)
        if other is None:
            return NotImplemented
        return other.__sub__(self)

    def __neg__(self):
        return FourierSeries({n: -c for n, c in self._coeffs.items()}, drop_tol=0.0)

    def __mul__(self, scalar):
        if isinstance(scalar, FourierSeries):
            return product(self, scalar)
        scalar = complex(scalar)
        return FourierSeries({n: scalar * c for n, c in self._coeffs.items()})

    __rmul__ = __mul__

    # -- structure ----------------------------------------------------------

    def truncate(self, max_degree):
        """Restrict the support to |n| <= max_degree."""
        max_degree = int(max_degree)
        return FourierSeries(
            {n: c for n, c in self._coeffs.items() if abs(n) <= max_degree},
            drop_tol=0.0,
        )

    def restrict(self, frequencies):
        """Restrict the support to the given iterable of frequencies."""
        keep = set(int(n) for n in frequencies)
        return FourierSeries(
            {n: c for n, c in self._coeffs.items() if n in keep}, drop_tol=0.0
        )

    def dense(self, n_min, n_max):
        """Materialize the slab [n_min, n_max] as a complex vector.

        Index i of the result holds the amplitude at frequency n_min + i.
        """
        n_min, n_max = int(n_min), int(n_max)
        if n_max < n_min:
            raise ValueError("empty slab [%d, %d]" % (n_min, n_max))
        out = np.zeros(n_max - n_min + 1, dtype=complex)
        for n, c in self._coeffs.items():
            if n_min <= n <= n_max:
                out[n - n_min] = c
        return out

    @classmethod
    def from_dense(cls, values, n_min, drop_tol=DROP_REL_TOL):
        """Inverse of :meth:`dense`: index i maps to frequency n_min + i."""
        values = np.asarray(values, dtype=complex)
        return cls({int(n_min) + i: v for i, v in enumerate(values)}, drop_tol=drop_tol)

    # -- serialization ------------------------------------------------------

    def to_json_obj(self):
        pairs = [[n, self._coeffs[n].real, self._coeffs[n].imag] for n in sorted(self._coeffs)]
        return {"coeffs": pairs}

    def to_json(self):
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json(cls, data):
        if isinstance(data, (str, bytes)):
            data = json.loads(data)
        return cls({int(n): complex(re, im) for n, re, im in data["coeffs"]})


def _as_series(x):
    if isinstance(x, FourierSeries):
        return x
    if isinstance(x, (int, float, complex)):
        return FourierSeries({0: complex(x)})
    return None


def _space_params(space, beta=None):
    """Normalize (SpaceIndex | p, beta) arguments to a (p, beta) pair.

    An explicit beta always wins; it may be negative (dual-side norms).
    """
    if isinstance(space, SpaceIndex):
        p = space.p
        b = space.beta if beta is None else float(beta)
    else:
        p = float(space)
        b = 0.0 if beta is None else float(beta)
    if p < 1.0:
        raise ValueError("exponent p must satisfy p >= 1, got %r" % (p,))
    return p, b


def circle_grid(G):
    """Angles 2*pi*j/G of the G-th roots of unity, j = 0..G-1."""
    return 2.0 * np.pi * np.arange(int(G)) / int(G)


def series_from_samples(samples, max_degree):
    """Coefficients of a band-limited function from uniform circle samples.

    Computes the mean of samples * zeta^(-n) over the grid (the normalized
    measure convention) for |n| <= max_degree.  The grid size must be a power
    of two and large enough that the window does not wrap: 2*max_degree + 1
    must not exceed the grid size.
    """
    samples = np.asarray(samples, dtype=complex)
    if samples.ndim != 1:
        raise ValueError("samples must be a one-dimensional grid")
    G = samples.size
    if G <= 0 or (G & (G - 1)) != 0:
        raise ValueError("grid size must be a power of two, got %d" % G)
    max_degree = int(max_degree)
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    if 2 * max_degree + 1 > G:
        raise ValueError(
            "max_degree %d needs a grid of at least %d points, got %d"
            % (max_degree, 2 * max_degree + 1, G)
        )
    spectrum = np.fft.fft(samples) / G
    coeffs = {}
    for n in range(-max_degree, max_degree + 1):
        coeffs[n] = spectrum[n % G]
    return FourierSeries(coeffs)


def eval_on_grid(f, G):
    """Values of f at the G-th roots of unity.

    G must be at least 2*degree(f) + 1 so no pair of stored frequencies
    aliases to the same grid bin.
    """
    G = int(G)
    if G < 2 * f.degree + 1:
        raise ValueError(
            "grid of size %d aliases a degree-%d series (need >= %d)"
            % (G, f.degree, 2 * f.degree + 1)
        )
    spectrum = np.zeros(G, dtype=complex)
    for n, c in f.coeffs.items():
        spectrum[n % G] = c
    return np.fft.ifft(spectrum) * G


def norm_ap_beta(f, space, beta=None):
    """Weighted coefficient norm (sum |c_n|^p (1+|n|)^(p*beta))^(1/p).

    ``space`` is a SpaceIndex or a bare exponent p; an explicit ``beta``
    overrides and may be negative for dual-side evaluations.  Exact finite
    sum over the support.
    """
    p, b = _space_params(space, beta)
    if not f.coeffs:
        return 0.0
    ns = np.fromiter(f.coeffs.keys(), dtype=float, count=len(f.coeffs))
    cs = np.fromiter(f.coeffs.values(), dtype=complex, count=len(f.coeffs))
    terms = np.abs(cs) ** p * (1.0 + np.abs(ns)) ** (p * b)
    return float(np.sum(terms) ** (1.0 / p))


def product(f, g):
    """Coefficient convolution of two finitely supported sequences.

    Exact direct convolution on dense slabs; the degree of the product is at
    most the sum of the degrees.
    """
    if not f.coeffs or not g.coeffs:
        return FourierSeries()
    nf = f.support()
    ng = g.support()
    a = f.dense(nf[0], nf[-1])
    b = g.dense(ng[0], ng[-1])
    conv = np.convolve(a, b)
    return FourierSeries.from_dense(conv, nf[0] + ng[0])


def dual_pairing(S, T):
    """The pairing sum_n S_hat(n) * T_hat(-n) (exact finite sum)."""
    if len(S.coeffs) > len(T.coeffs):
        return complex(sum(c * S.coeff(-n) for n, c in T.coeffs.items()))
    return complex(sum(c * T.coeff(-n) for n, c in S.coeffs.items()))


def inclusion_holds(r, beta, s, gamma):
    """Whether the (r, beta) space embeds in the (s, gamma) space.

    For r <= s the embedding holds exactly when gamma <= beta; for r > s it
    needs the strict weight gap beta - gamma > 1/s - 1/r.
    """
    r, s = float(r), float(s)
    if r < 1.0 or s < 1.0:
        raise ValueError("exponents must be >= 1")
    if r <= s:
        return float(gamma) <= float(beta)
    return float(beta) - float(gamma) > 1.0 / s - 1.0 / r


def powerlog_member(u, space, beta=None, _edge_tol=1e-12):
    """Whether the power-log profile u lies in the (p, beta) space.

    Decides convergence of sum (1+|n|)^(p*(beta-a)) log(2+|n|)^(-p*b):
    true when p*(a-beta) > 1, and on the critical line p*(a-beta) = 1
    exactly when p*b > 1.
    """
    p, weight = _space_params(space, beta)
    t = p * (u.a - weight)
    if abs(t - 1.0) <= _edge_tol:
        return p * u.b > 1.0
    return t > 1.0


def grid_to_json_obj(values):
    """Serialize a complex grid as a list of [re, im] pairs."""
    values = np.asarray(values, dtype=complex)
    return [[float(v.real), float(v.imag)] for v in values]


def grid_from_json_obj(data):
    return np.array([complex(re, im) for re, im in data], dtype=complex)
