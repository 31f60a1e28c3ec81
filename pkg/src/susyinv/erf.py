"""Effective-range-function models and conversions between K, delta and S.

K(k^2) = k^(2l+1) cot(delta) is kept as a rational function P(k^2)/Q(k^2)
with Q(0) = 1; a Taylor expansion is the case deg Q = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    DegeneratePoleError,
    DomainError,
    EvaluationError,
    IllDefinedERFError,
    InfiniteScatteringLengthError,
    InsufficientOrderError,
    PoleOfKError,
    RealAxisPoleError,
    UnwrapError,
)
from .kinematics import DEFAULT_CONSTANTS, PhysicalConstants, k_from_elab


@dataclass(frozen=True)
class PhaseShiftDataset:
    """Phase shifts of one partial wave. Angles are stored in radians."""

    l: int
    e_lab: np.ndarray
    delta: np.ndarray
    sigma: np.ndarray | None = None
    comments: tuple = ()

    def __post_init__(self):
        e = np.asarray(self.e_lab, dtype=float)
        d = np.asarray(self.delta, dtype=float)
        object.__setattr__(self, "e_lab", e)
        object.__setattr__(self, "delta", d)
        if self.sigma is not None:
            s = np.asarray(self.sigma, dtype=float)
            if s.shape != e.shape or np.any(s <= 0):
                raise DomainError("sigma must be positive and match E_lab")
            object.__setattr__(self, "sigma", s)
        if self.l < 0:
            raise DomainError("l must be non-negative")
        if e.ndim != 1 or e.shape != d.shape or e.size == 0:
            raise DomainError("E_lab and delta must be equal-length 1-D sequences")
        if np.any(e <= 0):
            raise DomainError("E_lab must be strictly positive")
        if np.any(np.diff(e) <= 0):
            raise DomainError("E_lab must be strictly increasing")

    def k(self, c: PhysicalConstants = DEFAULT_CONSTANTS) -> np.ndarray:
        return k_from_elab(self.e_lab, c)

    def __len__(self):
        return self.e_lab.size


@dataclass(frozen=True)
class ErfModel:
    """K(k^2) = P(k^2) / Q(k^2), coefficients in ascending powers of k^2."""

    l: int
    p: tuple
    q: tuple = (1.0,)

    def __post_init__(self):
        p = tuple(float(c) for c in self.p)
        q = tuple(float(c) for c in self.q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        if self.l < 0:
            raise DomainError("l must be non-negative")
        if not p or not q:
            raise DomainError("empty coefficient list")
        if q[0] != 1.0:
            raise DomainError("denominator must be normalised to q_0 = 1")
        if not all(math.isfinite(c) for c in p + q):
            raise DomainError("coefficients must be finite")

    @classmethod
    def taylor(cls, p, l=0):
        return cls(l=l, p=tuple(p), q=(1.0,))

    @property
    def kind(self) -> str:
        return "taylor" if len(self.q) == 1 else "pade"

    @property
    def order(self) -> tuple[int, int]:
        return len(self.p) - 1, len(self.q) - 1

    def numerator(self, x):
        return np.polynomial.polynomial.polyval(x, self.p)

    def denominator(self, x):
        return np.polynomial.polynomial.polyval(x, self.q)

    def __call__(self, x):
        """K evaluated at k^2 = x."""
        return self.numerator(x) / self.denominator(x)

    def to_dict(self) -> dict:
        return {"l": self.l, "kind": self.kind, "p": list(self.p), "q": list(self.q)}

    @classmethod
    def from_dict(cls, d):
        return cls(l=int(d["l"]), p=tuple(d["p"]), q=tuple(d.get("q", (1.0,))))


@dataclass(frozen=True)
class EreParameters:
    """Scattering length, effective range and shape parameter."""

    a: float
    r: float
    P: float
    shape_defined: bool = True


def K_from_delta(k, delta, l: int):
    """k^(2l+1) cot(delta)."""
    k = np.asarray(k, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if np.any(k <= 0):
        raise DomainError("k must be positive")
    s = np.sin(delta)
    if np.any(np.abs(s) < 1e-14):
        raise PoleOfKError("delta is a multiple of pi; K diverges")
    out = k ** (2 * l + 1) * np.cos(delta) / s
    return float(out) if out.ndim == 0 else out


def unwrap_phase(principal, k=None):
    """Add multiples of pi so consecutive values differ by less than pi/2."""
    d = np.array(principal, dtype=float)
    for i in range(1, d.size):
        d[i] += math.pi * np.round((d[i - 1] - d[i]) / math.pi)
        if abs(d[i] - d[i - 1]) >= 0.5 * math.pi:
            where = "" if k is None else f" near k = {k[i]:.6g}"
            raise UnwrapError(f"phase jump of {d[i] - d[i - 1]:.3f} rad{where}; refine the grid")
    return d


def _principal(num, den):
    """arctan(num/den) folded into (-pi/2, pi/2]."""
    t = np.arctan2(num, den)
    return t - math.pi * np.round(t / math.pi)


def delta_from_model(model: ErfModel, k_grid) -> np.ndarray:
    """Continuous phase shift of `model` along an increasing grid of k > 0.

    The first point is taken on the principal branch, which is the branch
    connected to delta(0) = 0 provided the grid starts close enough to
    threshold.
    """
    k = np.asarray(k_grid, dtype=float)
    if k.ndim != 1 or np.any(k <= 0) or np.any(np.diff(k) <= 0):
        raise DomainError("k grid must be positive and strictly increasing")
    x = k * k
    P = model.numerator(x)
    Q = model.denominator(x)
    bad = ~(np.isfinite(P) & np.isfinite(Q))
    if np.any(bad):
        raise EvaluationError(f"non-finite K at k = {k[bad][0]}")
    kp = k ** (2 * model.l + 1)
    return unwrap_phase(_principal(kp * Q, P), k)


def s_matrix_from_model(model: ErfModel, k):
    """S = (K + i k^(2l+1)) / (K - i k^(2l+1)), computed without dividing by Q."""
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0):
        raise DomainError("k must be positive")
    x = k * k
    P = model.numerator(x)
    Qk = model.denominator(x) * k ** (2 * model.l + 1)
    den = P - 1j * Qk
    if np.any(den == 0):
        raise RealAxisPoleError("S-matrix pole on the real k axis")
    s = (P + 1j * Qk) / den
    return complex(s) if s.ndim == 0 else s


def ere_parameters(model: ErfModel) -> EreParameters:
    """a = -1/p0, r = 2 p1, P = -p2 / r^3 from a Taylor model."""
    if model.kind != "taylor":
        raise InsufficientOrderError("shape parameters need a Taylor model")
    if len(model.p) < 3:
        raise InsufficientOrderError("Taylor model needs at least three terms")
    p0, p1, p2 = model.p[:3]
    if p0 == 0:
        raise InfiniteScatteringLengthError("p_0 = 0: infinite scattering length")
    r = 2.0 * p1
    if r == 0:
        return EreParameters(a=-1.0 / p0, r=0.0, P=0.0, shape_defined=False)
    return EreParameters(a=-1.0 / p0, r=r, P=-p2 / r**3)


def taylor_from_ere(a: float, r: float, P: float, l: int = 0) -> ErfModel:
    """Three-term Taylor model from (a, r, P)."""
    if a == 0:
        raise DomainError("scattering length must be non-zero")
    return ErfModel.taylor((-1.0 / a, 0.5 * r, -P * r**3), l=l)


def _elementary_symmetric(values) -> list:
    """Exact e_0..e_n of the given floats (e[m] is the degree-m polynomial)."""
    e = [Fraction(1)] + [Fraction(0)] * len(values)
    for v in values:
        fv = Fraction(v)
        for m in range(len(e) - 1, 0, -1):
            e[m] += fv * e[m - 1]
    return e


def erf_from_poles(poles, l: int | None = None, tol_sumrule: float = 1e-8) -> ErfModel:
    """Rational K whose arctangent phase sum has the given poles.

    With A = prod(kappa - ik), B = prod(kappa + ik) we have S = A/B and
    K = -k^(2l) E(k^2) / O(k^2) where E and O collect the even and odd parts
    of B in ik. The symmetric polynomials are formed exactly, so the only
    rounding happens in the final conversion to floats.
    """
    from .poles import sum_rule_residuals

    kappas = tuple(float(x) for x in poles.kappas)
    l = poles.l if l is None else l
    if any(x == 0 for x in kappas):
        raise DegeneratePoleError("pole at kappa = 0")
    if not kappas:
        raise DegeneratePoleError("empty pole set")
    n = len(kappas)
    if l > 0:
        res = sum_rule_residuals(poles)
        worst = max(abs(x) for x in res)
        if worst > tol_sumrule:
            raise IllDefinedERFError(
                f"sum rules violated (max residual {worst:.3g} > {tol_sumrule:.3g})"
            )
    e = _elementary_symmetric(kappas)
    even = [(-1) ** j * e[n - 2 * j] for j in range(n // 2 + 1)]
    odd = [(-1) ** j * e[n - 2 * j - 1] for j in range((n - 1) // 2 + 1)]
    # the low-order odd coefficients are what the sum rules force to zero
    odd = odd[l:]
    while odd and odd[-1] == 0:
        odd.pop()
    if not odd or odd[0] == 0:
        raise DegeneratePoleError("phase shift vanishes identically for this pole set")
    while len(even) > 1 and even[-1] == 0:
        even.pop()
    lead = odd[0]
    p = tuple(float(-c / lead) for c in even)
    q = tuple(float(c / lead) for c in odd)
    return ErfModel(l=l, p=p, q=q)
