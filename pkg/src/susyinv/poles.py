"""Scattering-matrix pole algebra.

A pole set {kappa_j} stands for S(k) poles at k = i kappa_j. The phase shift
is the arctangent sum delta(k) = -sum_j arctan(k / kappa_j).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .erf import ErfModel
from .errors import DegenerateDegreeError, RootFindingError

PROVENANCES = ("extracted-from-erf", "direct-fit", "manual")

STRICT_SUMRULE_TOL = 1e-8
PUBLISHED_SUMRULE_TOL = 1e-2


class ComplexPoleWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PoleSet:
    """Real pole parameters kappa_j (fm^-1) for partial wave l, sorted ascending.

    ``original`` keeps the order in which the values were supplied.
    """

    l: int
    kappas: tuple
    provenance: str = "manual"
    original: tuple = ()

    def __post_init__(self):
        vals = tuple(float(x) for x in self.kappas)
        if not all(math.isfinite(x) for x in vals):
            raise ValueError("pole values must be finite")
        if self.l < 0:
            raise ValueError("l must be non-negative")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "original", tuple(self.original) or vals)
        object.__setattr__(self, "kappas", tuple(sorted(vals)))

    def __len__(self):
        return len(self.kappas)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.kappas)

    @property
    def n_plus(self) -> int:
        return sum(1 for x in self.kappas if x > 0)

    @property
    def n_minus(self) -> int:
        return sum(1 for x in self.kappas if x < 0)

    def high_energy_limit(self) -> float:
        """delta(k -> infinity) = -(pi/2)(n+ - n-)."""
        return -0.5 * math.pi * (self.n_plus - self.n_minus)


@dataclass
class PoleExtractionReport:
    roots: np.ndarray
    real_poles: PoleSet
    complex_poles: np.ndarray
    residuals: np.ndarray
    sum_rule_residuals: tuple
    degree: int
    symmetric: bool = True

    @property
    def has_complex(self) -> bool:
        return self.complex_poles.size > 0

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "real_poles": list(self.real_poles.kappas),
            "complex_poles": [[z.real, z.imag] for z in self.complex_poles],
            "max_residual": float(np.max(self.residuals)) if self.residuals.size else 0.0,
            "sum_rule_residuals": list(self.sum_rule_residuals),
            "symmetric": self.symmetric,
        }


@dataclass
class PoleValidation:
    valid: bool
    problems: list
    n_plus: int
    n_minus: int
    high_energy_limit: float
    sum_rule_residuals: tuple

    def to_dict(self) -> dict:
        return dict(self.__dict__, sum_rule_residuals=list(self.sum_rule_residuals))


def pole_polynomial(model: ErfModel) -> np.ndarray:
    """Ascending coefficients in kappa of P(-kappa^2) - (-1)^(l+1) kappa^(2l+1) Q(-kappa^2)."""
    l = model.l
    M, N = model.order
    n = max(2 * M, 2 * N + 2 * l + 1)
    c = np.zeros(n + 1)
    for m, pm in enumerate(model.p):
        c[2 * m] += (-1) ** m * pm
    sign = -((-1) ** (l + 1))
    for m, qm in enumerate(model.q):
        c[2 * m + 2 * l + 1] += sign * (-1) ** m * qm
    if c[-1] == 0:
        nz = np.nonzero(c)[0]
        reduced = int(nz[-1]) if nz.size else 0
        raise DegenerateDegreeError(
            f"leading coefficient vanishes; degree drops from {n} to {reduced}", reduced
        )
    return c


def _polish(c, z, iters=3):
    """A few Newton steps on the complex polynomial, keeping only improvements."""
    dc = np.polynomial.polynomial.polyder(c)
    pv = np.polynomial.polynomial.polyval
    f = pv(z, c)
    for _ in range(iters):
        d = pv(z, dc)
        if d == 0:
            break
        z_new = z - f / d
        f_new = pv(z_new, c)
        if abs(f_new) >= abs(f):
            break
        z, f = z_new, f_new
    return z


def polynomial_roots(c) -> np.ndarray:
    """All roots of an ascending-coefficient polynomial via its companion matrix."""
    c = np.asarray(c, dtype=float)
    n = c.size - 1
    if n < 1:
        return np.zeros(0, dtype=complex)
    comp = np.zeros((n, n))
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = -c[:-1] / c[-1]
    try:
        z = np.linalg.eigvals(comp)
    except np.linalg.LinAlgError as exc:
        raise RootFindingError(f"eigenvalue solver failed for polynomial {c.tolist()}") from exc
    return np.array([_polish(c, complex(zi)) for zi in z])


def extract_poles(model: ErfModel, residual_tol: float = 1e-8) -> PoleExtractionReport:
    """Roots of the pole polynomial, split into imaginary-axis and complex poles."""
    c = pole_polynomial(model)
    roots = polynomial_roots(c)
    lead = abs(c[-1])
    resid = np.abs(np.polynomial.polynomial.polyval(roots, c)) / lead
    # a residual scaled by the size of the terms guards large roots
    scale = np.polynomial.polynomial.polyval(np.abs(roots), np.abs(c)) / lead
    if np.any(resid > residual_tol * np.maximum(1.0, scale)):
        raise RootFindingError(f"root residual too large for polynomial {c.tolist()}")
    is_real = np.abs(roots.imag) < 1e-8 * (1.0 + np.abs(roots.real))
    real = np.sort(roots.real[is_real])
    cplx = roots[~is_real]
    symmetric = all(np.min(np.abs(cplx - np.conj(z))) < 1e-8 * (1 + abs(z)) for z in cplx)
    ps = PoleSet(model.l, tuple(real), provenance="extracted-from-erf")
    sr = tuple(sum_rule_residuals(ps)) if model.l > 0 and np.all(real != 0) else ()
    if cplx.size:
        warnings.warn(
            f"{cplx.size} complex poles found; they cannot be used to build a potential",
            ComplexPoleWarning,
            stacklevel=2,
        )
    return PoleExtractionReport(
        roots=roots,
        real_poles=ps,
        complex_poles=cplx,
        residuals=resid,
        sum_rule_residuals=sr,
        degree=c.size - 1,
        symmetric=symmetric,
    )


def sum_rule_residuals(poles: PoleSet) -> list:
    """sum_j kappa_j^-alpha for alpha = 1, 3, ..., 2l-1 (empty for l = 0)."""
    if any(x == 0 for x in poles.kappas):
        raise ValueError("pole at kappa = 0")
    return [math.fsum(x ** -alpha for x in poles.kappas) for alpha in range(1, 2 * poles.l, 2)]


def delta_from_poles(poles: PoleSet, k_grid) -> np.ndarray:
    """delta(k) = -sum_j arctan(k / kappa_j); continuous, zero at k = 0."""
    k = np.asarray(k_grid, dtype=float)
    if np.any(k < 0):
        raise ValueError("k must be non-negative")
    kap = poles.array
    out = -np.arctan2(k[..., None] * np.sign(kap), np.abs(kap)).sum(axis=-1)
    return out


def validate_pole_set(poles: PoleSet, l: int | None = None, tol: float = STRICT_SUMRULE_TOL) -> PoleValidation:
    l = poles.l if l is None else l
    problems = []
    residuals: tuple = ()
    if not poles.kappas:
        problems.append("empty pole set")
    if any(x == 0 for x in poles.kappas):
        problems.append("zero pole")
    elif l > 0:
        residuals = tuple(sum_rule_residuals(PoleSet(l, poles.kappas)))
        for alpha, r in zip(range(1, 2 * l, 2), residuals):
            if abs(r) > tol:
                problems.append(f"sum rule alpha={alpha} violated: {r:.3g}")
    if len(set(poles.kappas)) != len(poles.kappas):
        problems.append("repeated pole")
    return PoleValidation(
        valid=not problems,
        problems=problems,
        n_plus=poles.n_plus,
        n_minus=poles.n_minus,
        high_energy_limit=poles.high_energy_limit(),
        sum_rule_residuals=residuals,
    )


def solve_sum_rules(free, l: int, guess=None, tol=1e-13, max_iter=100) -> PoleSet:
    """Complete `free` poles with l more so that every sum rule holds.

    Newton iteration on the l unknown poles; used to manufacture exactly
    admissible pole sets for l > 0.
    """
    free = np.asarray(free, dtype=float)
    alphas = np.arange(1, 2 * l, 2)
    target = -np.array([np.sum(free ** -a) for a in alphas])
    x = np.array(guess, dtype=float) if guess is not None else -np.linspace(1.0, 2.0, l) * np.sign(free.sum() or 1)
    for _ in range(max_iter):
        g = np.array([np.sum(x ** -a) for a in alphas]) - target
        if np.max(np.abs(g)) < tol:
            break
        J = np.array([-a * x ** (-a - 1.0) for a in alphas])
        x = x - np.linalg.solve(J, g)
    else:
        raise RootFindingError("sum-rule completion did not converge")
    return PoleSet(l, tuple(np.concatenate([free, x])), provenance="manual")
