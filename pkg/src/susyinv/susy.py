"""Potentials from pole sets through chains of supersymmetric transformations.

The final potential of a chain of n transformations is

    V(r) = l(l+1)/r^2 - 2 d^2/dr^2 ln W[u_0, ..., u_{n-1}](r)

where u_j solves -u'' + l(l+1)/r^2 u = -kappa_j^2 u. Every derivative row of
the Wronskian is reduced to a combination of u and u' through the radial
equation, columns are divided by their dominant exponential e^(kappa_j r),
and (ln W)' and (ln W)'' are obtained from row-replacement determinant
ratios, so no determinant is ever differentiated numerically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np

from .errors import (
    DegeneratePoleError,
    DomainError,
    InadmissibleShiftError,
    NonMonotoneTailError,
    NumericError,
    UnsupportedPoleError,
    UnsupportedSingularityError,
    WronskianNodeError,
)
from .poles import PoleSet

R_MIN_EVAL = 1e-4
# below this radius the leading powers of the u_j nearly cancel in W and the
# determinant ratios are evaluated in extended precision
R_HIGH_PRECISION = 0.02
HP_DIGITS = 60
# equilibrated condition number of the Wronskian matrix above which a point is
# recomputed in extended precision (double-precision error ~ 1e-16 * 100 * cond)
COND_LIMIT = 1e5


@dataclass(frozen=True)
class FactorizationSolution:
    """Solution of the free centrifugal equation at energy -kappa^2.

    kappa > 0 gives the left-regular solution (vanishing at the origin,
    growing at infinity); kappa < 0 the right-regular one (singular at the
    origin, decaying at infinity).
    """

    kappa: float
    l: int = 0

    def __post_init__(self):
        if not (isinstance(self.kappa, (int, float, np.floating)) and math.isfinite(self.kappa)):
            raise UnsupportedPoleError(f"only real poles are supported, got {self.kappa!r}")
        if self.kappa == 0:
            raise UnsupportedPoleError("kappa = 0 has no factorization solution")

    @property
    def epsilon(self) -> float:
        return -self.kappa**2

    @property
    def regularity(self) -> str:
        return "left" if self.kappa > 0 else "right"


def classify_poles(poles: PoleSet) -> list[FactorizationSolution]:
    out = []
    for k in poles.kappas:
        if isinstance(k, complex) or np.iscomplexobj(k):
            raise UnsupportedPoleError(f"complex pole {k} is not supported")
        out.append(FactorizationSolution(float(k), poles.l))
    return out


def singularity_strength(solutions: Sequence[FactorizationSolution], l: int) -> int:
    n_left = sum(1 for s in solutions if s.kappa > 0)
    return l + n_left - (len(solutions) - n_left)


# -- factorization solutions --------------------------------------------------

def _left_series(l, x, terms=40):
    """x i_l(x) and its x-derivative from the power series (small x)."""
    x = np.asarray(x, dtype=float)
    c = 1.0
    for j in range(1, 2 * l + 2, 2):
        c /= j
    s = np.zeros_like(x)
    ds = np.zeros_like(x)
    x2h = 0.5 * x * x
    term = np.full_like(x, c)  # c (x^2/2)^k / (k! prod)
    xl = x**l
    for k in range(terms):
        s += term * xl * x
        ds += (l + 1 + 2 * k) * term * xl
        term = term * x2h / ((k + 1) * (2 * l + 2 * k + 3))
        if np.all(term * xl * x <= 1e-17 * np.abs(s)):
            break
    return s, ds


def _raise_l(s, ds, x, l_to):
    """Upward recurrence s_{l+1} = s_l' - (l+1)/x s_l starting from l = 0."""
    for l in range(l_to):
        s2 = (l * (l + 1) / x**2 + 1.0) * s
        s_new = ds - (l + 1) / x * s
        ds_new = s2 - (l + 1) / x * ds + (l + 1) / x**2 * s
        s, ds = s_new, ds_new
    return s, ds


def u_scaled(sol: FactorizationSolution, r, scale: bool = True):
    """(u, u') at r, divided by e^(kappa r) when `scale` is set."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("r must be positive")
    l, kap = sol.l, sol.kappa
    a = abs(kap)
    x = a * r
    if kap > 0:
        q = np.exp(-2.0 * x)
        s0 = -0.5 * np.expm1(-2.0 * x)
        c0 = 0.5 * (1.0 + q)
        s, ds = _raise_l(s0, c0, x, l)
        if l > 0:
            small = x < l + 2.0
            if np.any(small):
                ss, dss = _left_series(l, x[small] if x.ndim else x)
                damp = np.exp(-x[small] if x.ndim else -x)
                if x.ndim:
                    s = np.where(small, 0.0, s)
                    ds = np.where(small, 0.0, ds)
                    s[small] = ss * damp
                    ds[small] = dss * damp
                else:
                    s, ds = ss * damp, dss * damp
        if not scale:
            f = np.exp(x)
            s, ds = s * f, ds * f
    else:
        s, ds = _raise_l(np.ones_like(x), -np.ones_like(x), x, l)
        if not scale:
            f = np.exp(-x)
            s, ds = s * f, ds * f
    return s, a * ds


def _laurent_rows(l: int, kappa2: float, n_rows: int):
    """Coefficients (a_m, b_m) with u^(m) = a_m u + b_m u'.

    a_m, b_m are Laurent polynomials in r stored as {power: coefficient}.
    """
    L = l * (l + 1)

    def add(d, p, c):
        if c:
            d[p] = d.get(p, 0.0) + c

    def deriv(d):
        out = {}
        for p, c in d.items():
            add(out, p - 1, p * c)
        return out

    def times_g(d):
        out = {}
        for p, c in d.items():
            add(out, p, kappa2 * c)
            add(out, p - 2, L * c)
        return out

    rows = [({0: 1.0}, {}), ({}, {0: 1.0})]
    while len(rows) < n_rows:
        a, b = rows[-1]
        na = deriv(a)
        for p, c in times_g(b).items():
            add(na, p, c)
        nb = dict(a)
        for p, c in deriv(b).items():
            add(nb, p, c)
        rows.append((na, nb))
    return rows[:n_rows]


def _eval_laurent(d, r):
    out = np.zeros_like(r)
    for p, c in d.items():
        out = out + c * r**p
    return out


def derivative_rows(sol: FactorizationSolution, r, n_rows: int, scale: bool = True):
    """u, u', ..., u^(n_rows-1) at r (shape n_rows x len(r)), optionally scaled."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    u, du = u_scaled(sol, r, scale)
    rows = _laurent_rows(sol.l, sol.kappa**2, n_rows)
    return np.array([_eval_laurent(a, r) * u + _eval_laurent(b, r) * du for a, b in rows])


def u_eval(sol: FactorizationSolution, r, max_order: int = 1):
    """u and its derivatives up to `max_order`, unscaled."""
    return derivative_rows(sol, r, max_order + 1, scale=False)


# -- Wronskian log-derivatives --------------------------------------------------

@dataclass
class WronskianBundle:
    """ln|W| with its first two r-derivatives; ``sign`` is the sign of W."""

    r: np.ndarray
    ln_w: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    sign: np.ndarray


def _bundle_from_rows(rows, r, log_shift):
    """rows: (n+2, n, len(r)) derivative rows, columns possibly rescaled."""
    n = rows.shape[1]
    M = np.moveaxis(rows[:n], -1, 0)  # (N, n, n): M[p, i, j] = u_j^(i)
    extra_n = rows[n].T  # (N, n)
    extra_n1 = rows[n + 1].T
    sign, logabs = np.linalg.slogdet(M)
    if np.any(sign == 0) or not np.all(np.isfinite(logabs)):
        bad = r[(sign == 0) | ~np.isfinite(logabs)][0]
        raise WronskianNodeError(f"Wronskian vanishes at r = {bad:.6g} fm", bad)
    rhs = np.zeros((M.shape[0], n, min(n, 2)))
    rhs[:, n - 1, -1] = 1.0
    if n >= 2:
        rhs[:, n - 2, 0] = 1.0
    y = np.linalg.solve(M, rhs)
    y_last = y[:, :, -1]
    d1 = np.einsum("pj,pj->p", extra_n, y_last)
    w2 = np.einsum("pj,pj->p", extra_n1, y_last)
    if n >= 2:
        w2 = w2 - np.einsum("pj,pj->p", extra_n, y[:, :, 0])
    d2 = w2 - d1 * d1
    if not (np.all(np.isfinite(d1)) and np.all(np.isfinite(d2))):
        raise NumericError("non-finite Wronskian derivative")
    return WronskianBundle(r=r, ln_w=logabs + log_shift, d1=d1, d2=d2, sign=sign)


def _ill_conditioned(block):
    """Per-point test on the (n, n, m) Wronskian matrices after row and column equilibration."""
    M = np.moveaxis(block, -1, 0)
    M = M / np.linalg.norm(M, axis=1, keepdims=True)
    M = M / np.linalg.norm(M, axis=2, keepdims=True)
    with np.errstate(all="ignore"):
        c = np.linalg.cond(M)
    return ~(c < COND_LIMIT)


def wronskian_bundle(solutions, r, scale: bool = True, norms=None) -> WronskianBundle:
    """ln W, (ln W)', (ln W)'' for the Wronskian of `solutions` at r."""
    solutions = list(solutions)
    if not solutions:
        raise DomainError("need at least one factorization solution")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r <= 0):
        raise DomainError("r must be positive")
    n = len(solutions)
    norms = np.ones(n) if norms is None else np.asarray(norms, dtype=float)
    hp = r < R_HIGH_PRECISION * (1 + solutions[0].l) ** 2
    out = WronskianBundle(
        r=r, ln_w=np.empty_like(r), d1=np.empty_like(r), d2=np.empty_like(r), sign=np.empty_like(r)
    )
    if np.any(~hp):
        idx = np.nonzero(~hp)[0]
        rr = r[idx]
        rows = np.stack(
            [c * derivative_rows(s, rr, n + 2, scale) for s, c in zip(solutions, norms)], axis=1
        )
        bad = _ill_conditioned(rows[:n])
        if np.any(bad):
            hp[idx[bad]] = True
            idx, rr, rows = idx[~bad], rr[~bad], rows[..., ~bad]
        if idx.size:
            shift = sum(s.kappa for s in solutions) * rr if scale else 0.0
            b = _bundle_from_rows(rows, rr, shift)
            for name in ("ln_w", "d1", "d2", "sign"):
                getattr(out, name)[idx] = getattr(b, name)
    for i in np.nonzero(hp)[0]:
        out.ln_w[i], out.d1[i], out.d2[i], out.sign[i] = _bundle_mp(solutions, r[i], norms)
    return out


def _u_mp(sol: FactorizationSolution, r):
    """Unscaled (u, u') at a single radius in mpmath arithmetic."""
    l = sol.l
    a = abs(mpmath.mpf(sol.kappa))
    x = a * r
    if sol.kappa > 0:
        if l == 0:
            return mpmath.sinh(x), a * mpmath.cosh(x)
        # power series of x i_l(x); no cancellation for any x
        c = mpmath.mpf(1)
        for j in range(1, 2 * l + 2, 2):
            c /= j
        s = ds = mpmath.mpf(0)
        term = c
        k = 0
        eps = mpmath.mpf(10) ** (-mpmath.mp.dps)
        xl = x**l
        while True:
            s += term * xl * x
            ds += (l + 1 + 2 * k) * term * xl
            term = term * x * x / 2 / ((k + 1) * (2 * l + 2 * k + 3))
            k += 1
            if abs(term * xl * x) < eps * abs(s) and k > 2:
                break
        return s, a * ds
    s, ds = mpmath.exp(-x), -mpmath.exp(-x)
    for j in range(l):
        s2 = (j * (j + 1) / x**2 + 1) * s
        s, ds = ds - (j + 1) / x * s, s2 - (j + 1) / x * ds + (j + 1) / x**2 * s
    return s, a * ds


def _generic_rows_mp(solutions, rm, norms):
    n = len(solutions)
    M = mpmath.matrix(n + 2, n)
    for j, (sol, c) in enumerate(zip(solutions, norms)):
        u, du = _u_mp(sol, rm)
        u, du = u * c, du * c
        for m, (a, b) in enumerate(_laurent_rows(sol.l, mpmath.mpf(sol.kappa) ** 2, n + 2)):
            av = sum((mpmath.mpf(cf) * rm**p for p, cf in a.items()), mpmath.mpf(0))
            bv = sum((mpmath.mpf(cf) * rm**p for p, cf in b.items()), mpmath.mpf(0))
            M[m, j] = av * u + bv * du
    return M


def _hyperbolic_rows_mp(terms, rm):
    n = len(terms)
    M = mpmath.matrix(n + 2, n)
    for j, (lam, plus, minus) in enumerate(terms):
        lam = mpmath.mpf(lam)
        ep, em = mpmath.exp(lam * rm), mpmath.exp(-lam * rm)
        for m in range(n + 2):
            M[m, j] = lam**m * (plus * ep + (-1) ** m * minus * em)
    return M


def _ratios_mp(M, n):
    """(ln|W|, (ln W)', (ln W)'', sign W) from an (n+2) x n matrix of derivative rows."""
    # column equilibration; the determinant ratios are unaffected
    log_scale = mpmath.mpf(0)
    for j in range(n):
        cmax = max(abs(M[m, j]) for m in range(n + 2))
        log_scale += mpmath.log(cmax)
        for m in range(n + 2):
            M[m, j] /= cmax
    A = M[0:n, 0:n]
    det = mpmath.det(A)
    if det == 0:
        raise WronskianNodeError("Wronskian vanishes")
    e = mpmath.matrix(n, 1)
    e[n - 1] = 1
    y_last = mpmath.lu_solve(A, e)
    d1 = mpmath.fsum(M[n, j] * y_last[j] for j in range(n))
    w2 = mpmath.fsum(M[n + 1, j] * y_last[j] for j in range(n))
    if n >= 2:
        e = mpmath.matrix(n, 1)
        e[n - 2] = 1
        y_pen = mpmath.lu_solve(A, e)
        w2 -= mpmath.fsum(M[n, j] * y_pen[j] for j in range(n))
    return mpmath.log(abs(det)) + log_scale, d1, w2 - d1 * d1, mpmath.sign(det)


def _bundle_mp(solutions, r, norms, as_float=True):
    with mpmath.workdps(HP_DIGITS):
        try:
            out = _ratios_mp(_generic_rows_mp(solutions, mpmath.mpf(float(r)), norms), len(solutions))
        except WronskianNodeError:
            raise WronskianNodeError(f"Wronskian vanishes at r = {r:.6g} fm", r) from None
        return tuple(float(x) for x in out) if as_float else out


def wronskian_bundle_extended(solutions, r, norms=None) -> WronskianBundle:
    """Same as wronskian_bundle but every radius evaluated in extended precision.

    Slow (milliseconds per point); meant for reference values where V is
    exponentially small and double-precision cancellation dominates.
    """
    solutions = list(solutions)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    norms = np.ones(len(solutions)) if norms is None else np.asarray(norms, dtype=float)
    vals = np.array([_bundle_mp(solutions, x, norms) for x in r]).reshape(-1, 4)
    return WronskianBundle(r=r, ln_w=vals[:, 0], d1=vals[:, 1], d2=vals[:, 2], sign=vals[:, 3])


def d2_ln_w_finite_difference(solutions, r, h=None, extended: bool = False) -> np.ndarray:
    """Five-point finite-difference (ln W)'' from ln|W| alone (cross-check).

    With ``extended`` the ln|W| samples and the difference quotient are kept
    in extended precision, so the result is accurate even where (ln W)'' is
    exponentially small.
    """
    solutions = list(solutions)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if h is None:
        h = np.minimum(1e-3, 2e-3 * r) if extended else np.minimum(1e-2, 0.02 * r)
    h = np.broadcast_to(h, r.shape)
    if not extended:
        vals = [wronskian_bundle(solutions, r + j * h).ln_w for j in (-2, -1, 0, 1, 2)]
        return (-vals[0] + 16 * vals[1] - 30 * vals[2] + 16 * vals[3] - vals[4]) / (12 * h * h)
    ones = np.ones(len(solutions))
    out = np.empty_like(r)
    with mpmath.workdps(HP_DIGITS):
        for i, (ri, hi) in enumerate(zip(r, h)):
            ri, hi = mpmath.mpf(float(ri)), mpmath.mpf(float(hi))
            f = [_ratios_mp(_generic_rows_mp(solutions, ri + j * hi, ones), len(solutions))[0]
                 for j in (-2, -1, 0, 1, 2)]
            out[i] = float((-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * hi * hi))
    return out


# -- potentials -----------------------------------------------------------------

def _node_grid(r_max):
    return np.unique(np.concatenate([np.geomspace(1e-3, 1.0, 150), np.linspace(1.0, r_max, 400)]))


@dataclass
class PotentialModel:
    """V(r) in fm^-2 built from a pole set; call it with r in fm."""

    l: int
    poles: PoleSet
    solutions: list
    n_left: int
    n_right: int
    nu: int
    r_min_eval: float = R_MIN_EVAL

    def bundle(self, r, scale=True, norms=None, extended=False) -> WronskianBundle:
        if extended:
            return wronskian_bundle_extended(self.solutions, r, norms=norms)
        return wronskian_bundle(self.solutions, r, scale=scale, norms=norms)

    def _direct(self, r, **kw):
        L = self.l * (self.l + 1)
        if not self.solutions:
            return L / r**2
        return L / r**2 - 2.0 * self.bundle(r, **kw).d2

    def __call__(self, r, **kw):
        r_in = np.asarray(r, dtype=float)
        r = np.atleast_1d(r_in)
        if np.any(r <= 0):
            raise DomainError("r must be positive")
        core = self.nu * (self.nu + 1)
        out = np.empty_like(r)
        inner = r < self.r_min_eval
        if np.any(~inner):
            out[~inner] = self._direct(r[~inner], **kw)
        if np.any(inner):
            rm = self.r_min_eval
            remainder = self._direct(np.array([rm]), **kw)[0] - core / rm**2
            out[inner] = core / r[inner] ** 2 + remainder
        return out if r_in.ndim else float(out[0])

    def central(self, r):
        """V minus the centrifugal term l(l+1)/r^2."""
        r = np.asarray(r, dtype=float)
        return self(r) - self.l * (self.l + 1) / r**2

    def core_coefficient(self, r1=1e-3, r2=1e-4) -> float:
        """lim r^2 V(r) as r -> 0, Richardson-extrapolated assuming an r^2 correction."""
        f1 = r1**2 * self._direct(np.array([r1]))[0]
        f2 = r2**2 * self._direct(np.array([r2]))[0]
        return f2 + (f2 - f1) * r2**2 / (r1**2 - r2**2)

    def decay_radius(self, threshold=1e-10, r_start=1.0, step=0.5, r_limit=5000.0) -> float:
        """Radius beyond which |V| stays below `threshold` (checked on a coarse grid)."""
        r = r_start
        last_above = r_start
        block = 200
        while r < r_limit:
            grid = r + step * np.arange(block)
            v = np.abs(self.central(grid))
            above = np.nonzero(v >= threshold)[0]
            if above.size:
                last_above = grid[above[-1]]
            elif last_above < grid[0]:
                return float(last_above + step)
            r = grid[-1] + step
        raise NumericError(f"|V| does not fall below {threshold} before r = {r_limit} fm")

    def metadata(self) -> dict:
        return {
            "l": self.l,
            "poles": list(self.poles.kappas),
            "n_left": self.n_left,
            "n_right": self.n_right,
            "nu": self.nu,
            "r_min_eval": self.r_min_eval,
        }


def check_nodeless(solutions, r_max: float):
    grid = _node_grid(r_max)
    b = wronskian_bundle(solutions, grid)
    flips = np.nonzero(b.sign[1:] != b.sign[:-1])[0]
    if flips.size:
        r0 = grid[flips[0] + 1]
        raise WronskianNodeError(f"Wronskian changes sign near r = {r0:.4g} fm", r0)


def build_potential(poles: PoleSet, check_nodes: bool = True) -> PotentialModel:
    """Potential of the transformation chain; an empty pole set gives l(l+1)/r^2."""
    if len(set(poles.kappas)) != len(poles.kappas):
        raise DegeneratePoleError("repeated pole: the Wronskian vanishes identically")
    sols = classify_poles(poles)
    nu = singularity_strength(sols, poles.l)
    if nu < 0:
        raise UnsupportedSingularityError(
            f"singularity strength nu = {nu} < 0; the r^(nu+1) boundary condition is undefined"
        )
    if check_nodes and sols:
        k_min = min(abs(s.kappa) for s in sols)
        check_nodeless(sols, min(max(30.0, 20.0 / k_min), 2000.0))
    n_left = sum(1 for s in sols if s.kappa > 0)
    return PotentialModel(
        l=poles.l, poles=poles, solutions=sols, n_left=n_left, n_right=len(sols) - n_left, nu=nu
    )


# -- closed S-wave forms ------------------------------------------------------------

def _hyperbolic_bundle(terms, r):
    """Bundle for f_j = plus_j e^(lam_j r) + minus_j e^(-lam_j r), lam_j > 0.

    Each column is divided by its dominant exponential: e^(lam r) when
    plus_j != 0, otherwise e^(-lam r).
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    n = len(terms)
    rows = np.empty((n + 2, n, r.size))
    shift = np.zeros_like(r)
    for j, (lam, plus, minus) in enumerate(terms):
        if plus == 0:
            for m in range(n + 2):
                rows[m, j] = minus * (-lam) ** m
            shift = shift - lam * r
        else:
            t = (minus / plus) * np.exp(-2.0 * lam * r)
            for m in range(n + 2):
                rows[m, j] = plus * lam**m * (1.0 + (-1) ** m * t)
            shift = shift + lam * r
    return _bundle_from_rows(rows, r, shift)


def compact_shifts(poles: PoleSet):
    """Shifted hyperbolic functions left after the right-regular transformations.

    Returns (kappa_j, shift_j, kind_j) for every positive pole: each
    transformation with a negative pole kappa_i turns sinh <-> cosh when
    |kappa_i| < kappa_j and adds arctanh of the smaller-to-larger ratio.
    """
    neg = [k for k in poles.kappas if k < 0]
    pos = [k for k in poles.kappas if k > 0]
    out = []
    for kj in pos:
        shift, kind = 0.0, "sinh"
        for ki in neg:
            a = abs(ki)
            ratio = min(a, kj) / max(a, kj)
            if ratio >= 1.0:
                raise InadmissibleShiftError(f"|kappa| = {a} appears with both signs")
            shift += math.atanh(ratio)
            if a < kj:
                kind = "cosh" if kind == "sinh" else "sinh"
        out.append((kj, shift, kind))
    return out


def s_wave_compact_terms(poles: PoleSet, form: str = "cosh-4"):
    """(lam, plus, minus) triples of the explicit S-wave Wronskian entries.

    ``wronskian-6`` keeps e^(kappa r) for negative and sinh(kappa r) for
    positive poles. ``cosh-4`` absorbs the negative poles into shifted
    cosh/sinh functions of the positive ones, shrinking the Wronskian.
    """
    if poles.l != 0:
        raise DomainError("compact forms exist for l = 0 only")
    if any(k == 0 for k in poles.kappas):
        raise UnsupportedPoleError("zero pole")
    if form == "wronskian-6":
        return [(k, 0.5, -0.5) if k > 0 else (-k, 0.0, 1.0) for k in poles.kappas]
    if form == "cosh-4":
        terms = []
        for kj, shift, kind in compact_shifts(poles):
            sgn = 1.0 if kind == "cosh" else -1.0
            terms.append((kj, 0.5, 0.5 * sgn * math.exp(-2.0 * shift)))
        return terms
    raise DomainError(f"unknown form {form!r}")


def s_wave_compact_potential(poles: PoleSet, form: str = "cosh-4", extended: bool = False):
    """Callable r -> V(r) (fm^-2) from one of the explicit S-wave Wronskians."""
    terms = s_wave_compact_terms(poles, form)
    if not terms:
        raise DomainError("no positive poles: the compact form is empty")

    def potential(r):
        r_in = np.asarray(r, dtype=float)
        rr = np.atleast_1d(r_in)
        if extended:
            with mpmath.workdps(HP_DIGITS):
                v = np.array([
                    -2.0 * float(_ratios_mp(_hyperbolic_rows_mp(terms, mpmath.mpf(float(x))), len(terms))[2])
                    for x in rr
                ])
        else:
            v = -2.0 * _hyperbolic_bundle(terms, rr).d2
        return v if r_in.ndim else float(v[0])

    return potential


# -- diagnostics -----------------------------------------------------------------------

def tail_decay_fit(pot, r_window, n_points: int = 200):
    """Fit ln|V| = c - mu r on the window; returns (mu, c)."""
    lo, hi = r_window
    if not 0 < lo < hi:
        raise DomainError("window must satisfy 0 < r_lo < r_hi")
    r = np.linspace(lo, hi, n_points)
    v = np.asarray(pot(r), dtype=float)
    if np.any(v == 0) or np.any(np.sign(v) != np.sign(v[0])):
        raise NonMonotoneTailError("V changes sign inside the tail window")
    slope, c = np.polyfit(r, np.log(np.abs(v)), 1)
    return float(-slope), float(c)
