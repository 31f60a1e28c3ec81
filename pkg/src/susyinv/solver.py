"""Forward radial Schroedinger solver used to verify constructed potentials.

u'' = (V(r) - k^2) u is integrated outward with Numerov's method from the
power law u ~ r^(nu+1) imposed by the nu(nu+1)/r^2 core, and the phase shift
is read off by matching to Riccati-Bessel functions at two radii outside the
range of the potential.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import spherical_jn, spherical_yn

from .errors import ConfigError, DomainError, MatchingError, NumericError, UnsupportedSingularityError
from .erf import unwrap_phase
from .poles import PoleSet, delta_from_poles
from .susy import build_potential

_RENORM = 1e150


@dataclass
class SolverConfig:
    """Radial integration settings (lengths in fm).

    ``r_match`` fixes the matching radii; by default r_1 is the radius beyond
    which the short-range part of V stays below ``tail_tol`` and r_2 lies a
    quarter wavelength further out.
    """

    r_start: float = 1e-3
    step: float = 1e-3
    r_max: float = 40.0
    r_match: tuple | None = None
    tail_tol: float = 1e-8
    origin_refine: int = 8
    r_refine: float = 0.1
    k_low: float = 0.02
    r_match_min: float = 5.0

    def __post_init__(self):
        if not (self.r_start > 0 and self.step > 0 and self.r_max > self.r_start):
            raise ConfigError("need 0 < r_start < r_max and step > 0")
        if self.origin_refine < 1:
            raise ConfigError("origin_refine must be >= 1")
        if self.r_match is not None:
            r1, r2 = self.r_match
            if not self.r_start < r1 < r2 <= self.r_max:
                raise ConfigError("need r_start < r_1 < r_2 <= r_max")

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if d.get("r_match") is not None:
            d["r_match"] = tuple(d["r_match"])
        return cls(**d)

    def to_dict(self):
        return dict(self.__dict__, r_match=list(self.r_match) if self.r_match else None)


@dataclass
class RadialSolution:
    k: float
    r: np.ndarray
    u: np.ndarray
    delta: float


def riccati_bessel(l: int, x):
    """x j_l(x), x y_l(x) and their x-derivatives.

    With this sign convention jhat_0 = sin x, nhat_0 = -cos x and the
    Wronskian jhat nhat' - jhat' nhat equals +1.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("x must be positive")
    j, dj = spherical_jn(l, x), spherical_jn(l, x, derivative=True)
    y, dy = spherical_yn(l, x), spherical_yn(l, x, derivative=True)
    return x * j, x * y, j + x * dj, y + x * dy


def _double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def _grids(cfg: SolverConfig, r_end: float):
    """Fine grid near the origin, then the main grid; the last two fine points
    are one main step apart so the recurrence can continue seamlessly."""
    h = cfg.step
    hf = h / cfg.origin_refine
    n_f = max(int(math.ceil((cfg.r_refine - cfg.r_start) / hf)), cfg.origin_refine)
    n_f = int(math.ceil(n_f / cfg.origin_refine)) * cfg.origin_refine
    fine = cfg.r_start + hf * np.arange(n_f + 1)
    n_c = int(math.ceil((r_end - fine[-1]) / h)) + 1
    coarse = fine[-1] + h * np.arange(n_c + 1)
    return fine, coarse


def _numerov(f, h, u0, u1, keep=None):
    """Numerov recurrence for u'' = f u; f has shape (n_r, n_k).

    Returns the final two rows (u[-2], u[-1]) and the rows listed in `keep`
    (index -> u). The solution is rescaled on the fly to avoid overflow,
    which leaves its shape (and hence the phase) unchanged.
    """
    c = h * h / 12.0
    w_prev = (1.0 - c * f[0]) * u0
    w = (1.0 - c * f[1]) * u1
    u_prev, u = u0, u1
    kept = {}
    keep = set() if keep is None else set(keep)
    for i in (0, 1):
        if i in keep:
            kept[i] = (u0, u1)[i].copy()
    scale = np.ones_like(u0)
    for i in range(1, f.shape[0] - 1):
        w_next = 2.0 * w - w_prev + 12.0 * c * f[i] * u
        u_next = w_next / (1.0 - c * f[i + 1])
        w_prev, w, u_prev, u = w, w_next, u, u_next
        big = np.abs(u) > _RENORM
        if np.any(big):
            s = np.where(big, 1.0 / _RENORM, 1.0)
            w_prev, w, u_prev, u = w_prev * s, w * s, u_prev * s, u * s
            scale = scale * s
            for key in kept:
                kept[key] = kept[key] * s
        if i + 1 in keep:
            kept[i + 1] = u.copy()
    if not np.all(np.isfinite(u)):
        raise NumericError("radial integration overflowed")
    return u_prev, u, kept


def _potential_on(pot, r):
    v = np.asarray(pot(r), dtype=float)
    if not np.all(np.isfinite(v)):
        raise NumericError("potential is not finite on the integration grid")
    return v


def _matching_radius(pot, cfg: SolverConfig) -> float:
    if cfg.r_match is not None:
        return cfg.r_match[0]
    return max(cfg.r_match_min, pot.decay_radius(cfg.tail_tol))


def _integrate(pot, ks, cfg: SolverConfig, r_end: float, keep_r=(), u0_scale=1.0, full=False):
    """Integrate for every k in `ks` at once.

    Returns the main grid and the solution at the requested radii; with
    `full` also the fine grid near the origin and the solution on it.
    """
    if pot.nu < 0:
        raise UnsupportedSingularityError("nu < 0 is not supported")
    p = pot.nu + 1
    fine, coarse = _grids(cfg, r_end)
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    k2 = ks * ks
    hf = fine[1] - fine[0]
    vf = _potential_on(pot, fine)
    f_fine = vf[:, None] - k2[None, :]
    # r^p (1 + a r^2) solves the equation up to O(r^(p+2)) once the finite
    # part c0 of V at the origin is included
    c0 = vf[0] - pot.nu * (pot.nu + 1) / fine[0] ** 2
    a = (c0 - k2) / (2 * (2 * pot.nu + 3))
    u0 = u0_scale * fine[0] ** p * (1 + a * fine[0] ** 2)
    u1 = u0_scale * fine[1] ** p * (1 + a * fine[1] ** 2)
    ref = cfg.origin_refine
    n_fine = f_fine.shape[0]
    keep_f = set(range(n_fine)) if full else set()
    if ref > 1:
        keep_f.add(n_fine - 1 - ref)
    up, u_end, kept_f = _numerov(f_fine, hf, u0, u1, keep=keep_f)
    u_first = kept_f[n_fine - 1 - ref] if ref > 1 else up
    vc = _potential_on(pot, coarse)
    f_coarse = vc[:, None] - k2[None, :]
    keep_idx = {int(round((r - coarse[0]) / cfg.step)) for r in keep_r}
    if full:
        keep_idx = set(range(coarse.size))
    # main grid starts one main step before the end of the fine grid
    main = np.concatenate([[coarse[0] - cfg.step], coarse])
    f_main = np.concatenate([[np.asarray(pot(main[:1]), dtype=float)[0] - k2], f_coarse])
    _, _, kept = _numerov(f_main, cfg.step, u_first, u_end, keep={i + 1 for i in keep_idx})
    kept = {i - 1: v for i, v in kept.items()}
    if full:
        near = fine[:-1]
        return coarse, kept, near, np.array([kept_f[i] for i in range(near.size)])
    return coarse, kept


def _match(l, k, r1, u1, r2, u2):
    j1, n1, _, _ = riccati_bessel(l, k * r1)
    j2, n2, _, _ = riccati_bessel(l, k * r2)
    det = j1 * n2 - j2 * n1
    if abs(det) < 1e-3:
        raise MatchingError("matching radii are degenerate for this k")
    a = (u1 * n2 - u2 * n1) / det
    b = (j1 * u2 - j2 * u1) / det
    # u = A jhat + B nhat ~ sin(x - l pi/2 + delta) means A = cos(delta), B = -sin(delta)
    return math.atan2(-b, a)


def _fold(d):
    return d - math.pi * round(d / math.pi)


def phase_shift_from_potential(pot, k_grid, cfg: SolverConfig | None = None, u0_scale=1.0) -> np.ndarray:
    """Phase shift of `pot` on an increasing k grid, unwrapped along the grid."""
    cfg = cfg or SolverConfig()
    k = np.asarray(k_grid, dtype=float)
    if k.ndim != 1 or np.any(k <= 0) or np.any(np.diff(k) <= 0):
        raise DomainError("k grid must be positive and strictly increasing")
    r1 = _matching_radius(pot, cfg)
    h = cfg.step
    low = k < cfg.k_low
    hi = ~low
    out = np.empty_like(k)
    if np.any(hi):
        kh = k[hi]
        if cfg.r_match is not None:
            r2 = np.full(kh.shape, cfg.r_match[1])
        else:
            r2 = r1 + 0.5 * math.pi / kh
        r_end = max(cfg.r_max, float(r2.max()) + 3 * h)
        fine, coarse = _grids(cfg, r_end)
        snap = lambda r: coarse[int(round((r - coarse[0]) / h))]
        r1s = snap(r1)
        r2s = np.array([snap(x) for x in r2])
        for shift in range(4):
            grid, kept = _integrate(pot, kh, cfg, r_end, keep_r=[r1s, *r2s], u0_scale=u0_scale)
            i1 = int(round((r1s - grid[0]) / h))
            try:
                vals = []
                for j, (kj, rr2) in enumerate(zip(kh, r2s)):
                    i2 = int(round((rr2 - grid[0]) / h))
                    vals.append(_match(pot.l, kj, grid[i1], kept[i1][j], grid[i2], kept[i2][j]))
                break
            except MatchingError:
                r2s = r2s + 0.25 * math.pi / kh
                r_end = max(r_end, float(r2s.max()) + 3 * h)
        else:
            raise MatchingError("could not find non-degenerate matching radii")
        out[hi] = vals
    if np.any(low):
        a = scattering_length(pot, cfg, r1)
        out[low] = np.arctan(-a * k[low] ** (2 * pot.l + 1))
    principal = np.array([_fold(d) for d in out])
    return unwrap_phase(principal, k)


def scattering_length(pot, cfg: SolverConfig | None = None, r1: float | None = None) -> float:
    """Zero-energy limit K(0) = -1/a from matching to r^(l+1) and r^(-l)."""
    cfg = cfg or SolverConfig()
    r1 = _matching_radius(pot, cfg) if r1 is None else r1
    h = cfg.step
    r2 = r1 + 5.0
    fine, coarse = _grids(cfg, r2 + 3 * h)
    snap = lambda r: coarse[int(round((r - coarse[0]) / h))]
    r1s, r2s = snap(r1), snap(r2)
    grid, kept = _integrate(pot, [0.0], cfg, r2 + 3 * h, keep_r=[r1s, r2s])
    i1 = int(round((r1s - grid[0]) / h))
    i2 = int(round((r2s - grid[0]) / h))
    l = pot.l
    reg = lambda r: r ** (l + 1) / _double_factorial(2 * l + 1)
    irr = lambda r: -_double_factorial(2 * l - 1) * r ** (-l)
    u1, u2 = kept[i1][0], kept[i2][0]
    ra, rb = grid[i1], grid[i2]
    det = reg(ra) * irr(rb) - reg(rb) * irr(ra)
    A = (u1 * irr(rb) - u2 * irr(ra)) / det
    B = (reg(ra) * u2 - reg(rb) * u1) / det
    return B / A


def integrate_radial(pot, k: float, cfg: SolverConfig | None = None, u0_scale=1.0) -> RadialSolution:
    """Single-k integration keeping u on the whole main grid."""
    cfg = cfg or SolverConfig()
    if k <= 0:
        raise DomainError("k must be positive")
    delta = float(phase_shift_from_potential(pot, [k], cfg, u0_scale)[0])
    r_end = cfg.r_max if cfg.r_match is None else cfg.r_match[1]
    grid, kept, near, u_near = _integrate(pot, [k], cfg, r_end, u0_scale=u0_scale, full=True)
    u = np.array([kept[i][0] for i in range(grid.size)])
    r = np.concatenate([near, grid])
    return RadialSolution(k=float(k), r=r, u=np.concatenate([u_near[:, 0], u]), delta=delta)


@dataclass
class VerificationReport:
    k: np.ndarray
    delta_forward: np.ndarray
    delta_poles: np.ndarray
    branch_offset: int
    max_abs_deviation: float
    rms_deviation: float

    @property
    def max_abs_deviation_deg(self) -> float:
        return math.degrees(self.max_abs_deviation)

    def to_dict(self) -> dict:
        return {
            "k": self.k.tolist(),
            "delta_forward_deg": np.degrees(self.delta_forward).tolist(),
            "delta_poles_deg": np.degrees(self.delta_poles).tolist(),
            "branch_offset_pi": self.branch_offset,
            "max_abs_deviation_deg": self.max_abs_deviation_deg,
            "rms_deviation_deg": math.degrees(self.rms_deviation),
        }


def verify_inversion(poles: PoleSet, k_grid, cfg: SolverConfig | None = None, pot=None) -> VerificationReport:
    """Forward-solve the constructed potential and compare with the arctangent sum.

    The forward phase is only defined modulo pi; one global multiple of pi is
    removed before comparing.
    """
    pot = build_potential(poles) if pot is None else pot
    k = np.asarray(k_grid, dtype=float)
    fwd = phase_shift_from_potential(pot, k, cfg)
    ref = delta_from_poles(poles, k)
    offset = int(round(float(np.mean(ref - fwd)) / math.pi))
    fwd = fwd + offset * math.pi
    dev = fwd - ref
    return VerificationReport(
        k=k,
        delta_forward=fwd,
        delta_poles=ref,
        branch_offset=offset,
        max_abs_deviation=float(np.max(np.abs(dev))),
        rms_deviation=float(np.sqrt(np.mean(dev**2))),
    )
