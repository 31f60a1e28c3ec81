"""Fits of effective-range models and pole sets to phase-shift data.

Rational models K = P/Q are fitted by linearised least squares on
P(k^2) - K Q(k^2), reweighted by 1/Q^2 from the previous iterate so the
converged objective approximates a fit of K itself. Pole sets are fitted
directly to delta = -sum arctan(k/kappa) with a small Levenberg-Marquardt
loop; for l > 0 the sum rules enter as a penalty whose weight grows
geometrically, followed by a minimum-norm projection onto the constraint
surface.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .erf import ErfModel, K_from_delta, PhaseShiftDataset, delta_from_model
from .errors import ConfigError, DomainError, IllConditionedFitError, InversionError
from .kinematics import DEFAULT_CONSTANTS, PhysicalConstants
from .poles import PoleSet, delta_from_poles, extract_poles, sum_rule_residuals, validate_pole_set

WEIGHTINGS = ("by-sigma", "uniform", "k-variance")
INIT_SOURCES = ("manual", "coarse-grid", "from-erf-extraction")


class OrderWarning(UserWarning):
    """Model orders do not give the physical high-energy behaviour."""


class ExcludedPointWarning(UserWarning):
    """A data point was dropped because K is undefined there."""


@dataclass
class FitConfig:
    """Settings shared by the model and pole fits.

    ``order`` is (M, N): numerator and denominator degrees in k^2.
    ``fixed`` lists indices of ``initial_poles`` held constant in a pole fit.
    """

    order: tuple = (2, 0)
    n_poles: int | None = None
    weighting: str = "k-variance"
    max_iter: int = 200
    tol: float = 1e-12
    penalty_mu0: float = 1.0
    penalty_factor: float = 10.0
    penalty_stages: int = 6
    constraint_tol: float = 1e-6
    init: str = "from-erf-extraction"
    initial_poles: tuple = ()
    fixed: tuple = ()
    seed: int = 0
    n_starts: int = 1
    kappa_floor: float = 1e-6
    min_separation: float = 1e-3

    def __post_init__(self):
        self.order = tuple(int(v) for v in self.order)
        self.initial_poles = tuple(float(v) for v in self.initial_poles)
        self.fixed = tuple(int(v) for v in self.fixed)
        if len(self.order) != 2 or min(self.order) < 0:
            raise ConfigError("order must be a pair of non-negative degrees")
        if self.weighting not in WEIGHTINGS:
            raise ConfigError(f"weighting must be one of {WEIGHTINGS}")
        if self.init not in INIT_SOURCES:
            raise ConfigError(f"init must be one of {INIT_SOURCES}")
        if self.n_poles is not None and self.n_poles < 1:
            raise ConfigError("n_poles must be >= 1")
        if self.max_iter < 1 or self.tol <= 0 or self.penalty_stages < 1 or self.n_starts < 1:
            raise ConfigError("iteration settings must be positive")
        if self.penalty_mu0 <= 0 or self.penalty_factor <= 1:
            raise ConfigError("penalty schedule must start positive and grow")

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown fit settings: {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["order"], d["initial_poles"], d["fixed"] = list(self.order), list(self.initial_poles), list(self.fixed)
        return d


@dataclass
class FitReport:
    kind: str
    params: tuple
    residuals_deg: np.ndarray
    rms_deg: float
    converged: bool
    iterations: int
    objective_history: list
    constraint_residuals: list = field(default_factory=list)
    covariance: np.ndarray | None = None
    stage_boundaries: list = field(default_factory=list)
    excluded: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": [float(v) for v in self.params],
            "residuals_deg": [float(v) for v in self.residuals_deg],
            "rms_deg": float(self.rms_deg),
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "objective_history": [float(v) for v in self.objective_history],
            "stage_boundaries": list(self.stage_boundaries),
            "constraint_residuals": [float(v) for v in self.constraint_residuals],
            "covariance": None if self.covariance is None else self.covariance.tolist(),
            "excluded_points": list(self.excluded),
            "notes": list(self.notes),
        }


def _normalise(w):
    w = np.asarray(w, dtype=float)
    return w / np.mean(w)


def _check_data(data: PhaseShiftDataset, cfg: FitConfig):
    if cfg.weighting == "by-sigma" and data.sigma is None:
        raise ConfigError("by-sigma weighting needs uncertainties in the dataset")


def _model_delta_on_data(model: ErfModel, k, delta_data):
    """delta of the model at the data momenta, on the branch of the data.

    The model phase is followed on a dense grid so that the branch is tracked
    between sparse data points; one global multiple of pi then aligns it with
    the (pre-unwrapped) data.
    """
    dense = np.union1d(np.linspace(k.min() * 0.5, k.max(), 2000), k)
    d = delta_from_model(model, dense)
    d = d[np.searchsorted(dense, k)]
    shift = np.round(np.median((delta_data - d) / math.pi))
    return d + shift * math.pi


def fit_erf(data: PhaseShiftDataset, cfg: FitConfig | None = None, constants: PhysicalConstants = DEFAULT_CONSTANTS):
    """Least-squares [M/N] effective-range model; returns (ErfModel, FitReport)."""
    cfg = cfg or FitConfig()
    _check_data(data, cfg)
    l = data.l
    M, N = cfg.order
    if M - N != l + 1:
        warnings.warn(f"[{M}/{N}] violates M - N = l + 1 for l = {l}", OrderWarning, stacklevel=2)
    k_all = data.k(constants)
    keep = np.abs(np.sin(data.delta)) > 1e-12
    excluded = [int(i) for i in np.flatnonzero(~keep)]
    if excluded:
        warnings.warn(f"points {excluded} have delta = 0 mod pi and are excluded", ExcludedPointWarning, stacklevel=2)
    k, delta = k_all[keep], data.delta[keep]
    n_par = M + 1 + N
    if k.size < n_par:
        raise IllConditionedFitError(f"{k.size} usable points for {n_par} parameters; lower the orders")
    K = K_from_delta(k, delta, l)
    x = k * k
    if cfg.weighting == "uniform":
        w = np.ones_like(k)
    else:
        sig = data.sigma[keep] if data.sigma is not None else np.ones_like(k)
        if cfg.weighting == "by-sigma":
            w = 1.0 / sig**2
        else:
            sigma_K = k ** (2 * l + 1) * sig / np.sin(delta) ** 2
            w = 1.0 / sigma_K**2
    w = _normalise(w)

    A = np.hstack([x[:, None] ** np.arange(M + 1), -K[:, None] * x[:, None] ** np.arange(1, N + 1)])
    col = np.linalg.norm(A, axis=0)
    col[col == 0] = 1.0
    theta = None
    history = []
    converged = False
    it = 0
    cov = None
    for it in range(1, cfg.max_iter + 1):
        q_prev = np.ones_like(x) if theta is None else np.polynomial.polynomial.polyval(x, np.concatenate([[1.0], theta[M + 1 :]]))
        s = np.sqrt(w) / np.abs(q_prev)
        As = (A / col) * s[:, None]
        b = K * s
        U, sv, Vt = np.linalg.svd(As, full_matrices=False)
        if sv[-1] <= 1e-13 * sv[0]:
            raise IllConditionedFitError(f"normal system is rank deficient for [{M}/{N}]; lower the orders")
        y = Vt.T @ ((U.T @ b) / sv)
        new = y / col
        history.append(float(np.sum((As @ y - b) ** 2)))
        if N == 0:
            theta, converged = new, True
            cov = (Vt.T / sv**2) @ Vt / np.outer(col, col)
            break
        step = np.inf if theta is None else np.max(np.abs(new - theta)) / max(np.max(np.abs(new)), 1e-300)
        theta = new
        cov = (Vt.T / sv**2) @ Vt / np.outer(col, col)
        if step < cfg.tol:
            converged = True
            break
    model = ErfModel(l=l, p=tuple(theta[: M + 1]), q=(1.0, *theta[M + 1 :]))
    dof = k.size - n_par
    if dof > 0:
        cov = cov * history[-1] / dof
    d_model = _model_delta_on_data(model, k, delta)
    res = np.degrees(d_model - delta)
    report = FitReport(
        kind=f"erf[{M}/{N}]",
        params=tuple(model.p) + tuple(model.q[1:]),
        residuals_deg=res,
        rms_deg=float(np.sqrt(np.mean(res**2))),
        converged=converged,
        iterations=it,
        objective_history=history,
        covariance=cov,
        excluded=excluded,
    )
    return model, report


# ---------------------------------------------------------------- pole fits


def _pole_weights(data: PhaseShiftDataset, cfg: FitConfig):
    # in delta space the propagated K variance reduces to the delta variance
    if cfg.weighting == "uniform" or data.sigma is None:
        return np.ones(len(data))
    return _normalise(1.0 / data.sigma**2)


def _sum_rule_vector(kappa, l):
    alphas = np.arange(1, 2 * l, 2)
    return np.array([math.fsum(kappa ** (-float(a))) for a in alphas])


def _sum_rule_jacobian(kappa, l):
    alphas = np.arange(1, 2 * l, 2)
    return np.array([-a * kappa ** (-a - 1.0) for a in alphas])


def _delta(kappa, k):
    return -np.sum(np.arctan(k[:, None] / kappa[None, :]), axis=1)


class _Problem:
    """Weighted residual vector of a pole fit at a given penalty weight."""

    def __init__(self, k, delta, w, l, free_idx, base):
        self.k, self.delta, self.sw, self.l = k, delta, np.sqrt(w), l
        self.free_idx, self.base = free_idx, base

    def full(self, z):
        kappa = self.base.copy()
        kappa[self.free_idx] = z
        return kappa

    def residual(self, z, mu):
        kappa = self.full(z)
        r = self.sw * (_delta(kappa, self.k) - self.delta)
        if self.l > 0 and mu > 0:
            r = np.concatenate([r, math.sqrt(mu) * _sum_rule_vector(kappa, self.l)])
        return r

    def jacobian(self, z, mu):
        # central differences; the step scales with each parameter
        J = []
        for j in range(z.size):
            h = 1e-6 * max(1.0, abs(z[j]))
            zp, zm = z.copy(), z.copy()
            zp[j] += h
            zm[j] -= h
            J.append((self.residual(zp, mu) - self.residual(zm, mu)) / (2 * h))
        return np.array(J).T


def _separated(kappa, rel):
    s = np.sort(kappa)
    gaps = np.diff(s)
    scale = np.maximum(np.abs(s[1:]), np.abs(s[:-1]))
    return bool(np.all(gaps > rel * scale))


def _admissible(prob, z_old, z_new, cfg):
    # poles may not reach zero, change sign, or coalesce (the chain degenerates)
    if not (np.all(np.abs(z_new) > cfg.kappa_floor) and np.all(np.sign(z_new) == np.sign(z_old))):
        return False
    return _separated(prob.full(z_new), cfg.min_separation)


def _levenberg_marquardt(prob: _Problem, z, mu, cfg: FitConfig):
    """Damped Gauss-Newton; returns (z, converged, iterations, history)."""
    r = prob.residual(z, mu)
    cost = float(r @ r)
    history = [cost]
    lam = 1e-3
    for it in range(1, cfg.max_iter + 1):
        J = prob.jacobian(z, mu)
        g = J.T @ r
        H = J.T @ J
        d = np.diag(H).copy()
        d[d == 0] = 1.0
        accepted = False
        while lam < 1e16:
            try:
                step = np.linalg.solve(H + lam * np.diag(d), -g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            z_new = z + step
            if _admissible(prob, z, z_new, cfg):
                r_new = prob.residual(z_new, mu)
                c_new = float(r_new @ r_new)
                if c_new <= cost:
                    accepted = True
                    break
            lam *= 4
        if not accepted:
            # no descent direction left: stationary to working precision
            return z, True, it, history
        small = np.max(np.abs(step)) <= cfg.tol * (1.0 + np.max(np.abs(z)))
        z, r, cost = z_new, r_new, c_new
        history.append(cost)
        lam = max(lam / 3, 1e-12)
        if small:
            return z, True, it, history
    return z, False, cfg.max_iter, history


def _project(kappa, l, free_idx, tol=1e-14, max_iter=50):
    """Minimum-norm correction of the free poles onto the sum-rule surface."""
    kappa = kappa.copy()
    for _ in range(max_iter):
        g = _sum_rule_vector(kappa, l)
        if np.max(np.abs(g)) < tol:
            break
        J = _sum_rule_jacobian(kappa, l)[:, free_idx]
        kappa[free_idx] -= J.T @ np.linalg.solve(J @ J.T, g)
    return kappa


def _initial_poles(data, n, cfg, constants):
    if cfg.init == "manual":
        if len(cfg.initial_poles) != n:
            raise ConfigError(f"manual initial guess needs {n} poles")
        return np.array(cfg.initial_poles)
    if cfg.init == "from-erf-extraction":
        model, _ = fit_erf(data, cfg, constants)
        rep = extract_poles(model)
        if rep.has_complex:
            raise ConfigError("the seeding model has complex poles; use another init source")
        kap = np.array(rep.real_poles.kappas)
        if kap.size != n:
            raise ConfigError(f"[{cfg.order[0]}/{cfg.order[1]}] model yields {kap.size} poles, not {n}")
        return kap
    return _coarse_grid(data, n, constants)


def _coarse_grid(data, n, constants):
    """Greedy one-pole-at-a-time search over a logarithmic grid of +-kappa."""
    k = data.k(constants)
    cand = np.concatenate([-np.geomspace(0.02, 10, 16), np.geomspace(0.02, 10, 16)])
    chosen = []
    for _ in range(n):
        costs = [np.sum((_delta(np.array(chosen + [c]), k) - data.delta) ** 2) if c not in chosen else np.inf for c in cand]
        chosen.append(float(cand[int(np.argmin(costs))]))
    return np.array(chosen)


def fit_poles(data: PhaseShiftDataset, n: int | None = None, cfg: FitConfig | None = None, constants: PhysicalConstants = DEFAULT_CONSTANTS):
    """Direct fit of n real poles to the phase shifts; returns (PoleSet, FitReport)."""
    cfg = cfg or FitConfig()
    _check_data(data, cfg)
    n = n if n is not None else cfg.n_poles
    if n is None or n < 1:
        raise ConfigError("pole count must be >= 1")
    l = data.l
    if n < l:
        raise ConfigError(f"at least {l} poles are needed to satisfy the sum rules for l = {l}")
    k = data.k(constants)
    w = _pole_weights(data, cfg)
    start = _initial_poles(data, n, cfg, constants)
    if np.any(np.abs(start) <= cfg.kappa_floor):
        raise DomainError("initial poles must be nonzero")
    fixed = sorted(set(cfg.fixed))
    if any(i < 0 or i >= n for i in fixed):
        raise ConfigError("fixed indices out of range")
    free_idx = np.array([i for i in range(n) if i not in fixed], dtype=int)
    if l > 0 and free_idx.size < l:
        raise ConfigError("too few free poles to satisfy the sum rules")
    rng = np.random.default_rng(cfg.seed)
    starts = [start] + [start * (1 + 0.05 * rng.standard_normal(n)) for _ in range(cfg.n_starts - 1)]
    for s in starts[1:]:
        s[fixed] = start[fixed]

    best = None
    for s0 in starts:
        prob = _Problem(k, data.delta, w, l, free_idx, s0.astype(float).copy())
        z = s0[free_idx].astype(float)
        history, bounds, total, ok = [], [], 0, True
        mus = [cfg.penalty_mu0 * cfg.penalty_factor**i for i in range(cfg.penalty_stages)] if l > 0 else [0.0]
        for mu in mus:
            bounds.append(len(history))
            z, conv, its, h = _levenberg_marquardt(prob, z, mu, cfg)
            history += h
            total += its
            ok = conv
            if l > 0 and np.max(np.abs(_sum_rule_vector(prob.full(z), l))) < cfg.constraint_tol and conv:
                break
        kappa = prob.full(z)
        if l > 0:
            kappa = _project(kappa, l, free_idx)
        data_cost = float(np.sum(w * (_delta(kappa, k) - data.delta) ** 2))
        if best is None or data_cost < best[0]:
            best = (data_cost, kappa, ok, total, history, bounds, prob, z)
    _, kappa, ok, total, history, bounds, prob, z = best
    if np.any(np.abs(kappa) <= 10 * cfg.kappa_floor):
        raise InversionError("a pole collapsed to zero; try another initial guess")
    poles = PoleSet(l, tuple(kappa), provenance="direct-fit")
    val = validate_pole_set(poles, l)
    if not val.valid:
        ok = False
    res = np.degrees(_delta(kappa, k) - data.delta)
    J = prob.jacobian(kappa[free_idx], 0.0)
    dof = k.size - free_idx.size
    cov = None
    try:
        cov = np.linalg.inv(J.T @ J)
        if dof > 0:
            cov *= float(np.sum(w * (_delta(kappa, k) - data.delta) ** 2)) / dof
    except np.linalg.LinAlgError:
        pass
    report = FitReport(
        kind=f"poles[{n}]",
        params=tuple(poles.kappas),
        residuals_deg=res,
        rms_deg=float(np.sqrt(np.mean(res**2))),
        converged=bool(ok),
        iterations=total,
        objective_history=history,
        constraint_residuals=list(sum_rule_residuals(poles)),
        covariance=cov,
        stage_boundaries=bounds,
        notes=[] if val.valid else ["pole set fails strict validation"],
    )
    return poles, report
