"""Laboratory energy <-> centre-of-mass wave number.

Reduced units throughout: hbar = 2 mu = 1, lengths in fm, wave numbers in
fm^-1 and potentials in fm^-2. MeV only appears at I/O boundaries.
"""
from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class PhysicalConstants:
    """Masses and conversion factors, all in MeV / fm."""

    m_n: float = 939.565
    m_p: float = 938.272
    hbarc: float = 197.33
    hbar2_over_2mu: float = 41.47

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not np.isfinite(v) or v <= 0:
                raise DomainError(f"{f.name} must be strictly positive, got {v}")

    @property
    def lab_factor(self) -> float:
        """E_lab / k^2 in MeV fm^2."""
        return self.hbar2_over_2mu * (self.m_p + self.m_n) / self.m_p

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise DomainError(f"unknown constants: {sorted(unknown)}")
        return cls(**d)


DEFAULT_CONSTANTS = PhysicalConstants()


def k_from_elab(e_lab, c: PhysicalConstants = DEFAULT_CONSTANTS):
    """Centre-of-mass wave number (fm^-1) for a lab energy (MeV)."""
    e = np.asarray(e_lab, dtype=float)
    if np.any(e < 0) or not np.all(np.isfinite(e)):
        raise DomainError("E_lab must be finite and non-negative")
    k = np.sqrt(e / c.lab_factor)
    return float(k) if k.ndim == 0 else k


def elab_from_k(k, c: PhysicalConstants = DEFAULT_CONSTANTS):
    """Lab energy (MeV) for a centre-of-mass wave number (fm^-1)."""
    kk = np.asarray(k, dtype=float)
    if np.any(kk < 0) or not np.all(np.isfinite(kk)):
        raise DomainError("k must be finite and non-negative")
    e = c.lab_factor * kk**2
    return float(e) if e.ndim == 0 else e


def to_mev(v, c: PhysicalConstants = DEFAULT_CONSTANTS):
    """Convert a reduced-unit potential (fm^-2) to MeV."""
    return np.asarray(v) * c.hbar2_over_2mu
