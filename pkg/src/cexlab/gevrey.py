"""Weighted mode-sum norms, computed in log space.

The quantities of interest are sums over a finite set of frequencies,
    sum_i |u_i|^2 * W(lambda_i),
with weights W that are exponentials in a fractional power of lambda.
The interesting regimes make both factors astronomically large or small
(|u| ~ e^150 against W ~ e^-200), so every norm here is computed and
reported as log of the squared sum via logsumexp; nothing is ever
exponentiated until the caller asks for it.

Three weight families appear:

* fixed radius r > 0 and order s: W = exp(2 r lambda^(1/s));
* growing radius: W = (1 + lambda)^(lambda^(1/s)), which dominates
  every fixed radius of the same order, so finiteness here gives
  membership in all of them at once;
* decaying weight: W = exp(-2 R lambda^(1/S)).  Divergence of a sum
  against a decaying weight is the strong failure mode: the coefficients
  outgrow even that allowance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp


@dataclass(frozen=True)
class ModeVector:
    """Coefficients on a finite frequency set, stored as log magnitudes.

    frequencies must be positive and strictly increasing; log_coeffs are
    ln|u_i| (use -inf for an exactly zero coefficient).
    """

    frequencies: np.ndarray
    log_coeffs: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        c = np.asarray(self.log_coeffs, dtype=float)
        if f.shape != c.shape or f.ndim != 1:
            raise ValueError("frequencies and log_coeffs must be equal-length 1-d arrays")
        if f.size and not np.all(f > 0):
            raise ValueError("frequencies must be positive")
        if f.size > 1 and not np.all(np.diff(f) > 0):
            raise ValueError("frequencies must be strictly increasing")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "log_coeffs", c)

    @classmethod
    def from_coefficients(cls, frequencies, coefficients):
        c = np.abs(np.asarray(coefficients, dtype=float))
        with np.errstate(divide="ignore"):
            return cls(np.asarray(frequencies, dtype=float), np.log(c))

    def __len__(self):
        return self.frequencies.size


def fixed_radius_terms(vec, s, r):
    """Per-mode log contributions 2 ln|u_i| + 2 r lambda_i^(1/s)."""
    if s <= 0:
        raise ValueError(f"order s must be positive, got {s}")
    if r <= 0:
        raise ValueError(f"radius r must be positive, got {r}")
    return 2.0 * vec.log_coeffs + 2.0 * r * vec.frequencies ** (1.0 / s)


def fixed_radius_log_norm(vec, s, r):
    """log of sum_i |u_i|^2 exp(2 r lambda_i^(1/s))."""
    return float(logsumexp(fixed_radius_terms(vec, s, r))) if len(vec) else -np.inf


def growing_radius_terms(vec, s):
    """Per-mode log contributions 2 ln|u_i| + lambda^(1/s) log(1+lambda)."""
    if s <= 0:
        raise ValueError(f"order s must be positive, got {s}")
    lam = vec.frequencies
    return 2.0 * vec.log_coeffs + lam ** (1.0 / s) * np.log1p(lam)


def growing_radius_log_norm(vec, s):
    """log of sum_i |u_i|^2 (1+lambda_i)^(lambda_i^(1/s)).

    For any fixed r the weight here eventually exceeds exp(2 r
    lambda^(1/s)), so a finite value bounds every fixed-radius norm of
    order s up to the finitely many small frequencies.
    """
    return float(logsumexp(growing_radius_terms(vec, s))) if len(vec) else -np.inf


def decaying_weight_terms(vec, s, radius):
    """Per-mode log contributions 2 ln|u_i| - 2 radius lambda^(1/s)."""
    if s <= 0:
        raise ValueError(f"order s must be positive, got {s}")
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    return 2.0 * vec.log_coeffs - 2.0 * radius * vec.frequencies ** (1.0 / s)


def decaying_weight_log_norm(vec, s, radius):
    """log of sum_i |u_i|^2 exp(-2 radius lambda_i^(1/s))."""
    return float(logsumexp(decaying_weight_terms(vec, s, radius))) if len(vec) else -np.inf
