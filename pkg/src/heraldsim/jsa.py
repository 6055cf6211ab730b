"""Joint spectral amplitude of the two-photon state and pair-generation probability.

The model is a Gaussian pump envelope in the sum frequency times a sinc
phase-matching factor, with an optional group-delay phase.  Frequencies are
angular detunings from the perfect phase-matching point.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .numerics import FrequencyGrid, sinc


@dataclass(frozen=True)
class SourceParams:
    """Photon-pair source parameters.

    sigma: pump bandwidth (rad/time); mu_s, mu_i: signal/idler phase-matching
    coefficients (time); kappa: pair-generation amplitude.
    """

    sigma: float
    mu_s: float
    mu_i: float
    kappa: float = 0.1
    include_group_delay_phase: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not (np.isfinite(self.kappa) and self.kappa >= 0):
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if not (np.isfinite(self.mu_s) and np.isfinite(self.mu_i)):
            raise ValueError("mu_s and mu_i must be finite")


@dataclass(frozen=True)
class JsaField:
    """Complex joint amplitude sampled on the tensor grid grid_s x grid_i."""

    grid_s: FrequencyGrid
    grid_i: FrequencyGrid
    values: np.ndarray  # shape (n_s, n_i)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if values.shape != (self.grid_s.n, self.grid_i.n):
            raise ValueError(
                f"values shape {values.shape} does not match grids "
                f"({self.grid_s.n}, {self.grid_i.n})"
            )
        if not np.all(np.isfinite(values.view(float))):
            raise ValueError("joint amplitude contains non-finite values")


def jsa_amplitude(p: SourceParams, w_s, w_i):
    """Joint amplitude at (w_s, w_i): Gaussian pump factor times the sinc
    phase-matching factor, with the optional group-delay phase."""
    w_s = np.asarray(w_s, dtype=float)
    w_i = np.asarray(w_i, dtype=float)
    half_delay = 0.5 * (p.mu_s * w_s + p.mu_i * w_i)
    amp = np.exp(-((w_s + w_i) ** 2) / (2.0 * p.sigma**2)) * sinc(half_delay)
    if p.include_group_delay_phase:
        return amp * np.exp(1j * half_delay)
    return amp + 0j


def sample_jsa(p: SourceParams, grid_s: FrequencyGrid, grid_i: FrequencyGrid) -> JsaField:
    """Evaluate the joint amplitude at every node pair of the two grids."""
    values = jsa_amplitude(p, grid_s.nodes[:, None], grid_i.nodes[None, :])
    return JsaField(grid_s=grid_s, grid_i=grid_i, values=values)


def separable_jsa(
    f_s: Callable[[np.ndarray], np.ndarray],
    g_i: Callable[[np.ndarray], np.ndarray],
    grid_s: FrequencyGrid,
    grid_i: FrequencyGrid,
) -> JsaField:
    """Rank-1 joint amplitude f(w_s) * g(w_i); used for factorability limits."""
    fs = np.asarray(f_s(grid_s.nodes), dtype=complex)
    gi = np.asarray(g_i(grid_i.nodes), dtype=complex)
    return JsaField(grid_s=grid_s, grid_i=grid_i, values=np.outer(fs, gi))


def jsa_norm(field: JsaField) -> float:
    """Double quadrature of |amplitude|^2 over the sampled grids."""
    intensity = np.abs(field.values) ** 2
    norm = float(field.grid_s.weights @ intensity @ field.grid_i.weights)
    if norm <= 0.0:
        raise ValueError("joint amplitude is identically zero on the grids")
    return norm


def pair_probability(kappa: float, norm: float) -> float:
    """Per-pulse probability of generating a photon pair.

    [1 + 1/(4 pi^2 kappa^2 norm)]^-1, with the kappa -> 0 limit equal to 0.
    """
    if norm <= 0.0:
        raise ValueError(f"norm must be positive, got {norm}")
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    if kappa == 0.0:
        return 0.0
    x = 4.0 * np.pi**2 * kappa**2 * norm
    return float(x / (1.0 + x))
