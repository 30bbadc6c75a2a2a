"""Static Aubry-Andre/Harper chain: spectra and localization baseline.

H is real symmetric tridiagonal with hopping -J_x/2 and on-site potential
-J_y cos(2 pi alpha l + phi), open boundaries.  The phase offset phi
generalizes the bare model; phi = 0 reproduces it exactly, while a small
phi grid completes band coverage for butterfly plots and averaging.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
FIBONACCI_SIZES = (233, 377, 610)


@dataclass
class AAHamiltonian:
    L: int
    j_x: float
    j_y: float
    alpha: float
    phase: float
    diagonal: np.ndarray

    @property
    def off_diagonal(self) -> np.ndarray:
        return np.full(self.L - 1, -0.5 * self.j_x)

    def matrix(self) -> np.ndarray:
        m = np.diag(self.diagonal)
        od = self.off_diagonal
        m += np.diag(od, 1) + np.diag(od, -1)
        return m


@dataclass
class TransitionReport:
    """Participation-ratio scaling across system sizes."""

    sizes: tuple
    mean_p: np.ndarray
    growth_ratios: np.ndarray    # mean_p[i+1]/mean_p[i] per size step
    classification: str          # "localized" | "extended" | "inconclusive"


def build_aa(L: int, j_x: float, j_y: float, alpha: float,
             phase: float = 0.0) -> AAHamiltonian:
    if L < 2:
        raise ValueError("L must be >= 2")
    l = np.arange(L)
    diag = -j_y * np.cos(2.0 * np.pi * alpha * l + phase)
    return AAHamiltonian(L=L, j_x=j_x, j_y=j_y, alpha=alpha, phase=phase,
                         diagonal=diag)


def spectrum(h: AAHamiltonian) -> np.ndarray:
    """All L eigenvalues, ascending."""
    return sla.eigh_tridiagonal(h.diagonal, h.off_diagonal,
                                eigvals_only=True)


def eigenstates(h: AAHamiltonian) -> tuple[np.ndarray, np.ndarray]:
    return sla.eigh_tridiagonal(h.diagonal, h.off_diagonal)


def butterfly(alpha_list, j_x: float = 1.0, j_y: float = 1.0, L: int = 200,
              n_phases: int = 8) -> np.ndarray:
    """Spectra over rational fluxes, unioned over a small phase grid.

    alpha_list holds (p, q) pairs with q <= 50; returns rows
    (alpha_num, alpha_den, energy).
    """
    rows = []
    for p, q in alpha_list:
        if q > 50 or q <= 0:
            raise ValueError("rational flux denominators must satisfy 0 < q <= 50")
        if math.gcd(int(p), int(q)) != 1:
            raise ValueError(f"flux {p}/{q} is not in lowest terms")
        for phi in np.arange(n_phases) * 2.0 * np.pi / (n_phases * max(q, 1)):
            h = build_aa(L, j_x, j_y, p / q, phase=phi)
            for e in spectrum(h):
                rows.append((p, q, e))
    return np.array(rows)


def coprime_fluxes(q_max: int):
    """All p/q in (0, 1) with q <= q_max, gcd(p, q) = 1."""
    out = []
    for q in range(2, q_max + 1):
        for p in range(1, q):
            if math.gcd(p, q) == 1:
                out.append((p, q))
    return out


def mean_participation_aa(h: AAHamiltonian) -> float:
    """Mean participation ratio over all eigenvectors."""
    _, v = eigenstates(h)
    dens = v ** 2
    p_vals = 1.0 / (dens ** 2).sum(axis=0)
    return float(p_vals.mean())


def localization_diagnostic(j_x: float, j_y: float,
                            alpha: float = INV_GOLDEN,
                            sizes=FIBONACCI_SIZES,
                            phase: float = 0.0) -> TransitionReport:
    """Classify the phase from participation-ratio scaling with system size.

    localized: mean P grows < 10% per ~1.6x size step; extended: grows by
    >= 1.4x per step; anything between is reported inconclusive (expected
    near J_y = J_x).  Fibonacci sizes with golden-mean alpha minimize
    incommensuration artifacts.
    """
    mean_p = np.array([mean_participation_aa(build_aa(L, j_x, j_y, alpha, phase))
                       for L in sizes])
    ratios = mean_p[1:] / mean_p[:-1]
    if np.all(ratios < 1.10):
        cls = "localized"
    elif np.all(ratios >= 1.4):
        cls = "extended"
    else:
        cls = "inconclusive"
    return TransitionReport(sizes=tuple(sizes), mean_p=mean_p,
                            growth_ratios=ratios, classification=cls)
