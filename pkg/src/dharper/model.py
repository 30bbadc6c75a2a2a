"""Model parameters and derived quantities.

All quantities are in the dimensionless units of the driven Harper
Hamiltonian: hoppings J_x, J_y, Peierls phase alpha (flux per cell) and
the two Bloch frequencies omega_x, omega_y.  Every other module consumes
the validated objects defined here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


def golden_beta() -> float:
    """The irrational frequency ratio (sqrt(5)-1)/4 ~ 0.309, close to 1/3."""
    return (math.sqrt(5.0) - 1.0) / 4.0


@dataclass(frozen=True)
class BetaClass:
    """Frequency ratio omega_x/omega_y with its rationality declared.

    Rationality is fixed by construction (integers r, q), never inferred
    from a float: use .rational(r, q), .irrational(value) or .golden().
    """

    kind: str           # "rational" | "irrational"
    value: float
    r: int | None = None
    q: int | None = None

    @classmethod
    def rational(cls, r: int, q: int) -> "BetaClass":
        if q <= 0:
            raise ValueError("beta_q must be a positive integer")
        if r < 0:
            raise ValueError("beta_r must be non-negative")
        g = math.gcd(r, q)
        r, q = r // g, q // g
        return cls(kind="rational", value=r / q, r=r, q=q)

    @classmethod
    def irrational(cls, value: float) -> "BetaClass":
        if not (value >= 0.0 and math.isfinite(value)):
            raise ValueError("irrational beta must be a finite non-negative real")
        return cls(kind="irrational", value=float(value))

    @classmethod
    def golden(cls) -> "BetaClass":
        return cls.irrational(golden_beta())

    @property
    def is_rational(self) -> bool:
        return self.kind == "rational"


@dataclass(frozen=True)
class ModelParams:
    """Physical knobs: hoppings, Peierls phase, Bloch frequencies.

    alpha is reduced mod 1 on construction and must land in (0, 1);
    omega_y > 0 sets the drive period, omega_x >= 0 (0 allowed).
    """

    j_x: float
    j_y: float
    alpha: float
    omega_x: float
    omega_y: float

    def __post_init__(self):
        if not (self.j_x >= 0.0):
            raise ValueError("j_x must be >= 0")
        if not (self.j_y >= 0.0):
            raise ValueError("j_y must be >= 0")
        if not (self.omega_y > 0.0):
            raise ValueError("omega_y must be > 0 (it sets the drive period)")
        if not (self.omega_x >= 0.0):
            raise ValueError("omega_x must be >= 0")
        a = self.alpha % 1.0
        if a == 0.0:
            raise ValueError("alpha must not reduce to an integer (alpha mod 1 in (0,1))")
        object.__setattr__(self, "alpha", a)


@dataclass(frozen=True)
class DerivedParams:
    """Every derived symbol, computed once by derive_params.

    Carries the defining ModelParams fields alongside so downstream code
    needs a single object.
    """

    j_x: float
    j_y: float
    alpha: float
    omega_x: float
    omega_y: float
    beta: float          # omega_x/omega_y
    omega: float         # sqrt(omega_x^2 + omega_y^2)
    Omega: float         # characteristic frequency sqrt(Jp_x*Jp_y)
    jp_x: float          # 2*pi*alpha*J_x
    jp_y: float          # 2*pi*alpha*J_y
    t_y: float           # drive period 2*pi/omega_y
    hbar_eff: float      # effective Planck constant 2*pi*alpha


def derive_params(p: ModelParams) -> DerivedParams:
    """Compute all derived quantities from validated model parameters."""
    jp_x = TWO_PI * p.alpha * p.j_x
    jp_y = TWO_PI * p.alpha * p.j_y
    return DerivedParams(
        j_x=p.j_x,
        j_y=p.j_y,
        alpha=p.alpha,
        omega_x=p.omega_x,
        omega_y=p.omega_y,
        beta=p.omega_x / p.omega_y,
        omega=math.hypot(p.omega_x, p.omega_y),
        Omega=math.sqrt(jp_x * jp_y),
        jp_x=jp_x,
        jp_y=jp_y,
        t_y=TWO_PI / p.omega_y,
        hbar_eff=TWO_PI * p.alpha,
    )


def frequency_split(omega: float, beta: "BetaClass | float") -> tuple[float, float]:
    """Invert the (omega, beta) parametrization into (omega_x, omega_y).

    omega_y = omega/sqrt(1+beta^2), omega_x = beta*omega_y; round-trips
    with derive_params to better than 1e-12 relative.
    """
    b = beta.value if isinstance(beta, BetaClass) else float(beta)
    if not (omega > 0.0):
        raise ValueError("omega must be > 0")
    if not (b >= 0.0):
        raise ValueError("beta must be >= 0")
    omega_y = omega / math.sqrt(1.0 + b * b)
    omega_x = b * omega_y
    return omega_x, omega_y


def params_from_split(
    omega: float,
    beta: "BetaClass | float",
    j_x: float = 1.0,
    j_y: float = 1.0,
    alpha: float = 0.1545,
) -> ModelParams:
    """ModelParams for an experiment quoted by total frequency and ratio."""
    omega_x, omega_y = frequency_split(omega, beta)
    return ModelParams(j_x=j_x, j_y=j_y, alpha=alpha, omega_x=omega_x, omega_y=omega_y)
