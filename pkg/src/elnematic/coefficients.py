"""Leslie coefficients, derived constants and dissipation regimes."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field



class DomainError(ValueError):
    """A coefficient set violates a condition some operation depends on."""


class Regime(str, enum.Enum):
    CASE_I = "CaseI"
    CASE_II = "CaseII"
    NEITHER = "Neither"


@dataclass(frozen=True)
class LeslieCoefficients:
    mu1: float
    mu2: float
    mu3: float
    mu4: float
    mu5: float
    mu6: float
    eps_penalty: float = 1.0

    def __post_init__(self):
        if not self.eps_penalty > 0:
            raise DomainError(f"eps_penalty must be > 0, got {self.eps_penalty}")
        for name in ("mu1", "mu2", "mu3", "mu4", "mu5", "mu6"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} is not finite")

    @property
    def mu(self) -> tuple[float, ...]:
        return (self.mu1, self.mu2, self.mu3, self.mu4, self.mu5, self.mu6)

    @property
    def lambda1(self) -> float:
        return self.mu2 - self.mu3

    @property
    def lambda2(self) -> float:
        return self.mu5 - self.mu6

    @property
    def parodi_defect(self) -> float:
        return self.mu2 + self.mu3 - self.mu6 + self.mu5

    def scaled(self, c: float) -> "LeslieCoefficients":
        return LeslieCoefficients(*(c * m for m in self.mu), eps_penalty=self.eps_penalty)

    def to_json(self) -> dict:
        return {"mu": list(self.mu), "eps_penalty": self.eps_penalty}

    @classmethod
    def from_json(cls, obj: dict) -> "LeslieCoefficients":
        mu = obj.get("mu")
        if mu is None or len(mu) != 6:
            raise DomainError('coefficient block needs "mu": [mu1..mu6]')
        return cls(*(float(m) for m in mu), eps_penalty=float(obj.get("eps_penalty", 1.0)))


@dataclass(frozen=True)
class DerivedConstants:
    lambda1: float
    lambda2: float
    alpha: float | None  # None when lambda1 == 0
    parodi_defect: float


@dataclass(frozen=True)
class RegimeReport:
    tag: Regime
    margin: float = 0.0
    failed: tuple[str, ...] = field(default_factory=tuple)


def derive_constants(mu: LeslieCoefficients) -> DerivedConstants:
    lam1, lam2 = mu.lambda1, mu.lambda2
    alpha = 0.5 * (1.0 - lam2 / lam1) if lam1 != 0 else None
    return DerivedConstants(lam1, lam2, alpha, mu.parodi_defect)


def parodi_tolerance(mu: LeslieCoefficients) -> float:
    return 1e-12 * max(1.0, sum(abs(m) for m in mu.mu))


def is_parodi(mu: LeslieCoefficients, tol: float | None = None) -> bool:
    if tol is None:
        tol = parodi_tolerance(mu)
    return abs(mu.parodi_defect) <= tol


def require_lambda1_negative(mu: LeslieCoefficients) -> None:
    if not mu.lambda1 < 0:
        raise DomainError(
            f"lambda1 = mu2 - mu3 = {mu.lambda1:g} >= 0 violates (lama1a): lambda1 < 0 required"
        )


def _sign_conditions(mu: LeslieCoefficients) -> list[str]:
    failed = []
    if not mu.lambda1 < 0:
        failed.append("(lama1a) lambda1 < 0")
    if not mu.mu5 + mu.mu6 >= 0:
        failed.append("(mu56) mu5 + mu6 >= 0")
    if not mu.mu1 >= 0:
        failed.append("(mu14) mu1 >= 0")
    if not mu.mu4 > 0:
        failed.append("(mu14) mu4 > 0")
    return failed


def dissipation_margin(mu: LeslieCoefficients) -> float:
    """Smallest eigenvalue of the pointwise quadratic form in (N, Ad).

    The form is ``-lambda1 |N|^2 - c (N, Ad) + (mu5+mu6) |Ad|^2`` with
    ``c = lambda2 - mu2 - mu3``; it is positive definite exactly when the
    strict non-Parodi dissipation condition holds.
    """
    if not mu.lambda1 < 0:
        raise DomainError(f"dissipation_margin: lambda1 = {mu.lambda1:g} violates (lama1a) lambda1 < 0")
    if not mu.mu5 + mu.mu6 >= 0:
        raise DomainError(f"dissipation_margin: mu5 + mu6 = {mu.mu5 + mu.mu6:g} violates (mu56) mu5+mu6 >= 0")
    a = -mu.lambda1
    b = mu.mu5 + mu.mu6
    half_c = 0.5 * (mu.lambda2 - mu.mu2 - mu.mu3)
    # closed-form smaller eigenvalue of [[a, -h], [-h, b]]
    return 0.5 * (a + b) - math.hypot(0.5 * (a - b), half_c)


def classify_regime(mu: LeslieCoefficients, tol: float | None = None) -> RegimeReport:
    if tol is None:
        tol = parodi_tolerance(mu)
    if tol < 0:
        raise DomainError("tol must be >= 0")
    failed = _sign_conditions(mu)
    if failed:
        return RegimeReport(Regime.NEITHER, 0.0, tuple(failed))
    lam1, lam2 = mu.lambda1, mu.lambda2
    s56 = mu.mu5 + mu.mu6
    if abs(mu.parodi_defect) <= tol and lam2 * lam2 / (-lam1) <= s56 * (1 + 1e-12) + tol:
        return RegimeReport(Regime.CASE_I, dissipation_margin(mu))
    cross = abs(lam2 - mu.mu2 - mu.mu3)
    if cross < 2.0 * math.sqrt(-lam1) * math.sqrt(s56):
        return RegimeReport(Regime.CASE_II, dissipation_margin(mu))
    reasons = []
    if abs(mu.parodi_defect) > tol:
        reasons.append("(lam2) Parodi's relation")
    else:
        reasons.append("(critical point of lambda 2) lambda2^2/(-lambda1) <= mu5+mu6")
    reasons.append("(noPa1) |lambda2-mu2-mu3| < 2 sqrt(-lambda1) sqrt(mu5+mu6)")
    return RegimeReport(Regime.NEITHER, 0.0, tuple(reasons))


class MoleculeShape(str, enum.Enum):
    ROD = "RodLike"
    DISC = "DiscLike"
    SPHERE = "SphereLike"


def simplified_model(kind: MoleculeShape | str, lambda1: float, mu4: float = 1.0,
                     eps_penalty: float = 1.0) -> LeslieCoefficients:
    """Coefficients of the reduced rod/disc/sphere models.

    mu1 = 0 and mu5, mu6 sit at the critical value of lambda2, so both
    Parodi's relation and lambda2^2 = -lambda1 (mu5 + mu6) hold.
    """
    if not lambda1 < 0:
        raise DomainError(f"simplified_model: lambda1 = {lambda1:g} violates (lama1a) lambda1 < 0")
    kind = MoleculeShape(kind)
    if kind is MoleculeShape.ROD:
        lam2 = -lambda1
    elif kind is MoleculeShape.DISC:
        lam2 = lambda1
    else:
        lam2 = 0.0
    mu2 = 0.5 * (lambda1 - lam2)
    mu3 = -0.5 * (lambda1 + lam2)
    mu5 = 0.5 * (lam2 - lam2 * lam2 / lambda1)
    mu6 = -0.5 * (lam2 + lam2 * lam2 / lambda1)
    return LeslieCoefficients(0.0, mu2, mu3, mu4, mu5, mu6, eps_penalty=eps_penalty)

