"""Integrable billiards in action-angle form.

Two one-parameter models are provided, both in rescaled units with
hbar = 1 and energies expressed as the dimensionless ``eps``:

* :class:`RectBilliard` -- a rectangular box of fixed area whose shape
  parameter ``mu`` is the side ratio b/a.  ``h = mu*I1**2 + I2**2/mu``.
* :class:`CylinderBilliard` -- a cylindrical shell threaded by an
  Aharonov-Bohm flux ``phi`` (the parameter).  ``h = gamma*(I1 - phi)**2 + I2**2``
  with a signed rotational action ``I1``.

Quantum numbers follow the EBK rule, which is exact for both systems.  For
the rectangle ``I = (n1, n2)`` with ``n1, n2 >= 1``; for the cylinder
``I1 = n1`` (any integer, its sign selects the rotation sense) and
``I2 = n2 + 1`` with ``n2 >= 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar, NamedTuple

import numpy as np

__all__ = [
    "DomainError",
    "OffShellError",
    "LevelKey",
    "RectBilliard",
    "CylinderBilliard",
    "BilliardModel",
    "DEFAULT_GAMMA",
    "energy",
    "slope",
    "frequencies_and_actions",
    "get_model",
]

DEFAULT_GAMMA = 4.0 / math.pi**2

# relative slack when deciding whether a radicand is "negative"
_SHELL_SLACK = 1e-12


class DomainError(ValueError):
    """Argument outside the admissible domain of a model or formula."""


class OffShellError(DomainError):
    """Action variables do not lie on the requested energy shell."""


class LevelKey(NamedTuple):
    """Quantum label of a level: model tag plus the two quantum numbers."""

    model: str
    n1: int
    n2: int


def _sqrt_shell(radicand, scale):
    if radicand < -_SHELL_SLACK * max(1.0, abs(scale)):
        raise OffShellError(f"point lies off the energy shell (radicand {radicand:.3g})")
    return math.sqrt(max(radicand, 0.0))


@dataclass(frozen=True)
class RectBilliard:
    """Rectangular billiard of unit-normalised area, parameter ``mu = b/a``."""

    tag: ClassVar[str] = "rect"
    param_name: ClassVar[str] = "mu"

    # -- lattice ----------------------------------------------------------
    def check_key(self, key: LevelKey) -> None:
        if key.model != self.tag:
            raise DomainError(f"key {key} does not belong to model {self.tag!r}")
        if int(key.n1) != key.n1 or int(key.n2) != key.n2 or key.n1 < 1 or key.n2 < 1:
            raise DomainError(f"rect quantum numbers must be integers >= 1, got {key}")

    def check_param(self, mu) -> None:
        if not mu > 0:
            raise DomainError(f"rect shape parameter must be positive, got {mu}")

    def key(self, n1: int, n2: int) -> LevelKey:
        k = LevelKey(self.tag, int(n1), int(n2))
        self.check_key(k)
        return k

    # -- quantum energies (vectorised over n1, n2, mu) ----------------------
    def h(self, n1, n2, mu):
        return mu * n1**2 + n2**2 / mu

    def dh(self, n1, n2, mu):
        """Derivative of ``h`` with respect to ``mu`` at fixed quantum numbers."""
        return n1**2 - n2**2 / mu**2

    # -- classical shell quantities ----------------------------------------
    def i2_omega2(self, eps: float, i1: float, mu: float) -> tuple[float, float]:
        i2 = _sqrt_shell(mu * eps - mu**2 * i1**2, mu * eps)
        return i2, 2.0 * i2 / mu

    def shell_range(self, eps, mu):
        """Interval of ``I1`` covered by the energy shell."""
        return 0.0, math.sqrt(eps / mu)

    def omega2(self, eps, i1, mu):
        # 2*I2/mu written without cancellation-prone prefactors
        return 2.0 * np.sqrt(np.maximum(eps / mu - i1**2, 0.0))

    def shell_slope(self, eps, i1, mu):
        """``dh/dmu`` at fixed actions, evaluated on the shell ``h = eps``."""
        return 2.0 * i1**2 - eps / mu

    def shell_slope_di1(self, eps, i1, mu):
        return 4.0 * i1

    def shell_slope_inverse(self, eps, s, mu):
        return np.sqrt(np.maximum((s + eps / mu) / 2.0, 0.0))

    def slope_scale(self, eps, mu):
        """Largest slope difference on the shell; ``v = V / slope_scale``."""
        return 2.0 * eps / mu


@dataclass(frozen=True)
class CylinderBilliard:
    """Aharonov-Bohm cylindrical billiard; the parameter is the flux ``phi``.

    Parameters
    ----------
    gamma : float
        Geometry ratio ``a**2 / (pi**2 r**2)`` (height ``a``, radius ``r``).
    """

    gamma: float = DEFAULT_GAMMA
    tag: ClassVar[str] = "cylinder"
    param_name: ClassVar[str] = "phi"
    maslov: ClassVar[tuple[int, int]] = (0, 4)

    def __post_init__(self):
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise DomainError(f"gamma must be positive and finite, got {self.gamma}")

    def check_key(self, key: LevelKey) -> None:
        if key.model != self.tag:
            raise DomainError(f"key {key} does not belong to model {self.tag!r}")
        if int(key.n1) != key.n1 or int(key.n2) != key.n2 or key.n2 < 0:
            raise DomainError(f"cylinder needs integer n1 and integer n2 >= 0, got {key}")

    def check_param(self, phi) -> None:
        if not math.isfinite(phi):
            raise DomainError(f"flux must be finite, got {phi}")

    def key(self, n1: int, n2: int) -> LevelKey:
        k = LevelKey(self.tag, int(n1), int(n2))
        self.check_key(k)
        return k

    def h(self, n1, n2, phi):
        return self.gamma * (n1 - phi) ** 2 + (n2 + 1) ** 2

    def dh(self, n1, n2, phi):
        return -2.0 * self.gamma * (n1 - phi)

    def i2_omega2(self, eps: float, i1: float, phi: float) -> tuple[float, float]:
        i2 = _sqrt_shell(eps - self.gamma * (i1 - phi) ** 2, eps)
        return i2, 2.0 * i2

    def shell_range(self, eps, phi):
        r = math.sqrt(eps / self.gamma)
        return phi - r, phi + r

    def omega2(self, eps, i1, phi):
        return 2.0 * np.sqrt(np.maximum(eps - self.gamma * (i1 - phi) ** 2, 0.0))

    def shell_slope(self, eps, i1, phi):
        return -2.0 * self.gamma * (i1 - phi)

    def shell_slope_di1(self, eps, i1, phi):
        return np.full_like(np.asarray(i1, dtype=float), -2.0 * self.gamma)

    def shell_slope_inverse(self, eps, s, phi):
        return phi - s / (2.0 * self.gamma)

    def slope_scale(self, eps, phi):
        # v = sqrt(gamma/eps) |I1 -/+ I1'|, i.e. V / (2 sqrt(gamma eps))
        return 2.0 * math.sqrt(self.gamma * eps)


BilliardModel = RectBilliard | CylinderBilliard


def get_model(tag: str, gamma: float = DEFAULT_GAMMA) -> BilliardModel:
    """Model instance from its tag (``"rect"`` or ``"cylinder"``)."""
    if tag == "rect":
        return RectBilliard()
    if tag == "cylinder":
        return CylinderBilliard(gamma)
    raise DomainError(f"unknown model {tag!r}")


def energy(model: BilliardModel, key: LevelKey, mu: float) -> float:
    """Exact eigenenergy of level ``key`` at parameter ``mu``."""
    model.check_key(key)
    model.check_param(mu)
    return float(model.h(key.n1, key.n2, mu))


def slope(model: BilliardModel, key: LevelKey, mu: float) -> float:
    """Parametric velocity ``d(eps)/d(mu)`` of level ``key``."""
    model.check_key(key)
    model.check_param(mu)
    return float(model.dh(key.n1, key.n2, mu))


def frequencies_and_actions(model: BilliardModel, energy: float, i1: float, mu: float):
    """Second action ``I2`` and frequency ``omega2`` on the shell ``h = energy``.

    Raises
    ------
    OffShellError
        If ``(i1, mu)`` cannot reach the energy ``energy``.
    """
    model.check_param(mu)
    return model.i2_omega2(energy, i1, mu)
