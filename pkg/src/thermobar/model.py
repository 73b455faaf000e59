"""Model parameters and the closed-form stationary states of the bar.

The bar occupies ``[0, L3]``: elastic on ``[0, L1]`` and ``[L2, L3]`` with
squared wave speed ``b``, thermoelastic on ``[L1, L2]`` with squared wave
speed ``a``, coupling ``m`` and heat conduction constant ``k``.  Heat flux
follows either Cattaneo's law (relaxation time ``tau``) or Fourier's law.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .errors import BadOrderingError, ConfigError, MissingKeyError, NonPositiveParameterError


class Law(enum.Enum):
    CATTANEO = "cattaneo"
    FOURIER = "fourier"

    @classmethod
    def parse(cls, value) -> "Law":
        if isinstance(value, Law):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ConfigError(f"unknown heat conduction law {value!r}") from None


@dataclass(frozen=True)
class ModelConfig:
    L1: float
    L2: float
    L3: float
    a: float
    b: float
    m: float
    k: float
    tau: float | None
    law: Law = Law.CATTANEO

    @property
    def cattaneo(self) -> bool:
        return self.law is Law.CATTANEO

    @property
    def middle_length(self) -> float:
        return self.L2 - self.L1

    def as_dict(self) -> dict[str, Any]:
        return {
            "L1": self.L1, "L2": self.L2, "L3": self.L3,
            "a": self.a, "b": self.b, "m": self.m, "k": self.k,
            "tau": self.tau, "law": self.law.value,
        }


_REQUIRED = ("L1", "L2", "L3", "a", "b", "m", "k", "law")


def validate_config(raw: Mapping[str, Any]) -> ModelConfig:
    """Build a :class:`ModelConfig` from a key/value mapping.

    ``tau`` is required (and must be positive) only under Cattaneo's law;
    Fourier's law is a separate system, not the ``tau = 0`` case.
    """
    missing = [key for key in _REQUIRED if key not in raw]
    law = Law.parse(raw["law"]) if "law" in raw else None
    if law is Law.CATTANEO and "tau" not in raw:
        missing.append("tau")
    if missing:
        raise MissingKeyError(f"missing configuration keys: {', '.join(missing)}")

    values = {}
    for key in ("L1", "L2", "L3", "a", "b", "m", "k"):
        try:
            values[key] = float(raw[key])
        except (TypeError, ValueError):
            raise ConfigError(f"{key} must be a number, got {raw[key]!r}") from None
        if not np.isfinite(values[key]):
            raise ConfigError(f"{key} must be finite")

    tau = None
    if law is Law.CATTANEO:
        try:
            tau = float(raw["tau"])
        except (TypeError, ValueError):
            raise ConfigError(f"tau must be a number, got {raw['tau']!r}") from None
        if not tau > 0:
            raise NonPositiveParameterError(
                "tau must be > 0 under Cattaneo's law; use law = fourier for the tau -> 0 limit")

    for key in ("a", "b", "m", "k"):
        if not values[key] > 0:
            raise NonPositiveParameterError(f"{key} must be > 0, got {values[key]}")
    if not 0 < values["L1"] < values["L2"] < values["L3"]:
        raise BadOrderingError(
            f"need 0 < L1 < L2 < L3, got L1={values['L1']}, L2={values['L2']}, L3={values['L3']}")

    return ModelConfig(tau=tau, law=law, **values)


@dataclass(frozen=True)
class KernelFunctions:
    """Stationary state ``(zeta1, zeta2, zeta3)`` spanning the generator kernel.

    ``zeta1`` is the displacement on the thermoelastic part, ``zeta2`` the
    displacement on the elastic parts and ``zeta3`` the constant temperature.
    """

    slope1: float   # zeta1(x) = slope1 * x + 1
    slope2: float   # zeta2'(x) on both elastic parts
    offset2: float  # zeta2(x) = slope2 * x - offset2 on [L2, L3]
    zeta3: float
    L1: float
    L2: float
    L3: float

    def zeta1(self, x):
        return self.slope1 * np.asarray(x, dtype=float) + 1.0

    def zeta2(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= self.L1, self.slope2 * x, self.slope2 * x - self.offset2)

    def displacement(self, x):
        """Kernel displacement on the whole bar (zeta2 outside, zeta1 inside)."""
        x = np.asarray(x, dtype=float)
        inside = (x >= self.L1) & (x <= self.L2)
        return np.where(inside, self.zeta1(x), self.zeta2(x))


def kernel_functions(cfg: ModelConfig) -> KernelFunctions:
    L1, L2, L3 = cfg.L1, cfg.L2, cfg.L3
    return KernelFunctions(
        slope1=(L2 - L1 - L3) / (L1 * L3),
        slope2=(L2 - L1) / (L1 * L3),
        offset2=(L2 - L1) / L1,
        zeta3=(cfg.a * (L2 - L1 - L3) - cfg.b * (L2 - L1)) / (cfg.m * L1 * L3),
        L1=L1, L2=L2, L3=L3,
    )


REFERENCE_CONFIG = {"L1": 1.0, "L2": 2.0, "L3": 3.0, "a": 1.0, "b": 1.0,
                    "m": 1.0, "k": 1.0, "tau": 1.0, "law": "cattaneo"}


def reference_config(law: Law | str = Law.CATTANEO, **overrides) -> ModelConfig:
    """The reference configuration R0 (unit geometry and unit constants)."""
    raw = dict(REFERENCE_CONFIG, law=Law.parse(law).value)
    raw.update(overrides)
    return validate_config(raw)
