"""Stationary states, kernel/range splitting and the range condition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretization import Fields, pack, unpack
from .generator import GeneratorSystem
from .model import kernel_functions


def discrete_kernel(sys: GeneratorSystem) -> np.ndarray:
    """Packed samples of the stationary state ``(zeta1, zeta2, zeta3)`` with zero velocity and flux."""
    if "Z" not in sys._cache:
        disc = sys.disc
        kf = kernel_functions(sys.cfg)
        f = Fields.zeros(disc)
        g1, g2, g3 = disc.grids
        f.v1_left = kf.zeta2(g1.nodes)
        f.u1 = kf.zeta1(g2.nodes)
        f.v1_right = kf.zeta2(g3.nodes)
        # pin the end values exactly; the affine formula leaves round-off at x = L3
        f.v1_left[0] = f.v1_right[-1] = 0.0
        f.v1_left[-1], f.v1_right[0] = f.u1[0], f.u1[-1]
        f.theta = np.full(g2.n, kf.zeta3)
        sys._cache["Z"] = pack(f, disc)
    return sys._cache["Z"].copy()


def _inner(U, V, sys):
    return np.conj(U) @ (sys.M @ V)


@dataclass(frozen=True)
class EquilibriumDecomposition:
    W0: np.ndarray
    V0: np.ndarray
    coeff: complex | float


def project(U0, sys: GeneratorSystem) -> EquilibriumDecomposition:
    """Split ``U0`` M-orthogonally into its kernel part ``gamma Z`` and its range part."""
    U0 = sys.disc.layout.check(U0)
    Z = discrete_kernel(sys)
    gamma = _inner(Z, U0, sys) / _inner(Z, Z, sys)
    if np.isrealobj(U0):
        gamma = float(np.real(gamma))
    W0 = gamma * Z
    return EquilibriumDecomposition(W0=W0, V0=U0 - W0, coeff=gamma)


def range_condition(U0, sys: GeneratorSystem):
    """Integral of temperature over the middle segment plus ``m (u(L2) - u(L1))``.

    Temperature is cell-centred, so the integral uses the same midpoint
    weights as the Gram matrix.
    """
    f = unpack(U0, sys.disc)
    value = sys.disc.ops[1].Hc @ f.theta + sys.cfg.m * (f.u1[-1] - f.u1[0])
    return value.item() if hasattr(value, "item") else value


@dataclass(frozen=True)
class EquivalenceReport:
    inner_with_kernel: complex | float
    zeta3_times_condition: complex | float
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def as_dict(self) -> dict:
        def num(z):
            return float(np.real(z)) if np.isreal(z) else [float(np.real(z)), float(np.imag(z))]
        return {"inner_with_kernel": num(self.inner_with_kernel),
                "zeta3_times_condition": num(self.zeta3_times_condition),
                "residual": self.residual, "tolerance": self.tolerance,
                "status": "pass" if self.passed else "fail"}


def check_equivalence(U0, sys: GeneratorSystem, rtol: float = 1e-12) -> EquivalenceReport:
    """Compare ``<U0, Z>_M`` with ``zeta3 * range_condition(U0)``.

    The two agree identically, so ``U0`` lies in the range of the generator
    exactly when the range condition vanishes.
    """
    U0 = sys.disc.layout.check(U0)
    Z = discrete_kernel(sys)
    lhs = _inner(Z, U0, sys)
    rhs = kernel_functions(sys.cfg).zeta3 * range_condition(U0, sys)
    norm_u = np.sqrt(abs(_inner(U0, U0, sys)))
    norm_z = np.sqrt(abs(_inner(Z, Z, sys)))
    if np.isrealobj(U0):
        lhs = float(lhs)
    return EquivalenceReport(lhs, rhs, float(abs(lhs - rhs)), float(rtol * max(norm_u * norm_z, 1e-300)))
