"""Discrete semigroup generator, energy and the dissipation identity.

``assemble_generator`` returns ``A``, the Gram matrix ``M`` and a symmetric
positive semidefinite ``Dq`` with ``M A + A^T M = -2 Dq`` holding to
round-off.  ``Dq`` is the heat dissipation (flux under Cattaneo's law,
temperature gradient under Fourier's law) plus a small grid-scale
hyperviscosity on the velocity, which damps the non-physical sawtooth
modes of the staggered wave operator without touching resolved modes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .discretization import Discretization
from .errors import AssemblyError
from .model import Law, ModelConfig

DEFAULT_VISCOSITY = 0.01
STRUCTURE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class GeneratorSystem:
    A: np.ndarray
    M: np.ndarray
    Dq: np.ndarray
    Dq_heat: np.ndarray
    Dq_visc: np.ndarray
    law: Law
    disc: Discretization
    cfg: ModelConfig
    viscosity: float
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def N(self) -> int:
        return self.A.shape[0]

    @property
    def E_tau(self) -> np.ndarray | None:
        """Matrix form of the relaxation operator: 1/tau on the flux block."""
        if not self.cfg.cattaneo:
            return None
        E = np.zeros_like(self.A)
        lay = self.disc.layout
        E[lay.q, lay.q] = np.eye(lay.n_q) / self.cfg.tau
        return E

    @property
    def scale(self) -> float:
        """Cheap infinity-norm scale of ``A`` used for relative tolerances."""
        return float(np.abs(self.A).sum(axis=1).max())


def _hyperviscosity(disc: Discretization, viscosity: float, tau: float | None) -> np.ndarray:
    """Fourth-order velocity damping form ``nu * Ku^T W Ku`` with W ~ h^3.

    Under Cattaneo's law ``nu`` is capped so that the damping rate never
    exceeds ``1/tau``, keeping the field of values inside the strip
    ``[-1/tau, 0]``.
    """
    nw = disc.layout.n_nodes
    Ku = np.zeros((nw, nw))
    for G, op in zip(disc.strain_operators, disc.ops):
        Ku += G.T @ (op.Hc[:, None] * G)
    Hg = disc.node_weights
    W = Hg ** 3
    form = Ku.T @ (W[:, None] * Ku)
    if viscosity <= 0:
        return np.zeros_like(form)
    if tau is not None:
        s = 1.0 / np.sqrt(Hg)
        rate = np.linalg.eigvalsh(s[:, None] * form * s[None, :]).max()
        viscosity = min(viscosity, 1.0 / (tau * rate))
    return viscosity * form


def assemble_generator(cfg: ModelConfig, disc: Discretization,
                       viscosity: float = DEFAULT_VISCOSITY) -> GeneratorSystem:
    if disc.cfg != cfg:
        raise AssemblyError("discretization was built for a different configuration")
    lay = disc.layout
    N, nw = lay.N, lay.n_nodes
    mid = disc.ops[1]
    G2 = disc.strain_operators[1]
    Hg = disc.node_weights
    E = disc.flux_extension
    Hq = mid.Hn[1:-1]
    # cell-to-interior-node difference, the negative adjoint of Dp E
    Dm_int = -(mid.Dp @ E).T * mid.Hc[None, :] / Hq[:, None]
    m, k = cfg.m, cfg.k

    A = np.zeros((N, N))
    Dq_heat = np.zeros((N, N))
    Dq_visc = np.zeros((N, N))
    A[lay.w1, lay.w2] = np.eye(nw)
    A[lay.w2, lay.w1] = -disc.stiffness / Hg[:, None]
    A[lay.w2, lay.theta] = m * (G2.T * mid.Hc[None, :]) / Hg[:, None]
    A[lay.theta, lay.w2] = -m * G2

    Kv = _hyperviscosity(disc, viscosity, cfg.tau)
    A[lay.w2, lay.w2] = -Kv / Hg[:, None]
    Dq_visc[lay.w2, lay.w2] = Kv

    if cfg.cattaneo:
        tau = cfg.tau
        A[lay.theta, lay.q] = -k * (mid.Dp @ E)
        A[lay.q, lay.theta] = -(k / tau) * Dm_int
        A[lay.q, lay.q] = -np.eye(lay.n_q) / tau
        Dq_heat[lay.q, lay.q] = np.diag(Hq)
    else:
        A[lay.theta, lay.theta] = k ** 2 * (mid.Dp @ E) @ Dm_int
        Dq_heat[lay.theta, lay.theta] = k ** 2 * Dm_int.T @ (Hq[:, None] * Dm_int)

    M = disc.gram
    if A.shape != M.shape or M.shape != (N, N):
        raise AssemblyError(f"operator shapes {A.shape} and {M.shape} disagree with N={N}")
    return GeneratorSystem(A=A, M=M, Dq=Dq_heat + Dq_visc, Dq_heat=Dq_heat, Dq_visc=Dq_visc,
                           law=cfg.law, disc=disc, cfg=cfg, viscosity=viscosity)


def energy(U, sys: GeneratorSystem) -> float:
    U = sys.disc.layout.check(U)
    return float(0.5 * np.real(np.conj(U) @ (sys.M @ U)))


def dissipation_rate(U, sys: GeneratorSystem) -> float:
    """``-U^* Dq U``; equals ``Re(U^* M A U)`` to round-off."""
    U = sys.disc.layout.check(U)
    return float(-np.real(np.conj(U) @ (sys.Dq @ U)))


@dataclass(frozen=True)
class Check:
    name: str
    status: str  # "pass", "fail" or "skipped"
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def as_dict(self) -> dict:
        return {"name": self.name, "status": self.status,
                "residual": self.residual, "tolerance": self.tolerance}


def _check(name, residual, tol) -> Check:
    return Check(name, "pass" if residual <= tol else "fail", float(residual), float(tol))


@dataclass(frozen=True)
class StructureReport:
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def __getitem__(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def verify_structure(sys: GeneratorSystem) -> StructureReport:
    """Check the dissipation identity, the adjoint identity, ``M > 0`` and ``Dq >= 0``."""
    A, M, Dq = sys.A, sys.M, sys.Dq
    MA = M @ A
    ref = np.abs(MA).max()
    checks = [_check("dissipation_identity", np.abs(MA + MA.T + 2 * Dq).max() / ref, STRUCTURE_TOL)]

    if sys.cfg.cattaneo:
        # A + E = -M^{-1} A^T M - E, with E including the velocity damping term
        Et = sys.E_tau + np.linalg.solve(M, sys.Dq_visc)
        lhs = A + Et
        rhs = -np.linalg.solve(M, A.T @ M) - Et
        scale = np.abs(A).max()
        checks.append(_check("adjoint_identity", np.abs(lhs - rhs).max() / scale, 1e-10))
    else:
        checks.append(Check("adjoint_identity", "skipped", float("nan"), float("nan")))

    mmin = np.linalg.eigvalsh(M).min()
    checks.append(Check("gram_positive", "pass" if mmin > 0 else "fail", float(mmin), 0.0))
    dmin = np.linalg.eigvalsh(Dq).min()
    tol = STRUCTURE_TOL * max(np.abs(Dq).max(), 1.0)
    checks.append(Check("dissipation_semidefinite", "pass" if dmin >= -tol else "fail",
                        float(dmin), float(-tol)))
    return StructureReport(tuple(checks))
