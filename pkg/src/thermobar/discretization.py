"""Grids, staggered summation-by-parts operators and the global DOF layout.

Displacement and velocity live on the nodes of the whole bar, with a single
shared node at each interface and the two clamped end nodes eliminated.
Strain, stress and temperature live on the cells of each segment; the heat
flux lives on the interior nodes of the thermoelastic segment (it vanishes at
both interfaces).  With this staggering every integration by parts used in
the energy balance holds exactly at the discrete level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (ConstraintViolationError, LayoutMismatchError, ShapeMismatchError,
                     TooFewCellsError)
from .model import ModelConfig

CONSTRAINT_TOL = 1e-12


@dataclass(frozen=True)
class SegmentGrid:
    x0: float
    x1: float
    n: int

    @property
    def h(self) -> float:
        return (self.x1 - self.x0) / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.x0, self.x1, self.n + 1)

    @property
    def cells(self) -> np.ndarray:
        return self.x0 + (np.arange(self.n) + 0.5) * self.h


@dataclass(frozen=True, eq=False)
class StaggeredSbp:
    """Node-to-cell and cell-to-node difference pair on one segment.

    ``Dp`` maps node values to cell-centred differences, ``Dm`` maps cell
    values to node differences (zero rows at both end nodes).  With node
    weights ``Hn`` (trapezoid) and cell weights ``Hc`` (midpoint) the pair
    satisfies ``diag(Hc) Dp + (diag(Hn) Dm)^T = B`` where ``B`` only couples
    the first/last cell to the first/last node.
    """

    Dp: np.ndarray
    Dm: np.ndarray
    Hn: np.ndarray
    Hc: np.ndarray
    B: np.ndarray

    def sbp_residual(self) -> float:
        lhs = self.Hc[:, None] * self.Dp + (self.Hn[:, None] * self.Dm).T
        return float(np.abs(lhs - self.B).max())


def sbp_operator(grid: SegmentGrid) -> StaggeredSbp:
    n, h = grid.n, grid.h
    cells = np.arange(n)
    Dp = np.zeros((n, n + 1))
    Dp[cells, cells] = -1.0 / h
    Dp[cells, cells + 1] = 1.0 / h

    Dm = np.zeros((n + 1, n))
    inner = np.arange(1, n)
    Dm[inner, inner] = 1.0 / h
    Dm[inner, inner - 1] = -1.0 / h

    Hn = np.full(n + 1, h)
    Hn[[0, -1]] = h / 2
    Hc = np.full(n, h)

    B = np.zeros((n, n + 1))
    B[0, 0] = -1.0
    B[-1, -1] = 1.0
    return StaggeredSbp(Dp=Dp, Dm=Dm, Hn=Hn, Hc=Hc, B=B)


@dataclass(frozen=True)
class DofLayout:
    """Offsets of each field inside the flat state vector.

    Order: displacement ``w1``, velocity ``w2``, temperature ``theta`` and,
    under Cattaneo's law, heat flux ``q``.
    """

    n1: int
    n2: int
    n3: int
    cattaneo: bool

    @property
    def n_nodes(self) -> int:
        """Free displacement nodes: all bar nodes except the two clamped ends."""
        return self.n1 + self.n2 + self.n3 - 1

    @property
    def n_theta(self) -> int:
        return self.n2

    @property
    def n_q(self) -> int:
        return self.n2 - 1 if self.cattaneo else 0

    @property
    def N(self) -> int:
        return 2 * self.n_nodes + self.n_theta + self.n_q

    @property
    def w1(self) -> slice:
        return slice(0, self.n_nodes)

    @property
    def w2(self) -> slice:
        return slice(self.n_nodes, 2 * self.n_nodes)

    @property
    def theta(self) -> slice:
        start = 2 * self.n_nodes
        return slice(start, start + self.n_theta)

    @property
    def q(self) -> slice:
        start = 2 * self.n_nodes + self.n_theta
        return slice(start, start + self.n_q)

    def segment_nodes(self, seg: int) -> slice:
        """Slice of the full-bar node array (ends included) covering segment ``seg``."""
        starts = (0, self.n1, self.n1 + self.n2)
        sizes = (self.n1, self.n2, self.n3)
        return slice(starts[seg], starts[seg] + sizes[seg] + 1)

    def check(self, U) -> np.ndarray:
        U = np.asarray(U)
        if U.ndim != 1 or U.shape[0] != self.N:
            raise LayoutMismatchError(f"state of shape {U.shape} does not match layout size {self.N}")
        return U


@dataclass
class Fields:
    """Per-field samples of a state, segment by segment.

    ``u1``/``u2`` live on the middle-segment nodes, ``v1_*``/``v2_*`` on the
    outer-segment nodes, ``theta`` on the middle cells and ``q`` on the
    middle nodes (``None`` under Fourier's law).
    """

    u1: np.ndarray
    v1_left: np.ndarray
    v1_right: np.ndarray
    theta: np.ndarray
    q: np.ndarray | None
    u2: np.ndarray
    v2_left: np.ndarray
    v2_right: np.ndarray

    @classmethod
    def zeros(cls, disc: "Discretization", dtype=float) -> "Fields":
        n1, n2, n3 = disc.layout.n1, disc.layout.n2, disc.layout.n3
        z = lambda n: np.zeros(n, dtype=dtype)  # noqa: E731
        return cls(u1=z(n2 + 1), v1_left=z(n1 + 1), v1_right=z(n3 + 1), theta=z(n2),
                   q=z(n2 + 1) if disc.cfg.cattaneo else None,
                   u2=z(n2 + 1), v2_left=z(n1 + 1), v2_right=z(n3 + 1))


@dataclass(frozen=True, eq=False)
class Discretization:
    cfg: ModelConfig
    grids: tuple[SegmentGrid, SegmentGrid, SegmentGrid]
    ops: tuple[StaggeredSbp, StaggeredSbp, StaggeredSbp]
    layout: DofLayout
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def middle(self) -> SegmentGrid:
        return self.grids[1]

    def wave_speed_sq(self, seg: int) -> float:
        return self.cfg.a if seg == 1 else self.cfg.b

    @cached_property
    def x_nodes(self) -> np.ndarray:
        """Coordinates of all bar nodes, clamped ends included."""
        g1, g2, g3 = self.grids
        return np.concatenate([g1.nodes, g2.nodes[1:], g3.nodes[1:]])

    @cached_property
    def x_free(self) -> np.ndarray:
        return self.x_nodes[1:-1]

    @cached_property
    def restrictions(self) -> tuple[np.ndarray, ...]:
        """0/1 matrices mapping free node values to each segment's local nodes."""
        nw = self.layout.n_nodes
        mats = []
        for seg in range(3):
            sl = self.layout.segment_nodes(seg)
            full = np.arange(sl.start, sl.stop)
            P = np.zeros((full.size, nw))
            keep = (full >= 1) & (full <= nw)
            P[np.flatnonzero(keep), full[keep] - 1] = 1.0
            mats.append(P)
        return tuple(mats)

    @cached_property
    def node_weights(self) -> np.ndarray:
        """Trapezoid weights of the free nodes, summed at shared interface nodes."""
        return sum(P.T @ op.Hn for P, op in zip(self.restrictions, self.ops))

    @cached_property
    def strain_operators(self) -> tuple[np.ndarray, ...]:
        """Per segment, the map from free displacement DOF to cell strains."""
        return tuple(op.Dp @ P for op, P in zip(self.ops, self.restrictions))

    @cached_property
    def stiffness(self) -> np.ndarray:
        """Elastic energy form: sum over segments of c * G^T diag(Hc) G."""
        nw = self.layout.n_nodes
        K = np.zeros((nw, nw))
        for seg, (G, op) in enumerate(zip(self.strain_operators, self.ops)):
            K += self.wave_speed_sq(seg) * G.T @ (op.Hc[:, None] * G)
        return K

    @cached_property
    def flux_extension(self) -> np.ndarray:
        """Extend-by-zero map from interior middle nodes to all middle nodes."""
        n2 = self.layout.n2
        E = np.zeros((n2 + 1, n2 - 1))
        E[1:-1, :] = np.eye(n2 - 1)
        return E

    @cached_property
    def gram(self) -> np.ndarray:
        """Energy Gram matrix M with ``<U, V>_H = U^* M V``."""
        lay, mid = self.layout, self.ops[1]
        M = np.zeros((lay.N, lay.N))
        M[lay.w1, lay.w1] = self.stiffness
        M[lay.w2, lay.w2] = np.diag(self.node_weights)
        M[lay.theta, lay.theta] = np.diag(mid.Hc)
        if self.cfg.cattaneo:
            M[lay.q, lay.q] = self.cfg.tau * np.diag(mid.Hn[1:-1])
        return M


def build_discretization(cfg: ModelConfig, n1: int, n2: int, n3: int) -> Discretization:
    for name, n in (("n1", n1), ("n2", n2), ("n3", n3)):
        if int(n) != n or n < 2:
            raise TooFewCellsError(f"{name} must be an integer >= 2, got {n}")
    n1, n2, n3 = int(n1), int(n2), int(n3)
    grids = (SegmentGrid(0.0, cfg.L1, n1), SegmentGrid(cfg.L1, cfg.L2, n2),
             SegmentGrid(cfg.L2, cfg.L3, n3))
    ops = tuple(sbp_operator(g) for g in grids)
    layout = DofLayout(n1, n2, n3, cfg.cattaneo)
    return Discretization(cfg=cfg, grids=grids, ops=ops, layout=layout)


def _expect(arr, size, name):
    arr = np.asarray(arr)
    if arr.shape != (size,):
        raise ShapeMismatchError(f"{name}: expected shape ({size},), got {arr.shape}")
    return arr


def _agree(x, y, what):
    scale = max(1.0, abs(x), abs(y))
    if abs(x - y) > CONSTRAINT_TOL * scale:
        raise ConstraintViolationError(f"{what}: {x!r} != {y!r}")


def pack(fields: Fields, disc: Discretization) -> np.ndarray:
    """Flatten per-field samples into the global state vector.

    Raises :class:`ConstraintViolationError` if the samples violate the
    clamped ends, the vanishing flux at the interfaces or interface
    continuity.
    """
    lay = disc.layout
    n1, n2, n3 = lay.n1, lay.n2, lay.n3
    u1 = _expect(fields.u1, n2 + 1, "u1")
    u2 = _expect(fields.u2, n2 + 1, "u2")
    v1l, v1r = _expect(fields.v1_left, n1 + 1, "v1_left"), _expect(fields.v1_right, n3 + 1, "v1_right")
    v2l, v2r = _expect(fields.v2_left, n1 + 1, "v2_left"), _expect(fields.v2_right, n3 + 1, "v2_right")
    theta = _expect(fields.theta, n2, "theta")

    for u, vl, vr, name in ((u1, v1l, v1r, "displacement"), (u2, v2l, v2r, "velocity")):
        _agree(vl[0], 0, f"{name} at x=0")
        _agree(vr[-1], 0, f"{name} at x=L3")
        _agree(u[0], vl[-1], f"{name} continuity at L1")
        _agree(u[-1], vr[0], f"{name} continuity at L2")

    dtype = np.result_type(u1, u2, v1l, v1r, v2l, v2r, theta, float)
    U = np.zeros(lay.N, dtype=dtype)
    U[lay.w1] = np.concatenate([v1l[1:], u1[1:], v1r[1:-1]])
    U[lay.w2] = np.concatenate([v2l[1:], u2[1:], v2r[1:-1]])
    U[lay.theta] = theta
    if disc.cfg.cattaneo:
        if fields.q is None:
            raise ShapeMismatchError("q is required under Cattaneo's law")
        q = _expect(fields.q, n2 + 1, "q")
        _agree(q[0], 0, "heat flux at L1")
        _agree(q[-1], 0, "heat flux at L2")
        U[lay.q] = q[1:-1]
    elif fields.q is not None:
        raise ShapeMismatchError("q must be None under Fourier's law")
    return U


def unpack(U, disc: Discretization) -> Fields:
    lay = disc.layout
    U = lay.check(U)
    zero = np.zeros(1, dtype=U.dtype)

    def split(free):
        full = np.concatenate([zero, free, zero])
        return tuple(full[lay.segment_nodes(s)].copy() for s in range(3))

    v1l, u1, v1r = split(U[lay.w1])
    v2l, u2, v2r = split(U[lay.w2])
    q = np.concatenate([zero, U[lay.q], zero]) if disc.cfg.cattaneo else None
    return Fields(u1=u1, v1_left=v1l, v1_right=v1r, theta=U[lay.theta].copy(), q=q,
                  u2=u2, v2_left=v2l, v2_right=v2r)


def h_inner_product(U, V, disc: Discretization):
    """Discrete energy inner product ``<U, V>_H`` (conjugate-linear in ``U``)."""
    U = disc.layout.check(U)
    V = disc.layout.check(V)
    return np.conj(U) @ (disc.gram @ V)
