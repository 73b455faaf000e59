"""Preset families of initial data on a discretization."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Union

import numpy as np
from scipy.ndimage import uniform_filter1d

from .discretization import Discretization, Fields, pack
from .equilibria import discrete_kernel, project
from .errors import InconsistentCustomError, SeedlessRandomError
from .generator import GeneratorSystem, assemble_generator
from .model import ModelConfig


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class ConstantTheta:
    c: float = 1.0


@dataclass(frozen=True)
class GaussianDisplacement:
    """Gaussian bump in displacement, minus the chord through its end values so the ends stay clamped."""

    center: float | None = None
    width: float | None = None
    amplitude: float = 1.0


@dataclass(frozen=True)
class RandomSeeded:
    seed: int | None = None
    amplitude: float = 1.0


@dataclass(frozen=True)
class KernelVector:
    scale: float = 1.0


@dataclass(frozen=True)
class Custom:
    """Pointwise samplers keyed by ``u1, u2`` (middle displacement/velocity),
    ``v1, v2`` (outer displacement/velocity), ``theta`` and ``q``.

    Missing samplers mean zero.  Outer values at ``L1`` and ``L2`` are
    overwritten by the middle values, so continuity always holds.
    """

    samplers: Mapping[str, Callable] = field(default_factory=dict)


Preset = Union[Zero, ConstantTheta, GaussianDisplacement, RandomSeeded, KernelVector, Custom]


@dataclass(frozen=True)
class InitialDataSpec:
    preset: Preset = field(default_factory=Zero)
    well_prepared: bool = False


_CUSTOM_KEYS = {"u1", "u2", "v1", "v2", "theta", "q"}
_END_TOL = 1e-12


def _from_full_bar(disc: Discretization, disp, vel, theta, q) -> np.ndarray:
    """Pack full-bar node arrays of displacement/velocity plus middle theta and q."""
    lay = disc.layout
    f = Fields.zeros(disc)
    f.v1_left, f.u1, f.v1_right = (disp[lay.segment_nodes(s)] for s in range(3))
    f.v2_left, f.u2, f.v2_right = (vel[lay.segment_nodes(s)] for s in range(3))
    f.theta = theta
    f.q = q if disc.cfg.cattaneo else None
    return pack(f, disc)


def _random(disc: Discretization, preset: RandomSeeded) -> np.ndarray:
    if preset.seed is None:
        raise SeedlessRandomError("RandomSeeded initial data need an explicit seed")
    rng = np.random.default_rng(preset.seed)
    n_full = disc.x_nodes.size
    n2 = disc.layout.n2

    def smooth(n):
        return uniform_filter1d(rng.standard_normal(n), size=3, mode="nearest")

    disp, vel = smooth(n_full), smooth(n_full)
    theta = smooth(n2)
    q = smooth(n2 + 1)
    disp[[0, -1]] = vel[[0, -1]] = 0.0
    q[[0, -1]] = 0.0
    return preset.amplitude * _from_full_bar(disc, disp, vel, theta, q)


def _gaussian(disc: Discretization, p: GaussianDisplacement) -> np.ndarray:
    cfg = disc.cfg
    center = 0.5 * (cfg.L1 + cfg.L2) if p.center is None else p.center
    width = 0.1 * cfg.L3 if p.width is None else p.width
    x = disc.x_nodes
    g = p.amplitude * np.exp(-(((x - center) / width) ** 2))
    g -= g[0] + (g[-1] - g[0]) * x / cfg.L3
    g[[0, -1]] = 0.0
    zeros = np.zeros_like(x)
    return _from_full_bar(disc, g, zeros, np.zeros(disc.layout.n2), np.zeros(disc.layout.n2 + 1))


def _custom(disc: Discretization, p: Custom) -> np.ndarray:
    unknown = set(p.samplers) - _CUSTOM_KEYS
    if unknown:
        raise InconsistentCustomError(f"unknown custom sampler(s): {sorted(unknown)}")
    if "q" in p.samplers and not disc.cfg.cattaneo:
        raise InconsistentCustomError("a heat-flux sampler was given under Fourier's law")

    def sample(key, x):
        fn = p.samplers.get(key)
        vals = np.zeros_like(x) if fn is None else np.asarray(np.broadcast_to(fn(x), x.shape), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise InconsistentCustomError(f"sampler {key!r} returned non-finite values")
        return vals.copy()

    g1, g2, g3 = disc.grids
    f = Fields.zeros(disc)
    for u_key, v_key, u_attr, left, right in (("u1", "v1", "u1", "v1_left", "v1_right"),
                                               ("u2", "v2", "u2", "v2_left", "v2_right")):
        u = sample(u_key, g2.nodes)
        vl, vr = sample(v_key, g1.nodes), sample(v_key, g3.nodes)
        for val, where in ((vl[0], "x=0"), (vr[-1], "x=L3")):
            if abs(val) > _END_TOL:
                raise InconsistentCustomError(f"{v_key} must vanish at {where}, got {val}")
        vl[0] = vr[-1] = 0.0
        vl[-1], vr[0] = u[0], u[-1]
        setattr(f, u_attr, u)
        setattr(f, left, vl)
        setattr(f, right, vr)
    f.theta = sample("theta", g2.cells)
    if disc.cfg.cattaneo:
        q = sample("q", g2.nodes)
        for val, where in ((q[0], "L1"), (q[-1], "L2")):
            if abs(val) > _END_TOL:
                raise InconsistentCustomError(f"q must vanish at {where}, got {val}")
        q[[0, -1]] = 0.0
        f.q = q
    return pack(f, disc)


def make_initial_state(cfg: ModelConfig, disc: Discretization, spec: InitialDataSpec,
                       sys: GeneratorSystem | None = None) -> np.ndarray:
    """Sample the preset on ``disc``; if well prepared, remove the kernel component."""
    p = spec.preset
    N = disc.layout.N
    if isinstance(p, Zero):
        U = np.zeros(N)
    elif isinstance(p, ConstantTheta):
        U = np.zeros(N)
        U[disc.layout.theta] = p.c
    elif isinstance(p, GaussianDisplacement):
        U = _gaussian(disc, p)
    elif isinstance(p, RandomSeeded):
        U = _random(disc, p)
    elif isinstance(p, Custom):
        U = _custom(disc, p)
    elif isinstance(p, KernelVector):
        sys = sys or assemble_generator(cfg, disc)
        U = p.scale * discrete_kernel(sys)
    else:
        raise TypeError(f"unknown preset {p!r}")

    if spec.well_prepared:
        sys = sys or assemble_generator(cfg, disc)
        U = project(U, sys).V0
    return U
