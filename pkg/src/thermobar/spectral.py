"""Eigenvalues, deflation to the range subspace and resolvent norms along the imaginary axis.

Every norm here is the energy norm.  It is made Euclidean once, through the
Cholesky factor ``M = L L^T`` and the similarity ``B = L^T A L^{-T}``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize_scalar

from .equilibria import discrete_kernel
from .errors import BadRangeError, EigenFailureError, KernelMismatchError, NonNegativeAbscissaError
from .generator import GeneratorSystem

ZERO_RTOL = 1e-10
STRIP_RTOL = 1e-10
KERNEL_TOL = 1e-10


def _inf_norm(X) -> float:
    return float(np.abs(X).sum(axis=1).max())


def _eig(A, vectors=False):
    try:
        return sla.eig(A, right=vectors, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenFailureError(f"eigenvalue iteration failed: {exc}") from exc


def _sin_angle(v, z) -> float:
    v = v / np.linalg.norm(v)
    z = z / np.linalg.norm(z)
    return float(np.linalg.norm(v - z * (np.conj(z) @ v)))


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    scale: float
    tol_zero: float
    zero_multiplicity: int
    strip_lower: float | None      # -1/tau under Cattaneo's law, None under Fourier's
    strip_violations: np.ndarray
    abscissa_range: float
    kernel_angle: float | None

    @property
    def nonzero(self) -> np.ndarray:
        return self.eigenvalues[np.abs(self.eigenvalues) > self.tol_zero]

    @property
    def zero_is_simple(self) -> bool:
        return self.zero_multiplicity == 1

    @property
    def in_strip(self) -> bool:
        return self.strip_violations.size == 0

    def summary(self) -> dict:
        return {"N": int(self.eigenvalues.size), "scale": self.scale, "tol_zero": self.tol_zero,
                "zero_multiplicity": self.zero_multiplicity, "strip_lower": self.strip_lower,
                "strip_violations": int(self.strip_violations.size),
                "abscissa_range": self.abscissa_range, "kernel_angle": self.kernel_angle}


def compute_spectrum(sys: GeneratorSystem, kernel: np.ndarray | None = None) -> SpectrumReport:
    """All eigenvalues of ``A`` with kernel-simplicity and strip diagnostics.

    ``sys`` may be any object with ``A`` (and optionally ``cfg``); the kernel
    eigenvector is compared with the discrete kernel only for a full system.
    """
    A = np.asarray(sys.A)
    ev, vecs = _eig(A, vectors=True)
    if not np.all(np.isfinite(ev)):
        raise EigenFailureError("eigenvalue iteration returned non-finite values")
    scale = _inf_norm(A)
    tol_zero = ZERO_RTOL * scale
    zero = np.abs(ev) <= tol_zero
    eps = STRIP_RTOL * scale

    cfg = getattr(sys, "cfg", None)
    lower = -1.0 / cfg.tau if cfg is not None and cfg.cattaneo else None
    bad = ev.real > eps
    if lower is not None:
        bad |= ev.real < lower - eps
    rest = ev[~zero]
    abscissa = float(rest.real.max()) if rest.size else float("-inf")

    angle = None
    if kernel is None and isinstance(sys, GeneratorSystem):
        kernel = discrete_kernel(sys)
    if kernel is not None:
        angle = _sin_angle(vecs[:, np.argmin(np.abs(ev))], kernel)
    return SpectrumReport(eigenvalues=ev, scale=scale, tol_zero=tol_zero,
                          zero_multiplicity=int(zero.sum()), strip_lower=lower,
                          strip_violations=ev[bad], abscissa_range=abscissa, kernel_angle=angle)


@dataclass(frozen=True, eq=False)
class DeflatedOperator:
    """``B`` restricted to the Euclidean complement of the normalized kernel vector."""

    Br: np.ndarray
    Q: np.ndarray
    B: np.ndarray
    L: np.ndarray
    z: np.ndarray
    kernel_residual: float
    cokernel_residual: float
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.Br.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        if "ev" not in self._cache:
            self._cache["ev"] = _eig(self.Br)
        return self._cache["ev"]

    @property
    def scale(self) -> float:
        return _inf_norm(self.B)


def energy_similarity(A: np.ndarray, M: np.ndarray):
    """Return ``(B, L)`` with ``M = L L^T`` and ``B = L^T A L^{-T}``."""
    L = np.linalg.cholesky(M)
    C = sla.solve_triangular(L, A.T, lower=True).T  # A L^{-T}
    return L.T @ C, L


def deflate(sys, kernel: np.ndarray | None = None) -> DeflatedOperator:
    """Restrict the generator to the orthogonal complement of its kernel.

    The kernel vector must be a two-sided null vector of ``B``; otherwise
    :class:`KernelMismatchError` is raised.
    """
    if kernel is None:
        kernel = discrete_kernel(sys)
    B, L = energy_similarity(np.asarray(sys.A, dtype=float), np.asarray(sys.M, dtype=float))
    z = L.T @ kernel
    z = z / np.linalg.norm(z)
    tol = KERNEL_TOL * max(1.0, _inf_norm(B))
    r1, r2 = float(np.linalg.norm(B @ z)), float(np.linalg.norm(B.T @ z))
    if r1 > tol or r2 > tol:
        raise KernelMismatchError(f"kernel vector residuals |Bz|={r1:.3e}, |B^T z|={r2:.3e} exceed {tol:.3e}")
    Q = sla.null_space(z[None, :])
    return DeflatedOperator(Br=Q.T @ B @ Q, Q=Q, B=B, L=L, z=z,
                            kernel_residual=r1, cokernel_residual=r2)


def resolvent_norm(defl, l: float) -> float:
    """Energy-norm of ``(il - A_0)^{-1}``, i.e. ``1 / sigma_min(il - B_r)``."""
    Br = defl.Br if isinstance(defl, DeflatedOperator) else np.asarray(defl)
    shifted = 1j * l * np.eye(Br.shape[0]) - Br
    smin = sla.svdvals(shifted, check_finite=False)[-1]
    return float("inf") if smin <= np.finfo(float).tiny else float(1.0 / smin)


@dataclass(frozen=True)
class ResolventSweep:
    l_values: np.ndarray
    norms: np.ndarray
    sup_norm: float
    l_at_sup: float
    peaks: tuple[tuple[float, float], ...]  # refined (l, norm) local maxima
    top_decade_ratio: float                 # sup over top decade / overall sup
    plateau_variation: float                # growth of the running sup across the top decade

    @property
    def sup_at_finite_l(self) -> bool:
        """True when the sup is reached strictly inside the sweep, not at its upper end."""
        return bool(self.l_at_sup < self.l_values[-1])

    def summary(self) -> dict:
        return {"count": int(self.l_values.size), "l_min": float(self.l_values[0]),
                "l_max": float(self.l_values[-1]), "sup_norm": self.sup_norm,
                "l_at_sup": self.l_at_sup, "sup_at_finite_l": self.sup_at_finite_l,
                "top_decade_ratio": self.top_decade_ratio,
                "plateau_variation": self.plateau_variation}


def resolvent_sweep(defl, l_min: float = 0.1, l_max: float = 200.0, count: int = 400,
                    spacing: str = "log", threads: int = 1, refine: bool = True) -> ResolventSweep:
    """Resolvent norms on a grid of ``l >= 0``, with local maxima refined.

    The plateau diagnostic is the relative growth of the running supremum
    ``sup_{l' <= l} |R(il')|`` across the top decade ``[l_max/10, l_max]``;
    zero growth means the bound was already reached at lower frequency.
    """
    if count < 2:
        raise BadRangeError(f"a sweep needs at least 2 points, got {count}")
    if not (np.isfinite(l_min) and np.isfinite(l_max)) or l_min >= l_max:
        raise BadRangeError(f"need l_min < l_max, got [{l_min}, {l_max}]")
    if spacing == "log":
        if l_min <= 0:
            raise BadRangeError("log spacing needs l_min > 0")
        ls = np.geomspace(l_min, l_max, count)
    elif spacing == "linear":
        ls = np.linspace(l_min, l_max, count)
    else:
        raise BadRangeError(f"unknown spacing {spacing!r}")

    f = lambda l: resolvent_norm(defl, l)  # noqa: E731
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            norms = np.array(list(pool.map(f, ls)))
    else:
        norms = np.array([f(l) for l in ls])

    peaks = []
    if refine:
        for i in range(1, count - 1):
            if norms[i] >= norms[i - 1] and norms[i] >= norms[i + 1]:
                res = minimize_scalar(lambda l: -f(l), bounds=(ls[i - 1], ls[i + 1]),
                                      method="bounded", options={"xatol": 1e-10 * ls[i]})
                best = (float(res.x), float(-res.fun)) if -res.fun > norms[i] else (float(ls[i]), float(norms[i]))
                peaks.append(best)

    cand_l = np.concatenate([ls, [p[0] for p in peaks]])
    cand_n = np.concatenate([norms, [p[1] for p in peaks]])
    j = int(np.argmax(cand_n))
    sup, l_sup = float(cand_n[j]), float(cand_l[j])

    top = cand_l >= l_max / 10
    top_ratio = float(cand_n[top].max() / sup)
    below = cand_l < l_max / 10
    before = float(cand_n[below].max()) if below.any() else float(cand_n[top].min())
    variation = float((sup - before) / sup) if sup > 0 else 0.0
    return ResolventSweep(l_values=ls, norms=norms, sup_norm=sup, l_at_sup=l_sup,
                          peaks=tuple(peaks), top_decade_ratio=top_ratio,
                          plateau_variation=max(variation, 0.0))


def spectral_abscissa(defl) -> float:
    """Largest real part on the range subspace; strictly negative for a stable discretization."""
    ev = defl.eigenvalues if isinstance(defl, DeflatedOperator) else _eig(np.asarray(defl))
    value = float(ev.real.max())
    if not value < 0:
        raise NonNegativeAbscissaError(f"spectral abscissa {value} is not negative")
    return value


def slowest_mode(defl) -> complex:
    """The eigenvalue of the deflated operator attaining the spectral abscissa."""
    ev = defl.eigenvalues if isinstance(defl, DeflatedOperator) else _eig(np.asarray(defl))
    best = ev[ev.real >= ev.real.max() - 1e-12 * max(1.0, abs(ev.real.max()))]
    return complex(best[np.argmax(np.abs(best.imag))])
