"""Crank-Nicolson time stepping with an exact energy ledger, and decay-rate fits."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.signal import argrelmax

from .errors import EnergyUnderflowError, SingularStepError, WindowTooShortError

UNDERFLOW = 1e-300


class StepCache:
    """LU factors of ``I - dt/2 A`` and the explicit half-step matrix, keyed by ``dt``."""

    def __init__(self):
        self._store = {}

    def get(self, A: np.ndarray, dt: float):
        key = (id(A), float(dt))
        if key not in self._store:
            eye = np.eye(A.shape[0])
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("error", sla.LinAlgWarning)
                    lu = sla.lu_factor(eye - 0.5 * dt * A, check_finite=True)
            except (np.linalg.LinAlgError, sla.LinAlgWarning, ValueError) as exc:
                raise SingularStepError(f"cannot factor the implicit step matrix: {exc}") from exc
            if np.any(np.diag(lu[0]) == 0):
                raise SingularStepError("implicit step matrix is singular")
            self._store[key] = (lu, eye + 0.5 * dt * A)
        return self._store[key]


def cn_step(U, dt: float, sys, cache: StepCache | None = None) -> np.ndarray:
    """One step of ``(I - dt/2 A) U+ = (I + dt/2 A) U``.

    ``sys`` only needs an ``A`` attribute, so small synthetic systems work too.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    cache = cache if cache is not None else StepCache()
    lu, R = cache.get(sys.A, dt)
    return sla.lu_solve(lu, R @ U, check_finite=False)


@dataclass
class Trajectory:
    times: np.ndarray
    energy_total: np.ndarray
    energy_deviation: np.ndarray
    # dissipation[i] is -U_mid^* Dq U_mid over the step ending at times[i];
    # dissipation[0] is the instantaneous rate of the initial state
    dissipation: np.ndarray
    ledger_residual: np.ndarray
    W0: np.ndarray
    final_state: np.ndarray
    snapshot_times: np.ndarray | None = None
    snapshots: np.ndarray | None = None

    @property
    def monotone(self) -> bool:
        E = self.energy_total
        return bool(np.all(np.diff(E) <= 1e-13 * np.maximum(E[:-1], 1e-300)))


def _quad(M, U):
    return float(np.real(np.conj(U) @ (M @ U)))


def simulate(U0, sys, dt: float, t_max: float, snapshot_stride: int = 0,
             W0: np.ndarray | None = None, cache: StepCache | None = None) -> Trajectory:
    """Integrate ``dU/dt = A U`` from ``U0`` up to ``t_max``.

    The deviation energy is measured against the kernel part of ``U0``,
    computed once at ``t = 0``.
    """
    if not dt > 0 or not t_max > 0:
        raise ValueError(f"dt and t_max must be positive, got dt={dt}, t_max={t_max}")
    if W0 is None:
        from .equilibria import project
        W0 = project(U0, sys).W0
    A, M, Dq = sys.A, sys.M, sys.Dq
    n_steps = int(np.ceil(t_max / dt - 1e-9))
    cache = cache if cache is not None else StepCache()
    lu, R = cache.get(A, dt)

    E_tot = np.empty(n_steps + 1)
    E_dev = np.empty(n_steps + 1)
    diss = np.empty(n_steps + 1)
    resid = np.zeros(n_steps + 1)
    snaps, snap_t = [], []

    U = np.array(U0, dtype=float if np.isrealobj(U0) else complex)
    E_tot[0] = 0.5 * _quad(M, U)
    E_dev[0] = 0.5 * _quad(M, U - W0)
    diss[0] = -_quad(Dq, U)
    if snapshot_stride:
        snaps.append(U.copy())
        snap_t.append(0.0)

    for i in range(1, n_steps + 1):
        U_new = sla.lu_solve(lu, R @ U, check_finite=False)
        mid = 0.5 * (U + U_new)
        diss[i] = -_quad(Dq, mid)
        E_tot[i] = 0.5 * _quad(M, U_new)
        E_dev[i] = 0.5 * _quad(M, U_new - W0)
        resid[i] = abs(E_tot[i] - E_tot[i - 1] - dt * diss[i]) / max(E_tot[i - 1], UNDERFLOW)
        U = U_new
        if snapshot_stride and i % snapshot_stride == 0:
            snaps.append(U.copy())
            snap_t.append(i * dt)

    return Trajectory(
        times=np.arange(n_steps + 1) * dt, energy_total=E_tot, energy_deviation=E_dev,
        dissipation=diss, ledger_residual=resid, W0=np.asarray(W0), final_state=U,
        snapshot_times=np.array(snap_t) if snapshot_stride else None,
        snapshots=np.array(snaps) if snapshot_stride else None)


@dataclass(frozen=True)
class DecayReport:
    fitted_rate: float
    fit_window: tuple[float, float]
    fit_residual: float
    intercept: float
    n_points: int
    reference_rate: float | None = None

    @property
    def relative_gap(self) -> float | None:
        if self.reference_rate is None:
            return None
        return abs(self.fitted_rate - self.reference_rate) / abs(self.reference_rate)

    def as_dict(self) -> dict:
        return {"fitted_rate": self.fitted_rate, "fit_window": list(self.fit_window),
                "fit_residual": self.fit_residual, "intercept": self.intercept,
                "n_points": self.n_points, "reference_rate": self.reference_rate,
                "relative_gap": self.relative_gap}


def envelope_fit(t: np.ndarray, logE: np.ndarray, max_iter: int = 100):
    """Fit the upper envelope of an oscillating log-energy by a line.

    Starting from the plain least-squares line, repeatedly refit through the
    local maxima of the residual until the slope stops changing.  For
    ``log(c e^{-rt} (1 + eps cos wt))`` the maxima converge to the crests, so
    the slope is ``-r``.  Returns ``(slope, intercept, rms, n_points)``.
    """
    coef = np.polyfit(t, logE, 1)
    idx = np.arange(t.size)
    for _ in range(max_iter):
        peaks = argrelmax(logE - np.polyval(coef, t))[0]
        if peaks.size < 3:
            break
        new = np.polyfit(t[peaks], logE[peaks], 1)
        converged = abs(new[0] - coef[0]) <= 1e-14 * max(1.0, abs(coef[0]))
        coef, idx = new, peaks
        if converged:
            break
    rms = float(np.sqrt(np.mean((logE[idx] - np.polyval(coef, t[idx])) ** 2)))
    return float(coef[0]), float(coef[1]), rms, int(idx.size)


def _period_from_maxima(t, logE):
    trend = np.polyfit(t, logE, 1)
    peaks = argrelmax(logE - np.polyval(trend, t))[0]
    if peaks.size < 2:
        return None
    return float(np.median(np.diff(t[peaks])))


def fit_decay(traj: Trajectory, window_fraction: float = 0.5, reference_rate: float | None = None,
              period: float | None = None, min_samples: int = 20) -> DecayReport:
    """Envelope fit of ``log E_{U-W0}`` over the trailing ``window_fraction`` of the run.

    ``period`` is the oscillation period of the energy, if known (``pi / |Im|``
    of the slowest eigenvalue, since energy is quadratic in the state);
    otherwise it is estimated from the spacing of the energy's local maxima.
    """
    if not 0 < window_fraction <= 1:
        raise ValueError("window_fraction must lie in (0, 1]")
    t, E = np.asarray(traj.times), np.asarray(traj.energy_deviation)
    t_lo = t[0] + (1 - window_fraction) * (t[-1] - t[0])
    win = t >= t_lo - 1e-12 * max(abs(t[-1]), 1.0)
    tw, Ew = t[win], E[win]
    if tw.size < min_samples:
        raise WindowTooShortError(f"fit window holds {tw.size} samples, need {min_samples}")
    ok = Ew > UNDERFLOW
    if not np.all(ok):
        last = np.argmin(ok)  # first underflowed sample
        tw, Ew = tw[:last], Ew[:last]
        if tw.size < min_samples:
            raise EnergyUnderflowError(
                f"deviation energy underflows {UNDERFLOW:g}; only {tw.size} usable samples remain")
    logE = np.log(Ew)
    period = period if period is not None else _period_from_maxima(tw, logE)
    span = tw[-1] - tw[0]
    if period is not None and span < 3 * period:
        raise WindowTooShortError(f"fit window spans {span:g}, less than 3 periods of {period:g}")
    slope, intercept, rms, npts = envelope_fit(tw, logE)
    return DecayReport(fitted_rate=-slope, fit_window=(float(tw[0]), float(tw[-1])),
                       fit_residual=rms, intercept=intercept, n_points=npts,
                       reference_rate=reference_rate)
