"""Independent reference computations used by the tests.

* ``charpoly_eigenvalues``: exact rational characteristic polynomial of a
  small matrix (sympy), then roots of the expanded polynomial through its
  companion matrix.  Shares no code with the main eigen path.
* ``continuous_eigenvalue``: Newton/Powell solve of the exact dispersion
  relation of the continuous bar, built by propagating the constant-coefficient
  ODE of the thermoelastic segment with a matrix exponential.
"""

from fractions import Fraction

import numpy as np
import scipy.linalg as sla
import sympy
from scipy.optimize import fsolve


def charpoly_eigenvalues(A):
    entries = [[sympy.Rational(Fraction(float(v))) for v in row] for row in np.asarray(A)]
    lam = sympy.Symbol("lam")
    poly = sympy.Matrix(entries).charpoly(lam)
    coeffs = np.array([float(c) for c in poly.all_coeffs()])
    return np.roots(coeffs)


def match_nearest(a, b):
    """Pair each value of ``a`` with a distinct nearest value of ``b``; return the max gap."""
    from scipy.optimize import linear_sum_assignment

    cost = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def _dispersion(lam, cfg):
    L1, L2, L3 = cfg.L1, cfg.L2, cfg.L3
    a, b, m, k = cfg.a, cfg.b, cfg.m, cfg.k
    sb = np.sqrt(b)
    if cfg.cattaneo:
        s = cfg.tau * lam + 1
        # y = (u, u', theta, q)
        C = np.array([[0, 1, 0, 0], [lam**2 / a, 0, 0, -m * s / (k * a)],
                      [0, 0, 0, -s / k], [0, -m * lam / k, -lam / k, 0]], complex)
        flux = 3
    else:
        # y = (u, u', theta, theta')
        C = np.array([[0, 1, 0, 0], [lam**2 / a, 0, 0, m / a],
                      [0, 0, 0, 1], [0, m * lam / k**2, lam / k**2, 0]], complex)
        flux = 3
    P = sla.expm(C * (L2 - L1))

    def start(c, th):
        v, vp = c * np.sinh(lam * L1 / sb), c * lam / sb * np.cosh(lam * L1 / sb)
        return np.array([v, (b * vp + m * th) / a, th, 0])

    D = np.zeros((3, 3), complex)
    for j, y in enumerate((P @ start(1, 0), P @ start(0, 1))):
        D[:, j] = [y[flux], y[0], a * y[1] - m * y[2]]
    D[1, 2] = -np.sinh(lam * (L3 - L2) / sb)
    D[2, 2] = b * lam / sb * np.cosh(lam * (L3 - L2) / sb)
    return np.linalg.det(D)


def continuous_eigenvalue(cfg, guess):
    def f(x):
        d = _dispersion(x[0] + 1j * x[1], cfg)
        return [d.real, d.imag]

    x = fsolve(f, [guess.real, guess.imag], xtol=1e-13)
    return complex(x[0], x[1])
