import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_system, random_config
from manufactured import ManufacturedState
from thermobar import (assemble_generator, build_discretization, discrete_kernel, dissipation_rate,
                       energy, reference_config, unpack, validate_config, verify_structure)
from thermobar.errors import AssemblyError, LayoutMismatchError


def _identity_residual(sys):
    MA = sys.M @ sys.A
    return np.abs(MA + MA.T + 2 * sys.Dq).max() / np.abs(MA).max()


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), law=st.sampled_from(["cattaneo", "fourier"]),
       n=st.tuples(st.integers(2, 12), st.integers(2, 12), st.integers(2, 12)),
       nu=st.sampled_from([0.0, 0.01, 0.5]))
def test_dissipation_identity_for_random_configs(seed, law, n, nu):
    sys = make_system(random_config(np.random.default_rng(seed), law), n, viscosity=nu)
    assert _identity_residual(sys) <= 1e-12
    assert np.linalg.eigvalsh(sys.Dq).min() >= -1e-12 * max(1, np.abs(sys.Dq).max())


def test_verify_structure_reference(law):
    sys = make_system(reference_config(law), 8)
    rep = verify_structure(sys)
    assert rep.passed
    statuses = [c.status for c in rep.checks]
    if law == "cattaneo":
        assert statuses == ["pass"] * 4
    else:
        assert statuses == ["pass", "skipped", "pass", "pass"]
    assert all(isinstance(c.residual, float) for c in rep.checks)


def test_verify_structure_detects_corruption():
    sys = make_system(reference_config(), 8)
    A = sys.A.copy()
    A[3, 17] += 1e-3
    bad = dataclasses.replace(sys, A=A)
    assert verify_structure(bad)["dissipation_identity"].status == "fail"
    assert not verify_structure(bad).passed


def test_assembly_guard():
    disc = build_discretization(reference_config(), 4, 4, 4)
    with pytest.raises(AssemblyError):
        assemble_generator(reference_config("fourier"), disc)


def test_kernel_is_annihilated(law):
    sys = make_system(reference_config(law), (5, 7, 6))
    Z = discrete_kernel(sys)
    assert np.linalg.norm(sys.A @ Z) <= 1e-12 * np.linalg.norm(sys.A, 2) * np.linalg.norm(Z)


def test_energy_reference_values(law):
    sys = make_system(reference_config(law), 8)
    assert energy(np.zeros(sys.N), sys) == 0
    U = np.zeros(sys.N)
    U[sys.disc.layout.theta] = 1.0
    assert energy(U, sys) == pytest.approx(0.5, rel=1e-15)
    assert energy(discrete_kernel(sys), sys) == pytest.approx(5 / 6, rel=1e-14)
    with pytest.raises(LayoutMismatchError):
        energy(np.zeros(sys.N + 1), sys)


def test_dissipation_rate_values():
    sys = make_system(reference_config(), 4)
    U = np.zeros(sys.N)
    U[sys.disc.layout.q] = 1.0
    assert dissipation_rate(U, sys) == pytest.approx(-0.75, rel=1e-15)
    U[sys.disc.layout.q] = 0.0
    U[sys.disc.layout.theta] = np.arange(4.0)
    assert dissipation_rate(U, sys) == 0.0
    fsys = make_system(reference_config("fourier"), 4)
    V = np.zeros(fsys.N)
    V[fsys.disc.layout.theta] = 2.5
    assert dissipation_rate(V, fsys) == 0.0


def test_dissipation_rate_equals_real_part(law):
    sys = make_system(random_config(np.random.default_rng(5), law), 6)
    rng = np.random.default_rng(0)
    for _ in range(5):
        U = rng.standard_normal(sys.N) + 1j * rng.standard_normal(sys.N)
        re = np.real(np.conj(U) @ sys.M @ sys.A @ U)
        assert dissipation_rate(U, sys) == pytest.approx(re, rel=1e-11, abs=1e-11 * abs(U @ sys.M @ np.conj(U)))


def test_fourier_cosine_temperature_dissipates():
    cfg = reference_config("fourier")
    sys = make_system(cfg, 8)
    lay, mid = sys.disc.layout, sys.disc.grids[1]
    U = np.zeros(sys.N)
    U[lay.theta] = np.cos(np.pi * (mid.cells - cfg.L1) / (cfg.L2 - cfg.L1))
    th = U[lay.theta]
    grad = np.diff(th) / mid.h  # interior-node gradients
    expected = -cfg.k ** 2 * np.sum(mid.h * grad ** 2)
    val = U @ sys.M @ sys.A @ U
    assert val == pytest.approx(expected, rel=1e-12)
    assert val < 0


def test_field_of_values_in_strip():
    for seed in range(3):
        cfg = random_config(np.random.default_rng(seed), "cattaneo")
        sys = make_system(cfg, 8)
        # generalized eigenvalues of (Dq, M) bound the Rayleigh quotient Re(U*MAU)/(U*MU)
        from scipy.linalg import eigh
        w = eigh(sys.Dq, sys.M, eigvals_only=True)
        assert w.min() >= -1e-12 and w.max() <= 1 / cfg.tau * (1 + 1e-10)


def test_viscous_damping_of_resolved_modes_vanishes_like_h4():
    # the velocity damping targets grid-scale content; a smooth mode barely feels it
    rates = []
    for n in (8, 16, 32):
        sys = make_system(reference_config(), n)
        lay = sys.disc.layout
        U = np.zeros(sys.N)
        U[lay.w2] = np.sin(np.pi * sys.disc.x_free / 3.0)
        rates.append((U @ sys.Dq_visc @ U) / (U @ sys.M @ U))
    orders = np.log2(np.array(rates[:-1]) / np.array(rates[1:]))
    assert orders.min() >= 3.9


@pytest.mark.parametrize("law_name", ["cattaneo", "fourier"])
def test_consistency_with_continuous_operator(law_name):
    cfg = validate_config(dict(L1=1, L2=2.5, L3=3.2, a=2, b=0.7, m=0.8, k=1.3, tau=0.6, law=law_name))
    ms = ManufacturedState(cfg)
    errs = []
    for n in (8, 16, 32):
        sys = make_system(cfg, n)
        err = np.abs(sys.A @ ms.state(sys.disc) - ms.image(sys.disc))
        iface = [sys.disc.layout.w2.start + n - 1, sys.disc.layout.w2.start + 2 * n - 1]
        mask = np.ones(sys.N, bool)
        mask[iface] = False
        errs.append((err[mask].max(), err[iface].max()))
    errs = np.array(errs)
    orders = np.log2(errs[:-1] / errs[1:])
    assert orders[:, 0].min() >= 1.9
    assert orders[:, 1].min() >= 0.9


def test_manufactured_state_satisfies_transmission():
    cfg = validate_config(dict(L1=1, L2=2.5, L3=3.2, a=2, b=0.7, m=0.8, k=1.3, tau=0.6, law="cattaneo"))
    ms = ManufacturedState(cfg)
    for x, v in ((cfg.L1, ms.v_left), (cfg.L2, ms.v_right)):
        assert v(x) == pytest.approx(ms.u(x))
        assert cfg.b * v(x, 1) == pytest.approx(cfg.a * ms.du(x) - cfg.m * ms.theta(x))
    assert ms.v_left(0.0) == 0 and ms.v_right(cfg.L3) == pytest.approx(0, abs=1e-15)
    sys = make_system(cfg, 4)
    f = unpack(ms.state(sys.disc), sys.disc)
    assert f.q[0] == 0 and abs(f.q[-1]) < 1e-15
