import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_system, random_config
from thermobar import (Fields, check_equivalence, discrete_kernel, kernel_functions, pack, project,
                       range_condition, reference_config)
from thermobar.errors import LayoutMismatchError


def test_reference_kernel_vector(r0_sys):
    Z = discrete_kernel(r0_sys)
    np.testing.assert_array_equal(Z[r0_sys.disc.layout.theta], -1.0)
    assert np.abs(r0_sys.A.T @ r0_sys.M @ Z).max() <= 1e-12 * np.abs(r0_sys.A).max()


def test_projection_examples(r0_sys):
    sys = r0_sys
    Z = discrete_kernel(sys)
    dec = project(Z, sys)
    assert dec.coeff == pytest.approx(1.0, rel=1e-15)
    np.testing.assert_allclose(dec.V0, 0, atol=1e-15)

    U = np.zeros(sys.N)
    U[sys.disc.layout.w2] = np.sin(np.pi * sys.disc.x_free / 3)
    assert project(U, sys).coeff == 0.0

    U = np.zeros(sys.N)
    U[sys.disc.layout.theta] = 1.0
    assert project(U, sys).coeff == pytest.approx(-0.6, rel=1e-14)
    with pytest.raises(LayoutMismatchError):
        project(U[1:], sys)


def test_range_condition_examples(r0_sys):
    sys = r0_sys
    disc = sys.disc
    U = np.zeros(sys.N)
    U[disc.layout.theta] = 1.0
    assert range_condition(U, sys) == pytest.approx(1.0, rel=1e-15)

    # affine displacement rising by 1 across the middle, matched on the outer parts
    f = Fields.zeros(disc)
    g1, g2, g3 = disc.grids
    f.v1_left = 0 * g1.nodes
    f.u1 = g2.nodes - 1.0
    f.v1_right = 1.0 - (g3.nodes - 2.0)
    assert range_condition(pack(f, disc), sys) == pytest.approx(1.0)

    f.theta = np.ones(g2.n)
    f.u1 = -(g2.nodes - 1.0)
    f.v1_right = -1.0 + (g3.nodes - 2.0)
    assert range_condition(pack(f, disc), sys) == pytest.approx(0.0, abs=1e-15)

    Z = discrete_kernel(sys)
    assert range_condition(Z, sys) == pytest.approx(-5 / 3, rel=1e-14)


def test_equivalence_examples(r0_sys):
    sys = r0_sys
    U = np.zeros(sys.N)
    U[sys.disc.layout.theta] = 1.0
    rep = check_equivalence(U, sys)
    assert rep.inner_with_kernel == pytest.approx(-1.0, rel=1e-15)
    assert rep.zeta3_times_condition == pytest.approx(-1.0, rel=1e-15)
    assert rep.passed
    Z = discrete_kernel(sys)
    rep = check_equivalence(Z, sys)
    assert rep.inner_with_kernel == pytest.approx(5 / 3, rel=1e-14)
    assert rep.zeta3_times_condition == pytest.approx(5 / 3, rel=1e-14)
    V0 = project(np.random.default_rng(0).standard_normal(sys.N), sys).V0
    rep = check_equivalence(V0, sys)
    assert abs(rep.inner_with_kernel) < 1e-13 and abs(rep.zeta3_times_condition) < 1e-13


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), law=st.sampled_from(["cattaneo", "fourier"]),
       n=st.tuples(st.integers(2, 10), st.integers(2, 10), st.integers(2, 10)), cplx=st.booleans())
def test_projection_properties(seed, law, n, cplx):
    rng = np.random.default_rng(seed)
    sys = make_system(random_config(rng, law), n)
    M = sys.M
    U = rng.standard_normal(sys.N) + (1j * rng.standard_normal(sys.N) if cplx else 0)
    dec = project(U, sys)
    Z = discrete_kernel(sys)
    # V0 is formed as U - W0, so the sum reproduces U up to one rounding per entry
    np.testing.assert_allclose(dec.W0 + dec.V0, U, rtol=0, atol=4 * np.finfo(float).eps * max(np.abs(dec.W0).max(), np.abs(U).max()))
    nu = np.real(np.conj(U) @ M @ U)
    assert abs(np.conj(Z) @ M @ dec.V0) <= 1e-12 * np.sqrt(nu * (Z @ M @ Z))
    pyth = nu - np.real(np.conj(dec.W0) @ M @ dec.W0) - np.real(np.conj(dec.V0) @ M @ dec.V0)
    assert abs(pyth) <= 1e-12 * nu
    again = project(dec.V0, sys)
    assert abs(again.coeff) <= 1e-12 * np.sqrt(nu / np.real(Z @ M @ Z))
    assert check_equivalence(U, sys).passed
    # the range is orthogonal to the kernel
    X = rng.standard_normal(sys.N)
    AX = sys.A @ X
    assert abs(Z @ M @ AX) <= 1e-11 * np.sqrt(AX @ M @ AX) * np.sqrt(Z @ M @ Z)


def test_equivalence_identity_is_literal():
    cfg = reference_config()
    sys = make_system(cfg, 6)
    kf = kernel_functions(cfg)
    U = np.random.default_rng(3).standard_normal(sys.N)
    Z = discrete_kernel(sys)
    assert Z @ sys.M @ U == pytest.approx(kf.zeta3 * range_condition(U, sys), rel=1e-13)
