import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ffep.exceptions import InvalidArgumentError, NoExactSolutionError
from ffep.problems import (
    EULER_A,
    EULER_B,
    EULER_PERIOD,
    PROBLEM_IDS,
    complete_elliptic_K,
    euler_exact,
    euler_system,
    euler_vector_field,
    get_problem,
    harmonic_exact,
    jacobi_sn_cn_dn,
)


def test_euler_field_at_initial_value():
    sys_ = euler_system(EULER_A)
    np.testing.assert_allclose(sys_.vector_field(np.array([0.0, 1.0, 1.0])), [math.sqrt(1.51), 0.0, 0.0], atol=1e-15)


@pytest.mark.parametrize("p", [EULER_A, EULER_B], ids=["a", "b"])
def test_euler_b_matrix_skew_and_component_form(p, rng):
    sys_ = euler_system(p)
    ys = rng.standard_normal((50, 3))
    B = sys_.b_matrix(ys)
    np.testing.assert_array_equal(B + np.swapaxes(B, -1, -2), 0.0)
    np.testing.assert_allclose(sys_.vector_field(ys), euler_vector_field(p, ys), atol=1e-13 * 51)


def test_problem_registry():
    for pid in PROBLEM_IDS:
        prob = get_problem(pid)
        assert prob.id == pid and prob.y0.shape == (prob.system.dim,)
    assert get_problem("euler-b").exact is None
    assert get_problem("euler-b").omega == 50.0
    assert get_problem("euler-a").omega == pytest.approx(2 * math.pi / EULER_PERIOD)
    with pytest.raises(InvalidArgumentError):
        get_problem("kepler")


# ----------------------------------------------------------------- elliptic K


def test_K_at_zero():
    assert complete_elliptic_K(0.0) == pytest.approx(math.pi / 2, rel=1e-16)


def test_K_period():
    assert 4 * complete_elliptic_K(0.51) == pytest.approx(EULER_PERIOD, abs=1e-12)


def test_K_half_against_series():
    # K(m) = pi/2 sum ((2n)! / (2^(2n) n!^2))^2 m^n
    series = math.pi / 2 * sum((math.comb(2 * n, n) / 4**n) ** 2 * 0.5**n for n in range(200))
    assert complete_elliptic_K(0.5) == pytest.approx(series, abs=1e-14)


@pytest.mark.parametrize("m", [0.1, 0.51, 0.9, 0.999])
def test_K_against_mpmath(m):
    assert complete_elliptic_K(m) == pytest.approx(float(mpmath.ellipk(m)), rel=2e-15)


@pytest.mark.parametrize("m", [-0.1, 1.0, 1.5, math.nan])
def test_K_domain(m):
    with pytest.raises(InvalidArgumentError):
        complete_elliptic_K(m)


# -------------------------------------------------------------- sn, cn, dn


def test_elliptic_special_values():
    K = complete_elliptic_K(0.51)
    st_ = jacobi_sn_cn_dn(np.array([0.0, K]), 0.51)
    np.testing.assert_allclose(st_.sn, [0.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(st_.cn, [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(st_.dn, [1.0, math.sqrt(0.49)], atol=1e-15)


def test_elliptic_m_zero_is_trig():
    u = np.linspace(-3, 3, 7)
    st_ = jacobi_sn_cn_dn(u, 0.0)
    np.testing.assert_array_equal(st_.sn, np.sin(u))
    np.testing.assert_array_equal(st_.dn, np.ones_like(u))


@pytest.mark.parametrize("m", [0.1, 0.51, 0.9])
def test_elliptic_against_mpmath(m):
    u = np.linspace(-12, 12, 49)
    st_ = jacobi_sn_cn_dn(u, m)
    for name in ("sn", "cn", "dn"):
        ref = np.array([float(mpmath.ellipfun(name, x, m=m)) for x in u])
        np.testing.assert_allclose(getattr(st_, name), ref, atol=2e-14)


@settings(max_examples=60, deadline=None)
@given(u=st.floats(-50, 50), m=st.floats(0, 0.99))
def test_elliptic_identities(u, m):
    st_ = jacobi_sn_cn_dn(u, m)
    assert abs(st_.sn**2 + st_.cn**2 - 1) <= 1e-13
    assert abs(st_.dn**2 + m * st_.sn**2 - 1) <= 1e-13
    assert st_.dn > 0


@settings(max_examples=30, deadline=None)
@given(u=st.floats(-10, 10), m=st.floats(0.01, 0.95))
def test_elliptic_periodicity(u, m):
    K = complete_elliptic_K(m)
    a, b = jacobi_sn_cn_dn(u, m), jacobi_sn_cn_dn(u + 4 * K, m)
    assert abs(a.sn - b.sn) <= 1e-10 and abs(a.cn - b.cn) <= 1e-10
    # sn is odd, cn even
    c = jacobi_sn_cn_dn(-u, m)
    assert abs(a.sn + c.sn) <= 1e-14 and abs(a.cn - c.cn) <= 1e-14


# ------------------------------------------------------------ exact solutions


def test_euler_exact_initial_value_and_energy():
    np.testing.assert_allclose(euler_exact(0.0), [0.0, 1.0, 1.0], atol=1e-16)
    t = np.linspace(0, 30, 61)
    H = get_problem("euler-a").system.hamiltonian(euler_exact(t))
    np.testing.assert_allclose(H, 1.0, atol=1e-14)


def test_euler_exact_periodic():
    np.testing.assert_allclose(euler_exact(1.234 + EULER_PERIOD), euler_exact(1.234), atol=1e-12)


def test_euler_exact_solves_ode():
    sys_ = euler_system(EULER_A)
    t = np.linspace(0.1, 15.0, 40)
    eps = 1e-5
    fd = (euler_exact(t + eps) - euler_exact(t - eps)) / (2 * eps)
    assert np.max(np.abs(fd - sys_.vector_field(euler_exact(t)))) <= 1e-6


def test_euler_exact_only_for_first_parameters():
    with pytest.raises(NoExactSolutionError):
        euler_exact(1.0, EULER_B)


def test_harmonic_exact():
    np.testing.assert_allclose(harmonic_exact(math.pi / 2), [0.0, -1.0], atol=1e-16)
    np.testing.assert_allclose(harmonic_exact(np.array([0.0, math.pi])), [[1.0, 0.0], [-1.0, 0.0]], atol=1e-15)
