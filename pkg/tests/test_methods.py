import math

import numpy as np
import pytest

from ffep.exceptions import InvalidArgumentError, InvalidFrequencyError, InvalidMethodError
from ffep.integrator import fixed_point_step
from ffep.methods import (
    METHOD_IDS,
    avf_step,
    check_ffep1_frequency,
    epcm1_step,
    ffep1_kernel_at_midpoint,
    ffep1_step,
    get_preset,
    has_constant_b,
    legendre_epcm_preset,
    make_stepper,
    tfep1_prefactor,
    tfep1_step,
)
from ffep.numeric import gauss_legendre_rule
from ffep.problems import EULER_PERIOD
from ffep.spaces import make_trig_cos_space, orthonormalize, projection_kernel, scale_basis

OMEGA = 2 * math.pi / EULER_PERIOD


def test_tfep1_prefactor():
    assert tfep1_prefactor(0.0) == 1.0
    assert tfep1_prefactor(1.0) == pytest.approx(2 * math.tanh(0.5), rel=1e-15)
    assert tfep1_prefactor(1.0) == pytest.approx(0.9242343145200195, rel=1e-14)
    assert tfep1_prefactor(1e-7) == pytest.approx(1.0 - 1e-14 / 12, rel=1e-15)
    assert tfep1_prefactor(-1.0) == tfep1_prefactor(1.0)


@pytest.mark.parametrize("v", [1e-9, 0.3, 1.0, 2.0])
def test_ffep1_midpoint_kernel_matches_generic_kernel(v):
    onb = orthonormalize(scale_basis(make_trig_cos_space(v), 1.0))
    sigma = np.linspace(0, 1, 7)
    np.testing.assert_allclose(ffep1_kernel_at_midpoint(v, sigma), projection_kernel(onb, 0.5, sigma), atol=1e-13)


@pytest.mark.parametrize("v", [math.pi, -math.pi, 3 * math.pi, 2 * math.pi, math.inf])
def test_ffep1_rejects_singular_frequency(v):
    with pytest.raises(InvalidFrequencyError):
        check_ffep1_frequency(v)


@pytest.mark.parametrize("v", [0.0, 1e-12, 1.0, 10.0, 4.0])
def test_ffep1_accepts_regular_frequency(v):
    check_ffep1_frequency(v)


def test_ffep1_step_rejects_singular(euler_a):
    with pytest.raises(InvalidFrequencyError):
        ffep1_step(euler_a.system, euler_a.y0, 1.0, omega=math.pi)


def test_epcm1_harmonic_example(harmonic):
    # midpoint rule on the rotation: ((1 - h^2/4) / (1 + h^2/4), -h / (1 + h^2/4))
    h = 0.5
    d = 1 + h * h / 4
    np.testing.assert_allclose(epcm1_step(harmonic.system, harmonic.y0, h), [(1 - h * h / 4) / d, -h / d], atol=1e-15)


def test_avf_equals_epcm1_for_constant_b(harmonic):
    y0 = np.array([0.3, -0.7])
    np.testing.assert_allclose(avf_step(harmonic.system, y0, 0.4), epcm1_step(harmonic.system, y0, 0.4), atol=1e-15)


def test_avf_rejects_state_dependent_b(euler_a):
    assert not has_constant_b(euler_a.system, euler_a.y0)
    with pytest.raises(InvalidMethodError):
        avf_step(euler_a.system, euler_a.y0, 0.1)


def test_tfep1_is_rescaled_epcm1(euler_a):
    h = 0.2
    y_t = tfep1_step(euler_a.system, euler_a.y0, h, omega=OMEGA)
    y_e = epcm1_step(euler_a.system, euler_a.y0, h * tfep1_prefactor(OMEGA * h))
    np.testing.assert_allclose(y_t, y_e, atol=1e-15)


@pytest.mark.parametrize("method", ["epcm1", "ffep1", "tfep1"])
@pytest.mark.parametrize("h", [0.01, 0.2, 0.5])
def test_closed_forms_preserve_energy(euler_a, method, h):
    res = make_stepper(method, euler_a.system, h, omega=OMEGA)(euler_a.y0)
    assert res.converged
    assert abs(euler_a.system.hamiltonian(res.y1) - 1.0) <= 1e-14


@pytest.mark.parametrize("step", [epcm1_step, lambda s, y, h: ffep1_step(s, y, h, OMEGA), lambda s, y, h: tfep1_step(s, y, h, OMEGA)])
def test_closed_forms_are_second_order_consistent(euler_a, step):
    errs = [np.linalg.norm(step(euler_a.system, euler_a.y0, h) - euler_a.exact(h)) for h in (0.1, 0.05)]
    # local error O(h^3)
    assert 2 ** 2.7 <= errs[0] / errs[1] <= 2 ** 3.3


def test_ffep1_continuous_in_v(euler_a):
    h = 0.2
    a = ffep1_step(euler_a.system, euler_a.y0, h, omega=1e-7 / h)
    b = ffep1_step(euler_a.system, euler_a.y0, h, omega=0.0)
    assert np.max(np.abs(a - b)) <= 1e-10


def test_quad_argument_forms(euler_a):
    h = 0.2
    rule = gauss_legendre_rule(8)
    a = epcm1_step(euler_a.system, euler_a.y0, h, quad=rule)
    b = epcm1_step(euler_a.system, euler_a.y0, h, quad=8)
    c = epcm1_step(euler_a.system, euler_a.y0, h)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_allclose(a, c, atol=1e-15)


def test_step_rejects_state_shape(euler_a):
    with pytest.raises(InvalidArgumentError):
        epcm1_step(euler_a.system, np.zeros(4), 0.1)


# ------------------------------------------------------------------- presets


def test_method_ids():
    assert set(METHOD_IDS) == {"avf", "epcm1", "ffep1", "tfep1", *(f"legendre-{r}" for r in range(1, 7))}


@pytest.mark.parametrize("r", range(1, 7))
def test_legendre_presets(r):
    p = legendre_epcm_preset(r)
    assert p.id == f"legendre-{r}" and p.r == r
    np.testing.assert_allclose(p.nodes, gauss_legendre_rule(r).nodes)
    assert get_preset("legendre", r=r) == p == get_preset(f"legendre-{r}")


@pytest.mark.parametrize("bad", [0, 7, 2.0])
def test_legendre_range(bad):
    with pytest.raises(InvalidArgumentError):
        legendre_epcm_preset(bad)


@pytest.mark.parametrize("bad", ["rk4", "legendre-x", "legendre-9"])
def test_unknown_method(bad):
    with pytest.raises(InvalidArgumentError):
        get_preset(bad)


def test_legendre_r_conflict():
    with pytest.raises(InvalidArgumentError):
        get_preset("legendre-2", r=3)


def test_tfep1_generic_step_size():
    p = get_preset("tfep1", omega=2.0)
    assert p.generic_step_size(0.5) == pytest.approx(0.5 * tfep1_prefactor(1.0))
    assert get_preset("epcm1").generic_step_size(0.5) == 0.5


@pytest.mark.parametrize("method", ["epcm1", "ffep1", "tfep1"])
def test_preset_matches_generic(euler_a, rng, method):
    preset = get_preset(method, omega=OMEGA)
    for _ in range(10):
        y0 = rng.standard_normal(3)
        h = float(rng.uniform(0.02, 0.3))
        closed = make_stepper(method, euler_a.system, h, omega=OMEGA)(y0)
        plan = preset.plan(h)
        generic = fixed_point_step(plan, euler_a.system, y0)
        np.testing.assert_allclose(closed.y1, generic.y1, atol=1e-13)
        # stage vectors and midpoint states agree too
        np.testing.assert_allclose(closed.stage_X, generic.stage_X, atol=1e-13)
        np.testing.assert_allclose(closed.stage_states, generic.stage_states, atol=1e-13)


def test_avf_preset_matches_generic(harmonic, rng):
    for _ in range(10):
        y0 = rng.standard_normal(2)
        h = float(rng.uniform(0.05, 1.0))
        closed = make_stepper("avf", harmonic.system, h)(y0).y1
        generic = fixed_point_step(get_preset("avf").plan(h), harmonic.system, y0).y1
        np.testing.assert_allclose(closed, generic, atol=1e-13)


def test_stepper_reports_iterations(euler_a):
    res = make_stepper("legendre-3", euler_a.system, 0.1)(euler_a.y0)
    assert res.stage_X.shape == (3, 3) and res.iterations > 1 and res.converged
