import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rkhs_geometry import (
    DHB,
    Custom,
    DomainError,
    DruryArveson,
    FiniteLengthExample,
    Fock,
    Tagged,
    TruncationError,
    UnsupportedError,
    ValidationError,
    direct_sum,
    gram,
    kernel_norm,
    moments_from_weight,
    normalized_pairing,
    power,
    product,
    radial_weight_bergman,
    rescale,
)
from rkhs_geometry.metrics import rho_ball

radius = st.floats(0.0, 0.97)
angle = st.floats(0.0, 2 * math.pi)


@st.composite
def disk_pt(draw):
    t = draw(angle)
    return draw(radius) * complex(math.cos(t), math.sin(t))


@st.composite
def plane_pt(draw):
    return complex(draw(st.floats(-3, 3)), draw(st.floats(-3, 3)))


def dirichlet_oracle(x, y):
    with mpmath.workdps(40):
        u = mpmath.mpc(x) * mpmath.conj(mpmath.mpc(y))
        if u == 0:
            return 1.0 + 0j
        return complex(-mpmath.log1p(-u) / u)


def test_dirichlet_value():
    assert abs(DHB(0.0)(0.5, 0.5) - 1.1507282898071236) < 1e-14


@settings(max_examples=200, deadline=None)
@given(disk_pt(), disk_pt())
def test_dirichlet_matches_mpmath(x, y):
    # covers both sides of the series/closed-form switch
    assert abs(DHB(0.0)(x, y) - dirichlet_oracle(x, y)) <= 1e-13 * max(1.0, abs(dirichlet_oracle(x, y)))


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5, 2.0, 3.0])
def test_dhb_closed_form(alpha):
    x, y = 0.3 + 0.4j, -0.2 + 0.6j
    expected = complex(mpmath.power(1 - mpmath.mpc(x) * mpmath.conj(mpmath.mpc(y)), -alpha))
    assert abs(DHB(alpha)(x, y) - expected) < 1e-14


def test_fock_conjugates_second_argument():
    assert abs(Fock(2.0)(1j, 1.0) - np.exp(2.0 * 1j)) < 1e-14
    assert abs(kernel_norm(Fock(2.0), 1.0) - math.e) < 1e-14


FAMILIES = [
    (DHB(0.0), disk_pt),
    (DHB(1.0), disk_pt),
    (DHB(2.5), disk_pt),
    (Fock(1.0), plane_pt),
    (FiniteLengthExample(), disk_pt),
]


@pytest.mark.parametrize("spec,pts", FAMILIES, ids=lambda v: repr(v) if not callable(v) else "")
def test_hermitian_symmetry(spec, pts):
    @settings(max_examples=60, deadline=None)
    @given(pts(), pts())
    def check(x, y):
        assert abs(spec(x, y) - np.conj(spec(y, x))) <= 1e-12 * max(1.0, abs(spec(x, y)))

    check()


@pytest.mark.parametrize("spec,pts", FAMILIES, ids=lambda v: repr(v) if not callable(v) else "")
def test_gram_is_psd(spec, pts):
    @settings(max_examples=30, deadline=None)
    @given(st.lists(pts(), min_size=2, max_size=6, unique=True))
    def check(xs):
        g = gram(spec, xs)
        assert g.min_eig >= -1e-10 * float(np.real(np.trace(g.entries)))

    check()


def test_gram_example():
    g = gram(DHB(1.0), [0.0, 0.5])
    assert np.allclose(g.entries, [[1, 1], [1, 4 / 3]], atol=1e-15)
    assert g.is_psd


@pytest.mark.parametrize("spec,x,y", [
    (DHB(0.0), 0.3 + 0.2j, -0.4 + 0.1j),
    (DHB(0.0), 0.7 + 0.1j, 0.6 - 0.2j),
    (DHB(1.5), 0.3 + 0.2j, -0.4 + 0.1j),
    (Fock(0.7), 1.0 + 0.5j, -0.3 + 0.8j),
    (FiniteLengthExample(), 0.3, 0.5j),
])
def test_derivatives_against_differences(spec, x, y):
    h = 1e-5
    dx = (spec(x + h, y) - spec(x - h, y)) / (2 * h)
    # conj(y) moves by h when y moves by the real step h
    dxdy = (spec.dx(x, y + h) - spec.dx(x, y - h)) / (2 * h)
    assert abs(spec.dx(x, y) - dx) < 1e-8
    assert abs(spec.dxdy(x, y) - dxdy) < 1e-8
    assert abs(spec.dy(x, y) - np.conj(spec.dx(y, x))) < 1e-14


def test_domain_checks():
    with pytest.raises(DomainError):
        DHB(1.0)(1.2, 0.0)
    with pytest.raises(ValidationError):
        DHB(-1.0)
    with pytest.raises(ValidationError):
        Fock(0.0)


def test_pairing_values():
    p = normalized_pairing(Fock(1.0), 0.0, 2.0)
    assert abs(p.magnitude - math.exp(-2.0)) < 1e-15
    z, w = np.array([0.1 + 0.2j, 0.3]), np.array([-0.2j, 0.4 + 0.1j])
    p = normalized_pairing(DruryArveson(2), z, w)
    assert abs(math.sqrt(1 - p.magnitude**2) - rho_ball(2, z, w)) < 1e-14


def test_pairing_stays_accurate_for_huge_norms():
    # ||k_x||^2 = exp(beta |x|^2) overflows naive products; the log-space
    # route is accurate to about eps * beta |x|^2
    p = normalized_pairing(Fock(1.0), 25.0, 25.0 + 1e-3)
    assert abs(p.magnitude - math.exp(-0.5e-6)) < 1e-12
    p = normalized_pairing(Fock(1.0), 40.0, 41.0j)
    assert abs(p.magnitude - math.exp(-(1.0 + 41.0**2) / 2 + 0.0)) < 1e-12
    p = normalized_pairing(Fock(1.0), 40.0, 40.5 + 0.5j)
    assert abs(p.magnitude - math.exp(-0.25)) < 1e-12
    # phase of exp(x conj y) at x = 40, y = 40.5 + 0.5j is -20
    assert abs(np.angle(p.value) - np.angle(np.exp(-20j))) < 1e-10


def test_power_and_product():
    x, y = 0.3 + 0.2j, 0.5j
    assert abs(power(DHB(1.0), 2.0)(x, y) - DHB(2.0)(x, y)) < 1e-14
    assert abs(product(DHB(1.0), DHB(1.0))(x, y) - DHB(2.0)(x, y)) < 1e-14
    with pytest.raises(UnsupportedError):
        power(FiniteLengthExample(), 0.5)


def test_rescale_keeps_pairing_modulus():
    spec = rescale(DHB(1.0), "exp-quadratic")
    a = normalized_pairing(spec, 0.2, -0.5j).magnitude
    b = normalized_pairing(DHB(1.0), 0.2, -0.5j).magnitude
    assert abs(a - b) < 1e-15


def test_direct_sum_cross_terms_vanish():
    ds = direct_sum(DHB(1.0), Fock(1.0))
    assert ds(Tagged("left", 0.2), Tagged("right", 0.2)) == 0
    assert normalized_pairing(ds, Tagged("left", 0.2), Tagged("right", 0.3)).magnitude == 0
    assert abs(ds(Tagged("right", 1.0), Tagged("right", 1.0)) - math.e) < 1e-14


def test_custom_kernel_validation():
    with pytest.raises(ValidationError):
        Custom((0, 1), np.array([[1, 2], [2, 1]]))
    with pytest.raises(ValidationError):
        Custom((0, 1), np.array([[1, 1j], [1j, 1]]))
    c = Custom((0, 1), np.array([[2, 1], [1, 2]]))
    assert c(0, 1) == 1
    with pytest.raises(DomainError):
        c(0, 3)


def test_radial_weight_bergman_area_measure():
    m = moments_from_weight(lambda r: 1.0, N=64)
    assert abs(m[0] - math.pi) < 1e-12
    rb = radial_weight_bergman(m)
    assert abs(rb(0.3, 0.3) - (1 - 0.09) ** -2 / math.pi) < 1e-10
    with pytest.raises(TruncationError):
        rb(0.999, 0.999)
