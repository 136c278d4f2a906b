import pytest

from nvmr.constants import (
    GAMMA_13C,
    GAMMA_14N,
    GAMMA_1H,
    GAMMA_31P,
    GAMMA_E,
    dipolar_constant,
    dipolar_distance_nm,
    field_for_larmor,
    larmor_khz,
)


@pytest.mark.parametrize(
    "g1,g2,r,expected",
    [
        (GAMMA_31P, GAMMA_1H, 0.1, 48.6),
        (GAMMA_31P, GAMMA_1H, 0.2, 6.075),
        (GAMMA_E, GAMMA_E, 5.0, 416.1),
        (GAMMA_E, GAMMA_E, 8.0, 101.6),
    ],
)
def test_dipolar_reference_values(g1, g2, r, expected):
    assert dipolar_constant(g1, g2, r).magnitude == pytest.approx(expected, rel=5e-3)


def test_dipolar_inverse_cube_scaling():
    a = dipolar_constant(GAMMA_31P, GAMMA_1H, 0.1).magnitude
    b = dipolar_constant(GAMMA_31P, GAMMA_1H, 0.2).magnitude
    assert a / b == pytest.approx(8.0, rel=1e-12)


def test_dipolar_sign_tracks_gamma_product():
    assert dipolar_constant(1.0, 1.0, 1.0).sign == 1
    assert dipolar_constant(-1.0, 1.0, 1.0).sign == -1


def test_dipolar_rejects_nonpositive_distance():
    with pytest.raises(ValueError, match="positive"):
        dipolar_constant(GAMMA_1H, GAMMA_1H, 0.0)


def test_distance_roundtrip():
    g = dipolar_constant(GAMMA_E, GAMMA_E, 6.3).magnitude
    assert dipolar_distance_nm(g, GAMMA_E, GAMMA_E) == pytest.approx(6.3, rel=1e-9)


@pytest.mark.parametrize(
    "gamma,b,expected",
    [
        (GAMMA_31P, 290.0, 500.0),
        (GAMMA_1H, 290.0, 1235.0),
        (GAMMA_13C, 290.0, 310.6),
        (GAMMA_E, 107.0, 300e3),
        (GAMMA_13C, 107.0, 114.75),
        (GAMMA_14N, 107.0, 32.97),
    ],
)
def test_larmor_reference_table(gamma, b, expected):
    assert larmor_khz(gamma, b) == pytest.approx(expected, rel=5e-3)


def test_field_for_larmor():
    b = field_for_larmor(GAMMA_1H, 500.0)
    assert larmor_khz(GAMMA_1H, b) == pytest.approx(500.0)
    assert b == pytest.approx(117.0, rel=5e-3)
