"""Physical constants and the point-dipole coupling.

Unit conventions used throughout the package:

* frequencies are ordinary frequencies in kHz (propagators are
  ``exp(-i 2 pi H t)`` with t in ms, so kHz x ms is a phase in cycles),
* magnetic fields in Gauss,
* distances in nm.

Gyromagnetic ratios are stored as magnitudes in kHz/G.  The electron value
is physically negative; builders that need the sign (Zeeman level ordering,
coupling signs) handle it explicitly and say so.  All resonance and
splitting formulas use coupling magnitudes, with the sign available
separately from :func:`dipolar_constant`.
"""

from __future__ import annotations

from typing import NamedTuple

# kHz per Gauss, magnitudes.
GAMMA_E = 2802.5
GAMMA_1H = 4.2577
GAMMA_31P = 1.7235
GAMMA_13C = 1.0708
GAMMA_14N = 0.3077

GYROMAGNETIC_KHZ_PER_G = {
    "e": GAMMA_E,
    "NV": GAMMA_E,
    "1H": GAMMA_1H,
    "31P": GAMMA_31P,
    "13C": GAMMA_13C,
    "14N": GAMMA_14N,
}

#: Species whose gyromagnetic ratio is negative (sign carried separately
#: from the magnitudes above).
NEGATIVE_GAMMA_SPECIES = frozenset({"e", "NV"})

#: NV ground-state zero-field splitting, kHz (2.87 GHz).
ZERO_FIELD_SPLITTING_KHZ = 2.87e6

#: mu0*h/(4 pi) expressed in kHz nm^3 / (kHz/G)^2: with gammas in kHz/G and
#: r in nm, ``DIPOLAR_PREFACTOR * g1 * g2 / r**3`` is the dipolar coupling
#: in kHz.  Value = 1e-7 [mu0/4pi] * 6.62607015e-34 [h] * 1e14 * 1e27 * 1e-3.
DIPOLAR_PREFACTOR = 6.62607015e-3


class DipolarCoupling(NamedTuple):
    """Magnitude (kHz) and sign of a point-dipole coupling constant."""

    magnitude: float
    sign: int


def larmor_khz(gamma_khz_per_g: float, b_gauss: float) -> float:
    """Larmor frequency gamma*B in kHz."""
    return gamma_khz_per_g * b_gauss


def dipolar_constant(
    gamma1_khz_per_g: float, gamma2_khz_per_g: float, distance_nm: float
) -> DipolarCoupling:
    """Point-dipole coupling constant between two magnetic moments.

    Parameters
    ----------
    gamma1_khz_per_g, gamma2_khz_per_g:
        Gyromagnetic ratios, kHz/G.  Magnitudes set the coupling magnitude;
        their signs only enter the returned ``sign``.
    distance_nm:
        Separation, must be > 0.

    Returns
    -------
    DipolarCoupling
        ``magnitude`` is mu0*h*|g1*g2| / (4 pi r^3) in kHz; ``sign`` is the
        product of the gamma signs (the conventional constant carries an
        extra overall minus for an electron-nucleus pair, applied by the
        Hamiltonian builders where it matters).
    """
    if distance_nm <= 0:
        raise ValueError(f"distance must be positive, got {distance_nm} nm")
    magnitude = (
        DIPOLAR_PREFACTOR
        * abs(gamma1_khz_per_g)
        * abs(gamma2_khz_per_g)
        / distance_nm**3
    )
    sign = 1 if gamma1_khz_per_g * gamma2_khz_per_g >= 0 else -1
    return DipolarCoupling(magnitude, sign)


def dipolar_distance_nm(
    coupling_khz: float, gamma1_khz_per_g: float, gamma2_khz_per_g: float
) -> float:
    """Distance at which two moments have the given coupling magnitude."""
    if coupling_khz <= 0:
        raise ValueError(f"coupling must be positive, got {coupling_khz} kHz")
    volume = (
        DIPOLAR_PREFACTOR
        * abs(gamma1_khz_per_g)
        * abs(gamma2_khz_per_g)
        / coupling_khz
    )
    return volume ** (1.0 / 3.0)


def field_for_larmor(gamma_khz_per_g: float, larmor: float) -> float:
    """Field magnitude (Gauss) giving the requested Larmor frequency (kHz)."""
    if gamma_khz_per_g == 0:
        raise ValueError("gamma must be nonzero")
    return larmor / abs(gamma_khz_per_g)
