import numpy as np
import pytest

from nvmr.constants import GAMMA_31P, GAMMA_E, dipolar_constant
from nvmr.models import (
    FieldConfig,
    H3PO4Geometry,
    build_probe_hamiltonian,
    effective_field_direction,
    effective_larmor_khz,
    hyperfine_vector,
    orthogonal_unit_vector,
    unit_vector,
)
from nvmr.protocols import flip_flop_rate
from nvmr.spincore import CompositeSpace, SpinSite


@pytest.fixture(scope="session")
def two_spin_resonant_model():
    """Probe plus a single phosphorus at the reference geometry, field
    orthogonal to the hyperfine vector and drive matched to the effective
    Larmor frequency; returns (model, signal frequency J in kHz)."""
    geo = H3PO4Geometry.default()
    hv = hyperfine_vector(unit_vector(geo.p_direction))
    b_hat = orthogonal_unit_vector(hv.h_hat)
    field = FieldConfig(b_gauss=290.0, direction=tuple(b_hat))
    space = CompositeSpace([
        SpinSite("NV", 0.5, GAMMA_E, (0.0, 0.0, 0.0), species="NV"),
        SpinSite("P", 0.5, GAMMA_31P,
                 tuple(5.0 * unit_vector(geo.p_direction)), species="31P"),
    ])
    rabi = effective_larmor_khz(field, space.sites[0], space.sites[1])
    model = build_probe_hamiltonian(rabi, field, space)
    b_e = effective_field_direction(field, space.sites[0], space.sites[1])
    g = dipolar_constant(GAMMA_E, GAMMA_31P, 5.0).magnitude
    j = flip_flop_rate(g, unit_vector(geo.p_direction), b_e)
    return model, j
