"""Simulation and estimation toolkit for NV-center single-molecule
magnetic resonance: dressed-spin probing of single nuclei, nuclear-spin
readout, spin-pair geometry, spin labels and radical pairs.
"""

from .constants import (
    DIPOLAR_PREFACTOR,
    GAMMA_13C,
    GAMMA_14N,
    GAMMA_1H,
    GAMMA_31P,
    GAMMA_E,
    GYROMAGNETIC_KHZ_PER_G,
    ZERO_FIELD_SPLITTING_KHZ,
    dipolar_constant,
    dipolar_distance_nm,
    field_for_larmor,
    larmor_khz,
)
from .spincore import (
    CompositeSpace,
    SpinSite,
    embed,
    embed_many,
    expectation,
    maximally_mixed,
    partial_trace,
    projector,
    spin_operators,
)
from .models import (
    FieldConfig,
    H3PO4Geometry,
    HyperfineVector,
    LindbladModel,
    NC60Geometry,
    PairProbeGeometry,
    StaticModel,
    build_h3po4,
    build_nc60,
    build_pair_probe,
    build_probe_hamiltonian,
    build_radical_pair,
    build_spin_labels,
    build_spin_pair,
    effective_larmor_khz,
    hyperfine_vector,
    nv_target_coupling,
)
from .dynamics import (
    SignalTrace,
    Trajectory,
    evolve_lindblad,
    evolve_static,
    evolve_stepped,
    static_survival,
    survival,
)
from .protocols import (
    DirectionMap,
    PairConfig,
    PositionConfig,
    QndConfig,
    RadicalConfig,
    ResonanceScan,
    SpinLabelConfig,
    analytic_signal,
    direction_scan,
    estimate_position,
    flip_flop_rate,
    label_resonances,
    orthogonal_field_trace,
    pair_deltas,
    pair_resonance_experiment,
    pair_scan_directions,
    qnd_repeat,
    qnd_scan,
    rabi_for_resonance,
    radical_monitor,
    radical_scan,
)
from .inversion import (
    DegenerateAxisError,
    Dip,
    DipSet,
    PairGeometry,
    distance_from_g,
    find_dips,
    invert_pair_geometry,
    scan_deltas,
)
from .bath import BathConfig, build_bath_hamiltonian, decoupling_signal, sample_bath

__version__ = "0.1.0"
