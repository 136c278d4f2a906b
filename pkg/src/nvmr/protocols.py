"""The measurement protocols: runnable procedures producing signal traces
and resonance scans.

Probe convention: the two-level NV probe is prepared in a dressed state of
its drive (an eigenstate of Sx).  A flip-flop with the target moves it to
the other dressed state, so the survival probability in the prepared state
is the signal.  For a spin-1/2 target in the maximally mixed state at
exact Hartmann-Hahn matching the survival is

    S(t) = 1/2 + (1 + cos(2 pi J t)) / 4

with J the signal frequency returned by :func:`flip_flop_rate` (half the
transverse coupling amplitude; equivalently twice the rotating-frame
flip-flop matrix element).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.optimize

from .constants import (
    GAMMA_14N,
    GAMMA_31P,
    GAMMA_E,
    GYROMAGNETIC_KHZ_PER_G,
    dipolar_constant,
    dipolar_distance_nm,
    field_for_larmor,
)
from .dynamics import SignalTrace, evolve_lindblad, static_survival
from .models import (
    FieldConfig,
    H3PO4Geometry,
    NC60Geometry,
    PairProbeGeometry,
    build_h3po4,
    build_nc60,
    build_pair_probe,
    build_radical_pair,
    build_spin_labels,
    direction_from_angles,
    effective_larmor_khz,
    hyperfine_vector,
    orthogonal_unit_vector,
    unit_vector,
)
from .spincore import (
    CompositeSpace,
    embed,
    maximally_mixed,
    partial_trace,
    projector,
    spin_operators,
)

__all__ = [
    "ResonanceScan",
    "DirectionMap",
    "PositionConfig",
    "PositionEstimate",
    "QndConfig",
    "PairConfig",
    "SpinLabelConfig",
    "RadicalConfig",
    "analytic_signal",
    "flip_flop_rate",
    "direction_scan",
    "orthogonal_field_trace",
    "estimate_position",
    "rabi_for_resonance",
    "qnd_scan",
    "qnd_repeat",
    "nc60_transition_frequencies",
    "pair_deltas",
    "pair_scan_directions",
    "pair_resonance_experiment",
    "label_resonances",
    "radical_scan",
    "radical_monitor",
]

_UP_X = np.array([1.0, 1.0]) / np.sqrt(2)
_DOWN_X = np.array([1.0, -1.0]) / np.sqrt(2)


@dataclass
class ResonanceScan:
    """Signal versus a swept parameter at a declared readout.

    ``readout_time`` is the (maximum) readout duration; protocols that
    average over a window of durations record the sampled times in the
    metadata.
    """

    param_name: str
    param_unit: str
    grid: np.ndarray
    values: np.ndarray
    readout_time: float
    time_unit: str = "ms"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("scan grid must be strictly increasing")
        values = np.asarray(self.values, dtype=float)
        if values.min() < -1e-9 or values.max() > 1 + 1e-9:
            raise ValueError("scan signal outside [0, 1]")
        self.values = np.clip(values, 0.0, 1.0)


@dataclass
class DirectionMap:
    """Signal at fixed readout time over a (theta, phi) field-direction grid."""

    theta_grid: np.ndarray
    phi_grid: np.ndarray
    values: np.ndarray
    readout_time: float
    time_unit: str = "ms"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.theta_grid = np.asarray(self.theta_grid, dtype=float)
        self.phi_grid = np.asarray(self.phi_grid, dtype=float)
        if self.theta_grid.min() < 0 or self.theta_grid.max() > np.pi + 1e-12:
            raise ValueError("theta grid must lie in [0, pi]")
        if self.phi_grid.min() < 0 or self.phi_grid.max() >= 2 * np.pi:
            raise ValueError("phi grid must lie in [0, 2 pi)")
        self.values = np.clip(np.asarray(self.values, dtype=float), 0.0, 1.0)


def analytic_signal(j_khz: float, t_ms) -> np.ndarray | float:
    """Closed-form survival of the dressed probe on resonance with a
    maximally mixed spin-1/2 target: 1/2 + (1 + cos(2 pi J t))/4."""
    return 0.5 + 0.25 * (1.0 + np.cos(2 * np.pi * j_khz * np.asarray(t_ms)))


def flip_flop_rate(g_n_khz: float, r_hat: Sequence[float],
                   b_e_hat: Sequence[float]) -> float:
    """Signal oscillation frequency for a matched probe (kHz).

    ``g_n_khz`` is the bare dipolar constant of the probe-target pair,
    ``r_hat`` the unit displacement, ``b_e_hat`` the unit effective-field
    direction at the target.  The rate vanishes when the field is parallel
    (or anti-parallel) to the coupling's hyperfine direction and is
    maximal, ``g_n sqrt(3 rz^2 + 1) / 2``, when orthogonal.  This is the
    frequency at which the survival signal oscillates (the resolvable
    splitting is twice the flip-flop matrix element).
    """
    hv = hyperfine_vector(r_hat)
    b_e = unit_vector(b_e_hat)
    transverse = max(0.0, 1.0 - float(hv.h_hat @ b_e) ** 2)
    return 0.5 * g_n_khz * hv.amplitude * np.sqrt(transverse)


# --------------------------------------------------------------------------
# single-nucleus position measurement
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PositionConfig:
    """Position-measurement run parameters (field in Gauss, times in ms)."""

    b_gauss: float = 290.0
    rf_rabi_khz: float = 20.0
    readout_ms: float = 3.0
    include_back_action: bool = True
    geometry: H3PO4Geometry = field(default_factory=H3PO4Geometry.default)


def _position_point(config: PositionConfig, theta: float, phi: float,
                    rf_on: bool, t_ms: float) -> float:
    field_cfg = FieldConfig(
        b_gauss=config.b_gauss,
        direction=tuple(direction_from_angles(theta, phi)),
        include_back_action=config.include_back_action,
    )
    sites = config.geometry.sites()
    rabi = effective_larmor_khz(field_cfg, sites[0], sites[1])
    model = build_h3po4(
        field_cfg, rabi, config.rf_rabi_khz if rf_on else 0.0, config.geometry
    )
    dim_rest = model.space.total_dim // 2
    proj = embed(projector(_UP_X), 0, model.space)
    rho0 = proj / dim_rest
    return float(static_survival(model.hamiltonian, rho0, proj, [t_ms])[0])


def _position_row(args) -> list[float]:
    config, theta, phis, rf_on, t_ms = args
    return [_position_point(config, theta, phi, rf_on, t_ms) for phi in phis]


def direction_scan(config: PositionConfig | None = None, n_theta: int = 64,
                   n_phi: int = 64, rf_on: bool = True,
                   t_ms: float | None = None, jobs: int = 1) -> DirectionMap:
    """Survival at fixed readout time over a grid of field directions.

    The probe drive is re-matched to the target's effective Larmor
    frequency at every grid point.  The map maximum marks the directions
    (parallel and anti-parallel to the coupling's hyperfine vector) where
    the flip-flop rate vanishes.
    """
    config = config or PositionConfig()
    t_ms = config.readout_ms if t_ms is None else t_ms
    thetas = np.linspace(0.0, np.pi, n_theta)
    phis = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
    rows = [(config, th, phis, rf_on, t_ms) for th in thetas]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(_position_row, rows, chunksize=1))
    else:
        values = [_position_row(row) for row in rows]
    return DirectionMap(
        theta_grid=thetas,
        phi_grid=phis,
        values=np.asarray(values),
        readout_time=t_ms,
        metadata={"rf_on": rf_on, "protocol": "position-scan"},
    )


def orthogonal_field_trace(config: PositionConfig | None = None,
                           times_ms: Sequence[float] | None = None) -> SignalTrace:
    """Survival trace with the field orthogonal to the hyperfine vector,
    where the flip-flop rate is maximal."""
    config = config or PositionConfig()
    if times_ms is None:
        times_ms = np.linspace(0.0, config.readout_ms, 121)
    sites = config.geometry.sites()
    hv = hyperfine_vector(unit_vector(config.geometry.p_direction))
    b_hat = orthogonal_unit_vector(hv.h_hat)
    field_cfg = FieldConfig(
        b_gauss=config.b_gauss,
        direction=tuple(b_hat),
        include_back_action=config.include_back_action,
    )
    rabi = effective_larmor_khz(field_cfg, sites[0], sites[1])
    model = build_h3po4(field_cfg, rabi, config.rf_rabi_khz, config.geometry)
    proj = embed(projector(_UP_X), 0, model.space)
    rho0 = proj / (model.space.total_dim // 2)
    values = static_survival(model.hamiltonian, rho0, proj, times_ms)
    return SignalTrace(
        times=times_ms,
        values=values,
        metadata={"protocol": "position-trace", "field_direction": tuple(b_hat)},
    )


@dataclass(frozen=True)
class PositionEstimate:
    """Recovered hyperfine direction, coupling and distance.

    The direction map is symmetric under inversion of the field, so the
    hyperfine direction is determined only up to its antipode; the
    reported (theta, phi) is the refined map argmax and the ``alternate``
    fields carry the antipodal branch, which implies a different
    displacement geometry and therefore its own coupling and distance.
    """

    theta: float
    phi: float
    j_khz: float
    g_khz: float
    distance_nm: float
    fit_rms: float
    low_confidence: bool
    theta_alternate: float = float("nan")
    phi_alternate: float = float("nan")
    g_khz_alternate: float = float("nan")
    distance_nm_alternate: float = float("nan")


def _quadratic_peak(values: np.ndarray) -> float:
    """Sub-sample offset of an extremum from three points around it."""
    y0, y1, y2 = values
    denom = y0 - 2 * y1 + y2
    if denom == 0:
        return 0.0
    return float(np.clip(0.5 * (y0 - y2) / denom, -1.0, 1.0))


def fit_signal_frequency(times_ms: np.ndarray, values: np.ndarray,
                         j_max_khz: float) -> tuple[float, float]:
    """Least-squares fit of the closed-form survival to a trace.

    Scans a coarse frequency grid over (0, j_max] and polishes the best
    candidate; among near-degenerate minima the smallest frequency wins
    (aliases of an undersampled trace sit higher).
    Returns (J in kHz, rms residual).
    """
    times_ms = np.asarray(times_ms, dtype=float)
    values = np.asarray(values, dtype=float)
    coarse = np.linspace(j_max_khz / 2000.0, j_max_khz, 2000)

    def rms(j):
        return float(np.sqrt(np.mean((analytic_signal(j, times_ms) - values) ** 2)))

    costs = np.array([rms(j) for j in coarse])
    best = costs.min()
    near = np.flatnonzero(costs <= best * 1.01 + 1e-12)
    j0 = coarse[near[0]]  # smallest consistent frequency

    def resid(p):
        return analytic_signal(p[0], times_ms) - values

    sol = scipy.optimize.least_squares(
        resid, x0=[j0], bounds=([1e-9], [j_max_khz]), xtol=1e-14, ftol=1e-14
    )
    return float(sol.x[0]), rms(float(sol.x[0]))


def estimate_position(dmap: DirectionMap, trace: SignalTrace,
                      config: PositionConfig | None = None,
                      species_gamma: float = GAMMA_31P,
                      probe_gamma: float = GAMMA_E,
                      rms_threshold: float = 0.05) -> PositionEstimate:
    """Recover the hyperfine direction, coupling and distance.

    The direction is the refined argmax of the direction map (flip-flop
    rate zero); the signal frequency comes from fitting the closed-form
    survival to the orthogonal-field trace; the distance inverts the
    dipolar constant for the given species pair.
    """
    config = config or PositionConfig()
    values = dmap.values
    i, j = np.unravel_index(np.argmax(values), values.shape)
    n_t, n_p = values.shape
    d_theta = dmap.theta_grid[1] - dmap.theta_grid[0]
    d_phi = dmap.phi_grid[1] - dmap.phi_grid[0]
    theta = dmap.theta_grid[i]
    phi = dmap.phi_grid[j]
    if 0 < i < n_t - 1:
        theta = theta + d_theta * _quadratic_peak(values[i - 1:i + 2, j])
    col = values[i, [(j - 1) % n_p, j, (j + 1) % n_p]]
    phi = (phi + d_phi * _quadratic_peak(col)) % (2 * np.pi)

    # bound the fit by the trace's Nyquist frequency
    dt = np.min(np.diff(trace.times))
    j_fit, fit_rms = fit_signal_frequency(trace.times, trace.values, 0.5 / dt)

    def branch(theta_h):
        rz2 = _rz_squared_from_hyperfine_theta(theta_h)
        amplitude = np.sqrt(3 * rz2 + 1)
        g_n = 2.0 * j_fit / amplitude
        return float(g_n), float(dipolar_distance_nm(g_n, species_gamma, probe_gamma))

    g_n, distance = branch(theta)
    theta_alt = float(np.pi - theta)
    phi_alt = float((phi + np.pi) % (2 * np.pi))
    g_alt, distance_alt = branch(theta_alt)
    return PositionEstimate(
        theta=float(theta),
        phi=float(phi),
        j_khz=j_fit,
        g_khz=g_n,
        distance_nm=distance,
        fit_rms=fit_rms,
        low_confidence=fit_rms > rms_threshold,
        theta_alternate=theta_alt,
        phi_alternate=phi_alt,
        g_khz_alternate=g_alt,
        distance_nm_alternate=distance_alt,
    )


def _rz_squared_from_hyperfine_theta(theta: float) -> float:
    c = np.cos(theta)
    roots = np.roots([9.0, -(6.0 + 3.0 * c * c), 1.0 - c * c])
    for r in roots:
        if abs(r.imag) < 1e-12 and -1e-9 <= r.real <= 1 + 1e-9:
            if np.sign(3 * r.real - 1) == np.sign(c) or c == 0:
                return float(min(max(r.real, 0.0), 1.0))
    raise ValueError(f"no displacement geometry for hyperfine angle {theta}")


# --------------------------------------------------------------------------
# nuclear-spin-state readout on the caged-nitrogen molecule
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class QndConfig:
    """Nuclear-spin readout parameters (MHz / microseconds at the surface)."""

    omega_e_mhz: float = 300.0
    readout_us: float = 6.0
    geometry: NC60Geometry = field(default_factory=NC60Geometry)


def rabi_for_resonance(omega_target_khz: float, omega_e_khz: float) -> float:
    """Drive amplitude setting the dressed gap sqrt(2 Omega^2 + omega_e^2)
    to the requested value."""
    if omega_target_khz <= omega_e_khz:
        raise ValueError(
            f"target frequency {omega_target_khz} must exceed the electron "
            f"Zeeman splitting {omega_e_khz}"
        )
    return float(np.sqrt((omega_target_khz**2 - omega_e_khz**2) / 2.0))


def nc60_transition_frequencies(config: QndConfig, m_i: int) -> np.ndarray:
    """Exact single-quantum electron transition frequencies (MHz) of the
    molecule for a nuclear sector, from the 12-dimensional molecular block."""
    e_ops = spin_operators(1.5)
    n_ops = spin_operators(1.0)
    omega_e = config.omega_e_mhz * 1e3
    b_gauss = field_for_larmor(GAMMA_E, omega_e)
    omega_n = GAMMA_14N * b_gauss
    a = config.geometry.hyperfine_khz
    dq = config.geometry.quadrupole_khz
    h = (
        omega_e * np.kron(e_ops["z"], np.eye(3))
        + np.kron(np.eye(4), omega_n * n_ops["z"] + dq * n_ops["z"] @ n_ops["z"])
        + a * sum(np.kron(e_ops[c], n_ops[c]) for c in "xyz")
    )
    evals, evecs = np.linalg.eigh(h)
    # classify eigenstates by their dominant |m_s, m_I> component
    labels = []
    for k in range(12):
        idx = int(np.argmax(np.abs(evecs[:, k]) ** 2))
        ms_idx, mi_idx = divmod(idx, 3)
        ms = 1.5 - ms_idx
        mi = 1 - mi_idx
        labels.append((ms, mi, evals[k]))
    sector = sorted(
        [(ms, e) for ms, mi, e in labels if mi == m_i], key=lambda x: x[0]
    )
    freqs = [sector[k + 1][1] - sector[k][1] for k in range(len(sector) - 1)]
    return np.sort(np.abs(np.asarray(freqs))) / 1e3


def _qnd_initial(space: CompositeSpace, dark: np.ndarray, m_i: int) -> np.ndarray:
    rho_nv = projector(dark)
    rho_e = maximally_mixed(4)
    rho_n = np.zeros((3, 3), dtype=complex)
    rho_n[1 - m_i, 1 - m_i] = 1.0  # nuclear basis ordered m = +1, 0, -1
    return np.kron(np.kron(rho_nv, rho_e), rho_n)


def _qnd_point(config: QndConfig, omega_nv_mhz: float, m_i: int,
               t_us: float) -> float:
    omega_e_khz = config.omega_e_mhz * 1e3
    rabi = rabi_for_resonance(omega_nv_mhz * 1e3, omega_e_khz)
    model, dressed = build_nc60(rabi, omega_e_khz, config.geometry)
    rho0 = _qnd_initial(model.space, dressed.dark, m_i)
    proj = embed(projector(dressed.dark), 0, model.space)
    return float(
        static_survival(model.hamiltonian, rho0, proj, [t_us * 1e-3])[0]
    )


def _qnd_chunk(args) -> list[float]:
    config, omegas, m_i, t_us = args
    return [_qnd_point(config, w, m_i, t_us) for w in omegas]


def qnd_scan(m_i: int, omega_nv_grid_mhz: Sequence[float] | None = None,
             config: QndConfig | None = None, t_us: float | None = None,
             jobs: int = 1) -> ResonanceScan:
    """Dark-state survival versus the dressed transition frequency.

    For the m_I = +1 nuclear sector three dips appear around the shifted
    electron transition; for m_I = 0 the scanned window contains no
    resonance and the signal stays near one.
    """
    if m_i not in (0, 1):
        raise ValueError("nuclear sector must be 0 or +1")
    config = config or QndConfig()
    t_us = config.readout_us if t_us is None else t_us
    if omega_nv_grid_mhz is None:
        omega_nv_grid_mhz = np.arange(313.5, 319.0001, 0.05)
    grid = np.asarray(omega_nv_grid_mhz, dtype=float)
    if jobs > 1:
        chunks = np.array_split(grid, jobs * 4)
        args = [(config, chunk, m_i, t_us) for chunk in chunks if len(chunk)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_qnd_chunk, args))
        values = [v for part in parts for v in part]
    else:
        values = _qnd_chunk((config, grid, m_i, t_us))
    return ResonanceScan(
        param_name="omega_nv",
        param_unit="MHz",
        grid=grid,
        values=np.asarray(values),
        readout_time=t_us,
        time_unit="us",
        metadata={"protocol": "qnd", "m_i": m_i},
    )


def qnd_repeat(n_readouts: int, t_each_us: float, m_i: int,
               config: QndConfig | None = None,
               omega_nv_mhz: float | None = None,
               samples_per_readout: int = 6,
               ) -> tuple[SignalTrace, SignalTrace]:
    """Repeated readout cycles with projective re-preparation of the probe.

    Between cycles the NV is reset to the dark state while the molecule's
    state is carried over; returns the dark-state survival and the nuclear
    sector fidelity sampled within every cycle.
    """
    config = config or QndConfig()
    if omega_nv_mhz is None:
        freqs = nc60_transition_frequencies(config, m_i=1)
        omega_nv_mhz = float(np.sort(freqs)[len(freqs) // 2])
    omega_e_khz = config.omega_e_mhz * 1e3
    rabi = rabi_for_resonance(omega_nv_mhz * 1e3, omega_e_khz)
    model, dressed = build_nc60(rabi, omega_e_khz, config.geometry)
    space = model.space
    rho = _qnd_initial(space, dressed.dark, m_i)
    proj = embed(projector(dressed.dark), 0, space)
    p_dark_nv = projector(dressed.dark)

    times, signal, fidelity = [], [], []
    sample_offsets = np.linspace(0.0, t_each_us, samples_per_readout + 1)[1:]
    from .dynamics import evolve_static

    for cycle in range(n_readouts):
        traj = evolve_static(model.hamiltonian, rho, sample_offsets * 1e-3)
        for offset, state in zip(sample_offsets, traj.states):
            times.append(cycle * t_each_us + offset)
            signal.append(
                float(np.real(np.trace(proj @ state)))
            )
            rho_n = partial_trace(state, space, keep=[2])
            fidelity.append(float(np.real(rho_n[1 - m_i, 1 - m_i])))
        # projective reset of the probe; molecule state carried over
        rho_mol = partial_trace(traj.states[-1], space, keep=[1, 2])
        rho = np.kron(p_dark_nv, rho_mol)

    meta = {"protocol": "qnd-repeat", "m_i": m_i, "omega_nv_mhz": omega_nv_mhz}
    return (
        SignalTrace(times=np.asarray(times), values=np.asarray(signal),
                    time_unit="us", metadata=dict(meta)),
        SignalTrace(times=np.asarray(times), values=np.asarray(fidelity),
                    time_unit="us", metadata=dict(meta, kind="nuclear-fidelity")),
    )


# --------------------------------------------------------------------------
# spin-pair distance and alignment
# --------------------------------------------------------------------------

_SQ2 = 1 / np.sqrt(2)

_PAIR_DIRECTIONS: dict[str, tuple[float, float, float]] = {
    "x": (1, 0, 0),
    "y": (0, 1, 0),
    "z": (0, 0, 1),
    "x+y": (_SQ2, _SQ2, 0),
    "x-y": (_SQ2, -_SQ2, 0),
    "x+z": (_SQ2, 0, _SQ2),
    "x-z": (_SQ2, 0, -_SQ2),
    "y+z": (0, _SQ2, _SQ2),
    "y-z": (0, _SQ2, -_SQ2),
}


def pair_scan_directions() -> dict[str, np.ndarray]:
    """The nine field-direction presets used for geometry inversion."""
    return {k: np.asarray(v, dtype=float) for k, v in _PAIR_DIRECTIONS.items()}


def pair_deltas(g_khz: float, r_hat: Sequence[float]) -> dict[str, float]:
    """Closed-form resonance splittings (3g/2)|1 - 3 (r.b)^2| for the nine
    field-direction presets."""
    r = unit_vector(r_hat)
    return {
        name: float(1.5 * g_khz * abs(1 - 3 * (r @ unit_vector(b)) ** 2))
        for name, b in _PAIR_DIRECTIONS.items()
    }


@dataclass(frozen=True)
class PairConfig:
    """Spin-pair resonance run parameters.

    The readout averages the survival over ``readout_samples`` durations
    spanning [readout_min_ms, readout_ms]: a single fixed duration leaves
    coherent flip-flop fringes on the dip profile, while the average
    exposes the clean resonance envelope whose minima sit at the
    transition frequencies.  ``readout_samples=1`` recovers a fixed-time
    readout at ``readout_ms``.
    """

    target_larmor_khz: float = 500.0
    geometry: PairProbeGeometry = field(
        default_factory=PairProbeGeometry.water_default
    )
    readout_ms: float = 5.0
    readout_min_ms: float = 0.5
    readout_samples: int = 10


def _readout_times(t_max: float, t_min: float, samples: int) -> np.ndarray:
    if samples <= 1:
        return np.array([t_max])
    return np.linspace(t_min, t_max, samples)


def _pair_scan_values(config: PairConfig, b_hat: np.ndarray,
                      omega_grid: np.ndarray,
                      times_ms: np.ndarray) -> np.ndarray:
    gamma = GYROMAGNETIC_KHZ_PER_G[config.geometry.species]
    field_cfg = FieldConfig(
        b_gauss=field_for_larmor(gamma, config.target_larmor_khz),
        direction=tuple(b_hat),
    )
    base = build_pair_probe(field_cfg, 0.0, config.geometry)
    sx_nv = embed(spin_operators(0.5)["x"], 0, base.space)
    proj = embed(projector(_UP_X), 0, base.space)
    rho0 = proj / 4.0
    values = np.empty(len(omega_grid))
    for k, omega in enumerate(omega_grid):
        h = base.hamiltonian + omega * sx_nv
        values[k] = static_survival(h, rho0, proj, times_ms).mean()
    return values


def pair_resonance_experiment(config: PairConfig | None = None,
                              direction: str | Sequence[float] = "z",
                              omega_grid_khz: Sequence[float] | None = None,
                              t_ms: float | None = None) -> ResonanceScan:
    """Probe-drive scan over the pair's flip-flop transitions.

    Two dominant dips appear symmetrically about the target Larmor
    frequency, separated by (3g/2)|1 - 3 cos^2 theta| for the chosen field
    direction.
    """
    config = config or PairConfig()
    t_ms = config.readout_ms if t_ms is None else t_ms
    times = _readout_times(t_ms, config.readout_min_ms, config.readout_samples)
    if isinstance(direction, str):
        b_hat = unit_vector(_PAIR_DIRECTIONS[direction])
        dir_label = direction
    else:
        b_hat = unit_vector(direction)
        dir_label = "custom"
    if omega_grid_khz is None:
        span = 2.0 * config.geometry.coupling_khz
        omega_grid_khz = np.arange(
            config.target_larmor_khz - span, config.target_larmor_khz + span, 0.5
        )
    grid = np.asarray(omega_grid_khz, dtype=float)
    values = _pair_scan_values(config, b_hat, grid, times)
    return ResonanceScan(
        param_name="rabi",
        param_unit="kHz",
        grid=grid,
        values=values,
        readout_time=t_ms,
        metadata={"protocol": "pair", "direction": dir_label,
                  "b_hat": tuple(float(x) for x in b_hat),
                  "readout_times_ms": [float(t) for t in times]},
    )


# --------------------------------------------------------------------------
# driven spin labels
# --------------------------------------------------------------------------


def _label_couplings(center_distance_nm: float, separation_nm: float,
                     ) -> tuple[float, float]:
    """Field-axis NV couplings for two labels on the NV axis."""
    d1 = center_distance_nm - separation_nm / 2
    d2 = center_distance_nm + separation_nm / 2
    a1 = 2 * dipolar_constant(GAMMA_E, GAMMA_E, d1).magnitude
    a2 = 2 * dipolar_constant(GAMMA_E, GAMMA_E, d2).magnitude
    return a1, a2


@dataclass(frozen=True)
class SpinLabelConfig:
    """Spin-label resonance run parameters.

    NV couplings default to two labels sitting on the NV axis with their
    midpoint at ``center_distance_nm`` (2.8 separations away when left
    unset, keeping the probe linewidth below the splittings); explicit
    ``a1_khz``/``a2_khz`` override the placement.  The readout averages
    over several durations up to ``readout_us`` like the pair scan.
    """

    label_rabi_khz: float = 20e3
    separation_nm: float = 5.0
    cos_theta: float = 1.0
    center_distance_nm: float | None = None
    a1_khz: float | None = None
    a2_khz: float | None = None
    readout_us: float = 20.0
    readout_samples: int = 8

    @property
    def coupling_khz(self) -> float:
        return dipolar_constant(GAMMA_E, GAMMA_E, self.separation_nm).magnitude

    def couplings(self) -> tuple[float, float]:
        if self.a1_khz is not None and self.a2_khz is not None:
            return self.a1_khz, self.a2_khz
        center = self.center_distance_nm
        if center is None:
            center = 2.8 * self.separation_nm
        return _label_couplings(center, self.separation_nm)


def label_resonances(config: SpinLabelConfig | None = None,
                     omega_grid_khz: Sequence[float] | None = None,
                     t_us: float | None = None) -> ResonanceScan:
    """Probe-drive scan over the driven-label transitions.

    Two pronounced dips split by (3g/4)|1-3cos^2(theta)| flank the label
    Rabi frequency; with inhomogeneous NV couplings two weaker dips split
    by (g/4)|1-3cos^2(theta)| appear inside them.
    """
    config = config or SpinLabelConfig()
    t_us = config.readout_us if t_us is None else t_us
    times_ms = 1e-3 * _readout_times(
        t_us, 0.25 * t_us, config.readout_samples
    )
    a1, a2 = config.couplings()
    g = config.coupling_khz
    if omega_grid_khz is None:
        span = 1.3 * 0.75 * g * max(abs(1 - 3 * config.cos_theta**2), 1.0)
        omega_grid_khz = np.arange(
            config.label_rabi_khz - span, config.label_rabi_khz + span, 4.0
        )
    grid = np.asarray(omega_grid_khz, dtype=float)
    base = build_spin_labels(0.0, config.label_rabi_khz, a1, a2, g, config.cos_theta)
    sx_nv = embed(spin_operators(0.5)["x"], 0, base.space)
    proj = embed(projector(_UP_X), 0, base.space)
    rho0 = proj / 4.0
    values = np.empty(len(grid))
    for k, omega in enumerate(grid):
        h = base.hamiltonian + omega * sx_nv
        values[k] = static_survival(h, rho0, proj, times_ms).mean()
    return ResonanceScan(
        param_name="rabi",
        param_unit="kHz",
        grid=grid,
        values=values,
        readout_time=t_us,
        time_unit="us",
        metadata={"protocol": "labels", "a1_khz": a1, "a2_khz": a2,
                  "g_khz": g, "cos_theta": config.cos_theta,
                  "readout_times_us": [float(t * 1e3) for t in times_ms]},
    )


# --------------------------------------------------------------------------
# radical-pair recombination monitoring
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RadicalConfig:
    """Radical-pair run parameters; placement defaults as for spin labels."""

    label_rabi_khz: float = 100e3
    separation_nm: float = 2.0
    cos_theta: float = 1.0
    center_distance_nm: float | None = None
    k_per_us: float = 1.0
    a1_khz: float | None = None
    a2_khz: float | None = None
    readout_us: float = 3.0

    @property
    def coupling_khz(self) -> float:
        return dipolar_constant(GAMMA_E, GAMMA_E, self.separation_nm).magnitude

    def couplings(self) -> tuple[float, float]:
        if self.a1_khz is not None and self.a2_khz is not None:
            return self.a1_khz, self.a2_khz
        center = self.center_distance_nm
        if center is None:
            center = 2.8 * self.separation_nm
        return _label_couplings(center, self.separation_nm)

    @property
    def singlet_resonance_khz(self) -> float:
        """Probe frequency of the singlet-born transition,
        Omega + (g/8)(1 - 3 cos^2 theta)."""
        return self.label_rabi_khz + 0.125 * self.coupling_khz * (
            1 - 3 * self.cos_theta**2
        )


def _radical_initial(model_space: CompositeSpace) -> np.ndarray:
    """Probe in its lower dressed state, pair in the singlet, charge separated."""
    up, dn = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    singlet = (np.kron(up, dn) - np.kron(dn, up)) / np.sqrt(2)
    charge = np.zeros((2, 2), dtype=complex)
    charge[0, 0] = 1.0
    return np.kron(
        np.kron(projector(_DOWN_X), projector(singlet)), charge
    )


def radical_scan(config: RadicalConfig | None = None,
                 omega_grid_khz: Sequence[float] | None = None,
                 t_us: float | None = None) -> ResonanceScan:
    """Probe-drive scan across the singlet-born radical-pair transition.

    The probe is prepared in its lower dressed state so the allowed
    process absorbs the pair's singlet-to-aligned transition energy; a
    single dip appears near the singlet resonance when the recombination
    rate does not exceed the probe-pair coupling.
    """
    config = config or RadicalConfig()
    t_us = config.readout_us if t_us is None else t_us
    a1, a2 = config.couplings()
    g = config.coupling_khz
    if omega_grid_khz is None:
        center = config.singlet_resonance_khz
        omega_grid_khz = np.arange(center - 1500.0, center + 1500.0, 50.0)
    grid = np.asarray(omega_grid_khz, dtype=float)
    values = np.empty(len(grid))
    proj = None
    for k, omega in enumerate(grid):
        model = build_radical_pair(
            omega, config.label_rabi_khz, a1, a2, g, config.cos_theta,
            config.k_per_us,
        )
        if proj is None:
            proj = embed(projector(_DOWN_X), 0, model.space)
            rho0 = _radical_initial(model.space)
        traj = evolve_lindblad(model, rho0, [t_us * 1e-3])
        values[k] = np.real(np.trace(proj @ traj.states[0]))
    return ResonanceScan(
        param_name="rabi",
        param_unit="kHz",
        grid=grid,
        values=np.clip(values, 0, 1),
        readout_time=t_us,
        time_unit="us",
        metadata={"protocol": "radical", "k_per_us": config.k_per_us,
                  "g_khz": g, "a1_khz": a1, "a2_khz": a2},
    )


def radical_monitor(config: RadicalConfig | None = None,
                    times_us: Sequence[float] | None = None,
                    omega_nv_khz: float | None = None) -> SignalTrace:
    """Survival trace at the singlet resonance while the pair recombines.

    The early slope reflects the probe-pair flip-flop rate; as
    recombination empties the charge-separated sector the signal freezes.
    """
    config = config or RadicalConfig()
    if times_us is None:
        horizon = 8.0 / max(config.k_per_us, 1e-6)
        times_us = np.linspace(0.0, horizon, 161)
    times_us = np.asarray(times_us, dtype=float)
    omega = config.singlet_resonance_khz if omega_nv_khz is None else omega_nv_khz
    a1, a2 = config.couplings()
    model = build_radical_pair(
        omega, config.label_rabi_khz, a1, a2, config.coupling_khz,
        config.cos_theta, config.k_per_us,
    )
    rho0 = _radical_initial(model.space)
    proj = embed(projector(_DOWN_X), 0, model.space)
    traj = evolve_lindblad(model, rho0, times_us * 1e-3)
    values = np.clip(
        [float(np.real(np.trace(proj @ s))) for s in traj.states], 0.0, 1.0
    )
    return SignalTrace(
        times=times_us,
        values=values,
        time_unit="us",
        metadata={"protocol": "radical-monitor", "omega_nv_khz": omega,
                  "k_per_us": config.k_per_us},
    )
