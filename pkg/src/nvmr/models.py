"""Hamiltonian builders for the NV probe and its target spin systems.

Frame conventions
-----------------
Every builder returns a *static* Hamiltonian in a declared rotating frame:

* the NV electron spin is taken in the rotating frame of its microwave
  drive after the rotating-wave approximation, so a resonant drive of
  post-RWA amplitude Omega appears as ``Omega * Sx`` (two-level probe) or
  as an off-diagonal block ``Omega`` between m_s = 0 and m_s = +/-1
  (three-level probe);
* radio-frequency-driven nuclear species sit in their own on-resonance
  rotating frame, which removes their Zeeman term and leaves the drive as
  ``Omega_rf * Ix``;
* undriven species stay in the lab frame with their full Zeeman term.

Couplings involving the NV appear through its population operator (z-type
in the original basis), which is invariant under the NV's rotating frame,
so they are kept in full for undriven targets.  For driven targets only
the component along the quantization axis survives the target's rotating
frame; the transverse components average out and are dropped.

The two-level NV probe uses the {m_s=+1, m_s=0} subspace.  Its coupling
operator to other spins is the population projector onto m_s=+1,
``diag(1, 0)``, which splits into identity/2 (a static shift of the target
field, the "back-action") plus a dressed-spin-flipping Pauli-z/2 part.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .constants import (
    GAMMA_14N,
    GAMMA_1H,
    GAMMA_31P,
    GAMMA_E,
    GYROMAGNETIC_KHZ_PER_G,
    dipolar_constant,
    field_for_larmor,
)
from .spincore import (
    CompositeSpace,
    SpinSite,
    embed,
    embed_many,
    spin_operators,
)

__all__ = [
    "FieldConfig",
    "HyperfineVector",
    "DressedBasisNC60",
    "LindbladModel",
    "StaticModel",
    "hyperfine_vector",
    "direction_from_hyperfine",
    "direction_from_angles",
    "unit_vector",
    "orthogonal_unit_vector",
    "rotation_from_z",
    "nv_population_operator",
    "nv_target_coupling",
    "build_probe_hamiltonian",
    "effective_larmor_khz",
    "effective_field_direction",
    "H3PO4Geometry",
    "build_h3po4",
    "NC60Geometry",
    "build_nc60",
    "build_spin_pair",
    "PairProbeGeometry",
    "build_pair_probe",
    "build_spin_labels",
    "build_radical_pair",
    "singlet_projector",
]


def unit_vector(v: Sequence[float]) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("zero vector has no direction")
    return v / norm


def direction_from_angles(theta: float, phi: float) -> np.ndarray:
    """Unit vector from polar angle theta and azimuth phi (radians)."""
    return np.array(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
    )


def orthogonal_unit_vector(v: Sequence[float]) -> np.ndarray:
    """A deterministic unit vector orthogonal to ``v``."""
    v = unit_vector(v)
    trial = np.array([0.0, 0.0, 1.0]) if abs(v[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    w = np.cross(v, trial)
    return w / np.linalg.norm(w)


def rotation_from_z(axis: Sequence[float]) -> np.ndarray:
    """Rotation matrix taking +z onto ``axis`` (Rodrigues form)."""
    axis = unit_vector(axis)
    z = np.array([0.0, 0.0, 1.0])
    v = np.cross(z, axis)
    s = np.linalg.norm(v)
    c = float(z @ axis)
    if s < 1e-12:
        return np.eye(3) if c > 0 else np.diag([1.0, -1.0, -1.0])
    vx = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
    return np.eye(3) + vx + vx @ vx * ((1 - c) / s**2)


@dataclass(frozen=True)
class FieldConfig:
    """Static field plus the bookkeeping flags the builders need.

    ``include_back_action`` controls whether the static shift the NV
    population operator imprints on a target's effective field is folded
    into Hartmann-Hahn tuning (see :func:`effective_larmor_khz`).
    """

    b_gauss: float
    direction: tuple[float, float, float] = (0.0, 0.0, 1.0)
    include_back_action: bool = True

    def __post_init__(self):
        d = unit_vector(self.direction)
        if abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise ValueError("field direction could not be normalised")
        object.__setattr__(self, "direction", tuple(float(x) for x in d))

    @property
    def b_hat(self) -> np.ndarray:
        return np.asarray(self.direction, dtype=float)

    def with_direction(self, direction: Sequence[float]) -> "FieldConfig":
        return replace(self, direction=tuple(float(x) for x in direction))


@dataclass(frozen=True)
class HyperfineVector:
    """Angular structure of the secular NV-target dipolar coupling.

    ``components`` is the unit vector h(theta, phi) with
    cos(theta) = (3 rz^2 - 1)/sqrt(3 rz^2 + 1) and transverse components
    3 rx rz / sqrt(3 rz^2 + 1), 3 ry rz / sqrt(3 rz^2 + 1);
    ``amplitude`` is the dimensionless factor sqrt(3 rz^2 + 1) multiplying
    the bare dipolar constant.  For rz = 0 the azimuth is undefined
    (``degenerate_phi`` is set and phi is reported as 0).
    """

    theta: float
    phi: float
    amplitude: float
    components: tuple[float, float, float]
    degenerate_phi: bool = False

    @property
    def h_hat(self) -> np.ndarray:
        return np.asarray(self.components, dtype=float)


def hyperfine_vector(r_hat: Sequence[float], atol: float = 1e-9) -> HyperfineVector:
    """Hyperfine direction and amplitude for a unit displacement vector."""
    r = np.asarray(r_hat, dtype=float)
    if abs(np.linalg.norm(r) - 1.0) > 1e-6:
        raise ValueError(f"r_hat must be a unit vector, |r| = {np.linalg.norm(r):.6f}")
    rx, ry, rz = r
    amplitude = np.sqrt(3 * rz**2 + 1)
    hx = 3 * rx * rz / amplitude
    hy = 3 * ry * rz / amplitude
    hz = (3 * rz**2 - 1) / amplitude
    theta = float(np.arccos(np.clip(hz, -1.0, 1.0)))
    degenerate = abs(rz) < atol
    phi = 0.0 if degenerate else float(np.arctan2(hy, hx) % (2 * np.pi))
    return HyperfineVector(
        theta=theta,
        phi=phi,
        amplitude=float(amplitude),
        components=(float(hx), float(hy), float(hz)),
        degenerate_phi=degenerate,
    )


def direction_from_hyperfine(theta: float, phi: float,
                             rz_positive: bool = True) -> np.ndarray:
    """Displacement unit vector whose hyperfine direction is (theta, phi).

    Inverts :func:`hyperfine_vector`; used to place a target site so that
    its coupling has a prescribed angular signature.  The sign of rz is a
    free choice (both signs give the same hyperfine vector only for the
    z-aligned case; in general the map is two-to-one through the global
    sign of the transverse components), fixed here by ``rz_positive``.
    """
    c = np.cos(theta)
    # (3u - 1)^2 = c^2 (3u + 1) for u = rz^2; pick the branch with the
    # sign of (3u - 1) matching cos(theta).
    roots = np.roots([9.0, -(6.0 + 3.0 * c * c), 1.0 - c * c])
    candidates = [
        r.real
        for r in roots
        if abs(r.imag) < 1e-12 and -1e-12 <= r.real <= 1 + 1e-12
        and np.sign(3 * r.real - 1) == np.sign(c)
    ]
    if not candidates:
        raise ValueError(f"no displacement direction for hyperfine angle {theta}")
    u = min(max(candidates[0], 0.0), 1.0)
    rz = np.sqrt(u)
    if u < 1e-24:
        # dead-on transverse target: any azimuth works, pick x
        return np.array([1.0, 0.0, 0.0])
    amplitude = np.sqrt(3 * u + 1)
    rx = np.sin(theta) * np.cos(phi) * amplitude / (3 * rz)
    ry = np.sin(theta) * np.sin(phi) * amplitude / (3 * rz)
    r = np.array([rx, ry, rz if rz_positive else -rz])
    if not rz_positive:
        r[0], r[1] = -r[0], -r[1]
    return unit_vector(r)


def nv_population_operator(dim: int) -> np.ndarray:
    """NV coupling operator: population of m_s=+1.

    For the two-level probe subspace {m_s=+1, m_s=0} this is the projector
    diag(1, 0); for the full spin-1 it is the bare Sz = diag(1, 0, -1).
    """
    if dim == 2:
        return np.diag([1.0, 0.0]).astype(complex)
    if dim == 3:
        return np.diag([1.0, 0.0, -1.0]).astype(complex)
    raise ValueError(f"NV site must have dimension 2 or 3, got {dim}")


def _coupling_geometry(nv: SpinSite, target: SpinSite) -> tuple[float, np.ndarray]:
    rvec = target.position - nv.position
    distance = float(np.linalg.norm(rvec))
    if distance <= 0:
        raise ValueError(
            f"sites {nv.label!r} and {target.label!r} have coincident positions"
        )
    return distance, rvec / distance


def nv_target_coupling(space: CompositeSpace, nv_index: int,
                       target_index: int) -> np.ndarray:
    """Secular NV-target dipolar coupling embedded in the composite space.

    Couples the NV population operator to
    ``g [3 rz (rx Ix + ry Iy) + (3 rz^2 - 1) Iz]`` of the target, where g
    is the point-dipole constant for the pair and r the unit displacement.
    """
    nv = space.sites[nv_index]
    target = space.sites[target_index]
    distance, r_hat = _coupling_geometry(nv, target)
    g = dipolar_constant(nv.gamma_khz_per_g, target.gamma_khz_per_g, distance).magnitude
    rx, ry, rz = r_hat
    ops = spin_operators(target.s)
    target_op = g * (
        3 * rz * (rx * ops["x"] + ry * ops["y"]) + (3 * rz**2 - 1) * ops["z"]
    )
    return embed_many(
        space,
        {nv_index: nv_population_operator(nv.dim), target_index: target_op},
    )


def effective_field_direction(field: FieldConfig, nv: SpinSite,
                              target: SpinSite) -> np.ndarray:
    """Direction of the target's effective field including NV back-action."""
    distance, r_hat = _coupling_geometry(nv, target)
    hv = hyperfine_vector(r_hat)
    g = dipolar_constant(nv.gamma_khz_per_g, target.gamma_khz_per_g, distance).magnitude
    vec = target.gamma_khz_per_g * field.b_gauss * field.b_hat
    if field.include_back_action:
        vec = vec - 0.5 * g * hv.amplitude * hv.h_hat
    return unit_vector(vec)


def effective_larmor_khz(field: FieldConfig, nv: SpinSite, target: SpinSite) -> float:
    """Target Larmor frequency used for Hartmann-Hahn tuning.

    With back-action enabled this is |gamma B b - (A/2) h| where A is the
    full secular coupling amplitude and h the hyperfine direction; with it
    disabled, plain gamma*B.
    """
    if not field.include_back_action:
        return target.gamma_khz_per_g * field.b_gauss
    distance, r_hat = _coupling_geometry(nv, target)
    hv = hyperfine_vector(r_hat)
    g = dipolar_constant(nv.gamma_khz_per_g, target.gamma_khz_per_g, distance).magnitude
    vec = (
        target.gamma_khz_per_g * field.b_gauss * field.b_hat
        - 0.5 * g * hv.amplitude * hv.h_hat
    )
    return float(np.linalg.norm(vec))


@dataclass(frozen=True)
class StaticModel:
    """A composite space together with a static Hamiltonian (kHz)."""

    space: CompositeSpace
    hamiltonian: np.ndarray
    nv_index: int = 0


def _zeeman(space: CompositeSpace, index: int, gamma_b_khz: float,
            b_hat: np.ndarray) -> np.ndarray:
    ops = spin_operators(space.sites[index].s)
    op = sum(b_hat[i] * ops[c] for i, c in enumerate("xyz"))
    return -gamma_b_khz * embed(op, index, space)


def build_probe_hamiltonian(rabi_khz: float, field: FieldConfig,
                            space: CompositeSpace) -> StaticModel:
    """Two-level NV probe coupled to undriven nuclear targets.

    Site 0 must be the NV probe (dimension 2).  The Hamiltonian is
    ``Omega Sx_NV - sum_N gamma_N B I_N.b + sum_N coupling(NV, N)`` with
    every target kept in the lab frame.  Any Rabi amplitude is accepted;
    resonant exchange needs Hartmann-Hahn matching, see
    :func:`effective_larmor_khz`.
    """
    nv = space.sites[0]
    if nv.dim != 2:
        raise ValueError("probe model expects a two-level NV at site 0")
    sx = spin_operators(nv.s)["x"]
    h = rabi_khz * embed(sx, 0, space)
    for i, site in enumerate(space.sites[1:], start=1):
        h = h + _zeeman(space, i, site.gamma_khz_per_g * field.b_gauss, field.b_hat)
        h = h + nv_target_coupling(space, 0, i)
    return StaticModel(space=space, hamiltonian=h)


# --------------------------------------------------------------------------
# phosphoric-acid single-nucleus position measurement
# --------------------------------------------------------------------------

_TETRAHEDRAL_COS = -1.0 / 3.0

_DEFAULT_TRIPOD_AXIS = (0.7071067811865476, 0.0, 0.7071067811865476)


def _tripod_directions() -> np.ndarray:
    """Three symmetric bond directions below the +z axis (tetrahedral angle)."""
    sin_b = np.sqrt(1 - _TETRAHEDRAL_COS**2)
    angles = 2 * np.pi * np.arange(3) / 3
    return np.stack(
        [
            np.array([sin_b * np.cos(a), sin_b * np.sin(a), _TETRAHEDRAL_COS])
            for a in angles
        ]
    )


@dataclass(frozen=True)
class H3PO4Geometry:
    """Placement of the phosphorus target and its three protons.

    The phosphorus sits at ``p_distance_nm`` along ``p_direction`` from the
    NV; the protons sit at ``ph_distance_nm`` from the phosphorus along a
    symmetric tripod whose symmetry axis points along ``tripod_axis``.
    The molecular orientation is frozen; the observables only depend on it
    through the angles between the proton bonds and the applied field.
    """

    p_direction: tuple[float, float, float]
    p_distance_nm: float = 5.0
    ph_distance_nm: float = 0.2
    tripod_axis: tuple[float, float, float] = _DEFAULT_TRIPOD_AXIS

    @classmethod
    def default(cls) -> "H3PO4Geometry":
        # Direction chosen so the coupling's angular signature sits at
        # theta = 68.233 deg, phi = 93.841 deg.
        r_hat = direction_from_hyperfine(np.deg2rad(68.233), np.deg2rad(93.841))
        return cls(p_direction=tuple(float(x) for x in r_hat))

    def sites(self) -> list[SpinSite]:
        p_pos = self.p_distance_nm * unit_vector(self.p_direction)
        sites = [
            SpinSite("NV", 0.5, GAMMA_E, (0.0, 0.0, 0.0), species="NV"),
            SpinSite("P", 0.5, GAMMA_31P, tuple(p_pos), species="31P"),
        ]
        rot = rotation_from_z(self.tripod_axis)
        for k, u in enumerate(_tripod_directions() @ rot.T):
            pos = p_pos + self.ph_distance_nm * u
            sites.append(SpinSite(f"H{k}", 0.5, GAMMA_1H, tuple(pos), species="1H"))
        return sites


def build_h3po4(field: FieldConfig, nv_rabi_khz: float, rf_rabi_khz: float,
                geometry: H3PO4Geometry | None = None) -> StaticModel:
    """NV probe, phosphorus target, and three protons.

    With ``rf_rabi_khz > 0`` the protons are driven on resonance: their
    Zeeman term is removed (rotating frame), the drive enters as
    ``Omega_rf Ix`` along a fixed axis orthogonal to the field, and only
    the field-axis component of their coupling to the NV survives.  With
    the drive off they stay in the lab frame with the full secular NV
    coupling.  Proton-phosphorus couplings are kept as field-axis zz terms
    (their flip-flop part is suppressed by the Larmor mismatch).
    Proton-proton couplings are neglected.
    """
    geometry = geometry or H3PO4Geometry.default()
    sites = geometry.sites()
    space = CompositeSpace(sites)
    nv, p_site = sites[0], sites[1]
    b_hat = field.b_hat
    sx = spin_operators(0.5)["x"]

    h = nv_rabi_khz * embed(sx, 0, space)
    h = h + _zeeman(space, 1, p_site.gamma_khz_per_g * field.b_gauss, b_hat)
    h = h + nv_target_coupling(space, 0, 1)

    rf_axis = orthogonal_unit_vector(b_hat)
    p_ops = spin_operators(0.5)
    proj_b = lambda ops: sum(b_hat[i] * ops[c] for i, c in enumerate("xyz"))
    rf_on = rf_rabi_khz > 0
    for i, h_site in enumerate(sites[2:], start=2):
        if rf_on:
            drive_op = sum(rf_axis[i_] * p_ops[c] for i_, c in enumerate("xyz"))
            h = h + rf_rabi_khz * embed(drive_op, i, space)
            # rotating frame of the proton: only the field-axis component
            # of the NV coupling survives
            distance, r_hat = _coupling_geometry(nv, h_site)
            hv = hyperfine_vector(r_hat)
            g = dipolar_constant(GAMMA_E, GAMMA_1H, distance).magnitude
            a_parallel = g * hv.amplitude * float(hv.h_hat @ b_hat)
            h = h + a_parallel * embed_many(
                space, {0: nv_population_operator(2), i: proj_b(p_ops)}
            )
        else:
            h = h + _zeeman(space, i, GAMMA_1H * field.b_gauss, b_hat)
            h = h + nv_target_coupling(space, 0, i)
        # phosphorus-proton coupling, field-axis zz component
        rvec = h_site.position - p_site.position
        d_ph = float(np.linalg.norm(rvec))
        cos_t = float(rvec @ b_hat) / d_ph
        g_ph = dipolar_constant(GAMMA_31P, GAMMA_1H, d_ph).magnitude
        h = h + g_ph * (1 - 3 * cos_t**2) * embed_many(
            space, {1: proj_b(p_ops), i: proj_b(p_ops)}
        )
    return StaticModel(space=space, hamiltonian=h)


# --------------------------------------------------------------------------
# endohedral-fullerene nuclear-spin readout
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DressedBasisNC60:
    """Dressed states of the symmetrically driven three-level NV.

    Basis order for the state vectors is |m_s=+1>, |0>, |-1>.  The drive
    splits the levels into |u> at +omega1, |D> at 0 and |d> at -omega1
    with omega1 = sqrt(2 Omega^2 + omega_e^2); coupling through the NV
    population operator connects |D> to |u> and |d> (at omega1) and |u> to
    |d> (at omega2 = 2 omega1).
    """

    eta_plus: float
    eta_minus: float
    u: np.ndarray
    d_state: np.ndarray
    dark: np.ndarray
    omega1_khz: float
    omega2_khz: float


def _dressed_nc60(rabi_khz: float, omega_e_khz: float) -> DressedBasisNC60:
    if rabi_khz <= 0:
        raise ValueError("dressed basis requires a positive Rabi amplitude")
    lam = np.sqrt(2 * rabi_khz**2 + omega_e_khz**2)
    eta_p = (lam + omega_e_khz) / rabi_khz
    eta_m = (lam - omega_e_khz) / rabi_khz
    u = np.array([eta_p**2, 2 * eta_p, 2.0], dtype=complex) / (eta_p**2 + 2)
    d = np.array([eta_m**2, -2 * eta_m, 2.0], dtype=complex) / (eta_m**2 + 2)
    dark = np.array([rabi_khz, -omega_e_khz, -rabi_khz], dtype=complex) / lam
    return DressedBasisNC60(
        eta_plus=float(eta_p),
        eta_minus=float(eta_m),
        u=u,
        d_state=d,
        dark=dark,
        omega1_khz=float(lam),
        omega2_khz=float(2 * lam),
    )


@dataclass(frozen=True)
class NC60Geometry:
    """Placement of the caged-nitrogen molecule relative to the NV."""

    distance_nm: float = 8.0
    direction: tuple[float, float, float] = (
        np.sin(np.pi / 4), 0.0, np.cos(np.pi / 4))
    hyperfine_khz: float = 15.88e3
    quadrupole_khz: float = 5.1e3


def build_nc60(rabi_khz: float, omega_e_khz: float,
               geometry: NC60Geometry | None = None,
               secular_hyperfine: bool = False,
               ) -> tuple[StaticModel, DressedBasisNC60 | None]:
    """Three-level NV probe coupled to the caged-nitrogen molecule.

    The NV block (rotating frame at the zero-field splitting, field along
    its axis) is ``omega_e (|+1><+1| - |-1><-1|)`` plus the symmetric
    drive ``Omega (|+1><0| + |-1><0| + h.c.)``.  The molecule carries an
    electron spin 3/2 and a nitrogen spin 1 with isotropic hyperfine
    coupling ``a S.I``, nuclear quadrupole term and Zeeman terms; the full
    transverse hyperfine is kept by default because its virtual
    transitions generate the observed satellite structure
    (``secular_hyperfine=True`` truncates to a Sz Iz).  The NV couples to
    the molecular electron through the secular dipolar form.
    """
    geometry = geometry or NC60Geometry()
    b_gauss = field_for_larmor(GAMMA_E, omega_e_khz)
    omega_n = GAMMA_14N * b_gauss
    pos = geometry.distance_nm * unit_vector(geometry.direction)
    sites = [
        SpinSite("NV", 1.0, GAMMA_E, (0.0, 0.0, 0.0), species="NV"),
        SpinSite("e", 1.5, GAMMA_E, tuple(pos), species="e"),
        SpinSite("N", 1.0, GAMMA_14N, tuple(pos), species="14N"),
    ]
    space = CompositeSpace(sites)

    nv_block = omega_e_khz * np.diag([1.0, 0.0, -1.0]) + rabi_khz * np.array(
        [[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float
    )
    h = embed(nv_block.astype(complex), 0, space)

    e_ops = spin_operators(1.5)
    n_ops = spin_operators(1.0)
    h = h + omega_e_khz * embed(e_ops["z"], 1, space)
    h = h + embed(
        omega_n * n_ops["z"] + geometry.quadrupole_khz * (n_ops["z"] @ n_ops["z"]),
        2,
        space,
    )
    a = geometry.hyperfine_khz
    h = h + a * embed_many(space, {1: e_ops["z"], 2: n_ops["z"]})
    if not secular_hyperfine:
        h = h + a * (
            embed_many(space, {1: e_ops["x"], 2: n_ops["x"]})
            + embed_many(space, {1: e_ops["y"], 2: n_ops["y"]})
        )
    h = h + nv_target_coupling(space, 0, 1)
    dressed = _dressed_nc60(rabi_khz, omega_e_khz) if rabi_khz > 0 else None
    return StaticModel(space=space, hamiltonian=h), dressed


# --------------------------------------------------------------------------
# interacting spin pair
# --------------------------------------------------------------------------


def _warn_secular_ratio(large: float, small: float, what: str) -> None:
    if small != 0 and abs(large / small) < 10:
        warnings.warn(
            f"{what}: scale separation |{large:.4g}/{small:.4g}| < 10, "
            "secular closed forms degrade",
            stacklevel=3,
        )


def build_spin_pair(g_khz: float, cos_theta: float, omega_n_khz: float,
                    ) -> tuple[StaticModel, list[tuple[float, np.ndarray]]]:
    """Secular Hamiltonian of two like spins in a strong field.

    Returns the two-spin model (quantization axis = field axis) and its
    closed-form eigensystem ordered as [aligned-up, symmetric, singlet,
    aligned-down] with energies
    ``omega_N + g12/4, -g12/2, 0, -omega_N + g12/4`` where
    ``g12 = g (1 - 3 cos^2 theta)``.
    """
    _warn_secular_ratio(omega_n_khz, g_khz, "spin pair")
    g12 = g_khz * (1 - 3 * cos_theta**2)
    sites = [
        SpinSite("n1", 0.5, GAMMA_1H, None, species="pair"),
        SpinSite("n2", 0.5, GAMMA_1H, None, species="pair"),
    ]
    space = CompositeSpace(sites)
    ops = spin_operators(0.5)
    zz = embed_many(space, {0: ops["z"], 1: ops["z"]})
    xx = embed_many(space, {0: ops["x"], 1: ops["x"]})
    yy = embed_many(space, {0: ops["y"], 1: ops["y"]})
    h = omega_n_khz * (embed(ops["z"], 0, space) + embed(ops["z"], 1, space))
    h = h + g12 * (zz - 0.5 * (xx + yy))

    up, dn = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    sym = np.kron(up, dn) + np.kron(dn, up)
    anti = np.kron(up, dn) - np.kron(dn, up)
    levels = [
        (omega_n_khz + g12 / 4, np.kron(up, up).astype(complex)),
        (-g12 / 2, (sym / np.sqrt(2)).astype(complex)),
        (0.0, (anti / np.sqrt(2)).astype(complex)),
        (-omega_n_khz + g12 / 4, np.kron(dn, dn).astype(complex)),
    ]
    return StaticModel(space=space, hamiltonian=h, nv_index=-1), levels


@dataclass(frozen=True)
class PairProbeGeometry:
    """A two-spin target molecule probed by the NV.

    The pair's midpoint sits at ``center_distance_nm`` along
    ``center_direction`` from the NV; the two spins are separated by
    ``separation_nm`` along ``pair_direction``.
    """

    separation_nm: float = 0.1515
    pair_direction: tuple[float, float, float] = (0.0, 0.0, 1.0)
    center_distance_nm: float = 5.0
    center_direction: tuple[float, float, float] = (0.0, 0.0, 1.0)
    species: str = "1H"

    @classmethod
    def water_default(cls) -> "PairProbeGeometry":
        """Two protons 0.1515 nm apart, oriented at (118.2, 288.85) degrees."""
        pair_dir = direction_from_angles(np.deg2rad(118.2), np.deg2rad(288.85))
        center_dir = direction_from_angles(np.deg2rad(60.0), np.deg2rad(20.0))
        return cls(
            separation_nm=0.1515,
            pair_direction=tuple(float(x) for x in pair_dir),
            center_distance_nm=5.0,
            center_direction=tuple(float(x) for x in center_dir),
        )

    def sites(self) -> list[SpinSite]:
        gamma = GYROMAGNETIC_KHZ_PER_G[self.species]
        center = self.center_distance_nm * unit_vector(self.center_direction)
        offset = 0.5 * self.separation_nm * unit_vector(self.pair_direction)
        return [
            SpinSite("NV", 0.5, GAMMA_E, (0.0, 0.0, 0.0), species="NV"),
            SpinSite("n1", 0.5, gamma, tuple(center + offset), species=self.species),
            SpinSite("n2", 0.5, gamma, tuple(center - offset), species=self.species),
        ]

    @property
    def coupling_khz(self) -> float:
        gamma = GYROMAGNETIC_KHZ_PER_G[self.species]
        return dipolar_constant(gamma, gamma, self.separation_nm).magnitude


def build_pair_probe(field: FieldConfig, nv_rabi_khz: float,
                     geometry: PairProbeGeometry) -> StaticModel:
    """NV probe plus an interacting like-spin pair, all terms static.

    The pair keeps its full dipolar interaction (no secular truncation;
    the exact propagation resolves the small non-secular shifts), the
    Zeeman terms are along the applied field, and each member couples to
    the NV through the secular dipolar form.
    """
    sites = geometry.sites()
    space = CompositeSpace(sites)
    gamma = sites[1].gamma_khz_per_g
    sx = spin_operators(0.5)["x"]
    h = nv_rabi_khz * embed(sx, 0, space)
    for i in (1, 2):
        h = h + _zeeman(space, i, gamma * field.b_gauss, field.b_hat)
        h = h + nv_target_coupling(space, 0, i)

    rvec = sites[2].position - sites[1].position
    distance = float(np.linalg.norm(rvec))
    r_hat = rvec / distance
    g = dipolar_constant(gamma, gamma, distance).magnitude
    ops = spin_operators(0.5)
    dot = sum(
        embed_many(space, {1: ops[c], 2: ops[c]}) for c in "xyz"
    )
    proj = lambda idx: sum(r_hat[i] * embed(ops[c], idx, space) for i, c in enumerate("xyz"))
    h = h + g * (dot - 3 * (proj(1) @ proj(2)))
    return StaticModel(space=space, hamiltonian=h)


# --------------------------------------------------------------------------
# driven spin labels and radical pairs
# --------------------------------------------------------------------------


def build_spin_labels(nv_rabi_khz: float, label_rabi_khz: float,
                      a1_khz: float, a2_khz: float, g_khz: float,
                      cos_theta: float) -> StaticModel:
    """NV probe plus two resonantly driven electron labels.

    The labels are driven at amplitude ``label_rabi_khz`` (their Zeeman
    terms are removed by the on-resonance rotating frame), couple to the
    NV population operator through their field-axis components ``a1, a2``,
    and couple to each other through the secular dipolar term
    ``g12 [S1z S2z - (S1x S2x + S1y S2y)/2]`` with
    ``g12 = g (1 - 3 cos^2 theta)``.
    """
    _warn_secular_ratio(label_rabi_khz, g_khz, "spin labels")
    g12 = g_khz * (1 - 3 * cos_theta**2)
    sites = [
        SpinSite("NV", 0.5, GAMMA_E, (0.0, 0.0, 0.0), species="NV"),
        SpinSite("L1", 0.5, GAMMA_E, None, species="e"),
        SpinSite("L2", 0.5, GAMMA_E, None, species="e"),
    ]
    space = CompositeSpace(sites)
    ops = spin_operators(0.5)
    nv_pop = nv_population_operator(2)
    h = nv_rabi_khz * embed(ops["x"], 0, space)
    h = h + label_rabi_khz * (embed(ops["x"], 1, space) + embed(ops["x"], 2, space))
    h = h + a1_khz * embed_many(space, {0: nv_pop, 1: ops["z"]})
    h = h + a2_khz * embed_many(space, {0: nv_pop, 2: ops["z"]})
    zz = embed_many(space, {1: ops["z"], 2: ops["z"]})
    xx = embed_many(space, {1: ops["x"], 2: ops["x"]})
    yy = embed_many(space, {1: ops["y"], 2: ops["y"]})
    h = h + g12 * (zz - 0.5 * (xx + yy))
    return StaticModel(space=space, hamiltonian=h)


def singlet_projector(space: CompositeSpace, i: int, j: int) -> np.ndarray:
    """Projector onto the two-spin singlet of sites i and j."""
    if space.sites[i].dim != 2 or space.sites[j].dim != 2:
        raise ValueError("singlet projector needs two spin-1/2 sites")
    up, dn = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    # build in the two-site subspace then embed as an operator product sum
    ops = spin_operators(0.5)
    dot = sum(embed_many(space, {i: ops[c], j: ops[c]}) for c in "xyz")
    return 0.25 * np.eye(space.total_dim, dtype=complex) - dot


@dataclass(frozen=True)
class LindbladModel:
    """Open-system model: static Hamiltonian plus jump operators.

    Rates are folded into the jump operators (each is sqrt(rate) times a
    transition operator); ``space`` includes a two-level charge register
    whose basis states are [separated, product] in that order.
    """

    space: CompositeSpace
    hamiltonian: np.ndarray
    jumps: tuple[np.ndarray, ...]
    charge_index: int | None = None


CHARGE_SEPARATED, CHARGE_PRODUCT = 0, 1


def build_radical_pair(nv_rabi_khz: float, label_rabi_khz: float,
                       a1_khz: float, a2_khz: float, g_khz: float,
                       cos_theta: float, k_per_us: float) -> LindbladModel:
    """Spin-label model extended with charge recombination.

    The spin Hamiltonian of :func:`build_spin_labels` acts only while the
    charge register is in the separated state; the NV drive acts in both
    charge sectors.  Recombination transfers the separated state to the
    product state at rate k through two jump operators, one projecting the
    pair onto its singlet and one onto its triplet subspace.
    """
    if k_per_us < 0:
        raise ValueError(f"recombination rate must be >= 0, got {k_per_us}")
    spin_model = build_spin_labels(
        nv_rabi_khz, label_rabi_khz, a1_khz, a2_khz, g_khz, cos_theta
    )
    sites = list(spin_model.space.sites) + [
        SpinSite("charge", 0.5, 0.0, None, species="charge")
    ]
    space = CompositeSpace(sites)
    dim_spin = spin_model.space.total_dim
    sep = np.zeros((2, 2), dtype=complex)
    sep[CHARGE_SEPARATED, CHARGE_SEPARATED] = 1.0
    ops = spin_operators(0.5)
    nv_drive = nv_rabi_khz * embed(ops["x"], 0, space)
    h_rest = spin_model.hamiltonian - nv_rabi_khz * embed(
        ops["x"], 0, spin_model.space
    )
    h = nv_drive + np.kron(h_rest, sep)

    k_per_ms = 1e3 * k_per_us
    q_singlet = singlet_projector(spin_model.space, 1, 2)
    q_triplet = np.eye(dim_spin, dtype=complex) - q_singlet
    collapse = np.zeros((2, 2), dtype=complex)
    collapse[CHARGE_PRODUCT, CHARGE_SEPARATED] = 1.0
    jump_s = np.sqrt(k_per_ms) * np.kron(q_singlet, collapse)
    jump_t = np.sqrt(k_per_ms) * np.kron(q_triplet, collapse)
    return LindbladModel(
        space=space,
        hamiltonian=h,
        jumps=(jump_s, jump_t),
        charge_index=len(sites) - 1,
    )
