"""Spin operators and composite Hilbert-space construction.

Operators are plain complex numpy arrays.  Basis convention, used
everywhere in the package: a spin-s site has dimension 2s+1 with the
ladder ordered m = s, s-1, ..., -s.  Composite-space operators follow the
site order of the :class:`CompositeSpace` as Kronecker factors, leftmost
site first.

Hamiltonian-valued operators carry kHz units by convention; invariants on
them (Hermiticity, projector idempotence) are enforced by the validator
helpers here and by the dynamics layer at the point of use.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Iterable, Mapping, Sequence

import numpy as np

SUPPORTED_SPINS = (0.5, 1.0, 1.5)

#: Hard cap on the composite dimension; every scenario in scope fits well
#: below it (largest is the 8-spin bath plus NV at 512).
MAX_TOTAL_DIM = 4096

HERMITICITY_RTOL = 1e-12


def spin_operators(s: float) -> dict[str, np.ndarray]:
    """Angular-momentum matrices for a single spin.

    Returns a dict with keys ``"x"``, ``"y"``, ``"z"``, ``"plus"``,
    ``"minus"`` of shape (2s+1, 2s+1), satisfying [Sx, Sy] = i Sz and
    S+|s,m> = sqrt(s(s+1) - m(m+1)) |s,m+1>.
    """
    if s not in SUPPORTED_SPINS:
        raise ValueError(
            f"unsupported spin quantum number {s!r}; supported: {SUPPORTED_SPINS}"
        )
    dim = int(round(2 * s + 1))
    m = s - np.arange(dim)
    sz = np.diag(m).astype(complex)
    splus = np.zeros((dim, dim), dtype=complex)
    for k in range(1, dim):
        splus[k - 1, k] = np.sqrt(s * (s + 1) - m[k] * (m[k] + 1))
    sminus = splus.conj().T
    return {
        "x": (splus + sminus) / 2,
        "y": (splus - sminus) / 2j,
        "z": sz,
        "plus": splus,
        "minus": sminus,
    }


@dataclass(frozen=True)
class SpinSite:
    """One spin in the composite system.

    Positions are in nm relative to the NV center at the origin, with the
    NV symmetry axis along +z.  ``gamma_khz_per_g`` is a magnitude; see
    :mod:`nvmr.constants` for the sign convention.
    """

    label: str
    s: float
    gamma_khz_per_g: float
    position_nm: tuple[float, float, float] | None = None
    species: str = ""

    def __post_init__(self):
        if self.s not in SUPPORTED_SPINS:
            raise ValueError(f"unsupported spin {self.s} for site {self.label!r}")
        if self.position_nm is not None:
            object.__setattr__(self, "position_nm", tuple(float(x) for x in self.position_nm))

    @property
    def dim(self) -> int:
        return int(round(2 * self.s + 1))

    @property
    def position(self) -> np.ndarray:
        if self.position_nm is None:
            raise ValueError(f"site {self.label!r} has no position")
        return np.asarray(self.position_nm, dtype=float)


@dataclass(frozen=True)
class CompositeSpace:
    """Ordered collection of spin sites defining the tensor-product space."""

    sites: tuple[SpinSite, ...]
    dims: tuple[int, ...] = field(init=False)
    total_dim: int = field(init=False)

    def __init__(self, sites: Iterable[SpinSite]):
        object.__setattr__(self, "sites", tuple(sites))
        dims = tuple(site.dim for site in self.sites)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "total_dim", prod(dims) if dims else 1)
        if self.total_dim > MAX_TOTAL_DIM:
            raise ValueError(
                f"composite dimension {self.total_dim} exceeds cap {MAX_TOTAL_DIM}"
            )
        labels = [s.label for s in self.sites]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate site labels: {labels}")

    def index_of(self, label: str) -> int:
        for i, site in enumerate(self.sites):
            if site.label == label:
                return i
        raise KeyError(f"no site labelled {label!r}")

    def __len__(self) -> int:
        return len(self.sites)


def embed_many(space: CompositeSpace, ops: Mapping[int, np.ndarray]) -> np.ndarray:
    """Tensor product placing ``ops[i]`` on site i and identity elsewhere."""
    for i, op in ops.items():
        op = np.asarray(op)
        if op.shape != (space.dims[i], space.dims[i]):
            raise ValueError(
                f"operator for site {i} has shape {op.shape}, "
                f"expected ({space.dims[i]}, {space.dims[i]})"
            )
    out = np.ones((1, 1), dtype=complex)
    for i, d in enumerate(space.dims):
        factor = np.asarray(ops[i], dtype=complex) if i in ops else np.eye(d, dtype=complex)
        out = np.kron(out, factor)
    return out


def embed(op: np.ndarray, site_index: int, space: CompositeSpace) -> np.ndarray:
    """Embed a single-site operator into the composite space."""
    if not 0 <= site_index < len(space.dims):
        raise IndexError(f"site index {site_index} out of range")
    return embed_many(space, {site_index: op})


def site_operators(space: CompositeSpace, site_index: int) -> dict[str, np.ndarray]:
    """Spin operators of one site, embedded in the composite space."""
    ops = spin_operators(space.sites[site_index].s)
    return {name: embed(op, site_index, space) for name, op in ops.items()}


def require_hermitian(matrix: np.ndarray, what: str = "operator",
                      rtol: float = HERMITICITY_RTOL) -> np.ndarray:
    """Validate Hermiticity to relative Frobenius tolerance and return input."""
    matrix = np.asarray(matrix)
    scale = np.linalg.norm(matrix)
    if scale == 0:
        return matrix
    deviation = np.linalg.norm(matrix - matrix.conj().T) / scale
    if deviation > rtol:
        raise ValueError(f"{what} is not Hermitian (relative deviation {deviation:.3e})")
    return matrix


def is_projector(matrix: np.ndarray, tol: float = 1e-10) -> bool:
    matrix = np.asarray(matrix)
    if np.linalg.norm(matrix - matrix.conj().T) > tol * max(1.0, np.linalg.norm(matrix)):
        return False
    return np.linalg.norm(matrix @ matrix - matrix) <= tol * max(1.0, np.linalg.norm(matrix))


def projector(state: np.ndarray) -> np.ndarray:
    """Rank-one projector |psi><psi| from a state vector (normalised first)."""
    psi = np.asarray(state, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim


def expectation(state: np.ndarray, observable: np.ndarray) -> float:
    """<O> for a pure state (1-D) or density matrix (2-D).

    The observable must be Hermitian; any imaginary residue above 1e-10
    (relative) is an error, below it is discarded.
    """
    state = np.asarray(state, dtype=complex)
    observable = np.asarray(observable, dtype=complex)
    require_hermitian(observable, "observable", rtol=1e-10)
    if state.ndim == 1:
        if observable.shape != (state.size, state.size):
            raise ValueError(
                f"dimension mismatch: state {state.size}, observable {observable.shape}"
            )
        value = np.vdot(state, observable @ state)
    elif state.ndim == 2:
        if observable.shape != state.shape:
            raise ValueError(
                f"dimension mismatch: state {state.shape}, observable {observable.shape}"
            )
        value = np.trace(observable @ state)
    else:
        raise ValueError("state must be a vector or a density matrix")
    scale = max(1.0, abs(value))
    if abs(value.imag) > 1e-10 * scale:
        raise ValueError(f"expectation has imaginary residue {value.imag:.3e}")
    return float(value.real)


def partial_trace(rho: np.ndarray, space: CompositeSpace,
                  keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix over the kept sites (in their original order)."""
    rho = np.asarray(rho, dtype=complex)
    dims = space.dims
    n = len(dims)
    keep = sorted(keep)
    if rho.shape != (space.total_dim, space.total_dim):
        raise ValueError("density matrix does not match the composite space")
    reshaped = rho.reshape(dims + dims)
    # Trace out the complement, highest axis first so indices stay valid.
    for site in sorted(set(range(n)) - set(keep), reverse=True):
        reshaped = np.trace(reshaped, axis1=site, axis2=site + reshaped.ndim // 2)
    d_keep = prod(dims[i] for i in keep) if keep else 1
    return reshaped.reshape(d_keep, d_keep)
