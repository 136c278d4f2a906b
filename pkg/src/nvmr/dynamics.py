"""Time evolution: exact static propagation, stepped propagation for
time-dependent Hamiltonians, and Lindblad master-equation integration.

All Hamiltonians are in kHz and all times in ms (or any consistent pair,
e.g. MHz with microseconds); the propagator is ``exp(-i 2 pi H t)``.
Lindblad rates are plain inverse time in the same time unit and enter
without the 2 pi factor.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .models import LindbladModel
from .spincore import expectation, is_projector, require_hermitian

__all__ = [
    "Trajectory",
    "SignalTrace",
    "evolve_static",
    "static_survival",
    "evolve_stepped",
    "evolve_lindblad",
    "survival",
    "clear_eig_cache",
]

_EIG_CACHE: dict[bytes, tuple[np.ndarray, np.ndarray]] = {}
_EIG_CACHE_MAX = 8
_EIG_LOCK = threading.Lock()


def clear_eig_cache() -> None:
    with _EIG_LOCK:
        _EIG_CACHE.clear()


def _eigh_cached(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    key = hashlib.sha1(np.ascontiguousarray(h).tobytes()).digest()
    with _EIG_LOCK:
        hit = _EIG_CACHE.get(key)
    if hit is not None:
        return hit
    evals, evecs = np.linalg.eigh(h)
    with _EIG_LOCK:
        if len(_EIG_CACHE) >= _EIG_CACHE_MAX:
            _EIG_CACHE.pop(next(iter(_EIG_CACHE)))
        _EIG_CACHE[key] = (evals, evecs)
    return evals, evecs


@dataclass(frozen=True)
class Trajectory:
    """States on a time grid; ``kind`` is "pure" or "density" uniformly."""

    times: np.ndarray
    states: np.ndarray
    kind: str

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "states", np.asarray(self.states, dtype=complex))
        if self.kind not in ("pure", "density"):
            raise ValueError(f"unknown trajectory kind {self.kind!r}")
        if self.kind == "pure":
            norms = np.linalg.norm(self.states, axis=-1)
            if np.any(np.abs(norms - 1) > 1e-9):
                raise ValueError("pure-state norms drift beyond 1e-9")
        else:
            traces = np.einsum("tii->t", self.states)
            if np.any(np.abs(traces - 1) > 1e-9):
                raise ValueError("density traces drift beyond 1e-9")
            herm = max(
                np.linalg.norm(s - s.conj().T) for s in self.states
            )
            if herm > 1e-8 * max(1.0, np.linalg.norm(self.states[0])):
                raise ValueError("density matrices drift from Hermiticity")
            # positivity spot-check; skipped for large spaces where the
            # cubic cost would dominate the evolution itself
            if self.states.shape[-1] <= 128:
                floor = min(
                    np.linalg.eigvalsh(s).min() for s in self.states
                )
                if floor < -1e-8:
                    raise ValueError(f"density eigenvalue floor {floor:.3e} < -1e-8")

    def __len__(self) -> int:
        return len(self.times)


@dataclass
class SignalTrace:
    """Survival probability (or any projector expectation) vs time."""

    times: np.ndarray
    values: np.ndarray
    time_unit: str = "ms"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if values.min() < -1e-9 or values.max() > 1 + 1e-9:
            raise ValueError(
                f"signal outside [0, 1]: range [{values.min()}, {values.max()}]"
            )
        self.values = np.clip(values, 0.0, 1.0)


def _propagate_eigh(evals: np.ndarray, evecs: np.ndarray, initial: np.ndarray,
                    times: np.ndarray):
    """Yield state(t) for each t, working in the eigenbasis."""
    if initial.ndim == 1:
        psi_e = evecs.conj().T @ initial
        for t in times:
            phases = np.exp(-2j * np.pi * evals * t)
            yield evecs @ (phases * psi_e)
    else:
        rho_e = evecs.conj().T @ initial @ evecs
        for t in times:
            phases = np.exp(-2j * np.pi * evals * t)
            rho_t = (phases[:, None] * rho_e) * phases.conj()[None, :]
            yield evecs @ rho_t @ evecs.conj().T


def evolve_static(h: np.ndarray, initial: np.ndarray,
                  times: Sequence[float]) -> Trajectory:
    """Exact evolution under a static (Hermitian) Hamiltonian.

    One eigendecomposition is reused across all time points and cached
    against the Hamiltonian's content, since scans re-evolve the same
    operator for many readout times.
    """
    h = require_hermitian(np.asarray(h, dtype=complex), "Hamiltonian")
    initial = np.asarray(initial, dtype=complex)
    times = np.asarray(times, dtype=float)
    evals, evecs = _eigh_cached(h)
    states = np.stack(list(_propagate_eigh(evals, evecs, initial, times)))
    kind = "pure" if initial.ndim == 1 else "density"
    return Trajectory(times=times, states=states, kind=kind)


def static_survival(h: np.ndarray, initial: np.ndarray, proj: np.ndarray,
                    times: Sequence[float]) -> np.ndarray:
    """Projector expectation along a static evolution, without storing states.

    Equivalent to ``survival(evolve_static(...), proj)`` but keeps only the
    eigenbasis representation, which matters for the larger bath spaces.
    """
    h = require_hermitian(np.asarray(h, dtype=complex), "Hamiltonian")
    initial = np.asarray(initial, dtype=complex)
    times = np.asarray(times, dtype=float)
    evals, evecs = _eigh_cached(h)
    out = np.empty(len(times))
    if initial.ndim == 1:
        psi_e = evecs.conj().T @ initial
        proj_e = evecs.conj().T @ proj @ evecs
        for k, t in enumerate(times):
            phases = np.exp(-2j * np.pi * evals * t)
            psi_t = phases * psi_e
            out[k] = np.real(np.vdot(psi_t, proj_e @ psi_t))
    else:
        rho_e = evecs.conj().T @ initial @ evecs
        proj_e = evecs.conj().T @ proj @ evecs
        for k, t in enumerate(times):
            phases = np.exp(-2j * np.pi * evals * t)
            rho_t = (phases[:, None] * rho_e) * phases.conj()[None, :]
            out[k] = np.real(np.sum(proj_e.T * rho_t))
    return out


def evolve_stepped(h_of_t: Callable[[float], np.ndarray], initial: np.ndarray,
                   t_end: float, dt: float, f_max_khz: float) -> Trajectory:
    """Piecewise-constant propagation with midpoint sampling of H(t).

    ``f_max_khz`` declares the fastest frequency present in ``h_of_t``
    (carrier included); ``dt`` must resolve it with at least 20 samples
    per cycle.  Midpoint sampling makes the scheme second order in dt.
    """
    if f_max_khz > 0 and dt > 1.0 / (20.0 * f_max_khz):
        raise ValueError(
            f"dt={dt} too coarse for f_max={f_max_khz} kHz; "
            f"need dt <= {1.0 / (20.0 * f_max_khz):.3e}"
        )
    n_steps = int(round(t_end / dt))
    if abs(n_steps * dt - t_end) > 1e-12 * max(1.0, abs(t_end)):
        n_steps = int(np.ceil(t_end / dt))
    times = np.linspace(0.0, t_end, n_steps + 1)
    state = np.asarray(initial, dtype=complex)
    states = [state]
    for k in range(n_steps):
        t0, t1 = times[k], times[k + 1]
        h_mid = require_hermitian(
            np.asarray(h_of_t(0.5 * (t0 + t1)), dtype=complex), "Hamiltonian"
        )
        evals, evecs = np.linalg.eigh(h_mid)
        phases = np.exp(-2j * np.pi * evals * (t1 - t0))
        if state.ndim == 1:
            state = evecs @ (phases * (evecs.conj().T @ state))
        else:
            rho_e = evecs.conj().T @ state @ evecs
            state = evecs @ ((phases[:, None] * rho_e) * phases.conj()[None, :]) @ evecs.conj().T
        states.append(state)
    kind = "pure" if np.asarray(initial).ndim == 1 else "density"
    return Trajectory(times=times, states=np.stack(states), kind=kind)


# --------------------------------------------------------------------------
# Lindblad integration
# --------------------------------------------------------------------------

_TRACE_TOL = 1e-6


def build_liouvillian(model: LindbladModel) -> np.ndarray:
    """Column-stacking superoperator of the master equation.

    With vec(rho) stacked column-major, ``vec(A rho B) = (B^T kron A) vec(rho)``;
    the returned matrix generates ``d vec(rho)/dt``.
    """
    h = np.asarray(model.hamiltonian, dtype=complex)
    dim = h.shape[0]
    eye = np.eye(dim, dtype=complex)
    liou = -2j * np.pi * (np.kron(eye, h) - np.kron(h.T, eye))
    for jump in model.jumps:
        jump = np.asarray(jump, dtype=complex)
        jj = jump.conj().T @ jump
        liou = liou + np.kron(jump.conj(), jump)
        liou = liou - 0.5 * (np.kron(eye, jj) + np.kron(jj.T, eye))
    return liou


def _vec(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(-1, order="F")


def _unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return v.reshape(dim, dim, order="F")


def _check_trace(rho: np.ndarray, t: float) -> None:
    drift = abs(np.trace(rho).real - 1.0)
    if drift > _TRACE_TOL:
        raise RuntimeError(
            f"Lindblad trace drift {drift:.3e} at t={t} exceeds {_TRACE_TOL}"
        )


def _lindblad_eig_path(liou, rho0, times, dim):
    evals, evecs = np.linalg.eig(liou)
    # Reject a defective/ill-conditioned eigenbasis before trusting it.
    try:
        inv = np.linalg.inv(evecs)
    except np.linalg.LinAlgError:
        return None
    resid = np.linalg.norm(evecs @ np.diag(evals) @ inv - liou)
    if resid > 1e-8 * max(1.0, np.linalg.norm(liou)):
        return None
    coeff = inv @ _vec(rho0)
    states = []
    for t in times:
        v = evecs @ (np.exp(evals * t) * coeff)
        rho_t = _unvec(v, dim)
        rho_t = 0.5 * (rho_t + rho_t.conj().T)
        _check_trace(rho_t, t)
        states.append(rho_t / np.trace(rho_t).real)
    return states


def _lindblad_expm_path(liou, rho0, times, dim):
    order = np.argsort(times)
    states_sorted = []
    v = _vec(rho0)
    t_prev = 0.0
    for t in times[order]:
        if t != t_prev:
            v = scipy.linalg.expm(liou * (t - t_prev)) @ v
            t_prev = t
        rho_t = _unvec(v, dim)
        rho_t = 0.5 * (rho_t + rho_t.conj().T)
        _check_trace(rho_t, t)
        states_sorted.append(rho_t / np.trace(rho_t).real)
    states = [None] * len(times)
    for pos, idx in enumerate(order):
        states[idx] = states_sorted[pos]
    return states


def _lindblad_rk4_path(model, rho0, times):
    h = np.asarray(model.hamiltonian, dtype=complex)
    jumps = [np.asarray(j, dtype=complex) for j in model.jumps]
    jjs = [j.conj().T @ j for j in jumps]

    def rhs(rho):
        out = -2j * np.pi * (h @ rho - rho @ h)
        for j, jj in zip(jumps, jjs):
            out = out + j @ rho @ j.conj().T - 0.5 * (jj @ rho + rho @ jj)
        return out

    scale = 2 * np.pi * np.linalg.norm(h, 2) + sum(
        np.linalg.norm(jj, 2) for jj in jjs
    )
    dt_max = 0.05 / max(scale, 1e-12)
    states = []
    rho = np.asarray(rho0, dtype=complex)
    t_prev = 0.0
    for t in times:
        span = t - t_prev
        if span < 0:
            raise ValueError("rk4 path requires non-decreasing times")
        n = max(1, int(np.ceil(span / dt_max))) if span > 0 else 0
        dt = span / n if n else 0.0
        for _ in range(n):
            k1 = rhs(rho)
            k2 = rhs(rho + 0.5 * dt * k1)
            k3 = rhs(rho + 0.5 * dt * k2)
            k4 = rhs(rho + dt * k3)
            rho = rho + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        rho = 0.5 * (rho + rho.conj().T)
        _check_trace(rho, t)
        states.append(rho / np.trace(rho).real)
        t_prev = t
    return states


def evolve_lindblad(model: LindbladModel, rho0: np.ndarray,
                    times: Sequence[float], method: str = "auto") -> Trajectory:
    """Integrate the Lindblad master equation on a time grid.

    For dimensions up to 32 the exact superoperator exponential is used
    (eigendecomposition when well conditioned, otherwise stepping with
    expm); above that a fixed-step 4th-order integrator on the density
    matrix avoids the dim^2 superoperator.  Trace drift beyond 1e-6
    aborts with a diagnostic.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    times = np.asarray(times, dtype=float)
    dim = model.space.total_dim
    require_hermitian(model.hamiltonian, "Lindblad Hamiltonian")
    if method == "auto":
        method = "superop" if dim <= 32 else "rk4"
    if method == "superop":
        liou = build_liouvillian(model)
        states = _lindblad_eig_path(liou, rho0, times, dim)
        if states is None:
            states = _lindblad_expm_path(liou, rho0, times, dim)
    elif method == "rk4":
        states = _lindblad_rk4_path(model, rho0, times)
    else:
        raise ValueError(f"unknown Lindblad method {method!r}")
    return Trajectory(times=times, states=np.stack(states), kind="density")


def survival(traj: Trajectory, proj: np.ndarray, **metadata) -> SignalTrace:
    """Pointwise expectation of a projector along a trajectory."""
    proj = np.asarray(proj, dtype=complex)
    if not is_projector(proj):
        raise ValueError("survival requires an idempotent Hermitian projector")
    values = np.array([expectation(state, proj) for state in traj.states])
    # tiny negative excursions from roundoff are tolerated by SignalTrace
    return SignalTrace(times=traj.times, values=values, metadata=metadata)
