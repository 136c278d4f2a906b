"""Turning scans into physical parameters: dip detection and the
closed-form spin-pair geometry inversion.

The inversion consumes the nine resonance splittings measured with the
field along x, y, z and the four diagonal pairs.  Writing
D = (3g/2) and m_i = r_i^2, the splittings are D |1 - 3 m_i| on the axes
and D |1 - (3/2)(m_i + m_j +/- 2 r_i r_j)| on the diagonals, which gives

    [D r_i r_j]^2 = (delta_{i-j}^2 - delta_{i+j}^2)^2 / (36 delta_k^2)

for the cross products (k the remaining axis), a closed form for g^2, and

    m_i = (1/(27 g^2)) [4 delta_i^2 + cross terms] - 1/3.

Relative signs of the r_i follow from comparing the reconstructed
diagonal splittings against the measured ones in least squares; the
global sign is physically unobservable.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Mapping, Sequence

import numpy as np
import scipy.optimize

from .constants import dipolar_distance_nm

__all__ = [
    "Dip",
    "DipSet",
    "DegenerateAxisError",
    "find_dips",
    "scan_deltas",
    "invert_pair_geometry",
    "distance_from_g",
    "PairGeometry",
]

DELTA_KEYS = ("x", "y", "z", "x+y", "x-y", "x+z", "x-z", "y+z", "y-z")


class DegenerateAxisError(ValueError):
    """An axis splitting vanished (magic-angle geometry); the closed-form
    inversion divides by it.  Re-measure in a rotated axis set."""


@dataclass(frozen=True)
class Dip:
    """One detected resonance dip."""

    center: float
    depth: float
    width: float
    unresolved: bool = False


@dataclass(frozen=True)
class DipSet:
    """Per-direction dip pairs and their splittings."""

    dips: dict[str, tuple[Dip, ...]]
    deltas: dict[str, float]
    flags: dict[str, str]


def _halfwidth(grid: np.ndarray, values: np.ndarray, i: int, baseline: float,
               depth: float) -> float:
    """Full width of the dip at half depth, linearly interpolated."""
    half = baseline - depth / 2
    left = grid[i]
    for k in range(i - 1, -1, -1):
        if values[k] >= half:
            frac = (half - values[k + 1]) / (values[k] - values[k + 1])
            left = grid[k + 1] + frac * (grid[k] - grid[k + 1])
            break
    else:
        left = grid[0]
    right = grid[i]
    for k in range(i + 1, len(grid)):
        if values[k] >= half:
            frac = (half - values[k - 1]) / (values[k] - values[k - 1])
            right = grid[k - 1] + frac * (grid[k] - grid[k - 1])
            break
    else:
        right = grid[-1]
    return float(right - left)


def find_dips(scan_or_grid, values: Sequence[float] | None = None,
              depth_threshold: float = 0.03,
              min_separation: float | None = None,
              expected_width: float | None = None) -> list[Dip]:
    """Detect local minima below baseline - threshold in a 1-D scan.

    Accepts a ResonanceScan-like object (attributes ``grid``/``values``)
    or two arrays.  The baseline is the median of the upper half of the
    samples.  Each dip center is refined by three-point parabolic
    interpolation; minima closer than ``min_separation`` are merged into
    the deepest one.  A dip wider than twice ``expected_width`` (when
    given) is flagged unresolved, as is a merged cluster.
    """
    if values is None:
        grid = np.asarray(scan_or_grid.grid, dtype=float)
        vals = np.asarray(scan_or_grid.values, dtype=float)
    else:
        grid = np.asarray(scan_or_grid, dtype=float)
        vals = np.asarray(values, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("dip detection requires a strictly increasing grid")
    baseline = float(np.median(vals[vals >= np.median(vals)]))
    step = float(np.median(np.diff(grid)))

    raw: list[tuple[int, float]] = []
    for i in range(1, len(vals) - 1):
        if vals[i] <= vals[i - 1] and vals[i] < vals[i + 1]:
            depth = baseline - vals[i]
            if depth >= depth_threshold:
                raw.append((i, depth))
    if not raw:
        return []

    merged: list[tuple[list[int], float]] = []
    min_sep = min_separation if min_separation is not None else 0.0
    for i, depth in raw:
        if merged and (grid[i] - grid[merged[-1][0][-1]]) < min_sep:
            merged[-1][0].append(i)
            merged[-1] = (merged[-1][0], max(merged[-1][1], depth))
        else:
            merged.append(([i], depth))

    dips = []
    for indices, depth in merged:
        i = min(indices, key=lambda k: vals[k])
        y0, y1, y2 = vals[i - 1], vals[i], vals[i + 1]
        denom = y0 - 2 * y1 + y2
        offset = 0.0 if denom == 0 else float(np.clip(0.5 * (y0 - y2) / denom, -1, 1))
        center = grid[i] + offset * step
        width = _halfwidth(grid, vals, i, baseline, baseline - y1)
        unresolved = len(indices) > 1
        if expected_width is not None and width > 2 * expected_width:
            unresolved = True
        dips.append(
            Dip(center=float(center), depth=float(baseline - y1),
                width=width, unresolved=unresolved)
        )
    dips.sort(key=lambda d: d.center)
    return dips


def scan_deltas(scans: Mapping[str, object], depth_threshold: float = 0.03,
                min_separation: float | None = None) -> DipSet:
    """Extract the per-direction splitting from a scan per field direction.

    The two deepest dips form the main pair (weaker satellite dips from
    inhomogeneous couplings are ignored by depth ordering, and noted in
    the flags).  Directions with fewer than two dips are flagged.
    """
    dips: dict[str, tuple[Dip, ...]] = {}
    deltas: dict[str, float] = {}
    flags: dict[str, str] = {}
    for name, scan in scans.items():
        if isinstance(scan, tuple):
            found = find_dips(scan[0], scan[1], depth_threshold=depth_threshold,
                              min_separation=min_separation)
        else:
            found = find_dips(scan, depth_threshold=depth_threshold,
                              min_separation=min_separation)
        dips[name] = tuple(found)
        if len(found) < 2:
            flags[name] = "unresolved" if found else "no-dips"
            deltas[name] = 0.0
            continue
        deepest = sorted(found, key=lambda d: -d.depth)[:2]
        if len(found) > 2:
            flags[name] = "satellites-ignored-by-depth"
        lo, hi = sorted(d.center for d in deepest)
        deltas[name] = float(hi - lo)
    return DipSet(dips=dips, deltas=deltas, flags=flags)


@dataclass(frozen=True)
class PairGeometry:
    """Inverted pair geometry: coupling, alignment (up to global sign),
    and the residuals of the reconstruction."""

    g_khz: float
    direction: tuple[float, float, float]
    normalization_residual: float
    sign_residual: float

    @property
    def r_hat(self) -> np.ndarray:
        return np.asarray(self.direction, dtype=float)

    @property
    def theta_deg(self) -> float:
        return float(np.rad2deg(np.arccos(np.clip(self.r_hat[2], -1, 1))))

    @property
    def phi_deg(self) -> float:
        return float(np.rad2deg(np.arctan2(self.r_hat[1], self.r_hat[0]) % (2 * np.pi)))


_SQ2 = 1.0 / np.sqrt(2.0)
_DIRECTION_MATRIX = np.array([
    (1, 0, 0), (0, 1, 0), (0, 0, 1),
    (_SQ2, _SQ2, 0), (_SQ2, -_SQ2, 0),
    (_SQ2, 0, _SQ2), (_SQ2, 0, -_SQ2),
    (0, _SQ2, _SQ2), (0, _SQ2, -_SQ2),
])  # rows ordered as DELTA_KEYS


def _delta_vector(g: float, r: np.ndarray) -> np.ndarray:
    """Closed-form splittings for all nine directions at once."""
    cos = _DIRECTION_MATRIX @ r
    return 1.5 * g * np.abs(1.0 - 3.0 * cos**2)


def _closed_form_deltas(g: float, r: np.ndarray) -> dict[str, float]:
    vec = _delta_vector(g, np.asarray(r, dtype=float))
    return dict(zip(DELTA_KEYS, (float(v) for v in vec)))


def _reconstruction_cost(g: float, r: np.ndarray, d_vec: np.ndarray) -> float:
    return float(np.sum((_delta_vector(g, r) - d_vec) ** 2))


def _closed_form_estimate(d: Mapping[str, float]) -> tuple[float, dict[str, float], float]:
    """The algebraic g and squared components, before any polishing."""
    cross_sq = {
        "xy": (d["x-y"] ** 2 - d["x+y"] ** 2) ** 2 / (36 * d["z"] ** 2),
        "xz": (d["x-z"] ** 2 - d["x+z"] ** 2) ** 2 / (36 * d["y"] ** 2),
        "yz": (d["y-z"] ** 2 - d["y+z"] ** 2) ** 2 / (36 * d["x"] ** 2),
    }
    g_sq = (
        2.0 / 27.0 * (d["x"] ** 2 + d["y"] ** 2 + d["z"] ** 2)
        + 36.0 / 27.0 * (cross_sq["xy"] + cross_sq["xz"] + cross_sq["yz"])
    )
    if g_sq <= 0:
        raise DegenerateAxisError("inconsistent splittings: negative g^2")
    m = {
        "x": (4 * d["x"] ** 2 + 36 * (cross_sq["xy"] + cross_sq["xz"])) / (27 * g_sq) - 1 / 3,
        "y": (4 * d["y"] ** 2 + 36 * (cross_sq["xy"] + cross_sq["yz"])) / (27 * g_sq) - 1 / 3,
        "z": (4 * d["z"] ** 2 + 36 * (cross_sq["xz"] + cross_sq["yz"])) / (27 * g_sq) - 1 / 3,
    }
    clipped = {k: max(v, 0.0) for k, v in m.items()}
    residual = float(abs(sum(clipped.values()) - 1.0))
    return float(np.sqrt(g_sq)), clipped, residual


def _magnitude_candidates(g: float, d: Mapping[str, float],
                          m_closed: dict[str, float]) -> list[np.ndarray]:
    """Starting magnitudes for the polish.

    Besides the closed-form solution, each axis splitting constrains its
    squared component to one of two branches |1 - 3 m_i| = delta_i/(3g/2);
    branch combinations approximately consistent with the unit norm are
    kept.  Under measurement noise the closed form can land in the wrong
    branch, and these candidates recover the right basin.
    """
    out = [np.array([m_closed["x"], m_closed["y"], m_closed["z"]])]
    branches = []
    for axis in ("x", "y", "z"):
        ratio = d[axis] / (1.5 * g)
        pair = [(1.0 - ratio) / 3.0, (1.0 + ratio) / 3.0]
        branches.append([max(0.0, min(1.0, v)) for v in pair])
    for mx in branches[0]:
        for my in branches[1]:
            for mz in branches[2]:
                total = mx + my + mz
                if 0.5 <= total <= 1.5:
                    out.append(np.array([mx, my, mz]) / total)
    return out


def _polish(g0: float, r0: np.ndarray,
            d_vec: np.ndarray) -> tuple[float, np.ndarray, float]:
    def residuals(p):
        g = abs(p[0])
        v = p[1:]
        norm = np.linalg.norm(v)
        r = v / norm if norm > 0 else np.array([0.0, 0.0, 1.0])
        return _delta_vector(g, r) - d_vec

    sol = scipy.optimize.least_squares(
        residuals, x0=np.concatenate([[g0], r0]), xtol=1e-13, ftol=1e-13
    )
    g = abs(float(sol.x[0]))
    v = sol.x[1:]
    r = v / np.linalg.norm(v)
    return g, r, float(2 * sol.cost)


def invert_pair_geometry(deltas: Mapping[str, float],
                         refine: bool = True) -> PairGeometry:
    """Recover (g, alignment) from the nine measured splittings.

    The closed forms give the estimate directly for exact inputs.  With
    ``refine`` (default) the result is polished by least squares against
    all nine splittings from a small set of branch-candidate starting
    points, which keeps the estimate stable under measurement noise that
    the squared-difference closed forms amplify.

    Raises :class:`DegenerateAxisError` when an axis splitting is too
    small to divide by (the alignment sits at a magic angle of that axis);
    the remedy is to re-measure in a rotated axis frame.
    """
    missing = [k for k in DELTA_KEYS if k not in deltas]
    if missing:
        raise ValueError(f"missing splittings for directions: {missing}")
    d = {k: float(deltas[k]) for k in DELTA_KEYS}
    axis_scale = max(d.values())
    if axis_scale <= 0:
        raise DegenerateAxisError("all splittings vanish; no geometry information")
    for axis in ("x", "y", "z"):
        if d[axis] < 1e-9 * axis_scale:
            raise DegenerateAxisError(
                f"axis splitting delta_{axis} is zero (magic-angle geometry); "
                "re-measure with a rotated axis set"
            )

    g_closed, m_closed, normalization_residual = _closed_form_estimate(d)
    total = sum(m_closed.values())
    if total <= 0:
        raise DegenerateAxisError("inconsistent splittings: zero direction norm")
    m_unit = {k: v / total for k, v in m_closed.items()}

    # rank candidate (magnitudes x sign class) starts by reconstruction cost
    d_vec = np.array([d[k] for k in DELTA_KEYS])
    magnitude_sets = (
        _magnitude_candidates(g_closed, d, m_unit)
        if refine
        else [np.array([m_unit["x"], m_unit["y"], m_unit["z"]])]
    )
    candidates = []
    for mags_sq in magnitude_sets:
        mags = np.sqrt(np.clip(mags_sq, 0.0, 1.0))
        for sy, sz in product((1.0, -1.0), repeat=2):
            r = mags * np.array([1.0, sy, sz])
            norm = np.linalg.norm(r)
            if norm == 0:
                continue
            r = r / norm
            candidates.append((_reconstruction_cost(g_closed, r, d_vec), r))
    candidates.sort(key=lambda c: c[0])

    if not refine:
        cost, r_hat = candidates[0]
        if r_hat[0] < 0 or (r_hat[0] == 0 and r_hat[1] < 0):
            r_hat = -r_hat
        return PairGeometry(
            g_khz=g_closed,
            direction=tuple(float(x) for x in r_hat),
            normalization_residual=normalization_residual,
            sign_residual=float(np.sqrt(cost / len(DELTA_KEYS))),
        )

    best = None
    seen: list[np.ndarray] = []
    for cost, r0 in candidates:
        if any(min(np.linalg.norm(r0 - s), np.linalg.norm(r0 + s)) < 1e-3
               for s in seen):
            continue
        seen.append(r0)
        if len(seen) > 4:
            break
        g, r, final_cost = _polish(g_closed, r0, d_vec)
        if best is None or final_cost < best[0]:
            best = (final_cost, g, r)
    final_cost, g, r_hat = best
    if r_hat[0] < 0 or (r_hat[0] == 0 and r_hat[1] < 0):
        r_hat = -r_hat  # global sign is unobservable; fix a convention
    return PairGeometry(
        g_khz=float(g),
        direction=tuple(float(x) for x in r_hat),
        normalization_residual=normalization_residual,
        sign_residual=float(np.sqrt(final_cost / len(DELTA_KEYS))),
    )


def distance_from_g(g_khz: float, gamma1_khz_per_g: float,
                    gamma2_khz_per_g: float) -> float:
    """Separation (nm) at which the pair's dipolar constant equals g."""
    return dipolar_distance_nm(g_khz, gamma1_khz_per_g, gamma2_khz_per_g)
