"""Reconstruction of the flat ribbon surface for a framed curve.

The framing angle rotates the principal normal about the tangent into the
ribbon normal ``n = cos(theta) P + sin(theta) B``.  In the Darboux frame
(T, u = n x T, n) the shape operator applied to T has components
(kappa_n, tau_g), so the surface's straight rulings run along the kernel
direction ``tau_g T - kappa_n u``.  Sweeping a segment of width ``w`` along
those rulings yields a triangulated strip whose interior angle defects
measure how developable the discrete surface is; the defect must vanish
under grid refinement when the framing stays clear of double degeneracies.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .curves import eval_fields
from .energy import GridMismatch


class DegenerateRuling(ValueError):
    """Ruling direction undefined: kappa_n and tau_g both vanish."""


class EmptyMesh(ValueError):
    """No two consecutive samples admit a ruling."""


@dataclass(frozen=True)
class DarbouxFrame:
    """Adapted frame (T, u, n) of the curve on the ribbon surface."""

    t: float
    T: np.ndarray
    n: np.ndarray
    u: np.ndarray


class RulingData(NamedTuple):
    directions: np.ndarray  # unit vectors, NaN rows where undefined
    angles: np.ndarray  # atan2(-kappa_n, tau_g) per sample
    valid: np.ndarray  # False where kappa_n = tau_g = 0 exactly


@dataclass
class RibbonMesh:
    width: float
    vertices: np.ndarray
    faces: np.ndarray
    ruling_angles: np.ndarray
    vertex_normals: np.ndarray
    interior: np.ndarray  # mask of interior (full-ring) vertices
    ruling_pairs: np.ndarray  # vertex index pairs spanning each ruling


def darboux_frames(frames, framing):
    """Rotate the principal normal by the framing angle at every node."""
    if len(frames) != len(framing.theta):
        raise GridMismatch(
            f"{len(frames)} frames for {len(framing.theta)} framing nodes"
        )
    out = []
    for frame, angle in zip(frames, framing.theta):
        n = np.cos(angle) * frame.P + np.sin(angle) * frame.B
        n = n - np.dot(n, frame.T) * frame.T
        n /= np.linalg.norm(n)
        u = np.cross(n, frame.T)
        u /= np.linalg.norm(u)
        out.append(DarbouxFrame(t=frame.t, T=frame.T.copy(), n=n, u=u))
    return out


def ruling_directions(curve, framing, frames):
    """Kernel direction of the shape operator at every node.

    Uses nodal ``kappa_n = kappa cos(theta)`` and ``tau_g = theta' + tau``
    (central slope differences, one-sided at the ends).  Samples where both
    vanish exactly have no ruling and are flagged invalid; near-degenerate
    samples are retained since the normalized direction stays
    well-conditioned (it tends to ``+-T`` or ``+-u``).
    """
    if len(frames) != len(framing.theta):
        raise GridMismatch(
            f"{len(frames)} frames for {len(framing.theta)} framing nodes"
        )
    samples = eval_fields(curve, framing.n_intervals)
    theta = framing.theta
    h = framing.h
    slope = np.empty_like(theta)
    slope[1:-1] = (theta[2:] - theta[:-2]) / (2 * h)
    slope[0] = (theta[1] - theta[0]) / h
    slope[-1] = (theta[-1] - theta[-2]) / h
    kappa_n = samples.kappa_nodes * np.cos(theta)
    tau_g = slope + samples.tau_nodes
    norm = np.hypot(kappa_n, tau_g)
    valid = norm > 0.0
    directions = np.full((len(theta), 3), np.nan)
    angles = np.arctan2(-kappa_n, tau_g)
    for i, frame in enumerate(frames):
        if not valid[i]:
            continue
        directions[i] = (tau_g[i] * frame.T - kappa_n[i] * frame.u) / norm[i]
    return RulingData(directions=directions, angles=angles, valid=valid)


def _segment_runs(edge_ok):
    """Maximal runs of consecutive sample pairs; (start, stop) row ranges."""
    runs = []
    start = None
    for i, ok in enumerate(edge_ok):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            runs.append((start, i + 1))
            start = None
    if start is not None:
        runs.append((start, len(edge_ok) + 1))
    return runs


def _grid_tangent(grid, axis):
    """Fourth-order tangents on a structured grid (one-sided at the borders)."""
    g = np.moveaxis(grid, axis, 0)
    out = np.empty_like(g)
    if len(g) >= 5:
        out[2:-2] = (g[:-4] - 8.0 * g[1:-3] + 8.0 * g[3:-1] - g[4:]) / 12.0
        out[0] = (-25.0 * g[0] + 48.0 * g[1] - 36.0 * g[2] + 16.0 * g[3] - 3.0 * g[4]) / 12.0
        out[1] = (-3.0 * g[0] - 10.0 * g[1] + 18.0 * g[2] - 6.0 * g[3] + g[4]) / 12.0
        out[-2] = (3.0 * g[-1] + 10.0 * g[-2] - 18.0 * g[-3] + 6.0 * g[-4] - g[-5]) / 12.0
        out[-1] = (25.0 * g[-1] - 48.0 * g[-2] + 36.0 * g[-3] - 16.0 * g[-4] + 3.0 * g[-5]) / 12.0
    elif len(g) >= 3:
        out[1:-1] = 0.5 * (g[2:] - g[:-2])
        out[0] = -1.5 * g[0] + 2.0 * g[1] - 0.5 * g[2]
        out[-1] = 1.5 * g[-1] - 2.0 * g[-2] + 0.5 * g[-3]
    else:
        out[:] = g[-1] - g[0]
    return np.moveaxis(out, 0, axis)


def build_mesh(frames, rulings, w, samples_across=3):
    """Triangulated ruled strip of width ``w`` along the rulings.

    Within each run of consecutive valid samples the ruling signs are
    aligned for continuity (flipping a ruling leaves its line unchanged).
    The strip splits into segments at invalid samples and wherever two
    adjacent rulings focus too close to the centerline: a strip of width
    ``w`` folds through itself at the focal distance, so sample pairs whose
    focal point lies within twice the width are not meshable at this width
    (the factor keeps the retained quads well conditioned).  Raises
    :class:`EmptyMesh` when no segment of at least two samples remains.
    """
    if w <= 0:
        raise ValueError("ribbon width must be positive")
    samples_across = int(samples_across)
    if samples_across < 2:
        raise ValueError("need at least 2 samples across the ribbon")
    gamma = np.array([f.gamma for f in frames])
    dirs_all = rulings.directions
    valid = rulings.valid
    edge_ok = np.zeros(len(gamma) - 1, dtype=bool)
    for i in range(len(gamma) - 1):
        if not (valid[i] and valid[i + 1]):
            continue
        turn = np.arccos(min(1.0, abs(float(np.dot(dirs_all[i], dirs_all[i + 1])))))
        focal = np.linalg.norm(gamma[i + 1] - gamma[i]) / max(np.sin(turn), 1e-300)
        edge_ok[i] = focal > 2.0 * w
    runs = _segment_runs(edge_ok)
    if not runs:
        raise EmptyMesh("no two consecutive samples admit a ruling at this width")
    across = np.linspace(-0.5 * w, 0.5 * w, samples_across)
    vertices = []
    normals = []
    faces = []
    interior = []
    ruling_pairs = []
    angles = []
    offset = 0
    for start, stop in runs:
        dirs = dirs_all[start:stop].copy()
        for i in range(1, len(dirs)):
            if np.dot(dirs[i], dirs[i - 1]) < 0.0:
                dirs[i] = -dirs[i]
        rows = stop - start
        grid = gamma[start:stop, None, :] + dirs[:, None, :] * across[None, :, None]
        tan_t = _grid_tangent(grid, 0)
        tan_s = _grid_tangent(grid, 1)
        n_grid = np.cross(tan_t, tan_s)
        n_grid /= np.linalg.norm(n_grid, axis=2, keepdims=True)
        vertices.append(grid.reshape(-1, 3))
        normals.append(n_grid.reshape(-1, 3))
        angles.append(rulings.angles[start:stop])
        idx = offset + np.arange(rows * samples_across).reshape(rows, samples_across)
        a = idx[:-1, :-1].ravel()
        b = idx[1:, :-1].ravel()
        c = idx[1:, 1:].ravel()
        d = idx[:-1, 1:].ravel()
        faces.append(np.column_stack([a, b, c]))
        faces.append(np.column_stack([a, c, d]))
        inner = np.zeros((rows, samples_across), dtype=bool)
        inner[1:-1, 1:-1] = True
        interior.append(inner.ravel())
        ruling_pairs.append(np.column_stack([idx[:, 0], idx[:, -1]]))
        offset += rows * samples_across
    vertices = np.concatenate(vertices)
    faces = np.concatenate(faces)
    tri = vertices[faces]
    areas = 0.5 * np.linalg.norm(
        np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1
    )
    if np.any(areas <= 1e-14):
        raise ValueError("degenerate face in ribbon mesh")
    return RibbonMesh(
        width=float(w),
        vertices=vertices,
        faces=faces,
        ruling_angles=np.concatenate(angles),
        vertex_normals=np.concatenate(normals),
        interior=np.concatenate(interior),
        ruling_pairs=np.concatenate(ruling_pairs),
    )


def _corner_angles(vertices, faces):
    tri = vertices[faces]
    angles = np.empty(faces.shape)
    for c in range(3):
        e1 = tri[:, (c + 1) % 3] - tri[:, c]
        e2 = tri[:, (c + 2) % 3] - tri[:, c]
        cosv = np.sum(e1 * e2, axis=1) / (
            np.linalg.norm(e1, axis=1) * np.linalg.norm(e2, axis=1)
        )
        angles[:, c] = np.arccos(np.clip(cosv, -1.0, 1.0))
    return angles


def flatness_report(mesh):
    """Developability metrics of the strip.

    Angle defect ``2*pi - sum of incident corner angles`` at interior
    vertices (zero for a developable surface), and the worst angle between
    the vertex normals at the two ends of each ruling, which must vanish
    under refinement when the rulings are the true flat directions.
    """
    if len(mesh.faces) == 0:
        raise EmptyMesh("flatness report needs a nonempty mesh")
    angles = _corner_angles(mesh.vertices, mesh.faces)
    total = np.zeros(len(mesh.vertices))
    for c in range(3):
        np.add.at(total, mesh.faces[:, c], angles[:, c])
    defects = np.abs(2.0 * np.pi - total[mesh.interior])
    left = mesh.vertex_normals[mesh.ruling_pairs[:, 0]]
    right = mesh.vertex_normals[mesh.ruling_pairs[:, 1]]
    cosv = np.clip(np.sum(left * right, axis=1), -1.0, 1.0)
    drift = float(np.max(np.arccos(cosv))) if len(cosv) else 0.0
    return {
        "max_defect": float(np.max(defects)) if defects.size else 0.0,
        "mean_defect": float(np.mean(defects)) if defects.size else 0.0,
        "normal_drift_along_rulings": drift,
    }


def write_obj(mesh, path):
    """Write the strip as OBJ text: ``v x y z`` lines then 1-based faces."""
    with open(path, "w") as handle:
        for v in mesh.vertices:
            handle.write(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        for f in mesh.faces:
            handle.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")
