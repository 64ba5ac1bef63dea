"""Vectorised 2D ray, segment and disc queries used by the simulator."""

from __future__ import annotations

import numpy as np

_EPS = 1e-12


def ray_segment_hits(origin, dirs, segments) -> np.ndarray:
    """Ray parameter ``s >= 0`` where ``origin + s * dirs`` meets each segment.

    ``dirs`` is ``(R, 2)`` (need not be unit), ``segments`` is ``(S, 4)``.
    Returns an ``(R, S)`` array, ``inf`` where there is no hit.
    """
    dirs = np.asarray(dirs, dtype=float).reshape(-1, 2)
    seg = np.asarray(segments, dtype=float).reshape(-1, 4)
    if len(seg) == 0:
        return np.full((len(dirs), 0), np.inf)
    o = np.asarray(origin, dtype=float)
    a = seg[:, :2]
    e = seg[:, 2:] - a
    ao = a - o
    dx, dy = dirs[:, 0:1], dirs[:, 1:2]
    denom = dx * e[None, :, 1] - dy * e[None, :, 0]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        s = (ao[None, :, 0] * e[None, :, 1] - ao[None, :, 1] * e[None, :, 0]) / denom
        u = (ao[None, :, 0] * dy - ao[None, :, 1] * dx) / denom
    ok = (np.abs(denom) > _EPS) & (s >= 0.0) & (u >= -1e-12) & (u <= 1.0 + 1e-12)
    return np.where(ok, s, np.inf)


def ray_circle_hits(origin, dirs, centers, radii) -> np.ndarray:
    """First entry parameter ``s >= 0`` of each ray into each circle, ``(R, C)``."""
    dirs = np.asarray(dirs, dtype=float).reshape(-1, 2)
    c = np.asarray(centers, dtype=float).reshape(-1, 2)
    if len(c) == 0:
        return np.full((len(dirs), 0), np.inf)
    radii = np.broadcast_to(np.asarray(radii, dtype=float), (len(c),))
    oc = np.asarray(origin, dtype=float)[None, :] - c
    a = np.sum(dirs * dirs, axis=1)[:, None]
    b = 2.0 * (dirs @ oc.T)
    cc = np.sum(oc * oc, axis=1)[None, :] - radii[None, :] ** 2
    disc = b * b - 4.0 * a * cc
    with np.errstate(invalid="ignore", divide="ignore"):
        root = np.sqrt(disc)
        s0 = (-b - root) / (2.0 * a)
        s1 = (-b + root) / (2.0 * a)
    s = np.where(s0 >= 0.0, s0, np.where(cc <= 0.0, 0.0, np.inf))
    return np.where((disc >= 0.0) & (s1 >= 0.0), s, np.inf)


def point_segment_distance(points, segments) -> np.ndarray:
    """Euclidean distance from each point ``(P, 2)`` to each segment ``(S, 4)``."""
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    seg = np.asarray(segments, dtype=float).reshape(-1, 4)
    if len(seg) == 0:
        return np.full((len(p), 0), np.inf)
    a = seg[:, :2]
    e = seg[:, 2:] - a
    ee = np.maximum(np.sum(e * e, axis=1), _EPS)
    ap = p[:, None, :] - a[None, :, :]
    t = np.clip(np.sum(ap * e[None], axis=2) / ee[None], 0.0, 1.0)
    closest = a[None] + t[..., None] * e[None]
    return np.hypot(*(p[:, None, :] - closest).transpose(2, 0, 1))


def nearest_point(point, segments) -> tuple[np.ndarray, float]:
    """Closest point on any segment to ``point`` and its distance."""
    p = np.asarray(point, dtype=float)
    seg = np.asarray(segments, dtype=float).reshape(-1, 4)
    a = seg[:, :2]
    e = seg[:, 2:] - a
    ee = np.maximum(np.sum(e * e, axis=1), _EPS)
    t = np.clip(np.sum((p - a) * e, axis=1) / ee, 0.0, 1.0)
    closest = a + t[:, None] * e
    d = np.hypot(*(p - closest).T)
    k = int(np.argmin(d))
    return closest[k], float(d[k])


def segments_intersect(p, q, segments) -> np.ndarray:
    """Whether segment ``p -> q`` crosses each of ``segments``."""
    d = np.asarray(q, dtype=float) - np.asarray(p, dtype=float)
    s = ray_segment_hits(p, d[None, :], segments)[0]
    return s <= 1.0


def disc_sweep_limit(start, direction, length: float, radius: float, segments) -> float:
    """Largest travel ``<= length`` along unit ``direction`` keeping a disc clear of segments.

    The disc of ``radius`` centred at ``start`` is swept along the ray; the
    first contact is found as the earliest ray hit on any segment's capsule
    (two offset sides plus the endpoint circles).
    """
    seg = np.asarray(segments, dtype=float).reshape(-1, 4)
    if len(seg) == 0 or length <= 0.0:
        return max(length, 0.0)
    start = np.asarray(start, dtype=float)
    direction = np.asarray(direction, dtype=float)
    a, b = seg[:, :2], seg[:, 2:]
    e = b - a
    n = np.stack([-e[:, 1], e[:, 0]], axis=1)
    norm = np.hypot(n[:, 0], n[:, 1])
    keep = norm > _EPS
    hits = [ray_circle_hits(start, direction[None], np.vstack([a, b]), radius)[0]]
    if keep.any():
        unit = n[keep] / norm[keep, None]
        for sign in (1.0, -1.0):
            off = sign * unit * radius
            side = np.hstack([a[keep] + off, b[keep] + off])
            s_side = ray_segment_hits(start, direction[None], side)[0]
            # a side only blocks motion heading into the wall
            approaching = (sign * unit) @ direction < 0.0
            hits.append(np.where(approaching, s_side, np.inf))
    s = np.concatenate(hits)
    # ignore contacts we are already moving away from
    dist_now = point_segment_distance(start[None], seg)[0]
    if np.all(dist_now >= radius - 1e-9):
        first = float(np.min(s)) if len(s) else np.inf
    else:
        first = _first_contact_inside(start, direction, length, radius, seg)
    return float(min(max(first - 1e-9, 0.0), length))


def _first_contact_inside(start, direction, length, radius, seg, samples: int = 64) -> float:
    """Fallback for a disc that already overlaps a wall: allow motion that increases clearance."""
    ts = np.linspace(0.0, length, samples + 1)
    pts = start[None, :] + ts[:, None] * direction[None, :]
    d = point_segment_distance(pts, seg).min(axis=1)
    base = d[0]
    bad = np.nonzero(d < min(base, radius) - 1e-9)[0]
    if len(bad) == 0:
        return length
    return float(ts[max(bad[0] - 1, 0)])
