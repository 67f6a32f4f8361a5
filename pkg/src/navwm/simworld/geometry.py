"""Analytic 2D geometry: ray casts and swept-circle contacts against
axis-aligned wall segments and circular objects. Everything is vectorized
over obstacles; no meshes, no grids."""

from __future__ import annotations

import numpy as np

EPS = 1e-12


def wrap_angle(theta):
    """Wrap to [-pi, pi)."""
    return np.mod(theta + np.pi, 2.0 * np.pi) - np.pi


def ray_segments(origin, dirs, segs):
    """First-hit distances from one origin along many rays against segments.

    origin: (2,); dirs: (R,2) unit; segs: (S,4) as [x0,y0,x1,y1].
    Returns (R,S) distances, +inf where a ray misses a segment.
    """
    if segs.shape[0] == 0:
        return np.full((dirs.shape[0], 0), np.inf)
    p = segs[:, 0:2]
    v = segs[:, 2:4] - segs[:, 0:2]          # (S,2)
    w = p - origin                           # (S,2)
    # solve origin + t*d = p + s*v
    denom = dirs[:, 0:1] * v[:, 1] - dirs[:, 1:2] * v[:, 0]      # (R,S)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (w[:, 0] * v[:, 1] - w[:, 1] * v[:, 0]) / denom      # (R,S)
        s = (w[:, 0] * dirs[:, 1:2] - w[:, 1] * dirs[:, 0:1]) / denom
    hit = (np.abs(denom) > EPS) & (t > EPS) & (s >= 0.0) & (s <= 1.0)
    return np.where(hit, t, np.inf)


def ray_circles(origin, dirs, centers, radii):
    """First-hit distances from one origin along many rays against circles.

    centers: (M,2); radii: (M,). Returns (R,M) distances, +inf on miss.
    """
    if centers.shape[0] == 0:
        return np.full((dirs.shape[0], 0), np.inf)
    oc = centers - origin                                        # (M,2)
    b = dirs @ oc.T                                              # (R,M)
    c = (oc * oc).sum(axis=1) - radii * radii                    # (M,)
    disc = b * b - c
    with np.errstate(invalid="ignore"):
        root = np.sqrt(np.maximum(disc, 0.0))
    t_near = b - root
    t_far = b + root
    t = np.where(t_near > EPS, t_near, np.where(t_far > EPS, t_far, np.inf))
    return np.where(disc >= 0.0, t, np.inf)


def point_segment_distance(points, segs):
    """Distances from points (N,2) to segments (S,4); returns (N,S)."""
    if segs.shape[0] == 0:
        return np.full((points.shape[0], 0), np.inf)
    a = segs[:, 0:2]
    v = segs[:, 2:4] - a
    vv = np.maximum((v * v).sum(axis=1), EPS)
    w = points[:, None, :] - a[None, :, :]                       # (N,S,2)
    s = np.clip((w * v[None, :, :]).sum(axis=2) / vv, 0.0, 1.0)  # (N,S)
    closest = a[None, :, :] + s[..., None] * v[None, :, :]
    d = points[:, None, :] - closest
    return np.sqrt((d * d).sum(axis=2))


def _segment_offsets(segs, radius):
    """The two parallel segments at +-radius from each wall segment."""
    a = segs[:, 0:2]
    b = segs[:, 2:4]
    v = b - a
    length = np.sqrt((v * v).sum(axis=1, keepdims=True))
    n = np.stack([-v[:, 1], v[:, 0]], axis=1) / np.maximum(length, EPS)
    up = np.concatenate([a + radius * n, b + radius * n], axis=1)
    dn = np.concatenate([a - radius * n, b - radius * n], axis=1)
    return np.concatenate([up, dn], axis=0)


def first_contact(origin, direction, max_dist, radius, segs, centers, radii):
    """Travel distance along `direction` before a disc of `radius` touches
    any wall segment or circular object; +inf when the full move is free.

    The disc-vs-segment test is decomposed into the two offset segments plus
    circles of `radius` at the segment endpoints (capsule boundary).
    """
    origin = np.asarray(origin, dtype=np.float64)
    d = np.asarray(direction, dtype=np.float64)[None, :]
    best = np.inf
    if segs.shape[0] > 0:
        off = _segment_offsets(segs, radius)
        t = ray_segments(origin, d, off)
        best = min(best, t.min(initial=np.inf))
        ends = np.concatenate([segs[:, 0:2], segs[:, 2:4]], axis=0)
        t = ray_circles(origin, d, ends, np.full(ends.shape[0], radius))
        best = min(best, t.min(initial=np.inf))
    if centers.shape[0] > 0:
        t = ray_circles(origin, d, centers, radii + radius)
        best = min(best, t.min(initial=np.inf))
    return best if best <= max_dist else np.inf


def _segments_intersect(p, q, segs):
    """Boolean (S,): does segment p->q properly intersect each of segs."""
    a = segs[:, 0:2]
    b = segs[:, 2:4]
    r = q - p
    s = b - a
    denom = r[0] * s[:, 1] - r[1] * s[:, 0]
    w = a - p
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (w[:, 0] * s[:, 1] - w[:, 1] * s[:, 0]) / denom
        u = (w[:, 0] * r[1] - w[:, 1] * r[0]) / denom
    return (np.abs(denom) > EPS) & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)


def segment_segment_distance(p, q, segs):
    """Min distances (S,) from segment p->q to each wall segment (exact)."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    pq = np.array([[p[0], p[1], q[0], q[1]]])
    d = np.minimum(
        point_segment_distance(segs[:, 0:2], pq)[:, 0],
        point_segment_distance(segs[:, 2:4], pq)[:, 0])
    d = np.minimum(d, point_segment_distance(np.stack([p, q]), segs).min(axis=0))
    return np.where(_segments_intersect(p, q, segs), 0.0, d)


def segment_clear(p, q, clearance, segs, centers, radii):
    """True when the segment p->q keeps at least `clearance` from all obstacles."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if segs.shape[0] > 0 and segment_segment_distance(p, q, segs).min() < clearance:
        return False
    if centers.shape[0] > 0:
        d = point_segment_distance(centers, np.array([[p[0], p[1], q[0], q[1]]]))[:, 0]
        if (d - radii).min() < clearance:
            return False
    return True
