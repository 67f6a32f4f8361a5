"""Grid shortest paths and trajectory construction.

Planning runs on the agent-inflated occupancy grid (8-connected, diagonal
cost sqrt(2), no corner cutting) followed by line-of-sight corner smoothing
against the analytic geometry. Geodesic distances for metrics run on the
raw occupancy grid.
"""

from __future__ import annotations

import heapq

import numpy as np

from . import geometry
from .world import Pose, World, _nearest_free_cell

SQRT2 = np.sqrt(2.0)


class PathError(RuntimeError):
    pass


def dijkstra_field(occ: np.ndarray, source, cell: float) -> np.ndarray:
    """Distance (units) from a source cell to every free cell; inf elsewhere.

    8-connected with sqrt(2) diagonals; a diagonal move is allowed only when
    both orthogonal neighbours it grazes are free (no corner cutting).
    """
    ny, nx = occ.shape
    dist = np.full((ny, nx), np.inf)
    if occ[source]:
        return dist
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, (r, c) = heapq.heappop(heap)
        if d > dist[r, c]:
            continue
        for dr, dc, w in ((-1, 0, 1.0), (1, 0, 1.0), (0, -1, 1.0), (0, 1, 1.0),
                          (-1, -1, SQRT2), (-1, 1, SQRT2), (1, -1, SQRT2), (1, 1, SQRT2)):
            rr, cc = r + dr, c + dc
            if not (0 <= rr < ny and 0 <= cc < nx) or occ[rr, cc]:
                continue
            if dr and dc and (occ[r + dr, c] or occ[r, c + dc]):
                continue
            nd = d + w
            if nd < dist[rr, cc]:
                dist[rr, cc] = nd
                heapq.heappush(heap, (nd, (rr, cc)))
    return dist * cell


def _trace_path(dist_units: np.ndarray, occ: np.ndarray, goal_cell, cell: float):
    """Walk downhill from goal_cell to the source of a dijkstra field."""
    dist = dist_units / cell
    path = [goal_cell]
    r, c = goal_cell
    ny, nx = occ.shape
    while dist[r, c] > 0:
        best = None
        best_d = dist[r, c]
        for dr, dc, w in ((-1, 0, 1.0), (1, 0, 1.0), (0, -1, 1.0), (0, 1, 1.0),
                          (-1, -1, SQRT2), (-1, 1, SQRT2), (1, -1, SQRT2), (1, 1, SQRT2)):
            rr, cc = r + dr, c + dc
            if not (0 <= rr < ny and 0 <= cc < nx) or occ[rr, cc]:
                continue
            if dr and dc and (occ[r + dr, c] or occ[r, c + dc]):
                continue
            if abs(dist[rr, cc] + w - dist[r, c]) < 1e-9 and dist[rr, cc] < best_d:
                best = (rr, cc)
                best_d = dist[rr, cc]
        if best is None:
            raise PathError("dijkstra field trace failed")
        r, c = best
        path.append(best)
    path.reverse()
    return path


def geodesic_distance(world: World, a, b) -> float:
    """Shortest-path length on the raw occupancy grid between two points,
    endpoints snapped to their nearest free cells; inf when disconnected."""
    field = geodesic_field(world, a)
    cb = _nearest_free_cell(world, b[0], b[1])
    if cb is None:
        return float("inf")
    return float(field[cb])


def geodesic_field(world: World, src) -> np.ndarray:
    """Distance field (units) from a point, on the raw occupancy grid."""
    ca = _nearest_free_cell(world, src[0], src[1])
    if ca is None:
        return np.full(world.occupancy.shape, np.inf)
    return dijkstra_field(world.occupancy, ca, world.cell)


def _smooth(world: World, points: list[tuple[float, float]], clearance: float):
    """Greedy string pulling with analytic line-of-sight checks."""
    if len(points) <= 2:
        return points
    segs = world.wall_segments
    centers = world.object_centers
    radii = world.object_radii
    out = [points[0]]
    i = 0
    while i < len(points) - 1:
        j = len(points) - 1
        while j > i + 1:
            if geometry.segment_clear(np.array(out[-1]), np.array(points[j]),
                                      clearance, segs, centers, radii):
                break
            j -= 1
        out.append(points[j])
        i = j
    return out


def _resample(points, max_step):
    """Even spacing <= max_step along each smoothed leg."""
    out = [points[0]]
    for a, b in zip(points[:-1], points[1:]):
        ax, ay = a
        bx, by = b
        leg = float(np.hypot(bx - ax, by - ay))
        if leg < 1e-9:
            continue
        n = max(1, int(np.ceil(leg / max_step)))
        for s in range(1, n + 1):
            f = s / n
            out.append((ax + f * (bx - ax), ay + f * (by - ay)))
    return out


def plan_path(world: World, start: Pose, goal, success_radius: float = 1.0,
              max_step_dist: float = 0.5, face_point=None) -> list[Pose]:
    """Collision-free pose sequence from start to within success_radius of
    goal. Headings face the direction of travel; the final pose faces
    face_point when given (else the goal)."""
    gx, gy = float(goal[0]), float(goal[1])
    if not world.point_free(gx, gy, clearance=world.cfg.agent_radius * 0.9):
        raise PathError(f"goal ({gx:.2f},{gy:.2f}) is not in free space")
    if not world.point_free(start.x, start.y, clearance=1e-9):
        raise PathError(f"start ({start.x:.2f},{start.y:.2f}) is not in free space")
    if np.hypot(start.x - gx, start.y - gy) < 1e-9:
        return [Pose(start.x, start.y, start.theta)]

    occ = world.occupancy_inflated
    start_cell = _nearest_free_cell(world, start.x, start.y, inflated=True)
    if start_cell is None:
        raise PathError("start cannot be snapped to a free cell")
    field = dijkstra_field(occ, start_cell, world.cell)

    ny, nx = occ.shape
    rows, cols = np.meshgrid(np.arange(ny), np.arange(nx), indexing="ij")
    x0, y0, _, _ = world.bounds
    ccx = x0 + (cols - 1 + 0.5) * world.cell
    ccy = y0 + (rows - 1 + 0.5) * world.cell
    to_goal = np.hypot(ccx - gx, ccy - gy)
    candidates = (~occ) & np.isfinite(field) & (to_goal <= success_radius - 0.5 * world.cell)
    if not candidates.any():
        raise PathError(f"goal ({gx:.2f},{gy:.2f}) unreachable from start")
    score = np.where(candidates, field + 2.0 * to_goal, np.inf)
    goal_cell = np.unravel_index(np.argmin(score), score.shape)

    cells = _trace_path(field, occ, goal_cell, world.cell)
    pts = [(start.x, start.y)] + [world.cell_center(r, c) for (r, c) in cells[1:]]
    pts = _smooth(world, pts, world.cfg.agent_radius + 0.02)
    pts = _resample(pts, max_step_dist)

    poses = []
    for i, (px, py) in enumerate(pts):
        if i < len(pts) - 1:
            nx_, ny_ = pts[i + 1]
            theta = float(np.arctan2(ny_ - py, nx_ - px))
        else:
            fx, fy = face_point if face_point is not None else (gx, gy)
            theta = float(np.arctan2(fy - py, fx - px)) if np.hypot(fx - px, fy - py) > 1e-9 \
                else poses[-1].theta if poses else start.theta
        poses.append(Pose(float(px), float(py), float(geometry.wrap_angle(theta))))
    return poses
