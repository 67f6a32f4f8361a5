"""Procedural multi-room worlds: BSP room partition, doors on a random
spanning tree, circular objects, analytic wall segments, and an occupancy
grid used only for planning and geodesic distances."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import WorldConfig
from . import geometry

EMBEDDING_MASTER_SEED = 9001
WALL_CLASS = 0


class WorldGenError(RuntimeError):
    pass


@dataclass
class Pose:
    x: float
    y: float
    theta: float  # radians in [-pi, pi)

    def as_array(self):
        return np.array([self.x, self.y, self.theta])


@dataclass
class Door:
    axis: int            # 0: door in a vertical wall (x = line), 1: horizontal
    line: float          # wall coordinate on the split axis
    lo: float            # gap interval on the other axis
    hi: float
    rooms: tuple[int, int]

    def center(self):
        mid = 0.5 * (self.lo + self.hi)
        return (self.line, mid) if self.axis == 0 else (mid, self.line)


@dataclass
class WorldObject:
    class_id: int        # 1..C-1 (class 0 is the wall class)
    x: float
    y: float
    radius: float


@dataclass
class World:
    seed: int
    cfg: WorldConfig
    bounds: tuple[float, float, float, float]      # x0, y0, x1, y1
    rooms: list[tuple[float, float, float, float]]
    doors: list[Door]
    objects: list[WorldObject]
    wall_segments: np.ndarray                      # (S,4)
    class_embeddings: np.ndarray                   # (C,F), unit-norm rows
    occupancy: np.ndarray = field(repr=False, default=None)       # (ny,nx) bool
    occupancy_inflated: np.ndarray = field(repr=False, default=None)

    @property
    def cell(self):
        return self.cfg.cell

    @property
    def object_centers(self):
        if not self.objects:
            return np.zeros((0, 2))
        return np.array([[o.x, o.y] for o in self.objects])

    @property
    def object_radii(self):
        if not self.objects:
            return np.zeros((0,))
        return np.array([o.radius for o in self.objects])

    @property
    def object_classes(self):
        return np.array([o.class_id for o in self.objects], dtype=np.int64)

    def grid_shape(self):
        return self.occupancy.shape

    def cell_of(self, x, y):
        x0, y0, _, _ = self.bounds
        col = int(np.floor((x - x0) / self.cell)) + 1  # +1: margin ring
        row = int(np.floor((y - y0) / self.cell)) + 1
        ny, nx = self.occupancy.shape
        return min(max(row, 0), ny - 1), min(max(col, 0), nx - 1)

    def cell_center(self, row, col):
        x0, y0, _, _ = self.bounds
        return (x0 + (col - 1 + 0.5) * self.cell, y0 + (row - 1 + 0.5) * self.cell)

    def room_of(self, x, y) -> int:
        for i, (rx0, ry0, rx1, ry1) in enumerate(self.rooms):
            if rx0 <= x <= rx1 and ry0 <= y <= ry1:
                return i
        return -1

    def obstacle_clearance(self, x, y) -> float:
        """Distance from a point to the nearest wall or object surface."""
        p = np.array([[x, y]])
        d = np.inf
        if self.wall_segments.shape[0] > 0:
            d = min(d, float(geometry.point_segment_distance(p, self.wall_segments).min()))
        if self.objects:
            od = np.sqrt(((p - self.object_centers) ** 2).sum(axis=1)) - self.object_radii
            d = min(d, float(od.min()))
        return d

    def point_free(self, x, y, clearance=0.0) -> bool:
        x0, y0, x1, y1 = self.bounds
        if not (x0 < x < x1 and y0 < y < y1):
            return False
        return self.obstacle_clearance(x, y) > clearance


def class_embedding_matrix(n_classes: int, feat_dim: int) -> np.ndarray:
    """Fixed unit-norm, pairwise-distinct per-class feature rows.

    Deterministic in (C, F) only, so every world shares the same matrix.
    Values are rounded through float32 so serialized features compare exactly.
    """
    rng = np.random.default_rng(np.random.SeedSequence([EMBEDDING_MASTER_SEED, n_classes, feat_dim]))
    m = rng.normal(size=(n_classes, feat_dim))
    m /= np.linalg.norm(m, axis=1, keepdims=True)
    return m.astype(np.float32).astype(np.float64)


def _bsp_partition(rng, box, n_rooms, room_min, room_max):
    """Split box into exactly n_rooms leaves; None if this attempt wedges."""
    leaves = [box]
    for _ in range(n_rooms - 1):
        options = [i for i, (x0, y0, x1, y1) in enumerate(leaves)
                   if max(x1 - x0, y1 - y0) >= 2 * room_min]
        if not options:
            return None
        weights = np.array([(leaves[i][2] - leaves[i][0]) * (leaves[i][3] - leaves[i][1])
                            for i in options])
        i = options[rng.choice(len(options), p=weights / weights.sum())]
        x0, y0, x1, y1 = leaves.pop(i)
        if (x1 - x0) >= (y1 - y0):
            c = rng.uniform(x0 + room_min, x1 - room_min)
            a, b = (x0, y0, c, y1), (c, y0, x1, y1)
        else:
            c = rng.uniform(y0 + room_min, y1 - room_min)
            a, b = (x0, y0, x1, c), (x0, c, x1, y1)
        leaves += [a, b]
    for x0, y0, x1, y1 in leaves:
        if (x1 - x0) > room_max or (y1 - y0) > room_max:
            return None
        if (x1 - x0) < room_min or (y1 - y0) < room_min:
            return None
    return leaves


def _shared_edges(rooms, min_overlap):
    """(i, j, axis, line, lo, hi) for room pairs sharing enough wall."""
    edges = []
    tol = 1e-9
    for i in range(len(rooms)):
        for j in range(i + 1, len(rooms)):
            a, b = rooms[i], rooms[j]
            if abs(a[2] - b[0]) < tol or abs(b[2] - a[0]) < tol:
                line = a[2] if abs(a[2] - b[0]) < tol else b[2]
                lo, hi = max(a[1], b[1]), min(a[3], b[3])
                if hi - lo >= min_overlap:
                    edges.append((i, j, 0, line, lo, hi))
            if abs(a[3] - b[1]) < tol or abs(b[3] - a[1]) < tol:
                line = a[3] if abs(a[3] - b[1]) < tol else b[3]
                lo, hi = max(a[0], b[0]), min(a[2], b[2])
                if hi - lo >= min_overlap:
                    edges.append((i, j, 1, line, lo, hi))
    return edges


def _spanning_doors(rng, n_rooms, edges, door_width, extra_prob):
    order = rng.permutation(len(edges))
    parent = list(range(n_rooms))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    doors = []
    margin = 0.5
    for idx in order:
        i, j, axis, line, lo, hi = edges[idx]
        ri, rj = find(i), find(j)
        take = ri != rj or rng.uniform() < extra_prob
        if not take:
            continue
        if ri != rj:
            parent[ri] = rj
        start = rng.uniform(lo + margin, hi - margin - door_width)
        doors.append(Door(axis, line, start, start + door_width, (i, j)))
    roots = {find(i) for i in range(n_rooms)}
    return doors if len(roots) == 1 else None


def _wall_segments(rooms, doors, bounds):
    """Union of room edges per supporting line, minus door gaps."""
    lines: dict[tuple[int, float], list[tuple[float, float]]] = {}

    def add(axis, line, lo, hi):
        key = (axis, round(line, 9))
        lines.setdefault(key, []).append((lo, hi))

    for x0, y0, x1, y1 in rooms:
        add(0, x0, y0, y1)
        add(0, x1, y0, y1)
        add(1, y0, x0, x1)
        add(1, y1, x0, x1)

    gaps: dict[tuple[int, float], list[tuple[float, float]]] = {}
    for d in doors:
        gaps.setdefault((d.axis, round(d.line, 9)), []).append((d.lo, d.hi))

    segs = []
    for (axis, line), ivals in sorted(lines.items()):
        ivals = sorted(ivals)
        merged = [list(ivals[0])]
        for lo, hi in ivals[1:]:
            if lo <= merged[-1][1] + 1e-9:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        pieces = merged
        for glo, ghi in sorted(gaps.get((axis, line), [])):
            nxt = []
            for lo, hi in pieces:
                if ghi <= lo or glo >= hi:
                    nxt.append([lo, hi])
                    continue
                if glo > lo:
                    nxt.append([lo, glo])
                if ghi < hi:
                    nxt.append([ghi, hi])
            pieces = nxt
        for lo, hi in pieces:
            if hi - lo < 1e-6:
                continue
            if axis == 0:
                segs.append([line, lo, line, hi])
            else:
                segs.append([lo, line, hi, line])
    return np.array(segs) if segs else np.zeros((0, 4))


def _build_occupancy(bounds, cell, wall_segments, centers, radii):
    x0, y0, x1, y1 = bounds
    nx = int(np.ceil((x1 - x0) / cell)) + 2   # one-cell occupied margin ring
    ny = int(np.ceil((y1 - y0) / cell)) + 2
    occ = np.zeros((ny, nx), dtype=bool)
    occ[0, :] = occ[-1, :] = True
    occ[:, 0] = occ[:, -1] = True
    cols = x0 + (np.arange(nx) - 1 + 0.5) * cell
    rows = y0 + (np.arange(ny) - 1 + 0.5) * cell
    cx, cy = np.meshgrid(cols, rows)
    pts = np.stack([cx.ravel(), cy.ravel()], axis=1)
    reach = cell * 0.7072  # just over half the cell diagonal
    if wall_segments.shape[0] > 0:
        d = geometry.point_segment_distance(pts, wall_segments).min(axis=1)
        occ |= (d <= reach).reshape(ny, nx)
    if centers.shape[0] > 0:
        diff = pts[:, None, :] - centers[None, :, :]
        d = np.sqrt((diff ** 2).sum(axis=2)) - radii[None, :]
        occ |= (d.min(axis=1) <= reach).reshape(ny, nx)
    occ |= (cx < x0) | (cx > x1) | (cy < y0) | (cy > y1)
    return occ


def inflate(occ: np.ndarray, cells: int = 1) -> np.ndarray:
    out = occ.copy()
    for _ in range(cells):
        grown = out.copy()
        grown[1:, :] |= out[:-1, :]
        grown[:-1, :] |= out[1:, :]
        grown[:, 1:] |= out[:, :-1]
        grown[:, :-1] |= out[:, 1:]
        grown[1:, 1:] |= out[:-1, :-1]
        grown[1:, :-1] |= out[:-1, 1:]
        grown[:-1, 1:] |= out[1:, :-1]
        grown[:-1, :-1] |= out[1:, 1:]
        out = grown
    return out


def _flood(occ: np.ndarray, start) -> np.ndarray:
    """4-connected reachability over free cells."""
    ny, nx = occ.shape
    seen = np.zeros_like(occ)
    if occ[start]:
        return seen
    stack = [start]
    seen[start] = True
    while stack:
        r, c = stack.pop()
        for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if 0 <= rr < ny and 0 <= cc < nx and not occ[rr, cc] and not seen[rr, cc]:
                seen[rr, cc] = True
                stack.append((rr, cc))
    return seen


def _place_objects(rng, world_rooms, doors, cfg):
    objects = []
    door_pts = np.array([d.center() for d in doors]) if doors else np.zeros((0, 2))
    classes = np.arange(1, cfg.n_classes)
    for (x0, y0, x1, y1) in world_rooms:
        n = int(rng.integers(cfg.min_objects_per_room, cfg.max_objects_per_room + 1))
        cls = rng.choice(classes, size=min(n, len(classes)), replace=False)
        for k in range(len(cls)):
            r = float(rng.uniform(cfg.object_radius_min, cfg.object_radius_max))
            inset = r + 0.7
            if x1 - x0 < 2 * inset + 0.5 or y1 - y0 < 2 * inset + 0.5:
                break
            for _ in range(40):
                px = float(rng.uniform(x0 + inset, x1 - inset))
                py = float(rng.uniform(y0 + inset, y1 - inset))
                if door_pts.shape[0] > 0:
                    dd = np.sqrt(((door_pts - [px, py]) ** 2).sum(axis=1))
                    if dd.min() < cfg.door_width + r + cfg.agent_radius + 0.4:
                        continue
                ok = all(np.hypot(o.x - px, o.y - py) > o.radius + r + 3 * cfg.agent_radius + 0.5
                         for o in objects)
                if ok:
                    objects.append(WorldObject(int(cls[k]), px, py, r))
                    break
    return objects


def generate_world(seed: int, cfg: WorldConfig) -> World:
    """Deterministic world from (seed, cfg); raises WorldGenError when the
    layout constraints cannot be satisfied within cfg.max_retries attempts."""
    if cfg.n_classes < 2:
        raise WorldGenError("need at least 2 classes (one is reserved for walls)")
    if cfg.n_rooms < 1:
        raise WorldGenError("need at least 1 room")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 1]))
    n_cols = int(np.ceil(np.sqrt(cfg.n_rooms)))
    n_rows = int(np.ceil(cfg.n_rooms / n_cols))
    for _ in range(cfg.max_retries):
        sx = float(rng.uniform(0.88, 1.05)) * 0.5 * (cfg.room_min + cfg.room_max)
        sy = float(rng.uniform(0.88, 1.05)) * 0.5 * (cfg.room_min + cfg.room_max)
        box = (0.0, 0.0, n_cols * sx, n_rows * sy)
        rooms = _bsp_partition(rng, box, cfg.n_rooms, cfg.room_min, cfg.room_max)
        if rooms is None:
            continue
        rooms = sorted(rooms)
        if cfg.n_rooms > 1:
            edges = _shared_edges(rooms, cfg.door_width + 1.2)
            doors = _spanning_doors(rng, cfg.n_rooms, edges, cfg.door_width,
                                    cfg.extra_door_prob)
            if doors is None:
                continue
        else:
            doors = []
        objects = _place_objects(rng, rooms, doors, cfg)
        if any(not any(r[0] <= o.x <= r[2] and r[1] <= o.y <= r[3] for o in objects)
               for r in rooms):
            continue
        segs = _wall_segments(rooms, doors, box)
        centers = (np.array([[o.x, o.y] for o in objects]) if objects else np.zeros((0, 2)))
        radii = np.array([o.radius for o in objects]) if objects else np.zeros((0,))
        occ = _build_occupancy(box, cfg.cell, segs, centers, radii)
        world = World(seed=int(seed), cfg=cfg, bounds=box, rooms=rooms, doors=doors,
                      objects=objects, wall_segments=segs,
                      class_embeddings=class_embedding_matrix(cfg.n_classes, cfg.feat_dim),
                      occupancy=occ, occupancy_inflated=inflate(occ, 1))
        if _rooms_connected(world):
            return world
    raise WorldGenError(f"world generation failed after {cfg.max_retries} attempts "
                        f"(seed={seed}, rooms={cfg.n_rooms})")


def _rooms_connected(world: World) -> bool:
    cells = []
    for (x0, y0, x1, y1) in world.rooms:
        cell = _nearest_free_cell(world, 0.5 * (x0 + x1), 0.5 * (y0 + y1))
        if cell is None:
            return False
        cells.append(cell)
    seen = _flood(world.occupancy, cells[0])
    return all(seen[c] for c in cells)


def _nearest_free_cell(world: World, x, y, inflated=False):
    occ = world.occupancy_inflated if inflated else world.occupancy
    r0, c0 = world.cell_of(x, y)
    if not occ[r0, c0]:
        return (r0, c0)
    ny, nx = occ.shape
    for radius in range(1, max(ny, nx)):
        best = None
        best_d = np.inf
        for r in range(max(0, r0 - radius), min(ny, r0 + radius + 1)):
            for c in range(max(0, c0 - radius), min(nx, c0 + radius + 1)):
                if max(abs(r - r0), abs(c - c0)) != radius or occ[r, c]:
                    continue
                cx, cy = world.cell_center(r, c)
                d = (cx - x) ** 2 + (cy - y) ** 2
                if d < best_d:
                    best, best_d = (r, c), d
        if best is not None:
            return best
    return None
