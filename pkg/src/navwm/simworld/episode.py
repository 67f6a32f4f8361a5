"""Trajectory generation: waypoint stepping with collision clipping,
milestone detection (room transitions, sharp turns, long straight travel),
and templated instruction assembly."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import EpisodeConfig
from . import geometry
from .planner import PathError, geodesic_distance, plan_path
from .raycast import Observation, raycast_panorama
from .vocab import Tokenizer, object_name
from .world import Pose, World


class EpisodeGenError(RuntimeError):
    pass


@dataclass
class Milestone:
    frame: int
    kind: str          # door | left | right | forward | stop
    text: str
    tokens: list[int]


@dataclass
class Episode:
    world_seed: int
    instruction: list[int]
    sub_instructions: list[Milestone]
    poses: list[Pose]
    depth: np.ndarray      # (N,R) float32
    semfeat: np.ndarray    # (N,R,F) float32
    class_ids: np.ndarray  # (N,R) int16
    goal: tuple[float, float]
    path_length: float
    goal_class: int
    world: World | None = field(default=None, repr=False)

    @property
    def n_frames(self) -> int:
        return len(self.poses)

    @property
    def milestone_frames(self) -> list[int]:
        return [m.frame for m in self.sub_instructions]

    def observation(self, t: int) -> Observation:
        return Observation(depth=self.depth[t].astype(np.float64),
                           semfeat=self.semfeat[t].astype(np.float64),
                           class_ids=self.class_ids[t].astype(np.int64))


def relative_pose(base: Pose, other: Pose) -> np.ndarray:
    """(dx, dy, sin dtheta, cos dtheta) of `other` in the body frame of `base`."""
    dx = other.x - base.x
    dy = other.y - base.y
    c, s = np.cos(base.theta), np.sin(base.theta)
    bx = c * dx + s * dy
    by = -s * dx + c * dy
    dth = geometry.wrap_angle(other.theta - base.theta)
    return np.array([bx, by, np.sin(dth), np.cos(dth)])


def step_agent(world: World, pose: Pose, wp) -> Pose:
    """Execute one body-frame waypoint; motion clips at first obstacle contact.

    wp = [dx, dy, sin dtheta, cos dtheta, ...]; the heading pair is
    renormalized before use, so (0, 0, 0, 1) is the identity step.
    """
    wp = np.asarray(wp, dtype=np.float64)
    if not np.all(np.isfinite(wp[:4])):
        raise ValueError("waypoint contains non-finite values")
    c, s = np.cos(pose.theta), np.sin(pose.theta)
    wx = c * wp[0] - s * wp[1]
    wy = s * wp[0] + c * wp[1]
    dist = float(np.hypot(wx, wy))
    x, y = pose.x, pose.y
    if dist > 1e-12:
        u = np.array([wx / dist, wy / dist])
        t = geometry.first_contact(np.array([x, y]), u, dist, world.cfg.agent_radius,
                                   world.wall_segments, world.object_centers,
                                   world.object_radii)
        travel = dist if not np.isfinite(t) else max(0.0, t - 1e-6)
        x += u[0] * travel
        y += u[1] * travel
    norm = float(np.hypot(wp[2], wp[3]))
    dtheta = float(np.arctan2(wp[2] / norm, wp[3] / norm)) if norm > 1e-12 else 0.0
    return Pose(float(x), float(y), float(geometry.wrap_angle(pose.theta + dtheta)))


def detect_milestones(world: World, poses: list[Pose], cfg: EpisodeConfig):
    """Interior milestone frames per the generation rules: door crossings,
    cumulative heading change beyond the turn threshold, and every
    straight_span units of straight travel. Returns (frame, kind) pairs
    excluding the terminal milestone."""
    thresh = np.deg2rad(cfg.turn_thresh_deg)
    out: list[tuple[int, str]] = []
    room = world.room_of(poses[0].x, poses[0].y)
    acc = 0.0
    run = 0.0
    last = -10
    for i in range(1, len(poses)):
        p, q = poses[i - 1], poses[i]
        acc += geometry.wrap_angle(q.theta - p.theta)
        run += float(np.hypot(q.x - p.x, q.y - p.y))
        new_room = world.room_of(q.x, q.y)
        kind = None
        if new_room != room and new_room >= 0:
            room = new_room
            kind = "door"
        elif abs(acc) >= thresh:
            kind = "left" if acc > 0 else "right"
        elif run >= cfg.straight_span and abs(acc) < thresh:
            kind = "forward"
        if kind is not None:
            if i - last >= 2 and i < len(poses) - 2:
                out.append((i, kind))
                last = i
            acc = 0.0
            run = 0.0
    return out


def _nearest_object_class(world: World, pose: Pose) -> int:
    d = np.hypot(world.object_centers[:, 0] - pose.x,
                 world.object_centers[:, 1] - pose.y)
    return int(world.object_classes[int(np.argmin(d))])


def _milestone_text(kind: str, obj_class: int) -> str:
    if kind == "door":
        return "go through the door into the next room"
    if kind in ("left", "right"):
        return f"turn {kind} at the {object_name(obj_class)}"
    if kind == "forward":
        return f"go forward to the {object_name(obj_class)}"
    return f"stop at the {object_name(obj_class)}"


def _sample_free_point(rng, world: World, room, clearance):
    x0, y0, x1, y1 = room
    inset = clearance + 0.1
    for _ in range(80):
        x = float(rng.uniform(x0 + inset, x1 - inset))
        y = float(rng.uniform(y0 + inset, y1 - inset))
        if world.point_free(x, y, clearance):
            return x, y
    return None


def _goal_point_near(rng, world: World, obj, room):
    standoff = obj.radius + world.cfg.agent_radius + 0.35
    for a in rng.permutation(8):
        ang = a * np.pi / 4.0
        x = obj.x + standoff * np.cos(ang)
        y = obj.y + standoff * np.sin(ang)
        rx0, ry0, rx1, ry1 = room
        if not (rx0 + 0.3 < x < rx1 - 0.3 and ry0 + 0.3 < y < ry1 - 0.3):
            continue
        if world.point_free(x, y, world.cfg.agent_radius + 0.1):
            return x, y
    return None


def generate_episode(world: World, seed: int, cfg: EpisodeConfig,
                     tokenizer: Tokenizer) -> Episode:
    """Sample start/goal in distinct rooms, plan the trajectory, annotate
    milestones, and render observations at every pose. Deterministic in
    (world, seed)."""
    if len(world.rooms) < 2:
        raise EpisodeGenError("episodes need a world with at least 2 rooms")
    rng = np.random.default_rng(np.random.SeedSequence([world.seed, int(seed), 2]))
    errors: list[str] = []
    for _ in range(cfg.max_retries):
        rs, rg = rng.choice(len(world.rooms), size=2, replace=False)
        start = _sample_free_point(rng, world, world.rooms[rs],
                                   world.cfg.agent_radius + 0.3)
        if start is None:
            errors.append("no free start")
            continue
        goal_objs = [o for o in world.objects if world.room_of(o.x, o.y) == rg]
        if not goal_objs:
            errors.append("goal room has no objects")
            continue
        obj = goal_objs[int(rng.integers(len(goal_objs)))]
        goal = _goal_point_near(rng, world, obj, world.rooms[rg])
        if goal is None:
            errors.append("no free stand point at goal object")
            continue
        gt_len = geodesic_distance(world, start, goal)
        if not np.isfinite(gt_len) or not cfg.min_geodesic <= gt_len <= cfg.max_geodesic:
            errors.append("goal distance out of range or unreachable")
            continue
        try:
            poses = plan_path(world, Pose(start[0], start[1], 0.0), goal,
                              success_radius=0.6, max_step_dist=cfg.max_step_dist,
                              face_point=(obj.x, obj.y))
        except PathError as e:
            errors.append(str(e))
            continue
        if len(poses) < 8:
            errors.append("path too short")
            continue
        interior = detect_milestones(world, poses, cfg)
        if len(interior) + 1 > cfg.max_milestones:
            errors.append("too many milestones")
            continue

        milestones = []
        for frame, kind in interior:
            obj_cls = _nearest_object_class(world, poses[frame])
            text = _milestone_text(kind, obj_cls)
            milestones.append(Milestone(frame, kind, text, tokenizer.encode(text)))
        text = _milestone_text("stop", obj.class_id)
        milestones.append(Milestone(len(poses) - 1, "stop", text, tokenizer.encode(text)))

        instruction = [tid for m in milestones for tid in m.tokens]
        obs = [raycast_panorama(world, p) for p in poses]
        return Episode(
            world_seed=world.seed,
            instruction=instruction,
            sub_instructions=milestones,
            poses=poses,
            depth=np.stack([o.depth for o in obs]).astype(np.float32),
            semfeat=np.stack([o.semfeat for o in obs]).astype(np.float32),
            class_ids=np.stack([o.class_ids for o in obs]).astype(np.int16),
            goal=(float(goal[0]), float(goal[1])),
            path_length=float(gt_len),
            goal_class=int(obj.class_id),
            world=world,
        )
    raise EpisodeGenError(f"episode generation failed after {cfg.max_retries} attempts: "
                          f"{errors[-3:]}")
