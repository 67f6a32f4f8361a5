"""Panoramic depth + semantic-feature rendering by analytic raycasting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry
from .world import WALL_CLASS, Pose, World


class RaycastError(ValueError):
    pass


@dataclass
class Observation:
    depth: np.ndarray      # (R,) in (0, max_range]
    semfeat: np.ndarray    # (R,F): class embedding of the hit, zeros at max range
    class_ids: np.ndarray  # (R,) int, -1 at max range

    @property
    def n_rays(self):
        return self.depth.shape[0]


def ray_angles(theta: float, n_rays: int, fov_rays: int = 0) -> np.ndarray:
    """World-frame ray angles; ray 0 points along the agent heading.

    fov_rays > 0 selects the narrower-FOV variant (untested by default):
    the angular step becomes 2*pi/fov_rays and the n_rays fan is centered
    on the heading, i.e. FOV = 2*pi * n_rays / fov_rays.
    """
    if fov_rays and fov_rays > 0:
        step = 2.0 * np.pi / fov_rays
        return theta + step * (np.arange(n_rays) - n_rays // 2)
    return theta + (2.0 * np.pi / n_rays) * np.arange(n_rays)


def raycast_panorama(world: World, pose: Pose, n_rays: int | None = None) -> Observation:
    """Render the per-ray depth/semantics panorama at a pose.

    Ray r leaves at angle theta + 2*pi*r/R; depth is the distance to the
    nearest wall or object surface, clamped to max_range. Walls report the
    reserved wall class; rays that exhaust max_range report class -1 and a
    zero feature row.
    """
    cfg = world.cfg
    R = cfg.n_rays if n_rays is None else int(n_rays)
    if not world.point_free(pose.x, pose.y, clearance=1e-9):
        raise RaycastError(f"pose ({pose.x:.3f},{pose.y:.3f}) is inside an obstacle")
    angles = ray_angles(pose.theta, R, cfg.fov_rays)
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    origin = np.array([pose.x, pose.y])

    t_walls = geometry.ray_segments(origin, dirs, world.wall_segments)
    wall_min = t_walls.min(axis=1) if t_walls.shape[1] else np.full(R, np.inf)
    t_objs = geometry.ray_circles(origin, dirs, world.object_centers, world.object_radii)
    if t_objs.shape[1]:
        obj_min = t_objs.min(axis=1)
        obj_arg = t_objs.argmin(axis=1)
    else:
        obj_min = np.full(R, np.inf)
        obj_arg = np.zeros(R, dtype=np.int64)

    depth = np.minimum(np.minimum(wall_min, obj_min), cfg.max_range)
    class_ids = np.full(R, -1, dtype=np.int64)
    hit_wall = (wall_min <= obj_min) & (wall_min < cfg.max_range)
    hit_obj = (obj_min < wall_min) & (obj_min < cfg.max_range)
    class_ids[hit_wall] = WALL_CLASS
    class_ids[hit_obj] = world.object_classes[obj_arg[hit_obj]]

    semfeat = np.zeros((R, world.class_embeddings.shape[1]))
    valid = class_ids >= 0
    semfeat[valid] = world.class_embeddings[class_ids[valid]]
    return Observation(depth=depth, semfeat=semfeat, class_ids=class_ids)
