"""Hierarchical plan annotation over simulator ground truth: validation and
normalization of milestone sequences, and per-frame language actions."""

from __future__ import annotations

import numpy as np

from ..config import DatasetConfig
from ..simworld import Episode, geometry

FORWARD, LEFT, RIGHT, STOP = 0, 1, 2, 3
ACTION_NAMES = ["forward", "left", "right", "stop"]


def annotate_episode(ep: Episode, max_subinstr: int = 0):
    """Validate and normalize an episode's milestones.

    Rules: decreasing milestone frames reject the episode; milestones closer
    than 2 frames are merged; the final milestone is forced to the final
    frame; a milestone past the final frame rejects the episode.

    Returns (episode, None) or (None, reason). A well-formed episode comes
    back unchanged.
    """
    subs = list(ep.sub_instructions)
    if not subs:
        return None, "no-milestones"
    frames = [m.frame for m in subs]
    if any(b < a for a, b in zip(frames, frames[1:])):
        return None, "decreasing-milestones"
    if frames[-1] > ep.n_frames - 1:
        return None, "milestone-past-end"

    merged = [subs[0]]
    for m in subs[1:]:
        if m.frame - merged[-1].frame < 2:
            merged[-1] = m  # keep the later milestone (and the terminal text)
        else:
            merged.append(m)
    if merged[-1].frame != ep.n_frames - 1:
        from ..simworld import Milestone
        last = merged[-1]
        merged[-1] = Milestone(ep.n_frames - 1, last.kind, last.text, last.tokens)
    if max_subinstr and len(merged) > max_subinstr:
        return None, "too-many-milestones"

    if merged == subs:
        return ep, None
    fixed = Episode(
        world_seed=ep.world_seed, instruction=ep.instruction, sub_instructions=merged,
        poses=ep.poses, depth=ep.depth, semfeat=ep.semfeat, class_ids=ep.class_ids,
        goal=ep.goal, path_length=ep.path_length, goal_class=ep.goal_class, world=ep.world)
    return fixed, None


def derive_language_action(ep: Episode, t: int, cfg: DatasetConfig) -> int:
    """forward/left/right/stop label for frame t.

    stop inside the stop window before the final frame; otherwise the signed
    cumulative heading change over the next `turn_lookahead` transitions
    decides left/right against the 30-degree threshold, default forward.
    """
    final = ep.n_frames - 1
    if t >= final - cfg.stop_window:
        return STOP
    acc = 0.0
    for i in range(t, min(t + cfg.turn_lookahead, final)):
        acc += geometry.wrap_angle(ep.poses[i + 1].theta - ep.poses[i].theta)
    thresh = np.deg2rad(30.0)
    if acc > thresh:
        return LEFT
    if acc < -thresh:
        return RIGHT
    return FORWARD
