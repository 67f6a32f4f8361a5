"""World/episode serialization.

Episodes: JSON-lines (line 1 is a header record embedding the resolved
config), one episode per line, with observations in a binary sidecar:

    magic b"NFOB" | u32 version | u32 R | u32 F | u64 frame_count
    then per frame, little-endian float32 row-major:
        depth (R) | semfeat (R*F) | class ids (R, stored as float32)

All JSON is canonical (sorted keys, compact separators), so identical
inputs serialize to identical bytes.
"""

from __future__ import annotations

import dataclasses
import json
import struct

import numpy as np

from ..config import WorldConfig
from .episode import Episode, Milestone
from .world import (Door, World, WorldObject, _build_occupancy, _wall_segments,
                    class_embedding_matrix, inflate)

NFOB_MAGIC = b"NFOB"
NFOB_VERSION = 1


class FormatError(IOError):
    pass


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def world_to_dict(world: World) -> dict:
    return {
        "seed": world.seed,
        "bounds": list(world.bounds),
        "rooms": [list(r) for r in world.rooms],
        "doors": [[d.axis, d.line, d.lo, d.hi, d.rooms[0], d.rooms[1]] for d in world.doors],
        "objects": [[o.class_id, o.x, o.y, o.radius] for o in world.objects],
        "cfg": dataclasses.asdict(world.cfg),
    }


def world_from_dict(d: dict) -> World:
    cfg = WorldConfig(**d["cfg"])
    bounds = tuple(d["bounds"])
    rooms = [tuple(r) for r in d["rooms"]]
    doors = [Door(int(a), line, lo, hi, (int(i), int(j)))
             for a, line, lo, hi, i, j in d["doors"]]
    objects = [WorldObject(int(c), x, y, r) for c, x, y, r in d["objects"]]
    segs = _wall_segments(rooms, doors, bounds)
    centers = np.array([[o.x, o.y] for o in objects]) if objects else np.zeros((0, 2))
    radii = np.array([o.radius for o in objects]) if objects else np.zeros((0,))
    occ = _build_occupancy(bounds, cfg.cell, segs, centers, radii)
    return World(seed=int(d["seed"]), cfg=cfg, bounds=bounds, rooms=rooms, doors=doors,
                 objects=objects, wall_segments=segs,
                 class_embeddings=class_embedding_matrix(cfg.n_classes, cfg.feat_dim),
                 occupancy=occ, occupancy_inflated=inflate(occ, 1))


def write_world(path, world: World, config_header: dict | None = None):
    rec = {"type": "world", "config": config_header or {}, "world": world_to_dict(world)}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(rec) + "\n")


def read_world(path) -> World:
    with open(path, encoding="utf-8") as fh:
        rec = json.loads(fh.readline())
    if rec.get("type") != "world":
        raise FormatError(f"{path}: not a world file")
    return world_from_dict(rec["world"])


def _episode_record(ep: Episode, index: int, frame_base: int) -> dict:
    return {
        "type": "episode",
        "index": index,
        "world": world_to_dict(ep.world),
        "instruction": list(map(int, ep.instruction)),
        "subs": [{"frame": int(m.frame), "kind": m.kind, "text": m.text,
                  "tokens": list(map(int, m.tokens))} for m in ep.sub_instructions],
        "poses": [[p.x, p.y, p.theta] for p in ep.poses],
        "goal": [ep.goal[0], ep.goal[1]],
        "path_length": ep.path_length,
        "goal_class": int(ep.goal_class),
        "frame_base": int(frame_base),
        "n_frames": int(ep.n_frames),
    }


def write_episodes(jsonl_path, nfob_path, episodes: list[Episode], config_header: dict):
    if episodes:
        R = episodes[0].depth.shape[1]
        F = episodes[0].semfeat.shape[2]
    else:
        R = F = 0
    total = sum(ep.n_frames for ep in episodes)
    header = {"type": "header", "format": "navwm-episodes", "version": NFOB_VERSION,
              "R": R, "F": F, "n_frames": total, "n_episodes": len(episodes),
              "config": config_header}
    frame_base = 0
    with open(jsonl_path, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(header) + "\n")
        for i, ep in enumerate(episodes):
            fh.write(dumps_canonical(_episode_record(ep, i, frame_base)) + "\n")
            frame_base += ep.n_frames
    with open(nfob_path, "wb") as fh:
        fh.write(NFOB_MAGIC)
        fh.write(struct.pack("<IIIQ", NFOB_VERSION, R, F, total))
        for ep in episodes:
            for t in range(ep.n_frames):
                fh.write(ep.depth[t].astype("<f4").tobytes())
                fh.write(ep.semfeat[t].astype("<f4").tobytes())
                fh.write(ep.class_ids[t].astype("<f4").tobytes())


def read_obs_blob(nfob_path, magic=NFOB_MAGIC):
    """Read an observation sidecar; returns (depth (N,R), semfeat (N,R,F),
    class_ids (N,R)) float32/int16 arrays."""
    with open(nfob_path, "rb") as fh:
        buf = fh.read()
    if buf[:4] != magic:
        raise FormatError(f"{nfob_path}: bad magic {buf[:4]!r} at offset 0")
    try:
        version, R, F, total = struct.unpack_from("<IIIQ", buf, 4)
    except struct.error:
        raise FormatError(f"{nfob_path}: truncated header at offset 4") from None
    if version != NFOB_VERSION:
        raise FormatError(f"{nfob_path}: unsupported version {version} at offset 4")
    per = (R + R * F + R) * 4
    need = 24 + per * total
    if len(buf) < need:
        raise FormatError(f"{nfob_path}: truncated tensor block at offset {len(buf)} "
                          f"(need {need} bytes)")
    raw = np.frombuffer(buf, dtype="<f4", offset=24, count=total * (per // 4))
    raw = raw.reshape(total, per // 4) if total else raw.reshape(0, max(per // 4, 1))
    depth = raw[:, :R].copy()
    semfeat = raw[:, R:R + R * F].reshape(total, R, F).copy()
    class_ids = raw[:, R + R * F:].astype(np.int16)
    return depth, semfeat, class_ids


def read_episodes(jsonl_path, nfob_path=None, with_observations=True):
    """Load episodes (and their worlds); returns (episodes, header dict)."""
    episodes = []
    header = None
    worlds: dict[str, World] = {}
    with open(jsonl_path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError(f"{jsonl_path}: empty file")
    header = json.loads(lines[0])
    if header.get("type") != "header" or header.get("format") != "navwm-episodes":
        raise FormatError(f"{jsonl_path}: missing episodes header line")
    if with_observations:
        if nfob_path is None:
            nfob_path = str(jsonl_path).rsplit(".", 1)[0] + ".nfob"
        depth, semfeat, class_ids = read_obs_blob(nfob_path)
    R = header["R"]
    F = header["F"]
    for line in lines[1:]:
        rec = json.loads(line)
        if rec.get("type") != "episode":
            continue
        wkey = dumps_canonical(rec["world"])
        if wkey not in worlds:
            worlds[wkey] = world_from_dict(rec["world"])
        world = worlds[wkey]
        base = rec["frame_base"]
        n = rec["n_frames"]
        if with_observations:
            dep = depth[base:base + n]
            sem = semfeat[base:base + n]
            cls = class_ids[base:base + n]
        else:
            dep = np.zeros((0, R), dtype=np.float32)
            sem = np.zeros((0, R, F), dtype=np.float32)
            cls = np.zeros((0, R), dtype=np.int16)
        from .world import Pose
        episodes.append(Episode(
            world_seed=world.seed,
            instruction=rec["instruction"],
            sub_instructions=[Milestone(s["frame"], s["kind"], s["text"], s["tokens"])
                              for s in rec["subs"]],
            poses=[Pose(x, y, th) for x, y, th in rec["poses"]],
            depth=dep, semfeat=sem, class_ids=cls,
            goal=(rec["goal"][0], rec["goal"][1]),
            path_length=rec["path_length"],
            goal_class=rec["goal_class"],
            world=world,
        ))
    return episodes, header
