from .world import (WALL_CLASS, Door, Pose, World, WorldGenError, WorldObject,
                    class_embedding_matrix, generate_world)
from .raycast import Observation, RaycastError, ray_angles, raycast_panorama
from .planner import PathError, dijkstra_field, geodesic_distance, geodesic_field, plan_path
from .episode import (Episode, EpisodeGenError, Milestone, detect_milestones,
                      generate_episode, relative_pose, step_agent)
from .vocab import OBJECT_NAMES, PAD_ID, UNK_ID, Tokenizer, object_name
from .io import (FormatError, read_episodes, read_obs_blob, read_world, world_from_dict,
                 world_to_dict, write_episodes, write_world)

__all__ = [
    "WALL_CLASS", "Door", "Pose", "World", "WorldGenError", "WorldObject",
    "class_embedding_matrix", "generate_world", "Observation", "RaycastError",
    "ray_angles", "raycast_panorama", "PathError", "dijkstra_field", "geodesic_distance",
    "geodesic_field", "plan_path", "Episode", "EpisodeGenError", "Milestone",
    "detect_milestones", "generate_episode", "relative_pose", "step_agent",
    "OBJECT_NAMES", "PAD_ID", "UNK_ID", "Tokenizer", "object_name", "FormatError",
    "read_episodes", "read_obs_blob", "read_world", "world_from_dict", "world_to_dict",
    "write_episodes", "write_world",
]
