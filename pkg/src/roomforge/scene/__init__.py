"""Scene data model: rooms, assets, object instances, support surfaces."""

from .architecture import floor_slab, room_wall_pieces, scene_static_pieces, wall_pieces
from .builders import box_asset, cylinder_asset, rectangular_room, thin_covering_asset, tub_asset
from .model import (
    Asset,
    AssetCategory,
    Door,
    ObjectInstance,
    RoomGeometry,
    Scene,
    SupportRef,
    WallSegment,
    Window,
)
from .query import list_support_surfaces, query_scene_state
from .serialize import deserialize_scene, scene_from_dict, scene_to_dict, serialize_scene
from .surfaces import (
    SupportSurface,
    ceiling_object_pose,
    ceiling_surface,
    extract_support_surfaces,
    find_room_of_point,
    get_surface,
    lift_pose,
    place_on_surface,
    refresh_support,
    room_floor_surface,
    scene_surfaces,
    unlift_pose,
    wall_mount_surface,
    wall_object_pose,
)

__all__ = [
    "Asset",
    "AssetCategory",
    "Door",
    "ObjectInstance",
    "RoomGeometry",
    "Scene",
    "SupportRef",
    "SupportSurface",
    "WallSegment",
    "Window",
    "box_asset",
    "ceiling_object_pose",
    "ceiling_surface",
    "cylinder_asset",
    "rectangular_room",
    "deserialize_scene",
    "extract_support_surfaces",
    "find_room_of_point",
    "floor_slab",
    "get_surface",
    "lift_pose",
    "list_support_surfaces",
    "place_on_surface",
    "query_scene_state",
    "refresh_support",
    "room_floor_surface",
    "room_wall_pieces",
    "scene_from_dict",
    "scene_static_pieces",
    "scene_surfaces",
    "scene_to_dict",
    "serialize_scene",
    "thin_covering_asset",
    "tub_asset",
    "unlift_pose",
    "wall_mount_surface",
    "wall_object_pose",
]
