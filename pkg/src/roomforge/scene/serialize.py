"""Native JSON scene format (format_version "1").

Serialization is deterministic: fixed key order, repr-exact floats, and a
canonical quaternion sign, so byte equality doubles as scene equality and
replay verification.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from ..errors import SchemaError, VersionError
from ..geometry import ConvexPiece, Polygon2, Pose2, Pose3
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

FORMAT_VERSION = "1"


def _floats(array) -> list:
    return np.asarray(array, dtype=float).tolist()


def scene_to_dict(scene: Scene) -> dict:
    rooms = []
    for room_id in scene.rooms:
        room = scene.rooms[room_id]
        rooms.append(
            {
                "id": room.id,
                "origin": _floats(room.origin),
                "wall_height": float(room.wall_height),
                "floor": _floats(room.floor.exterior),
                "walls": [
                    {
                        "id": seg.id,
                        "start": _floats(seg.start),
                        "end": _floats(seg.end),
                        "thickness": float(seg.thickness),
                        "shared_with": seg.shared_with,
                    }
                    for seg in room.walls
                ],
                "doors": [
                    {
                        "segment_id": d.segment_id,
                        "offset": float(d.offset),
                        "width": float(d.width),
                        "height": float(d.height),
                    }
                    for d in room.doors
                ],
                "windows": [
                    {
                        "segment_id": w.segment_id,
                        "offset": float(w.offset),
                        "width": float(w.width),
                        "height": float(w.height),
                        "sill": float(w.sill),
                    }
                    for w in room.windows
                ],
                "open_connections": list(room.open_connections),
                "prompt": room.prompt,
            }
        )
    assets = []
    for asset_id in scene.assets:
        asset = scene.assets[asset_id]
        assets.append(
            {
                "id": asset.id,
                "category": asset.category.value,
                "collision_pieces": [_floats(p.vertices) for p in asset.collision_pieces],
                "bbox": {"min": _floats(asset.bbox_min), "max": _floats(asset.bbox_max)},
                "mass": float(asset.mass),
                "com": _floats(asset.com),
                "inertia": _floats(asset.inertia),
                "friction": float(asset.friction),
                "visual_ref": asset.visual_ref,
            }
        )
    objects = []
    for object_id in scene.objects:
        obj = scene.objects[object_id]
        support = None
        if obj.support is not None:
            support = {
                "surface_id": obj.support.surface_id,
                "x": float(obj.support.local.x),
                "y": float(obj.support.local.y),
                "theta_deg": float(obj.support.local.theta),
            }
        objects.append(
            {
                "id": obj.id,
                "asset_id": obj.asset_id,
                "pose": {
                    "xyz": _floats(obj.pose.translation),
                    "quaternion_wxyz": _floats(obj.pose.quaternion),
                },
                "support": support,
                "welded": bool(obj.welded),
            }
        )
    return {
        "format_version": FORMAT_VERSION,
        "seed": int(scene.seed),
        "rooms": rooms,
        "assets": assets,
        "objects": objects,
    }


def serialize_scene(scene: Scene) -> bytes:
    """Scene to canonical UTF-8 JSON bytes."""
    return json.dumps(scene_to_dict(scene), indent=1).encode("utf-8")


class _Reader:
    """Dict reader that reports missing fields with their full path."""

    def __init__(self, data: Any, path: str = ""):
        self.data = data
        self.path = path

    def get(self, key: str) -> Any:
        if not isinstance(self.data, dict):
            raise SchemaError(f"expected object at {self.path or '<root>'}", self.path)
        if key not in self.data:
            path = f"{self.path}.{key}" if self.path else key
            raise SchemaError(f"missing required field {path}", path)
        return self.data[key]

    def child(self, key: str) -> "_Reader":
        return _Reader(self.get(key), f"{self.path}.{key}" if self.path else key)

    def items(self, key: str) -> list["_Reader"]:
        value = self.get(key)
        base = f"{self.path}.{key}" if self.path else key
        if not isinstance(value, list):
            raise SchemaError(f"expected array at {base}", base)
        return [_Reader(v, f"{base}[{i}]") for i, v in enumerate(value)]


def scene_from_dict(data: dict) -> Scene:
    root = _Reader(data)
    version = root.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported scene format version {version!r}", "format_version")
    scene = Scene(seed=int(root.get("seed")))
    for r in root.items("rooms"):
        walls = [
            WallSegment(
                id=w.get("id"),
                start=w.get("start"),
                end=w.get("end"),
                thickness=w.get("thickness"),
                shared_with=w.get("shared_with"),
            )
            for w in r.items("walls")
        ]
        doors = [
            Door(
                segment_id=d.get("segment_id"),
                offset=d.get("offset"),
                width=d.get("width"),
                height=d.get("height"),
            )
            for d in r.items("doors")
        ]
        windows = [
            Window(
                segment_id=w.get("segment_id"),
                offset=w.get("offset"),
                width=w.get("width"),
                height=w.get("height"),
                sill=w.get("sill"),
            )
            for w in r.items("windows")
        ]
        room = RoomGeometry(
            id=r.get("id"),
            origin=r.get("origin"),
            floor=Polygon2(r.get("floor")),
            wall_height=r.get("wall_height"),
            walls=walls,
            doors=doors,
            windows=windows,
            open_connections=list(r.get("open_connections")),
            prompt=r.get("prompt"),
        )
        scene.add_room(room)
    for a in root.items("assets"):
        bbox = a.child("bbox")
        asset = Asset(
            id=a.get("id"),
            category=AssetCategory(a.get("category")),
            collision_pieces=[ConvexPiece(np.asarray(v)) for v in a.get("collision_pieces")],
            bbox_min=bbox.get("min"),
            bbox_max=bbox.get("max"),
            mass=a.get("mass"),
            com=a.get("com"),
            inertia=a.get("inertia"),
            friction=a.get("friction"),
            visual_ref=a.get("visual_ref"),
        )
        scene.add_asset(asset)
    for o in root.items("objects"):
        pose_reader = o.child("pose")
        pose = Pose3(
            np.asarray(pose_reader.get("xyz"), dtype=float),
            np.asarray(pose_reader.get("quaternion_wxyz"), dtype=float),
        )
        support_data = o.get("support")
        support = None
        if support_data is not None:
            s = _Reader(support_data, f"{o.path}.support")
            support = SupportRef(
                surface_id=s.get("surface_id"),
                local=Pose2(s.get("x"), s.get("y"), s.get("theta_deg")),
            )
        scene.add_object(
            o.get("asset_id"),
            pose,
            object_id=o.get("id"),
            support=support,
            welded=bool(o.get("welded")),
        )
    return scene


def deserialize_scene(blob: bytes | str) -> Scene:
    """Parse canonical JSON bytes back into a Scene."""
    if isinstance(blob, bytes):
        blob = blob.decode("utf-8")
    try:
        data = json.loads(blob)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"scene file is not valid JSON: {exc}") from exc
    return scene_from_dict(data)
