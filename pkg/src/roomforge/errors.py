"""Exception hierarchy shared across the package."""


class RoomforgeError(Exception):
    """Base class for all package-specific errors."""


class InvalidGeometryError(RoomforgeError):
    """Degenerate or malformed geometric input (non-simple polygon, flat hull, ...)."""


class NotFoundError(RoomforgeError, KeyError):
    """An object, asset, room, surface, or segment id did not resolve."""


class SchemaError(RoomforgeError):
    """A scene or script document is missing or mistypes a required field."""

    def __init__(self, message: str, field_path: str | None = None):
        super().__init__(message)
        self.field_path = field_path


class VersionError(SchemaError):
    """A scene or script document declares an unsupported format version."""


class LayoutSpecError(RoomforgeError):
    """Room specifications are internally inconsistent (bad adjacency refs, sizes)."""


class InfeasibleLayoutError(RoomforgeError):
    """Search exhausted without a complete layout."""

    def __init__(self, message: str, unplaceable_room: str):
        super().__init__(message)
        self.unplaceable_room = unplaceable_room


class OpeningDimensionError(RoomforgeError):
    """A door or window cannot fit the requested wall segment third."""


class OpeningPlacementError(RoomforgeError):
    """No sampling interval remains for an opening (overlap unavoidable)."""


class SnapFailedError(RoomforgeError):
    """snap_to_object could not find a collision-free pose; scene unchanged."""


class SimulationDivergedError(RoomforgeError):
    """The settling integrator produced a non-finite state."""

    def __init__(self, message: str, body_id: str):
        super().__init__(message)
        self.body_id = body_id


class ClearanceError(RoomforgeError):
    """A stack is taller than the clearance above its support surface."""

    def __init__(self, message: str, required: float, available: float):
        super().__init__(message)
        self.required = required
        self.available = available


class FillFailedError(RoomforgeError):
    """fill_container ended with zero items inside the container."""


class ArrangementBoundsError(RoomforgeError):
    """An arrangement item center lies outside the container bounds."""


class ArrangementCollisionError(RoomforgeError):
    """Two arrangement items collide before simulation."""

    def __init__(self, message: str, pair: tuple[str, str], depth: float):
        super().__init__(message)
        self.pair = pair
        self.depth = depth


class ArrangementFailedError(RoomforgeError):
    """An item fell off the container; the whole arrangement is rejected."""

    def __init__(self, message: str, fallen_ids: list[str], container_bounds: dict):
        super().__init__(message)
        self.fallen_ids = fallen_ids
        self.container_bounds = container_bounds


class PileFailedError(RoomforgeError):
    """Fewer than two pile items remained on the surface."""

    def __init__(self, message: str, remaining_ids: list[str], suggestion: str):
        super().__init__(message)
        self.remaining_ids = remaining_ids
        self.suggestion = suggestion


class ProjectionFailedError(RoomforgeError):
    """Non-penetration projection did not converge."""

    def __init__(self, message: str, worst_pair: tuple[str, str], residual: float):
        super().__init__(message)
        self.worst_pair = worst_pair
        self.residual = residual


class ScriptError(RoomforgeError):
    """A build script failed schema validation before execution."""
