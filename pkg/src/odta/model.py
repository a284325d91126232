"""Domain records: service requests, robot classes, robot state, fleets.

Default class attributes and the class/type ability map follow the four
delivery-robot classes CL0..CL3 shipped with the simulator:

    class  speed  capacity  battery  weight  dock   abilities
    CL0    1.5    60 kg     4000 J   90 kg   Dock2  T1..T7
    CL1    1.0    75 kg     5000 J   80 kg   Dock3  T1, T3, T4
    CL2    0.75   85 kg     6500 J   70 kg   Dock2  T1, T4
    CL3    0.5    95 kg     7000 J   60 kg   Dock1  T6, T7
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum


class RequestStatus(Enum):
    PENDING = "Pending"
    IN_PROGRESS = "InProgress"
    COMPLETED = "Completed"
    REJECTED = "Rejected"


class Constraint(Enum):
    HARD = "Hard"
    SOFT = "Soft"


class RobotStatus(Enum):
    BUSY = "Busy"
    FREE = "Free"
    FAILED = "Failed"
    CHARGING = "Charging"


_LEGAL_TRANSITIONS = {
    (RequestStatus.PENDING, RequestStatus.IN_PROGRESS),
    (RequestStatus.PENDING, RequestStatus.REJECTED),
    (RequestStatus.IN_PROGRESS, RequestStatus.COMPLETED),
}


@dataclass
class ServiceRequest:
    """One pickup-and-delivery job."""

    id: int
    pickup: str
    dropoff: str
    rtype: str
    demand_kg: float
    arrival_s: float
    earliest_s: float | None = None
    deadline_s: float = 0.0
    constraint: Constraint = Constraint.SOFT
    status: RequestStatus = RequestStatus.PENDING
    completed_s: float | None = None

    def __post_init__(self) -> None:
        if self.earliest_s is None:
            self.earliest_s = self.arrival_s
        if self.demand_kg <= 0:
            raise ValueError("request %d: demand must be positive" % self.id)
        if not (self.arrival_s <= self.earliest_s <= self.deadline_s):
            raise ValueError(
                "request %d: need arrival <= earliest <= deadline" % self.id
            )

    @property
    def hard(self) -> bool:
        return self.constraint is Constraint.HARD


class IllegalTransition(ValueError):
    pass


def transition_request(
    req: ServiceRequest, to: RequestStatus, now: float | None = None
) -> ServiceRequest:
    """Advance the request lifecycle; completion records the time."""
    if (req.status, to) not in _LEGAL_TRANSITIONS:
        raise IllegalTransition("%s -> %s" % (req.status.value, to.value))
    req.status = to
    if to is RequestStatus.COMPLETED:
        if now is None:
            raise ValueError("completion requires a timestamp")
        req.completed_s = now
    return req


@dataclass(frozen=True)
class RobotClassSpec:
    """Static per-class attributes."""

    class_id: int
    abilities: frozenset[str]
    speed_mps: float
    capacity_kg: float
    battery_j: float
    weight_kg: float
    start_depot: str

    def __post_init__(self) -> None:
        if not self.abilities:
            raise ValueError("class %d has no abilities" % self.class_id)
        for v in (self.speed_mps, self.capacity_kg, self.battery_j, self.weight_kg):
            if v <= 0:
                raise ValueError("class %d has a non-positive attribute" % self.class_id)


@dataclass
class RobotState:
    """Dynamic per-robot state owned by the simulation engine."""

    class_id: int
    index: int
    position: str
    energy_j: float
    srl: list["ServiceRequest"] = field(default_factory=list)
    aucq: list[int] = field(default_factory=list)
    status: RobotStatus = RobotStatus.FREE
    carried_kg: float = 0.0
    loaded: set[int] = field(default_factory=set)  # request ids on board
    ready_s: float = 0.0  # earliest time the robot can act from `position`

    @property
    def rid(self) -> tuple[int, int]:
        return (self.class_id, self.index)

    def label(self) -> str:
        return "R%d-%d" % (self.class_id, self.index)


@dataclass(frozen=True)
class RequestTypeCatalog:
    types: tuple[str, ...]
    class_map: dict[int, frozenset[str]]

    def __post_init__(self) -> None:
        known = set(self.types)
        for cid, abilities in self.class_map.items():
            extra = abilities - known
            if extra:
                raise ValueError("class %d maps unknown types %s" % (cid, sorted(extra)))


DEFAULT_TYPES = ("T1", "T2", "T3", "T4", "T5", "T6", "T7")

DOCK_NAMES = ("Dock1", "Dock2", "Dock3")


def default_classes() -> list[RobotClassSpec]:
    return [
        RobotClassSpec(0, frozenset(DEFAULT_TYPES), 1.5, 60.0, 4000.0, 90.0, "Dock2"),
        RobotClassSpec(1, frozenset({"T1", "T3", "T4"}), 1.0, 75.0, 5000.0, 80.0, "Dock3"),
        RobotClassSpec(2, frozenset({"T1", "T4"}), 0.75, 85.0, 6500.0, 70.0, "Dock2"),
        RobotClassSpec(3, frozenset({"T6", "T7"}), 0.5, 95.0, 7000.0, 60.0, "Dock1"),
    ]


def default_catalog(classes: list[RobotClassSpec] | None = None) -> RequestTypeCatalog:
    classes = classes if classes is not None else default_classes()
    return RequestTypeCatalog(
        types=DEFAULT_TYPES,
        class_map={c.class_id: c.abilities for c in classes},
    )


class FleetLayout(Enum):
    EQUAL = "EqualRobots"
    UNEQUAL = "UnequalRobots"


FLEET_COUNTS = {
    FleetLayout.EQUAL: (20, 20, 20, 20),
    FleetLayout.UNEQUAL: (13, 20, 22, 25),
}


def default_fleet(
    layout: FleetLayout, classes: list[RobotClassSpec] | None = None
) -> list[RobotState]:
    """80 robots, free and fully charged, parked at their class dock."""
    classes = classes if classes is not None else default_classes()
    counts = FLEET_COUNTS[layout]
    robots: list[RobotState] = []
    for spec, count in zip(classes, counts):
        for r in range(count):
            robots.append(
                RobotState(
                    class_id=spec.class_id,
                    index=r,
                    position=spec.start_depot,
                    energy_j=spec.battery_j,
                )
            )
    return robots


def depot_index(dock: str) -> int:
    """Map a dock name like 'Dock2' to its depot list index."""
    try:
        i = DOCK_NAMES.index(dock)
    except ValueError:
        raise ValueError("unknown dock %r" % dock) from None
    return i


def validate_request(
    req: ServiceRequest,
    catalog: RequestTypeCatalog,
    classes: list[RobotClassSpec],
) -> str | None:
    """None when some robot class can serve the request, else the reason."""
    if req.rtype not in catalog.types:
        return "unknown type"
    capable = [c for c in classes if req.rtype in catalog.class_map.get(c.class_id, frozenset())]
    if not capable:
        return "no capable class"
    if all(req.demand_kg > c.capacity_kg for c in capable):
        return "over capacity"
    return None


REQUEST_LOG_HEADER = ("j", "pickup", "dropoff", "rtype", "dem_kg", "AT_s", "ET_s", "DD_s", "TC")


def write_request_log(path: str, requests: list[ServiceRequest]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(REQUEST_LOG_HEADER)
        for r in requests:
            w.writerow(
                [
                    r.id,
                    r.pickup,
                    r.dropoff,
                    r.rtype,
                    repr(r.demand_kg),
                    repr(r.arrival_s),
                    repr(r.earliest_s),
                    repr(r.deadline_s),
                    r.constraint.value,
                ]
            )


def read_request_log(path: str) -> list[ServiceRequest]:
    out: list[ServiceRequest] = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0] == "j":
                continue
            out.append(
                ServiceRequest(
                    id=int(row[0]),
                    pickup=row[1],
                    dropoff=row[2],
                    rtype=row[3],
                    demand_kg=float(row[4]),
                    arrival_s=float(row[5]),
                    earliest_s=float(row[6]),
                    deadline_s=float(row[7]),
                    constraint=Constraint(row[8]),
                )
            )
    return out
