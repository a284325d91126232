"""Deterministic discrete-event trials over a robot fleet.

A trial replays one seeded request stream against one fleet layout. Three
event kinds drive the clock: request arrivals, robots completing a service
stop, and robots finishing a recharge. Arrival events dispatch the request
(auction or greedy baseline); robot events realize the next planned stop
and re-walk the remaining route whenever the robot won something since the
plan was made.

Each robot executes a committed stop order. Bids are priced against that
order from the robot's next settle point (the node it is currently headed
to), so a winning bid and the schedule the robot later realizes walk the
same stops from the same state and land on the same times. Ordering policy
matches the insertion search: while few requests are pending the whole
order is re-optimized on every win, past that the order is kept and new
stops are spliced at their cheapest position.

Request bodies and deadlines draw from two independent seeded streams, so
scenarios differing only in deadline mode share arrivals, endpoints,
demands, and constraint flags. That makes deadline-mode comparisons paired
by construction.
"""

from __future__ import annotations

import heapq
import itertools
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from pathlib import Path

from .auction import (
    AuctionContext,
    AuctionOutcome,
    AuctionRound,
    GlobalQueue,
    MessageBus,
    Rid,
    format_rid,
    run_auction,
)
from .energy import EnergyParams, leg_energy, min_return_energy, robot_efficiency
from .model import (
    Constraint,
    FleetLayout,
    RequestStatus,
    RequestTypeCatalog,
    RobotClassSpec,
    RobotState,
    RobotStatus,
    ServiceRequest,
    default_catalog,
    default_classes,
    default_fleet,
    transition_request,
    validate_request,
)
from .stn import (
    DEPOT,
    DROPOFF,
    EXHAUSTIVE_LIMIT,
    INFEASIBLE_BID,
    PICKUP,
    BidComponents,
    EvalContext,
    RouteStop,
    ScanResult,
    ScheduleEntry,
    ScheduleError,
    StartState,
    best_ordering,
    eval_context,
    request_stops,
    scan_pair,
    walk_route,
)
from .world import DistanceMatrix, GridWorld, load_map_file, precompute_distances, resolve_point

DATA_DIR = Path(__file__).resolve().parent / "data"
DEFAULT_MAP = DATA_DIR / "hospital.map"

# Request demands are drawn so every request fits the smallest capacity
# in the default class table.
DEMAND_RANGE_KG = (1.0, 60.0)


class Policy(Enum):
    HMRODTA = "HMRODTA"
    GREEDY = "GreedyFCFS"

    @classmethod
    def parse(cls, text: str) -> "Policy":
        key = str(text).strip().lower()
        for policy in cls:
            if policy.value.lower() == key or policy.name.lower() == key:
                return policy
        raise ValueError("unknown policy %r" % text)


class DeadlineMode(Enum):
    E = "E"
    TWO_E = "2E"
    U5TO10E = "U5to10E"
    U1TO10E = "U1to10E"

    @classmethod
    def parse(cls, text: str) -> "DeadlineMode":
        key = str(text).strip().lower()
        for mode in cls:
            if mode.value.lower() == key or mode.name.lower() == key:
                return mode
        aliases = {"twoe": cls.TWO_E, "u[5e,10e]": cls.U5TO10E, "5to10e": cls.U5TO10E,
                   "1to10e": cls.U1TO10E}
        if key in aliases:
            return aliases[key]
        raise ValueError("unknown deadline mode %r" % text)


def parse_fleet(text: str) -> FleetLayout:
    key = str(text).strip().lower()
    for layout in FleetLayout:
        if layout.value.lower() == key or layout.name.lower() == key:
            return layout
    raise ValueError("unknown fleet layout %r" % text)


@dataclass(frozen=True)
class ScenarioConfig:
    n_requests: int
    deadline_mode: DeadlineMode = DeadlineMode.TWO_E
    fleet: FleetLayout = FleetLayout.EQUAL
    seed: int = 0
    trials: int = 1
    map_path: str | None = None  # None selects the bundled floor plan
    arrival_gap_max_s: float = 10.0

    def __post_init__(self) -> None:
        if self.n_requests <= 0:
            raise ValueError("n_requests must be positive")
        if self.trials <= 0:
            raise ValueError("trials must be positive")
        if self.arrival_gap_max_s < 0:
            raise ValueError("arrival gap bound must be nonnegative")

    def resolved_map(self) -> str:
        return str(self.map_path) if self.map_path else str(DEFAULT_MAP)


def min_fleet_speed(classes: list[RobotClassSpec] | None = None) -> float:
    classes = classes if classes is not None else default_classes()
    return min(c.speed_mps for c in classes)


def execution_time_E(
    req: ServiceRequest,
    world: GridWorld,
    matrix: DistanceMatrix,
    speed: float | None = None,
) -> float:
    """Reference execution time E: the pickup-to-dropoff distance at the
    slowest class speed. Deadlines are assigned as multiples of E."""
    v = speed if speed is not None else min_fleet_speed()
    d = matrix.distance(resolve_point(world, req.pickup), resolve_point(world, req.dropoff))
    if not d < math.inf:
        raise ValueError("request %d endpoints are not connected" % req.id)
    return d / v


def _deadline_offset(mode: DeadlineMode, e: float, rng: random.Random) -> float:
    if mode is DeadlineMode.E:
        return e
    if mode is DeadlineMode.TWO_E:
        return 2.0 * e
    if mode is DeadlineMode.U5TO10E:
        return rng.uniform(5.0 * e, 10.0 * e)
    # tightness drawn per request from the three fixed spreads
    sub = rng.choice((DeadlineMode.E, DeadlineMode.TWO_E, DeadlineMode.U5TO10E))
    return _deadline_offset(sub, e, rng)


def generate_requests(
    cfg: ScenarioConfig,
    world: GridWorld,
    matrix: DistanceMatrix,
    catalog: RequestTypeCatalog | None = None,
) -> list[ServiceRequest]:
    """Seeded request stream: arrival gaps uniform over [0, gap_max],
    endpoints uniform over distinct named locations, type uniform over the
    catalog, demand uniform over DEMAND_RANGE_KG, hard/soft a fair coin.
    Deadlines come from a second stream keyed off the same seed so deadline
    modes can be compared on otherwise identical workloads."""
    catalog = catalog or default_catalog()
    names = sorted(world.locations)
    if len(names) < 2:
        raise ValueError("map needs at least two named locations")
    body = random.Random("%d:body" % cfg.seed)
    deadline = random.Random("%d:deadline" % cfg.seed)
    speed = min_fleet_speed()
    requests: list[ServiceRequest] = []
    at = 0.0
    for j in range(cfg.n_requests):
        at += body.uniform(0.0, cfg.arrival_gap_max_s)
        pickup = body.choice(names)
        dropoff = body.choice([nm for nm in names if nm != pickup])
        rtype = body.choice(catalog.types)
        demand = body.uniform(*DEMAND_RANGE_KG)
        hard = body.random() < 0.5
        d = matrix.distance(resolve_point(world, pickup), resolve_point(world, dropoff))
        offset = _deadline_offset(cfg.deadline_mode, d / speed, deadline)
        requests.append(
            ServiceRequest(
                id=j,
                pickup=pickup,
                dropoff=dropoff,
                rtype=rtype,
                demand_kg=demand,
                arrival_s=at,
                deadline_s=at + offset,
                constraint=Constraint.HARD if hard else Constraint.SOFT,
            )
        )
    return requests


# ---------------------------------------------------------------------------
# Metrics and trace formats.
# ---------------------------------------------------------------------------


@dataclass
class RequestRecord:
    winner: Rid | None
    completion_s: float | None
    penalty_s: float
    outcome: str


@dataclass
class Metrics:
    cumulative_penalty_s: float = 0.0
    rejected_count: int = 0
    completed_count: int = 0
    per_request: dict[int, RequestRecord] = field(default_factory=dict)
    violations: list[str] = field(default_factory=list)


METRICS_HEADER = (
    "seed", "policy", "fleet", "deadline_mode", "n_requests",
    "cum_penalty_s", "rejected", "completed",
)

TRACE_HEADER = ("j", "rtype", "AT", "ET", "DD", "TC", "winner", "CT", "penalty", "outcome")


def metrics_row(cfg: ScenarioConfig, policy: Policy, m: Metrics, seed: int | None = None) -> tuple[str, ...]:
    return (
        str(cfg.seed if seed is None else seed),
        policy.value,
        cfg.fleet.value,
        cfg.deadline_mode.value,
        str(cfg.n_requests),
        repr(m.cumulative_penalty_s),
        str(m.rejected_count),
        str(m.completed_count),
    )


def trace_rows(requests: list[ServiceRequest], m: Metrics) -> list[tuple[str, ...]]:
    rows = [TRACE_HEADER]
    for req in requests:
        rec = m.per_request[req.id]
        rows.append(
            (
                str(req.id),
                req.rtype,
                repr(req.arrival_s),
                repr(req.earliest_s),
                repr(req.deadline_s),
                req.constraint.value,
                format_rid(rec.winner) if rec.winner is not None else "",
                repr(rec.completion_s) if rec.completion_s is not None else "",
                repr(rec.penalty_s),
                rec.outcome,
            )
        )
    return rows


def write_csv(path: str, rows: list[tuple[str, ...]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for row in rows:
            fh.write(",".join(row) + "\n")


# ---------------------------------------------------------------------------
# Scene loading (shared across trials on the same map).
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8)
def _scene(map_path: str) -> tuple[GridWorld, DistanceMatrix, dict[int, str]]:
    world = load_map_file(map_path)
    pts = sorted(set(world.locations.values()) | set(world.depots))
    matrix = precompute_distances(world, pts)
    names: dict[int, str] = {}
    for i, dep in enumerate(world.depots):
        names[matrix.index[dep]] = "Dock%d" % (i + 1)
    for nm in sorted(world.locations):
        names[matrix.index[world.locations[nm]]] = nm
    return world, matrix, names


# ---------------------------------------------------------------------------
# Trial engine.
# ---------------------------------------------------------------------------

_EV_ARRIVAL, _EV_ROBOT, _EV_CHARGE = 0, 1, 2


@dataclass
class _Executor:
    """Per-robot execution state the engine owns on top of RobotState."""

    robot: RobotState
    spec: RobotClassSpec
    ctx: EvalContext
    committed: list[RouteStop] = field(default_factory=list)
    entries: list[ScheduleEntry] = field(default_factory=list)
    states: list[tuple[float, float]] = field(default_factory=list)
    dirty: bool = False  # committed changed behind the realized entries
    pending: bool = False  # an event for this robot is on the heap


def _group_blocks(stops: list[RouteStop]) -> list[list[RouteStop]]:
    """Group a stop order into per-request blocks, first-appearance order."""
    by_req: dict[int, list[RouteStop]] = {}
    order: list[int] = []
    for s in stops:
        if s.request_id not in by_req:
            by_req[s.request_id] = []
            order.append(s.request_id)
        by_req[s.request_id].append(s)
    return [by_req[j] for j in order]


class _EngineBus(MessageBus):
    """Bids priced against each robot's committed stop order."""

    def __init__(self, engine: "TrialEngine") -> None:
        self.engine = engine

    def broadcast(
        self,
        req: ServiceRequest,
        fleet: list[RobotState],
        ctx: AuctionContext,
    ) -> list[tuple[Rid, BidComponents]]:
        eng = self.engine
        return [eng._bid(eng._exec[robot.rid], req) for robot in fleet]


class TrialEngine:
    """One seeded trial: an event loop over arrivals and robot motion."""

    def __init__(
        self,
        cfg: ScenarioConfig,
        policy: Policy = Policy.HMRODTA,
        requests: list[ServiceRequest] | None = None,
        params: EnergyParams | None = None,
        fleet: list[RobotState] | None = None,
    ) -> None:
        self.cfg = cfg
        self.policy = policy
        self.params = params or EnergyParams()
        self.world, self.matrix, self._names = _scene(cfg.resolved_map())
        self.classes = default_classes()
        self.class_by_id = {c.class_id: c for c in self.classes}
        self.catalog = default_catalog(self.classes)
        self.fleet = fleet if fleet is not None else default_fleet(cfg.fleet, self.classes)
        self.requests = (
            requests
            if requests is not None
            else generate_requests(cfg, self.world, self.matrix, self.catalog)
        )
        self.by_id = {req.id: req for req in self.requests}
        self._eta = {c.class_id: robot_efficiency(c, self.catalog) for c in self.classes}
        self._exec = {
            r.rid: _Executor(
                robot=r,
                spec=self.class_by_id[r.class_id],
                ctx=eval_context(self.world, self.matrix, self.params, self.class_by_id[r.class_id]),
            )
            for r in self.fleet
        }
        self.scan_order = [self._exec[rid] for rid in sorted(self._exec)]
        self.queue = GlobalQueue()
        self.backlog: list[ServiceRequest] = []  # greedy-only wait line
        self.actx = AuctionContext(
            world=self.world,
            matrix=self.matrix,
            params=self.params,
            catalog=self.catalog,
            classes=self.class_by_id,
        )
        self.bus = _EngineBus(self)
        self.rounds: list[AuctionRound] = []
        self.metrics = Metrics()
        self.now = 0.0
        self.arrived = 0
        self._stops: dict[int, tuple[RouteStop, RouteStop]] = {}
        self._heap: list[tuple[float, int, tuple[int, int], int]] = []
        self._seq = itertools.count()

    # -- plumbing -----------------------------------------------------------

    def _point_of(self, robot: RobotState) -> int:
        return self.matrix.index[resolve_point(self.world, robot.position)]

    def _stops_of(self, req: ServiceRequest) -> tuple[RouteStop, RouteStop]:
        pair = self._stops.get(req.id)
        if pair is None:
            pair = request_stops(req, self.world, self.matrix)
            self._stops[req.id] = pair
        return pair

    def _push_robot_event(self, x: _Executor) -> None:
        ent = x.entries[0]
        kind = _EV_CHARGE if ent.kind == DEPOT else _EV_ROBOT
        heapq.heappush(self._heap, (ent.planned_end, kind, x.robot.rid, next(self._seq)))
        x.pending = True

    def _refresh_status(self, x: _Executor) -> None:
        if x.entries:
            x.robot.status = (
                RobotStatus.CHARGING if x.entries[0].kind == DEPOT else RobotStatus.BUSY
            )
        else:
            x.robot.status = RobotStatus.FREE

    # -- bidding ------------------------------------------------------------

    def _scan(
        self, x: _Executor, req: ServiceRequest
    ) -> tuple[ScanResult, StartState, list[RouteStop]]:
        """Insertion search from the robot's next settle point. Returns the
        scan, the start state it priced from, and the committed prefix that
        stays pinned ahead of any adopted reordering."""
        pick, drop = self._stops_of(req)
        if x.entries:
            ent = x.entries[0]
            en, load = x.states[0]
            start = StartState(point=ent.point, time=ent.planned_end, energy=en, load=load)
            if ent.kind == DEPOT:
                keep, base = [], list(x.committed)
            else:
                keep, base = x.committed[:1], x.committed[1:]
        else:
            start = StartState(
                point=self._point_of(x.robot),
                time=max(self.now, x.robot.ready_s),
                energy=x.robot.energy_j,
                load=x.robot.carried_kg,
            )
            keep, base = [], list(x.committed)
        blocks = _group_blocks(base)
        if len(blocks) + 1 <= EXHAUSTIVE_LIMIT:
            res = best_ordering(blocks + [[pick, drop]], start, x.ctx, ct_stop=drop)
        else:
            res = scan_pair(base, pick, drop, start, x.ctx)
        return res, start, keep

    def _bid(self, x: _Executor, req: ServiceRequest) -> tuple[Rid, BidComponents]:
        spec = x.spec
        if req.rtype not in spec.abilities or req.demand_kg > spec.capacity_kg:
            return x.robot.rid, INFEASIBLE_BID
        res, start, _ = self._scan(x, req)
        if not res.feasible:
            return x.robot.rid, INFEASIBLE_BID
        return x.robot.rid, BidComponents(
            penalty_s=res.penalty,
            completion_s=res.completion,
            eta=self._eta[x.robot.class_id],
            used_energy_j=res.used_energy,
            energy_rem_j=start.energy - res.used_energy,
            feasible=True,
        )

    # -- plan adoption and realization ---------------------------------------

    def _adopt(self, x: _Executor, req: ServiceRequest) -> None:
        """Re-run the winning scan and make its order the committed one."""
        res, _, keep = self._scan(x, req)
        if not res.feasible:
            raise ScheduleError(
                "robot %s: winning bid for request %d cannot be materialized"
                % (x.robot.label(), req.id)
            )
        x.committed = keep + list(res.order)
        x.dirty = True
        if not x.pending:
            self._materialize(x, max(self.now, x.robot.ready_s))
            self._refresh_status(x)
            if x.entries:
                self._push_robot_event(x)

    def _materialize(self, x: _Executor, now: float) -> None:
        """Walk the committed order from the robot's current state into
        realized entries. The committed order was scanned feasible from this
        exact state, so an infeasible walk signals an engine bug."""
        x.dirty = False
        x.entries = []
        x.states = []
        if not x.committed:
            return
        start = StartState(
            point=self._point_of(x.robot),
            time=now,
            energy=x.robot.energy_j,
            load=x.robot.carried_kg,
        )
        stats = walk_route(x.committed, start, x.ctx, entries=x.entries, states=x.states)
        if not stats.feasible:
            raise ScheduleError(
                "robot %s: committed order became infeasible" % x.robot.label()
            )

    def step_robot(self, x: _Executor) -> None:
        """Realize the robot's current entry and keep it moving."""
        now = self.now
        x.pending = False
        ent = x.entries.pop(0)
        en, load = x.states.pop(0)
        robot = x.robot
        robot.energy_j = en
        robot.carried_kg = load
        robot.position = self._names[ent.point]
        robot.ready_s = now
        if ent.kind == PICKUP:
            robot.loaded.add(ent.request_id)
            x.committed.pop(0)
        elif ent.kind == DROPOFF:
            req = self.by_id[ent.request_id]
            robot.loaded.discard(req.id)
            robot.srl.remove(req)
            x.committed.pop(0)
            self._complete(req, robot.rid, now)
        if x.dirty:
            self._materialize(x, now)
        if not x.entries and not x.committed:
            self._go_idle(x, now)
        self._refresh_status(x)
        if x.entries:
            self._push_robot_event(x)
        if self.policy is Policy.GREEDY and robot.status is RobotStatus.FREE:
            self._greedy_pop(x, now)

    def _go_idle(self, x: _Executor, now: float) -> None:
        """SRL drained. Head to the nearest depot when energy is down to
        the return reserve; otherwise wait in place."""
        robot = x.robot
        pos = self._point_of(robot)
        rd = float(x.ctx.depot_dist[pos])
        if rd <= 0.0:
            return
        me = min_return_energy(robot, x.spec, self.world, self.matrix, self.params)
        if robot.energy_j > me + 1e-9:
            return
        v = x.spec.speed_mps
        arrive = now + rd / v
        dpt = int(x.ctx.depot_point[pos])
        x.entries = [ScheduleEntry(DEPOT, dpt, dpt, arrive, arrive + x.ctx.charge_s)]
        x.states = [(x.ctx.battery, 0.0)]

    # -- request completion and rejection ------------------------------------

    def _complete(self, req: ServiceRequest, rid: Rid, now: float) -> None:
        pen = 0.0 if req.hard else max(0.0, now - req.deadline_s)
        if req.hard and now > req.deadline_s + 1e-6:
            self.metrics.violations.append(
                "hard deadline: request %d delivered %.3fs late" % (req.id, now - req.deadline_s)
            )
        transition_request(req, RequestStatus.COMPLETED, now)
        self.metrics.completed_count += 1
        self.metrics.cumulative_penalty_s += pen
        self.metrics.per_request[req.id] = RequestRecord(
            winner=rid, completion_s=now, penalty_s=pen, outcome=RequestStatus.COMPLETED.value
        )

    def _record_reject(self, req: ServiceRequest) -> None:
        transition_request(req, RequestStatus.REJECTED)
        self.metrics.rejected_count += 1
        self.metrics.per_request[req.id] = RequestRecord(
            winner=None, completion_s=None, penalty_s=0.0, outcome=RequestStatus.REJECTED.value
        )

    # -- dispatch -------------------------------------------------------------

    def _on_arrival(self, req: ServiceRequest) -> None:
        if validate_request(req, self.catalog, self.classes) is not None:
            self._record_reject(req)
            return
        if self.policy is Policy.HMRODTA:
            self.queue.push(req.id)
            self.actx.now = self.now
            rnd = run_auction(req, self.fleet, self.actx, queue=self.queue, bus=self.bus)
            self.rounds.append(rnd)
            if rnd.outcome is AuctionOutcome.ASSIGNED:
                transition_request(req, RequestStatus.IN_PROGRESS)
                self._adopt(self._exec[rnd.winner], req)
            else:
                self._record_reject(req)
        else:
            x = self._first_free_capable(req)
            if x is None:
                self.backlog.append(req)
            else:
                self._greedy_assign(x, req)

    def _first_free_capable(self, req: ServiceRequest) -> _Executor | None:
        for x in self.scan_order:
            if (
                x.robot.status is RobotStatus.FREE
                and not x.robot.srl
                and req.rtype in x.spec.abilities
                and req.demand_kg <= x.spec.capacity_kg
            ):
                return x
        return None

    def _greedy_assign(self, x: _Executor, req: ServiceRequest) -> bool:
        """Give the request to this robot, or reject it when the one-shot
        schedule cannot meet a hard deadline. Returns True on assignment."""
        res, _, _ = self._scan(x, req)
        if not res.feasible:
            self._record_reject(req)
            return False
        transition_request(req, RequestStatus.IN_PROGRESS)
        x.robot.srl.append(req)
        x.committed = list(res.order)
        x.dirty = True
        if not x.pending:
            self._materialize(x, max(self.now, x.robot.ready_s))
            self._refresh_status(x)
            if x.entries:
                self._push_robot_event(x)
        return True

    def _greedy_pop(self, x: _Executor, now: float) -> None:
        i = 0
        while i < len(self.backlog):
            req = self.backlog[i]
            if req.rtype in x.spec.abilities and req.demand_kg <= x.spec.capacity_kg:
                del self.backlog[i]
                if self._greedy_assign(x, req):
                    return
                continue
            i += 1

    # -- invariants ------------------------------------------------------------

    def _check_invariants(self) -> None:
        bad = self.metrics.violations
        seen: set[int] = set()
        inflight = 0
        for x in self.scan_order:
            r = x.robot
            if r.carried_kg > x.spec.capacity_kg + 1e-9:
                bad.append("capacity: %s carries %.1fkg at t=%.3f" % (r.label(), r.carried_kg, self.now))
            if r.energy_j < -1e-9:
                bad.append("energy: %s at %.1fJ at t=%.3f" % (r.label(), r.energy_j, self.now))
            if r.aucq:
                bad.append("auction queue not drained on %s at t=%.3f" % (r.label(), self.now))
            for req in r.srl:
                if req.id in seen:
                    bad.append("exclusivity: request %d on two lists at t=%.3f" % (req.id, self.now))
                seen.add(req.id)
            inflight += len(r.srl)
        if len(self.queue):
            bad.append("global queue not drained at t=%.3f" % self.now)
        for req in self.backlog:
            if req.id in seen:
                bad.append("exclusivity: request %d queued while assigned" % req.id)
        inflight += len(self.backlog)
        m = self.metrics
        if self.arrived != m.completed_count + m.rejected_count + inflight:
            bad.append(
                "conservation: %d arrived vs %d completed + %d rejected + %d in flight at t=%.3f"
                % (self.arrived, m.completed_count, m.rejected_count, inflight, self.now)
            )

    # -- event loop -------------------------------------------------------------

    def run(self) -> Metrics:
        for req in self.requests:
            heapq.heappush(self._heap, (req.arrival_s, _EV_ARRIVAL, (req.id, -1), next(self._seq)))
        while self._heap:
            t, kind, key, _ = heapq.heappop(self._heap)
            self.now = t
            if kind == _EV_ARRIVAL:
                self.arrived += 1
                self._on_arrival(self.by_id[key[0]])
            else:
                self.step_robot(self._exec[key])
            self._check_invariants()
        m = self.metrics
        if m.completed_count + m.rejected_count != len(self.requests):
            m.violations.append("trial drained with requests still in flight")
        return m


def run_trial(
    cfg: ScenarioConfig,
    policy: Policy = Policy.HMRODTA,
    requests: list[ServiceRequest] | None = None,
    fleet: list[RobotState] | None = None,
) -> Metrics:
    """One deterministic trial; identical (cfg, policy) reruns give
    identical Metrics. Passed-in requests and robots are owned and mutated
    by the engine."""
    return TrialEngine(cfg, policy, requests=requests, fleet=fleet).run()


# ---------------------------------------------------------------------------
# Offline exhaustive baseline for small instances.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OracleResult:
    penalty_s: float
    rejected: int
    assignment: dict[int, Rid | None]


def brute_force_oracle(
    requests: list[ServiceRequest],
    robots: list[RobotState],
    world: GridWorld,
    matrix: DistanceMatrix,
    params: EnergyParams | None = None,
    classes: list[RobotClassSpec] | None = None,
    now: float = 0.0,
) -> OracleResult:
    """Clairvoyant offline optimum over every request-to-robot assignment
    and every per-robot stop interleaving: fewest rejections first, then
    least total penalty. A lower bound for any online policy on the same
    instance."""
    if len(requests) > 5 or len(robots) > 3:
        raise ValueError("oracle capped at 5 requests and 3 robots")
    params = params or EnergyParams()
    classes = classes if classes is not None else default_classes()
    spec_of = {c.class_id: c for c in classes}
    robots = sorted(robots, key=lambda r: r.rid)
    ctx_of = {}
    start_of = {}
    for r in robots:
        spec = spec_of[r.class_id]
        ctx_of[r.rid] = eval_context(world, matrix, params, spec)
        start_of[r.rid] = StartState(
            point=matrix.index[resolve_point(world, r.position)],
            time=now,
            energy=r.energy_j,
            load=r.carried_kg,
        )
    options = []
    for req in requests:
        feasible_rids = tuple(
            r.rid
            for r in robots
            if req.rtype in spec_of[r.class_id].abilities
            and req.demand_kg <= spec_of[r.class_id].capacity_kg
        )
        options.append((None,) + feasible_rids)
    best_score: tuple[int, float] | None = None
    best_assign: dict[int, Rid | None] = {}
    for combo in itertools.product(*options):
        rejected = sum(1 for tgt in combo if tgt is None)
        if best_score is not None and rejected > best_score[0]:
            continue
        total = 0.0
        ok = True
        for r in robots:
            blocks = [
                list(request_stops(req, world, matrix))
                for req, tgt in zip(requests, combo)
                if tgt == r.rid
            ]
            if not blocks:
                continue
            res = best_ordering(blocks, start_of[r.rid], ctx_of[r.rid])
            if not res.feasible:
                ok = False
                break
            total += res.penalty
        if not ok:
            continue
        score = (rejected, total)
        if best_score is None or score < best_score:
            best_score = score
            best_assign = {req.id: tgt for req, tgt in zip(requests, combo)}
    assert best_score is not None  # the all-rejected combo always walks
    return OracleResult(penalty_s=best_score[1], rejected=best_score[0], assignment=best_assign)
