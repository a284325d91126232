"""Schedule temporal reasoning: route evaluation, insertion search, STNs.

A robot's schedule is a sequence of pickup/dropoff stops over named map
points. Evaluating a schedule means walking it kinematically: legs take
``distance / speed`` seconds and cost energy per the leg formula in
:mod:`odta.energy`; pickups wait for their release time; a depot detour is
inserted before any leg that would leave the robot unable to reach its
nearest depot afterward. Soft dropoffs completed after their deadline add
``completion - deadline`` seconds of penalty; a late hard dropoff makes the
whole ordering infeasible.

Candidate insertion scans every placement of the new pickup/dropoff pair
that keeps already-accepted stops in their current relative order, and
returns the minimum-penalty placement (earliest placement on ties).

A solved simple temporal network cross-checks realized schedules: nodes are
"now" plus each stop's service-completion time, edges are travel/charge
lower bounds, release times, and hard deadlines; Floyd-Warshall closes the
constraint graph, and a negative diagonal marks inconsistency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .energy import EnergyParams, leg_energy
from .model import RobotClassSpec, RobotState, ServiceRequest
from .world import DistanceMatrix, GridWorld, resolve_point

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


PICKUP, DROPOFF, DEPOT = 0, 1, 2

_KIND_NAMES = {PICKUP: "Pickup", DROPOFF: "Dropoff", DEPOT: "Depot"}


@dataclass(frozen=True)
class RouteStop:
    """One pickup or dropoff in a committed stop order."""

    kind: int
    request_id: int
    point: int  # distance-matrix point index
    demand: float  # signed: positive on pickup, negative on dropoff
    release: float  # earliest service time (pickups)
    deadline: float  # completion deadline (dropoffs; inf when absent)
    hard: bool


@dataclass(frozen=True)
class ScheduleEntry:
    """A realized stop: arrival and service-completion times in seconds."""

    kind: int
    request_id: int  # matrix point index for DEPOT entries
    point: int
    planned_start: float
    planned_end: float
    release: float = 0.0
    deadline: float = math.inf
    hard: bool = False

    @property
    def label(self) -> str:
        return "%s(%d)" % (_KIND_NAMES[self.kind], self.request_id)


@dataclass(frozen=True)
class BidComponents:
    penalty_s: float
    completion_s: float
    eta: float
    used_energy_j: float
    energy_rem_j: float
    feasible: bool


INFEASIBLE_BID = BidComponents(
    penalty_s=math.inf,
    completion_s=math.inf,
    eta=math.inf,
    used_energy_j=math.inf,
    energy_rem_j=-math.inf,
    feasible=False,
)


@dataclass(frozen=True)
class EvalContext:
    """Map tables plus one robot class's scalars, ready for route walks."""

    dist: np.ndarray  # point-to-point meters, float64
    depot_dist: np.ndarray  # meters to nearest depot per point
    depot_point: np.ndarray  # matrix index of that depot per point
    speed: float
    weight: float
    capacity: float
    battery: float
    charge_s: float
    params: EnergyParams


def map_tables(world: GridWorld, matrix: DistanceMatrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distance array plus per-point nearest-depot tables. Depots must be
    matrix points. Cached on the matrix object."""
    cached = getattr(matrix, "_odta_tables", None)
    if cached is not None:
        return cached
    dist = np.asarray(matrix.dist, dtype=np.float64)
    n = len(matrix.points)
    depot_dist = np.full(n, np.inf)
    depot_point = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        for depot in world.depots:
            j = matrix.index.get(depot)
            if j is None:
                raise ValueError("depot %r missing from distance matrix" % (depot,))
            d = dist[i, j]
            if d < depot_dist[i]:
                depot_dist[i] = d
                depot_point[i] = j
    tables = (dist, depot_dist, depot_point)
    matrix._odta_tables = tables
    return tables


def eval_context(
    world: GridWorld,
    matrix: DistanceMatrix,
    params: EnergyParams,
    spec: RobotClassSpec,
) -> EvalContext:
    cache = getattr(matrix, "_odta_ctx", None)
    if cache is None:
        cache = {}
        matrix._odta_ctx = cache
    key = (spec, id(world), id(params))
    hit = cache.get(key)
    if hit is not None:
        return hit
    ctx = _eval_context_uncached(world, matrix, params, spec)
    cache[key] = ctx
    return ctx


def _eval_context_uncached(
    world: GridWorld,
    matrix: DistanceMatrix,
    params: EnergyParams,
    spec: RobotClassSpec,
) -> EvalContext:
    dist, depot_dist, depot_point = map_tables(world, matrix)
    return EvalContext(
        dist=dist,
        depot_dist=depot_dist,
        depot_point=depot_point,
        speed=spec.speed_mps,
        weight=spec.weight_kg,
        capacity=spec.capacity_kg,
        battery=spec.battery_j,
        charge_s=params.charge_duration_s,
        params=params,
    )


def request_points(req: ServiceRequest, world: GridWorld, matrix: DistanceMatrix) -> tuple[int, int]:
    try:
        pu = matrix.index[world.locations[req.pickup]]
        do = matrix.index[world.locations[req.dropoff]]
    except KeyError as exc:
        raise ValueError("request %d references unknown point %s" % (req.id, exc)) from None
    return pu, do


def request_stops(req: ServiceRequest, world: GridWorld, matrix: DistanceMatrix) -> tuple[RouteStop, RouteStop]:
    pu, do = request_points(req, world, matrix)
    pick = RouteStop(PICKUP, req.id, pu, req.demand_kg, req.earliest_s, math.inf, False)
    drop = RouteStop(DROPOFF, req.id, do, -req.demand_kg, 0.0, req.deadline_s, req.hard)
    return pick, drop


def dropoff_stop(req: ServiceRequest, world: GridWorld, matrix: DistanceMatrix) -> RouteStop:
    _, drop = request_stops(req, world, matrix)
    return drop


# ---------------------------------------------------------------------------
# Route walking. Every search mode (candidate pair placement, single-stop
# placement, full small-instance ordering search) walks rows of a
# precomputed ordering table through one kernel, compiled with numba when
# available; the same source runs uncompiled otherwise. Leg costs mirror
# energy.leg_energy term for term so walks and bids price travel identically.
# ---------------------------------------------------------------------------


def _best_order_impl(
    pts, kinds, dems, rels, dds, hards,
    orders, ct_idx,
    start_pt, t0, en0, load0,
    D, dmin, ddep,
    v, W, B, E_full, mu, g, charge_s,
):
    n_rows, n_stops = orders.shape
    best_found = 0
    best_row = -1
    best_pen = math.inf
    best_ct = math.inf
    best_used = math.inf
    best_erem = -math.inf
    for r in range(n_rows):
        t = t0
        en = en0
        load = load0
        pos = start_pt
        pen = 0.0
        used = 0.0
        ct = math.inf
        ok = True
        for c in range(n_stops):
            i = orders[r, c]
            s_pt = pts[i]
            d = D[pos, s_pt]
            if not d < math.inf:
                ok = False
                break
            mass = W + load
            mass_after = W + load + dems[i]
            rd = dmin[s_pt]
            if not rd < math.inf:
                ok = False
                break
            ret_after = 0.0 if rd == 0.0 else 0.5 * mass_after * v * v + mu * g * mass_after * v * (rd / v)
            e_leg = 0.0 if d == 0.0 else 0.5 * mass * v * v + mu * g * mass * v * (d / v)
            if en - e_leg < ret_after:
                ddp = dmin[pos]
                if not ddp < math.inf:
                    ok = False
                    break
                e_dp = 0.0 if ddp == 0.0 else 0.5 * mass * v * v + mu * g * mass * v * (ddp / v)
                if e_dp > en:
                    ok = False
                    break
                used += e_dp
                t += ddp / v + charge_s
                en = E_full
                pos = ddep[pos]
                d = D[pos, s_pt]
                if not d < math.inf:
                    ok = False
                    break
                e_leg = 0.0 if d == 0.0 else 0.5 * mass * v * v + mu * g * mass * v * (d / v)
                if en - e_leg < ret_after:
                    ok = False
                    break
            en -= e_leg
            used += e_leg
            t += d / v
            pos = s_pt
            if kinds[i] == 0:
                if t < rels[i]:
                    t = rels[i]
                load += dems[i]
                if load > B:
                    ok = False
                    break
            else:
                load += dems[i]
                if t > dds[i]:
                    if hards[i] != 0:
                        ok = False
                        break
                    pen += t - dds[i]
                if i == ct_idx:
                    ct = t
        if ok and pen < best_pen:
            best_found = 1
            best_row = r
            best_pen = pen
            best_ct = ct
            best_used = used
            best_erem = en
    return best_found, best_row, best_pen, best_ct, best_used, best_erem


_best_order_py = _best_order_impl
_best_order = njit(cache=True, nogil=True)(_best_order_impl) if HAVE_NUMBA else _best_order_impl


_ORDER_TABLES: dict[tuple[int, ...], np.ndarray] = {}


def order_table(lens: tuple[int, ...]) -> np.ndarray:
    """All interleavings of index blocks [0..lens[0]), [lens[0]..), ...
    preserving each block's internal order. Rows enumerate later blocks as
    early as possible first, so ties resolve to the earliest placement of
    the most recently added block."""
    cached = _ORDER_TABLES.get(lens)
    if cached is not None:
        return cached
    offsets = []
    total = 0
    for n in lens:
        offsets.append(total)
        total += n
    rows: list[list[int]] = []
    counts = [0] * len(lens)
    seq: list[int] = []

    def rec() -> None:
        if len(seq) == total:
            rows.append(list(seq))
            return
        for b in range(len(lens) - 1, -1, -1):
            if counts[b] < lens[b]:
                seq.append(offsets[b] + counts[b])
                counts[b] += 1
                rec()
                counts[b] -= 1
                seq.pop()

    rec()
    table = np.array(rows, dtype=np.int64) if rows else np.zeros((1, 0), dtype=np.int64)
    _ORDER_TABLES[lens] = table
    return table


_EMPTY_ARRAYS = None


def stops_to_arrays(stops: list[RouteStop]):
    global _EMPTY_ARRAYS
    if not stops:
        if _EMPTY_ARRAYS is None:
            _EMPTY_ARRAYS = (
                np.empty(0, dtype=np.int64),
                np.empty(0, dtype=np.int64),
                np.empty(0, dtype=np.float64),
                np.empty(0, dtype=np.float64),
                np.empty(0, dtype=np.float64),
                np.empty(0, dtype=np.uint8),
            )
        return _EMPTY_ARRAYS
    n = len(stops)
    pts = np.empty(n, dtype=np.int64)
    kinds = np.empty(n, dtype=np.int64)
    dems = np.empty(n, dtype=np.float64)
    rels = np.empty(n, dtype=np.float64)
    dds = np.empty(n, dtype=np.float64)
    hards = np.empty(n, dtype=np.uint8)
    for i, s in enumerate(stops):
        pts[i] = s.point
        kinds[i] = s.kind
        dems[i] = s.demand
        rels[i] = s.release
        dds[i] = s.deadline
        hards[i] = 1 if s.hard else 0
    return pts, kinds, dems, rels, dds, hards


@dataclass(frozen=True)
class StartState:
    point: int
    time: float
    energy: float
    load: float


@dataclass(frozen=True)
class ScanResult:
    feasible: bool
    order: tuple[RouteStop, ...]  # best full stop order (empty if infeasible)
    pickup_pos: int
    dropoff_pos: int  # combined-sequence index of the dropoff
    penalty: float
    completion: float
    used_energy: float
    energy_rem: float


_NO_SCAN = ScanResult(False, (), -1, -1, math.inf, math.inf, math.inf, -math.inf)


def best_ordering(
    blocks: list[list[RouteStop]],
    start: StartState,
    ctx: EvalContext,
    ct_stop: RouteStop | None = None,
) -> ScanResult:
    """Minimum-penalty interleaving of the stop blocks; each block's
    internal order is preserved. ct_stop selects whose service completion
    is reported (defaults to the last block's final stop)."""
    stops = [s for block in blocks for s in block]
    if not stops:
        return _NO_SCAN
    orders = order_table(tuple(len(b) for b in blocks))
    if ct_stop is None:
        ct_stop = blocks[-1][-1]
    ct_idx = stops.index(ct_stop)
    found, row, pen, ct, used, erem = _best_order(
        *stops_to_arrays(stops),
        orders, ct_idx,
        start.point, start.time, start.energy, start.load,
        ctx.dist, ctx.depot_dist, ctx.depot_point,
        ctx.speed, ctx.weight, ctx.capacity, ctx.battery,
        ctx.params.mu, ctx.params.g, ctx.charge_s,
    )
    if not found:
        return _NO_SCAN
    chosen = orders[row]
    cand_base = len(stops) - len(blocks[-1])
    positions = [int(np.where(chosen == cand_base + k)[0][0]) for k in range(len(blocks[-1]))]
    return ScanResult(
        feasible=True,
        order=tuple(stops[i] for i in chosen),
        pickup_pos=positions[0],
        dropoff_pos=positions[-1],
        penalty=pen,
        completion=ct,
        used_energy=used,
        energy_rem=erem,
    )


def scan_pair(base: list[RouteStop], pick: RouteStop, drop: RouteStop, start: StartState, ctx: EvalContext) -> ScanResult:
    """Best placement of a pickup/dropoff pair with the base order kept."""
    return best_ordering([list(base), [pick, drop]], start, ctx, ct_stop=drop)


def scan_single(base: list[RouteStop], stop: RouteStop, start: StartState, ctx: EvalContext) -> ScanResult:
    """Best placement of one stop with the base order kept."""
    return best_ordering([list(base), [stop]], start, ctx, ct_stop=stop)


def insert_pair(stops: list[RouteStop], pick: RouteStop, drop: RouteStop, p: int, dq: int) -> list[RouteStop]:
    """Materialize the combined order for pair positions (p, dq)."""
    out = list(stops)
    out.insert(p, pick)
    out.insert(dq, drop)
    return out


@dataclass
class WalkStats:
    feasible: bool
    penalty: float
    used_energy: float
    energy_rem: float
    end_time: float
    end_point: int
    completions: dict[int, float]


def walk_route(
    stops: list[RouteStop],
    start: StartState,
    ctx: EvalContext,
    entries: list[ScheduleEntry] | None = None,
    states: list[tuple[float, float]] | None = None,
) -> WalkStats:
    """Simulate a stop order from a start state; optionally record realized
    schedule entries, including emitted depot recharge visits, and the
    (energy, load) state left after each one."""
    pos, t, en, load = start.point, start.time, start.energy, start.load
    params = ctx.params
    v = ctx.speed
    pen = 0.0
    used = 0.0
    completions: dict[int, float] = {}
    for s in stops:
        d = float(ctx.dist[pos, s.point])
        if not d < math.inf:
            return WalkStats(False, pen, used, en, t, pos, completions)
        mass = ctx.weight + load
        mass_after = mass + s.demand
        rd = float(ctx.depot_dist[s.point])
        if not rd < math.inf:
            return WalkStats(False, pen, used, en, t, pos, completions)
        ret_after = 0.0 if rd == 0.0 else leg_energy(mass_after, v, rd / v, params)
        e_leg = 0.0 if d == 0.0 else leg_energy(mass, v, d / v, params)
        if en - e_leg < ret_after:
            ddp = float(ctx.depot_dist[pos])
            if not ddp < math.inf:
                return WalkStats(False, pen, used, en, t, pos, completions)
            e_dp = 0.0 if ddp == 0.0 else leg_energy(mass, v, ddp / v, params)
            if e_dp > en:
                return WalkStats(False, pen, used, en, t, pos, completions)
            en -= e_dp
            used += e_dp
            arrive = t + ddp / v
            t = arrive + ctx.charge_s
            en = ctx.battery
            pos = int(ctx.depot_point[pos])
            if entries is not None:
                entries.append(ScheduleEntry(DEPOT, pos, pos, arrive, t))
            if states is not None:
                states.append((en, load))
            d = float(ctx.dist[pos, s.point])
            if not d < math.inf:
                return WalkStats(False, pen, used, en, t, pos, completions)
            e_leg = 0.0 if d == 0.0 else leg_energy(mass, v, d / v, params)
            if en - e_leg < ret_after:
                return WalkStats(False, pen, used, en, t, pos, completions)
        en -= e_leg
        used += e_leg
        t += d / v
        pos = s.point
        if s.kind == PICKUP:
            arrive = t
            if t < s.release:
                t = s.release
            load += s.demand
            if load > ctx.capacity:
                return WalkStats(False, pen, used, en, t, pos, completions)
            if entries is not None:
                entries.append(
                    ScheduleEntry(PICKUP, s.request_id, pos, arrive, t, release=s.release)
                )
            if states is not None:
                states.append((en, load))
        else:
            load += s.demand
            if t > s.deadline:
                if s.hard:
                    return WalkStats(False, pen, used, en, t, pos, completions)
                pen += t - s.deadline
            completions[s.request_id] = t
            if entries is not None:
                entries.append(
                    ScheduleEntry(
                        DROPOFF, s.request_id, pos, t, t, deadline=s.deadline, hard=s.hard
                    )
                )
            if states is not None:
                states.append((en, load))
    return WalkStats(True, pen, used, en, t, pos, completions)


# ---------------------------------------------------------------------------
# Public evaluation surface.
# ---------------------------------------------------------------------------


def start_state(
    robot: RobotState, world: GridWorld, matrix: DistanceMatrix, now: float
) -> StartState:
    point = matrix.index[resolve_point(world, robot.position)]
    return StartState(point=point, time=now, energy=robot.energy_j, load=robot.carried_kg)


# At or below this many requests, ordering search is exhaustive over all
# interleavings; above it, new requests are placed by cheapest insertion
# with the established order kept.
EXHAUSTIVE_LIMIT = 3


def _request_block(
    req: ServiceRequest, loaded: set[int], world: GridWorld, matrix: DistanceMatrix
) -> list[RouteStop]:
    if req.id in loaded:
        return [dropoff_stop(req, world, matrix)]
    return list(request_stops(req, world, matrix))


def build_base_route(
    requests: list[ServiceRequest],
    loaded: set[int],
    start: StartState,
    ctx: EvalContext,
    world: GridWorld,
    matrix: DistanceMatrix,
) -> list[RouteStop] | None:
    """Stop order for already-accepted requests: globally best ordering for
    small sets, then each further request at its own best position in
    acceptance order. Requests whose id is in ``loaded`` are already on
    board and contribute only a dropoff. Returns None when no feasible
    order exists."""
    if not requests:
        return []
    blocks = [_request_block(r, loaded, world, matrix) for r in requests]
    head = min(len(blocks), EXHAUSTIVE_LIMIT)
    res = best_ordering(blocks[:head], start, ctx)
    if not res.feasible:
        return None
    stops = list(res.order)
    for block in blocks[head:]:
        if len(block) == 1:
            res = scan_single(stops, block[0], start, ctx)
        else:
            res = scan_pair(stops, block[0], block[1], start, ctx)
        if not res.feasible:
            return None
        stops = list(res.order)
    return stops


def start_window(
    req: ServiceRequest,
    robot: RobotState,
    spec: RobotClassSpec,
    world: GridWorld,
    matrix: DistanceMatrix,
    params: EnergyParams,
) -> tuple[float, float]:
    """Admissible pickup start interval [lo, hi] for serving the request
    directly from the robot's current position. hi subtracts approach and
    delivery travel from the deadline, widening the delivery leg into a
    depot detour when remaining energy would not cover the direct trip.
    hi < lo means the request cannot start in time."""
    ctx = eval_context(world, matrix, params, spec)
    pos = matrix.index[resolve_point(world, robot.position)]
    pu, do = request_points(req, world, matrix)
    d0 = float(ctx.dist[pos, pu])
    d1 = float(ctx.dist[pu, do])
    if not (d0 < math.inf and d1 < math.inf):
        raise ValueError("request %d endpoints unreachable from %s" % (req.id, robot.position))
    v = spec.speed_mps
    power = params.mu * params.g * v * spec.weight_kg
    projected = leg_energy(spec.weight_kg, v, d0 / v, params) + leg_energy(
        spec.weight_kg + req.demand_kg, v, d1 / v, params
    )
    min_reserve = power * float(ctx.depot_dist[do]) / v
    remaining_tt = robot.energy_j / power
    if robot.energy_j - projected < min_reserve or d1 / v > remaining_tt:
        dd = float(ctx.depot_dist[pu])
        dx = int(ctx.depot_point[pu])
        d_back = float(ctx.dist[dx, do])
        if not (dd < math.inf and d_back < math.inf):
            raise ValueError("no reachable depot for recharge detour on request %d" % req.id)
        detour = dd / v + params.charge_duration_s + d_back / v
    else:
        detour = d1 / v
    return req.earliest_s, req.deadline_s - d0 / v - detour


def evaluate_insertion(
    robot: RobotState,
    spec: RobotClassSpec,
    srl_with_candidate: list[ServiceRequest],
    world: GridWorld,
    matrix: DistanceMatrix,
    params: EnergyParams,
    now: float,
    loaded: set[int] | None = None,
) -> BidComponents:
    """Best bid components for the last request in the list given the
    preceding accepted requests. Small request sets are ordered globally;
    larger ones keep the accepted order and place the candidate at its
    cheapest position."""
    if not srl_with_candidate:
        raise ValueError("need at least the candidate request")
    *base_reqs, cand = srl_with_candidate
    loaded = loaded or set()
    ctx = eval_context(world, matrix, params, spec)
    start = start_state(robot, world, matrix, now)
    pick, drop = request_stops(cand, world, matrix)
    if len(srl_with_candidate) <= EXHAUSTIVE_LIMIT:
        blocks = [_request_block(r, loaded, world, matrix) for r in base_reqs]
        blocks.append([pick, drop])
        res = best_ordering(blocks, start, ctx, ct_stop=drop)
    else:
        base = build_base_route(base_reqs, loaded, start, ctx, world, matrix)
        if base is None:
            return INFEASIBLE_BID
        res = scan_pair(base, pick, drop, start, ctx)
    if not res.feasible:
        return INFEASIBLE_BID
    return BidComponents(
        penalty_s=res.penalty,
        completion_s=res.completion,
        eta=0.0,
        used_energy_j=res.used_energy,
        energy_rem_j=start.energy - res.used_energy,
        feasible=True,
    )


class ScheduleError(RuntimeError):
    """An accepted request set stopped being schedulable."""


def make_schedule(
    robot: RobotState,
    spec: RobotClassSpec,
    srl: list[ServiceRequest],
    world: GridWorld,
    matrix: DistanceMatrix,
    params: EnergyParams,
    now: float,
    loaded: set[int] | None = None,
) -> list[ScheduleEntry]:
    """Realize the earliest-start schedule for the robot's accepted
    requests; every event lands at its earliest consistent time."""
    if not srl:
        return []
    ctx = eval_context(world, matrix, params, spec)
    start = start_state(robot, world, matrix, now)
    stops = build_base_route(srl, loaded or set(), start, ctx, world, matrix)
    if stops is None:
        raise ScheduleError("accepted requests are no longer schedulable")
    entries: list[ScheduleEntry] = []
    stats = walk_route(stops, start, ctx, entries)
    if not stats.feasible:
        raise ScheduleError("accepted requests are no longer schedulable")
    net = build_and_solve(start.point, entries, matrix, spec.speed_mps, params, now)
    if not net.consistent:
        raise ScheduleError("schedule temporal network is inconsistent")
    for i, entry in enumerate(entries):
        if abs(net.earliest(i + 1) - entry.planned_end) > 1e-6:
            raise ScheduleError("realized times diverge from network earliest times")
    return entries


# ---------------------------------------------------------------------------
# Simple temporal network.
# ---------------------------------------------------------------------------


def _fw_py(d: np.ndarray) -> None:
    n = d.shape[0]
    for k in range(n):
        np.minimum(d, d[:, k, None] + d[None, k, :], out=d)


def _fw_impl(d):
    n = d.shape[0]
    for k in range(n):
        for i in range(n):
            dik = d[i, k]
            for j in range(n):
                v = dik + d[k, j]
                if v < d[i, j]:
                    d[i, j] = v


floyd_warshall = njit(cache=True, nogil=True)(_fw_impl) if HAVE_NUMBA else _fw_py


@dataclass
class TemporalNetwork:
    labels: list[str]
    dist: np.ndarray
    consistent: bool
    now: float

    def earliest(self, i: int) -> float:
        return self.now - self.dist[i, 0]

    def latest(self, i: int) -> float:
        return self.now + self.dist[0, i]


def solve_stn(labels: list[str], edges: list[tuple[int, int, float]], now: float = 0.0) -> TemporalNetwork:
    """Close a difference-constraint graph. Edge (x, y, w) encodes
    t_y - t_x <= w. Index 0 is the reference point "now"."""
    n = len(labels)
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for x, y, w in edges:
        if w < d[x, y]:
            d[x, y] = w
    floyd_warshall(d)
    # small negative slack tolerates float summation-order noise
    consistent = bool(np.all(np.diag(d) >= -1e-6))
    return TemporalNetwork(labels=labels, dist=d, consistent=consistent, now=now)


def build_and_solve(
    origin: int,
    entries: list[ScheduleEntry],
    matrix: DistanceMatrix,
    speed: float,
    params: EnergyParams,
    now: float,
    extra_edges: tuple[tuple[int, int, float], ...] = (),
) -> TemporalNetwork:
    """Temporal network over a realized entry sequence. Node i > 0 is entry
    i-1's service-completion time; node 0 is "now"."""
    cached = getattr(matrix, "_odta_tables", None)
    dist = cached[0] if cached is not None else np.asarray(matrix.dist, dtype=np.float64)
    labels = ["z"] + [e.label for e in entries]
    edges: list[tuple[int, int, float]] = []
    prev_point = origin
    for i, e in enumerate(entries, start=1):
        tau = float(dist[prev_point, e.point]) / speed
        dur = params.charge_duration_s if e.kind == DEPOT else 0.0
        # completion can't precede the previous completion plus travel/charge
        edges.append((i, i - 1, -(tau + dur)))
        if e.kind == PICKUP and e.release > now:
            edges.append((i, 0, -(e.release - now)))
        if e.kind == DROPOFF and e.hard and e.deadline < math.inf:
            edges.append((0, i, e.deadline - now))
        prev_point = e.point
    edges.extend(extra_edges)
    return solve_stn(labels, edges, now)
