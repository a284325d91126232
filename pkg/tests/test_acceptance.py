"""Acceptance suite: the shipped guarantees, one test per criterion.

Each test checks a stated property at its stated tolerance and prints one
PASS line (visible with -s) carrying the measured margin; checks with a
runtime budget assert their wall time as well. The scenario grid in
`full_grid` (7 request counts x 4 deadline modes x 2 fleet layouts x 10
seeds, auction policy) runs once and backs the soundness, trend, and
invariant criteria.
"""

import itertools
import math
import random
import statistics
import time

import pytest

from test_world import dijkstra_octile, random_world

from odta.auction import AuctionContext, determine_auctioneer, run_auction
from odta.cli import main
from odta.energy import EnergyParams
from odta.model import (
    Constraint,
    DEFAULT_TYPES,
    FleetLayout,
    RobotClassSpec,
    RobotState,
    ServiceRequest,
    default_catalog,
    default_classes,
    default_fleet,
)
from odta.sim import (
    DeadlineMode,
    Policy,
    ScenarioConfig,
    _scene,
    generate_requests,
    run_trial,
)
from odta.stn import evaluate_insertion
from odta.world import geodesic_distance, load_map

GRID_COUNTS = (40, 80, 120, 160, 200, 240, 280)
GRID_SEEDS = tuple(range(10))
PARAMS = EnergyParams()


def _pass(line: str) -> None:
    print("PASS %s" % line)


def _ranks(values):
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        shared = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = shared
        i = j + 1
    return ranks


def spearman(xs, ys):
    return statistics.correlation(_ranks(xs), _ranks(ys))


# ---------------------------------------------------------------------------
# Criterion 1: auctioneer selection formula.
# ---------------------------------------------------------------------------


def test_c01_auctioneer_selection_formula():
    t0 = time.perf_counter()
    assert determine_auctioneer(1, 4, [20, 20, 20, 20]) == (1, 0)
    assert determine_auctioneer(0, 4, [20, 20, 20, 20]) == (0, 0)
    assert determine_auctioneer(9, 4, [20, 20, 20, 20]) == (1, 2)
    rng = random.Random(101)
    for _ in range(1000):
        m = rng.randint(1, 8)
        sizes = [rng.randint(1, 30) for _ in range(m)]
        j = rng.randint(0, 10_000)
        assert determine_auctioneer(j, m, sizes) == (j % m, (j // m) % sizes[j % m])
    dt = time.perf_counter() - t0
    assert dt < 1.0
    _pass("c01 auctioneer formula: worked examples + 1000 randomized cases (%.3fs < 1s)" % dt)


# ---------------------------------------------------------------------------
# Criterion 2: grid pathfinding equals per-cell Dijkstra.
# ---------------------------------------------------------------------------


def test_c02_pathfinding_matches_dijkstra_exactly():
    rng = random.Random(202)
    t0 = time.perf_counter()
    pairs = solvable = 0
    for _ in range(100):
        world, free = random_world(rng, 30, 30, 0.30)
        for _ in range(50):
            a, b = rng.choice(free), rng.choice(free)
            expect = dijkstra_octile(world, a, b)
            got = geodesic_distance(world, a, b)
            if math.isinf(expect):
                assert math.isinf(got), (a, b)
            else:
                solvable += 1
                assert got == expect, (a, b, got, expect)
            pairs += 1
    dt = time.perf_counter() - t0
    assert pairs == 5000
    assert dt < 30.0
    _pass("c02 pathfinding: %d/%d sampled pairs solvable, all float-exact (%.1fs < 30s)" % (solvable, pairs, dt))


# ---------------------------------------------------------------------------
# Criterion 3: insertion evaluation equals permutation brute force.
# ---------------------------------------------------------------------------

_C3_MAP = (
    "12 7 1\n" + "\n".join(["." * 12] * 7) + "\n"
    "loc L0 1 1\nloc L1 10 1\nloc L2 4 2\nloc L3 8 3\n"
    "loc L4 2 5\nloc L5 6 5\nloc L6 11 6\nloc L7 5 0\n"
    "depot 0 0\n"
)

# Oversized battery keeps recharge detours out of these instances, so the
# reference walk below only needs time, load, and deadline bookkeeping.
_C3_SPEC = RobotClassSpec(0, frozenset(DEFAULT_TYPES), 1.2, 70.0, 1e7, 80.0, "L0")


def _c3_best_penalty(reqs, start_name, world, matrix):
    """Reference: enumerate every stop permutation that keeps each pickup
    before its dropoff, walk it, and keep the best feasible penalty."""
    v = _C3_SPEC.speed_mps
    cap = _C3_SPEC.capacity_kg
    coords = []
    for r in reqs:
        coords.append((world.locations[r.pickup], 0, r.demand_kg, r.earliest_s, math.inf, False))
        coords.append((world.locations[r.dropoff], 1, -r.demand_kg, 0.0, r.deadline_s, r.hard))
    n = len(coords)
    best = math.inf
    found = False
    for perm in itertools.permutations(range(n)):
        if any(perm.index(2 * k) > perm.index(2 * k + 1) for k in range(len(reqs))):
            continue
        t, load, pen = 0.0, 0.0, 0.0
        pos = world.locations[start_name]
        ok = True
        for i in perm:
            pt, kind, dem, rel, dd, hard = coords[i]
            t += matrix.distance(pos, pt) / v
            pos = pt
            if kind == 0:
                if t < rel:
                    t = rel
                load += dem
                if load > cap:
                    ok = False
                    break
            else:
                load += dem
                if t > dd:
                    if hard:
                        ok = False
                        break
                    pen += t - dd
        if ok:
            found = True
            if pen < best:
                best = pen
    return found, best


def test_c03_insertion_search_matches_permutation_brute_force():
    from odta.world import precompute_distances

    world = load_map(_C3_MAP)
    pts = sorted(set(world.locations.values()) | set(world.depots))
    matrix = precompute_distances(world, pts)
    names = sorted(world.locations)
    rng = random.Random(303)
    t0 = time.perf_counter()
    feasible = infeasible = 0
    for case in range(500):
        k = rng.randint(1, 3)
        reqs = []
        for q in range(k):
            pu, do = rng.sample(names, 2)
            earliest = rng.uniform(0.0, 40.0)
            reqs.append(
                ServiceRequest(
                    id=q, pickup=pu, dropoff=do, rtype="T1",
                    demand_kg=rng.uniform(5.0, 50.0), arrival_s=0.0,
                    earliest_s=earliest,
                    deadline_s=earliest + rng.uniform(2.0, 120.0),
                    constraint=Constraint.HARD if rng.random() < 0.5 else Constraint.SOFT,
                )
            )
        robot = RobotState(0, 0, rng.choice(names), _C3_SPEC.battery_j)
        bid = evaluate_insertion(robot, _C3_SPEC, reqs, world, matrix, PARAMS, 0.0)
        expect_ok, expect_pen = _c3_best_penalty(reqs, robot.position, world, matrix)
        assert bid.feasible == expect_ok, case
        if expect_ok:
            feasible += 1
            assert bid.penalty_s == expect_pen, (case, bid.penalty_s, expect_pen)
        else:
            infeasible += 1
    dt = time.perf_counter() - t0
    assert dt < 60.0
    assert feasible and infeasible  # both verdicts exercised
    _pass("c03 insertion search: 500 instances exact (%d feasible, %d infeasible) (%.1fs < 60s)" % (feasible, infeasible, dt))


# ---------------------------------------------------------------------------
# The full scenario grid: shared by criteria 4, 5, and 9.
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def full_grid():
    t0 = time.perf_counter()
    results = {}
    for fleet in (FleetLayout.EQUAL, FleetLayout.UNEQUAL):
        for mode in DeadlineMode:
            for n in GRID_COUNTS:
                for seed in GRID_SEEDS:
                    cfg = ScenarioConfig(n_requests=n, deadline_mode=mode, fleet=fleet, seed=seed)
                    world, matrix, _ = _scene(cfg.resolved_map())
                    reqs = generate_requests(cfg, world, matrix)
                    m = run_trial(cfg, requests=reqs)
                    results[(fleet, mode, n, seed)] = (reqs, m)
    return {"results": results, "elapsed": time.perf_counter() - t0}


def test_c04_hard_deadlines_never_missed(full_grid):
    results, elapsed = full_grid["results"], full_grid["elapsed"]
    assert len(results) == 7 * 4 * 2 * 10
    hard_completed = late = 0
    for reqs, m in results.values():
        for r in reqs:
            rec = m.per_request[r.id]
            if r.hard and rec.outcome == "Completed":
                hard_completed += 1
                if rec.completion_s > r.deadline_s:
                    late += 1
    assert late == 0
    assert elapsed < 600.0
    _pass("c04 hard-deadline soundness: %d hard completions across 560 trials, 0 late (grid %.0fs < 600s)" % (hard_completed, elapsed))


def test_c05_rejections_rise_with_request_count(full_grid):
    results = full_grid["results"]
    means = []
    for n in GRID_COUNTS:
        rejected = [results[(FleetLayout.EQUAL, DeadlineMode.E, n, s)][1].rejected_count for s in GRID_SEEDS]
        means.append(statistics.fmean(rejected))
    rho = spearman(list(GRID_COUNTS), means)
    assert rho >= 0.95
    _pass("c05 rejection trend: mean rejections %s, Spearman rho=%.3f >= 0.95" % ([round(v, 1) for v in means], rho))


def test_c09_invariants_hold_across_grid(full_grid):
    results = full_grid["results"]
    violations = []
    for key, (reqs, m) in results.items():
        violations.extend(m.violations)
        assert m.completed_count + m.rejected_count == len(reqs), key
    assert violations == []
    _pass("c09 invariant battery: 0 violations over %d trials (capacity, exclusivity, energy, conservation)" % len(results))


# ---------------------------------------------------------------------------
# Criterion 6: auction policy dominates the greedy baseline on paired seeds.
# ---------------------------------------------------------------------------


def test_c06_auction_beats_greedy_on_paired_seeds():
    pen_wins = rej_wins = 0
    for seed in range(50):
        cfg = ScenarioConfig(n_requests=160, deadline_mode=DeadlineMode.TWO_E, fleet=FleetLayout.EQUAL, seed=seed)
        a = run_trial(cfg, policy=Policy.HMRODTA)
        g = run_trial(cfg, policy=Policy.GREEDY)
        pen_wins += a.cumulative_penalty_s <= g.cumulative_penalty_s
        rej_wins += a.rejected_count <= g.rejected_count
    assert pen_wins >= 45
    assert rej_wins >= 45
    _pass("c06 policy ordering: auction <= greedy on %d/50 seeds (penalty) and %d/50 (rejections), both >= 45" % (pen_wins, rej_wins))


# ---------------------------------------------------------------------------
# Criterion 7: tighter deadline modes reject at least as many requests.
# ---------------------------------------------------------------------------


def test_c07_tighter_deadlines_reject_more():
    modes = (DeadlineMode.E, DeadlineMode.TWO_E, DeadlineMode.U5TO10E)
    rejected = {mode: [] for mode in modes}
    for seed in range(20):
        for mode in modes:
            cfg = ScenarioConfig(n_requests=160, deadline_mode=mode, fleet=FleetLayout.EQUAL, seed=seed)
            rejected[mode].append(run_trial(cfg).rejected_count)
    e_vs_2e = sum(a >= b for a, b in zip(rejected[DeadlineMode.E], rejected[DeadlineMode.TWO_E]))
    t2e_vs_u = sum(a >= b for a, b in zip(rejected[DeadlineMode.TWO_E], rejected[DeadlineMode.U5TO10E]))
    assert e_vs_2e >= 18
    assert t2e_vs_u >= 18
    _pass("c07 deadline ordering: E>=2E on %d/20 seeds, 2E>=U[5E,10E] on %d/20, both >= 18" % (e_vs_2e, t2e_vs_u))


# ---------------------------------------------------------------------------
# Criterion 8: batch runs are byte-identical.
# ---------------------------------------------------------------------------


def test_c08_batch_runs_are_byte_identical(tmp_path):
    manifest = tmp_path / "man.txt"
    manifest.write_text("n=40\ndeadline=2E\nfleet=equal\npolicy=HMRODTA,GreedyFCFS\ntrials=2\nseed=0\n")
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(manifest), "--out", str(out_a)]) == 0
    assert main(["run", str(manifest), "--out", str(out_b)]) == 0
    assert (out_a / "metrics.csv").read_bytes() == (out_b / "metrics.csv").read_bytes()
    traces = sorted(p.name for p in (out_a / "traces").iterdir())
    assert traces == sorted(p.name for p in (out_b / "traces").iterdir())
    for name in traces:
        assert (out_a / "traces" / name).read_bytes() == (out_b / "traces" / name).read_bytes(), name
    _pass("c08 determinism: repeated batch run byte-identical (metrics + %d traces)" % len(traces))


# ---------------------------------------------------------------------------
# Criterion 10: one auction round at fleet scale inside the latency budget.
# ---------------------------------------------------------------------------


def _loaded_fleet(classes, names, seed):
    """80 free robots, each holding 5-10 accepted soft requests."""
    fleet = default_fleet(FleetLayout.EQUAL, classes)
    rng = random.Random(seed)
    next_id = 0
    for robot in fleet:
        spec = classes[robot.class_id]
        abilities = sorted(spec.abilities)
        for _ in range(rng.randint(5, 10)):
            pu, do = rng.sample(names, 2)
            robot.srl.append(
                ServiceRequest(
                    id=next_id, pickup=pu, dropoff=do, rtype=rng.choice(abilities),
                    demand_kg=rng.uniform(1.0, 20.0), arrival_s=0.0, deadline_s=1e9,
                    constraint=Constraint.SOFT,
                )
            )
            next_id += 1
    return fleet


def test_c10_auction_round_latency_at_fleet_scale():
    world, matrix, _ = _scene(str(ScenarioConfig(n_requests=1).resolved_map()))
    classes = default_classes()
    catalog = default_catalog(classes)
    names = sorted(world.locations)
    ctx = AuctionContext(world, matrix, PARAMS, catalog, {c.class_id: c for c in classes})

    def probe(rep):
        return ServiceRequest(
            id=4000 + rep, pickup=names[0], dropoff=names[1], rtype="T1",
            demand_kg=5.0, arrival_s=0.0, deadline_s=1e9, constraint=Constraint.SOFT,
        )

    run_auction(probe(99), _loaded_fleet(classes, names, 9), ctx)  # warm the kernels
    times = []
    for rep in range(3):
        fleet = _loaded_fleet(classes, names, rep)
        t0 = time.perf_counter()
        rnd = run_auction(probe(rep), fleet, ctx)
        times.append(time.perf_counter() - t0)
        assert len(rnd.bids) == 80
    assert min(times) < 0.05
    _pass("c10 auction latency: 80-robot round with SRL size <= 10 in %.1f ms (< 50 ms)" % (min(times) * 1e3))
