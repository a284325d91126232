"""Auction-based online task allocation for heterogeneous robot fleets.

The library layers bottom-up: :mod:`odta.world` (grid maps and geodesic
distances), :mod:`odta.model` (requests, robot classes, fleets),
:mod:`odta.energy` (leg costing and recharge thresholds), :mod:`odta.stn`
(route walks, insertion search, temporal-network cross-checks),
:mod:`odta.auction` (bidding and auctioneer selection), :mod:`odta.sim`
(the discrete-event trial engine and oracles), and :mod:`odta.report`
(aggregation and figures). :mod:`odta.cli` fronts it all as the ``odta``
command. The names re-exported here are the stable embedding surface.
"""

from .auction import (
    AuctionContext,
    AuctionOutcome,
    AuctionRound,
    MessageBus,
    determine_auctioneer,
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
    ServiceRequest,
    default_catalog,
    default_classes,
    default_fleet,
    read_request_log,
    write_request_log,
)
from .sim import (
    DeadlineMode,
    Metrics,
    Policy,
    ScenarioConfig,
    TrialEngine,
    brute_force_oracle,
    execution_time_E,
    generate_requests,
    run_trial,
)
from .stn import (
    BidComponents,
    ScheduleEntry,
    ScheduleError,
    evaluate_insertion,
    make_schedule,
)
from .world import (
    DistanceMatrix,
    GridWorld,
    geodesic_distance,
    load_map,
    load_map_file,
    precompute_distances,
)

__version__ = "0.1.0"

__all__ = [
    "AuctionContext",
    "AuctionOutcome",
    "AuctionRound",
    "BidComponents",
    "Constraint",
    "DeadlineMode",
    "DistanceMatrix",
    "EnergyParams",
    "FleetLayout",
    "GridWorld",
    "MessageBus",
    "Metrics",
    "Policy",
    "RequestStatus",
    "RequestTypeCatalog",
    "RobotClassSpec",
    "RobotState",
    "ScenarioConfig",
    "ScheduleEntry",
    "ScheduleError",
    "ServiceRequest",
    "TrialEngine",
    "brute_force_oracle",
    "default_catalog",
    "default_classes",
    "default_fleet",
    "determine_auctioneer",
    "evaluate_insertion",
    "execution_time_E",
    "generate_requests",
    "geodesic_distance",
    "leg_energy",
    "load_map",
    "load_map_file",
    "make_schedule",
    "min_return_energy",
    "precompute_distances",
    "read_request_log",
    "robot_efficiency",
    "run_auction",
    "run_trial",
    "write_request_log",
    "__version__",
]
