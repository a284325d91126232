"""Travel-time, energy, minimum-return-energy, and efficiency formulas.

The motion model is steady travel at the class velocity over precomputed
geodesic distances. Per-leg energy is one kinetic launch plus rolling
friction at the robot's total mass:

    E_leg = 1/2 * mass * v^2 + mu * g * mass * v * t

Power while moving (unloaded) is the friction term's rate, mu * g * v * W.
These exact expressions are the costing contract shared by the bid
evaluator and the simulation engine; oracles price legs through them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import RequestTypeCatalog, RobotClassSpec, RobotState
from .world import DistanceMatrix, GridWorld, nearest_depot, resolve_point


@dataclass(frozen=True)
class EnergyParams:
    mu: float = 0.02
    g: float = 9.81
    charge_duration_s: float = 300.0

    def __post_init__(self) -> None:
        if self.mu <= 0 or self.g <= 0 or self.charge_duration_s <= 0:
            raise ValueError("energy parameters must be positive")


def power_at_velocity(
    spec: RobotClassSpec, params: EnergyParams, v: float | None = None
) -> float:
    """Steady friction power in watts at velocity v (class velocity by
    default), carrying no payload."""
    v = spec.speed_mps if v is None else v
    return params.mu * params.g * v * spec.weight_kg


def estimated_travel_time(spec: RobotClassSpec, params: EnergyParams) -> float:
    """Seconds of travel a full battery supports at the class velocity."""
    p = power_at_velocity(spec, params)
    if p <= 0:
        raise ValueError("class %d has zero travel power" % spec.class_id)
    return spec.battery_j / p


def leg_energy(mass_total: float, v: float, t: float, params: EnergyParams) -> float:
    """Joules consumed moving mass_total at v for t seconds; idle costs 0."""
    if mass_total <= 0:
        raise ValueError("mass must be positive")
    if t < 0:
        raise ValueError("duration must be nonnegative")
    if v == 0:
        return 0.0
    return 0.5 * mass_total * v * v + params.mu * params.g * mass_total * v * t


def min_return_energy(
    robot: RobotState,
    spec: RobotClassSpec,
    world: GridWorld,
    matrix: DistanceMatrix,
    params: EnergyParams,
) -> float:
    """Joules to reach the nearest depot from the robot's position, priced
    at unloaded friction power."""
    pos = resolve_point(world, robot.position)
    _, d = nearest_depot(world, pos, matrix)
    return power_at_velocity(spec, params) * d / spec.speed_mps


def robot_efficiency(
    spec: RobotClassSpec | frozenset[str], catalog: RequestTypeCatalog
) -> float:
    """Share of the catalog's request types this class can serve."""
    abilities = getattr(spec, "abilities", spec)
    if not catalog.types:
        raise ValueError("catalog has no request types")
    return len(abilities) / len(catalog.types)
