"""Decentralized request auctions.

Each arriving request is broadcast by a deterministically chosen auctioneer
robot; every live robot replies with a bid built from its own tentative
schedule, and bids fold lexicographically: lowest added penalty first, then
lowest fleet efficiency (so specialists keep generalists available), then
lowest remaining energy (spending an almost-drained battery is cheaper than
draining a full one). A request nobody can feasibly schedule is rejected.

The message bus is in-process and instantaneous; it exists as a seam so
delayed or lossy transports can be swapped in without touching protocol
logic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum

from .energy import EnergyParams, robot_efficiency
from .model import (
    RequestTypeCatalog,
    RobotClassSpec,
    RobotState,
    RobotStatus,
    ServiceRequest,
)
from .stn import INFEASIBLE_BID, BidComponents, evaluate_insertion
from .world import DistanceMatrix, GridWorld

Rid = tuple[int, int]


class AuctionOutcome(Enum):
    ASSIGNED = "Assigned"
    REJECTED = "Rejected"


@dataclass
class AuctionRound:
    request_id: int
    auctioneer: Rid
    bids: dict[Rid, BidComponents]
    winner: Rid | None
    outcome: AuctionOutcome


class GlobalQueue:
    """FIFO of request ids awaiting auction, ordered by arrival."""

    def __init__(self) -> None:
        self._ids: deque[int] = deque()

    def push(self, request_id: int) -> None:
        self._ids.append(request_id)

    def remove(self, request_id: int) -> None:
        self._ids.remove(request_id)

    def __contains__(self, request_id: int) -> bool:
        return request_id in self._ids

    def __len__(self) -> int:
        return len(self._ids)


@dataclass
class AuctionContext:
    """Shared immutable scenario state plus the auction clock."""

    world: GridWorld
    matrix: DistanceMatrix
    params: EnergyParams
    catalog: RequestTypeCatalog
    classes: dict[int, RobotClassSpec]
    now: float = 0.0


def determine_auctioneer(request_id: int, n_classes: int, class_sizes: list[int]) -> Rid:
    """Round-robin auctioneer: class = id mod class count, then robot index
    cycles through that class as ids wrap around."""
    if n_classes < 1 or len(class_sizes) != n_classes:
        raise ValueError("need one size per class")
    if any(size < 1 for size in class_sizes):
        raise ValueError("every class needs at least one robot")
    class_id = request_id % n_classes
    wraps = request_id // n_classes
    return (class_id, wraps % class_sizes[class_id])


def compute_bid(
    robot: RobotState,
    spec: RobotClassSpec,
    req: ServiceRequest,
    ctx: AuctionContext,
) -> tuple[Rid, BidComponents]:
    """The robot's bid for serving req on top of its current commitments.
    Busy robots bid from the node they are headed to, so the effective
    start time is their arrival there, never earlier than now."""
    if req.rtype not in spec.abilities or req.demand_kg > spec.capacity_kg:
        return robot.rid, INFEASIBLE_BID
    bid = evaluate_insertion(
        robot,
        spec,
        robot.srl + [req],
        ctx.world,
        ctx.matrix,
        ctx.params,
        max(ctx.now, robot.ready_s),
        loaded=robot.loaded,
    )
    if not bid.feasible:
        return robot.rid, INFEASIBLE_BID
    return robot.rid, replace(bid, eta=robot_efficiency(spec, ctx.catalog))


def best_bid(
    current: tuple[Rid, BidComponents], challenger: tuple[Rid, BidComponents]
) -> tuple[Rid, BidComponents]:
    """Lexicographic minimum of two bids; ties keep the incumbent."""
    cur, cand = current[1], challenger[1]
    if cand.penalty_s < cur.penalty_s:
        return challenger
    if cand.penalty_s == cur.penalty_s:
        if cand.eta < cur.eta:
            return challenger
        if cand.eta == cur.eta and cand.energy_rem_j < cur.energy_rem_j:
            return challenger
    return current


class MessageBus:
    """Reliable, instantaneous in-process transport. broadcast returns one
    reply per live robot, in fleet scan order."""

    def broadcast(
        self,
        req: ServiceRequest,
        fleet: list[RobotState],
        ctx: AuctionContext,
    ) -> list[tuple[Rid, BidComponents]]:
        replies = []
        for robot in fleet:
            spec = ctx.classes[robot.class_id]
            replies.append(compute_bid(robot, spec, req, ctx))
        return replies


def run_auction(
    req: ServiceRequest,
    fleet: list[RobotState],
    ctx: AuctionContext,
    queue: GlobalQueue | None = None,
    bus: MessageBus | None = None,
) -> AuctionRound:
    """One full auction round. The winner's SRL gains the request; nobody
    else's state changes beyond the auctioneer's transient queue entry."""
    scan = sorted(fleet, key=lambda r: r.rid)
    sizes: dict[int, int] = {}
    for robot in scan:
        sizes[robot.class_id] = sizes.get(robot.class_id, 0) + 1
    class_ids = sorted(sizes)
    slot, index = determine_auctioneer(
        req.id, len(class_ids), [sizes[c] for c in class_ids]
    )
    auctioneer_rid = (class_ids[slot], index)
    by_rid = {r.rid: r for r in scan}
    auctioneer = by_rid[auctioneer_rid]
    auctioneer.aucq.append(req.id)
    try:
        live = [r for r in scan if r.status is not RobotStatus.FAILED]
        replies = (bus or MessageBus()).broadcast(req, live, ctx)
        bids = dict(replies)
        best = replies[0] if replies else ((-1, -1), INFEASIBLE_BID)
        for challenger in replies[1:]:
            best = best_bid(best, challenger)
        if best[1].feasible:
            winner = by_rid[best[0]]
            winner.srl.append(req)
            outcome = AuctionOutcome.ASSIGNED
            winner_rid = winner.rid
        else:
            outcome = AuctionOutcome.REJECTED
            winner_rid = None
        if queue is not None and req.id in queue:
            queue.remove(req.id)
    finally:
        auctioneer.aucq.remove(req.id)
    return AuctionRound(
        request_id=req.id,
        auctioneer=auctioneer_rid,
        bids=bids,
        winner=winner_rid,
        outcome=outcome,
    )


AUCTION_TRACE_HEADER = ("j", "auctioneer", "winner", "outcome", "penalty", "eta", "energy_rem")


def format_rid(rid: Rid) -> str:
    return "R%d-%d" % rid


def auction_trace_rows(rounds: list[AuctionRound]) -> list[tuple[str, ...]]:
    rows = [AUCTION_TRACE_HEADER]
    for rnd in rounds:
        if rnd.winner is not None:
            win = rnd.bids[rnd.winner]
            tail = (format_rid(rnd.winner), rnd.outcome.value,
                    repr(win.penalty_s), repr(win.eta), repr(win.energy_rem_j))
        else:
            tail = ("", rnd.outcome.value, "", "", "")
        rows.append((str(rnd.request_id), format_rid(rnd.auctioneer)) + tail)
    return rows


def write_auction_trace(rounds: list[AuctionRound], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for row in auction_trace_rows(rounds):
            fh.write(",".join(row) + "\n")
