"""Occupancy-grid world: map loading, octile shortest paths, depot lookup.

The grid is 8-connected. A straight move costs ``resolution`` meters and a
diagonal move costs ``resolution * sqrt(2)``. A diagonal move is forbidden
when both of its orthogonal neighbor cells are blocked (a robot cannot
squeeze through a corner made of two walls).

Path lengths are tracked as integer step counts (straights, diagonals) and
converted to meters once at the end, so two paths of equal true length always
compare equal regardless of the order their legs were summed in.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

SQRT2 = math.sqrt(2.0)

Coord = tuple[int, int]


@dataclass
class GridWorld:
    """Static environment: cell grid plus named locations and depots."""

    width: int
    height: int
    resolution: float
    blocked: list[bytearray]  # blocked[y][x] == 1 means the cell is a wall
    locations: dict[str, Coord] = field(default_factory=dict)
    depots: list[Coord] = field(default_factory=list)

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def is_free(self, x: int, y: int) -> bool:
        return self.in_bounds(x, y) and not self.blocked[y][x]

    def serialize(self) -> str:
        rows = ["%d %d %s" % (self.width, self.height, format_float(self.resolution))]
        for y in range(self.height):
            rows.append("".join("#" if self.blocked[y][x] else "." for x in range(self.width)))
        for name, (x, y) in self.locations.items():
            rows.append("loc %s %d %d" % (name, x, y))
        for (x, y) in self.depots:
            rows.append("depot %d %d" % (x, y))
        return "\n".join(rows) + "\n"


def format_float(v: float) -> str:
    """Render 1.0 as '1' but keep fractional resolutions exact."""
    return "%d" % v if v == int(v) else repr(v)


class MapError(ValueError):
    pass


def load_map(text: str) -> GridWorld:
    """Parse a map document.

    Format: first line ``width height resolution``; then ``height`` rows of
    ``.`` (free) / ``#`` (blocked); then any number of ``loc <name> <x> <y>``
    and ``depot <x> <y>`` lines. Coordinates are zero-based column,row.
    """
    lines = text.splitlines()
    if not lines:
        raise MapError("empty map document")
    head = lines[0].split()
    if len(head) != 3:
        raise MapError("header must be 'width height resolution'")
    try:
        width, height = int(head[0]), int(head[1])
        resolution = float(head[2])
    except ValueError as exc:
        raise MapError("bad header: %s" % exc) from None
    if width < 1 or height < 1:
        raise MapError("grid must be at least 1x1")
    if resolution <= 0:
        raise MapError("resolution must be positive")
    if len(lines) < 1 + height:
        raise MapError("expected %d grid rows, found %d" % (height, len(lines) - 1))

    blocked: list[bytearray] = []
    for y in range(height):
        row = lines[1 + y]
        if len(row) != width:
            raise MapError("row %d has length %d, expected %d" % (y, len(row), width))
        cells = bytearray(width)
        for x, ch in enumerate(row):
            if ch == "#":
                cells[x] = 1
            elif ch != ".":
                raise MapError("row %d: bad cell %r" % (y, ch))
        blocked.append(cells)

    world = GridWorld(width, height, resolution, blocked)
    for line in lines[1 + height:]:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "loc":
            if len(parts) != 4:
                raise MapError("bad loc line: %r" % line)
            name, x, y = parts[1], int(parts[2]), int(parts[3])
            if name in world.locations:
                raise MapError("duplicate location %r" % name)
            if not world.is_free(x, y):
                raise MapError("location %r blocked or out of bounds" % name)
            world.locations[name] = (x, y)
        elif parts[0] == "depot":
            if len(parts) != 3:
                raise MapError("bad depot line: %r" % line)
            x, y = int(parts[1]), int(parts[2])
            if not world.is_free(x, y):
                raise MapError("depot blocked or out of bounds at (%d, %d)" % (x, y))
            world.depots.append((x, y))
        else:
            raise MapError("unknown directive %r" % parts[0])
    if not world.depots:
        raise MapError("map defines zero depots")
    return world


def load_map_file(path: str) -> GridWorld:
    with open(path, "r", encoding="utf-8") as fh:
        return load_map(fh.read())


# Eight movement directions; diagonals last so straight scans are tried first.
_DIRS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1))


def geodesic_distance(world: GridWorld, a: Coord, b: Coord) -> float:
    """Length in meters of a shortest octile path from a to b.

    Returns ``math.inf`` when b is unreachable from a. Raises ValueError for
    a blocked or out-of-bounds endpoint. Implemented as jump point search;
    results match per-step Dijkstra on the same grid exactly.
    """
    steps = _jps_steps(world, a, b)
    if steps is None:
        return math.inf
    straights, diagonals = steps
    return (straights + diagonals * SQRT2) * world.resolution


def _jps_steps(world: GridWorld, a: Coord, b: Coord) -> tuple[int, int] | None:
    for p in (a, b):
        if not world.is_free(*p):
            raise ValueError("endpoint %r blocked or out of bounds" % (p,))
    if a == b:
        return (0, 0)

    blocked = world.blocked
    width, height = world.width, world.height
    gx, gy = b

    def free(x: int, y: int) -> bool:
        return 0 <= x < width and 0 <= y < height and not blocked[y][x]

    def jump(x: int, y: int, dx: int, dy: int) -> tuple[int, int, int] | None:
        """Scan from (x, y) in (dx, dy); return (jx, jy, steps) at the first
        jump point, the goal, or None when the scan dead-ends."""
        n = 0
        if dx != 0 and dy != 0:
            while True:
                if not free(x + dx, y + dy) or (not free(x + dx, y) and not free(x, y + dy)):
                    return None
                x += dx
                y += dy
                n += 1
                if x == gx and y == gy:
                    return (x, y, n)
                # a blocked cell beside the ray forces a turn through here
                if (not free(x - dx, y) and free(x - dx, y + dy)) or (
                    not free(x, y - dy) and free(x + dx, y - dy)
                ):
                    return (x, y, n)
                if jump(x, y, dx, 0) is not None or jump(x, y, 0, dy) is not None:
                    return (x, y, n)
        elif dx != 0:
            while True:
                if not free(x + dx, y):
                    return None
                x += dx
                n += 1
                if x == gx and y == gy:
                    return (x, y, n)
                if (not free(x, y + 1) and free(x + dx, y + 1)) or (
                    not free(x, y - 1) and free(x + dx, y - 1)
                ):
                    return (x, y, n)
        else:
            while True:
                if not free(x, y + dy):
                    return None
                y += dy
                n += 1
                if x == gx and y == gy:
                    return (x, y, n)
                if (not free(x + 1, y) and free(x + 1, y + dy)) or (
                    not free(x - 1, y) and free(x - 1, y + dy)
                ):
                    return (x, y, n)

    def successor_dirs(x: int, y: int, dx: int, dy: int) -> list[tuple[int, int]]:
        if dx != 0 and dy != 0:
            dirs = [(dx, 0), (0, dy), (dx, dy)]
            if not free(x - dx, y):
                dirs.append((-dx, dy))
            if not free(x, y - dy):
                dirs.append((dx, -dy))
            return dirs
        if dx != 0:
            dirs = [(dx, 0)]
            if not free(x, y + 1):
                dirs.append((dx, 1))
            if not free(x, y - 1):
                dirs.append((dx, -1))
            return dirs
        dirs = [(0, dy)]
        if not free(x + 1, y):
            dirs.append((1, dy))
        if not free(x - 1, y):
            dirs.append((-1, dy))
        return dirs

    # Uniform-cost search over (cell, incoming direction) states. Costs are
    # integer step pairs; the float key (straights + diagonals*sqrt2) orders
    # them exactly at grid scale.
    start = (a[0], a[1])
    best: dict[tuple[int, int, int, int], float] = {}
    heap: list[tuple[float, int, int, int, int, int, int]] = []
    for dx, dy in _DIRS:
        hit = jump(start[0], start[1], dx, dy)
        if hit is None:
            continue
        jx, jy, n = hit
        sa, sb = (n, 0) if dx == 0 or dy == 0 else (0, n)
        key = sa + sb * SQRT2
        state = (jx, jy, dx, dy)
        if key < best.get(state, math.inf):
            best[state] = key
            heapq.heappush(heap, (key, sa, sb, jx, jy, dx, dy))

    settled: set[tuple[int, int, int, int]] = set()
    while heap:
        key, sa, sb, x, y, dx, dy = heapq.heappop(heap)
        if x == gx and y == gy:
            return (sa, sb)
        state = (x, y, dx, dy)
        if state in settled:
            continue
        settled.add(state)
        for ndx, ndy in successor_dirs(x, y, dx, dy):
            hit = jump(x, y, ndx, ndy)
            if hit is None:
                continue
            jx, jy, n = hit
            if ndx == 0 or ndy == 0:
                na, nb = sa + n, sb
            else:
                na, nb = sa, sb + n
            nkey = na + nb * SQRT2
            nstate = (jx, jy, ndx, ndy)
            if nkey < best.get(nstate, math.inf):
                best[nstate] = nkey
                heapq.heappush(heap, (nkey, na, nb, jx, jy, ndx, ndy))
    return None


@dataclass
class DistanceMatrix:
    """Pairwise geodesic distances over a fixed point list (meters)."""

    points: list[Coord]
    dist: list[list[float]]
    index: dict[Coord, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.index:
            self.index = {p: i for i, p in enumerate(self.points)}

    def distance(self, a: Coord, b: Coord) -> float:
        return self.dist[self.index[a]][self.index[b]]


def precompute_distances(world: GridWorld, points: list[Coord]) -> DistanceMatrix:
    for p in points:
        if not world.is_free(*p):
            raise ValueError("point %r blocked or out of bounds" % (p,))
    n = len(points)
    dist = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d = geodesic_distance(world, points[i], points[j])
            dist[i][j] = d
            dist[j][i] = d
    return DistanceMatrix(points=list(points), dist=dist)


def resolve_point(world: GridWorld, name: str) -> Coord:
    """Map a location name, or a depot name of the form 'DockN' (1-based),
    to its cell coordinate."""
    if name in world.locations:
        return world.locations[name]
    if name.startswith("Dock"):
        try:
            i = int(name[4:]) - 1
        except ValueError:
            raise KeyError(name) from None
        if 0 <= i < len(world.depots):
            return world.depots[i]
    raise KeyError(name)


def nearest_depot(world: GridWorld, origin: Coord, matrix: DistanceMatrix) -> tuple[Coord, float]:
    """Depot closest to origin by geodesic distance; ties pick the lowest
    depot index. Raises ValueError when every depot is unreachable."""
    if origin not in matrix.index:
        raise ValueError("origin %r is not a matrix point" % (origin,))
    best_depot: Coord | None = None
    best_d = math.inf
    for depot in world.depots:
        d = matrix.distance(origin, depot)
        if d < best_d:
            best_depot = depot
            best_d = d
    if best_depot is None or math.isinf(best_d):
        raise ValueError("no depot reachable from %r" % (origin,))
    return best_depot, best_d
