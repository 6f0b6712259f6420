"""Waypoint and path randomness: exact cylinder measures and seeded samplers.

Measure computations use exact rational arithmetic (`fractions.Fraction`), so
identities like channel stationarity and output-mixing decoupling can be
checked for equality rather than within a floating-point tolerance. Samplers
draw from numpy bit generators and are fully reproducible from their seed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import CapacityError, ConfigurationError, enumeration_cap
from .geometry import Cell, GridSpec, PathAlphabet

# Exact probability: arbitrary-precision numerator/denominator in lowest terms.
MeasureValue = Fraction

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]

IID_UNIFORM = "iid-uniform"
MARKOV = "markov"


@dataclass(frozen=True)
class CylinderEvent:
    """The event fixing a sequence's symbols on indices start..start+len-1.

    Symbols are cells for waypoint or location events and path ids (indexes
    into a :class:`~rwmm.geometry.PathAlphabet`) for path events.
    """

    start: int
    symbols: tuple

    def __post_init__(self) -> None:
        if self.start < 0:
            raise ValueError(f"cylinder start index must be >= 0, got {self.start}")
        if not self.symbols:
            raise ValueError("cylinder events need at least one symbol")

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def end(self) -> int:
        """Last constrained index (inclusive)."""
        return self.start + len(self.symbols) - 1


def _as_fraction_matrix(rows: Sequence[Sequence]) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(Fraction(v) for v in row) for row in rows)


def _check_strongly_connected(adjacency: list[list[int]]) -> bool:
    n = len(adjacency)
    reverse: list[list[int]] = [[] for _ in range(n)]
    for u, outs in enumerate(adjacency):
        for v in outs:
            reverse[v].append(u)
    for adj in (adjacency, reverse):
        seen = [False] * n
        seen[0] = True
        stack = [0]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        if not all(seen):
            return False
    return True


def _check_aperiodic(adjacency: list[list[int]]) -> bool:
    # For a strongly connected digraph the period is gcd over all edges of
    # depth[u] + 1 - depth[v], with depths from any BFS tree.
    n = len(adjacency)
    depth = [-1] * n
    depth[0] = 0
    queue = [0]
    while queue:
        nxt = []
        for u in queue:
            for v in adjacency[u]:
                if depth[v] < 0:
                    depth[v] = depth[u] + 1
                    nxt.append(v)
        queue = nxt
    g = 0
    for u, outs in enumerate(adjacency):
        for v in outs:
            g = math.gcd(g, abs(depth[u] + 1 - depth[v]))
    return g == 1


@dataclass(frozen=True)
class WaypointProcessSpec:
    """Distribution of the per-node waypoint sequence over a grid's cells.

    ``iid-uniform`` draws every waypoint independently with probability
    1/|cells|. ``markov`` evolves an exact row-stochastic transition matrix
    from an initial distribution; the chain must be irreducible and aperiodic
    so that long-run time averages over the induced movement exist and are
    seed-independent.
    """

    grid: GridSpec
    kind: str
    transition: tuple[tuple[Fraction, ...], ...] | None = None
    initial: tuple[Fraction, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind == IID_UNIFORM:
            if self.transition is not None or self.initial is not None:
                raise ConfigurationError("iid-uniform takes no transition matrix")
            return
        if self.kind != MARKOV:
            raise ConfigurationError(f"unknown waypoint process kind {self.kind!r}")
        n = self.grid.size
        if self.transition is None or self.initial is None:
            raise ConfigurationError("markov waypoint process needs matrix and initial")
        if len(self.transition) != n or any(len(r) != n for r in self.transition):
            raise ConfigurationError(f"transition matrix must be {n}x{n}")
        if len(self.initial) != n:
            raise ConfigurationError(f"initial distribution must have {n} entries")
        for row in self.transition:
            if any(p < 0 for p in row) or sum(row) != 1:
                raise ConfigurationError("transition rows must be nonnegative and sum to 1")
        if any(p < 0 for p in self.initial) or sum(self.initial) != 1:
            raise ConfigurationError("initial distribution must be nonnegative and sum to 1")
        adjacency = [
            [j for j, p in enumerate(row) if p > 0] for row in self.transition
        ]
        if not _check_strongly_connected(adjacency):
            raise ConfigurationError("markov waypoint chain must be irreducible")
        if not _check_aperiodic(adjacency):
            raise ConfigurationError("markov waypoint chain must be aperiodic")

    @classmethod
    def iid_uniform(cls, grid: GridSpec) -> "WaypointProcessSpec":
        return cls(grid=grid, kind=IID_UNIFORM)

    @classmethod
    def markov(
        cls,
        grid: GridSpec,
        transition: Sequence[Sequence],
        initial: Sequence,
    ) -> "WaypointProcessSpec":
        return cls(
            grid=grid,
            kind=MARKOV,
            transition=_as_fraction_matrix(transition),
            initial=tuple(Fraction(v) for v in initial),
        )

    @classmethod
    def lazy_walk(cls, grid: GridSpec, stay: Fraction = Fraction(1, 2)) -> "WaypointProcessSpec":
        """Lazy nearest-neighbor walk on the grid, uniform initial distribution.

        Stays put with probability ``stay`` and otherwise moves to a uniformly
        chosen in-grid 4-neighbor. Irreducible for every grid; the self loop
        makes it aperiodic (so ``stay`` must be positive on grids with more
        than one cell).
        """
        stay = Fraction(stay)
        if not 0 <= stay < 1:
            raise ConfigurationError(f"stay probability must be in [0, 1), got {stay}")
        n = grid.size
        if n == 1:
            return cls.markov(grid, [[Fraction(1)]], [Fraction(1)])
        rows = []
        for cell in grid.cells():
            neighbors = [
                Cell(cell.x + dx, cell.y + dy)
                for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))
                if grid.contains(Cell(cell.x + dx, cell.y + dy))
            ]
            row = [Fraction(0)] * n
            row[grid.cell_id(cell)] = stay
            share = (1 - stay) / len(neighbors)
            for nb in neighbors:
                row[grid.cell_id(nb)] += share
            rows.append(row)
        uniform = [Fraction(1, n)] * n
        return cls.markov(grid, rows, uniform)


def _validate_cells(spec_grid: GridSpec, symbols: Sequence) -> list[int]:
    ids = []
    for sym in symbols:
        if not isinstance(sym, Cell):
            raise ValueError(f"waypoint cylinder symbols must be cells, got {sym!r}")
        ids.append(spec_grid.cell_id(sym))
    return ids


def _markov_distribution_at(spec: WaypointProcessSpec, index: int) -> list[Fraction]:
    """Exact symbol distribution at a given time index (initial @ P^index)."""
    assert spec.transition is not None and spec.initial is not None
    dist = list(spec.initial)
    n = len(dist)
    for _ in range(index):
        dist = [
            sum(dist[i] * spec.transition[i][j] for i in range(n) if dist[i])
            for j in range(n)
        ]
    return dist


def waypoint_cylinder_prob(spec: WaypointProcessSpec, event: CylinderEvent) -> Fraction:
    """Exact probability that the waypoint sequence matches the cylinder."""
    ids = _validate_cells(spec.grid, event.symbols)
    if spec.kind == IID_UNIFORM:
        return Fraction(1, spec.grid.size ** len(ids))
    assert spec.transition is not None
    dist = _markov_distribution_at(spec, event.start)
    prob = dist[ids[0]]
    for a, b in zip(ids, ids[1:]):
        if not prob:
            return Fraction(0)
        prob *= spec.transition[a][b]
    return prob


def _channel_factor(alphabet: PathAlphabet, w_from: Cell, w_to: Cell, path_id: int) -> Fraction:
    if not 0 <= path_id < len(alphabet.all_paths):
        raise ValueError(
            f"path id {path_id} outside alphabet of {len(alphabet.all_paths)} paths"
        )
    members = alphabet.family_id_set(w_from, w_to)
    if path_id not in members:
        return Fraction(0)
    return Fraction(1, len(members))


def _constrained_channel_prob(
    alphabet: PathAlphabet,
    waypoints: Sequence[Cell],
    constraints: dict[int, int],
) -> Fraction:
    """Channel probability of an event fixing path symbols at given indices.

    The channel draws each path coordinate independently and uniformly from
    the family of its waypoint pair, so the event probability is the product
    of per-index factors; unconstrained indices contribute 1.
    """
    prob = Fraction(1)
    for index, path_id in sorted(constraints.items()):
        if index + 1 >= len(waypoints):
            raise ValueError(
                f"waypoint prefix of length {len(waypoints)} too short for "
                f"path index {index}"
            )
        prob *= _channel_factor(alphabet, waypoints[index], waypoints[index + 1], path_id)
        if not prob:
            return Fraction(0)
    return prob


def channel_cylinder_prob(
    alphabet: PathAlphabet,
    waypoints: Sequence[Cell],
    event: CylinderEvent,
) -> Fraction:
    """Exact conditional probability of a path cylinder given the waypoints.

    The value is the product over constrained indices i of
    ``1 / |family(w_i, w_i+1)|`` when every fixed path belongs to its
    family, and exactly 0 otherwise. The waypoint prefix must cover index
    ``event.end + 1``.
    """
    constraints = {event.start + k: pid for k, pid in enumerate(event.symbols)}
    return _constrained_channel_prob(alphabet, waypoints, constraints)


def check_channel_stationarity(
    alphabet: PathAlphabet,
    waypoints: Sequence[Cell],
    horizon: int,
    cap: int | None = None,
) -> Fraction:
    """Max over length-``horizon`` path cylinders of the stationarity gap.

    Compares the shifted-input channel measure of ``[p_0..p_{n-1}]`` with the
    original channel measure of the shift preimage (the same symbols fixed at
    indices 1..n). Both sides vanish outside their per-coordinate support
    sets, so the maximum over the whole cylinder space is attained on the
    product of the per-coordinate support unions, which is what gets
    enumerated (subject to the cap).
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if len(waypoints) < horizon + 2:
        raise ValueError(
            f"need at least {horizon + 2} waypoints, got {len(waypoints)}"
        )
    shifted = list(waypoints[1:])
    supports = []
    count = 1
    limit = enumeration_cap() if cap is None else cap
    for i in range(horizon):
        side_a = alphabet.family_id_set(shifted[i], shifted[i + 1])
        side_b = alphabet.family_id_set(waypoints[i + 1], waypoints[i + 2])
        union = sorted(side_a | side_b)
        supports.append(union)
        count *= len(union)
        if count > limit:
            raise CapacityError(
                f"stationarity check would enumerate {count}+ cylinders, cap {limit}"
            )
    worst = Fraction(0)
    for combo in itertools.product(*supports):
        lhs = channel_cylinder_prob(alphabet, shifted, CylinderEvent(0, combo))
        rhs = channel_cylinder_prob(alphabet, waypoints, CylinderEvent(1, combo))
        gap = abs(lhs - rhs)
        if gap > worst:
            worst = gap
    return worst


class MixingCheck(NamedTuple):
    """Result of one output-mixing decoupling check."""

    discrepancy: Fraction
    premise_met: bool  # shift >= second event's length, where decoupling is exact
    shift: int
    decoupling_threshold: int


def check_output_mixing(
    alphabet: PathAlphabet,
    waypoints: Sequence[Cell],
    event_a: Sequence[int],
    event_b: Sequence[int],
    shift: int,
) -> MixingCheck:
    """Exact decoupling gap ``|nu(T^-shift A and B) - nu(T^-shift A) nu(B)|``.

    ``event_a`` and ``event_b`` fix path symbols from index 0; the first is
    then shifted. For ``shift >= len(event_b)`` the constrained index sets
    are disjoint and the product measure factorizes, so the gap is exactly 0;
    smaller shifts are still evaluated but flagged as not meeting that
    premise.
    """
    if shift < 0:
        raise ValueError(f"shift must be >= 0, got {shift}")
    a = {shift + i: pid for i, pid in enumerate(event_a)}
    b = {i: pid for i, pid in enumerate(event_b)}
    merged = dict(b)
    conflict = False
    for idx, pid in a.items():
        if idx in merged and merged[idx] != pid:
            conflict = True
            break
        merged[idx] = pid
    if conflict:
        joint = Fraction(0)
    else:
        joint = _constrained_channel_prob(alphabet, waypoints, merged)
    split = _constrained_channel_prob(alphabet, waypoints, a) * _constrained_channel_prob(
        alphabet, waypoints, b
    )
    return MixingCheck(
        discrepancy=abs(joint - split),
        premise_met=shift >= len(event_b),
        shift=shift,
        decoupling_threshold=len(event_b),
    )


def channel_total_mass(
    alphabet: PathAlphabet,
    waypoints: Sequence[Cell],
    horizon: int,
    cap: int | None = None,
) -> Fraction:
    """Sum of the channel measure over all admissible length-``horizon`` cylinders.

    Enumerates the product of the per-coordinate families and sums the exact
    cylinder probabilities; a correctly normalized channel returns exactly 1.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if len(waypoints) < horizon + 1:
        raise ValueError(f"need at least {horizon + 1} waypoints, got {len(waypoints)}")
    limit = enumeration_cap() if cap is None else cap
    supports = []
    count = 1
    for i in range(horizon):
        members = sorted(alphabet.family_id_set(waypoints[i], waypoints[i + 1]))
        supports.append(members)
        count *= len(members)
        if count > limit:
            raise CapacityError(
                f"normalization check would enumerate {count}+ cylinders, cap {limit}"
            )
    total = Fraction(0)
    for combo in itertools.product(*supports):
        total += channel_cylinder_prob(alphabet, waypoints, CylinderEvent(0, combo))
    return total


def path_process_prob(
    spec: WaypointProcessSpec,
    alphabet: PathAlphabet,
    event: CylinderEvent,
    horizon: int | None = None,
    cap: int | None = None,
) -> Fraction:
    """Exact unconditional probability of a path cylinder.

    Marginalizes the channel over every waypoint prefix long enough to cover
    the event (``event.end + 2`` waypoints; a longer ``horizon`` gives the
    same value since the extra coordinates integrate out). Raises
    :class:`CapacityError` when ``|cells|^horizon`` exceeds the cap.
    """
    if spec.grid is not alphabet.grid and spec.grid != alphabet.grid:
        raise ValueError("waypoint process and alphabet use different grids")
    needed = event.end + 2
    span = needed if horizon is None else horizon
    if span < needed:
        raise ValueError(f"horizon {span} shorter than the {needed} waypoints needed")
    limit = enumeration_cap() if cap is None else cap
    count = spec.grid.size ** span
    if count > limit:
        raise CapacityError(
            f"path marginalization would enumerate {count} waypoint prefixes, cap {limit}"
        )
    total = Fraction(0)
    for prefix in itertools.product(*[list(spec.grid.cells())] * span):
        weight = waypoint_cylinder_prob(spec, CylinderEvent(0, prefix))
        if not weight:
            continue
        conditional = channel_cylinder_prob(alphabet, prefix, event)
        if conditional:
            total += weight * conditional
    return total


@dataclass(frozen=True, eq=False)
class WaypointTrace:
    """A realized finite waypoint sequence for one node (cell ids)."""

    grid: GridSpec
    ids: np.ndarray
    node_id: int = 0

    def __len__(self) -> int:
        return len(self.ids)

    def cell(self, index: int) -> Cell:
        return self.grid.cell_at(int(self.ids[index]))


@dataclass(frozen=True, eq=False)
class PathTrace:
    """A realized finite path sequence for one node (alphabet path ids)."""

    alphabet: PathAlphabet
    ids: np.ndarray
    node_id: int = 0

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def lengths(self) -> np.ndarray:
        return self.alphabet.path_lengths[self.ids]

    def path(self, index: int):
        return self.alphabet.all_paths[int(self.ids[index])]


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_waypoints(
    spec: WaypointProcessSpec,
    count: int,
    seed: SeedLike,
    node_id: int = 0,
) -> WaypointTrace:
    """Draw a reproducible waypoint sequence of ``count`` symbols."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = _rng(seed)
    n = spec.grid.size
    if spec.kind == IID_UNIFORM:
        ids = rng.integers(0, n, size=count, dtype=np.int64)
        return WaypointTrace(spec.grid, ids, node_id)
    assert spec.transition is not None and spec.initial is not None
    cumulative = np.cumsum(
        np.array([[float(p) for p in row] for row in spec.transition]), axis=1
    )
    start_cum = np.cumsum([float(p) for p in spec.initial])
    draws = rng.random(count)
    ids = np.empty(count, dtype=np.int64)
    state = int(np.searchsorted(start_cum, draws[0], side="right"))
    state = min(state, n - 1)
    ids[0] = state
    for k in range(1, count):
        state = int(np.searchsorted(cumulative[state], draws[k], side="right"))
        state = min(state, n - 1)
        ids[k] = state
    return WaypointTrace(spec.grid, ids, node_id)


def sample_paths(alphabet: PathAlphabet, waypoints: WaypointTrace, seed: SeedLike) -> PathTrace:
    """Draw one path per consecutive waypoint pair, uniform within its family."""
    if len(waypoints) < 2:
        raise ValueError("need at least two waypoints to sample a path")
    rng = _rng(seed)
    ids = waypoints.ids
    pair_ids = ids[:-1] * alphabet.grid.size + ids[1:]
    sizes = alphabet.family_sizes[pair_ids]
    picks = rng.integers(0, sizes)
    path_ids = alphabet.family_members[alphabet.family_offsets[pair_ids] + picks]
    return PathTrace(alphabet, path_ids.astype(np.int64), waypoints.node_id)


def uniform_prefix(grid: GridSpec, length: int, rng: np.random.Generator) -> tuple[Cell, ...]:
    """A uniformly random waypoint prefix, for quantifying over channel inputs."""
    ids = rng.integers(0, grid.size, size=length)
    return tuple(grid.cell_at(int(i)) for i in ids)
