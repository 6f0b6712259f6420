"""Discrete geography: grid cells, digitized trips, and the path alphabet.

A trip between two waypoints is digitized by sampling the straight segment
between their cell centers once per unit time step at a fixed speed and
rounding every sample to the nearest cell, the last sample being forced onto
the destination. Different speeds can produce different cell sequences for
the same waypoint pair; collecting the distinct sequences for every ordered
pair of cells yields a finite path alphabet.

All sampling arithmetic is exact. Sample coordinates have the form
``origin + k*v*span / sqrt(d2)`` with rational ``k*v`` and integer ``span``
and ``d2``, so rounding decisions reduce to sign tests of
``a*sqrt(d2) - b`` with rational ``a`` and ``b``, which are decided by
comparing squares. Half-integer ties round toward the smaller coordinate,
deterministically on every platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

import numpy as np

from .errors import CapacityError, ConfigurationError, enumeration_cap

SpeedLike = Union[Fraction, int, str]


@dataclass(frozen=True, order=True)
class Cell:
    """One cell of the finite geographic grid."""

    x: int
    y: int


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid of ``width * height`` cells, indexed row-major by y."""

    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ConfigurationError(
                f"grid dimensions must be positive, got {self.width}x{self.height}"
            )

    @property
    def size(self) -> int:
        return self.width * self.height

    def contains(self, cell: Cell) -> bool:
        return 0 <= cell.x < self.width and 0 <= cell.y < self.height

    def cell_id(self, cell: Cell) -> int:
        if not self.contains(cell):
            raise ValueError(f"{cell} outside {self.width}x{self.height} grid")
        return cell.y * self.width + cell.x

    def cell_at(self, cell_id: int) -> Cell:
        if not 0 <= cell_id < self.size:
            raise ValueError(f"cell id {cell_id} outside grid of size {self.size}")
        return Cell(cell_id % self.width, cell_id // self.width)

    def cells(self) -> Iterator[Cell]:
        """All cells in id order."""
        for y in range(self.height):
            for x in range(self.width):
                yield Cell(x, y)


@dataclass(frozen=True)
class Path:
    """A digitized trip: ``length + 1`` cells from source to destination.

    ``cells[0]`` is the source waypoint and ``cells[-1]`` the destination;
    the trip takes ``length >= 1`` time steps.
    """

    cells: tuple[Cell, ...]

    def __post_init__(self) -> None:
        if len(self.cells) < 2:
            raise ValueError("a path needs at least two cells (length >= 1)")

    @property
    def length(self) -> int:
        return len(self.cells) - 1

    @property
    def source(self) -> Cell:
        return self.cells[0]

    @property
    def dest(self) -> Cell:
        return self.cells[-1]


@dataclass(frozen=True)
class PathFamily:
    """The distinct digitized paths for one ordered waypoint pair."""

    source: Cell
    dest: Cell
    paths: tuple[Path, ...]

    def __post_init__(self) -> None:
        if not self.paths:
            raise ValueError(f"empty path family for {self.source} -> {self.dest}")
        for p in self.paths:
            if p.source != self.source or p.dest != self.dest:
                raise ValueError(f"path {p} does not join {self.source} -> {self.dest}")

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self) -> Iterator[Path]:
        return iter(self.paths)


def normalize_speeds(speeds: Iterable[SpeedLike]) -> tuple[Fraction, ...]:
    """Validate and canonicalize a speed set to sorted positive Fractions."""
    values = sorted({Fraction(v) for v in speeds})
    if not values:
        raise ConfigurationError("speed set must not be empty")
    if values[0] <= 0:
        raise ConfigurationError(f"speeds must be positive, got {values[0]}")
    return tuple(values)


def _sqrt_ge(coeff: Fraction, rhs: Fraction, radicand: int) -> bool:
    """Exact test of ``coeff * sqrt(radicand) >= rhs`` (radicand >= 0)."""
    if coeff >= 0:
        if rhs <= 0:
            return True
        return coeff * coeff * radicand >= rhs * rhs
    # left side <= 0 here
    if rhs > 0:
        return False
    return coeff * coeff * radicand <= rhs * rhs


def _step_count(radicand: int, speed: Fraction) -> int:
    """Smallest l >= 1 with ``l * speed >= sqrt(radicand)``."""
    if radicand == 0:
        return 1
    steps = max(1, math.ceil(math.sqrt(radicand) / float(speed) - 1e-9))
    while (steps * speed) ** 2 < radicand:
        steps += 1
    while steps > 1 and ((steps - 1) * speed) ** 2 >= radicand:
        steps -= 1
    return steps


def _round_coordinate(origin: int, span: int, travelled: Fraction, radicand: int) -> int:
    """Nearest integer to ``origin + travelled * span / sqrt(radicand)``.

    Half-integer ties go to the smaller value, i.e. the result is the
    smallest integer n with ``n + 1/2 >= coordinate``. A float estimate is
    corrected by exact comparisons, so the tie rule is honored even when the
    coordinate is exactly half-integral.
    """
    rhs = travelled * span
    estimate = origin + float(travelled) * span / math.sqrt(radicand)
    n = math.floor(estimate + 0.5)

    def at_least_coordinate(m: int) -> bool:
        return _sqrt_ge(Fraction(2 * m + 1, 2) - origin, rhs, radicand)

    while not at_least_coordinate(n):
        n += 1
    while at_least_coordinate(n - 1):
        n -= 1
    return n


def enumerate_paths(
    grid: GridSpec,
    source: Cell,
    dest: Cell,
    speeds: Iterable[SpeedLike],
) -> PathFamily:
    """Digitize the source->dest trip at every speed and collect distinct paths.

    A same-cell trip yields the single pause path ``[source, source]`` of
    length 1 regardless of the speed set. Paths are ordered by (length,
    cell sequence), so identical inputs always produce identical families.
    """
    speed_set = normalize_speeds(speeds)
    for cell in (source, dest):
        if not grid.contains(cell):
            raise ValueError(f"{cell} outside {grid.width}x{grid.height} grid")
    if source == dest:
        return PathFamily(source, dest, (Path((source, source)),))

    span_x = dest.x - source.x
    span_y = dest.y - source.y
    radicand = span_x * span_x + span_y * span_y
    distinct: dict[Path, None] = {}
    for speed in speed_set:
        steps = _step_count(radicand, speed)
        cells = [source]
        for k in range(1, steps):
            travelled = k * speed
            cells.append(
                Cell(
                    _round_coordinate(source.x, span_x, travelled, radicand),
                    _round_coordinate(source.y, span_y, travelled, radicand),
                )
            )
        cells.append(dest)
        distinct.setdefault(Path(tuple(cells)))
    ordered = sorted(
        distinct, key=lambda p: (p.length, tuple((c.x, c.y) for c in p.cells))
    )
    return PathFamily(source, dest, tuple(ordered))


class PathAlphabet:
    """All path families of a grid plus flat lookup tables for fast sampling.

    Attributes
    ----------
    grid            : the underlying grid (waypoint alphabet equals its cells)
    families        : mapping (source, dest) -> PathFamily for every ordered pair
    all_paths       : every distinct path, stably indexed
    path_index      : inverse of ``all_paths``
    max_path_length : largest path length over the whole alphabet

    The numpy tables index paths and ordered cell pairs by id
    (``pair_id = source_id * grid.size + dest_id``):

    family_sizes / family_offsets / family_members
        per-pair member path ids, flattened
    path_lengths, path_sources, path_dests
        per-path metadata
    emit_offsets / emit_cells
        per-path emitted cell ids (the first ``length`` cells of the path,
        the destination being emitted by the next trip), flattened
    """

    def __init__(self, grid: GridSpec, families: Mapping[tuple[Cell, Cell], PathFamily]):
        self.grid = grid
        self.families = dict(families)
        for src in grid.cells():
            for dst in grid.cells():
                if (src, dst) not in self.families:
                    raise ValueError(f"missing path family for {src} -> {dst}")

        index: dict[Path, int] = {}
        for src in grid.cells():
            for dst in grid.cells():
                for path in self.families[(src, dst)]:
                    if path not in index:
                        index[path] = len(index)
        self.all_paths: tuple[Path, ...] = tuple(index)
        self.path_index: dict[Path, int] = index
        self.max_path_length = max(p.length for p in self.all_paths)

        size = grid.size
        self.path_lengths = np.array([p.length for p in self.all_paths], dtype=np.int64)
        self.path_sources = np.array(
            [grid.cell_id(p.source) for p in self.all_paths], dtype=np.int64
        )
        self.path_dests = np.array(
            [grid.cell_id(p.dest) for p in self.all_paths], dtype=np.int64
        )
        emit: list[int] = []
        offsets = np.zeros(len(self.all_paths), dtype=np.int64)
        for i, path in enumerate(self.all_paths):
            offsets[i] = len(emit)
            emit.extend(grid.cell_id(c) for c in path.cells[:-1])
        self.emit_offsets = offsets
        self.emit_cells = np.array(emit, dtype=np.int64)

        sizes = np.zeros(size * size, dtype=np.int64)
        members: list[int] = []
        family_offsets = np.zeros(size * size, dtype=np.int64)
        member_sets: list[frozenset[int]] = []
        for src in grid.cells():
            for dst in grid.cells():
                pair = grid.cell_id(src) * size + grid.cell_id(dst)
                ids = [index[p] for p in self.families[(src, dst)]]
                family_offsets[pair] = len(members)
                sizes[pair] = len(ids)
                members.extend(ids)
                member_sets.append(frozenset(ids))
        self.family_sizes = sizes
        self.family_offsets = family_offsets
        self.family_members = np.array(members, dtype=np.int64)
        self._member_sets = member_sets

    def pair_id(self, source: Cell, dest: Cell) -> int:
        return self.grid.cell_id(source) * self.grid.size + self.grid.cell_id(dest)

    def family(self, source: Cell, dest: Cell) -> PathFamily:
        return self.families[(source, dest)]

    def family_id_set(self, source: Cell, dest: Cell) -> frozenset[int]:
        """Member path ids of one family, as a set."""
        return self._member_sets[self.pair_id(source, dest)]


def build_alphabet(
    grid: GridSpec,
    speeds: Iterable[SpeedLike],
    cap: int | None = None,
) -> PathAlphabet:
    """Enumerate path families for all ordered cell pairs of the grid.

    Raises :class:`CapacityError` before enumerating when
    ``|S|^2 * |speeds|`` (an upper bound on the total path count, since each
    speed contributes at most one path per pair) exceeds the cap.
    """
    speed_set = normalize_speeds(speeds)
    limit = enumeration_cap() if cap is None else cap
    bound = grid.size * grid.size * len(speed_set)
    if bound > limit:
        raise CapacityError(
            f"path enumeration bound {bound} (= {grid.size}^2 pairs x "
            f"{len(speed_set)} speeds) exceeds cap {limit}"
        )
    families = {
        (src, dst): enumerate_paths(grid, src, dst, speed_set)
        for src in grid.cells()
        for dst in grid.cells()
    }
    return PathAlphabet(grid, families)
