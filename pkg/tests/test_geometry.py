"""Grid, exact digitization, and path-alphabet tests.

The digitizer is checked two independent ways: frozen hand-worked examples,
and an exhaustive sweep against the symbolic reference in ``oracles.py``
(sympy radicals, no custom integer sign tests).
"""

from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from rwmm.errors import CapacityError
from rwmm.geometry import (
    Cell,
    GridSpec,
    Path,
    PathAlphabet,
    build_alphabet,
    enumerate_paths,
    normalize_speeds,
)

from oracles import sympy_digitize


def family_cells(grid, source, dest, speeds):
    fam = enumerate_paths(grid, source, dest, normalize_speeds(speeds))
    return [p.cells for p in fam.paths]


class TestGridSpec:
    def test_cell_ids_are_row_major(self):
        grid = GridSpec(3, 2)
        assert grid.size == 6
        assert grid.cell_id(Cell(0, 0)) == 0
        assert grid.cell_id(Cell(2, 0)) == 2
        assert grid.cell_id(Cell(0, 1)) == 3
        assert [grid.cell_id(c) for c in grid.cells()] == list(range(6))
        for cid in range(6):
            assert grid.cell_id(grid.cell_at(cid)) == cid

    def test_contains(self):
        grid = GridSpec(2, 2)
        assert grid.contains(Cell(1, 1))
        assert not grid.contains(Cell(2, 0))
        assert not grid.contains(Cell(0, -1))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            GridSpec(0, 3)

    def test_cell_id_rejects_outside(self):
        with pytest.raises(ValueError):
            GridSpec(2, 2).cell_id(Cell(5, 0))


class TestNormalizeSpeeds:
    def test_sorts_and_converts(self):
        assert normalize_speeds((2, 1)) == (Fraction(1), Fraction(2))

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            normalize_speeds((1, 0))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            normalize_speeds(())


class TestDigitization:
    def test_straight_line_unit_speed(self):
        cells = family_cells(GridSpec(4, 1), Cell(0, 0), Cell(3, 0), (1,))
        assert cells == [(Cell(0, 0), Cell(1, 0), Cell(2, 0), Cell(3, 0))]

    def test_two_speeds_give_two_paths(self):
        cells = family_cells(GridSpec(4, 1), Cell(0, 0), Cell(3, 0), (1, 3))
        assert (Cell(0, 0), Cell(3, 0)) in cells
        assert (Cell(0, 0), Cell(1, 0), Cell(2, 0), Cell(3, 0)) in cells
        assert len(cells) == 2

    def test_three_speeds_on_a_row(self):
        cells = family_cells(
            GridSpec(4, 1), Cell(0, 0), Cell(3, 0), (1, Fraction(3, 2), 3)
        )
        # speed 3/2 samples at arc 3/2: x = 1.5, a tie, rounded down to 1
        assert cells == [
            (Cell(0, 0), Cell(3, 0)),
            (Cell(0, 0), Cell(1, 0), Cell(3, 0)),
            (Cell(0, 0), Cell(1, 0), Cell(2, 0), Cell(3, 0)),
        ]

    def test_half_speed_tie_rounds_down(self):
        # sample lands exactly on x = 1/2 -> belongs to the smaller cell
        cells = family_cells(GridSpec(2, 1), Cell(0, 0), Cell(1, 0), (Fraction(1, 2),))
        assert cells == [(Cell(0, 0), Cell(0, 0), Cell(1, 0))]

    def test_diagonal(self):
        cells = family_cells(GridSpec(2, 2), Cell(0, 0), Cell(1, 1), (1,))
        assert cells == [(Cell(0, 0), Cell(1, 1), Cell(1, 1))]

    def test_final_sample_is_forced_to_destination(self):
        # at speed 2 the last free sample would land past x = 3
        cells = family_cells(GridSpec(4, 1), Cell(0, 0), Cell(3, 0), (2,))
        assert cells == [(Cell(0, 0), Cell(2, 0), Cell(3, 0))]

    def test_pause_is_a_single_unit_path(self):
        fam = enumerate_paths(GridSpec(3, 3), Cell(1, 1), Cell(1, 1), (Fraction(1),))
        assert len(fam.paths) == 1
        assert fam.paths[0].cells == (Cell(1, 1), Cell(1, 1))
        assert fam.paths[0].length == 1

    def test_step_count_bounds(self):
        # l is minimal with l * v >= distance
        grid = GridSpec(6, 6)
        for speed in (Fraction(1), Fraction(3, 2), Fraction(2), Fraction(5, 2)):
            for dest in (Cell(5, 0), Cell(3, 4), Cell(5, 5), Cell(1, 2)):
                fam = enumerate_paths(grid, Cell(0, 0), dest, (speed,))
                dist2 = dest.x**2 + dest.y**2
                for p in fam.paths:
                    length = p.length
                    assert (length * speed) ** 2 >= dist2
                    if length > 1:
                        assert ((length - 1) * speed) ** 2 < dist2

    def test_matches_symbolic_reference_exhaustively(self):
        # every pair on a 4x3 grid, three speeds, against the sympy route
        grid = GridSpec(4, 3)
        speeds = (Fraction(1), Fraction(3, 2), Fraction(2))
        for source, dest in product(grid.cells(), repeat=2):
            if source == dest:
                continue
            for speed in speeds:
                expected = tuple(sympy_digitize(source, dest, speed))
                fam = enumerate_paths(grid, source, dest, (speed,))
                assert fam.paths[0].cells == expected, (source, dest, speed)

    def test_matches_symbolic_reference_long_vectors(self):
        grid = GridSpec(9, 5)
        for dest, speed in [
            (Cell(8, 3), Fraction(3, 2)),
            (Cell(7, 4), Fraction(1)),
            (Cell(8, 4), Fraction(7, 3)),
            (Cell(5, 4), Fraction(1, 2)),
        ]:
            expected = tuple(sympy_digitize(Cell(0, 0), dest, speed))
            fam = enumerate_paths(grid, Cell(0, 0), dest, (speed,))
            assert fam.paths[0].cells == expected, (dest, speed)


class TestPath:
    def test_length_and_endpoints(self):
        p = Path((Cell(0, 0), Cell(1, 0), Cell(2, 0)))
        assert p.length == 2
        assert p.source == Cell(0, 0)
        assert p.dest == Cell(2, 0)

    def test_rejects_single_cell(self):
        with pytest.raises(ValueError):
            Path((Cell(0, 0),))


class TestAlphabet:
    def test_small_alphabet_shape(self):
        grid = GridSpec(1, 2)
        alpha = build_alphabet(grid, (Fraction(1),))
        assert len(alpha.all_paths) == 4  # two pauses + two unit hops
        assert alpha.max_path_length == 1

    def test_tables_agree_with_paths(self):
        grid = GridSpec(3, 3)
        alpha = build_alphabet(grid, (Fraction(1), Fraction(2)))
        for pid, path in enumerate(alpha.all_paths):
            assert alpha.path_lengths[pid] == path.length
            assert alpha.path_sources[pid] == grid.cell_id(path.source)
            assert alpha.path_dests[pid] == grid.cell_id(path.dest)
            start = alpha.emit_offsets[pid]
            emitted = alpha.emit_cells[start : start + path.length]
            assert [grid.cell_at(int(c)) for c in emitted] == list(
                path.cells[: path.length]
            )

    def test_families_partition_and_match_enumeration(self):
        grid = GridSpec(3, 2)
        speeds = (Fraction(1), Fraction(2))
        alpha = build_alphabet(grid, speeds)
        seen = set()
        for source, dest in product(grid.cells(), repeat=2):
            members = alpha.family_id_set(source, dest)
            fam = enumerate_paths(grid, source, dest, speeds)
            assert {alpha.all_paths[i] for i in members} == set(fam.paths)
            seen |= members
        assert seen == set(range(len(alpha.all_paths)))

    def test_path_index_round_trip(self):
        alpha = build_alphabet(GridSpec(2, 2), (Fraction(1),))
        for pid, path in enumerate(alpha.all_paths):
            assert alpha.path_index[path] == pid

    def test_capacity_guard(self):
        with pytest.raises(CapacityError):
            build_alphabet(GridSpec(3, 3), (Fraction(1), Fraction(2)), cap=10)

    def test_capacity_env_override(self, monkeypatch):
        monkeypatch.setenv("RWMM_ENUM_CAP", "10")
        with pytest.raises(CapacityError):
            build_alphabet(GridSpec(3, 3), (Fraction(1),))

    def test_deterministic_ordering(self):
        a = build_alphabet(GridSpec(3, 3), (Fraction(1), Fraction(2)))
        b = build_alphabet(GridSpec(3, 3), (Fraction(1), Fraction(2)))
        assert a.all_paths == b.all_paths
        assert np.array_equal(a.family_members, b.family_members)
