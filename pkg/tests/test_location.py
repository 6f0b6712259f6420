"""Encoder and trip-timing tests.

The vectorized encoder is checked against a plain per-path Python loop, and
the structural identities (waypoint at each trip start, summed lengths,
shift alignment) are asserted on sampled traces.
"""

import logging

import numpy as np
import pytest
from fractions import Fraction

from rwmm.geometry import Cell, GridSpec, Path, build_alphabet
from rwmm.location import (
    JointTrace,
    LocationTrace,
    complete_trips,
    encode_path,
    encode_paths,
    encode_sequence,
    joint_process,
    trip_times,
    variable_length_shift,
)
from rwmm.processes import WaypointProcessSpec, sample_paths, sample_waypoints


@pytest.fixture(scope="module")
def sampled():
    grid = GridSpec(4, 4)
    alpha = build_alphabet(grid, (Fraction(1), Fraction(2)))
    spec = WaypointProcessSpec.iid_uniform(grid)
    w = sample_waypoints(spec, 400, seed=21)
    p = sample_paths(alpha, w, seed=22)
    return grid, alpha, w, p


def test_encode_path_emits_all_but_last():
    p = Path((Cell(0, 0), Cell(1, 0), Cell(2, 0)))
    assert encode_path(p) == (Cell(0, 0), Cell(1, 0))
    pause = Path((Cell(1, 1), Cell(1, 1)))
    assert encode_path(pause) == (Cell(1, 1),)


def test_encode_paths_concatenates():
    grid = GridSpec(3, 1)
    paths = [
        Path((Cell(0, 0), Cell(1, 0))),
        Path((Cell(1, 0), Cell(1, 0))),  # pause
        Path((Cell(1, 0), Cell(2, 0))),
    ]
    trace = encode_paths(paths, grid)
    assert [trace.cell(i) for i in range(len(trace))] == [
        Cell(0, 0),
        Cell(1, 0),
        Cell(1, 0),
    ]


def test_vectorized_encoder_matches_loop(sampled):
    grid, alpha, w, p = sampled
    fast = encode_sequence(p)
    slow = encode_paths([alpha.all_paths[int(i)] for i in p.ids], grid)
    assert np.array_equal(fast.ids, slow.ids)


def test_waypoints_sit_at_trip_starts(sampled):
    grid, alpha, w, p = sampled
    trace = encode_sequence(p)
    times = trip_times(p.lengths)
    assert times[-1] == len(trace)
    for k in range(len(p)):
        assert trace.ids[times[k]] == w.ids[k]


def test_trip_times_basics():
    assert trip_times([]).tolist() == [0]
    assert trip_times([2, 1, 3]).tolist() == [0, 2, 3, 6]


def test_complete_trips():
    lengths = [2, 1, 3]
    assert complete_trips(lengths, 0) == 0
    assert complete_trips(lengths, 1) == 0
    assert complete_trips(lengths, 2) == 1
    assert complete_trips(lengths, 3) == 2
    assert complete_trips(lengths, 5) == 2
    assert complete_trips(lengths, 6) == 3
    assert complete_trips(lengths, 100) == 3
    with pytest.raises(ValueError):
        complete_trips(lengths, -1)


def test_variable_length_shift_realigns(sampled):
    grid, alpha, w, p = sampled
    full = encode_sequence(p)
    for count in (0, 1, 7, len(p)):
        shifted, steps = variable_length_shift(p, count)
        assert steps == int(trip_times(p.lengths)[count])
        enc = encode_sequence(shifted)
        assert np.array_equal(enc.ids, full.ids[steps:])
    with pytest.raises(ValueError):
        variable_length_shift(p, len(p) + 1)


def test_prefix():
    grid = GridSpec(2, 1)
    trace = LocationTrace(grid, np.array([0, 1, 0, 1]))
    assert trace.prefix(2).ids.tolist() == [0, 1]
    with pytest.raises(ValueError):
        trace.prefix(9)


class TestJointProcess:
    def test_stacks_equal_lengths(self):
        grid = GridSpec(2, 1)
        a = LocationTrace(grid, np.array([0, 1, 0]), 0)
        b = LocationTrace(grid, np.array([1, 1, 1]), 1)
        joint = joint_process([a, b])
        assert joint.node_count == 2
        assert len(joint) == 3
        assert joint.node(1).ids.tolist() == [1, 1, 1]

    def test_truncates_with_warning(self, caplog):
        grid = GridSpec(2, 1)
        a = LocationTrace(grid, np.array([0, 1, 0, 1]), 0)
        b = LocationTrace(grid, np.array([1, 1]), 1)
        with caplog.at_level(logging.WARNING, logger="rwmm.location"):
            joint = joint_process([a, b])
        assert len(joint) == 2
        assert any("truncating" in r.message for r in caplog.records)

    def test_rejects_mixed_grids(self):
        a = LocationTrace(GridSpec(2, 1), np.array([0, 1]), 0)
        b = LocationTrace(GridSpec(3, 1), np.array([0, 1]), 1)
        with pytest.raises(ValueError):
            joint_process([a, b])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            joint_process([])
