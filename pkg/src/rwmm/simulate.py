"""End-to-end seeded simulation: waypoints -> paths -> locations, per node.

Seeding uses `numpy.random.SeedSequence` spawning so that every node and
every stream (waypoint draws vs. path draws) gets an independent generator,
and the whole run is reproducible from a single integer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import PathAlphabet
from .location import JointTrace, LocationTrace, encode_sequence, joint_process
from .processes import (
    PathTrace,
    WaypointProcessSpec,
    WaypointTrace,
    sample_paths,
    sample_waypoints,
)


@dataclass(frozen=True, eq=False)
class NodeRun:
    """Everything one node produced in a run, all layers aligned."""

    waypoints: WaypointTrace
    paths: PathTrace
    locations: LocationTrace


def _seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def simulate_node(
    spec: WaypointProcessSpec,
    alphabet: PathAlphabet,
    horizon: int,
    seed,
    node_id: int = 0,
) -> NodeRun:
    """Simulate one node for ``horizon`` location steps.

    Draws ``horizon + 1`` waypoints — every path emits at least one location
    sample, so ``horizon`` paths always cover the horizon — then trims the
    encoded stream to exactly ``horizon`` samples.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    root = _seed_sequence(seed)
    wp_seed, path_seed = root.spawn(2)
    waypoints = sample_waypoints(spec, horizon + 1, np.random.default_rng(wp_seed), node_id)
    paths = sample_paths(alphabet, waypoints, np.random.default_rng(path_seed))
    locations = encode_sequence(paths).prefix(horizon)
    return NodeRun(waypoints=waypoints, paths=paths, locations=locations)


def simulate_locations(
    spec: WaypointProcessSpec,
    alphabet: PathAlphabet,
    horizon: int,
    seed,
    node_id: int = 0,
) -> LocationTrace:
    """One node's location trace of exactly ``horizon`` steps."""
    return simulate_node(spec, alphabet, horizon, seed, node_id).locations


def simulate_joint(
    spec: WaypointProcessSpec,
    alphabet: PathAlphabet,
    horizon: int,
    node_count: int,
    seed,
) -> JointTrace:
    """Independent nodes under one seed, stacked into a joint trace.

    Node i's generators come from the i-th spawn of the root seed sequence,
    so runs are reproducible and nodes are pairwise independent.
    """
    if node_count < 1:
        raise ValueError(f"node count must be >= 1, got {node_count}")
    root = _seed_sequence(seed)
    children = root.spawn(node_count)
    traces = [
        simulate_node(spec, alphabet, horizon, child, node_id).locations
        for node_id, child in enumerate(children)
    ]
    return joint_process(traces)
