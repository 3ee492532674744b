"""Shared fixtures and small hand-built street systems for the tests."""

import numpy as np
import pytest

from streetperc import NetworkParams, Window
from streetperc.geometry import StreetSystem
from streetperc.placement import Deployment

# Paper-scale defaults used across the suite (U = 3.6 on 100 m streets).
DEFAULTS = dict(street_intensity=4.444e-5, user_intensity=0.036)


def line_system(length: float) -> StreetSystem:
    """A single horizontal street from (0, 0) to (length, 0)."""
    return StreetSystem(
        vertices=np.array([[0.0, 0.0], [length, 0.0]]),
        streets=np.array([[0, 1]], dtype=np.int64),
        lengths=np.array([float(length)]),
        adjacency=((0,), (0,)),
    )


def cross_system(arm: float) -> StreetSystem:
    """Four streets meeting at a central crossroads (vertex 0)."""
    vertices = np.array([
        [0.0, 0.0], [arm, 0.0], [-arm, 0.0], [0.0, arm], [0.0, -arm],
    ])
    streets = np.array([[0, 1], [0, 2], [0, 3], [0, 4]], dtype=np.int64)
    return StreetSystem(
        vertices=vertices,
        streets=streets,
        lengths=np.full(4, float(arm)),
        adjacency=((0, 1, 2, 3), (0,), (1,), (2,), (3,)),
    )


def make_deployment(system: StreetSystem, offsets_per_street,
                    relays=None) -> Deployment:
    if relays is None:
        relays = np.ones(system.n_vertices, dtype=bool)
    offsets = tuple(np.asarray(o, dtype=float) for o in offsets_per_street)
    return Deployment(relay_present=np.asarray(relays, dtype=bool),
                      user_offsets=offsets)


@pytest.fixture
def params():
    return NetworkParams(**DEFAULTS)


@pytest.fixture
def small_window():
    return Window(600.0)
