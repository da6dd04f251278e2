"""Shared fixtures: small networks with hand-checkable structure."""

from __future__ import annotations

import numpy as np
import pytest

from wdsres.hydraulics import HydraulicSeries
from wdsres.network import Junction, Network, Pipe, Pump, Source


def make_pipe(pid, a, b, length=100.0, diameter=0.1, friction=0.02,
              repair_rate=0.0, capacity=1.0):
    return Pipe(pid, (a, b), length, diameter, friction, repair_rate, capacity)


def make_network(junctions, sources, pipes, pumps=()):
    return Network(tuple(junctions), tuple(sources), tuple(pumps), tuple(pipes))


@pytest.fixture
def ring_network():
    """One source, three junctions, four pipes forming a single loop."""
    return make_network(
        junctions=[
            Junction("J1", 0.0, 0.01, 30.0),
            Junction("J2", 0.0, 0.01, 30.0),
            Junction("J3", 0.0, 0.01, 30.0),
        ],
        sources=[Source("R1", 100.0, 0.05)],
        pipes=[
            make_pipe("p1", "R1", "J1"),
            make_pipe("p2", "J1", "J2"),
            make_pipe("p3", "J2", "J3"),
            make_pipe("p4", "J3", "R1"),
        ],
    )


@pytest.fixture
def tree_network():
    """A chain R1 - J1 - J2: every pipe is a bridge."""
    return make_network(
        junctions=[Junction("J1", 0.0, 0.01, 30.0), Junction("J2", 0.0, 0.01, 30.0)],
        sources=[Source("R1", 100.0, 0.05)],
        pipes=[make_pipe("p1", "R1", "J1"), make_pipe("p2", "J1", "J2")],
    )


@pytest.fixture
def minimal_network():
    return make_network(
        junctions=[Junction("J1", 0.0, 0.01, 30.0)],
        sources=[Source("R1", 100.0, 0.05)],
        pipes=[make_pipe("p1", "R1", "J1")],
    )


@pytest.fixture
def tight_ring():
    """Ring whose pipe capacities bind before the demands do."""
    return make_network(
        junctions=[
            Junction("J1", 0.0, 0.01, 30.0),
            Junction("J2", 0.0, 0.01, 30.0),
            Junction("J3", 0.0, 0.01, 30.0),
        ],
        sources=[Source("R1", 100.0, 0.05)],
        pipes=[
            make_pipe("p1", "R1", "J1", capacity=0.012),
            make_pipe("p2", "J1", "J2", capacity=0.004),
            make_pipe("p3", "J2", "J3", capacity=0.004),
            make_pipe("p4", "J3", "R1", capacity=0.012),
        ],
    )


@pytest.fixture
def mesh_network():
    """Two sources, five junctions, a parallel pair and several loops."""
    return make_network(
        junctions=[
            Junction("A", 0.0, 0.01, 30.0),
            Junction("B", 0.0, 0.02, 30.0),
            Junction("C", 0.0, 0.0, 30.0),
            Junction("D", 0.0, 0.01, 30.0),
            Junction("E", 0.0, 0.005, 30.0),
        ],
        sources=[Source("S1", 100.0, 0.05), Source("S2", 90.0, 0.05)],
        pipes=[
            make_pipe("p1", "S1", "A", length=100.0),
            make_pipe("p2", "S1", "A", length=150.0),  # parallel to p1
            make_pipe("p3", "A", "B", length=200.0),
            make_pipe("p4", "B", "C", length=100.0),
            make_pipe("p5", "C", "S2", length=100.0),
            make_pipe("p6", "A", "C", length=400.0),
            make_pipe("p7", "B", "D", length=100.0),
            make_pipe("p8", "D", "E", length=50.0),
        ],
    )


@pytest.fixture
def two_route_network():
    """Direct route of resistance 40 and a two-hop route of resistance 80."""
    return make_network(
        junctions=[Junction("A", 0.0, 0.01, 30.0), Junction("B", 0.0, 0.0, 30.0)],
        sources=[Source("S", 100.0, 0.05)],
        pipes=[
            make_pipe("d1", "S", "A", length=200.0),          # 0.02*200/0.1 = 40
            make_pipe("e1", "S", "B", length=200.0),          # 40
            make_pipe("e2", "B", "A", length=200.0),          # 40, so S-B-A = 80
        ],
    )


@pytest.fixture
def pump_network():
    """Minimal network plus one pump delivering 0.3 m4/s of specific power."""
    from wdsres.performance import GAMMA_W

    return make_network(
        junctions=[Junction("J1", 0.0, 0.01, 30.0)],
        sources=[Source("R1", 100.0, 0.01)],
        pipes=[make_pipe("p1", "R1", "J1")],
        pumps=[Pump("b1", 0.3 * GAMMA_W)],
    )


def make_series(node_ids, delivered, demand, head=None, required_head=None, dt=3600.0):
    delivered = np.asarray(delivered, dtype=float)
    demand = np.asarray(demand, dtype=float)
    if head is None:
        head = np.full_like(delivered, 40.0)
    if required_head is None:
        required_head = np.full_like(delivered, 30.0)
    return HydraulicSeries(tuple(node_ids), delivered, demand, head, required_head, dt=dt)


@pytest.fixture
def zhuang_series():
    """Two nodes, two steps; delivered 33 of 40 flow units (x 1e-3 m3/s)."""
    return make_series(
        ("n1", "n2"),
        delivered=[[0.005, 0.010], [0.008, 0.010]],
        demand=[[0.010, 0.010], [0.010, 0.010]],
    )


@pytest.fixture
def hashimoto_series():
    """Single node; system ratios thresholded at 0.9 give SSFSSFFSSS."""
    ratios = [1.0, 0.95, 0.85, 1.0, 0.92, 0.6, 0.89, 0.95, 1.0, 0.9]
    delivered = [[0.01 * r] for r in ratios]
    demand = [[0.01]] * len(ratios)
    return make_series(("n1",), delivered, demand)
