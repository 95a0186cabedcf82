from pathlib import Path

import numpy as np
import pytest

import config
from graphstate import ConnectedSystem, edge_graph, graph_stabilizers
from protocol import toy_instance

INSTANCES = Path(__file__).resolve().parent.parent / "instances"


@pytest.fixture(autouse=True)
def fresh_config():
    """Every test starts from the environment defaults"""
    config.reset()
    yield
    config.reset()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def instances_dir():
    return INSTANCES


@pytest.fixture
def edge():
    return edge_graph()


@pytest.fixture
def edge_group(edge):
    return graph_stabilizers(edge)


@pytest.fixture
def edge_system(edge):
    return ConnectedSystem.build(edge, 1, [(0, 0)])


@pytest.fixture
def toy_yes():
    return toy_instance("yes")


@pytest.fixture
def toy_no():
    return toy_instance("no")
