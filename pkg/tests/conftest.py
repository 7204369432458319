import json

import numpy as np
import pytest

import rangesim as rs

# The bundled 4-agent benchmark: published starting positions and radii,
# T=0.1, gamma=1, epsilon=1, alpha=2, modified policy.
FOUR_POSITIONS = ((2.0, 2.0), (1.4, 3.2), (3.7, 5.2), (4.5, 4.3))
FOUR_RADII = (3.5, 2.5, 1.5, 1.4)
FOUR_EDGES = frozenset({(0, 1), (0, 3), (1, 0), (2, 3), (3, 2)})


@pytest.fixture(scope="session")
def bench_scenario() -> rs.Scenario:
    with open(rs.bundled_scenario_path()) as fh:
        return rs.Scenario.from_dict(json.load(fh))


@pytest.fixture(scope="session")
def bench_trace(bench_scenario) -> rs.SimulationTrace:
    return rs.run(bench_scenario)


@pytest.fixture
def four_positions() -> np.ndarray:
    return np.array(FOUR_POSITIONS)


@pytest.fixture
def four_radii() -> np.ndarray:
    return np.array(FOUR_RADII)
