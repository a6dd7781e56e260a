from pathlib import Path

import numpy as np
import pytest

from cellloc import SparseField, io as dataio, pipeline

REPO_ROOT = Path(__file__).resolve().parents[1]
ISLAND_CONFIG = REPO_ROOT / "fixtures" / "island" / "config.json"


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        verdict = "PASS" if report.passed else "FAIL"
        print(f"\nACCEPTANCE {verdict}: {name}", flush=True)


@pytest.fixture(scope="session")
def island_config():
    return dataio.load_config(ISLAND_CONFIG)


@pytest.fixture(scope="session")
def island_dataset(island_config):
    return pipeline.load_dataset(island_config)


def random_dominance(rng: np.random.Generator, n_tiles: int,
                     n_cells: int, density: float = 0.6) -> SparseField:
    """Random sparse dominance field with values in (0, 1]."""
    columns = {}
    for i in range(n_cells):
        mask = rng.random(n_tiles) < density
        tiles = np.flatnonzero(mask)
        values = rng.uniform(0.01, 1.0, tiles.size)
        columns[f"c{i:02d}"] = (tiles, values)
    return SparseField(n_tiles, columns)


def one_hot_dominance(rng: np.random.Generator, n_tiles: int,
                      n_cells: int) -> SparseField:
    """Dominance of an arbitrary tile->cell map: exactly one 1 per tile."""
    owner = rng.integers(0, n_cells, n_tiles)
    columns = {}
    for i in range(n_cells):
        tiles = np.flatnonzero(owner == i)
        columns[f"c{i:02d}"] = (tiles, np.ones(tiles.size))
    return SparseField(n_tiles, columns)
