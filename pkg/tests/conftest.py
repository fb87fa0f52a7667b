from __future__ import annotations

import numpy as np
import pytest

from qpmlab.config import paper_example
from qpmlab.gauge import Affine, Constant, RatioForm, Table, default_grid
from qpmlab.hausdorff import TableMap
from qpmlab.oracle import random_setmap, random_space
from qpmlab.solver import VariantSpec
from qpmlab.spaces import MatrixSpace

HALF = Constant(0.5, range="[0,1)")
TWO_THIRDS = Constant(2 / 3, range="[b,1)", b=0.5)

# one gauge choice per variant, each satisfying that variant's side conditions
CATALOG = {
    "V1": VariantSpec("V1", phi=HALF, eta=TWO_THIRDS),
    "V2": VariantSpec("V2", phi=HALF, eta=Constant(1.0, range="[b,1]", b=0.5)),
    "V3": VariantSpec("V3", phi=RatioForm(0.5), eta=Affine(0.75)),
    "V4": VariantSpec("V4", phi=Affine(0.5), eta=Affine(0.75)),
    "V5": VariantSpec("V5", phi=Affine(0.5), eta=Affine(0.75)),
    "V6": VariantSpec("V6", phi=Affine(0.25), eta=Affine(0.5)),
    "V7": VariantSpec("V7", phi=RatioForm(0.5), eta=Affine(0.75)),
    "V8": VariantSpec("V8", phi=Affine(0.5), eta=Affine(0.75)),
    "GABA_C": VariantSpec.gaba_c(0.5),
    "GABA_PHI": VariantSpec("GABA_PHI", phi=HALF),
    "GABA_B": VariantSpec("GABA_B", phi=Constant(0.4, range="[0,1)"),
                          eta=Table(((0.0, 0.5), (4.0, 0.6)), range="[b,1)", b=0.5)),
}

# all random spaces have diameter <= 8 * n <= 96, well inside this grid
SUITE_GRID = default_grid(200.0)


@pytest.fixture
def example():
    return paper_example()


@pytest.fixture
def catalog():
    return CATALOG


def random_scenario(seed: int):
    """Seed -> (space, map) with 2..6 points and images of size <= 3."""
    n = 2 + seed % 5
    space = random_space(n, seed)
    return space, random_setmap(space, seed + 1_000_003, max_card=1 + seed % 3)


def chain_scenario(seed: int):
    """Points on a line under max(a - b, 0) (plus a tiny reverse cost for T0),
    mapped roughly to half their position, so iterations run several steps."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 10))
    pos = np.unique(np.concatenate(([0.0], rng.integers(1, 64, size=n - 1) / 4.0)))
    n = len(pos)
    diff = pos[:, None] - pos[None, :]
    dist = np.where(diff > 0, diff, -diff / 1024)
    space = MatrixSpace(dist)
    table = {}
    for i, p in enumerate(pos):
        below = [j for j in range(n) if pos[j] <= p / 2]
        j = max(below, key=lambda k: pos[k])
        img = {j}
        if rng.random() < 0.3:
            img.add(int(rng.integers(0, n)))
        table[i] = sorted(img)
    return space, TableMap(table)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
