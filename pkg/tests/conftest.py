from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from leakvoronoi.geometry import SiteSet, general_position_report

ROOT = Path(__file__).resolve().parent.parent
SETUPS = ROOT / "setups"

#: criterion number -> (status, detail) with status PASS, FAIL or SKIP
ACCEPTANCE: dict[int, tuple[str, str]] = {}


def random_sites(rng: np.random.Generator, k: int, lo: float = 0.0, hi: float = 1.0) -> SiteSet:
    """Uniform sites in a box, redrawn until comfortably in general position."""
    while True:
        pts = rng.uniform(lo, hi, size=(k, 2))
        s = SiteSet(pts)
        # stricter than the library tolerance so oracle margins stay meaningful
        if general_position_report(s, tol=1e-6).ok:
            return s


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def wing_setup():
    from leakvoronoi.data_io import load_setup

    return load_setup(SETUPS / "wing_demo.txt")


@pytest.fixture
def square_setup():
    from leakvoronoi.data_io import load_setup

    return load_setup(SETUPS / "square3.txt")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"{status} criterion {n}: {detail}")
