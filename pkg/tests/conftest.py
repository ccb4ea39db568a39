import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from quasigrid.cutproject import CutProjectScheme, Window
from quasigrid.ratmath import IntervalBox, RMatrix


@pytest.fixture(scope="session")
def residue_scheme():
    """Model set {a : a mod 3 in {0, 1}}: lattice columns (1/3, 1), (1, 0)."""
    basis = RMatrix.from_rows([[Fraction(1, 3), 1], [1, 0]])
    window = Window(1, (IntervalBox.closed([0], [Fraction(1, 3)]),))
    return CutProjectScheme(1, 1, basis, window)


@pytest.fixture(scope="session")
def golden_scheme():
    """Fibonacci-style scheme at the rational convergent 377/233."""
    phi = Fraction(377, 233)
    basis = RMatrix.from_rows([[1, -phi], [1, phi + 1]])
    window = Window(
        1, (IntervalBox((Fraction(-1, 2),), (Fraction(1, 2),), (False,), (True,)),)
    )
    return CutProjectScheme(1, 1, basis, window)
