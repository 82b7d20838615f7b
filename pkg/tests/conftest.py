import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture(scope="session")
def burgers_references():
    """Reference solutions for both viscosities, shared by every test that needs them."""
    from mlsdc_kit.benchmarks.burgers import BurgersSetup, reference_solutions

    return {nu: reference_solutions(BurgersSetup(nu=nu)) for nu in (0.1, 1.0)}
