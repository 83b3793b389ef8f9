"""Shared fixtures: canonical parameter sets, flat curves, and the
drift-comparison study that several acceptance checks read from one run."""

import pytest

from fwdvol import (
    DRIFT_STUDY_SET,
    TERM_STRUCTURE_SET,
    McConfig,
    QuadratureConfig,
    flat_curves,
)
from fwdvol.mc import drift_error_study


@pytest.fixture(scope="session")
def fig1():
    return TERM_STRUCTURE_SET


@pytest.fixture(scope="session")
def sec5():
    return DRIFT_STUDY_SET


@pytest.fixture(scope="session")
def curves():
    return flat_curves()


@pytest.fixture(scope="session")
def quad():
    return QuadratureConfig()


@pytest.fixture(scope="session")
def drift_study(curves, sec5):
    """One paired-drift study shared by the forward and vol error checks."""
    cfg = McConfig(
        n_paths=100_000,
        n_steps=100,
        horizon=1.0,
        seed=0,
        drift_mode="exact_per_T",
        exact_settlements=(2.0,),
    )
    return drift_error_study((0.0, 1.0, 2.0, 3.0), cfg, curves, sec5)
