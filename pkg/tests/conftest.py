from __future__ import annotations

import math

import numpy as np
import pytest

from spintangle.spin_model import ElectronQubitSpec, NuclearSpinParams


@pytest.fixture
def half_electron() -> ElectronQubitSpec:
    return ElectronQubitSpec(0.5, -0.5)


@pytest.fixture
def nv_electron() -> ElectronQubitSpec:
    return ElectronQubitSpec(0.0, -1.0)


@pytest.fixture
def spin_80_25(half_electron) -> NuclearSpinParams:
    return NuclearSpinParams.from_khz("s1", 80.0, 25.0, 314.0)


@pytest.fixture
def spin_60_30() -> NuclearSpinParams:
    return NuclearSpinParams.from_khz("s2", 60.0, 30.0, 314.0)


def random_spin(rng: np.random.Generator, larmor_khz: float = 314.0) -> NuclearSpinParams:
    a = rng.uniform(-200.0, 200.0)
    b = rng.uniform(0.0, 200.0)
    return NuclearSpinParams.from_khz(f"r{rng.integers(1 << 30)}", a, b, larmor_khz)


def random_unit_vector(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_rotation_pair(rng: np.random.Generator):
    """A random ConditionalRotation built from axis/angle draws."""
    from spintangle.spin_model import ConditionalRotation

    return ConditionalRotation.from_axis_angles(
        random_unit_vector(rng), rng.uniform(0.0, math.pi),
        random_unit_vector(rng), rng.uniform(0.0, math.pi))
