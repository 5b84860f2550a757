"""Shared fixtures for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

import morseaqc as m
import morseaqc.fields as fields


@pytest.fixture(scope="session")
def grover4_field():
    return m.CharPolyField(m.build_grover_reduced(4))


@pytest.fixture(scope="session")
def grover4_census(grover4_field):
    return m.find_critical_points(grover4_field)


@pytest.fixture(scope="session")
def grover1024_field():
    return m.CharPolyField(m.build_grover_reduced(1024))


@pytest.fixture(scope="session")
def double_well():
    f = fields.double_well_field()
    return f, m.find_critical_points(f)


@pytest.fixture(scope="session")
def sphere_pattern():
    f = fields.two_peak_sphere_field()
    return f, m.find_critical_points(f)


@pytest.fixture(scope="session")
def monkey():
    f = fields.monkey_saddle_field()
    return f, m.find_critical_points(f)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
