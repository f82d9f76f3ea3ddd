import numpy as np
import pytest

from core.exceptions import DomainError, InconsistencyError
from core.news import NEVER
from core.strategies import MixedStrategy, never, point_mass, uniform


def test_point_mass_cdf():
    s = point_mass(1.0)
    assert s.cdf(0.99) == 0.0
    assert s.cdf(1.0) == 1.0
    assert s.cdf_left(1.0) == 0.0
    assert s.atom_mass(1.0) == 1.0
    assert point_mass(NEVER).never_mass == 1.0


def test_uniform_with_atom_and_never():
    s = uniform(0.0, 2.0, mass=0.5, atoms=[(2.0, 0.2)])
    assert s.never_mass == pytest.approx(0.3)
    assert s.cdf(1.0) == pytest.approx(0.25)
    assert s.cdf(2.0) == pytest.approx(0.7)
    assert s.cdf_left(2.0) == pytest.approx(0.5)
    assert s.cdf(NEVER) == 1.0
    assert s.pdf(3.0) == 0.0
    assert s.breakpoints() == [0.0, 2.0]


def test_mass_must_total_one():
    with pytest.raises(InconsistencyError):
        MixedStrategy(atoms=((1.0, 0.4),), never_mass=0.4)


def test_negative_time_rejected():
    with pytest.raises(DomainError):
        never().cdf(-1.0)


def test_sampling_reproduces_cdf():
    s = uniform(1.0, 3.0, mass=0.6, atoms=[(3.0, 0.3)])
    draws = s.sample(np.random.default_rng(11), 200_000)
    assert np.mean(draws <= 2.0) == pytest.approx(0.3, abs=5e-3)
    assert np.mean(draws == 3.0) == pytest.approx(0.3, abs=5e-3)
    assert np.mean(np.isinf(draws)) == pytest.approx(0.1, abs=5e-3)


def test_sampling_is_seeded():
    s = uniform(0.0, 1.0)
    first = s.sample(np.random.default_rng(5), 1000)
    second = s.sample(np.random.default_rng(5), 1000)
    assert np.array_equal(first, second)
