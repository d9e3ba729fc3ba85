import os

import pytest

from catalog_processing import catalog_entries, random_surface_specs, smooth_spec, standard_cycle_specs
from lattice_utils import parse_class
from surface_processing import SurfaceSpec, load_spec, validate_spec

SAMPLE_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'sample_data')
RANDOM_SPECS_PER_DEGREE = 100


@pytest.fixture
def sample_path():
    def path(name):
        return os.path.join(SAMPLE_DIR, name)
    return path


@pytest.fixture(scope='session')
def catalog():
    """Every catalog row realized once per session."""
    return {realized.name: realized for realized in catalog_entries()}


@pytest.fixture(scope='session')
def cycle_specs():
    return standard_cycle_specs()


@pytest.fixture(scope='session')
def random_corpus():
    """Up to RANDOM_SPECS_PER_DEGREE distinct root configurations for each degree 6..2."""
    return [spec for degree in range(6, 1, -1) for spec in random_surface_specs(degree, RANDOM_SPECS_PER_DEGREE, seed=11)]


@pytest.fixture
def smooth():
    return smooth_spec


@pytest.fixture
def make_spec():
    """SurfaceSpec of the given degree from symbolic roots."""
    def build(degree, roots=(), **kwargs):
        n = 9 - degree
        return validate_spec(SurfaceSpec(degree=degree, simple_roots=tuple(parse_class(r, n) for r in roots), **kwargs))
    return build


@pytest.fixture
def cubic(sample_path):
    return load_spec(sample_path('cubic.json'))


@pytest.fixture
def eckardt(sample_path):
    return load_spec(sample_path('eckardt.json'))


@pytest.fixture
def bad_blowup(sample_path):
    return load_spec(sample_path('d4_3a1.json'))


@pytest.fixture
def tangent_pair(sample_path):
    return load_spec(sample_path('tangent_pair.json'))
