import glob
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from dsltv.parser import parse_spec_file

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(name):
    return os.path.join(FIXTURES, name)


def load_spec(name):
    spec = parse_spec_file(fixture_path(name))
    assert not isinstance(spec, list), f"{name} failed to parse: {spec}"
    return spec


def corpus_paths():
    return sorted(glob.glob(os.path.join(FIXTURES, "corpus", "*.dslt")))


@pytest.fixture(scope="session")
def uml2java():
    return load_spec("uml2java.dslt")


@pytest.fixture(scope="session")
def uml2java_b4():
    return load_spec("uml2java_b4.dslt")


@pytest.fixture(scope="session")
def cegar_spec():
    return load_spec("cegar.dslt")


@pytest.fixture(scope="session")
def kboundary_spec():
    return load_spec("kboundary_tight.dslt")


@pytest.fixture(scope="session")
def corpus():
    return [(os.path.basename(p), load_spec(os.path.relpath(p, FIXTURES)))
            for p in corpus_paths()]
