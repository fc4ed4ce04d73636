import pathlib

import pytest

from slopestab.models import parse_model

MODELS_DIR = pathlib.Path(__file__).resolve().parent.parent / "models"


@pytest.fixture(scope="session")
def load_model():
    def load(name):
        return parse_model((MODELS_DIR / f"{name}.json").read_bytes())

    return load


@pytest.fixture(scope="session")
def models_dir():
    return MODELS_DIR
