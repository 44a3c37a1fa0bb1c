from pathlib import Path

import pytest

from iackit.config import build_system, parse_file

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def built(name: str):
    doc = parse_file(CONFIG_DIR / f"{name}.ini")
    return build_system(doc, base_dir=str(CONFIG_DIR))


@pytest.fixture(scope="session")
def config_dir() -> Path:
    return CONFIG_DIR


@pytest.fixture(scope="session")
def built_200w():
    return built("prototype_200w")


@pytest.fixture(scope="session")
def built_200w_nofilter():
    return built("prototype_200w_nofilter")


@pytest.fixture(scope="session")
def built_20kw():
    return built("prototype_20kw")


@pytest.fixture(scope="session")
def built_20kw_nofilter():
    return built("prototype_20kw_nofilter")
