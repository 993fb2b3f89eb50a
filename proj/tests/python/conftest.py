import os
import pathlib

import pytest

import gridfeas

DATA = pathlib.Path(os.environ.get(
    "GRIDFEAS_DATA_DIR", pathlib.Path(__file__).resolve().parents[2] / "data" / "grids"))


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def ex1():
    return gridfeas.load_grid(str(DATA / "example1.json"))


@pytest.fixture
def ex2():
    return gridfeas.load_grid(str(DATA / "example2.json"))
