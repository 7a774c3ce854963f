import os
from pathlib import Path

import pytest

from magset.graph_core import Admg, parse_graph

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"


def load(name: str) -> Admg:
    return parse_graph((DATA / f"{name}.mag").read_text())


def graph(text: str) -> Admg:
    """Inline graph: edges separated by ';' or newlines."""
    return parse_graph(text.replace(";", "\n"))


def pytest_collection_modifyitems(config, items):
    if os.environ.get("MAGSET_CENSUS6") == "1":
        return
    skip = pytest.mark.skip(reason="set MAGSET_CENSUS6=1 to run the n=6 census")
    for item in items:
        if "census6" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def data_dir() -> Path:
    return DATA
