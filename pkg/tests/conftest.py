import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

os.environ.setdefault("ISING_ANNEAL_CACHE", str(Path(__file__).parent / ".basis-cache"))


@pytest.fixture(scope="session")
def basis_cache(tmp_path_factory):
    return Path(os.environ["ISING_ANNEAL_CACHE"])


def acceptance_dir() -> Path:
    """Where acceptance runs keep their (resumable) grids.

    Defaults to a repo-local scratch directory so that interrupted
    acceptance runs resume instead of recomputing; point
    ISING_ACCEPT_DIR elsewhere for a cold run.
    """
    return Path(os.environ.get("ISING_ACCEPT_DIR", Path(__file__).parent / ".acceptance-cache"))
