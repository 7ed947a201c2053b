import sys
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from syncplan.buchi import ltl_to_buchi
from syncplan.ltl import parse_ltl
from syncplan.planner import plan_robust
from syncplan.trace import Distribution
from syncplan.ts import load_ts

PROPS = ["r1P", "Sync", "r2P", "pi"]
PHI_SYNC = "G F r1P & G F r2P & G F pi & G F Sync"
CROSS = "G(r1P -> X r2P) & G F r1P & G F pi & G F Sync"
DATA = resources.files("syncplan") / "data"


@pytest.fixture(scope="session")
def t1():
    return load_ts((DATA / "t1.ts").read_text())


@pytest.fixture(scope="session")
def t2():
    return load_ts((DATA / "t2.ts").read_text())


@pytest.fixture(scope="session")
def dist():
    return Distribution(({"r1P", "pi", "Sync"}, {"r2P", "pi", "Sync"}))


@pytest.fixture(scope="session")
def example(t1, t2, dist):
    return plan_robust([t1, t2], PHI_SYNC, dist, [0.05, 0.05], PROPS)


@pytest.fixture(scope="session")
def b_sync():
    return ltl_to_buchi(parse_ltl(PHI_SYNC, PROPS), PROPS)


@pytest.fixture
def data_dir():
    return Path(str(DATA))
