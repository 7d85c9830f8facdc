import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))
sys.setrecursionlimit(20000)

from lmtt.surface import parse_program, resolve
from lmtt.syntax import GlobalCtx, LocalCtx

EMPTY_G = GlobalCtx()
EMPTY_L = LocalCtx()


def defs_of(src: str) -> dict:
    """name -> (declared type, resolved body) for a program text."""
    return {name: (typ, body) for name, typ, body in resolve(parse_program(src))}


@pytest.fixture(scope="session")
def layer1_population():
    from gen_terms import population
    return population(500, seed=20240, layer=1, depth=6)


@pytest.fixture(scope="session")
def layer0_population():
    from gen_terms import population
    return population(200, seed=20241, layer=0, depth=5)
