"""
共享测试夹具：corpus/ 中的结构与模
"""

from pathlib import Path

import numpy as np
import pytest

from core import GammaSemiring, load_structure, structure_from_functions
from modules import load_module, module_from_functions, regular_module

CORPUS = Path(__file__).parent / "corpus"


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 穷举规模较大的测试")


def mod_structure(n: int) -> GammaSemiring:
    """Z_n，三元运算为 a·b·c mod n"""
    return structure_from_functions(n, 1, lambda a, b: (a + b) % n, lambda a, al, b, be, c: (a * b * c) % n)


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture
def z6_mult() -> GammaSemiring:
    return load_structure(CORPUS / "z6-mult.tgs")


@pytest.fixture
def z6_add() -> GammaSemiring:
    return load_structure(CORPUS / "z6-add.tgs")


@pytest.fixture
def z3_mult() -> GammaSemiring:
    return load_structure(CORPUS / "z3-mult.tgs")


@pytest.fixture
def z2_mult() -> GammaSemiring:
    return load_structure(CORPUS / "z2-mult.tgs")


@pytest.fixture
def chain3() -> GammaSemiring:
    return load_structure(CORPUS / "chain3.tgs")


@pytest.fixture
def trivial() -> GammaSemiring:
    return GammaSemiring(np.zeros((1, 1), dtype=np.int64), np.zeros((1, 1, 1, 1, 1), dtype=np.int64))


@pytest.fixture
def z3_gamma2() -> GammaSemiring:
    """Z3，Γ = {0, 1}：aαbβc = (α+1)(β+1)·abc mod 3"""
    return structure_from_functions(3, 2, lambda a, b: (a + b) % 3,
                                    lambda a, al, b, be, c: ((al + 1) * (be + 1) * a * b * c) % 3)


@pytest.fixture
def z3_regular(z3_mult):
    return regular_module(z3_mult)


@pytest.fixture
def z3_zero_action(z3_mult):
    """加法为 Z3、作用恒为 0 的非单位模"""
    return module_from_functions(z3_mult, 3, lambda x, y: (x + y) % 3, lambda a, al, x, be, b: 0)


@pytest.fixture
def z6_regular():
    return load_module(CORPUS / "z6-regular.tgm")


@pytest.fixture
def z6_two():
    return load_module(CORPUS / "z6-two.tgm")


@pytest.fixture
def z6_three():
    return load_module(CORPUS / "z6-three.tgm")


@pytest.fixture(scope="session")
def small_corpus():
    """n ≤ 3、g = 1 的全部结构"""
    from enumeration import EnumerationTask, enumerate_structures

    structures = []
    for n in (1, 2, 3):
        structures += list(enumerate_structures(EnumerationTask(order=n, gamma=1)))
    return tuple(structures)
