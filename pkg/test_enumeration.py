"""
enumeration：与不剪枝穷举的一致性、并发确定性、预算截断
"""

import numpy as np
import pytest

from core import AxiomConfig, verify_axioms
from enumeration import (
    EnumerationTask,
    _finish,
    brute_force_structures,
    count_up_to_iso,
    enumerate_structures,
    run_enumeration,
)
from utils import GammaError, SizeGuardExceeded


def table_keys(structures):
    return {(S.add.tobytes(), S.ternary.tobytes()) for S in structures}


def test_order_two_default_config():
    task = EnumerationTask(order=2, gamma=1)
    assert count_up_to_iso(task) == (4, 4)


def test_matches_brute_force_oracle():
    task = EnumerationTask(order=2, gamma=1)
    found = list(enumerate_structures(task))
    assert table_keys(found) == table_keys(brute_force_structures(task))
    assert len(found) == len(table_keys(found))


def test_order_one_is_trivial_only():
    found = list(enumerate_structures(EnumerationTask(order=1, gamma=1)))
    assert len(found) == 1
    assert found[0].order == 1


@pytest.mark.parametrize("workers", [2, 4])
def test_parallel_search_finds_the_same_set(workers):
    serial = table_keys(enumerate_structures(EnumerationTask(order=3, gamma=1)))
    parallel = table_keys(enumerate_structures(EnumerationTask(order=3, gamma=1, workers=workers)))
    assert parallel == serial


def test_stable_order_is_deterministic():
    task = EnumerationTask(order=3, gamma=1, workers=4, stable_order=True)
    first = [S.ternary.tobytes() for S in enumerate_structures(task)]
    second = [S.ternary.tobytes() for S in enumerate_structures(task)]
    assert first == second


def test_every_result_is_valid():
    for S in enumerate_structures(EnumerationTask(order=3, gamma=1)):
        assert verify_axioms(S).valid


def test_fixed_add_table_restricts_search():
    z3_add = tuple(tuple((a + b) % 3 for b in range(3)) for a in range(3))
    found = list(enumerate_structures(EnumerationTask(order=3, gamma=1, fixed_add=z3_add)))
    assert found
    assert all(np.array_equal(S.add, np.array(z3_add)) for S in found)


def test_relaxed_config_finds_more():
    strict = len(list(enumerate_structures(EnumerationTask(order=2, gamma=1))))
    relaxed_cfg = AxiomConfig(zero_absorption="middle", commutativity="off")
    relaxed = len(list(enumerate_structures(EnumerationTask(order=2, gamma=1, axiom_config=relaxed_cfg))))
    assert relaxed > strict


def test_max_results_marks_incomplete():
    result = run_enumeration(EnumerationTask(order=3, gamma=1, max_results=2))
    assert not result.complete
    assert result.reason == "max_results"
    assert len(result.structures) == 2


def test_zero_time_budget_returns_partial():
    result = run_enumeration(EnumerationTask(order=3, gamma=1, time_budget=0.0))
    assert not result.complete
    assert result.reason == "time_budget"


def test_cell_guard(monkeypatch):
    import config

    monkeypatch.setattr(config, "ENUM_CELL_GUARD", 1)
    with pytest.raises(SizeGuardExceeded):
        list(enumerate_structures(EnumerationTask(order=3, gamma=1)))


def test_complete_table_is_rechecked():
    add = np.array([[0, 1], [1, 0]], dtype=np.int64)
    with pytest.raises(GammaError):
        _finish(EnumerationTask(order=2, gamma=1), add, np.ones((2, 1, 2, 1, 2), dtype=np.int64))
