"""
穷举生成给定阶的全部合法三元 Γ-半环

先枚举合法加法表，再按扁平下标顺序填三元表格子；
每填一格就检查所有已完全实例化的恒等式，失败立即回溯。
"""

import itertools
import logging
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from threading import Lock
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

import config
from core import (
    AxiomConfig,
    GammaSemiring,
    add_table_violation,
    canonical_hash,
    has_partial_violation,
    verify_axioms,
)
from utils import BudgetExhausted, GammaError, MalformedFile, check_guard

logger = logging.getLogger(__name__)


class EnumerationTask(BaseModel):
    """枚举任务（不可变）"""

    model_config = ConfigDict(frozen=True)

    order: int
    gamma: int = 1
    axiom_config: AxiomConfig = AxiomConfig()
    commutative_only: bool = False
    fixed_add: Optional[Tuple[Tuple[int, ...], ...]] = None
    max_results: Optional[int] = None
    time_budget: Optional[float] = None
    workers: int = 1
    stable_order: bool = False

    @property
    def search_config(self) -> AxiomConfig:
        """实际搜索使用的配置；commutative_only 时强制交换律"""
        if self.commutative_only:
            return self.axiom_config.with_commutativity_enforced()
        return self.axiom_config


@dataclass
class EnumerationResult:
    structures: List[GammaSemiring]
    complete: bool
    reason: Optional[str] = None


def _forced_zero_mask(n: int, g: int, cfg: AxiomConfig) -> np.ndarray:
    mask = np.zeros((n, g, n, g, n), dtype=bool)
    mask[:, :, 0, :, :] = True
    if cfg.zero_absorption == "all-slots":
        mask[0] = True
        mask[..., 0] = True
    return mask


def free_cell_count(task: EnumerationTask) -> int:
    n, g = task.order, task.gamma
    return int((~_forced_zero_mask(n, g, task.search_config)).sum())


def candidate_add_tables(task: EnumerationTask) -> Iterator[np.ndarray]:
    """枚举以 0 为单位元、满足配置中加法公理的加法表"""
    n = task.order
    cfg = task.search_config
    if task.fixed_add is not None:
        table = np.array(task.fixed_add, dtype=np.int64)
        if table.shape != (n, n):
            raise MalformedFile(f"固定加法表形状应为 ({n}, {n})")
        if not add_table_violation(table, cfg):
            yield table
        return
    if cfg.require_add_commutative:
        cells = [(a, b) for a in range(1, n) for b in range(a, n)]
    else:
        cells = [(a, b) for a in range(1, n) for b in range(1, n)]
    base = np.zeros((n, n), dtype=np.int64)
    base[0, :] = np.arange(n)
    base[:, 0] = np.arange(n)
    for values in itertools.product(range(n), repeat=len(cells)):
        table = base.copy()
        for (a, b), v in zip(cells, values):
            table[a, b] = v
            if cfg.require_add_commutative:
                table[b, a] = v
        if not add_table_violation(table, cfg):
            yield table


class _Search:
    """单个加法表下的三元表回溯搜索"""

    def __init__(self, task: EnumerationTask, add: np.ndarray, deadline: Optional[float]):
        self.task = task
        self.cfg = task.search_config
        self.add = add
        self.deadline = deadline
        n, g = task.order, task.gamma
        forced = _forced_zero_mask(n, g, self.cfg)
        self.template = np.where(forced, 0, -1).astype(np.int64)
        self.free_cells = [int(i) for i in np.flatnonzero(~forced.ravel())]

    def consistent(self, ternary: np.ndarray) -> bool:
        return not has_partial_violation(self.add, ternary, self.cfg)

    def prefixes(self, depth: int) -> List[Tuple[int, ...]]:
        """前 depth 个自由格子的所有一致赋值（按字典序）"""
        depth = min(depth, len(self.free_cells))
        result: List[Tuple[int, ...]] = []
        ternary = self.template.copy()

        def walk(k: int, chosen: Tuple[int, ...]):
            if k == depth:
                result.append(chosen)
                return
            flat = ternary.reshape(-1)
            for v in range(self.task.order):
                flat[self.free_cells[k]] = v
                if self.consistent(ternary):
                    walk(k + 1, chosen + (v,))
            flat[self.free_cells[k]] = -1

        if self.consistent(ternary):
            walk(0, ())
        return result

    def run(self, prefix: Sequence[int]) -> Iterator[np.ndarray]:
        ternary = self.template.copy()
        flat = ternary.reshape(-1)
        for cell, v in zip(self.free_cells, prefix):
            flat[cell] = v
        yield from self._dfs(ternary, flat, len(prefix))

    def _dfs(self, ternary: np.ndarray, flat: np.ndarray, k: int) -> Iterator[np.ndarray]:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise BudgetExhausted("枚举超出时间预算")
        if k == len(self.free_cells):
            yield ternary.copy()
            return
        cell = self.free_cells[k]
        for v in range(self.task.order):
            flat[cell] = v
            if self.consistent(ternary):
                yield from self._dfs(ternary, flat, k + 1)
        flat[cell] = -1


def _finish(task: EnumerationTask, add: np.ndarray, ternary: np.ndarray) -> GammaSemiring:
    S = GammaSemiring(add, ternary, task.axiom_config)
    # 全部格子赋值后部分检查即完整检查
    report = verify_axioms(GammaSemiring(add, ternary, task.search_config))
    if not report.valid:
        raise GammaError("剪枝放过了不满足公理的完整表", witness=report.violations[0])
    return S


def enumerate_structures(task: EnumerationTask) -> Iterator[GammaSemiring]:
    """
    按任务枚举全部合法结构

    参数:
        task (EnumerationTask): 阶、Γ 大小、公理配置与过滤条件

    返回:
        生成器，逐个产出合法结构；每个带标号的表恰好出现一次

    异常:
        SizeGuardExceeded: 自由格子数超过 ENUM_CELL_GUARD
        BudgetExhausted: 超出时间预算（partial 为已产出的结构）
    """
    check_guard(free_cell_count(task), config.ENUM_CELL_GUARD, "三元表候选格子")
    deadline = time.monotonic() + task.time_budget if task.time_budget is not None else None
    logger.debug("开始枚举: order=%s gamma=%s workers=%s", task.order, task.gamma, task.workers)
    emitted: List[GammaSemiring] = []
    try:
        if task.workers <= 1 or task.stable_order:
            for add in candidate_add_tables(task):
                search = _Search(task, add, deadline)
                for ternary in search.run(()):
                    S = _finish(task, add, ternary)
                    emitted.append(S)
                    yield S
        else:
            for S in _parallel(task, deadline):
                emitted.append(S)
                yield S
    except BudgetExhausted as e:
        raise BudgetExhausted(str(e), partial=list(emitted))
    logger.debug("枚举完成: %s 个结构", len(emitted))


def _parallel(task: EnumerationTask, deadline: Optional[float]) -> Iterator[GammaSemiring]:
    """按前 k 个自由格子划分搜索树，各分区并发探索"""
    jobs = []
    for add in candidate_add_tables(task):
        search = _Search(task, add, deadline)
        for prefix in search.prefixes(config.ENUM_PARTITION_CELLS):
            jobs.append((search, prefix))
    lock = Lock()
    progress = {"done": 0}

    def explore(search: _Search, prefix: Tuple[int, ...]) -> List[GammaSemiring]:
        found = [_finish(task, search.add, t) for t in search.run(prefix)]
        with lock:
            progress["done"] += 1
            logger.debug("分区 %s/%s 完成，找到 %s 个", progress["done"], len(jobs), len(found))
        return found

    with ThreadPoolExecutor(max_workers=task.workers) as executor:
        futures = [executor.submit(explore, search, prefix) for search, prefix in jobs]
        for future in as_completed(futures):
            yield from future.result()


def run_enumeration(task: EnumerationTask) -> EnumerationResult:
    """收集枚举结果；时间预算或 max_results 截断时标记为不完整"""
    structures: List[GammaSemiring] = []
    try:
        for S in enumerate_structures(task):
            structures.append(S)
            if task.max_results is not None and len(structures) >= task.max_results:
                return EnumerationResult(structures, complete=False, reason="max_results")
    except BudgetExhausted as e:
        logger.warning("枚举未完成: %s", e)
        return EnumerationResult(list(e.partial), complete=False, reason="time_budget")
    return EnumerationResult(structures, complete=True)


def count_up_to_iso(task: EnumerationTask) -> Tuple[int, int]:
    """
    返回:
        (带标号结构数, 同构类数)
    """
    labeled = 0
    hashes = set()
    for S in enumerate_structures(task):
        labeled += 1
        hashes.add(canonical_hash(S))
    return labeled, len(hashes)


def brute_force_structures(task: EnumerationTask) -> List[GammaSemiring]:
    """不剪枝的生成再过滤，用作交叉验证；只适合极小规模"""
    n, g = task.order, task.gamma
    cells = n * g * n * g * n
    check_guard(n ** cells, config.ENUM_CELL_GUARD, "穷举三元表")
    found = []
    for add in candidate_add_tables(task):
        for values in itertools.product(range(n), repeat=cells):
            ternary = np.array(values, dtype=np.int64).reshape(n, g, n, g, n)
            if verify_axioms(GammaSemiring(add, ternary, task.search_config)).valid:
                found.append(GammaSemiring(add, ternary, task.axiom_config))
    return found
