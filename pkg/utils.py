"""
通用工具
异常体系、规模保护、并查集、位集与混合进制编码、JSON 文件读写
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

import config

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# 异常
# ---------------------------------------------------------------------------

class GammaError(Exception):
    """所有 tgs 错误的基类，witness 保存可复现的反例"""

    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness

    def __str__(self) -> str:
        base = super().__str__()
        if self.witness is None:
            return base
        return f"{base}（反例: {self.witness}）"


class MalformedFile(GammaError):
    def __init__(self, message: str, line: Optional[int] = None):
        prefix = f"第 {line} 行: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


class IndexOutOfRange(GammaError):
    pass


class MissingZeroIdentity(GammaError):
    pass


class SizeGuardExceeded(GammaError):
    pass


class BudgetExhausted(GammaError):
    def __init__(self, message: str, partial: Optional[List[Any]] = None):
        super().__init__(message)
        self.partial = partial if partial is not None else []


class NotAnIdeal(GammaError):
    pass


class ImproperIdeal(GammaError):
    pass


class InvalidSystem(GammaError):
    pass


class NotWellDefined(GammaError):
    pass


class MaximalityFailed(GammaError):
    pass


class ActionNotClosed(GammaError):
    pass


class QuotientNotWellDefined(GammaError):
    pass


class GroupRequired(GammaError):
    pass


class NotASubmodule(GammaError):
    pass


class NotACover(GammaError):
    pass


class NotExactInput(GammaError):
    pass


class CorruptIndex(GammaError):
    pass


class IdentityRequired(GammaError):
    pass


class NotAComplex(GammaError):
    pass


class NotAHomomorphism(GammaError):
    pass


# 命令行按类别映射退出码：文件/格式类错误为 2
FILE_ERRORS: Tuple[type, ...] = (MalformedFile, IndexOutOfRange, MissingZeroIdentity, CorruptIndex)


def check_guard(value: int, limit: int, what: str) -> None:
    """
    规模保护检查

    参数:
        value (int): 实际规模
        limit (int): 未缩放的上限（会乘以 TGS_GUARD）
        what (str): 出错时报告的对象名

    异常:
        SizeGuardExceeded: 超过缩放后的上限
    """
    allowed = config.scaled_guard(limit)
    if value > allowed:
        raise SizeGuardExceeded(f"{what} 规模 {value} 超过上限 {allowed}（可通过 TGS_GUARD 放大）")


# ---------------------------------------------------------------------------
# 并查集
# ---------------------------------------------------------------------------

class UnionFind:
    """基于整数下标的并查集，路径压缩 + 按秩合并"""

    def __init__(self, size: int):
        self.parent: List[int] = list(range(size))
        self.rank: List[int] = [0] * size

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        """
        合并 x 与 y 所在的集合

        返回:
            bool: 是否发生了合并（原先不在同一集合）
        """
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if self.rank[rx] < self.rank[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        if self.rank[rx] == self.rank[ry]:
            self.rank[rx] += 1
        return True

    def connected(self, x: int, y: int) -> bool:
        return self.find(x) == self.find(y)

    def labels(self, zero: Optional[int] = 0) -> Tuple[List[int], int]:
        """
        为每个元素给出所属类的编号

        编号规则：zero 所在类为 0，其余类按最小成员的顺序编号

        返回:
            Tuple[List[int], int]: (每个元素的类编号, 类的个数)
        """
        size = len(self.parent)
        label: Dict[int, int] = {}
        if zero is not None and size:
            label[self.find(zero)] = 0
        result = []
        for x in range(size):
            root = self.find(x)
            if root not in label:
                label[root] = len(label)
            result.append(label[root])
        return result, len(label)


# ---------------------------------------------------------------------------
# 位集
# ---------------------------------------------------------------------------

def to_bits(elements: Iterable[int]) -> int:
    bits = 0
    for x in elements:
        bits |= 1 << int(x)
    return bits


def from_bits(bits: int) -> List[int]:
    result = []
    i = 0
    while bits:
        if bits & 1:
            result.append(i)
        bits >>= 1
        i += 1
    return result


def popcount(bits: int) -> int:
    return bin(bits).count("1")


def parse_label_list(text: str) -> List[int]:
    """把 "1,2,4" 这样的命令行参数解析为整数列表"""
    text = text.strip()
    if not text:
        return []
    try:
        return [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise MalformedFile(f"无法解析标签列表: {text!r}")


# ---------------------------------------------------------------------------
# 混合进制编码（直和、自由模的元素编号）
# ---------------------------------------------------------------------------

def radix_vectors(sizes: Sequence[int]) -> np.ndarray:
    """
    所有分量向量，按编码顺序排列（第一个分量为最高位）

    返回:
        np.ndarray: 形状为 (prod(sizes), len(sizes)) 的整数数组
    """
    total = int(np.prod(sizes, dtype=np.int64)) if len(sizes) else 1
    if not len(sizes):
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.unravel_index(np.arange(total, dtype=np.int64), tuple(sizes))
    return np.stack(grids, axis=1).astype(np.int64)


def radix_weights(sizes: Sequence[int]) -> np.ndarray:
    weights = np.ones(len(sizes), dtype=np.int64)
    for i in range(len(sizes) - 2, -1, -1):
        weights[i] = weights[i + 1] * sizes[i + 1]
    return weights


def radix_encode(vectors: np.ndarray, sizes: Sequence[int]) -> np.ndarray:
    if not len(sizes):
        return np.zeros(vectors.shape[:-1], dtype=np.int64)
    return np.asarray(vectors, dtype=np.int64) @ radix_weights(sizes)


# ---------------------------------------------------------------------------
# 文件
# ---------------------------------------------------------------------------

def read_text(path: Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise MalformedFile(f"无法读取文件 {path}: {e}")


def load_json(path: Path) -> Dict[str, Any]:
    """
    读取 JSON 文件

    参数:
        path (Path): 文件路径

    返回:
        dict: 解析后的内容；文件不存在时返回空字典

    异常:
        CorruptIndex: 文件存在但不是合法 JSON 对象
    """
    path = Path(path)
    if not path.exists():
        return {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise CorruptIndex(f"{path} JSON 格式错误: {e}")
    except OSError as e:
        raise CorruptIndex(f"无法读取 {path}: {e}")
    if not isinstance(data, dict):
        raise CorruptIndex(f"{path} 顶层必须是 JSON 对象")
    return data


def write_json(path: Path, data: Dict[str, Any]) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8") as f:
        json.dump(data, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")
    tmp.replace(path)


def chunked(values: Sequence[int], width: int) -> Iterator[Sequence[int]]:
    for start in range(0, len(values), width):
        yield values[start:start + width]
