"""
有限三元 Γ-半环的核心表示

载体为 0..n-1（0 为加法单位元），参数集 Γ 为 0..g-1。
加法表 add 形状 (n, n)，三元表 ternary 形状 (n, g, n, g, n)，
按 (a, α, b, β, c) 索引，对应运算 aαbβc。
"""

import hashlib
import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Dict, Iterator, List, Literal, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

import config
from utils import (
    IndexOutOfRange,
    MalformedFile,
    MissingZeroIdentity,
    check_guard,
    chunked,
    read_text,
)

logger = logging.getLogger(__name__)

Commutativity = Literal["swap12", "full-symmetric", "off"]
ZeroAbsorption = Literal["middle", "all-slots"]


class AxiomConfig(BaseModel):
    """公理配置：各处可选的约定在此显式记录"""

    model_config = ConfigDict(frozen=True)

    commutativity: Commutativity = "swap12"
    zero_absorption: ZeroAbsorption = "all-slots"
    require_add_commutative: bool = True
    require_add_associative: bool = True

    def to_line(self) -> str:
        def flag(value: bool) -> str:
            return "on" if value else "off"

        return (
            f"axioms commutativity={self.commutativity} zero_absorption={self.zero_absorption} "
            f"add_commutative={flag(self.require_add_commutative)} "
            f"add_associative={flag(self.require_add_associative)}"
        )

    @classmethod
    def from_tokens(cls, tokens: Sequence[str], line: Optional[int] = None) -> "AxiomConfig":
        """
        从 key=value 形式的记号解析配置

        参数:
            tokens: 例如 ["commutativity=swap12", "add_commutative=on"]
            line: 出错时报告的行号

        异常:
            MalformedFile: 未知键或非法取值
        """
        keys = {
            "commutativity": "commutativity",
            "zero_absorption": "zero_absorption",
            "add_commutative": "require_add_commutative",
            "add_associative": "require_add_associative",
        }
        values: Dict[str, object] = {}
        for token in tokens:
            if "=" not in token:
                raise MalformedFile(f"axioms 项必须形如 key=value: {token!r}", line)
            key, value = token.split("=", 1)
            if key not in keys:
                raise MalformedFile(f"未知的公理配置项 {key!r}", line)
            field_name = keys[key]
            if field_name.startswith("require_"):
                if value not in ("on", "off"):
                    raise MalformedFile(f"{key} 只能是 on/off，得到 {value!r}", line)
                values[field_name] = value == "on"
            else:
                values[field_name] = value
        try:
            return cls(**values)
        except ValidationError as e:
            raise MalformedFile(f"公理配置非法: {e.errors()[0]['msg']}", line)

    def with_commutativity_enforced(self) -> "AxiomConfig":
        if self.commutativity != "off":
            return self
        return self.model_copy(update={"commutativity": "swap12"})


class Violation(BaseModel):
    axiom: str
    witness: Tuple[int, ...]


class AxiomReport(BaseModel):
    valid: bool
    violations: List[Violation] = []
    check_count: int = 0


@dataclass(frozen=True)
class Relabeling:
    """载体置换（固定 0）与 Γ 置换，carrier[x] 为 x 的新标签"""

    carrier: Tuple[int, ...]
    gamma: Tuple[int, ...]

    @classmethod
    def identity(cls, n: int, g: int) -> "Relabeling":
        return cls(tuple(range(n)), tuple(range(g)))

    def inverse(self) -> "Relabeling":
        return Relabeling(
            tuple(int(x) for x in np.argsort(self.carrier)),
            tuple(int(x) for x in np.argsort(self.gamma)),
        )

    def then(self, other: "Relabeling") -> "Relabeling":
        """先做 self 再做 other"""
        return Relabeling(
            tuple(other.carrier[x] for x in self.carrier),
            tuple(other.gamma[x] for x in self.gamma),
        )

    @property
    def is_identity(self) -> bool:
        return self.carrier == tuple(range(len(self.carrier))) and self.gamma == tuple(range(len(self.gamma)))


@dataclass(frozen=True, eq=False)
class GammaSemiring:
    """
    有限三元 Γ-半环（表格表示，构造后不可变）

    构造时检查表格形状、取值范围以及 0 是加法单位元；
    公理本身由 verify_axioms 检查，不在构造时强制。
    """

    add: np.ndarray
    ternary: np.ndarray
    axiom_config: AxiomConfig = AxiomConfig()

    def __post_init__(self):
        add = np.array(self.add, dtype=np.int64)
        ternary = np.array(self.ternary, dtype=np.int64)
        if add.ndim != 2 or add.shape[0] != add.shape[1] or add.shape[0] < 1:
            raise MalformedFile(f"加法表形状必须为 (n, n)，得到 {add.shape}")
        n = add.shape[0]
        if ternary.ndim != 5 or ternary.shape[0] != n or ternary.shape[2] != n or ternary.shape[4] != n:
            raise MalformedFile(f"三元表形状必须为 (n, g, n, g, n)，得到 {ternary.shape}")
        if ternary.shape[1] != ternary.shape[3] or ternary.shape[1] < 1:
            raise MalformedFile(f"三元表的两个 Γ 维度必须相同且为正，得到 {ternary.shape}")
        for name, table in (("add", add), ("ternary", ternary)):
            bad = np.argwhere((table < 0) | (table >= n))
            if len(bad):
                index = tuple(int(i) for i in bad[0])
                raise IndexOutOfRange(
                    f"{name} 表项 {int(table[index])} 超出载体范围 0..{n - 1}", witness=index
                )
        labels = np.arange(n)
        if not (np.array_equal(add[0], labels) and np.array_equal(add[:, 0], labels)):
            row = int(np.argmax((add[0] != labels) | (add[:, 0] != labels)))
            raise MissingZeroIdentity("加法表的第 0 行/列必须是恒等映射", witness=(row,))
        add.flags.writeable = False
        ternary.flags.writeable = False
        object.__setattr__(self, "add", add)
        object.__setattr__(self, "ternary", ternary)

    @property
    def order(self) -> int:
        return int(self.add.shape[0])

    @property
    def gamma(self) -> int:
        return int(self.ternary.shape[1])

    @property
    def carrier(self) -> range:
        return range(self.order)

    def t(self, a: int, alpha: int, b: int, beta: int, c: int) -> int:
        return int(self.ternary[a, alpha, b, beta, c])

    def plus(self, a: int, b: int) -> int:
        return int(self.add[a, b])

    def same_tables(self, other: "GammaSemiring") -> bool:
        return np.array_equal(self.add, other.add) and np.array_equal(self.ternary, other.ternary)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GammaSemiring):
            return NotImplemented
        return self.same_tables(other) and self.axiom_config == other.axiom_config

    def __hash__(self) -> int:
        return hash((self.add.tobytes(), self.ternary.tobytes(), self.ternary.shape))

    @cached_property
    def negation(self) -> Optional[np.ndarray]:
        """加法逆元表；不是加法群时为 None"""
        hits = self.add == 0
        if not hits.any(axis=1).all():
            return None
        return np.argmax(hits, axis=1)

    @property
    def is_group_based(self) -> bool:
        return self.negation is not None

    @cached_property
    def identity_element(self) -> Optional[int]:
        return multiplicative_identity(self)

    def __repr__(self) -> str:
        return f"GammaSemiring(order={self.order}, gamma={self.gamma}, {self.axiom_config.to_line()})"


# ---------------------------------------------------------------------------
# 文件格式
# ---------------------------------------------------------------------------

_STRUCTURE_BLOCKS = ("add", "ternary", "ternary1")


def _read_blocks(text: str, header_keys: Sequence[str], block_keys: Sequence[str]):
    """
    解析 "key value" 头部与数字块，供结构文件与模文件共用

    返回:
        (头部字典 {key: (值记号列表, 行号)}, 数字块 {key: (数值列表, 起始行号, 每个值的行号)})
    """
    header: Dict[str, Tuple[List[str], int]] = {}
    blocks: Dict[str, Tuple[List[int], int, List[int]]] = {}
    current: Optional[str] = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0]
        if head in header_keys:
            if head in header:
                raise MalformedFile(f"重复的关键字 {head}", lineno)
            header[head] = (tokens[1:], lineno)
            current = None
            continue
        if head in block_keys:
            if head in blocks:
                raise MalformedFile(f"重复的数据块 {head}", lineno)
            blocks[head] = ([], lineno, [])
            current = head
            tokens = tokens[1:]
        elif current is None:
            raise MalformedFile(f"未知的关键字 {head!r}", lineno)
        values, _, lines = blocks[current]
        for token in tokens:
            try:
                values.append(int(token))
            except ValueError:
                raise MalformedFile(f"{current} 块中出现非整数 {token!r}", lineno)
            lines.append(lineno)
    return header, blocks


def _header_int(header, key: str) -> int:
    if key not in header:
        raise MalformedFile(f"缺少关键字 {key}")
    tokens, lineno = header[key]
    if len(tokens) != 1:
        raise MalformedFile(f"{key} 需要恰好一个整数", lineno)
    try:
        value = int(tokens[0])
    except ValueError:
        raise MalformedFile(f"{key} 的值不是整数: {tokens[0]!r}", lineno)
    if value < 1:
        raise MalformedFile(f"{key} 必须为正整数", lineno)
    return value


def _block(blocks, key: str, expected: int, bound: int) -> np.ndarray:
    values, start, lines = blocks[key]
    if len(values) != expected:
        raise MalformedFile(f"{key} 块需要 {expected} 个整数，实际 {len(values)} 个", start)
    for position, (value, lineno) in enumerate(zip(values, lines)):
        if value < 0 or value >= bound:
            raise IndexOutOfRange(
                f"第 {lineno} 行: {key} 的第 {position} 个值 {value} 超出范围 0..{bound - 1}",
                witness=(key, position),
            )
    return np.array(values, dtype=np.int64)


def parse_structure(text: str) -> GammaSemiring:
    """
    解析结构文件

    参数:
        text (str): 结构文件文本

    返回:
        GammaSemiring: 解析得到的结构

    异常:
        MalformedFile: 格式错误（带行号）
        IndexOutOfRange: 表项超出载体
        MissingZeroIdentity: 0 不是加法单位元
    """
    header, blocks = _read_blocks(text, ("order", "gamma", "axioms"), _STRUCTURE_BLOCKS)
    n = _header_int(header, "order")
    g = _header_int(header, "gamma")
    axiom_config = AxiomConfig()
    if "axioms" in header:
        tokens, lineno = header["axioms"]
        axiom_config = AxiomConfig.from_tokens(tokens, lineno)
    if "add" not in blocks:
        raise MalformedFile("缺少 add 块")
    add = _block(blocks, "add", n * n, n).reshape(n, n)
    if "ternary" in blocks and "ternary1" in blocks:
        raise MalformedFile("ternary 与 ternary1 不能同时出现", blocks["ternary1"][1])
    if "ternary" in blocks:
        ternary = _block(blocks, "ternary", n * g * n * g * n, n).reshape(n, g, n, g, n)
    elif "ternary1" in blocks:
        # 单参数表 {a b c}_γ 读作 β = 0 的切片，其余 β 的切片与之相同
        single = _block(blocks, "ternary1", n * g * n * n, n).reshape(n, g, n, n)
        ternary = np.empty((n, g, n, g, n), dtype=np.int64)
        ternary[:, :, :, 0, :] = single
        ternary[:, :, :, 1:, :] = single[:, :, :, None, :]
    else:
        raise MalformedFile("缺少 ternary 块")
    return GammaSemiring(add, ternary, axiom_config)


def serialize_structure(S: GammaSemiring) -> str:
    """规范文本表示：加法表每行 n 个，三元表按扁平顺序每行 n 个"""
    n = S.order
    lines = [f"order {n}", f"gamma {S.gamma}", S.axiom_config.to_line(), "add"]
    lines += [" ".join(str(int(x)) for x in row) for row in S.add]
    lines.append("ternary")
    flat = S.ternary.ravel().tolist()
    lines += [" ".join(str(x) for x in row) for row in chunked(flat, n)]
    return "\n".join(lines) + "\n"


def load_structure(path) -> GammaSemiring:
    return parse_structure(read_text(Path(path)))


def save_structure(S: GammaSemiring, path) -> None:
    Path(path).write_text(serialize_structure(S), encoding="utf-8")


def structure_from_functions(n: int, g: int, add_fn, ternary_fn,
                             axiom_config: Optional[AxiomConfig] = None) -> GammaSemiring:
    """用 Python 函数生成表格，主要用于构造测试语料"""
    add = np.array([[add_fn(a, b) for b in range(n)] for a in range(n)], dtype=np.int64)
    ternary = np.empty((n, g, n, g, n), dtype=np.int64)
    for a, alpha, b, beta, c in itertools.product(range(n), range(g), range(n), range(g), range(n)):
        ternary[a, alpha, b, beta, c] = ternary_fn(a, alpha, b, beta, c)
    return GammaSemiring(add, ternary, axiom_config or AxiomConfig())


# ---------------------------------------------------------------------------
# 公理检查（向量化；表项 -1 表示尚未赋值，相关恒等式跳过）
# ---------------------------------------------------------------------------

class Masked(NamedTuple):
    v: np.ndarray
    m: np.ndarray


def masked_lookup(table: np.ndarray, *args) -> Masked:
    """带掩码的查表；参数可以是网格下标或上一次查表的结果"""
    idx = []
    mask = None
    for arg in args:
        if isinstance(arg, Masked):
            idx.append(np.where(arg.m, arg.v, 0))
            mask = arg.m if mask is None else (mask & arg.m)
        else:
            idx.append(arg)
    values = table[tuple(idx)]
    defined = values >= 0
    if mask is not None:
        defined = defined & mask
    return Masked(values, defined)


def index_grid(*sizes: int):
    return np.ix_(*[np.arange(s) for s in sizes])


def constant(value: int) -> Masked:
    return Masked(np.array(value), np.array(True))


# (名称, 坐标轴, 左边, 右边, 额外掩码)
Identity = Tuple[str, Tuple[str, ...], Masked, Masked, Optional[np.ndarray]]


def _identities(add: np.ndarray, ternary: np.ndarray, cfg: AxiomConfig,
                include_add: bool = True) -> Iterator[Identity]:
    n = add.shape[0]
    g = ternary.shape[1]
    A, T = add, ternary

    if include_add and cfg.require_add_associative:
        a, b, c = index_grid(n, n, n)
        yield ("add_associativity", ("a", "b", "c"),
               masked_lookup(A, masked_lookup(A, a, b), c), masked_lookup(A, a, masked_lookup(A, b, c)), None)
    if include_add and cfg.require_add_commutative:
        a, b = index_grid(n, n)
        yield ("add_commutativity", ("a", "b"), masked_lookup(A, a, b), masked_lookup(A, b, a), None)

    five = ("a", "alpha", "b", "beta", "c")
    a, al, b, be, c = index_grid(n, g, n, g, n)
    value = masked_lookup(T, a, al, b, be, c)
    yield ("neutrality_middle", five, value, constant(0), np.broadcast_to(b == 0, value.v.shape))
    if cfg.zero_absorption == "all-slots":
        yield ("neutrality_left", five, value, constant(0), np.broadcast_to(a == 0, value.v.shape))
        yield ("neutrality_right", five, value, constant(0), np.broadcast_to(c == 0, value.v.shape))
    if cfg.commutativity in ("swap12", "full-symmetric"):
        yield ("commutativity_12", five, value, masked_lookup(T, b, al, a, be, c), None)
    if cfg.commutativity == "full-symmetric":
        yield ("commutativity_23", five, value, masked_lookup(T, a, al, c, be, b), None)

    a, a2, al, b, be, c = index_grid(n, n, g, n, g, n)
    yield ("distributivity_1", ("a", "a2", "alpha", "b", "beta", "c"),
           masked_lookup(T, masked_lookup(A, a, a2), al, b, be, c),
           masked_lookup(A, masked_lookup(T, a, al, b, be, c), masked_lookup(T, a2, al, b, be, c)), None)
    a, al, b, b2, be, c = index_grid(n, g, n, n, g, n)
    yield ("distributivity_2", ("a", "alpha", "b", "b2", "beta", "c"),
           masked_lookup(T, a, al, masked_lookup(A, b, b2), be, c),
           masked_lookup(A, masked_lookup(T, a, al, b, be, c), masked_lookup(T, a, al, b2, be, c)), None)
    a, al, b, be, c, c2 = index_grid(n, g, n, g, n, n)
    yield ("distributivity_3", ("a", "alpha", "b", "beta", "c", "c2"),
           masked_lookup(T, a, al, b, be, masked_lookup(A, c, c2)),
           masked_lookup(A, masked_lookup(T, a, al, b, be, c), masked_lookup(T, a, al, b, be, c2)), None)

    nine = ("a", "alpha", "b", "beta", "c", "gamma", "d", "delta", "e")
    a, al, b, be, c, ga, d, de, e = index_grid(n, g, n, g, n, g, n, g, n)
    form1 = masked_lookup(T, masked_lookup(T, a, al, b, be, c), ga, d, de, e)
    form2 = masked_lookup(T, a, al, masked_lookup(T, b, be, c, ga, d), de, e)
    form3 = masked_lookup(T, a, al, b, be, masked_lookup(T, c, ga, d, de, e))
    yield ("associativity_12", nine, form1, form2, None)
    yield ("associativity_23", nine, form2, form3, None)


def compare_sides(lhs: Masked, rhs: Masked, extra: Optional[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    lv, rv, lm, rm = np.broadcast_arrays(lhs.v, rhs.v, lhs.m, rhs.m)
    defined = lm & rm
    if extra is not None:
        defined = defined & extra
    return defined, defined & (lv != rv)


def collect_report(identities: Iterator[Identity]) -> AxiomReport:
    """把一组恒等式的比较结果汇总成 AxiomReport"""
    violations: List[Violation] = []
    check_count = 0
    limit = config.MAX_WITNESSES_PER_AXIOM
    for name, _, lhs, rhs, extra in identities:
        defined, bad = compare_sides(lhs, rhs, extra)
        check_count += int(defined.sum())
        for index in np.argwhere(bad)[:limit]:
            violations.append(Violation(axiom=name, witness=tuple(int(i) for i in index)))
    return AxiomReport(valid=not violations, violations=violations, check_count=check_count)


def first_failure(identities: Iterator[Identity]) -> Optional[Violation]:
    for name, _, lhs, rhs, extra in identities:
        _, bad = compare_sides(lhs, rhs, extra)
        if bad.any():
            return Violation(axiom=name, witness=tuple(int(i) for i in np.argwhere(bad)[0]))
    return None


def verify_axioms(S: GammaSemiring) -> AxiomReport:
    """
    穷举检查全部公理

    参数:
        S (GammaSemiring): 待检查的结构

    返回:
        AxiomReport: valid 为 True 当且仅当没有反例；check_count 为实际比较的恒等式个数
    """
    report = collect_report(_identities(S.add, S.ternary, S.axiom_config))
    logger.debug("verify_axioms: %s 个恒等式, %s 个反例", report.check_count, len(report.violations))
    return report


def has_partial_violation(add: np.ndarray, ternary: np.ndarray, cfg: AxiomConfig,
                          include_add: bool = False) -> bool:
    """部分赋值（-1 表示未定）下是否已有某个完全实例化的恒等式失败"""
    return first_failure(_identities(add, ternary, cfg, include_add=include_add)) is not None


def add_table_violation(add: np.ndarray, cfg: AxiomConfig) -> bool:
    n = add.shape[0]
    A = add
    if cfg.require_add_commutative and not np.array_equal(A, A.T):
        return True
    if cfg.require_add_associative:
        a, b, c = index_grid(n, n, n)
        if not np.array_equal(A[A[a, b], c], A[a, A[b, c]]):
            return True
    return False


def replay_violation(S: GammaSemiring, violation: Violation) -> bool:
    """
    在见证元组上重新逐点计算该恒等式

    返回:
        bool: 恒等式确实失败时为 True
    """
    A = S.add
    t = S.t
    w = violation.witness
    name = violation.axiom
    if name == "add_associativity":
        a, b, c = w
        return A[A[a, b], c] != A[a, A[b, c]]
    if name == "add_commutativity":
        a, b = w
        return A[a, b] != A[b, a]
    if name.startswith("neutrality"):
        a, al, b, be, c = w
        slot = {"neutrality_middle": b, "neutrality_left": a, "neutrality_right": c}[name]
        return slot == 0 and t(a, al, b, be, c) != 0
    if name == "commutativity_12":
        a, al, b, be, c = w
        return t(a, al, b, be, c) != t(b, al, a, be, c)
    if name == "commutativity_23":
        a, al, b, be, c = w
        return t(a, al, b, be, c) != t(a, al, c, be, b)
    if name == "distributivity_1":
        a, a2, al, b, be, c = w
        return t(A[a, a2], al, b, be, c) != A[t(a, al, b, be, c), t(a2, al, b, be, c)]
    if name == "distributivity_2":
        a, al, b, b2, be, c = w
        return t(a, al, A[b, b2], be, c) != A[t(a, al, b, be, c), t(a, al, b2, be, c)]
    if name == "distributivity_3":
        a, al, b, be, c, c2 = w
        return t(a, al, b, be, A[c, c2]) != A[t(a, al, b, be, c), t(a, al, b, be, c2)]
    if name in ("associativity_12", "associativity_23"):
        a, al, b, be, c, ga, d, de, e = w
        f1 = t(t(a, al, b, be, c), ga, d, de, e)
        f2 = t(a, al, t(b, be, c, ga, d), de, e)
        f3 = t(a, al, b, be, t(c, ga, d, de, e))
        return f1 != f2 if name == "associativity_12" else f2 != f3
    raise ValueError(f"未知的公理名 {name!r}")


# ---------------------------------------------------------------------------
# 重标号、规范形与同构
# ---------------------------------------------------------------------------

def relabel(S: GammaSemiring, relabeling: Relabeling) -> GammaSemiring:
    pi = np.array(relabeling.carrier, dtype=np.int64)
    if pi[0] != 0:
        raise ValueError("载体置换必须固定 0")
    inv = np.argsort(pi)
    sinv = np.argsort(np.array(relabeling.gamma, dtype=np.int64))
    add = pi[S.add[np.ix_(inv, inv)]]
    ternary = pi[S.ternary[np.ix_(inv, sinv, inv, sinv, inv)]]
    return GammaSemiring(add, ternary, S.axiom_config)


def canonical_form(S: GammaSemiring) -> Tuple[GammaSemiring, Relabeling]:
    """
    规范形：在所有固定 0 的载体置换与所有 Γ 置换下字典序最小的表对

    返回:
        (规范结构, 实现它的重标号)

    异常:
        SizeGuardExceeded: 置换数超过 CANONICAL_PERM_GUARD
    """
    n, g = S.order, S.gamma
    check_guard(math.factorial(n - 1) * math.factorial(g), config.CANONICAL_PERM_GUARD, "规范形置换")
    best_key: Optional[List[int]] = None
    best: Optional[Tuple[np.ndarray, np.ndarray, Relabeling]] = None
    gamma_perms = [np.array(p, dtype=np.int64) for p in itertools.permutations(range(g))]
    for rest in itertools.permutations(range(1, n)):
        pi = np.array((0,) + rest, dtype=np.int64)
        inv = np.argsort(pi)
        add = pi[S.add[np.ix_(inv, inv)]]
        add_key = add.ravel().tolist()
        if best_key is not None and add_key > best_key[:n * n]:
            continue
        for sigma in gamma_perms:
            sinv = np.argsort(sigma)
            ternary = pi[S.ternary[np.ix_(inv, sinv, inv, sinv, inv)]]
            key = add_key + ternary.ravel().tolist()
            if best_key is None or key < best_key:
                best_key = key
                best = (add, ternary, Relabeling(tuple(int(x) for x in pi), tuple(int(x) for x in sigma)))
    add, ternary, relabeling = best
    return GammaSemiring(add, ternary, S.axiom_config), relabeling


def canonical_hash(S: GammaSemiring) -> str:
    canonical, _ = canonical_form(S)
    return hashlib.sha256(serialize_structure(canonical).encode("utf-8")).hexdigest()


def isomorphic(S1: GammaSemiring, S2: GammaSemiring) -> Optional[Relabeling]:
    """
    判断两个结构是否同构

    返回:
        Optional[Relabeling]: 把 S1 的表逐项搬运到 S2 的重标号；不同构时为 None
    """
    if S1.order != S2.order or S1.gamma != S2.gamma:
        return None
    c1, r1 = canonical_form(S1)
    c2, r2 = canonical_form(S2)
    if not c1.same_tables(c2):
        return None
    return r1.then(r2.inverse())


# ---------------------------------------------------------------------------
# 单位元、可逆元、态射、积、同余
# ---------------------------------------------------------------------------

def multiplicative_identity(S: GammaSemiring) -> Optional[int]:
    """满足 eαeβa = a（对所有 a, α, β）的最小元素 e"""
    labels = np.arange(S.order)
    for e in S.carrier:
        if np.all(S.ternary[e, :, e, :, :] == labels):
            return e
    return None


def is_unit(S: GammaSemiring, u: int) -> bool:
    """存在 v 使 uαvβx = x 对所有 x, α, β 成立"""
    labels = np.arange(S.order)
    return any(np.all(S.ternary[u, :, v, :, :] == labels) for v in S.carrier)


def units(S: GammaSemiring) -> List[int]:
    return [u for u in S.carrier if is_unit(S, u)]


def is_morphism(S: GammaSemiring, R: GammaSemiring, f: Sequence[int]) -> bool:
    """Γ-半环态射：f(0)=0，保持加法与三元运算（两边 Γ 相同）"""
    if S.gamma != R.gamma or len(f) != S.order:
        return False
    f = np.asarray(f, dtype=np.int64)
    if f[0] != 0:
        return False
    if not np.array_equal(f[S.add], R.add[np.ix_(f, f)]):
        return False
    return np.array_equal(f[S.ternary], R.ternary[np.ix_(f, np.arange(S.gamma), f, np.arange(S.gamma), f)])


def all_morphisms(S: GammaSemiring, R: GammaSemiring) -> List[Tuple[int, ...]]:
    if S.gamma != R.gamma:
        return []
    check_guard(R.order ** (S.order - 1), config.HOM_SEARCH_GUARD, "半环态射搜索")
    result = []
    for rest in itertools.product(range(R.order), repeat=S.order - 1):
        f = (0,) + rest
        if is_morphism(S, R, f):
            result.append(f)
    return result


def product_structure(S1: GammaSemiring, S2: GammaSemiring) -> GammaSemiring:
    """直积，元素 (x1, x2) 编号为 x1·|S2| + x2"""
    if S1.gamma != S2.gamma:
        raise ValueError("直积要求相同的 Γ")
    n2 = S2.order
    codes = np.arange(S1.order * n2)
    x1, x2 = codes // n2, codes % n2
    add = S1.add[np.ix_(x1, x1)] * n2 + S2.add[np.ix_(x2, x2)]
    gs = np.arange(S1.gamma)
    ternary = (S1.ternary[np.ix_(x1, gs, x1, gs, x1)] * n2
               + S2.ternary[np.ix_(x2, gs, x2, gs, x2)])
    return GammaSemiring(add, ternary, S1.axiom_config)


def is_congruence(S: GammaSemiring, labels: Sequence[int]) -> Tuple[bool, Optional[Tuple]]:
    """
    Γ-同余检查：labels[x] 为 x 所在等价类

    返回:
        (是否相容, 反例)；反例形如 ("add", a, a2, b) 或 ("slot1", a, a2, α, b, β, c)
    """
    lab = np.asarray(labels, dtype=np.int64)
    n, g = S.order, S.gamma
    A, T = S.add, S.ternary
    same = lab[:, None] == lab[None, :]
    a, a2, b = index_grid(n, n, n)
    bad = same[a, a2] & (lab[A[a, b]] != lab[A[a2, b]])
    if bad.any():
        return False, ("add",) + tuple(int(i) for i in np.argwhere(bad)[0])
    a, a2, al, b, be, c = index_grid(n, n, g, n, g, n)
    checks = {
        "slot1": lab[T[a, al, b, be, c]] != lab[T[a2, al, b, be, c]],
        "slot2": lab[T[b, al, a, be, c]] != lab[T[b, al, a2, be, c]],
        "slot3": lab[T[b, al, c, be, a]] != lab[T[b, al, c, be, a2]],
    }
    for slot, differs in checks.items():
        bad = same[a, a2] & differs
        if bad.any():
            return False, (slot,) + tuple(int(i) for i in np.argwhere(bad)[0])
    return True, None
