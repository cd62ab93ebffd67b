"""
有限 Γ-模

作用表 action 形状 (n, g, m, g, n)，按 (a, α, x, β, b) 索引，对应 aαxβb。
同态、自由模、Hom 模、张量积（合同闭包求商），以及群情形下的核、像、商。
"""

import itertools
import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

import config
from core import (
    AxiomReport,
    GammaSemiring,
    Identity,
    _read_blocks,
    _header_int,
    _block,
    collect_report,
    constant,
    first_failure,
    index_grid,
    masked_lookup,
    parse_structure,
    serialize_structure,
    load_structure,
)
from utils import (
    ActionNotClosed,
    GroupRequired,
    IdentityRequired,
    IndexOutOfRange,
    MalformedFile,
    MissingZeroIdentity,
    NotAHomomorphism,
    NotASubmodule,
    QuotientNotWellDefined,
    UnionFind,
    check_guard,
    chunked,
    radix_encode,
    radix_vectors,
    radix_weights,
    read_text,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GammaModule:
    """有限 Γ-模（表格表示）；group_based 由加法表计算得出"""

    base: GammaSemiring
    add: np.ndarray
    action: np.ndarray

    def __post_init__(self):
        add = np.array(self.add, dtype=np.int64)
        action = np.array(self.action, dtype=np.int64)
        n, g = self.base.order, self.base.gamma
        if add.ndim != 2 or add.shape[0] != add.shape[1] or add.shape[0] < 1:
            raise MalformedFile(f"模加法表形状必须为 (m, m)，得到 {add.shape}")
        m = add.shape[0]
        if action.shape != (n, g, m, g, n):
            raise MalformedFile(f"作用表形状必须为 {(n, g, m, g, n)}，得到 {action.shape}")
        for name, table in (("add", add), ("action", action)):
            bad = np.argwhere((table < 0) | (table >= m))
            if len(bad):
                index = tuple(int(i) for i in bad[0])
                raise IndexOutOfRange(f"模 {name} 表项超出范围 0..{m - 1}", witness=index)
        labels = np.arange(m)
        if not (np.array_equal(add[0], labels) and np.array_equal(add[:, 0], labels)):
            raise MissingZeroIdentity("模加法表的第 0 行/列必须是恒等映射")
        add.flags.writeable = False
        action.flags.writeable = False
        object.__setattr__(self, "add", add)
        object.__setattr__(self, "action", action)

    @property
    def size(self) -> int:
        return int(self.add.shape[0])

    @property
    def carrier(self) -> range:
        return range(self.size)

    def act(self, a: int, alpha: int, x: int, beta: int, b: int) -> int:
        return int(self.action[a, alpha, x, beta, b])

    def plus(self, x: int, y: int) -> int:
        return int(self.add[x, y])

    @cached_property
    def negation(self) -> Optional[np.ndarray]:
        hits = self.add == 0
        if not hits.any(axis=1).all():
            return None
        return np.argmax(hits, axis=1)

    @property
    def group_based(self) -> bool:
        return self.negation is not None

    def neg(self, x: int) -> int:
        if self.negation is None:
            raise GroupRequired("模不是加法群，无法取负元")
        return int(self.negation[x])

    def minus(self, x: int, y: int) -> int:
        return int(self.add[x, self.neg(y)])

    def multiple(self, k: int, x: int) -> int:
        """k·x = x + ... + x（k 次，倍增法）"""
        result, power = 0, x
        while k:
            if k & 1:
                result = int(self.add[result, power])
            power = int(self.add[power, power])
            k >>= 1
        return result

    def same_tables(self, other: "GammaModule") -> bool:
        return np.array_equal(self.add, other.add) and np.array_equal(self.action, other.action)

    def __repr__(self) -> str:
        return f"GammaModule(size={self.size}, base_order={self.base.order}, group_based={self.group_based})"


def require_group(*modules: GammaModule, what: str = "该运算") -> None:
    for M in modules:
        if not M.group_based:
            raise GroupRequired(f"{what} 要求加法群模，{M!r} 不是")


def regular_module(S: GammaSemiring) -> GammaModule:
    """S 以自身三元运算作用于自身"""
    return GammaModule(S, S.add, S.ternary)


def zero_module(S: GammaSemiring) -> GammaModule:
    n, g = S.order, S.gamma
    return GammaModule(S, np.zeros((1, 1), dtype=np.int64), np.zeros((n, g, 1, g, n), dtype=np.int64))


def module_from_functions(S: GammaSemiring, size: int, add_fn, action_fn) -> GammaModule:
    n, g = S.order, S.gamma
    add = np.array([[add_fn(x, y) for y in range(size)] for x in range(size)], dtype=np.int64)
    action = np.empty((n, g, size, g, n), dtype=np.int64)
    for a, alpha, x, beta, b in itertools.product(range(n), range(g), range(size), range(g), range(n)):
        action[a, alpha, x, beta, b] = action_fn(a, alpha, x, beta, b)
    return GammaModule(S, add, action)


# ---------------------------------------------------------------------------
# 模文件
# ---------------------------------------------------------------------------

def _split_inline_base(text: str) -> Tuple[str, Optional[str]]:
    """取出 "base inline" ... "end" 之间的结构文本，原位置替换为空行以保留行号"""
    lines = text.splitlines()
    out: List[str] = []
    inline: Optional[List[str]] = None
    captured: Optional[str] = None
    for line in lines:
        stripped = line.split("#", 1)[0].strip()
        if inline is not None:
            if stripped == "end":
                captured = "\n".join(inline) + "\n"
                inline = None
                out.append("")
            else:
                inline.append(line)
                out.append("")
            continue
        if stripped.split()[:2] == ["base", "inline"]:
            inline = []
            out.append("")
            continue
        out.append(line)
    if inline is not None:
        raise MalformedFile("base inline 缺少对应的 end")
    return "\n".join(out) + "\n", captured


def parse_module(text: str, resolve_base: Optional[Callable[[str], GammaSemiring]] = None,
                 base: Optional[GammaSemiring] = None) -> GammaModule:
    """
    解析模文件

    参数:
        text (str): 模文件文本
        resolve_base: 把 base 引用（路径或 sha256:哈希）解析为结构的函数
        base: 直接给定的底结构，优先级最高

    返回:
        GammaModule: 解析得到的模

    异常:
        MalformedFile / IndexOutOfRange / MissingZeroIdentity
    """
    body, inline = _split_inline_base(text)
    header, blocks = _read_blocks(body, ("base", "size"), ("add", "action", "action-last"))
    if base is None:
        if inline is not None:
            base = parse_structure(inline)
        else:
            if "base" not in header or len(header["base"][0]) != 1:
                raise MalformedFile("缺少 base 引用")
            if resolve_base is None:
                raise MalformedFile("无法解析 base 引用：未提供解析器", header["base"][1])
            base = resolve_base(header["base"][0][0])
    n, g = base.order, base.gamma
    m = _header_int(header, "size")
    if "add" not in blocks:
        raise MalformedFile("缺少 add 块")
    add = _block(blocks, "add", m * m, m).reshape(m, m)
    if "action" in blocks and "action-last" in blocks:
        raise MalformedFile("action 与 action-last 不能同时出现", blocks["action-last"][1])
    if "action" in blocks:
        action = _block(blocks, "action", n * g * m * g * n, m).reshape(n, g, m, g, n)
    elif "action-last" in blocks:
        # {a, b, m} 形式：模元素在最后，按槽位重排
        last = _block(blocks, "action-last", n * g * n * g * m, m).reshape(n, g, n, g, m)
        action = last.transpose(0, 1, 4, 3, 2)
    else:
        raise MalformedFile("缺少 action 块")
    return GammaModule(base, add, action)


def serialize_module(M: GammaModule, base_ref: str = "inline") -> str:
    lines: List[str] = []
    if base_ref == "inline":
        lines.append("base inline")
        lines += serialize_structure(M.base).rstrip("\n").split("\n")
        lines.append("end")
    else:
        lines.append(f"base {base_ref}")
    lines.append(f"size {M.size}")
    lines.append("add")
    lines += [" ".join(str(int(x)) for x in row) for row in M.add]
    lines.append("action")
    lines += [" ".join(str(x) for x in row) for row in chunked(M.action.ravel().tolist(), M.base.order)]
    return "\n".join(lines) + "\n"


def load_module(path, catalog_dir: Optional[str] = None) -> GammaModule:
    """读取模文件；base 可以是相对路径、sha256:哈希（在结构目录中查找）或内联结构"""
    path = Path(path)

    def resolve(ref: str) -> GammaSemiring:
        if ref.startswith("sha256:"):
            from catalog import Catalog

            return Catalog(catalog_dir or config.DEFAULT_CATALOG_DIR).lookup(ref.split(":", 1)[1])
        return load_structure(path.parent / ref)

    return parse_module(read_text(path), resolve_base=resolve)


# ---------------------------------------------------------------------------
# 模公理
# ---------------------------------------------------------------------------

def _module_identities(M_add: np.ndarray, action: np.ndarray, S: GammaSemiring) -> Iterator[Identity]:
    cfg = S.axiom_config
    n, g = S.order, S.gamma
    m = M_add.shape[0]
    A, T, Ma, Act = S.add, S.ternary, M_add, action

    if cfg.require_add_associative:
        x, y, z = index_grid(m, m, m)
        yield ("module_add_associativity", ("x", "y", "z"),
               masked_lookup(Ma, masked_lookup(Ma, x, y), z), masked_lookup(Ma, x, masked_lookup(Ma, y, z)), None)
    if cfg.require_add_commutative:
        x, y = index_grid(m, m)
        yield ("module_add_commutativity", ("x", "y"), masked_lookup(Ma, x, y), masked_lookup(Ma, y, x), None)

    five = ("a", "alpha", "x", "beta", "b")
    a, al, x, be, b = index_grid(n, g, m, g, n)
    value = masked_lookup(Act, a, al, x, be, b)
    yield ("action_zero_x", five, value, constant(0), np.broadcast_to(x == 0, value.v.shape))
    if cfg.zero_absorption == "all-slots":
        yield ("action_zero_a", five, value, constant(0), np.broadcast_to(a == 0, value.v.shape))
        yield ("action_zero_b", five, value, constant(0), np.broadcast_to(b == 0, value.v.shape))

    a, al, x, y, be, b = index_grid(n, g, m, m, g, n)
    yield ("action_additive_x", ("a", "alpha", "x", "y", "beta", "b"),
           masked_lookup(Act, a, al, masked_lookup(Ma, x, y), be, b),
           masked_lookup(Ma, masked_lookup(Act, a, al, x, be, b), masked_lookup(Act, a, al, y, be, b)), None)
    a, a2, al, x, be, b = index_grid(n, n, g, m, g, n)
    yield ("action_additive_a", ("a", "a2", "alpha", "x", "beta", "b"),
           masked_lookup(Act, A[a, a2], al, x, be, b),
           masked_lookup(Ma, masked_lookup(Act, a, al, x, be, b), masked_lookup(Act, a2, al, x, be, b)), None)
    a, al, x, be, b, b2 = index_grid(n, g, m, g, n, n)
    yield ("action_additive_b", ("a", "alpha", "x", "beta", "b", "b2"),
           masked_lookup(Act, a, al, x, be, A[b, b2]),
           masked_lookup(Ma, masked_lookup(Act, a, al, x, be, b), masked_lookup(Act, a, al, x, be, b2)), None)

    if cfg.commutativity != "off":
        # aαxβ(bγcδd) = aα(bβxγc)δd
        a, al, x, be, b, ga, c, de, d = index_grid(n, g, m, g, n, g, n, g, n)
        yield ("mixed_associativity", ("a", "alpha", "x", "beta", "b", "gamma", "c", "delta", "d"),
               masked_lookup(Act, a, al, x, be, T[b, ga, c, de, d]),
               masked_lookup(Act, a, al, masked_lookup(Act, b, be, x, ga, c), de, d), None)


def verify_module(M: GammaModule) -> AxiomReport:
    """穷举检查模公理，失败时给出反例"""
    return collect_report(_module_identities(M.add, M.action, M.base))


def module_partial_violation(M_add: np.ndarray, action: np.ndarray, S: GammaSemiring) -> bool:
    """作用表部分赋值（-1 未定）时是否已有恒等式失败"""
    return first_failure(_module_identities(M_add, action, S)) is not None


def is_unital(M: GammaModule) -> bool:
    """存在 e 使 eαxβe = x 对所有 x, α, β 成立"""
    labels = np.arange(M.size)
    return any(np.all(M.action[e, :, :, :, e] == labels[None, :, None]) for e in M.base.carrier)


# ---------------------------------------------------------------------------
# 同态
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ModuleHom:
    source: GammaModule
    target: GammaModule
    map: Tuple[int, ...]

    def __call__(self, x: int) -> int:
        return self.map[x]

    @property
    def array(self) -> np.ndarray:
        return np.array(self.map, dtype=np.int64)

    def then(self, other: "ModuleHom") -> "ModuleHom":
        """先 self 后 other"""
        return ModuleHom(self.source, other.target, tuple(other.map[y] for y in self.map))

    @property
    def is_injective(self) -> bool:
        return len(set(self.map)) == len(self.map)

    @property
    def is_surjective(self) -> bool:
        return set(self.map) == set(self.target.carrier)

    @property
    def is_zero(self) -> bool:
        return all(y == 0 for y in self.map)

    def image_elements(self) -> List[int]:
        return sorted(set(self.map))

    def kernel_elements(self) -> List[int]:
        return [x for x, y in enumerate(self.map) if y == 0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModuleHom):
            return NotImplemented
        return self.map == other.map and self.source is other.source and self.target is other.target

    def __hash__(self) -> int:
        return hash(self.map)


def hom_failure(source: GammaModule, target: GammaModule, mapping: Sequence[int]) -> Optional[Tuple]:
    """检查可加性与等变性，返回第一个反例或 None"""
    f = np.asarray(mapping, dtype=np.int64)
    if len(f) != source.size or f.min(initial=0) < 0 or f.max(initial=0) >= target.size:
        return ("shape",)
    bad = f[source.add] != target.add[np.ix_(f, f)]
    if bad.any():
        return ("additive",) + tuple(int(i) for i in np.argwhere(bad)[0])
    bad = f[source.action] != target.action[:, :, f, :, :]
    if bad.any():
        return ("equivariant",) + tuple(int(i) for i in np.argwhere(bad)[0])
    return None


def module_hom(source: GammaModule, target: GammaModule, mapping: Sequence[int]) -> ModuleHom:
    """
    构造并验证模同态

    异常:
        NotAHomomorphism: 不满足可加性或等变性
    """
    failure = hom_failure(source, target, mapping)
    if failure is not None:
        raise NotAHomomorphism("映射不是模同态", witness=failure)
    return ModuleHom(source, target, tuple(int(y) for y in mapping))


def identity_hom(M: GammaModule) -> ModuleHom:
    return ModuleHom(M, M, tuple(M.carrier))


def zero_hom(M: GammaModule, N: GammaModule) -> ModuleHom:
    return ModuleHom(M, N, (0,) * M.size)


def additive_closure(add: np.ndarray, generators: Iterable[int]) -> set:
    reached = {0}
    queue = deque([0])
    gens = list(generators)
    while queue:
        x = queue.popleft()
        for g in gens:
            y = int(add[x, g])
            if y not in reached:
                reached.add(y)
                queue.append(y)
    return reached


def greedy_additive_generators(add: np.ndarray, order: Optional[Sequence[int]] = None) -> List[int]:
    """按给定顺序贪心选取的极小加法生成集"""
    size = add.shape[0]
    order = list(order) if order is not None else list(range(1, size))
    gens: List[int] = []
    span = {0}
    for x in order:
        if x not in span:
            gens.append(x)
            span = additive_closure(add, gens)
            if len(span) == size:
                break
    return gens


def _extend_additively(M: GammaModule, N: GammaModule, gens: Sequence[int],
                       images: Sequence[int]) -> Optional[np.ndarray]:
    values = np.full(M.size, -1, dtype=np.int64)
    values[0] = 0
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for g, img in zip(gens, images):
            y = int(M.add[x, g])
            v = int(N.add[values[x], img])
            if values[y] == -1:
                values[y] = v
                queue.append(y)
            elif values[y] != v:
                return None
    if (values < 0).any():
        return None
    return values


def all_homs(M: GammaModule, N: GammaModule) -> List[ModuleHom]:
    """
    全部模同态，按映射表字典序排列

    映射由加法生成元上的取值决定；先沿加法生成扩展，再检查等变性

    异常:
        SizeGuardExceeded: |N|^|M| 超过 HOM_SEARCH_GUARD
    """
    check_guard(N.size ** M.size, config.HOM_SEARCH_GUARD, "同态穷举 |N|^|M|")
    gens = greedy_additive_generators(M.add)
    found: List[Tuple[int, ...]] = []
    for images in itertools.product(range(N.size), repeat=len(gens)):
        values = _extend_additively(M, N, gens, images)
        if values is None:
            continue
        if hom_failure(M, N, values) is None:
            found.append(tuple(int(v) for v in values))
    found.sort()
    logger.debug("all_homs: |M|=%s |N|=%s 生成元 %s 个, 同态 %s 个", M.size, N.size, len(gens), len(found))
    return [ModuleHom(M, N, f) for f in found]


@dataclass(frozen=True, eq=False)
class HomModule:
    module: GammaModule
    homs: Tuple[ModuleHom, ...]
    codes: np.ndarray

    def index_of(self, mapping: Sequence[int]) -> int:
        code = int(np.asarray(mapping, dtype=np.int64) @ radix_weights([self.homs[0].target.size] * len(mapping)))
        i = int(np.searchsorted(self.codes, code))
        if i >= len(self.codes) or self.codes[i] != code:
            raise KeyError("映射不在 Hom 集中")
        return i


def hom_module(M: GammaModule, N: GammaModule) -> HomModule:
    """
    Hom(M, N)，逐点加法与逐点作用 (aαfβb)(x) = aαf(x)βb

    异常:
        ActionNotClosed: 逐点运算离开了 Hom 集，或结果不是模
    """
    homs = all_homs(M, N)
    S = M.base
    n, g = S.order, S.gamma
    F = np.array([h.map for h in homs], dtype=np.int64).reshape(len(homs), M.size)
    weights = radix_weights([N.size] * M.size)
    codes = F @ weights

    def locate(maps: np.ndarray, what: str) -> np.ndarray:
        keys = maps @ weights
        idx = np.searchsorted(codes, keys)
        idx = np.clip(idx, 0, len(codes) - 1)
        missing = codes[idx] != keys
        if missing.any():
            raise ActionNotClosed(f"逐点{what}离开了 Hom 集", witness=tuple(int(i) for i in np.argwhere(missing)[0]))
        return idx

    add = locate(N.add[F[:, None, :], F[None, :, :]], "加法")
    # acted[a, α, i, β, b, x] = N.action[a, α, F[i, x], β, b]
    acted = N.action[:, :, F, :, :].transpose(0, 1, 2, 4, 5, 3)
    action = locate(acted, "作用")
    module = GammaModule(S, add, action)
    report = verify_module(module)
    if not report.valid:
        raise ActionNotClosed("Hom 模不满足模公理", witness=report.violations[0].model_dump())
    return HomModule(module, tuple(homs), codes)


# ---------------------------------------------------------------------------
# 自由模
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FreeModule:
    module: GammaModule
    rank: int
    vectors: np.ndarray
    basis: Optional[Tuple[int, ...]]

    def encode(self, vector: Sequence[int]) -> int:
        return int(radix_encode(np.asarray(vector, dtype=np.int64), [self.module.base.order] * self.rank))


def free_module(S: GammaSemiring, k: int) -> FreeModule:
    """
    T^k，逐点加法与作用；元素 f 编码为以 f(0) 为最高位的 n 进制数

    有乘法单位元 e 时 basis[j] 为在 j 处取 e、其余为 0 的函数

    异常:
        SizeGuardExceeded: n^k 超过 FREE_MODULE_MAX_SIZE
    """
    n, g = S.order, S.gamma
    check_guard(n ** k, config.FREE_MODULE_MAX_SIZE, "自由模")
    sizes = [n] * k
    V = radix_vectors(sizes)
    add = radix_encode(S.add[V[:, None, :], V[None, :, :]], sizes)
    a, al, x, be, b = index_grid(n, g, len(V), g, n)
    acted = S.ternary[a[..., None], al[..., None], V[x], be[..., None], b[..., None]]
    action = radix_encode(acted, sizes)
    e = S.identity_element
    basis = None
    if e is not None:
        weights = radix_weights(sizes)
        basis = tuple(int(e * weights[j]) for j in range(k))
    return FreeModule(GammaModule(S, add, action), k, V, basis)


def extend_from_generators(free: FreeModule, N: GammaModule, images: Sequence[int]) -> ModuleHom:
    """
    自由模的泛性质：把第 j 个基元送到 images[j] 的唯一同态

    φ(f) = Σ_j f(j)·0·images[j]·0·e

    异常:
        IdentityRequired: 底结构没有乘法单位元
        NotAHomomorphism: N 不满足所需的单位性
    """
    S = free.module.base
    e = S.identity_element
    if e is None:
        raise IdentityRequired("自由模的插入映射需要乘法单位元")
    if len(images) != free.rank:
        raise ValueError("生成元像的个数必须等于秩")
    values = []
    for vec in free.vectors:
        total = 0
        for j, img in enumerate(images):
            total = int(N.add[total, N.action[int(vec[j]), 0, img, 0, e]])
        values.append(total)
    hom = module_hom(free.module, N, values)
    if free.basis is not None and any(hom(b) != img for b, img in zip(free.basis, images)):
        raise NotAHomomorphism("扩张没有把基元送到指定的像", witness=tuple(images))
    return hom


# ---------------------------------------------------------------------------
# 子模、核、像、商、直和
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Submodule:
    parent: GammaModule
    elements: Tuple[int, ...]
    module: GammaModule
    inclusion: ModuleHom

    def index_of(self, x: int) -> int:
        return self.elements.index(x)


def submodule(M: GammaModule, elements: Iterable[int]) -> Submodule:
    """
    由元素集合构造子模（重新编号为 0..k-1，按原标签顺序）

    异常:
        GroupRequired: M 不是加法群模
        NotASubmodule: 集合不含 0 或对加法、负元、作用不封闭
    """
    require_group(M, what="子模")
    els = sorted(set(int(x) for x in elements))
    member = np.zeros(M.size, dtype=bool)
    member[els] = True
    if not els or els[0] != 0:
        raise NotASubmodule("子模必须包含 0")
    E = np.array(els, dtype=np.int64)
    sums = M.add[np.ix_(E, E)]
    if not member[sums].all():
        raise NotASubmodule("对加法不封闭", witness=tuple(int(i) for i in np.argwhere(~member[sums])[0]))
    if not member[M.negation[E]].all():
        raise NotASubmodule("对负元不封闭")
    acted = M.action[:, :, E, :, :]
    if not member[acted].all():
        raise NotASubmodule("对作用不封闭", witness=tuple(int(i) for i in np.argwhere(~member[acted])[0]))
    index = np.full(M.size, -1, dtype=np.int64)
    index[E] = np.arange(len(E))
    module = GammaModule(M.base, index[sums], index[acted])
    return Submodule(M, tuple(els), module, ModuleHom(module, M, tuple(els)))


def generated_submodule(M: GammaModule, seeds: Iterable[int]) -> Submodule:
    require_group(M, what="生成子模")
    reached = {0} | set(int(s) for s in seeds)
    while True:
        E = np.array(sorted(reached), dtype=np.int64)
        grown = set(M.add[np.ix_(E, E)].ravel().tolist())
        grown |= set(M.negation[E].tolist())
        grown |= set(M.action[:, :, E, :, :].ravel().tolist())
        if grown <= reached:
            return submodule(M, reached)
        reached |= grown


def multiple_submodule(M: GammaModule, k: int) -> Submodule:
    """kM = {k·x}"""
    return submodule(M, {M.multiple(k, x) for x in M.carrier})


def kernel(f: ModuleHom) -> Submodule:
    require_group(f.source, f.target, what="核")
    return submodule(f.source, f.kernel_elements())


def image(f: ModuleHom) -> Submodule:
    require_group(f.source, f.target, what="像")
    return submodule(f.target, f.image_elements())


@dataclass(frozen=True, eq=False)
class Quotient:
    parent: GammaModule
    sub: Submodule
    module: GammaModule
    projection: ModuleHom
    representatives: Tuple[int, ...]


def quotient(M: GammaModule, sub: Submodule) -> Quotient:
    """
    陪集商模；陪集以最小成员为代表，0 的陪集编号为 0

    异常:
        GroupRequired / QuotientNotWellDefined
    """
    require_group(M, what="商模")
    S_el = np.array(sub.elements, dtype=np.int64)
    rep = M.add[:, S_el].min(axis=1)
    reps, cls = np.unique(rep, return_inverse=True)
    cls = cls.reshape(-1)
    add = cls[M.add[np.ix_(reps, reps)]]
    action = cls[M.action[:, :, reps, :, :]]
    if not np.array_equal(cls[M.add], add[np.ix_(cls, cls)]):
        raise QuotientNotWellDefined("商上的加法依赖代表元")
    if not np.array_equal(cls[M.action], action[:, :, cls, :, :]):
        raise QuotientNotWellDefined("商上的作用依赖代表元")
    module = GammaModule(M.base, add, action)
    return Quotient(M, sub, module, ModuleHom(M, module, tuple(int(c) for c in cls)),
                    tuple(int(r) for r in reps))


def cyclic_quotient(S: GammaSemiring, k: int) -> Quotient:
    """T/kT，T 为 S 上的正则模"""
    T = regular_module(S)
    return quotient(T, multiple_submodule(T, k))


@dataclass(frozen=True, eq=False)
class DirectSum:
    module: GammaModule
    components: Tuple[GammaModule, ...]
    vectors: np.ndarray
    inclusions: Tuple[ModuleHom, ...]
    projections: Tuple[ModuleHom, ...]

    def encode(self, parts: Sequence[int]) -> int:
        return int(radix_encode(np.asarray(parts, dtype=np.int64), [M.size for M in self.components]))


def direct_sum_many(base: GammaSemiring, modules: Sequence[GammaModule]) -> DirectSum:
    """
    有限直和 ⊕M_i，元素按各分量混合进制编码（第一个分量为最高位）

    异常:
        SizeGuardExceeded: 总元素数超过 COCHAIN_SIZE_GUARD
    """
    sizes = [M.size for M in modules]
    total = int(np.prod(sizes, dtype=np.int64)) if sizes else 1
    check_guard(total, config.COCHAIN_SIZE_GUARD, "直和")
    if not modules:
        Z = zero_module(base)
        return DirectSum(Z, (), np.zeros((1, 0), dtype=np.int64), (), ())
    V = radix_vectors(sizes)
    parts_add = [M.add[V[:, None, i], V[None, :, i]] for i, M in enumerate(modules)]
    add = radix_encode(np.stack(parts_add, axis=-1), sizes)
    parts_act = [M.action[:, :, V[:, i], :, :] for i, M in enumerate(modules)]
    action = radix_encode(np.stack(parts_act, axis=-1), sizes)
    module = GammaModule(base, add, action)
    weights = radix_weights(sizes)
    inclusions = tuple(ModuleHom(M, module, tuple(int(x * weights[i]) for x in M.carrier))
                       for i, M in enumerate(modules))
    projections = tuple(ModuleHom(module, M, tuple(int(v) for v in V[:, i])) for i, M in enumerate(modules))
    return DirectSum(module, tuple(modules), V, inclusions, projections)


def direct_sum(M1: GammaModule, M2: GammaModule) -> DirectSum:
    return direct_sum_many(M1.base, [M1, M2])


def find_module_isomorphism(M: GammaModule, N: GammaModule) -> Optional[ModuleHom]:
    if M.size != N.size:
        return None
    for h in all_homs(M, N):
        if h.is_injective:
            return h
    return None


def is_module_congruence(M: GammaModule, labels: Sequence[int]) -> Tuple[bool, Optional[Tuple]]:
    """模同余检查：与加法、作用相容"""
    lab = np.asarray(labels, dtype=np.int64)
    same = lab[:, None] == lab[None, :]
    x, x2, y = index_grid(M.size, M.size, M.size)
    bad = same[x, x2] & (lab[M.add[x, y]] != lab[M.add[x2, y]])
    if bad.any():
        return False, ("add",) + tuple(int(i) for i in np.argwhere(bad)[0])
    # 每个元素与其类中最小成员比较即可
    _, first = np.unique(lab, return_index=True)
    rep = first[np.unique(lab, return_inverse=True)[1].reshape(-1)]
    acted = lab[M.action]
    bad = acted != acted[:, :, rep, :, :]
    if bad.any():
        return False, ("action",) + tuple(int(i) for i in np.argwhere(bad)[0])
    return True, None


# ---------------------------------------------------------------------------
# 张量积
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TensorProduct:
    """
    M ⊗ N：符号集 M×N 上的自由模 T^(|M||N|) 对合同关系的商

    labels[code] 为隐式自由模中编码为 code 的元素所在的类
    """

    left: GammaModule
    right: GammaModule
    module: GammaModule
    balanced: np.ndarray
    labels: np.ndarray
    vectors: np.ndarray

    def position(self, m: int, x: int) -> int:
        return m * self.right.size + x


def tensor(M: GammaModule, N: GammaModule) -> TensorProduct:
    """
    张量积：可加性（两槽）、平衡关系 (aαmβb)⊗x = m⊗(aαxβb)、
    以及作用相容 aα(m⊗x)βb = (aαmβb)⊗x 生成的最小模合同

    异常:
        IdentityRequired: 底结构无乘法单位元（符号 m⊗x 取系数 e）
        SizeGuardExceeded: n^(|M||N|) 超过 TENSOR_UNIVERSE_GUARD
        QuotientNotWellDefined: 商上运算依赖代表元
    """
    S = M.base
    e = S.identity_element
    if e is None:
        raise IdentityRequired("张量积需要乘法单位元")
    n, g = S.order, S.gamma
    P = M.size * N.size
    check_guard(n ** P, config.TENSOR_UNIVERSE_GUARD, "张量积背后的自由模")
    sizes = [n] * P
    V = radix_vectors(sizes)
    U = len(V)
    w = radix_weights(sizes)

    def sym(m: int, x: int) -> int:
        return int(e * w[m * N.size + x])

    def plus(c1: int, c2: int) -> int:
        return int(radix_encode(S.add[V[c1], V[c2]], sizes))

    # 平移：加上 T 的加法生成元放在某个位置，以及各个标量作用
    translations: List[np.ndarray] = []
    for gen in greedy_additive_generators(S.add):
        for p in range(P):
            translations.append(np.arange(U, dtype=np.int64) + (S.add[V[:, p], gen] - V[:, p]) * w[p])
    scalars = list(itertools.product(range(n), range(g), range(g), range(n)))
    act_maps = {}
    for a, al, be, b in scalars:
        act_maps[(a, al, be, b)] = radix_encode(S.ternary[a, al, V, be, b], sizes)
    translations.extend(act_maps.values())

    pairs: List[Tuple[int, int]] = [(sym(0, x), 0) for x in N.carrier]
    pairs += [(sym(m, 0), 0) for m in M.carrier]
    for m1, m2, x in itertools.product(M.carrier, M.carrier, N.carrier):
        pairs.append((sym(int(M.add[m1, m2]), x), plus(sym(m1, x), sym(m2, x))))
    for m, x1, x2 in itertools.product(M.carrier, N.carrier, N.carrier):
        pairs.append((sym(m, int(N.add[x1, x2])), plus(sym(m, x1), sym(m, x2))))
    for (a, al, be, b), amap in act_maps.items():
        for m, x in itertools.product(M.carrier, N.carrier):
            left = sym(M.act(a, al, m, be, b), x)
            pairs.append((left, sym(m, N.act(a, al, x, be, b))))
            pairs.append((int(amap[sym(m, x)]), left))

    uf = UnionFind(U)
    queue = deque(pairs)
    while queue:
        x, y = queue.popleft()
        if uf.union(x, y):
            for t in translations:
                queue.append((int(t[x]), int(t[y])))
    labels_list, count = uf.labels(zero=0)
    labels = np.array(labels_list, dtype=np.int64)
    _, reps = np.unique(labels, return_index=True)

    add = labels[radix_encode(S.add[V[reps][:, None, :], V[reps][None, :, :]], sizes)]
    action = np.empty((n, g, count, g, n), dtype=np.int64)
    for (a, al, be, b), amap in act_maps.items():
        action[a, al, :, be, b] = labels[amap[reps]]
        if not np.array_equal(labels[amap], action[a, al, labels, be, b]):
            raise QuotientNotWellDefined("张量商上的作用依赖代表元", witness=(a, al, be, b))
    for t in translations[: len(translations) - len(act_maps)]:
        shifted = labels[t]
        if not np.array_equal(shifted, add[labels, shifted[0]]):
            raise QuotientNotWellDefined("张量商上的加法依赖代表元")
    module = GammaModule(S, add, action)
    balanced = np.array([[labels[sym(m, x)] for x in N.carrier] for m in M.carrier], dtype=np.int64)
    logger.debug("tensor: |M|=%s |N|=%s 自由模 %s 个元素 → 商 %s 个类", M.size, N.size, U, count)
    return TensorProduct(M, N, module, balanced, labels, V)


def tensor_map(src: TensorProduct, tgt: TensorProduct, f: ModuleHom, g: ModuleHom) -> ModuleHom:
    """
    f ⊗ g：在符号上 m⊗x ↦ f(m)⊗g(x)，再验证与商相容

    异常:
        QuotientNotWellDefined: 诱导映射依赖代表元
    """
    S = src.module.base
    P_tgt = tgt.left.size * tgt.right.size
    image_vectors = np.zeros((len(src.vectors), P_tgt), dtype=np.int64)
    for m, x in itertools.product(src.left.carrier, src.right.carrier):
        p = src.position(m, x)
        q = tgt.position(f(m), g(x))
        image_vectors[:, q] = S.add[image_vectors[:, q], src.vectors[:, p]]
    image_labels = tgt.labels[radix_encode(image_vectors, [S.order] * P_tgt)]
    mapping = np.zeros(src.module.size, dtype=np.int64)
    mapping[src.labels] = image_labels
    if not np.array_equal(mapping[src.labels], image_labels):
        raise QuotientNotWellDefined("f⊗g 依赖代表元")
    return module_hom(src.module, tgt.module, mapping)


class AdjunctionReport(BaseModel):
    lhs_count: int
    rhs_count: int
    bijective: bool
    natural: bool


def adjunction_check(L: GammaModule, M: GammaModule, N: GammaModule) -> AdjunctionReport:
    """
    Φ: Hom(L⊗M, N) → Hom(L, Hom(M, N))，Φ(ψ)(l)(m) = ψ(l⊗m)

    natural 检查对 N 的全部自同态 h 有 Φ(h∘ψ) = h_*∘Φ(ψ)
    """
    tp = tensor(L, M)
    lhs = all_homs(tp.module, N)
    H = hom_module(M, N)
    rhs = all_homs(L, H.module)
    rhs_maps = {h.map for h in rhs}

    def phi(psi: ModuleHom) -> Optional[Tuple[int, ...]]:
        images = []
        for l in L.carrier:
            inner = [psi(int(tp.balanced[l, m])) for m in M.carrier]
            try:
                images.append(H.index_of(inner))
            except KeyError:
                return None
        return tuple(images)

    images = [phi(psi) for psi in lhs]
    bijective = (None not in images and len(set(images)) == len(images)
                 and set(images) == rhs_maps)
    natural = True
    if bijective:
        for h in all_homs(N, N):
            for psi, image_map in zip(lhs, images):
                left = phi(psi.then(h))
                pushed = tuple(H.index_of([h(H.homs[i](m)) for m in M.carrier]) for i in image_map)
                if left != pushed:
                    natural = False
                    break
    return AdjunctionReport(lhs_count=len(lhs), rhs_count=len(rhs), bijective=bijective, natural=natural)
