"""
分式局部化

对乘法系 S ⊆ T 构造 S⁻¹T：序对 (a, s) 按分式关系的传递闭包分类，
在类上按分量公式定义运算，并对全部代表元验证良定性。
模的局部化 S⁻¹M 复用同一套闭包与验证流程。
"""

import logging
from dataclasses import dataclass, replace
from typing import List, Literal, Optional, Sequence, Set, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from core import GammaSemiring, all_morphisms, is_morphism, is_unit, multiplicative_identity, verify_axioms
from ideals import Ideal, full_bits, is_ideal, is_prime, maximal_ideals
from modules import GammaModule
from utils import (
    InvalidSystem,
    MaximalityFailed,
    MissingZeroIdentity,
    NotWellDefined,
    UnionFind,
    from_bits,
    to_bits,
)

logger = logging.getLogger(__name__)


class LocalizationConfig(BaseModel):
    """
    relation:
        doubled  ：u·(a·t·t)·t = u·(b·s·s)·s（按原式，参数成对出现）
        undoubled：u·(a·t·s)·t = u·(b·s·t)·s
    addition:
        balanced ：两个分子先化到公共分母 s·t·w 再相加
        literal  ：(a·t·t + b·s·s, s·t·t)，在 Z6 上不良定，保留用于复现
    """

    model_config = ConfigDict(frozen=True)

    relation: Literal["doubled", "undoubled"] = "doubled"
    addition: Literal["balanced", "literal"] = "balanced"


DEFAULT_CONFIG = LocalizationConfig()


@dataclass(frozen=True)
class MultiplicativeSystem:
    owner: GammaSemiring
    members: int

    @property
    def elements(self) -> List[int]:
        return from_bits(self.members)

    def __contains__(self, x: int) -> bool:
        return bool(self.members >> x & 1)

    @property
    def anchor(self) -> int:
        """分母锚点 w：有乘法单位元且在系中时取单位元，否则取最小成员"""
        e = self.owner.identity_element
        if e is not None and e in self:
            return e
        return self.elements[0]

    def __repr__(self) -> str:
        return "{" + ",".join(str(x) for x in self.elements) + "}"


def system_failure(S: GammaSemiring, subset: Sequence[int]) -> Optional[str]:
    """返回子集不是乘法系的原因；合法时为 None"""
    elements = sorted(set(int(x) for x in subset))
    if not elements:
        return "乘法系不能为空"
    if any(x < 0 or x >= S.order for x in elements):
        return "乘法系含有载体以外的元素"
    if 0 in elements:
        return "乘法系不能包含 0"
    e = multiplicative_identity(S)
    if e is not None and e not in elements:
        return f"乘法系必须包含单位元 {e}"
    E = np.array(elements, dtype=np.int64)
    inside = np.zeros(S.order, dtype=bool)
    inside[E] = True
    products = S.ternary[np.ix_(E, np.arange(S.gamma), E, np.arange(S.gamma), E)]
    if not inside[products].all():
        a, al, b, be, c = (int(i) for i in np.argwhere(~inside[products])[0])
        return f"{E[a]}·{al}·{E[b]}·{be}·{E[c]} 不在乘法系中"
    return None


def is_multiplicative_system(S: GammaSemiring, subset: Sequence[int]) -> bool:
    return system_failure(S, subset) is None


def multiplicative_system(S: GammaSemiring, subset: Sequence[int]) -> MultiplicativeSystem:
    reason = system_failure(S, subset)
    if reason is not None:
        raise InvalidSystem(reason, witness=sorted(set(int(x) for x in subset)))
    return MultiplicativeSystem(S, to_bits(subset))


def multiplicative_closure(S: GammaSemiring, seeds: Sequence[int]) -> MultiplicativeSystem:
    """
    由 seeds 生成的乘法系：加入单位元（若存在）后对三元积取闭包

    异常:
        InvalidSystem: 闭包中出现 0
    """
    members = set(int(x) for x in seeds)
    e = S.identity_element
    if e is not None:
        members.add(e)
    gs = np.arange(S.gamma)
    while True:
        E = np.array(sorted(members), dtype=np.int64)
        grown = members | set(S.ternary[np.ix_(E, gs, E, gs, E)].ravel().tolist())
        if grown == members:
            break
        members = grown
    return multiplicative_system(S, sorted(members))


# ---------------------------------------------------------------------------
# 分式关系与闭包
# ---------------------------------------------------------------------------

def _pairs(count: int, dens: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """序对 (x, s) 的编号为 x·k + pos(s)"""
    k = len(dens)
    return np.repeat(np.arange(count), k), np.tile(np.asarray(dens, dtype=np.int64), count)


def _close(related: np.ndarray, zero_pair: int) -> Tuple[np.ndarray, int]:
    uf = UnionFind(related.shape[0])
    for p, q in np.argwhere(related):
        if p < q:
            uf.union(int(p), int(q))
    labels, count = uf.labels(zero=zero_pair)
    return np.array(labels, dtype=np.int64), count


def _semiring_relation(S: GammaSemiring, nums: np.ndarray, dens: np.ndarray, system: np.ndarray,
                       relation: str) -> np.ndarray:
    T, g = S.ternary, S.gamma
    u = system[:, None, None, None, None]
    ap, sp = nums[None, :, None, None, None], dens[None, :, None, None, None]
    aq, sq = nums[None, None, :, None, None], dens[None, None, :, None, None]
    al = np.arange(g)[None, None, None, :, None]
    be = np.arange(g)[None, None, None, None, :]
    if relation == "doubled":
        left = T[u, al, T[ap, al, sq, be, sq], be, sq]
        right = T[u, al, T[aq, al, sp, be, sp], be, sp]
    else:
        left = T[u, al, T[ap, al, sq, be, sp], be, sq]
        right = T[u, al, T[aq, al, sp, be, sq], be, sp]
    return (left == right).all(axis=(3, 4)).any(axis=0)


def _module_relation(M: GammaModule, nums: np.ndarray, dens: np.ndarray, system: np.ndarray,
                     relation: str) -> np.ndarray:
    Act, g = M.action, M.base.gamma
    u = system[:, None, None, None, None]
    xp, sp = nums[None, :, None, None, None], dens[None, :, None, None, None]
    xq, sq = nums[None, None, :, None, None], dens[None, None, :, None, None]
    al = np.arange(g)[None, None, None, :, None]
    be = np.arange(g)[None, None, None, None, :]
    if relation == "doubled":
        left = Act[u, al, Act[sq, al, xp, be, sq], be, sq]
        right = Act[u, al, Act[sp, al, xq, be, sp], be, sp]
    else:
        left = Act[u, al, Act[sq, al, xp, be, sp], be, sq]
        right = Act[u, al, Act[sp, al, xq, be, sq], be, sp]
    return (left == right).all(axis=(3, 4)).any(axis=0)


def _check_table(expected: np.ndarray, table_lookup: np.ndarray, what: str, pairs_of) -> None:
    bad = expected != table_lookup
    if bad.any():
        index = tuple(int(i) for i in np.argwhere(bad)[0])
        raise NotWellDefined(f"局部化上的{what}依赖代表元", witness=pairs_of(index))


@dataclass(frozen=True, eq=False)
class LocalizedSemiring:
    """
    S⁻¹T

    class_table[a, s] 为 (a, s) 所在的类（s 不在系中时为 -1）；
    canonical_map[a] 为 (a, w) 的类
    """

    owner: GammaSemiring
    system: MultiplicativeSystem
    config: LocalizationConfig
    class_table: np.ndarray
    classes: Tuple[Tuple[Tuple[int, int], ...], ...]
    semiring: GammaSemiring
    canonical_map: Tuple[int, ...]
    units_ok: bool
    maximal_ideal: Optional[Ideal] = None
    prime: Optional[Ideal] = None

    @property
    def size(self) -> int:
        return len(self.classes)

    @property
    def is_terminal(self) -> bool:
        return self.size == 1

    def class_of(self, a: int, s: int) -> int:
        value = int(self.class_table[a, s])
        if value < 0:
            raise InvalidSystem(f"{s} 不在乘法系中")
        return value

    def as_base_module(self) -> GammaModule:
        """经典范映射把 S⁻¹T 看成 T 上的模：aαcβb = λ(a)αcβλ(b)"""
        lam = np.array(self.canonical_map, dtype=np.int64)
        action = self.semiring.ternary[lam][:, :, :, :, lam]
        return GammaModule(self.owner, self.semiring.add, action)


def _fraction_add(S: GammaSemiring, a, s, b, t, w: int, cfg: LocalizationConfig):
    A, T = S.add, S.ternary
    # 公式中的 Γ 标号固定取 0；g > 1 时由加法类表检查保证结果与代表元无关
    if cfg.addition == "literal":
        return A[T[a, 0, t, 0, t], T[b, 0, s, 0, s]], T[s, 0, t, 0, t]
    den = T[s, 0, t, 0, w]
    if cfg.relation == "doubled":
        left = T[T[T[a, 0, t, 0, t], 0, t, 0, w], 0, w, 0, w]
        right = T[T[T[b, 0, s, 0, s], 0, s, 0, w], 0, w, 0, w]
    else:
        left = T[a, 0, t, 0, w]
        right = T[b, 0, s, 0, w]
    return A[left, right], den


def _covers_image(R: GammaSemiring, u: int, v: int, image: Set[int]) -> bool:
    """无单位元时的可逆：对每个 (α, β)，x ↦ uαxβv 的像盖住典范映射的像"""
    products = R.ternary[u, :, :, :, v]
    return all(image <= set(products[al, :, be].tolist()) for al in range(R.gamma) for be in range(R.gamma))


def localize(S: GammaSemiring, system: Union[MultiplicativeSystem, Sequence[int]],
             cfg: LocalizationConfig = DEFAULT_CONFIG) -> LocalizedSemiring:
    """
    构造 S⁻¹T

    参数:
        S (GammaSemiring): 原结构
        system: 乘法系（或其元素列表）
        cfg (LocalizationConfig): 分式关系与加法公式的选择

    返回:
        LocalizedSemiring

    异常:
        InvalidSystem: 不是乘法系
        NotWellDefined: 类上的运算依赖代表元（witness 为两个代表序对）
    """
    if not isinstance(system, MultiplicativeSystem):
        system = multiplicative_system(S, system)
    n, g = S.order, S.gamma
    sys_el = np.array(system.elements, dtype=np.int64)
    k = len(sys_el)
    pos = np.full(n, -1, dtype=np.int64)
    pos[sys_el] = np.arange(k)
    w = system.anchor
    nums, dens = _pairs(n, sys_el)
    related = _semiring_relation(S, nums, dens, sys_el, cfg.relation)
    labels, count = _close(related, zero_pair=int(pos[w]))
    class_table = np.full((n, n), -1, dtype=np.int64)
    class_table[nums, dens] = labels
    _, rep = np.unique(labels, return_index=True)
    ra, rs = nums[rep], dens[rep]

    def pairs_of(index):
        return tuple((int(nums[i]), int(dens[i])) if j % 2 == 0 else int(i) for j, i in enumerate(index))

    gs = np.arange(g)
    ternary = class_table[S.ternary[np.ix_(ra, gs, ra, gs, ra)], S.ternary[np.ix_(rs, gs, rs, gs, rs)]]
    full = class_table[S.ternary[np.ix_(nums, gs, nums, gs, nums)], S.ternary[np.ix_(dens, gs, dens, gs, dens)]]
    _check_table(full, ternary[np.ix_(labels, gs, labels, gs, labels)], "三元运算", pairs_of)

    num, den = _fraction_add(S, ra[:, None], rs[:, None], ra[None, :], rs[None, :], w, cfg)
    add = class_table[num, den]
    num, den = _fraction_add(S, nums[:, None], dens[:, None], nums[None, :], dens[None, :], w, cfg)

    def add_pairs(index):
        p, q = index
        return ((int(nums[p]), int(dens[p])), (int(nums[q]), int(dens[q])))

    _check_table(class_table[num, den], add[np.ix_(labels, labels)], "加法", add_pairs)
    try:
        semiring = GammaSemiring(add, ternary, S.axiom_config)
    except MissingZeroIdentity as e:
        raise NotWellDefined(f"零分式 (0, {w}) 不是加法单位元", witness=e.witness)

    canonical = tuple(int(class_table[a, w]) for a in S.carrier)
    if S.identity_element is None:
        image = set(canonical)
        units_ok = all(_covers_image(semiring, canonical[s], canonical[w], image) for s in system.elements)
    else:
        units_ok = all(is_unit(semiring, canonical[s]) for s in system.elements)
    if not units_ok:
        logger.warning("局部化 %r: 乘法系的像并非全部可逆", system)
    classes = tuple(
        tuple((int(nums[p]), int(dens[p])) for p in np.flatnonzero(labels == c)) for c in range(count)
    )
    logger.debug("localize %r: %s 个序对 → %s 个类", system, len(nums), count)
    return LocalizedSemiring(S, system, cfg, class_table, classes, semiring, canonical, units_ok)


def localize_at_prime(S: GammaSemiring, P: Ideal, cfg: LocalizationConfig = DEFAULT_CONFIG) -> LocalizedSemiring:
    """
    在素理想 P 处局部化，并验证 P_P 是唯一极大理想

    异常:
        InvalidSystem: P 不是素理想或为整个载体
        MaximalityFailed: P_P 不是理想或不是唯一极大理想
    """
    if not is_ideal(S, P.members) or P.members == full_bits(S):
        raise InvalidSystem(f"{P!r} 不是真理想", witness=P.elements)
    prime, witness = is_prime(S, P)
    if not prime:
        raise InvalidSystem(f"{P!r} 不是素理想", witness=witness)
    complement = [x for x in S.carrier if x not in P]
    loc = localize(S, complement, cfg)
    bits = to_bits(int(loc.class_table[a, s]) for a in P.elements for s in loc.system.elements)
    local = loc.semiring
    if not is_ideal(local, bits):
        raise MaximalityFailed("P_P 不是局部化中的理想", witness=from_bits(bits))
    maximal = maximal_ideals(local)
    if [M.members for M in maximal] != [bits]:
        raise MaximalityFailed(
            "P_P 不是唯一极大理想", witness={"P_P": from_bits(bits), "maximal": [M.elements for M in maximal]}
        )
    return replace(loc, maximal_ideal=Ideal(local, bits), prime=P)


def fraction_reindex(src, tgt) -> Tuple[int, ...]:
    """
    src 的乘法系包含于 tgt 时的限制映射：[(x, s)] ↦ [(x, s)]

    异常:
        NotWellDefined: 同一类的两个代表元落入不同的类
    """
    if src.system.members & ~tgt.system.members:
        raise InvalidSystem("源乘法系不包含于目标乘法系")
    image: List[int] = []
    for members in src.classes:
        targets = {int(tgt.class_table[x, s]) for x, s in members}
        if len(targets) != 1:
            raise NotWellDefined("限制映射依赖代表元", witness=members)
        image.append(targets.pop())
    return tuple(image)


def inverts_system(R: GammaSemiring, f: Sequence[int], system: MultiplicativeSystem) -> bool:
    return all(is_unit(R, f[s]) for s in system.elements)


def universal_extensions(loc: LocalizedSemiring, R: GammaSemiring, f: Sequence[int]) -> List[Tuple[int, ...]]:
    """
    满足 f = f̄ ∘ λ 的全部态射 f̄: S⁻¹T → R（穷举）

    当 f 把乘法系映成可逆元时，结果应恰好有一个
    """
    if not is_morphism(loc.owner, R, f):
        raise ValueError("f 不是半环态射")
    lam = loc.canonical_map
    return [fbar for fbar in all_morphisms(loc.semiring, R)
            if all(fbar[lam[x]] == f[x] for x in loc.owner.carrier)]


# ---------------------------------------------------------------------------
# 模的局部化
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LocalizedModule:
    """S⁻¹M，作为底结构 T 上的模：aα[(x, s)]βb = [(aαxβb, wαsβw)]"""

    owner: GammaModule
    system: MultiplicativeSystem
    config: LocalizationConfig
    class_table: np.ndarray
    classes: Tuple[Tuple[Tuple[int, int], ...], ...]
    module: GammaModule
    canonical_map: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.classes)


def _module_fraction_add(M: GammaModule, x, s, y, t, w: int, cfg: LocalizationConfig):
    T, Act, Ma = M.base.ternary, M.action, M.add
    if cfg.addition == "literal":
        return Ma[Act[t, 0, x, 0, t], Act[s, 0, y, 0, s]], T[s, 0, t, 0, t]
    den = T[s, 0, t, 0, w]
    if cfg.relation == "doubled":
        left = Act[w, 0, Act[t, 0, Act[t, 0, x, 0, t], 0, w], 0, w]
        right = Act[w, 0, Act[s, 0, Act[s, 0, y, 0, s], 0, w], 0, w]
    else:
        left = Act[t, 0, x, 0, w]
        right = Act[s, 0, y, 0, w]
    return Ma[left, right], den


def localize_module(M: GammaModule, system: Union[MultiplicativeSystem, Sequence[int]],
                    cfg: LocalizationConfig = DEFAULT_CONFIG) -> LocalizedModule:
    """
    构造 S⁻¹M

    异常:
        InvalidSystem / NotWellDefined
    """
    S = M.base
    if not isinstance(system, MultiplicativeSystem):
        system = multiplicative_system(S, system)
    n, g, m = S.order, S.gamma, M.size
    sys_el = np.array(system.elements, dtype=np.int64)
    k = len(sys_el)
    w = system.anchor
    pos = np.full(n, -1, dtype=np.int64)
    pos[sys_el] = np.arange(k)
    nums, dens = _pairs(m, sys_el)
    related = _module_relation(M, nums, dens, sys_el, cfg.relation)
    labels, count = _close(related, zero_pair=int(pos[w]))
    class_table = np.full((m, n), -1, dtype=np.int64)
    class_table[nums, dens] = labels
    _, rep = np.unique(labels, return_index=True)
    rx, rs = nums[rep], dens[rep]

    num, den = _module_fraction_add(M, rx[:, None], rs[:, None], rx[None, :], rs[None, :], w, cfg)
    add = class_table[num, den]
    num, den = _module_fraction_add(M, nums[:, None], dens[:, None], nums[None, :], dens[None, :], w, cfg)

    def add_pairs(index):
        p, q = index
        return ((int(nums[p]), int(dens[p])), (int(nums[q]), int(dens[q])))

    _check_table(class_table[num, den], add[np.ix_(labels, labels)], "模加法", add_pairs)

    carrier, gs = np.arange(n), np.arange(g)
    wsw = S.ternary[w, :, :, :, w]  # (α, s, β)
    action = class_table[M.action[np.ix_(carrier, gs, rx, gs, carrier)],
                         wsw[:, rs, :][None, :, :, :, None]]
    full = class_table[M.action[np.ix_(carrier, gs, nums, gs, carrier)],
                       wsw[:, dens, :][None, :, :, :, None]]

    def action_pairs(index):
        a, al, p, be, b = index
        return (a, al, (int(nums[p]), int(dens[p])), be, b)

    _check_table(full, action[:, :, labels, :, :], "作用", action_pairs)
    try:
        module = GammaModule(S, add, action)
    except MissingZeroIdentity as e:
        raise NotWellDefined(f"零分式 (0, {w}) 不是模加法单位元", witness=e.witness)
    canonical = tuple(int(class_table[x, w]) for x in M.carrier)
    classes = tuple(
        tuple((int(nums[p]), int(dens[p])) for p in np.flatnonzero(labels == c)) for c in range(count)
    )
    logger.debug("localize_module %r: %s 个序对 → %s 个类", system, len(nums), count)
    return LocalizedModule(M, system, cfg, class_table, classes, module, canonical)


# ---------------------------------------------------------------------------
# 报告
# ---------------------------------------------------------------------------

class LocalizationReport(BaseModel):
    system: List[int]
    relation: str
    addition: str
    class_count: int
    classes: List[List[Tuple[int, int]]]
    add: List[List[int]]
    ternary: List[int]
    canonical_map: List[int]
    units_ok: bool
    axioms_ok: bool
    maximal_ideal: Optional[List[int]] = None


def localization_report(loc: LocalizedSemiring) -> LocalizationReport:
    return LocalizationReport(
        system=loc.system.elements,
        relation=loc.config.relation,
        addition=loc.config.addition,
        class_count=loc.size,
        classes=[list(c) for c in loc.classes],
        add=loc.semiring.add.tolist(),
        ternary=loc.semiring.ternary.ravel().tolist(),
        canonical_map=list(loc.canonical_map),
        units_ok=loc.units_ok,
        axioms_ok=verify_axioms(loc.semiring).valid,
        maximal_ideal=loc.maximal_ideal.elements if loc.maximal_ideal is not None else None,
    )
