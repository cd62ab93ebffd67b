"""
理想格与理想分类（素、半素、极大）以及根
理想用载体上的位集表示
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, List, Optional, Tuple

import networkx as nx
import numpy as np

import config
from core import GammaSemiring
from utils import ImproperIdeal, NotAnIdeal, check_guard, from_bits, popcount, to_bits

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Ideal:
    owner: GammaSemiring
    members: int

    @property
    def elements(self) -> List[int]:
        return from_bits(self.members)

    @property
    def size(self) -> int:
        return popcount(self.members)

    @property
    def is_proper(self) -> bool:
        return self.members != full_bits(self.owner)

    def __contains__(self, x: int) -> bool:
        return bool(self.members >> x & 1)

    def __le__(self, other: "Ideal") -> bool:
        return self.members & ~other.members == 0

    def __repr__(self) -> str:
        return "{" + ",".join(str(x) for x in self.elements) + "}"


def full_bits(S: GammaSemiring) -> int:
    return (1 << S.order) - 1


@lru_cache(maxsize=64)
def _absorption_images(S: GammaSemiring) -> Tuple[int, ...]:
    """images[a] = a 出现在任一位置时三元积的取值集合（位集）"""
    T = S.ternary
    images = []
    for a in S.carrier:
        values = np.concatenate([T[a].ravel(), T[:, :, a].ravel(), T[..., a].ravel()])
        images.append(to_bits(np.unique(values).tolist()))
    return tuple(images)


def is_ideal(S: GammaSemiring, members: int) -> bool:
    """理想不变量：含 0、加法封闭、三元吸收（任意位置）"""
    if not members & 1:
        return False
    elements = from_bits(members)
    images = _absorption_images(S)
    for a in elements:
        if images[a] & ~members:
            return False
        for b in elements:
            if not members >> int(S.add[a, b]) & 1:
                return False
    return True


def _require_ideal(S: GammaSemiring, I: Ideal) -> None:
    if I.owner is not S and not I.owner.same_tables(S):
        raise NotAnIdeal("理想不属于该结构")
    if not is_ideal(S, I.members):
        raise NotAnIdeal(f"{I!r} 不是理想", witness=I.elements)


def generated_ideal(S: GammaSemiring, seed: Iterable[int]) -> Ideal:
    """
    包含 seed 的最小理想

    交替做加法闭包与三元吸收，直到不动点
    """
    bits = to_bits(seed) | 1
    images = _absorption_images(S)
    while True:
        grown = bits
        elements = from_bits(bits)
        for a in elements:
            grown |= images[a]
            for b in elements:
                grown |= 1 << int(S.add[a, b])
        if grown == bits:
            return Ideal(S, bits)
        bits = grown


def all_ideals(S: GammaSemiring) -> List[Ideal]:
    """
    枚举全部理想，按 (大小, 位集值) 排序

    对元素 1..n-1 逐个决定取舍；已选元素的加法和与吸收像一旦落入被排除的元素，立即剪枝。

    异常:
        SizeGuardExceeded: 阶超过 IDEAL_SUBSET_MAX_ORDER
    """
    n = S.order
    check_guard(n, config.IDEAL_SUBSET_MAX_ORDER, "理想子集枚举的阶")
    images = _absorption_images(S)
    found: List[int] = []

    def implied(members: int) -> int:
        req = 0
        elements = from_bits(members)
        for a in elements:
            req |= images[a]
            for b in elements:
                req |= 1 << int(S.add[a, b])
        return req

    def walk(k: int, members: int, excluded: int):
        if implied(members) & excluded:
            return
        if k == n:
            if is_ideal(S, members):
                found.append(members)
            return
        walk(k + 1, members | (1 << k), excluded)
        walk(k + 1, members, excluded | (1 << k))

    walk(1, 1, 0)
    found.sort(key=lambda bits: (popcount(bits), bits))
    logger.debug("all_ideals: order=%s 共 %s 个理想", n, len(found))
    return [Ideal(S, bits) for bits in found]


def is_prime(S: GammaSemiring, I: Ideal) -> Tuple[bool, Optional[Tuple[int, ...]]]:
    """
    素理想判定：aαbβc ∈ I 推出 a、b、c 之一属于 I，且 I ≠ T

    返回:
        (是否为素理想, 反例 (a, α, b, β, c))

    异常:
        NotAnIdeal: I 不是理想
    """
    _require_ideal(S, I)
    if not I.is_proper:
        return False, None
    inside = np.array([x in I for x in S.carrier])
    T = S.ternary
    outside = ~inside
    bad = (inside[T]
           & outside[:, None, None, None, None]
           & outside[None, None, :, None, None]
           & outside[None, None, None, None, :])
    if bad.any():
        return False, tuple(int(i) for i in np.argwhere(bad)[0])
    return True, None


def is_semiprime(S: GammaSemiring, I: Ideal) -> bool:
    """aαaβa ∈ I 推出 a ∈ I"""
    _require_ideal(S, I)
    for a in S.carrier:
        if a in I:
            continue
        cubes = S.ternary[a, :, a, :, a]
        if any(int(v) in I for v in cubes.ravel()):
            return False
    return True


def ideal_lattice(S: GammaSemiring) -> nx.DiGraph:
    """理想格的 Hasse 图：边 I → J 表示 J 覆盖 I"""
    ideals = all_ideals(S)
    graph = nx.DiGraph()
    for I in ideals:
        graph.add_node(I.members, ideal=I)
    for I in ideals:
        for J in ideals:
            if I.members != J.members and I <= J:
                graph.add_edge(I.members, J.members)
    reduced = nx.transitive_reduction(graph)
    reduced.add_nodes_from(graph.nodes(data=True))
    return reduced


def is_maximal(S: GammaSemiring, I: Ideal) -> bool:
    """
    极大理想：I 与 T 之间没有别的理想

    异常:
        NotAnIdeal: I 不是理想
        ImproperIdeal: I 是整个载体
    """
    _require_ideal(S, I)
    if not I.is_proper:
        raise ImproperIdeal("极大性只对真理想定义")
    lattice = ideal_lattice(S)
    return list(lattice.successors(I.members)) == [full_bits(S)]


def prime_ideals(S: GammaSemiring) -> List[Ideal]:
    return [I for I in all_ideals(S) if is_prime(S, I)[0]]


def semiprime_ideals(S: GammaSemiring) -> List[Ideal]:
    return [I for I in all_ideals(S) if is_semiprime(S, I)]


def maximal_ideals(S: GammaSemiring) -> List[Ideal]:
    lattice = ideal_lattice(S)
    below = sorted(lattice.predecessors(full_bits(S)), key=lambda bits: (popcount(bits), bits))
    return [lattice.nodes[bits]["ideal"] for bits in below]


def radical(S: GammaSemiring, I: Ideal) -> Ideal:
    """包含 I 的全部素理想之交；没有这样的素理想时为整个载体"""
    _require_ideal(S, I)
    bits = full_bits(S)
    for P in prime_ideals(S):
        if I <= P:
            bits &= P.members
    return Ideal(S, bits)


def ideal_intersection(S: GammaSemiring, I: Ideal, J: Ideal) -> Ideal:
    return Ideal(S, I.members & J.members)


def ideal_sum(S: GammaSemiring, I: Ideal, J: Ideal) -> Ideal:
    return generated_ideal(S, from_bits(I.members | J.members))
