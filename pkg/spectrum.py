"""
素谱及其 Zariski 型拓扑
闭集 V(I)、基本开集 D(a)，以及 T0 / 离散性诊断
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

from pydantic import BaseModel

from core import GammaSemiring, is_morphism
from ideals import Ideal, all_ideals, generated_ideal, is_ideal, is_prime, prime_ideals
from utils import NotAnIdeal, from_bits, popcount, to_bits

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PrimeSpectrum:
    owner: GammaSemiring
    points: Tuple[Ideal, ...]

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def all_points(self) -> int:
        return (1 << len(self.points)) - 1

    def point_index(self, P: Ideal) -> int:
        for i, Q in enumerate(self.points):
            if Q.members == P.members:
                return i
        raise KeyError(f"{P!r} 不是谱中的点")

    def basic_points(self, a: int) -> int:
        """D(a) 的点位集"""
        return to_bits(i for i, P in enumerate(self.points) if a not in P)

    def describe(self, points: int) -> List[List[int]]:
        return [self.points[i].elements for i in from_bits(points)]


@dataclass(frozen=True)
class OpenSet:
    """
    开集：同时保存点位集与基本开覆盖

    basis 为满足 D(a) ⊆ U 的全部元素 a（去掉给出相同 D(a) 的重复元素）
    """

    spectrum: PrimeSpectrum
    member_points: int
    basis: Tuple[int, ...]

    @classmethod
    def from_points(cls, spectrum: PrimeSpectrum, points: int) -> "OpenSet":
        seen: Set[int] = set()
        basis = []
        for a in spectrum.owner.carrier:
            d = spectrum.basic_points(a)
            if d & ~points == 0 and d not in seen:
                seen.add(d)
                basis.append(a)
        return cls(spectrum, points, tuple(basis))

    @property
    def is_union_of_basis(self) -> bool:
        covered = 0
        for a in self.basis:
            covered |= self.spectrum.basic_points(a)
        return covered == self.member_points

    def complement(self) -> "ClosedSet":
        return ClosedSet(self.spectrum, self.spectrum.all_points & ~self.member_points)

    def __contains__(self, point_index: int) -> bool:
        return bool(self.member_points >> point_index & 1)


@dataclass(frozen=True)
class ClosedSet:
    spectrum: PrimeSpectrum
    member_points: int

    def complement(self) -> OpenSet:
        return OpenSet.from_points(self.spectrum, self.spectrum.all_points & ~self.member_points)


class TopologyReport(BaseModel):
    point_count: int
    closed_set_count: int
    is_T0: bool
    is_discrete: bool
    basis_generates: bool
    counterexample: Optional[Tuple[int, int]] = None


def spec(S: GammaSemiring) -> PrimeSpectrum:
    """S 的全部素理想，按位集值排序"""
    points = sorted(prime_ideals(S), key=lambda P: P.members)
    return PrimeSpectrum(S, tuple(points))


def vanishing_set(spectrum: PrimeSpectrum, I: Ideal) -> ClosedSet:
    """
    V(I) = {P : I ⊆ P}

    异常:
        NotAnIdeal: I 不是 spectrum 所属结构的理想
    """
    if not is_ideal(spectrum.owner, I.members):
        raise NotAnIdeal(f"{I!r} 不是理想", witness=I.elements)
    return ClosedSet(spectrum, to_bits(i for i, P in enumerate(spectrum.points) if I <= P))


def basic_open(spectrum: PrimeSpectrum, a: int) -> OpenSet:
    """D(a) = {P : a ∉ P}"""
    return OpenSet.from_points(spectrum, spectrum.basic_points(a))


def closed_sets(spectrum: PrimeSpectrum) -> List[int]:
    """全部闭集（点位集），对有限并与交封闭后排序"""
    family = {vanishing_set(spectrum, I).member_points for I in all_ideals(spectrum.owner)}
    family.add(0)
    family.add(spectrum.all_points)
    changed = True
    while changed:
        changed = False
        for x, y in itertools.combinations(list(family), 2):
            for z in (x | y, x & y):
                if z not in family:
                    family.add(z)
                    changed = True
    return sorted(family, key=lambda bits: (popcount(bits), bits))


def open_sets(spectrum: PrimeSpectrum) -> List[OpenSet]:
    return [ClosedSet(spectrum, c).complement() for c in closed_sets(spectrum)]


def topology_report(spectrum: PrimeSpectrum) -> TopologyReport:
    """
    拓扑诊断

    T0 不成立时记录一对不可分的点作为反例，这是对定理的反例报告而不是错误
    """
    closed = closed_sets(spectrum)
    n = spectrum.size
    counterexample = None
    for i, j in itertools.combinations(range(n), 2):
        if not any(bool(c >> i & 1) != bool(c >> j & 1) for c in closed):
            counterexample = (i, j)
            break
    closed_set = set(closed)
    full = spectrum.all_points
    discrete = all((full & ~(1 << i)) in closed_set for i in range(n))
    basis_ok = all(U.is_union_of_basis for U in open_sets(spectrum))
    return TopologyReport(
        point_count=n,
        closed_set_count=len(closed),
        is_T0=counterexample is None,
        is_discrete=discrete,
        basis_generates=basis_ok,
        counterexample=counterexample,
    )


class PointMapReport(BaseModel):
    point_map: Dict[int, int]
    preimages_prime: bool
    continuous: bool
    failure: Optional[str] = None


def induced_point_map(f: Sequence[int], source: GammaSemiring, target: GammaSemiring) -> PointMapReport:
    """
    态射 f: source → target 诱导的 Spec(target) → Spec(source)，P' ↦ f⁻¹(P')

    检查原像为素理想，以及连续性：点映射下 V(I) 的原像等于 V(⟨f(I)⟩)
    """
    if not is_morphism(source, target, f):
        raise ValueError("f 不是半环态射")
    spec_src, spec_tgt = spec(source), spec(target)
    mapping: Dict[int, int] = {}
    for j, Q in enumerate(spec_tgt.points):
        pre = to_bits(x for x in source.carrier if f[x] in Q)
        P = Ideal(source, pre)
        if not is_ideal(source, pre) or not is_prime(source, P)[0]:
            return PointMapReport(point_map=mapping, preimages_prime=False, continuous=False,
                                  failure=f"f⁻¹({Q!r}) 不是素理想")
        mapping[j] = spec_src.point_index(P)
    for I in all_ideals(source):
        closed_src = vanishing_set(spec_src, I).member_points
        pulled = to_bits(j for j, i in mapping.items() if closed_src >> i & 1)
        image = generated_ideal(target, (f[x] for x in I.elements))
        if pulled != vanishing_set(spec_tgt, image).member_points:
            return PointMapReport(point_map=mapping, preimages_prime=True, continuous=False,
                                  failure=f"V({I!r}) 的原像不是 V(⟨f(I)⟩)")
    return PointMapReport(point_map=mapping, preimages_prime=True, continuous=True)
