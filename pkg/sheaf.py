"""
有限谱上的结构层与拟凝聚模层 M̃

基本开集 D(a) 上的截面是在 {a} 生成的乘法系处的局部化 T_a，
饱和乘法系 T ∖ ∪_{P∈D(a)} P 处的局部化只用来核对截面与开集无关；
一般开集上的截面是其基本开覆盖上的相容元组。
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from threading import Lock
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel

import config
from core import GammaSemiring, all_morphisms, is_morphism, isomorphic
from ideals import full_bits
from localization import (
    DEFAULT_CONFIG,
    LocalizationConfig,
    LocalizedModule,
    LocalizedSemiring,
    MultiplicativeSystem,
    fraction_reindex,
    localize,
    localize_at_prime,
    localize_module,
    multiplicative_closure,
)
from modules import GammaModule, find_module_isomorphism, zero_module
from spectrum import OpenSet, PrimeSpectrum, induced_point_map, spec
from utils import GammaError, InvalidSystem, NotWellDefined, UnionFind, from_bits, popcount

logger = logging.getLogger(__name__)

Section = Union[LocalizedSemiring, LocalizedModule]


@dataclass(frozen=True)
class BasicSection:
    points: int
    element: int
    system: int
    data: Section
    saturated: int
    saturated_data: Section
    to_saturated: Tuple[int, ...]

    @property
    def size(self) -> int:
        return self.data.size


@dataclass
class SheafData:
    owner: GammaSemiring
    spectrum: PrimeSpectrum
    module: Optional[GammaModule]
    config: LocalizationConfig
    sections: Dict[int, BasicSection]
    restrictions: Dict[Tuple[int, int], Tuple[int, ...]]
    composition_ok: bool = True
    gluing_checked: bool = False
    gluing_failures: List[str] = field(default_factory=list)
    stalks: Dict[int, "Stalk"] = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return "structure" if self.module is None else "module"

    def section(self, points: int) -> BasicSection:
        if points not in self.sections:
            raise KeyError(f"点集 {from_bits(points)} 不是基本开集")
        return self.sections[points]

    def restrict(self, source: int, target: int) -> Tuple[int, ...]:
        return self.restrictions[(source, target)]

    def section_structure(self, points: int) -> Union[GammaSemiring, GammaModule]:
        data = self.section(points).data
        return data.semiring if isinstance(data, LocalizedSemiring) else data.module


def saturated_system(spectrum: PrimeSpectrum, points: int) -> int:
    """T ∖ ∪_{P∈U} P 的位集"""
    union = 0
    for i in from_bits(points):
        union |= spectrum.points[i].members
    return full_bits(spectrum.owner) & ~union


def _terminal_section(S: GammaSemiring, M: Optional[GammaModule], cfg: LocalizationConfig) -> Section:
    n, g = S.order, S.gamma
    everything = MultiplicativeSystem(S, full_bits(S))
    if M is None:
        pairs = tuple((a, s) for a in S.carrier for s in S.carrier)
        terminal = GammaSemiring(np.zeros((1, 1), dtype=np.int64),
                                 np.zeros((1, g, 1, g, 1), dtype=np.int64), S.axiom_config)
        return LocalizedSemiring(S, everything, cfg, np.zeros((n, n), dtype=np.int64), (pairs,),
                                 terminal, (0,) * n, True)
    pairs = tuple((x, s) for x in M.carrier for s in S.carrier)
    return LocalizedModule(M, everything, cfg, np.zeros((M.size, n), dtype=np.int64), (pairs,),
                           zero_module(S), (0,) * M.size)


def _localize_at(S: GammaSemiring, M: Optional[GammaModule], system, cfg: LocalizationConfig) -> Section:
    return localize(S, system, cfg) if M is None else localize_module(M, system, cfg)


def basic_section(S: GammaSemiring, M: Optional[GammaModule], spectrum: PrimeSpectrum, points: int,
                  element: int, cfg: LocalizationConfig = DEFAULT_CONFIG) -> BasicSection:
    """
    D(element) 上的截面：在 {element} 生成的乘法系处局部化

    参数:
        points (int): D(element) 的点集位集
        element (int): 代表元 a

    返回:
        BasicSection: 同时带有饱和系处的局部化以及到它的双射

    异常:
        NotWellDefined: 生成系处的局部化与饱和系处的局部化不一致
    """
    if points == 0:
        terminal = _terminal_section(S, M, cfg)
        return BasicSection(0, element, full_bits(S), terminal, full_bits(S), terminal, (0,))
    generated = multiplicative_closure(S, [element])
    saturated = saturated_system(spectrum, points)
    data = _localize_at(S, M, generated, cfg)
    saturated_data = _localize_at(S, M, from_bits(saturated), cfg)
    witness = {"element": element, "generated": generated.elements, "saturated": from_bits(saturated)}
    try:
        to_saturated = fraction_reindex(data, saturated_data)
    except (InvalidSystem, NotWellDefined):
        raise NotWellDefined(f"D({element}) 上生成系与饱和系的局部化不相容", witness=witness)
    if len(set(to_saturated)) != saturated_data.size or data.size != saturated_data.size:
        raise NotWellDefined(f"D({element}) 上生成系与饱和系的局部化大小不同: {data.size} ≠ {saturated_data.size}",
                             witness=witness)
    return BasicSection(points, element, generated.members, data, saturated, saturated_data, to_saturated)


def _restriction(source: BasicSection, target: BasicSection) -> Tuple[int, ...]:
    """经 target 的饱和系局部化把 source 的截面送到 target 的截面"""
    back = {y: x for x, y in enumerate(target.to_saturated)}
    return tuple(back[y] for y in fraction_reindex(source.data, target.saturated_data))


def _build(S: GammaSemiring, M: Optional[GammaModule], spectrum: Optional[PrimeSpectrum],
           cfg: LocalizationConfig, workers: int) -> SheafData:
    spectrum = spectrum or spec(S)
    representatives: Dict[int, int] = {}
    for a in S.carrier:
        representatives.setdefault(spectrum.basic_points(a), a)

    sections: Dict[int, BasicSection] = {}
    if workers <= 1:
        for points, a in representatives.items():
            sections[points] = basic_section(S, M, spectrum, points, a, cfg)
    else:
        lock = Lock()
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(basic_section, S, M, spectrum, points, a, cfg): points
                       for points, a in representatives.items()}
            for future in as_completed(futures):
                result = future.result()
                with lock:
                    sections[futures[future]] = result
    sections = dict(sorted(sections.items(), key=lambda item: (popcount(item[0]), item[0])))

    restrictions: Dict[Tuple[int, int], Tuple[int, ...]] = {}
    for U, V in itertools.product(sections, repeat=2):
        if V & ~U == 0:
            restrictions[(U, V)] = _restriction(sections[U], sections[V])
    sheaf = SheafData(S, spectrum, M, cfg, sections, restrictions)
    sheaf.composition_ok = _check_composition(sheaf)
    if spectrum.size <= config.GLUING_CHECK_MAX_POINTS:
        sheaf.gluing_checked = True
        sheaf.gluing_failures = _check_gluing(sheaf)
        for failure in sheaf.gluing_failures:
            logger.warning("粘合失败: %s", failure)
    logger.debug("%s 层: %s 个基本开集, %s 个限制映射", sheaf.kind, len(sections), len(restrictions))
    return sheaf


def structure_sheaf(S: GammaSemiring, spectrum: Optional[PrimeSpectrum] = None,
                    cfg: LocalizationConfig = DEFAULT_CONFIG, workers: int = 1) -> SheafData:
    """
    结构层 O_X

    参数:
        S (GammaSemiring): 底结构
        spectrum: 已计算的谱（可选）
        cfg: 局部化配置
        workers (int): 并发构造基本开集截面的线程数

    返回:
        SheafData

    异常:
        NotWellDefined: 某个基本开集上的局部化不良定
    """
    return _build(S, None, spectrum, cfg, workers)


def tilde_module(S: GammaSemiring, M: GammaModule, spectrum: Optional[PrimeSpectrum] = None,
                 cfg: LocalizationConfig = DEFAULT_CONFIG, workers: int = 1) -> SheafData:
    """M 对应的拟凝聚层 M̃，D(a) 上的截面为 M_a"""
    if M.base is not S and not M.base.same_tables(S):
        raise ValueError("模的底结构与给定结构不一致")
    return _build(S, M, spectrum, cfg, workers)


def _check_composition(sheaf: SheafData) -> bool:
    opens = list(sheaf.sections)
    for U, V, W in itertools.product(opens, repeat=3):
        if V & ~U == 0 and W & ~V == 0:
            direct = sheaf.restrict(U, W)
            first, second = sheaf.restrict(U, V), sheaf.restrict(V, W)
            if direct != tuple(second[x] for x in first):
                logger.warning("限制映射不可复合: %s → %s → %s", from_bits(U), from_bits(V), from_bits(W))
                return False
    return True


# ---------------------------------------------------------------------------
# 一般开集上的截面
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GluedSections:
    points: int
    cover: Tuple[int, ...]
    families: Tuple[Tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.families)


def _basic_cover(sheaf: SheafData, points: int) -> Tuple[int, ...]:
    return tuple(U for U in sheaf.sections if U and U & ~points == 0)


def compatible_families(sheaf: SheafData, cover: Sequence[int]) -> List[Tuple[int, ...]]:
    """覆盖上两两限制到交集后相等的截面元组（回溯枚举）"""
    cover = list(cover)
    for U, V in itertools.combinations(cover, 2):
        if (U & V) not in sheaf.sections:
            raise KeyError(f"基本开集的交 {from_bits(U & V)} 不是基本开集")
    found: List[Tuple[int, ...]] = []

    def walk(chosen: Tuple[int, ...]):
        i = len(chosen)
        if i == len(cover):
            found.append(chosen)
            return
        U = cover[i]
        for x in range(sheaf.sections[U].size):
            ok = True
            for j, V in enumerate(cover[:i]):
                meet = U & V
                if sheaf.restrict(U, meet)[x] != sheaf.restrict(V, meet)[chosen[j]]:
                    ok = False
                    break
            if ok:
                walk(chosen + (x,))

    walk(())
    return found


def sections_over(sheaf: SheafData, open_set: Union[OpenSet, int]) -> GluedSections:
    """开集 U 上的截面：U 中全部非空基本开集构成的覆盖上的相容元组"""
    points = open_set.member_points if isinstance(open_set, OpenSet) else int(open_set)
    cover = _basic_cover(sheaf, points)
    covered = 0
    for U in cover:
        covered |= U
    if covered != points:
        raise ValueError(f"{from_bits(points)} 不是基本开集的并")
    return GluedSections(points, cover, tuple(compatible_families(sheaf, cover)))


def global_sections(sheaf: SheafData) -> GluedSections:
    return sections_over(sheaf, sheaf.spectrum.all_points)


def section_module(sheaf: SheafData, points: int) -> GammaModule:
    """基本开集上的截面，作为底结构上的模"""
    data = sheaf.section(points).data
    if isinstance(data, LocalizedSemiring):
        return data.as_base_module()
    return data.module


def _check_gluing(sheaf: SheafData) -> List[str]:
    failures: List[str] = []
    for U, section in sheaf.sections.items():
        cover = [V for V in sheaf.sections if V and V != U and V & ~U == 0]
        covered = 0
        for V in cover:
            covered |= V
        if not cover or covered != U:
            continue
        families = set(compatible_families(sheaf, cover))
        images = [tuple(sheaf.restrict(U, V)[x] for V in cover) for x in range(section.size)]
        if len(set(images)) != len(images):
            failures.append(f"{from_bits(U)}: 截面在覆盖上的限制不单")
        elif set(images) != families:
            failures.append(f"{from_bits(U)}: 相容元组 {len(families)} 个，截面 {len(images)} 个")
    return failures


# ---------------------------------------------------------------------------
# 茎
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Stalk:
    point: int
    open_points: int
    size: int
    structure: Union[GammaSemiring, GammaModule]
    labels: Tuple[int, ...]


def _relabel_section(structure, phi: np.ndarray, S: GammaSemiring):
    inv = np.argsort(phi)
    if isinstance(structure, GammaSemiring):
        gs = np.arange(S.gamma)
        return GammaSemiring(phi[structure.add[np.ix_(inv, inv)]],
                             phi[structure.ternary[np.ix_(inv, gs, inv, gs, inv)]], structure.axiom_config)
    return GammaModule(S, phi[structure.add[np.ix_(inv, inv)]], phi[structure.action[:, :, inv, :, :]])


def stalk(sheaf: SheafData, point: int) -> Stalk:
    """
    P 处的茎：含 P 的基本开集上截面沿限制映射的余极限

    余极限的载体用并查集求出，运算从最小的含 P 基本开集搬运过来，
    并与直接在 P 处局部化的结果比较

    异常:
        NotWellDefined: 余极限与直接局部化不同构
    """
    if point in sheaf.stalks:
        return sheaf.stalks[point]
    containing = [U for U in sheaf.sections if U >> point & 1]
    minimal = sheaf.spectrum.all_points
    for U in containing:
        minimal &= U
    if minimal not in sheaf.sections:
        raise NotWellDefined(f"含点 {point} 的基本开集之交不是基本开集", witness=from_bits(minimal))
    offsets: Dict[int, int] = {}
    total = 0
    for U in containing:
        offsets[U] = total
        total += sheaf.sections[U].size
    uf = UnionFind(total)
    for U, V in itertools.product(containing, repeat=2):
        if V & ~U == 0 and U != V:
            for x, y in enumerate(sheaf.restrict(U, V)):
                uf.union(offsets[U] + x, offsets[V] + y)
    labels, count = uf.labels(zero=offsets[minimal])
    size = sheaf.sections[minimal].size
    phi = np.array([labels[offsets[minimal] + x] for x in range(size)], dtype=np.int64)
    if count != size or len(set(phi.tolist())) != size:
        raise NotWellDefined("余极限与最小开集上的截面不一致", witness=(count, size))
    structure = _relabel_section(sheaf.section_structure(minimal), phi, sheaf.owner)

    P = sheaf.spectrum.points[point]
    if sheaf.module is None:
        direct = localize_at_prime(sheaf.owner, P, sheaf.config).semiring
        same = isomorphic(structure, direct) is not None
    else:
        complement = [x for x in sheaf.owner.carrier if x not in P]
        direct = localize_module(sheaf.module, complement, sheaf.config).module
        same = find_module_isomorphism(structure, direct) is not None
    if not same:
        raise NotWellDefined(f"点 {P!r} 处的茎与直接局部化不同构")
    result = Stalk(point, minimal, size, structure, tuple(labels))
    sheaf.stalks[point] = result
    return result


# ---------------------------------------------------------------------------
# Spec 函子性
# ---------------------------------------------------------------------------

class SpecFunctorReport(BaseModel):
    morphism_count: int
    preimages_prime: bool
    continuous: bool
    global_sections_recover: bool
    hom_bijection: bool
    failures: List[str] = []


def spec_functor_check(T1: GammaSemiring, T2: GammaSemiring,
                       cfg: LocalizationConfig = DEFAULT_CONFIG) -> SpecFunctorReport:
    """
    对 T1 → T2 的全部态射检查 Spec 的反变函子性，
    以及整体截面函子是否把 Hom(T1, T2) 双射到 Hom(Γ(T1), Γ(T2))
    """
    failures: List[str] = []
    morphisms = all_morphisms(T1, T2)
    preimages_prime = continuous = True
    for f in morphisms:
        report = induced_point_map(f, T1, T2)
        preimages_prime &= report.preimages_prime
        continuous &= report.continuous
        if report.failure:
            failures.append(f"{f}: {report.failure}")

    globals_ = []
    for T in (T1, T2):
        sheaf = structure_sheaf(T, cfg=cfg)
        top = sheaf.spectrum.all_points
        if top not in sheaf.sections:
            failures.append(f"{T!r}: 整个谱不是基本开集")
            return SpecFunctorReport(morphism_count=len(morphisms), preimages_prime=preimages_prime,
                                     continuous=continuous, global_sections_recover=False,
                                     hom_bijection=False, failures=failures)
        globals_.append(sheaf.section(top).data)
    G1, G2 = globals_
    recover = (len(set(G1.canonical_map)) == T1.order == G1.size
               and len(set(G2.canonical_map)) == T2.order == G2.size)
    if not recover:
        failures.append("典范映射 T → Γ(T) 不是双射")
        return SpecFunctorReport(morphism_count=len(morphisms), preimages_prime=preimages_prime,
                                 continuous=continuous, global_sections_recover=False,
                                 hom_bijection=False, failures=failures)
    inv2 = np.argsort(np.array(G2.canonical_map))
    pushed = set()
    for f in morphisms:
        sharp = [0] * G1.size
        for x in T1.carrier:
            sharp[G1.canonical_map[x]] = G2.canonical_map[f[x]]
        if not is_morphism(G1.semiring, G2.semiring, sharp):
            recover = False
            failures.append(f"{f}: 整体截面上的诱导映射不是态射")
        back = tuple(int(inv2[sharp[G1.canonical_map[x]]]) for x in T1.carrier)
        if back != tuple(f):
            recover = False
        pushed.add(tuple(sharp))
    bijection = pushed == set(all_morphisms(G1.semiring, G2.semiring)) and len(pushed) == len(morphisms)
    return SpecFunctorReport(morphism_count=len(morphisms), preimages_prime=preimages_prime,
                             continuous=continuous, global_sections_recover=recover,
                             hom_bijection=bijection, failures=failures)


# ---------------------------------------------------------------------------
# 报告
# ---------------------------------------------------------------------------

class BasicOpenReport(BaseModel):
    points: List[List[int]]
    element: int
    system: List[int]
    saturated_system: List[int]
    section_size: int


class StalkReport(BaseModel):
    point: List[int]
    size: int
    error: Optional[str] = None


class SheafReport(BaseModel):
    kind: str
    points: List[List[int]]
    basic_opens: List[BasicOpenReport]
    restriction_count: int
    composition_ok: bool
    gluing_checked: bool
    gluing_failures: List[str]
    stalks: List[StalkReport]
    open_sections: Optional[int] = None


def sheaf_report(sheaf: SheafData, open_points: Optional[int] = None) -> SheafReport:
    stalks = []
    for i, P in enumerate(sheaf.spectrum.points):
        try:
            stalks.append(StalkReport(point=P.elements, size=stalk(sheaf, i).size))
        except GammaError as e:
            stalks.append(StalkReport(point=P.elements, size=0, error=f"{type(e).__name__}: {e}"))
    return SheafReport(
        kind=sheaf.kind,
        points=[P.elements for P in sheaf.spectrum.points],
        basic_opens=[
            BasicOpenReport(points=sheaf.spectrum.describe(U), element=s.element, system=from_bits(s.system),
                            saturated_system=from_bits(s.saturated), section_size=s.size)
            for U, s in sheaf.sections.items()
        ],
        restriction_count=len(sheaf.restrictions),
        composition_ok=sheaf.composition_ok,
        gluing_checked=sheaf.gluing_checked,
        gluing_failures=list(sheaf.gluing_failures),
        stalks=stalks,
        open_sections=sections_over(sheaf, open_points).size if open_points is not None else None,
    )
