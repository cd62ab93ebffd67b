"""
同调层：加法群模的复形、Čech 上同调、自由分解、Tor / Ext、Euler 示性数

所有同调运算只对加法群模定义（需要减法）；非群输入立即抛出 GroupRequired。
有限阿贝尔群的结构通过逐个素数统计 |H[p^k]| 得到。
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import zip_longest
from math import prod
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict
from sympy import factorint, multiplicity

import config
from localization import LocalizationConfig, DEFAULT_CONFIG, LocalizedModule
from modules import (
    DirectSum,
    FreeModule,
    GammaModule,
    HomModule,
    ModuleHom,
    cyclic_quotient,
    direct_sum_many,
    extend_from_generators,
    free_module,
    greedy_additive_generators,
    hom_module,
    identity_hom,
    kernel,
    module_hom,
    module_partial_violation,
    regular_module,
    require_group,
    tensor,
    tensor_map,
)
from sheaf import SheafData, section_module, tilde_module
from utils import (
    GammaError,
    IdentityRequired,
    NotAComplex,
    NotACover,
    NotAHomomorphism,
    NotExactInput,
    NotWellDefined,
    GroupRequired,
    check_guard,
    radix_encode,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# 有限阿贝尔群
# ---------------------------------------------------------------------------

class FiniteAbelianGroup(BaseModel):
    """不变因子按整除顺序递增排列，例如 Z2 ⊕ Z6 记为 [2, 6]"""

    model_config = ConfigDict(frozen=True)

    order: int
    invariant_factors: List[int]
    generator_count: int

    @classmethod
    def trivial(cls) -> "FiniteAbelianGroup":
        return cls(order=1, invariant_factors=[], generator_count=0)

    @classmethod
    def from_elementary(cls, elementary: Dict[int, List[int]]) -> "FiniteAbelianGroup":
        """elementary[p] 为 p-部分各循环因子的指数"""
        columns = [sorted((p ** k for k in exps), reverse=True) for p, exps in sorted(elementary.items())]
        factors = [prod(column) for column in zip_longest(*columns, fillvalue=1)]
        factors.reverse()
        return cls(order=prod(factors), invariant_factors=factors, generator_count=len(factors))

    @classmethod
    def of_module(cls, M: GammaModule) -> "FiniteAbelianGroup":
        return group_of_module(M)

    @property
    def is_trivial(self) -> bool:
        return self.order == 1

    def __str__(self) -> str:
        if self.is_trivial:
            return "0"
        return " ⊕ ".join(f"Z{d}" for d in self.invariant_factors)


def _times_p(add: np.ndarray, p: int) -> np.ndarray:
    """x ↦ p·x"""
    ident = np.arange(add.shape[0])
    value = ident.copy()
    for _ in range(p - 1):
        value = add[value, ident]
    return value


def group_invariants(add: np.ndarray) -> FiniteAbelianGroup:
    """
    由加法表求有限阿贝尔群的不变因子

    对 |H| 的每个素因子 p，统计 |H[p^k]|；相邻比值的 p-进指数给出阶 ≥ p^k 的循环因子个数
    """
    h = add.shape[0]
    if h == 1:
        return FiniteAbelianGroup.trivial()
    elementary: Dict[int, List[int]] = {}
    for p, e in factorint(h).items():
        p = int(p)
        times_p = _times_p(add, p)
        power = np.arange(h)
        counts = [1]
        while counts[-1] < p ** e:
            power = times_p[power]
            counts.append(int((power == 0).sum()))
        ranks = [int(multiplicity(p, counts[k] // counts[k - 1])) for k in range(1, len(counts))] + [0]
        exps: List[int] = []
        for k in range(1, len(ranks)):
            exps += [k] * (ranks[k - 1] - ranks[k])
        elementary[p] = exps
    return FiniteAbelianGroup.from_elementary(elementary)


def group_of_module(M: GammaModule) -> FiniteAbelianGroup:
    require_group(M, what="群结构")
    return group_invariants(M.add)


@dataclass(frozen=True)
class Subquotient:
    """Z/B：labels[x] 为循环元 x 的类（非循环元为 -1），reps 为各类最小代表元"""

    labels: np.ndarray
    reps: np.ndarray
    add: np.ndarray
    group: FiniteAbelianGroup

    @property
    def size(self) -> int:
        return len(self.reps)

    @classmethod
    def trivial(cls) -> "Subquotient":
        return cls(np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.int64),
                   np.zeros((1, 1), dtype=np.int64), FiniteAbelianGroup.trivial())


def subquotient(add: np.ndarray, cycles: Sequence[int], boundaries: Sequence[int]) -> Subquotient:
    Z = np.array(sorted(set(int(x) for x in cycles)), dtype=np.int64)
    B = np.array(sorted(set(int(x) for x in boundaries)), dtype=np.int64)
    coset_min = add[np.ix_(Z, B)].min(axis=1)
    reps, cls = np.unique(coset_min, return_inverse=True)
    labels = np.full(add.shape[0], -1, dtype=np.int64)
    labels[Z] = cls.reshape(-1)
    table = labels[add[np.ix_(reps, reps)]]
    return Subquotient(labels, reps, table, group_invariants(table))


# ---------------------------------------------------------------------------
# 复形
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Complex:
    """
    有界复形；differentials 以源次数为键

    chain 的微分降一次，cochain 的微分升一次
    """

    kind: Literal["chain", "cochain"]
    objects: Dict[int, GammaModule]
    differentials: Dict[int, ModuleHom] = field(default_factory=dict)

    def __post_init__(self):
        if self.objects:
            low, high = min(self.objects), max(self.objects)
            if sorted(self.objects) != list(range(low, high + 1)):
                raise NotAComplex("复形的次数必须连续", witness=sorted(self.objects))
        for i, d in self.differentials.items():
            j = i + self.step
            if i not in self.objects or j not in self.objects:
                raise NotAComplex(f"微分 d_{i} 的端点不在复形中")
            if d.source.size != self.objects[i].size or d.target.size != self.objects[j].size:
                raise NotAComplex(f"微分 d_{i} 的端点与对象不符")
        for i, d in self.differentials.items():
            nxt = self.differentials.get(i + self.step)
            if nxt is None:
                continue
            composed = d.then(nxt)
            if not composed.is_zero:
                x = next(x for x, y in enumerate(composed.map) if y != 0)
                raise NotAComplex(f"d∘d 在次数 {i} 处不为零", witness=(i, x))

    @property
    def step(self) -> int:
        return -1 if self.kind == "chain" else 1

    @property
    def degrees(self) -> List[int]:
        return sorted(self.objects)

    def outgoing(self, i: int) -> Optional[ModuleHom]:
        return self.differentials.get(i)

    def incoming(self, i: int) -> Optional[ModuleHom]:
        return self.differentials.get(i - self.step)

    def shifted(self, k: int) -> "Complex":
        return Complex(self.kind, {i + k: M for i, M in self.objects.items()},
                       {i + k: d for i, d in self.differentials.items()})

    @classmethod
    def from_module(cls, M: GammaModule, degree: int = 0, kind: str = "chain") -> "Complex":
        return cls(kind, {degree: M})

    def augmented(self, augmentation: ModuleHom) -> "Complex":
        """链复形在 -1 次接上增广映射 F_0 → M"""
        if self.kind != "chain" or 0 not in self.objects:
            raise NotAComplex("只能对从 0 次开始的链复形做增广")
        objects = dict(self.objects)
        objects[-1] = augmentation.target
        differentials = dict(self.differentials)
        differentials[0] = augmentation
        return Complex("chain", objects, differentials)

    def homology_data(self, i: int) -> Subquotient:
        if i not in self.objects:
            return Subquotient.trivial()
        M = self.objects[i]
        require_group(M, what=f"次数 {i} 的同调")
        out, inc = self.outgoing(i), self.incoming(i)
        cycles = out.kernel_elements() if out is not None else list(M.carrier)
        boundaries = inc.image_elements() if inc is not None else [0]
        return subquotient(M.add, cycles, boundaries)


def homology(C: Complex, i: int) -> FiniteAbelianGroup:
    """
    次数 i 的（上）同调群；存储范围以外的次数返回零群

    异常:
        GroupRequired: 该次数的对象不是加法群模
    """
    return C.homology_data(i).group


class CohomologyResult(BaseModel):
    kind: str
    groups: Dict[int, FiniteAbelianGroup]

    def degree(self, i: int) -> FiniteAbelianGroup:
        return self.groups.get(i, FiniteAbelianGroup.trivial())

    def describe(self) -> Dict[int, str]:
        return {i: str(G) for i, G in sorted(self.groups.items())}


def cohomology(C: Complex) -> CohomologyResult:
    return CohomologyResult(kind=C.kind, groups={i: homology(C, i) for i in C.degrees})


def quasi_isomorphic(C1: Complex, C2: Complex) -> bool:
    """逐次数比较同调群的不变因子（只是拟同构的必要条件）"""
    for i in sorted(set(C1.degrees) | set(C2.degrees)):
        if homology(C1, i).invariant_factors != homology(C2, i).invariant_factors:
            return False
    return True


def euler_characteristic(result: CohomologyResult,
                         mode: Literal["generators", "multiplicative"] = "generators") -> Union[int, Fraction]:
    """
    generators:     Σ (-1)^i · 最小生成元个数
    multiplicative: Π |H^i|^((-1)^i)
    """
    if mode == "generators":
        return sum((-1) ** (i % 2) * G.generator_count for i, G in result.groups.items())
    value = Fraction(1)
    for i, G in result.groups.items():
        value = value * G.order if i % 2 == 0 else value / G.order
    return value


# ---------------------------------------------------------------------------
# Čech 复形
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CechData:
    sheaf: SheafData
    cover: Tuple[int, ...]
    cover_points: Tuple[int, ...]
    tuples: Dict[int, List[Tuple[int, ...]]]
    sums: Dict[int, DirectSum]
    complex: Complex

    def intersection(self, index_tuple: Tuple[int, ...]) -> int:
        points = self.sheaf.spectrum.all_points
        for i in index_tuple:
            points &= self.cover_points[i]
        return points


def cech_data(sheaf: SheafData, cover: Sequence[int]) -> CechData:
    """
    覆盖由元素 a_0..a_r 给出（开集 D(a_i)）

    异常:
        NotACover: 覆盖为空或并不是整个谱
        GroupRequired: 某个交集上的截面模不是加法群（错误信息指出该交集）
    """
    spectrum = sheaf.spectrum
    cover = tuple(int(a) for a in cover)
    if not cover:
        raise NotACover("覆盖不能为空")
    cover_points = tuple(spectrum.basic_points(a) for a in cover)
    union = 0
    for U in cover_points:
        union |= U
    if union != spectrum.all_points:
        raise NotACover(f"D({', '.join(map(str, cover))}) 没有覆盖整个谱",
                        witness=spectrum.describe(spectrum.all_points & ~union))
    r = len(cover)
    tuples = {p: list(itertools.combinations(range(r), p + 1)) for p in range(r)}

    def meet(t: Tuple[int, ...]) -> int:
        points = spectrum.all_points
        for i in t:
            points &= cover_points[i]
        return points

    sums: Dict[int, DirectSum] = {}
    for p, index_tuples in tuples.items():
        components = []
        for t in index_tuples:
            M = section_module(sheaf, meet(t))
            if not M.group_based:
                names = "∩".join(f"D({cover[i]})" for i in t)
                raise GroupRequired(f"{names} 上的截面模不是加法群", witness=spectrum.describe(meet(t)))
            components.append(M)
        sums[p] = direct_sum_many(sheaf.owner, components)

    differentials: Dict[int, ModuleHom] = {}
    for p in range(r - 1):
        src, tgt = sums[p], sums[p + 1]
        face_index = {t: j for j, t in enumerate(tuples[p])}
        out = np.zeros((src.module.size, len(tuples[p + 1])), dtype=np.int64)
        for j, t in enumerate(tuples[p + 1]):
            Mt = tgt.components[j]
            comp = np.zeros(src.module.size, dtype=np.int64)
            for k in range(len(t)):
                face = t[:k] + t[k + 1:]
                rho = np.array(sheaf.restrict(meet(face), meet(t)), dtype=np.int64)
                values = rho[src.vectors[:, face_index[face]]]
                if k % 2:
                    values = Mt.negation[values]
                comp = Mt.add[comp, values]
            out[:, j] = comp
        codes = radix_encode(out, [M.size for M in tgt.components])
        differentials[p] = module_hom(src.module, tgt.module, codes)
    complex_ = Complex("cochain", {p: sums[p].module for p in range(r)}, differentials)
    logger.debug("Čech 复形: 覆盖 %s, 各次数大小 %s", cover, [sums[p].module.size for p in range(r)])
    return CechData(sheaf, cover, cover_points, tuples, sums, complex_)


def cech_complex(sheaf: SheafData, cover: Sequence[int]) -> Complex:
    return cech_data(sheaf, cover).complex


def cech_cohomology(sheaf: SheafData, cover: Sequence[int]) -> CohomologyResult:
    return cohomology(cech_complex(sheaf, cover))


# ---------------------------------------------------------------------------
# 短正合列与长正合列
# ---------------------------------------------------------------------------

def is_short_exact(f: ModuleHom, g: ModuleHom) -> Optional[str]:
    """0 → A →f B →g C → 0 是否正合；返回第一处失败的描述"""
    if f.target.size != g.source.size:
        return "f 的陪域与 g 的定义域不一致"
    if not f.is_injective:
        return "f 不是单射"
    if not g.is_surjective:
        return "g 不是满射"
    if set(f.image_elements()) != set(g.kernel_elements()):
        return "im f ≠ ker g"
    return None


@dataclass(frozen=True, eq=False)
class ChainMap:
    source: Complex
    target: Complex
    maps: Dict[int, ModuleHom]


@dataclass(frozen=True, eq=False)
class ShortExactSequence:
    A: Complex
    B: Complex
    C: Complex
    f: ChainMap
    g: ChainMap


class LongExactReport(BaseModel):
    nodes: List[str]
    group_orders: List[int]
    exact: bool
    first_inexact: Optional[str] = None
    witness: Optional[int] = None


def _input_failure(ses: ShortExactSequence) -> Optional[str]:
    prefix = "H" if ses.A.kind == "chain" else "C"
    for i in sorted(set(ses.A.degrees) | set(ses.B.degrees) | set(ses.C.degrees)):
        f, g = ses.f.maps.get(i), ses.g.maps.get(i)
        if f is None or g is None:
            return f"{prefix}{i}: 缺少链映射"
        reason = is_short_exact(f, g)
        if reason is not None:
            return f"{prefix}{i}: {reason}"
        for X, Y, h in ((ses.A, ses.B, ses.f), (ses.B, ses.C, ses.g)):
            dX, dY = X.outgoing(i), Y.outgoing(i)
            j = i + X.step
            left = [0] * h.maps[i].source.size if dX is None else [h.maps[j].map[y] for y in dX.map]
            right = [0] * h.maps[i].source.size if dY is None else [dY.map[y] for y in h.maps[i].map]
            if left != right:
                return f"{prefix}{i}: 链映射与微分不交换"
    return None


def long_exact_check(ses: ShortExactSequence, strict: bool = True) -> LongExactReport:
    """
    由短正合列 0 → A → B → C → 0 构造长正合列并逐节点检查正合性

    连接映射用图追踪得到：c 的原像 b，db 落在 f 的像中，取其原像 a

    异常:
        NotExactInput: strict 且输入的短序列不正合（或链映射不交换）
    """
    failure = _input_failure(ses)
    if failure is not None:
        if strict:
            raise NotExactInput(f"输入的短序列不正合: {failure}")
        return LongExactReport(nodes=[], group_orders=[], exact=False, first_inexact=f"input {failure}")
    step = ses.A.step
    degrees = sorted(set(ses.A.degrees) | set(ses.B.degrees) | set(ses.C.degrees), reverse=step < 0)
    H = {name: {i: X.homology_data(i) for i in degrees + [degrees[-1] + step]}
         for name, X in (("A", ses.A), ("B", ses.B), ("C", ses.C))}

    def induced(h: ModuleHom, src: Subquotient, tgt: Subquotient) -> np.ndarray:
        return np.array([tgt.labels[h.map[int(r)]] for r in src.reps], dtype=np.int64)

    def connecting(i: int) -> np.ndarray:
        src, tgt = H["C"][i], H["A"][i + step]
        f_next = ses.f.maps.get(i + step)
        dB = ses.B.outgoing(i)
        g_map = ses.g.maps[i].map
        result = []
        for z in src.reps:
            b = g_map.index(int(z))
            if dB is None or f_next is None:
                result.append(0)
                continue
            a = f_next.map.index(dB.map[b])
            result.append(int(tgt.labels[a]))
        return np.array(result, dtype=np.int64)

    nodes: List[Tuple[str, Subquotient]] = []
    maps: List[np.ndarray] = []
    prefix = "H_" if step < 0 else "H^"
    for i in degrees:
        nodes += [(f"{prefix}{i}(A)", H["A"][i]), (f"{prefix}{i}(B)", H["B"][i]), (f"{prefix}{i}(C)", H["C"][i])]
        maps += [induced(ses.f.maps[i], H["A"][i], H["B"][i]),
                 induced(ses.g.maps[i], H["B"][i], H["C"][i]),
                 connecting(i)]

    names = [name for name, _ in nodes]
    orders = [sq.size for _, sq in nodes]
    for k, (name, sq) in enumerate(nodes):
        image_set = set(maps[k - 1].tolist()) if k > 0 else {0}
        kernel_set = {x for x in range(sq.size) if maps[k][x] == 0}
        if image_set != kernel_set:
            witness = min(image_set ^ kernel_set)
            return LongExactReport(nodes=names, group_orders=orders, exact=False,
                                   first_inexact=name, witness=witness)
    return LongExactReport(nodes=names, group_orders=orders, exact=True)


def _induced_section_map(src: LocalizedModule, tgt: LocalizedModule, f: ModuleHom) -> Tuple[int, ...]:
    image_: List[int] = []
    for members in src.classes:
        targets = {int(tgt.class_table[f(x), s]) for x, s in members}
        if len(targets) != 1:
            raise NotWellDefined("截面上的诱导映射依赖代表元", witness=members)
        image_.append(targets.pop())
    return tuple(image_)


def cech_short_exact(f: ModuleHom, g: ModuleHom, cover: Sequence[int],
                     cfg: LocalizationConfig = DEFAULT_CONFIG) -> ShortExactSequence:
    """
    模的短正合列 0 → A → B → C → 0 诱导的 Čech 复形短序列

    异常:
        NotExactInput: 模层面的序列不正合
    """
    reason = is_short_exact(f, g)
    if reason is not None:
        raise NotExactInput(f"模的短序列不正合: {reason}")
    S = f.source.base
    datas = [cech_data(tilde_module(S, M, cfg=cfg), cover) for M in (f.source, f.target, g.target)]

    def chain_map(h: ModuleHom, src: CechData, tgt: CechData) -> ChainMap:
        maps: Dict[int, ModuleHom] = {}
        for p, index_tuples in src.tuples.items():
            s_sum, t_sum = src.sums[p], tgt.sums[p]
            out = np.zeros((s_sum.module.size, len(index_tuples)), dtype=np.int64)
            for j, t in enumerate(index_tuples):
                U = src.intersection(t)
                local = np.array(_induced_section_map(src.sheaf.section(U).data, tgt.sheaf.section(U).data, h),
                                 dtype=np.int64)
                out[:, j] = local[s_sum.vectors[:, j]]
            codes = radix_encode(out, [M.size for M in t_sum.components])
            maps[p] = module_hom(s_sum.module, t_sum.module, codes)
        return ChainMap(src.complex, tgt.complex, maps)

    A, B, C = datas
    return ShortExactSequence(A.complex, B.complex, C.complex, chain_map(f, A, B), chain_map(g, B, C))


# ---------------------------------------------------------------------------
# 自由分解、Tor、Ext
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Resolution:
    module: GammaModule
    frees: Tuple[FreeModule, ...]
    generators: Tuple[Tuple[int, ...], ...]
    complex: Complex
    augmentation: ModuleHom
    stopped_at: Optional[int]

    @property
    def length(self) -> int:
        return len(self.frees) - 1


def free_resolution(M: GammaModule, length: int = config.RESOLUTION_DEPTH,
                    generator_order: Literal["forward", "reverse"] = "forward") -> Resolution:
    """
    自由分解 ... → F_1 → F_0 → M → 0

    每一步取当前模（M 或上一步的核）的贪心极小加法生成集，用同样个数的自由模覆盖它；
    核为零时提前停止（stopped_at 记录该次数）

    异常:
        GroupRequired / IdentityRequired / SizeGuardExceeded
        NotExactInput: 生成元的像生成不了当前模（非单位模）
    """
    require_group(M, what="自由分解")
    S = M.base
    if S.identity_element is None:
        raise IdentityRequired("自由分解需要乘法单位元")
    target = M
    inclusion: Optional[ModuleHom] = None
    frees: List[FreeModule] = []
    generators: List[Tuple[int, ...]] = []
    differentials: Dict[int, ModuleHom] = {}
    augmentation: Optional[ModuleHom] = None
    stopped: Optional[int] = None
    for j in range(length + 1):
        order = list(range(1, target.size))
        if generator_order == "reverse":
            order.reverse()
        gens = greedy_additive_generators(target.add, order)
        F = free_module(S, len(gens))
        try:
            phi = extend_from_generators(F, target, gens)
        except NotAHomomorphism as e:
            raise NotExactInput(f"第 {j} 步无法把基元送到生成元（模不是单位模）", witness=e.witness)
        if not phi.is_surjective:
            raise NotExactInput(f"第 {j} 步生成元的像不能生成整个模", witness=tuple(gens))
        frees.append(F)
        generators.append(tuple(gens))
        if j == 0:
            augmentation = phi
        else:
            differentials[j] = phi.then(inclusion)
        K = kernel(phi)
        if K.module.size == 1:
            stopped = j
            break
        target, inclusion = K.module, K.inclusion
    complex_ = Complex("chain", {j: F.module for j, F in enumerate(frees)}, differentials)
    _verify_exact(complex_, augmentation)
    logger.debug("free_resolution: 秩 %s, stopped_at=%s", [F.rank for F in frees], stopped)
    return Resolution(M, tuple(frees), tuple(generators), complex_, augmentation, stopped)


def _verify_exact(C: Complex, augmentation: ModuleHom) -> None:
    if not augmentation.is_surjective:
        raise NotExactInput("增广映射不是满射")
    for j in C.degrees:
        out = C.outgoing(j) if j > 0 else augmentation
        inc = C.incoming(j)
        if inc is None:
            continue
        if set(inc.image_elements()) != set(out.kernel_elements()):
            raise NotExactInput(f"自由分解在次数 {j} 处不正合")


def tensor_complex(res: Resolution, N: GammaModule) -> Complex:
    products = {j: tensor(F.module, N) for j, F in enumerate(res.frees)}
    idN = identity_hom(N)
    differentials = {j: tensor_map(products[j], products[j - 1], d, idN) for j, d in res.complex.differentials.items()}
    return Complex("chain", {j: tp.module for j, tp in products.items()}, differentials)


def hom_complex(res: Resolution, N: GammaModule) -> Complex:
    homs: Dict[int, HomModule] = {j: hom_module(F.module, N) for j, F in enumerate(res.frees)}
    differentials: Dict[int, ModuleHom] = {}
    for j in range(len(res.frees) - 1):
        d = res.complex.differentials[j + 1]
        images = [homs[j + 1].index_of([phi.map[y] for y in d.map]) for phi in homs[j].homs]
        differentials[j] = module_hom(homs[j].module, homs[j + 1].module, images)
    return Complex("cochain", {j: H.module for j, H in homs.items()}, differentials)


def tor(M: GammaModule, N: GammaModule, i: int,
        generator_order: Literal["forward", "reverse"] = "forward") -> FiniteAbelianGroup:
    """Tor_i(M, N) = H_i(P_• ⊗ N)"""
    check_guard(i, config.RESOLUTION_DEPTH, "Tor 次数")
    res = free_resolution(M, length=i + 1, generator_order=generator_order)
    return homology(tensor_complex(res, N), i)


def ext(M: GammaModule, N: GammaModule, i: int,
        generator_order: Literal["forward", "reverse"] = "forward") -> FiniteAbelianGroup:
    """Ext^i(M, N) = H^i(Hom(P_•, N))"""
    check_guard(i, config.RESOLUTION_DEPTH, "Ext 次数")
    res = free_resolution(M, length=i + 1, generator_order=generator_order)
    return homology(hom_complex(res, N), i)


def pd_upper_bound(M: GammaModule, max_depth: int = config.RESOLUTION_DEPTH) -> Optional[int]:
    """分解核在该次数变为零时返回该次数（投射维数的上界）；深度内未停止返回 None"""
    return free_resolution(M, length=max_depth).stopped_at


# ---------------------------------------------------------------------------
# 平坦性、对偶与扩张分类
# ---------------------------------------------------------------------------

class FlatnessReport(BaseModel):
    tor_vanishes: bool
    preserves_exactness: bool
    consistent: bool
    partners_checked: int
    sequences_checked: int
    failures: List[str] = []


def flatness_report(M: GammaModule, partners: Optional[Sequence[GammaModule]] = None,
                    sequences: Sequence[Tuple[ModuleHom, ModuleHom]] = ()) -> FlatnessReport:
    """
    Tor_1(M, -) 在全部伙伴上为零  vs  M ⊗ - 保持全部短正合列

    参数:
        partners: 省略时取循环商 T/kT，k = 2..n
    """
    if partners is None:
        partners = [cyclic_quotient(M.base, k).module for k in range(2, M.base.order + 1)]
    failures: List[str] = []
    tor_zero = True
    for k, N in enumerate(partners):
        if not tor(M, N, 1).is_trivial:
            tor_zero = False
            failures.append(f"Tor_1(M, partner[{k}]) ≠ 0")
    preserves = True
    idM = identity_hom(M)
    for k, (f, g) in enumerate(sequences):
        tA, tB, tC = tensor(M, f.source), tensor(M, f.target), tensor(M, g.target)
        reason = is_short_exact(tensor_map(tA, tB, idM, f), tensor_map(tB, tC, idM, g))
        if reason is not None:
            preserves = False
            failures.append(f"sequence[{k}]: {reason}")
    return FlatnessReport(tor_vanishes=tor_zero, preserves_exactness=preserves,
                          consistent=tor_zero == preserves, partners_checked=len(partners),
                          sequences_checked=len(sequences), failures=failures)


class DualityReport(BaseModel):
    ext1: Optional[FiniteAbelianGroup] = None
    tor1_dual: Optional[FiniteAbelianGroup] = None
    agree: Optional[bool] = None
    error: Optional[str] = None


def ext_tor_duality(M: GammaModule, N: GammaModule) -> DualityReport:
    """Ext^1(M, N) 与 Tor_1(M^∨, N) 的比较，M^∨ = Hom(M, T)；有限群与其对偶同构，故直接比较不变因子"""
    try:
        dual = hom_module(M, regular_module(M.base)).module
        e1 = ext(M, N, 1)
        t1 = tor(dual, N, 1)
    except GammaError as e:
        return DualityReport(error=f"{type(e).__name__}: {e}")
    return DualityReport(ext1=e1, tor1_dual=t1, agree=e1.invariant_factors == t1.invariant_factors)


class ExtensionClassification(BaseModel):
    class_count: int
    extension_count: int
    cocycle_count: int
    unital_only: bool


def _extension_add(M: GammaModule, N: GammaModule, c: np.ndarray) -> np.ndarray:
    mN = N.size
    codes = np.arange(M.size * mN)
    n_part, m_part = codes % mN, codes // mN
    n_sum = N.add[N.add[n_part[:, None], n_part[None, :]], c[m_part[:, None], m_part[None, :]]]
    return n_sum + mN * M.add[m_part[:, None], m_part[None, :]]


def _extension_action(M: GammaModule, N: GammaModule, omega: np.ndarray) -> np.ndarray:
    mN = N.size
    codes = np.arange(M.size * mN)
    n_part, m_part = codes % mN, codes // mN
    om = omega[:, :, m_part, :, :]
    defined = om >= 0
    n_val = N.add[N.action[:, :, n_part, :, :], np.where(defined, om, 0)]
    return np.where(defined, n_val + mN * M.action[:, :, m_part, :, :], -1)


def classify_extensions(M: GammaModule, N: GammaModule, unital_only: bool = True) -> ExtensionClassification:
    """
    穷举 0 → N → E → M → 0（E = N × M 作为集合）并按等价类计数

    加法 (n,m)+(n',m') = (n+n'+c(m,m'), m+m')，作用 aα(n,m)βb = (aαnβb + ω(a,α,m,β,b), aαmβb)；
    h: M → N 作用为 c' = c + h(m+m') - h(m) - h(m')，ω' = ω + h(aαmβb) - aαh(m)βb

    unital_only 时要求 E 是单位模，即 ω(e,α,m,β,e) = 0
    """
    require_group(M, N, what="扩张分类")
    S = M.base
    n, g, mM, mN = S.order, S.gamma, M.size, N.size
    e = S.identity_element
    if unital_only and e is None:
        raise IdentityRequired("单位扩张需要乘法单位元")
    pairs = [(x, y) for x in range(1, mM) for y in range(x, mM)]
    check_guard(mN ** len(pairs), config.EXTENSION_SEARCH_GUARD, "余圈候选")
    check_guard(mN ** (mM - 1), config.EXTENSION_SEARCH_GUARD, "等价变换")
    logger.debug("classify_extensions: |M|=%s |N|=%s", mM, mN)

    cocycles: List[np.ndarray] = []
    for values in itertools.product(range(mN), repeat=len(pairs)):
        c = np.zeros((mM, mM), dtype=np.int64)
        for (x, y), v in zip(pairs, values):
            c[x, y] = c[y, x] = v
        E_add = _extension_add(M, N, c)
        x, y, z = np.ix_(*[np.arange(E_add.shape[0])] * 3)
        if np.array_equal(E_add[E_add[x, y], z], E_add[x, E_add[y, z]]):
            cocycles.append(c)

    template = np.full((n, g, mM, g, n), -1, dtype=np.int64)
    template[:, :, 0, :, :] = 0
    if unital_only:
        template[e, :, :, :, e] = 0
    free_cells = [int(i) for i in np.flatnonzero(template.ravel() < 0)]
    solutions: List[Tuple[np.ndarray, np.ndarray]] = []

    for c in cocycles:
        E_add = _extension_add(M, N, c)
        omega = template.copy()
        flat = omega.reshape(-1)

        def walk(k: int):
            if module_partial_violation(E_add, _extension_action(M, N, omega), S):
                return
            if k == len(free_cells):
                solutions.append((c, omega.copy()))
                return
            for v in range(mN):
                flat[free_cells[k]] = v
                walk(k + 1)
            flat[free_cells[k]] = -1

        walk(0)

    negN = N.negation
    keys = set()
    shifts = [np.array((0,) + h, dtype=np.int64) for h in itertools.product(range(mN), repeat=mM - 1)]
    for c, omega in solutions:
        best = None
        for h in shifts:
            c2 = N.add[N.add[c, h[M.add]], negN[N.add[h[:, None], h[None, :]]]]
            om2 = N.add[N.add[omega, h[M.action]], negN[N.action[:, :, h, :, :]]]
            key = tuple(c2.ravel().tolist()) + tuple(om2.ravel().tolist())
            if best is None or key < best:
                best = key
        keys.add(best)
    return ExtensionClassification(class_count=len(keys), extension_count=len(solutions),
                                   cocycle_count=len(cocycles), unital_only=unital_only)
