"""
tgs 命令行
批量子命令：读取结构/模文件，运行计算，向标准输出打印 JSON 报告

退出码:
    0  成功（包括"结构不满足公理"这类数学结论）
    1  计算失败（GammaError）
    2  用法错误或文件错误
"""

import argparse
import logging
import sys
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Type

from pydantic import BaseModel

import config
from catalog import Catalog, CatalogEntry, CatalogIndex
from core import AxiomConfig, AxiomReport, Violation, load_structure, verify_axioms
from enumeration import EnumerationTask, run_enumeration
from homology import (
    CohomologyResult,
    FiniteAbelianGroup,
    cech_cohomology,
    euler_characteristic,
    ext,
    tor,
)
from ideals import Ideal, all_ideals, ideal_lattice, is_maximal, is_prime, is_semiprime
from localization import (
    LocalizationConfig,
    LocalizationReport,
    localization_report,
    localize,
    localize_at_prime,
)
from modules import GammaModule, all_homs, hom_module, is_unital, load_module, tensor, verify_module
from sheaf import SheafData, SheafReport, sheaf_report, structure_sheaf, tilde_module
from spectrum import TopologyReport, spec, topology_report
from utils import FILE_ERRORS, GammaError, MalformedFile, from_bits, parse_label_list, to_bits

logger = logging.getLogger(__name__)

Outcome = Tuple[BaseModel, str]


# ---------------------------------------------------------------------------
# 报告类型
# ---------------------------------------------------------------------------

class IdealEntry(BaseModel):
    elements: List[int]
    prime: Optional[bool] = None
    semiprime: Optional[bool] = None
    maximal: Optional[bool] = None


class IdealReport(BaseModel):
    ideal_count: int
    ideals: List[IdealEntry]
    covers: List[Tuple[List[int], List[int]]]


class SpectrumReport(BaseModel):
    points: List[List[int]]
    basic_opens: Dict[int, List[int]]
    topology: Optional[TopologyReport] = None


class ModuleReport(BaseModel):
    size: int
    group_based: bool
    unital: bool
    valid: bool
    violations: List[Violation] = []
    add: List[List[int]] = []
    homs: Optional[List[List[int]]] = None


class CohomologyReport(BaseModel):
    kind: str
    groups: Dict[int, FiniteAbelianGroup]
    describe: Dict[int, str]
    euler_generators: int
    euler_multiplicative: str


class DerivedReport(BaseModel):
    functor: str
    degree: int
    group: FiniteAbelianGroup
    describe: str


class EnumerationReport(BaseModel):
    order: int
    gamma: int
    labeled_count: int
    class_count: int
    complete: bool
    reason: Optional[str] = None
    up_to_iso: bool = False
    written: List[str] = []
    index: Optional[str] = None


class CatalogQueryReport(BaseModel):
    entries: List[CatalogEntry]


REPORTS: Dict[str, Type[BaseModel]] = {
    "axioms": AxiomReport,
    "ideals": IdealReport,
    "spectrum": SpectrumReport,
    "topology": TopologyReport,
    "localization": LocalizationReport,
    "sheaf": SheafReport,
    "module": ModuleReport,
    "cohomology": CohomologyReport,
    "derived": DerivedReport,
    "enumeration": EnumerationReport,
    "catalog-entry": CatalogEntry,
    "catalog-index": CatalogIndex,
    "catalog-query": CatalogQueryReport,
}


def report_schema(name: str) -> dict:
    """内置报告的 JSON Schema"""
    if name not in REPORTS:
        raise KeyError(f"未知的报告类型 {name!r}，可选: {', '.join(sorted(REPORTS))}")
    return REPORTS[name].model_json_schema()


# ---------------------------------------------------------------------------
# 子命令
# ---------------------------------------------------------------------------

def _labels(text: Optional[str]) -> List[int]:
    return parse_label_list(text) if text else []


def _same_base(*modules: GammaModule) -> None:
    first = modules[0].base
    for M in modules[1:]:
        if not first.same_tables(M.base):
            raise MalformedFile("各模文件的底结构不一致")


def _load_modules(paths: Sequence[str], catalog_dir: str) -> List[GammaModule]:
    modules = [load_module(p, catalog_dir) for p in paths]
    _same_base(*modules)
    return modules


def _cmd_verify(args) -> Outcome:
    S = load_structure(args.file)
    report = verify_axioms(S)
    return report, str(report.valid).lower()


def _labeled_name(task: EnumerationTask, i: int) -> str:
    return f"o{task.order}-g{task.gamma}-{i:05d}{config.STRUCTURE_SUFFIX}"


def _cmd_enumerate(args) -> Outcome:
    base = AxiomConfig(commutativity=args.commutativity, zero_absorption=args.zero_absorption)
    task = EnumerationTask(order=args.order, gamma=args.gamma, axiom_config=base,
                           commutative_only=args.commutative_only, max_results=args.max_results,
                           time_budget=args.time_budget, workers=args.workers, stable_order=args.stable_order)
    result = run_enumeration(task)
    out = Catalog(args.out or args.catalog, create=True)
    if args.up_to_iso:
        entries = out.add_many(result.structures)
        written = list(dict.fromkeys(entry.file for entry in entries))
    else:
        written = [_labeled_name(task, i) for i in range(len(result.structures))]
        entries = [out.add_labeled(S, name) for S, name in zip(result.structures, written)]
    report = EnumerationReport(order=task.order, gamma=task.gamma, labeled_count=len(result.structures),
                               class_count=len({entry.hash for entry in entries}), complete=result.complete,
                               reason=result.reason, up_to_iso=args.up_to_iso, written=written,
                               index=out.index_path.name)
    return report, str(report.labeled_count)


def _cmd_ideals(args) -> Outcome:
    S = load_structure(args.file)
    ideals = all_ideals(S)
    if args.classify:
        entries = [
            IdealEntry(elements=I.elements, prime=is_prime(S, I)[0], semiprime=is_semiprime(S, I),
                       maximal=I.is_proper and is_maximal(S, I))
            for I in ideals
        ]
    else:
        entries = [IdealEntry(elements=I.elements) for I in ideals]
    lattice = ideal_lattice(S)
    covers = sorted((from_bits(I), from_bits(J)) for I, J in lattice.edges)
    return IdealReport(ideal_count=len(ideals), ideals=entries, covers=covers), str(len(ideals))


def _cmd_spec(args) -> Outcome:
    S = load_structure(args.file)
    spectrum = spec(S)
    report = SpectrumReport(
        points=[P.elements for P in spectrum.points],
        basic_opens={a: [i for i in range(spectrum.size) if spectrum.basic_points(a) >> i & 1] for a in S.carrier},
        topology=topology_report(spectrum) if args.topology else None,
    )
    return report, str(spectrum.size)


def _localization_config(args) -> LocalizationConfig:
    return LocalizationConfig(relation=args.relation, addition=args.addition)


def _cmd_localize(args) -> Outcome:
    S = load_structure(args.file)
    cfg = _localization_config(args)
    if (args.system is None) == (args.prime is None):
        raise ValueError("--system 与 --prime 必须且只能给出一个")
    if args.prime is not None:
        loc = localize_at_prime(S, Ideal(S, to_bits(_labels(args.prime))), cfg)
    else:
        loc = localize(S, _labels(args.system), cfg)
    report = localization_report(loc)
    return report, str(report.class_count)


def _sheaf_from_args(args) -> SheafData:
    S = load_structure(args.file)
    cfg = _localization_config(args)
    if args.module:
        M = load_module(args.module, args.catalog)
        if not S.same_tables(M.base):
            raise MalformedFile("模文件的底结构与结构文件不一致")
        return tilde_module(M.base, M, cfg=cfg, workers=args.workers)
    return structure_sheaf(S, cfg=cfg, workers=args.workers)


def _cmd_sheaf(args) -> Outcome:
    sheaf = _sheaf_from_args(args)
    open_points = to_bits(_labels(args.open)) if args.open else None
    report = sheaf_report(sheaf, open_points)
    return report, str(len(report.basic_opens))


def _module_report(M: GammaModule, homs: Optional[List[List[int]]] = None) -> ModuleReport:
    axioms = verify_module(M)
    return ModuleReport(size=M.size, group_based=M.group_based, unital=is_unital(M), valid=axioms.valid,
                        violations=axioms.violations, add=M.add.tolist(), homs=homs)


def _cmd_module(args) -> Outcome:
    modules = _load_modules(args.files, args.catalog)
    if args.action == "verify":
        report = _module_report(modules[0])
        return report, str(report.valid).lower()
    if len(modules) != 2:
        raise ValueError(f"module {args.action} 需要两个模文件")
    M, N = modules
    if args.action == "homs":
        maps = [list(h.map) for h in all_homs(M, N)]
        report = _module_report(M, homs=maps)
        return report, str(len(maps))
    if args.action == "tensor":
        report = _module_report(tensor(M, N).module)
    else:
        report = _module_report(hom_module(M, N).module)
    return report, str(report.size)


def _cohomology_report(result: CohomologyResult) -> CohomologyReport:
    return CohomologyReport(kind=result.kind, groups=result.groups, describe=result.describe(),
                            euler_generators=euler_characteristic(result, "generators"),
                            euler_multiplicative=str(euler_characteristic(result, "multiplicative")))


def _cech(args) -> CohomologyResult:
    return cech_cohomology(_sheaf_from_args(args), _labels(args.cover))


def _cmd_cech(args) -> Outcome:
    report = _cohomology_report(_cech(args))
    return report, " ".join(f"{i}:{text}" for i, text in report.describe.items())


def _cmd_euler(args) -> Outcome:
    report = _cohomology_report(_cech(args))
    primary = report.euler_generators if args.mode == "generators" else report.euler_multiplicative
    return report, str(primary)


def _derived(name: str, fn: Callable[..., FiniteAbelianGroup]) -> Callable:
    def run_derived(args) -> Outcome:
        M, N = _load_modules([args.left, args.right], args.catalog)
        group = fn(M, N, args.degree, generator_order=args.generator_order)
        return DerivedReport(functor=name, degree=args.degree, group=group, describe=str(group)), str(group)

    return run_derived


def _cmd_catalog(args) -> Outcome:
    catalog = Catalog(args.catalog, create=args.action != "query")
    if args.action == "add":
        entries = [catalog.add(load_structure(path)) for path in args.files]
        return CatalogQueryReport(entries=entries), str(len(entries))
    if args.action == "rebuild":
        index = catalog.rebuild()
        return index, str(len(index.entries))
    entries = catalog.query(order=args.order, gamma=args.gamma, flags=args.flag or [])
    return CatalogQueryReport(entries=entries), str(len(entries))


class SchemaReport(BaseModel):
    name: str
    json_schema: dict


def _cmd_schema(args) -> Outcome:
    try:
        schema = report_schema(args.name)
    except KeyError as e:
        raise ValueError(str(e.args[0]))
    return SchemaReport(name=args.name, json_schema=schema), args.name


# ---------------------------------------------------------------------------
# 参数解析
# ---------------------------------------------------------------------------

def _add_localization_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--relation", choices=["doubled", "undoubled"], default="doubled")
    p.add_argument("--addition", choices=["balanced", "literal"], default="balanced")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tgs", description="有限交换三元 Γ-半环工具")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--quiet", action="store_true", help="只输出主要结果")
    verbosity.add_argument("--verbose", action="store_true", help="输出调试日志")
    parser.add_argument("--catalog", default=config.DEFAULT_CATALOG_DIR, help="结构目录")
    parser.add_argument("--workers", type=int, default=config.DEFAULT_WORKERS, help="并发线程数（默认取 TGS_WORKERS）")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="检查结构公理")
    p.add_argument("file")
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser("enumerate", help="枚举给定阶的全部结构")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--gamma", type=int, default=1)
    p.add_argument("--commutativity", choices=["swap12", "full-symmetric", "off"], default="swap12")
    p.add_argument("--zero-absorption", choices=["middle", "all-slots"], default="all-slots")
    p.add_argument("--commutative", dest="commutative_only", action="store_true", help="强制交换律（--commutativity off 时改用 swap12）")
    p.add_argument("--up-to-iso", action="store_true", help="每个同构类只写一个规范形文件")
    p.add_argument("--stable-order", action="store_true", help="顺序搜索，结果顺序稳定")
    p.add_argument("--max-results", type=int)
    p.add_argument("--time-budget", type=float)
    p.add_argument("--out", help="输出目录（默认写入结构目录）")
    p.set_defaults(handler=_cmd_enumerate)

    p = sub.add_parser("ideals", help="全部理想及其素性")
    p.add_argument("file")
    p.add_argument("--classify", action="store_true", help="标出素、半素、极大理想")
    p.set_defaults(handler=_cmd_ideals)

    p = sub.add_parser("spec", help="素谱与拓扑")
    p.add_argument("file")
    p.add_argument("--topology", action="store_true", help="附带拓扑诊断")
    p.set_defaults(handler=_cmd_spec)

    p = sub.add_parser("localize", help="在乘法系或素理想处局部化")
    p.add_argument("file")
    p.add_argument("--system", help="乘法系元素，例如 1,2,4,5")
    p.add_argument("--prime", help="素理想元素，例如 0,3")
    _add_localization_flags(p)
    p.set_defaults(handler=_cmd_localize)

    p = sub.add_parser("sheaf", help="结构层或模层")
    p.add_argument("file")
    p.add_argument("--module", help="模文件，给出时构造 M̃")
    p.add_argument("--open", help="额外计算该开集（谱点下标）上的截面")
    _add_localization_flags(p)
    p.set_defaults(handler=_cmd_sheaf)

    p = sub.add_parser("module", help="模运算")
    p.add_argument("action", choices=["verify", "homs", "tensor", "hom-module"])
    p.add_argument("files", nargs="+")
    p.set_defaults(handler=_cmd_module)

    for name, handler in (("cech", _cmd_cech), ("euler", _cmd_euler)):
        p = sub.add_parser(name, help="Čech 上同调" if name == "cech" else "Euler 示性数")
        p.add_argument("file", help="结构文件")
        p.add_argument("--cover", required=True, help="覆盖元素，例如 2,3")
        p.add_argument("--module", help="模文件，给出时对 M̃ 计算")
        if name == "euler":
            p.add_argument("--mode", choices=["generators", "multiplicative"], default="generators")
        _add_localization_flags(p)
        p.set_defaults(handler=handler)

    for name, fn in (("tor", tor), ("ext", ext)):
        p = sub.add_parser(name, help=f"{name.capitalize()}_i(M, N)")
        p.add_argument("left")
        p.add_argument("right")
        p.add_argument("--i", "--degree", dest="degree", type=int, default=1)
        p.add_argument("--generator-order", choices=["forward", "reverse"], default="forward")
        p.set_defaults(handler=_derived(name, fn))

    p = sub.add_parser("catalog", help="结构目录")
    p.add_argument("action", choices=["add", "query", "rebuild"])
    p.add_argument("files", nargs="*")
    p.add_argument("--order", type=int)
    p.add_argument("--gamma", type=int)
    p.add_argument("--flag", action="append")
    p.set_defaults(handler=_cmd_catalog)

    p = sub.add_parser("schema", help="打印报告的 JSON Schema")
    p.add_argument("name", choices=sorted(REPORTS))
    p.set_defaults(handler=_cmd_schema)
    return parser


def _configure_logging(args) -> None:
    level = config.LOG_LEVEL
    if args.verbose:
        level = "DEBUG"
    elif args.quiet:
        level = "ERROR"
    logging.basicConfig(level=level, format=config.LOG_FORMAT, stream=sys.stderr, force=True)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    执行一条 tgs 命令

    参数:
        argv: 命令行参数（不含程序名）；None 时读取 sys.argv

    返回:
        int: 退出码
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    _configure_logging(args)
    try:
        report, primary = args.handler(args)
    except FILE_ERRORS as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    except GammaError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        print(f"hint: tgs {args.command} --help", file=sys.stderr)
        return 2
    if args.quiet:
        print(primary)
    else:
        print(report.model_dump_json(indent=2))
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
