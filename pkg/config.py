"""
配置文件
用于管理 tgs 的运行参数，包括各类规模保护上限、并发与日志设置
所有上限都会乘以环境变量 TGS_GUARD 给出的缩放系数
"""

import logging
import os
from typing import Optional

logger = logging.getLogger(__name__)


def _read_scale() -> float:
    raw: Optional[str] = os.getenv("TGS_GUARD")
    if raw is None or raw.strip() == "":
        return 1.0
    try:
        value = float(raw)
    except ValueError:
        logger.warning("TGS_GUARD=%r 不是数字，使用默认值 1.0", raw)
        return 1.0
    if value <= 0:
        logger.warning("TGS_GUARD=%r 必须为正数，使用默认值 1.0", raw)
        return 1.0
    return value


# 规模保护缩放系数
GUARD_SCALE: float = _read_scale()

# 枚举：三元表候选格子上限
ENUM_CELL_GUARD: int = 2 ** 20
# 枚举：按前 k 个自由格子划分搜索树
ENUM_PARTITION_CELLS: int = 2

# 理想格：子集枚举允许的最大阶
IDEAL_SUBSET_MAX_ORDER: int = 16

# 规范形：载体置换 × Γ 置换 的数量上限
CANONICAL_PERM_GUARD: int = 10 ** 6

# 模同态穷举上限 |N|^|M|
HOM_SEARCH_GUARD: int = 2 ** 20
# 显式构造的自由模最大元素数
FREE_MODULE_MAX_SIZE: int = 729
# 张量积背后隐式自由模的元素数上限
TENSOR_UNIVERSE_GUARD: int = 2 ** 16
# 直和（Čech 链）显式构造的最大元素数
COCHAIN_SIZE_GUARD: int = 2048
# 扩张分类穷举上限
EXTENSION_SEARCH_GUARD: int = 2 ** 16

# 自由分解默认长度（Tor/Ext 最大次数）
RESOLUTION_DEPTH: int = 2

# 层构造时穷举验证粘合的谱点数上限
GLUING_CHECK_MAX_POINTS: int = 4

# 每条公理最多记录的反例数
MAX_WITNESSES_PER_AXIOM: int = 5

# 并发
DEFAULT_WORKERS: int = int(os.getenv("TGS_WORKERS", "4"))

# 日志
LOG_LEVEL: str = os.getenv("TGS_LOG_LEVEL", "WARNING")
LOG_FORMAT: str = "%(asctime)s - %(levelname)s - %(message)s"

# 结构目录
DEFAULT_CATALOG_DIR: str = os.getenv("TGS_CATALOG", "catalog")
CATALOG_INDEX_NAME: str = "index.json"
STRUCTURE_SUFFIX: str = ".tgs"


def scaled_guard(limit: int) -> int:
    """按 TGS_GUARD 缩放后的上限"""
    return max(1, int(limit * GUARD_SCALE))
