"""
结构目录
以规范形哈希为键持久化结构文件，索引保存在目录下的 index.json
"""

import logging
from pathlib import Path
from threading import Lock
from typing import Dict, List, Optional, Sequence

from pydantic import BaseModel, ValidationError

import config
from core import GammaSemiring, canonical_form, canonical_hash, load_structure, save_structure
from utils import CorruptIndex, GammaError, MalformedFile, load_json, write_json

logger = logging.getLogger(__name__)


class CatalogEntry(BaseModel):
    hash: str
    file: str
    order: int
    gamma: int
    flags: List[str] = []


class CatalogIndex(BaseModel):
    version: int = 1
    entries: Dict[str, CatalogEntry] = {}


def structure_flags(S: GammaSemiring) -> List[str]:
    """目录查询可用的标记"""
    flags = [f"commutativity={S.axiom_config.commutativity}"]
    if S.is_group_based:
        flags.append("group")
    if S.identity_element is not None:
        flags.append("identity")
    return flags


class Catalog:
    """
    结构目录

    add 按规范形哈希去重；query 只返回能解析且哈希一致的条目
    """

    def __init__(self, directory, create: bool = False):
        self.directory = Path(directory)
        self.index_path = self.directory / config.CATALOG_INDEX_NAME
        self._lock = Lock()
        if create:
            self.directory.mkdir(parents=True, exist_ok=True)

    def load_index(self) -> CatalogIndex:
        """
        读取索引

        异常:
            CorruptIndex: 索引不是合法 JSON 或字段不符（可用 rebuild 修复）
        """
        data = load_json(self.index_path)
        try:
            return CatalogIndex.model_validate(data)
        except ValidationError as e:
            raise CorruptIndex(f"{self.index_path} 字段不符: {e.errors()[0]['msg']}")

    def _save_index(self, index: CatalogIndex) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        write_json(self.index_path, index.model_dump())

    def add(self, S: GammaSemiring) -> CatalogEntry:
        """
        保存结构的规范形；相同哈希的结构只保存一次

        返回:
            CatalogEntry: 新建或已存在的条目
        """
        key = canonical_hash(S)
        with self._lock:
            index = self.load_index()
            if key in index.entries:
                logger.debug("目录中已存在 %s", key[:16])
                return index.entries[key]
            canonical, _ = canonical_form(S)
            name = f"{key[:16]}{config.STRUCTURE_SUFFIX}"
            self.directory.mkdir(parents=True, exist_ok=True)
            save_structure(canonical, self.directory / name)
            entry = CatalogEntry(hash=key, file=name, order=S.order, gamma=S.gamma, flags=structure_flags(S))
            index.entries[key] = entry
            self._save_index(index)
        logger.info("已加入目录: %s (order=%s, gamma=%s)", name, S.order, S.gamma)
        return entry

    def add_many(self, structures: Sequence[GammaSemiring]) -> List[CatalogEntry]:
        return [self.add(S) for S in structures]

    def add_labeled(self, S: GammaSemiring, name: str) -> CatalogEntry:
        """
        按原标号把结构写入 name；索引中每个规范形哈希只指向第一个写入的文件

        返回:
            CatalogEntry: 该结构所在同构类的条目
        """
        key = canonical_hash(S)
        with self._lock:
            self.directory.mkdir(parents=True, exist_ok=True)
            save_structure(S, self.directory / name)
            index = self.load_index()
            if key not in index.entries:
                index.entries[key] = CatalogEntry(hash=key, file=name, order=S.order, gamma=S.gamma,
                                                  flags=structure_flags(S))
                self._save_index(index)
        return index.entries[key]

    def _load_checked(self, entry: CatalogEntry) -> Optional[GammaSemiring]:
        path = self.directory / entry.file
        try:
            S = load_structure(path)
        except GammaError as e:
            logger.warning("跳过无法解析的目录条目 %s: %s", entry.file, e)
            return None
        if canonical_hash(S) != entry.hash:
            logger.warning("跳过哈希不一致的目录条目 %s", entry.file)
            return None
        return S

    def query(self, order: Optional[int] = None, gamma: Optional[int] = None,
              flags: Sequence[str] = ()) -> List[CatalogEntry]:
        """
        按阶、Γ 大小和标记筛选

        返回:
            List[CatalogEntry]: 按 (order, gamma, hash) 排序；过期条目被跳过并记录警告
        """
        index = self.load_index()
        found = []
        for entry in index.entries.values():
            if order is not None and entry.order != order:
                continue
            if gamma is not None and entry.gamma != gamma:
                continue
            if any(flag not in entry.flags for flag in flags):
                continue
            if self._load_checked(entry) is None:
                continue
            found.append(entry)
        found.sort(key=lambda e: (e.order, e.gamma, e.hash))
        return found

    def load(self, entry: CatalogEntry) -> GammaSemiring:
        S = self._load_checked(entry)
        if S is None:
            raise CorruptIndex(f"目录条目 {entry.file} 已过期")
        return S

    def lookup(self, key: str) -> GammaSemiring:
        """
        按哈希（或其唯一前缀）取出结构

        异常:
            MalformedFile: 没有匹配或前缀不唯一
        """
        index = self.load_index()
        matches = [entry for h, entry in index.entries.items() if h.startswith(key)]
        if len(matches) != 1:
            raise MalformedFile(f"目录中找不到唯一匹配 sha256:{key} 的结构（匹配 {len(matches)} 个）")
        return self.load(matches[0])

    def rebuild(self) -> CatalogIndex:
        """扫描目录中的结构文件重建索引，无法解析的文件被跳过"""
        index = CatalogIndex()
        for path in sorted(self.directory.glob(f"*{config.STRUCTURE_SUFFIX}")):
            try:
                S = load_structure(path)
            except GammaError as e:
                logger.warning("重建索引时跳过 %s: %s", path.name, e)
                continue
            key = canonical_hash(S)
            index.entries[key] = CatalogEntry(hash=key, file=path.name, order=S.order, gamma=S.gamma,
                                              flags=structure_flags(S))
        with self._lock:
            self._save_index(index)
        logger.info("目录索引已重建: %s 个条目", len(index.entries))
        return index
