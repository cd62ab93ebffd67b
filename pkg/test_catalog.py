"""
catalog：按规范形哈希去重、查询、过期条目与索引重建
"""

import pytest

from catalog import Catalog, structure_flags
from core import Relabeling, canonical_hash, isomorphic, relabel
from modules import load_module, regular_module, serialize_module
from utils import CorruptIndex, MalformedFile


@pytest.fixture
def catalog(tmp_path):
    return Catalog(tmp_path / "catalog", create=True)


def test_empty_catalog_has_no_entries(tmp_path):
    assert Catalog(tmp_path / "missing").query() == []


def test_add_is_idempotent_up_to_isomorphism(catalog, z6_mult):
    first = catalog.add(z6_mult)
    again = catalog.add(relabel(z6_mult, Relabeling((0, 2, 1, 3, 4, 5), (0,))))
    assert again == first
    assert first.hash == canonical_hash(z6_mult)
    assert first.file == f"{first.hash[:16]}.tgs"
    assert (catalog.directory / first.file).exists()
    assert len(catalog.load_index().entries) == 1


def test_flags(z6_mult, chain3):
    assert structure_flags(z6_mult) == ["commutativity=swap12", "group", "identity"]
    assert structure_flags(chain3) == ["commutativity=swap12", "identity"]


def test_query_filters(catalog, z6_mult, z3_mult, chain3):
    catalog.add_many([z6_mult, z3_mult, chain3])
    assert len(catalog.query()) == 3
    order_three = catalog.query(order=3)
    assert len(order_three) == 2
    assert [e.hash for e in order_three] == sorted(e.hash for e in order_three)
    assert {e.order for e in catalog.query(flags=["group"])} == {3, 6}
    assert catalog.query(gamma=2) == []


def test_lookup_by_prefix(catalog, z3_mult):
    entry = catalog.add(z3_mult)
    assert isomorphic(catalog.lookup(entry.hash[:10]), z3_mult) is not None
    with pytest.raises(MalformedFile):
        catalog.lookup("ffff" * 16)


def test_stale_entry_is_skipped(catalog, z3_mult, z6_mult):
    stale = catalog.add(z3_mult)
    catalog.add(z6_mult)
    (catalog.directory / stale.file).unlink()
    assert [e.order for e in catalog.query()] == [6]
    with pytest.raises(CorruptIndex):
        catalog.load(stale)


@pytest.mark.parametrize("content", ["not json", '{"entries": 5}'])
def test_corrupt_index(catalog, content):
    catalog.index_path.write_text(content, encoding="utf-8")
    with pytest.raises(CorruptIndex):
        catalog.query()


def test_rebuild_recovers_entries(catalog, z3_mult, chain3):
    catalog.add_many([z3_mult, chain3])
    catalog.index_path.write_text("not json", encoding="utf-8")
    index = catalog.rebuild()
    assert len(index.entries) == 2
    assert len(catalog.query(order=3)) == 2


def test_module_base_by_hash(tmp_path, catalog, z3_mult):
    entry = catalog.add(z3_mult)
    base = catalog.load(entry)
    path = tmp_path / "regular.tgm"
    path.write_text(serialize_module(regular_module(base), base_ref=f"sha256:{entry.hash[:16]}"), encoding="utf-8")
    M = load_module(path, catalog_dir=str(catalog.directory))
    assert M.same_tables(regular_module(base))
