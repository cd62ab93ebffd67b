"""
localization：分式类、良定性、素理想处局部化、泛性质
"""

import pytest

from core import isomorphic, multiplicative_identity, structure_from_functions, verify_axioms
from ideals import Ideal
from localization import (
    LocalizationConfig,
    fraction_reindex,
    inverts_system,
    is_multiplicative_system,
    localization_report,
    localize,
    localize_at_prime,
    localize_module,
    multiplicative_closure,
    multiplicative_system,
    universal_extensions,
)
from modules import regular_module, verify_module
from utils import InvalidSystem, NotWellDefined, to_bits


class TestSystems:
    @pytest.mark.parametrize("subset, ok", [
        ([1, 2, 4, 5], True),
        ([1, 3, 5], True),
        ([1, 5], True),
        ([0, 1], False),
        ([2, 4], False),
        ([1, 2], False),
    ])
    def test_membership(self, z6_mult, subset, ok):
        assert is_multiplicative_system(z6_mult, subset) == ok

    def test_invalid_system_raises(self, z6_mult):
        with pytest.raises(InvalidSystem):
            localize(z6_mult, [1, 2])

    def test_closure(self, z6_mult):
        assert multiplicative_closure(z6_mult, [2]).elements == [1, 2, 4]
        assert multiplicative_closure(z6_mult, [3]).elements == [1, 3]

    def test_closure_reaching_zero(self, z6_mult):
        with pytest.raises(InvalidSystem):
            multiplicative_closure(z6_mult, [0])

    def test_anchor_is_identity(self, z6_mult):
        assert multiplicative_system(z6_mult, [1, 3, 5]).anchor == 1


class TestZ6:
    def test_away_from_three_gives_z3(self, z6_mult, z3_mult):
        loc = localize(z6_mult, [1, 2, 4, 5])
        assert loc.size == 3
        assert isomorphic(loc.semiring, z3_mult) is not None
        assert verify_axioms(loc.semiring).valid
        assert loc.units_ok

    def test_odd_system_gives_z2(self, z6_mult, z2_mult):
        loc = localize(z6_mult, [1, 3, 5])
        assert loc.size == 2
        assert isomorphic(loc.semiring, z2_mult) is not None

    def test_units_only_changes_nothing(self, z6_mult):
        loc = localize(z6_mult, [1, 5])
        assert loc.size == 6
        assert isomorphic(loc.semiring, z6_mult) is not None
        assert sorted(loc.canonical_map) == list(range(6))

    def test_undoubled_relation(self, z6_mult):
        loc = localize(z6_mult, [1, 2, 4, 5], LocalizationConfig(relation="undoubled"))
        assert loc.size == 3

    def test_literal_addition_is_not_well_defined(self, z6_mult):
        with pytest.raises(NotWellDefined) as info:
            localize(z6_mult, [1, 2, 4, 5], LocalizationConfig(addition="literal"))
        assert info.value.witness is not None

    def test_class_of_rejects_non_member_denominator(self, z6_mult):
        loc = localize(z6_mult, [1, 3, 5])
        with pytest.raises(InvalidSystem):
            loc.class_of(1, 2)

    def test_report(self, z6_mult):
        report = localization_report(localize(z6_mult, [1, 2, 4, 5]))
        assert report.class_count == 3
        assert report.axioms_ok
        assert report.relation == "doubled"
        assert report.maximal_ideal is None
        assert sum(len(c) for c in report.classes) == 6 * 4


class TestWithoutIdentity:
    @pytest.fixture
    def twisted_z3(self):
        """Z3，三元运算 2abc：没有乘法单位元"""
        return structure_from_functions(3, 1, lambda a, b: (a + b) % 3, lambda a, al, b, be, c: (2 * a * b * c) % 3)

    def test_anchor_is_least_member(self, twisted_z3):
        assert multiplicative_identity(twisted_z3) is None
        loc = localize(twisted_z3, [1, 2])
        assert loc.system.anchor == 1
        assert loc.size == 3
        assert loc.units_ok
        assert sorted(loc.canonical_map) == [0, 1, 2]

    def test_gamma_two_addition(self, z3_gamma2):
        loc = localize(z3_gamma2, [1, 2])
        assert loc.size == 3
        assert verify_axioms(loc.semiring).valid
        lam = loc.canonical_map
        for a in range(3):
            for b in range(3):
                assert loc.semiring.add[lam[a], lam[b]] == lam[(a + b) % 3]
        assert loc.units_ok


class TestAtPrime:
    @pytest.mark.parametrize("prime, size", [([0, 3], 3), ([0, 2, 4], 2)])
    def test_local_ring_has_unique_maximal_ideal(self, z6_mult, prime, size):
        loc = localize_at_prime(z6_mult, Ideal(z6_mult, to_bits(prime)))
        assert loc.size == size
        assert loc.maximal_ideal.elements == [0]
        assert loc.prime.elements == prime

    def test_non_prime_is_rejected(self, z6_mult):
        with pytest.raises(InvalidSystem):
            localize_at_prime(z6_mult, Ideal(z6_mult, 1))


class TestUniversalProperty:
    def test_reduction_mod_three_factors_uniquely(self, z6_mult, z3_mult):
        loc = localize(z6_mult, [1, 2, 4, 5])
        f = [x % 3 for x in range(6)]
        assert inverts_system(z3_mult, f, loc.system)
        assert len(universal_extensions(loc, z3_mult, f)) == 1

    def test_restriction_commutes_with_canonical_maps(self, z6_mult):
        small = localize(z6_mult, [1, 5])
        big = localize(z6_mult, [1, 2, 4, 5])
        reindex = fraction_reindex(small, big)
        assert [reindex[small.canonical_map[x]] for x in range(6)] == list(big.canonical_map)

    def test_restriction_needs_inclusion(self, z6_mult):
        with pytest.raises(InvalidSystem):
            fraction_reindex(localize(z6_mult, [1, 3, 5]), localize(z6_mult, [1, 2, 4, 5]))


class TestModules:
    def test_regular_module_matches_semiring(self, z6_mult):
        loc = localize_module(regular_module(z6_mult), [1, 2, 4, 5])
        assert loc.size == 3
        assert verify_module(loc.module).valid

    def test_torsion_module_dies(self, z6_three):
        # 3 作用在 Z3 上为零，且 3 在乘法系中
        assert localize_module(z6_three, [1, 3, 5]).size == 1

    def test_module_survives_where_it_lives(self, z6_three):
        assert localize_module(z6_three, [1, 2, 4, 5]).size == 3
