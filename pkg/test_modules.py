"""
modules：模公理、同态、Hom 模、张量积、子模与商、模文件
"""

import pytest

from core import structure_from_functions
from modules import (
    adjunction_check,
    all_homs,
    cyclic_quotient,
    direct_sum,
    extend_from_generators,
    find_module_isomorphism,
    free_module,
    generated_submodule,
    hom_failure,
    hom_module,
    identity_hom,
    image,
    is_module_congruence,
    is_unital,
    kernel,
    module_from_functions,
    module_hom,
    multiple_submodule,
    parse_module,
    quotient,
    regular_module,
    serialize_module,
    submodule,
    zero_hom,
    tensor,
    tensor_map,
    verify_module,
)
from utils import GroupRequired, IdentityRequired, MalformedFile, NotAHomomorphism, NotASubmodule

Z2_INLINE = """base inline
order 2
gamma 1
add
0 1
1 0
ternary
0 0
0 0
0 0
0 1
end
size 2
add
0 1
1 0
"""


@pytest.fixture
def z3_null():
    """Z3 加法、三元运算恒为 0：没有乘法单位元"""
    return structure_from_functions(3, 1, lambda a, b: (a + b) % 3, lambda a, al, b, be, c: 0)


class TestAxioms:
    def test_corpus_modules_are_valid(self, z3_regular, z6_regular, z6_two, z6_three, z3_zero_action):
        for M in (z3_regular, z6_regular, z6_two, z6_three, z3_zero_action):
            assert verify_module(M).valid

    def test_nonzero_action_on_zero_is_rejected(self, z3_mult):
        M = module_from_functions(z3_mult, 3, lambda x, y: (x + y) % 3, lambda a, al, x, be, b: (a * x * b + 1) % 3)
        axioms = {v.axiom for v in verify_module(M).violations}
        assert "action_zero_x" in axioms

    def test_unital(self, z3_regular, z3_zero_action):
        assert is_unital(z3_regular)
        assert not is_unital(z3_zero_action)

    def test_group_based(self, z6_regular, chain3):
        assert z6_regular.group_based
        assert z6_regular.neg(1) == 5
        assert not regular_module(chain3).group_based
        with pytest.raises(GroupRequired):
            regular_module(chain3).neg(1)


class TestHoms:
    def test_endomorphisms_of_z3(self, z3_regular):
        assert [h.map for h in all_homs(z3_regular, z3_regular)] == [(0, 0, 0), (0, 1, 2), (0, 2, 1)]

    def test_homs_between_z6_modules(self, z6_regular, z6_two):
        assert [h.map for h in all_homs(z6_regular, z6_two)] == [(0,) * 6, (0, 1, 0, 1, 0, 1)]
        assert [h.map for h in all_homs(z6_two, z6_regular)] == [(0, 0), (0, 3)]

    def test_non_homomorphism_is_rejected(self, z3_regular):
        assert hom_failure(z3_regular, z3_regular, (0, 1, 1))[0] == "additive"
        with pytest.raises(NotAHomomorphism):
            module_hom(z3_regular, z3_regular, (0, 1, 1))

    def test_hom_module_of_z3(self, z3_regular):
        H = hom_module(z3_regular, z3_regular)
        assert H.module.size == 3
        assert verify_module(H.module).valid
        assert H.index_of((0, 2, 1)) == 2

    def test_hom_module_lookup_of_non_hom(self, z3_regular):
        with pytest.raises(KeyError):
            hom_module(z3_regular, z3_regular).index_of((0, 1, 1))


class TestSubAndQuotient:
    def test_kernel_and_image_of_reduction(self, z6_regular, z6_two):
        f = module_hom(z6_regular, z6_two, [x % 2 for x in range(6)])
        assert kernel(f).elements == (0, 2, 4)
        assert image(f).elements == (0, 1)

    def test_quotient_by_three(self, z6_regular, z6_three):
        sub = submodule(z6_regular, [0, 3])
        Q = quotient(z6_regular, sub)
        assert Q.module.size == 3
        assert Q.representatives == (0, 1, 2)
        assert find_module_isomorphism(Q.module, z6_three) is not None

    def test_multiples_and_cyclic_quotients(self, z6_mult, z6_regular, z6_two, z6_three):
        assert multiple_submodule(z6_regular, 2).elements == (0, 2, 4)
        assert multiple_submodule(z6_regular, 6).elements == (0,)
        assert find_module_isomorphism(cyclic_quotient(z6_mult, 2).module, z6_two) is not None
        assert find_module_isomorphism(cyclic_quotient(z6_mult, 3).module, z6_three) is not None

    def test_submodule_must_be_closed(self, z6_regular):
        with pytest.raises(NotASubmodule):
            submodule(z6_regular, [0, 1])
        with pytest.raises(NotASubmodule):
            submodule(z6_regular, [3])

    def test_generated_submodule(self, z6_regular):
        assert generated_submodule(z6_regular, [2]).elements == (0, 2, 4)

    def test_semigroup_module_has_no_submodules(self, chain3):
        with pytest.raises(GroupRequired):
            submodule(regular_module(chain3), [0])

    def test_direct_sum_is_chinese_remainder(self, z6_regular, z6_two, z6_three):
        D = direct_sum(z6_two, z6_three)
        assert D.module.size == 6
        assert verify_module(D.module).valid
        for h in D.inclusions + D.projections:
            assert hom_failure(h.source, h.target, h.map) is None
        assert find_module_isomorphism(D.module, z6_regular) is not None

    def test_module_congruence(self, z6_regular):
        assert is_module_congruence(z6_regular, [x % 3 for x in range(6)]) == (True, None)
        ok, witness = is_module_congruence(z6_regular, [0, 0, 1, 2, 3, 4])
        assert not ok
        assert witness[0] == "add"


class TestFreeModules:
    def test_rank_two_over_z3(self, z3_mult, z3_regular):
        free = free_module(z3_mult, 2)
        assert free.module.size == 9
        assert free.basis == (3, 1)
        assert verify_module(free.module).valid
        hom = extend_from_generators(free, z3_regular, [1, 2])
        assert (hom(3), hom(1)) == (1, 2)

    def test_extension_needs_identity(self, z3_null):
        free = free_module(z3_null, 1)
        assert free.basis is None
        with pytest.raises(IdentityRequired):
            extend_from_generators(free, regular_module(z3_null), [1])


class TestTensor:
    def test_z3_tensor_z3(self, z3_regular):
        tp = tensor(z3_regular, z3_regular)
        assert tp.module.size == 3
        assert verify_module(tp.module).valid
        assert find_module_isomorphism(tp.module, z3_regular) is not None

    def test_balanced_symbols(self, z3_regular):
        tp = tensor(z3_regular, z3_regular)
        assert tp.balanced[0].tolist() == [0, 0, 0]
        assert tp.balanced[1, 2] == tp.balanced[2, 1]

    def test_tensor_map_is_functorial(self, z3_regular):
        tp = tensor(z3_regular, z3_regular)
        idM = identity_hom(z3_regular)
        assert tensor_map(tp, tp, idM, idM).map == (0, 1, 2)
        assert tensor_map(tp, tp, zero_hom(z3_regular, z3_regular), idM).is_zero

    def test_zero_action_kills_tensor(self, z3_zero_action, z3_regular):
        assert tensor(z3_zero_action, z3_regular).module.size == 1

    def test_tensor_needs_identity(self, z3_null):
        M = regular_module(z3_null)
        with pytest.raises(IdentityRequired):
            tensor(M, M)

    def test_adjunction_on_regular_triple(self, z3_regular):
        report = adjunction_check(z3_regular, z3_regular, z3_regular)
        assert report.lhs_count == report.rhs_count == 3
        assert report.bijective
        assert report.natural

    def test_adjunction_with_zero_action(self, z3_zero_action, z3_regular):
        report = adjunction_check(z3_zero_action, z3_regular, z3_regular)
        assert report.lhs_count == report.rhs_count == 1
        assert report.bijective


class TestModuleFiles:
    def test_inline_base_with_action_last(self, z2_mult):
        text = Z2_INLINE + "action-last\n0 0\n0 0\n0 0\n0 1\n"
        M = parse_module(text)
        assert M.same_tables(regular_module(z2_mult))

    def test_round_trip(self, z6_three):
        again = parse_module(serialize_module(z6_three))
        assert again.same_tables(z6_three)
        assert again.base.same_tables(z6_three.base)

    def test_both_action_blocks_are_rejected(self):
        text = Z2_INLINE + "action\n0 0 0 0\n0 0 0 1\naction-last\n0 0\n0 0\n0 0\n0 1\n"
        with pytest.raises(MalformedFile):
            parse_module(text)

    def test_unterminated_inline_base(self):
        with pytest.raises(MalformedFile):
            parse_module("base inline\norder 1\n")

    def test_missing_base_reference(self):
        with pytest.raises(MalformedFile):
            parse_module("size 1\nadd\n0\naction\n0\n")
