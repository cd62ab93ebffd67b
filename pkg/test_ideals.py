"""
ideals：理想枚举、素性、极大性、根与格
"""

from itertools import combinations

import pytest

from ideals import (
    Ideal,
    all_ideals,
    generated_ideal,
    ideal_intersection,
    ideal_lattice,
    ideal_sum,
    is_ideal,
    is_maximal,
    is_prime,
    is_semiprime,
    maximal_ideals,
    prime_ideals,
    radical,
    semiprime_ideals,
)
from utils import ImproperIdeal, NotAnIdeal, to_bits


def elements(ideals):
    return [I.elements for I in ideals]


class TestZ6:
    def test_all_ideals(self, z6_mult):
        assert elements(all_ideals(z6_mult)) == [[0], [0, 3], [0, 2, 4], [0, 1, 2, 3, 4, 5]]

    def test_primes_and_maximals(self, z6_mult):
        assert elements(prime_ideals(z6_mult)) == [[0, 3], [0, 2, 4]]
        assert elements(maximal_ideals(z6_mult)) == [[0, 3], [0, 2, 4]]

    def test_zero_ideal_is_not_prime_but_semiprime(self, z6_mult):
        zero = Ideal(z6_mult, 1)
        prime, witness = is_prime(z6_mult, zero)
        assert not prime
        a, _, b, _, c = witness
        assert z6_mult.t(a, 0, b, 0, c) == 0 and 0 not in (a, b, c)
        assert is_semiprime(z6_mult, zero)

    def test_radical_of_zero(self, z6_mult):
        assert radical(z6_mult, Ideal(z6_mult, 1)).elements == [0]

    def test_generated_ideal(self, z6_mult):
        assert generated_ideal(z6_mult, [2]).elements == [0, 2, 4]
        assert generated_ideal(z6_mult, [2, 3]).elements == list(range(6))

    def test_sum_and_intersection(self, z6_mult):
        I, J = Ideal(z6_mult, to_bits([0, 3])), Ideal(z6_mult, to_bits([0, 2, 4]))
        assert ideal_intersection(z6_mult, I, J).elements == [0]
        assert ideal_sum(z6_mult, I, J).elements == list(range(6))

    def test_lattice_covers(self, z6_mult):
        lattice = ideal_lattice(z6_mult)
        assert set(lattice.successors(1)) == {to_bits([0, 3]), to_bits([0, 2, 4])}
        assert lattice.number_of_edges() == 4

    def test_non_ideal_is_rejected(self, z6_mult):
        assert not is_ideal(z6_mult, to_bits([0, 1]))
        with pytest.raises(NotAnIdeal):
            is_prime(z6_mult, Ideal(z6_mult, to_bits([0, 1])))

    def test_maximality_of_whole_carrier_is_an_error(self, z6_mult):
        with pytest.raises(ImproperIdeal):
            is_maximal(z6_mult, Ideal(z6_mult, to_bits(range(6))))


class TestChain:
    def test_chain_ideals_are_prime(self, chain3):
        assert elements(all_ideals(chain3)) == [[0], [0, 1], [0, 1, 2]]
        assert elements(prime_ideals(chain3)) == [[0], [0, 1]]
        assert elements(maximal_ideals(chain3)) == [[0, 1]]

    def test_field_has_zero_prime(self, z3_mult):
        assert elements(prime_ideals(z3_mult)) == [[0]]


class TestCorpusProperties:
    def test_semiprime_closure_under_intersection(self, small_corpus):
        for S in small_corpus:
            semis = semiprime_ideals(S)
            for r in range(2, len(semis) + 1):
                for family in combinations(semis, r):
                    bits = (1 << S.order) - 1
                    for I in family:
                        bits &= I.members
                    assert is_semiprime(S, Ideal(S, bits))

    def test_primes_are_semiprime(self, small_corpus):
        for S in small_corpus:
            for P in prime_ideals(S):
                assert is_semiprime(S, P)

    def test_radical_is_semiprime_and_contains_ideal(self, small_corpus):
        for S in small_corpus:
            for I in all_ideals(S):
                R = radical(S, I)
                assert I <= R
                assert is_semiprime(S, R)

    def test_every_ideal_is_closed(self, small_corpus):
        for S in small_corpus:
            for I in all_ideals(S):
                assert is_ideal(S, I.members)
                assert generated_ideal(S, I.elements).members == I.members
