"""
spectrum：素谱、闭集、基本开集与拓扑诊断
"""

from itertools import product

from ideals import all_ideals, ideal_intersection, ideal_sum
from spectrum import (
    basic_open,
    closed_sets,
    induced_point_map,
    open_sets,
    spec,
    topology_report,
    vanishing_set,
)


def test_z6_spectrum_is_two_discrete_points(z6_mult):
    spectrum = spec(z6_mult)
    assert spectrum.describe(spectrum.all_points) == [[0, 3], [0, 2, 4]]
    report = topology_report(spectrum)
    assert report.point_count == 2
    assert report.is_discrete
    assert report.is_T0
    assert report.basis_generates


def test_z6_basic_opens(z6_mult):
    spectrum = spec(z6_mult)
    assert [spectrum.basic_points(a) for a in range(4)] == [0, 0b11, 0b01, 0b10]
    assert basic_open(spectrum, 5).member_points == 0b11


def test_chain_is_not_discrete(chain3):
    spectrum = spec(chain3)
    report = topology_report(spectrum)
    assert spectrum.describe(spectrum.all_points) == [[0], [0, 1]]
    assert report.is_T0
    assert not report.is_discrete
    assert closed_sets(spectrum) == [0, 0b10, 0b11]


def test_open_sets_complement_closed_sets(chain3):
    spectrum = spec(chain3)
    opens = sorted(U.member_points for U in open_sets(spectrum))
    assert opens == sorted(spectrum.all_points & ~c for c in closed_sets(spectrum))
    for U in open_sets(spectrum):
        assert U.complement().complement().member_points == U.member_points


def test_trivial_structure_has_empty_spectrum(trivial):
    spectrum = spec(trivial)
    assert spectrum.size == 0
    assert topology_report(spectrum).closed_set_count == 1


def test_topology_laws_on_small_corpus(small_corpus):
    for S in small_corpus:
        spectrum = spec(S)
        ideals = all_ideals(S)
        V = lambda I: vanishing_set(spectrum, I).member_points
        assert V(ideals[0]) == spectrum.all_points
        assert V(ideals[-1]) == 0
        for I, J in product(ideals, repeat=2):
            assert V(ideal_intersection(S, I, J)) == V(I) | V(J)
            assert V(ideal_sum(S, I, J)) == V(I) & V(J)


def test_small_corpus_spectra_are_T0(small_corpus):
    for S in small_corpus:
        assert topology_report(spec(S)).is_T0


def test_point_map_of_reduction_mod_three(z6_mult, z3_mult):
    report = induced_point_map([x % 3 for x in range(6)], z6_mult, z3_mult)
    assert report.preimages_prime
    assert report.continuous
    # Spec(Z3) = {{0}} 的原像是 {0, 3}，即 Spec(Z6) 的第 0 个点
    assert report.point_map == {0: 0}
