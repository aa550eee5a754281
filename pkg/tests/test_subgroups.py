"""Handle tests.  The load-bearing property is that `coset_rep` of an exact
handle is constant on cosets -- membership is the independent oracle for that.
"""

import pytest

from graphforge.errors import MismatchedAmbient, MonomorphismUnverified
from graphforge.groups import FiniteGroup
from graphforge.subgroups import (
    JoinSubgroup,
    Monomorphism,
    RestrictedSubgroup,
    build_amalgam,
    build_hnn,
    check_monomorphism,
    coset_rep,
    cyclic,
    free_factor,
    generated,
    power_of,
    subgroup_contains,
    trivial,
    whole,
    YES, NO, UNKNOWN,
)
from graphforge.words import Word

import grouplib
from test_groups import random_words


def rep_constant_on_cosets(handle, words):
    """coset_rep(w) == coset_rep(w * h) for handle elements h."""
    amb = handle.ambient
    hs = handle.elements() if handle.is_finite() else handle.ball(3)
    for w in words:
        base = handle.coset_rep(w)
        assert handle.contains(amb.multiply(w.inverse(), base)) == YES or \
               handle.contains(amb.multiply(base.inverse(), w)) == YES
        for h in hs[:12]:
            assert handle.coset_rep(amb.multiply(w, h)) == base, (w, h)


def test_cyclic_membership_in_line():
    z = grouplib.int_line()
    h = cyclic(z, "a a")
    assert h.contains("a a a a") == YES
    assert h.contains("a a a") == NO
    assert h.coset_rep("a^5") == Word.parse("a")
    assert h.coset_rep("a^4") == Word()


def test_membership_iff_trivial_coset_rep():
    z = grouplib.int_line()
    h = cyclic(z, "a a")
    for k in range(-6, 7):
        w = Word.parse("a").power(k)
        assert (h.contains(w) == YES) == (h.coset_rep(w) == Word())


def test_finite_subgroup_in_sym3():
    s3 = grouplib.sym3()
    h = generated(s3, ["y"])  # the 3-cycle subgroup
    assert h.order() == 3
    assert h.contains("x") == NO
    assert h.contains("y y") == YES
    rep_constant_on_cosets(h, [s3.normalize(s3.word_of(e)) for e in s3.elements()])


def test_whole_and_trivial():
    s3 = grouplib.sym3()
    assert whole(s3).contains("x y") == YES
    assert whole(s3).coset_rep("x y") == Word()
    assert trivial(s3).contains("x x") == YES
    assert trivial(s3).contains("x") == NO


def test_mismatched_ambient():
    s3 = grouplib.sym3()
    with pytest.raises(MismatchedAmbient):
        subgroup_contains(whole(s3), "a")


def test_free_factor_handle():
    d = grouplib.dihedral_product()
    h1 = free_factor(d, ["p"])
    assert h1.contains("p") == YES
    assert h1.contains("q") == NO
    assert h1.is_finite() is True
    assert sorted(map(str, h1.elements())) == ["1", "p"]

    f = grouplib.free2()
    hb = generated(f, ["b"])
    assert hb.contains("b b") == YES
    assert hb.contains("a") == NO
    # coset rep strips the maximal trailing chunk inside the factor
    assert hb.coset_rep("a b b b") == Word.parse("a")
    assert hb.coset_rep("b a b b") == Word.parse("b a")
    rep_constant_on_cosets(hb, random_words(["a", "b"], 25, 6, seed=5))


def test_coset_rep_examples():
    z = grouplib.int_line()
    h = cyclic(z, "a a")
    assert coset_rep(h, "a^5") == Word.parse("a")
    assert coset_rep(h, "a^2") == Word()

    # free factor inside a free product: strip the trailing factor part
    d = grouplib.dihedral_product()
    h1 = free_factor(d, ["p"])
    assert h1.coset_rep("p q p") == Word.parse("p q")


def test_power_of():
    f = grouplib.free2()
    assert power_of(f, Word.parse("a b"), Word.parse("a b a b")) == 2
    assert power_of(f, Word.parse("a"), Word.parse("a^-3")) == -3
    assert power_of(f, Word.parse("a"), Word.parse("b")) is None
    s3 = grouplib.sym3()
    assert power_of(s3, Word.parse("y"), Word.parse("y y")) == 2
    assert power_of(s3, Word.parse("y"), Word.parse("x")) is None


def test_restricted_handle_in_hnn():
    g = grouplib.shift_hnn()
    base_b = cyclic(g.base, "b")
    h = RestrictedSubgroup(g, base_b, "base")
    assert h.contains("b b") == YES
    assert h.contains("t a t^-1") == YES      # equals b
    assert h.contains("a") == NO
    assert h.contains("t") == NO
    words = random_words(["a", "b", "t"], 30, 6, seed=9)
    rep_constant_on_cosets(h, [g.normalize(w) for w in words])


def test_restricted_handle_in_amalgam():
    g = grouplib.coned_amalgam()
    ax = free_factor(g.left, ["a1", "a2"])
    h = RestrictedSubgroup(g, ax, "L")
    assert h.contains("a1 a2") == YES
    assert h.contains("b1 a2") == YES          # b1 = a1
    assert h.contains("a3") == NO
    assert h.contains("b2") == NO
    words = random_words(["a1", "a2", "a3", "b1", "b2", "b3"], 35, 6, seed=13)
    rep_constant_on_cosets(h, [g.normalize(w) for w in words])


def test_join_handle_membership_and_reps():
    g = grouplib.coned_amalgam()
    ax = free_factor(g.left, ["a1", "a2"])
    by = free_factor(g.right, ["b1", "b2"])
    j = JoinSubgroup(g, ax, by)
    assert j.contains("a1 a2 b2") == YES
    assert j.contains("a2 b2 a2 b2^-1") == YES
    assert j.contains("a3") == NO
    assert j.contains("a2 a3 a2") == NO
    assert j.contains("a2 b2 a3") == NO
    assert not j.is_whole()
    assert j.is_finite() is False
    words = random_words(["a1", "a2", "a3", "b1", "b2", "b3"], 40, 6, seed=17)
    rep_constant_on_cosets(j, [g.normalize(w) for w in words])


def test_join_handle_detects_whole_group():
    g = grouplib.lattice_amalgam()
    j = JoinSubgroup(g, whole(g.left), whole(g.right))
    assert j.is_whole()
    assert j.coset_rep("a1 b2 a2") == Word()


def test_join_handle_finite_closure():
    g = grouplib.modular_amalgam()
    k1 = generated(g.left, ["a a"])
    k2 = generated(g.right, ["b b b"])
    j = JoinSubgroup(g, k1, k2)
    # a^2 = b^3 generates a single Z/2 inside the amalgam
    assert j.order() == 2
    assert j.contains("a a") == YES
    assert j.contains("b b b") == YES
    assert j.contains("a") == NO


def test_monomorphism_checks():
    z2 = FiniteGroup.cyclic(2, "c", "Z2")
    z4 = FiniteGroup.cyclic(4, "a", "Z4")
    good = Monomorphism(whole(z2), generated(z4, ["a a"]), ["a a"])
    assert check_monomorphism(good)[0] == "verified"
    bad = Monomorphism(whole(z2), whole(z4), ["a"])
    status, witness = check_monomorphism(bad)
    assert status == "refuted"

    f = grouplib.free2()
    zline = grouplib.int_line()
    phi = Monomorphism(whole(zline), cyclic(f, "b"), ["b"])
    assert check_monomorphism(phi, budget=8)[0] == "verified"


def test_build_amalgam_refuses_bad_injection():
    z2 = FiniteGroup.cyclic(2, "c", "Z2")
    z4 = FiniteGroup.cyclic(4, "a", "Z4")
    z6 = FiniteGroup.cyclic(6, "b", "Z6")
    bad = Monomorphism(whole(z2), whole(z4), ["a"])
    d2 = Monomorphism(whole(z2), generated(z6, ["b b b"]), ["b b b"])
    with pytest.raises(MonomorphismUnverified):
        build_amalgam("bad", z4, z6, bad, d2)


def test_build_hnn_trivial_edge_is_free_product():
    # C trivial: no pinches ever fire, t generates a free factor
    f = grouplib.free2()
    c = trivial(f)
    iso = Monomorphism(c, trivial(f), [])
    g = build_hnn("F*Z", f, c, iso, "t")
    assert g.normalize("t a t^-1") == Word.parse("t a t^-1")
    assert g.is_identity("t t^-1")
    words = random_words(["a", "b", "t"], 40, 6, seed=23)
    from graphforge.groups import FreeGroup
    f3 = FreeGroup("F3", ["a", "b", "t"])
    for w in words:
        assert g.normalize(w) == f3.normalize(w)


def test_amalgam_trivial_edge_is_free_product():
    z4 = FiniteGroup.cyclic(4, "a", "Z4")
    z6 = FiniteGroup.cyclic(6, "b", "Z6")
    ztriv = FiniteGroup.cyclic(1, "e", "Triv")
    d1 = Monomorphism(whole(ztriv), trivial(z4), [Word()])
    d2 = Monomorphism(whole(ztriv), trivial(z6), [Word()])
    g = build_amalgam("Z4*Z6free", z4, z6, d1, d2)
    from graphforge.groups import FreeProductGroup
    fp = FreeProductGroup("ref", [FiniteGroup.cyclic(4, "a", "Z4x"),
                                  FiniteGroup.cyclic(6, "b", "Z6x")])
    for w in random_words(["a", "b"], 40, 7, seed=29):
        assert tuple(g.normalize(w)) == tuple(fp.normalize(w))


def test_conjugate_handle():
    from graphforge.subgroups import ConjugateSubgroup
    f = grouplib.free2()
    h = ConjugateSubgroup(cyclic(f, "b"), "a")
    assert h.contains("a b a^-1") == YES
    assert h.contains("b") == NO
    rep_constant_on_cosets(h, random_words(["a", "b"], 20, 5, seed=31))


def test_unknown_from_budgeted_search():
    f = grouplib.free2()
    h = generated(f, ["a a", "b b"], budget=3)
    assert h.strategy == "BudgetedSearch"
    assert h.contains("a a") == YES
    assert h.contains("a") == UNKNOWN
