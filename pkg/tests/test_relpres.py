"""Relative presentations: the two rewriting constructions and the
isoperimetric table.

The commutator presentation of Z^2 relative to one axis is the running
example; its fill numbers were derived by hand (cyclic-word syllable
comparison shows [a, b^2] needs two relators)."""

import pytest

from graphforge.errors import KLNotDistinct
from graphforge.groups import FreeAbelianGroup
from graphforge.relpres import (
    FPWord,
    RelPresentation,
    absorb,
    amalgam_presentation,
    dehn_bruteforce,
    hnn_presentation,
    verify_relators,
)
from graphforge.subgroups import (
    JoinSubgroup,
    RestrictedSubgroup,
    cyclic,
    free_factor,
    generated,
    whole,
)
from graphforge.words import Word

import grouplib


def flat_pair():
    """Z^2 presented relative to the a-axis by the single commutator."""
    z2 = FreeAbelianGroup("Z2", ["a", "b"])
    axis = free_factor(z2, ["a"])
    pres = RelPresentation(("b",), {"A": axis}, [])
    pres.relators = [pres.parse("A(a) b A(a^-1) b^-1")]
    return z2, pres


def test_normalize_merges_peripheral_letters():
    z2, pres = flat_pair()
    w = pres.parse("A(a) A(a) b b^-1 A(a^-2)")
    assert pres.normalize(w) == FPWord()
    w2 = pres.parse("A(a) b A(a)")
    assert len(pres.normalize(w2)) == 3


def test_verify_relators_flat():
    z2, pres = flat_pair()
    report = verify_relators(pres, z2)
    assert report.passed


def test_verify_relators_failure_witness():
    f = grouplib.free2()
    pres = RelPresentation(("a", "b"), {}, [])
    pres.relators = [pres.parse("a b")]
    report = verify_relators(pres, f)
    assert not report.passed
    assert report.failures[0][1] == Word.parse("a b")


def test_verify_relators_empty():
    f = grouplib.free2()
    pres = RelPresentation(("a", "b"), {}, [])
    assert verify_relators(pres, f).passed


def test_absorb_identity():
    z2, pres = flat_pair()
    out = absorb(pres, [], [], [], "A", pres.peripherals["A"])
    assert out.letters == pres.letters
    assert [tuple(r) for r in out.relators] == \
        [tuple(pres.normalize(r)) for r in pres.relators]


def test_absorb_disjoint_order_irrelevant():
    z2 = FreeAbelianGroup("Z2", ["a", "b"])
    ha = free_factor(z2, ["a"])
    hb = free_factor(z2, ["b"])
    pres = RelPresentation((), {"A": ha, "B": hb}, [])
    pres.relators = [pres.parse("A(a) B(b) A(a^-1) B(b^-1)")]
    one = absorb(absorb(pres, ["A"], [], [], "A2", ha), ["B"], [], [], "B2", hb)
    two = absorb(absorb(pres, ["B"], [], [], "B2", hb), ["A"], [], [], "A2", ha)
    assert [tuple(r) for r in one.relators] == [tuple(r) for r in two.relators]


def modular_presentations():
    g = grouplib.modular_amalgam()
    z4, z6 = g.left, g.right
    k1 = generated(z4, ["a a"])
    k2 = generated(z6, ["b b b"])
    p1 = RelPresentation(("a",), {"K": k1}, [])
    p1.relators = [p1.parse("a a K(a^-2)")]
    p2 = RelPresentation(("b",), {"K": k2}, [])
    p2.relators = [p2.parse("b b b K(b^-3)")]
    return g, p1, p2


def test_amalgam_presentation_counts_and_relators():
    g, p1, p2 = modular_presentations()
    join = JoinSubgroup(g, p1.peripherals["K"], p2.peripherals["K"])
    out = amalgam_presentation(p1, "K", p2, "K", g, join, join_label="M")
    assert len(out.relators) == len(p1.relators) + len(p2.relators)
    assert set(out.peripherals) == {"M"}
    report = verify_relators(out, g)
    assert report.passed, report.failures


def test_amalgam_presentation_empty_inputs():
    g = grouplib.modular_amalgam()
    p1 = RelPresentation((), {"K": whole(g.left)}, [])
    p2 = RelPresentation((), {"K": whole(g.right)}, [])
    join = JoinSubgroup(g, whole(g.left), whole(g.right))
    out = amalgam_presentation(p1, "K", p2, "K", g, join, join_label="M")
    assert out.relators == []
    assert set(out.peripherals) == {"M"}


def toy_hnn_presentation():
    g = grouplib.shift_hnn()
    f = g.base
    ka = RestrictedSubgroup(g, cyclic(f, "a"), "base")
    lb = RestrictedSubgroup(g, cyclic(f, "b"), "base")
    pres = RelPresentation(("a", "b"), {"K": ka, "L": lb}, [])
    pres.relators = [pres.parse("K(a) a^-1"), pres.parse("L(b) b^-1")]
    return g, pres


def test_hnn_presentation_rewrite():
    g, pres = toy_hnn_presentation()
    join = generated(g, ["t a t^-1", "b"], budget=4)
    out = hnn_presentation(pres, "K", "L", g, join, join_label="J")
    # relator count is preserved exactly
    assert len(out.relators) == len(pres.relators)
    assert set(out.peripherals) == {"J"}
    assert "t" in out.letters
    # the conjugated letter occurs as t^-1 (t a t^-1) t
    first = out.relators[0]
    kinds = [type(t).__name__ for t in first]
    assert "HToken" in kinds
    report = verify_relators(out, g)
    assert report.passed, report.failures


def test_hnn_presentation_token_growth():
    g, pres = toy_hnn_presentation()
    join = generated(g, ["t a t^-1", "b"], budget=4)
    out = hnn_presentation(pres, "K", "L", g, join)
    # each K-letter contributes a stable-letter sandwich: two extra tokens
    assert len(out.relators[0]) == len(pres.normalize(pres.relators[0])) + 2
    assert len(out.relators[1]) == len(pres.normalize(pres.relators[1]))


def test_hnn_presentation_requires_distinct_peripherals():
    g, pres = toy_hnn_presentation()
    with pytest.raises(KLNotDistinct):
        hnn_presentation(pres, "K", "K", g, whole(g))


# -- isoperimetric table ---------------------------------------------------------


def test_dehn_relator_itself_fills_once():
    z2, pres = flat_pair()
    table = dehn_bruteforce(pres, z2, 4)
    assert table.value(4) == 1
    assert all(e.exact for e in table.entries)


def test_dehn_small_lengths_are_zero():
    z2, pres = flat_pair()
    table = dehn_bruteforce(pres, z2, 3)
    assert [table.value(n) for n in (1, 2, 3)] == [0, 0, 0]


def test_dehn_table_to_six_monotone():
    z2, pres = flat_pair()
    table = dehn_bruteforce(pres, z2, 6, fill_cap=3, conjugator_cap=3, h_ball=1)
    values = [table.value(n) for n in range(1, 7)]
    assert values == [0, 0, 0, 1, 1, 2]
    assert values == sorted(values)
    assert all(e.exact for e in table.entries)


def test_dehn_redundant_relator_never_increases():
    z2, pres = flat_pair()
    base = dehn_bruteforce(pres, z2, 5)
    bigger = RelPresentation(pres.letters, pres.peripherals,
                             pres.relators + [pres.relators[0].inverse()])
    redundant = dehn_bruteforce(bigger, z2, 5)
    for n in range(1, 6):
        assert redundant.value(n) <= base.value(n)
