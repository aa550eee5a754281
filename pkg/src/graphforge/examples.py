"""Built-in pipeline specs.

Names are stable across releases.  All of them exit 0 except
``example-fineness-fail``, which exists to exercise the negative path of
the fineness audit (exit 1).
"""

LATTICE_DECLS = {
    "groups": {
        "A": {"kind": "free_abelian", "generators": ["a1", "a2"]},
        "B": {"kind": "free_abelian", "generators": ["b1", "b2"]},
        "C": {"kind": "free_abelian", "generators": ["c"]},
        "G": {"kind": "amalgam", "left": "A", "right": "B",
              "edge": "C", "into_left": "d1", "into_right": "d2"},
    },
    "subgroups": {
        "K1": {"group": "A", "kind": "cyclic", "generator": "a1"},
        "K2": {"group": "B", "kind": "cyclic", "generator": "b1"},
    },
    "monomorphisms": {
        "d1": {"domain": "C", "codomain_subgroup": "K1", "images": ["a1"]},
        "d2": {"domain": "C", "codomain_subgroup": "K2", "images": ["b1"]},
    },
}

EXAMPLE_AMALGAM_1 = {
    "name": "example-amalgam-1",
    **LATTICE_DECLS,
    "graphs": {
        "X": {"kind": "single_vertex", "group": "A"},
        "Y": {"kind": "single_vertex", "group": "B"},
    },
    "pipeline": [
        {"op": "c_pushout", "id": "Z", "group": "G", "left": "X", "right": "Y",
         "x": {"orbit": "pt"}, "y": {"orbit": "pt"}},
        {"op": "orbit_counts", "graph": "Z", "vertices": 1, "edges": 0},
        {"op": "ball", "id": "B", "graph": "Z", "radius": 6},
        {"op": "ball_counts", "ball": "B", "vertices": 1, "edges": 0},
    ],
}

CONED_DECLS = {
    "groups": {
        "A12": {"kind": "free_abelian", "generators": ["a1", "a2"]},
        "A3": {"kind": "free", "generators": ["a3"]},
        "A": {"kind": "free_product", "factors": ["A12", "A3"]},
        "B12": {"kind": "free_abelian", "generators": ["b1", "b2"]},
        "B3": {"kind": "free", "generators": ["b3"]},
        "B": {"kind": "free_product", "factors": ["B12", "B3"]},
        "C": {"kind": "free_abelian", "generators": ["c"]},
        "G": {"kind": "amalgam", "left": "A", "right": "B",
              "edge": "C", "into_left": "d1", "into_right": "d2"},
    },
    "subgroups": {
        "KA": {"group": "A", "kind": "free_factor", "generators": ["a1", "a2"]},
        "KB": {"group": "B", "kind": "free_factor", "generators": ["b1", "b2"]},
        "cA": {"group": "A", "kind": "cyclic", "generator": "a1"},
        "cB": {"group": "B", "kind": "cyclic", "generator": "b1"},
    },
    "monomorphisms": {
        "d1": {"domain": "C", "codomain_subgroup": "cA", "images": ["a1"]},
        "d2": {"domain": "C", "codomain_subgroup": "cB", "images": ["b1"]},
    },
}

EXAMPLE_AMALGAM_2 = {
    "name": "example-amalgam-2",
    **CONED_DECLS,
    "graphs": {
        "X": {"kind": "coned_off", "group": "A", "peripherals": ["KA"],
              "relative_generators": ["a3"], "labels": ["KA"]},
        "Y": {"kind": "coned_off", "group": "B", "peripherals": ["KB"],
              "relative_generators": ["b3"], "labels": ["KB"]},
    },
    "pipeline": [
        {"op": "c_pushout", "id": "Z", "group": "G", "left": "X", "right": "Y",
         "x": {"orbit": "cone:KA"}, "y": {"orbit": "cone:KB"}},
        {"op": "orbit_counts", "graph": "Z", "vertices": 3, "edges": 4},
        {"op": "validate", "graph": "Z"},
        {"op": "stabilizer_check", "graph": "Z", "orbit": "X:cone:KA",
         "contains": ["a1", "a2", "b2", "b1", "a2 b2 a2^-1"],
         "excludes": ["a3", "b3", "a3 b2"]},
        {"op": "ball", "id": "B", "graph": "Z", "radius": 4, "word_budget": 3},
        {"op": "audit_tree", "ball": "B"},
        {"op": "audit_paths", "ball": "B", "length_bound": 8, "max_count": 1,
         "pair_limit": 30},
        {"op": "audit_stabilizer_chains", "graph": "Z", "radius": 3},
        {"op": "audit_cut_vertex", "graph": "Z", "ball": "B"},
        {"op": "project_tree", "id": "T", "graph": "Z", "check_radius": 3},
    ],
}

EXAMPLE_HNN_POINT = {
    "name": "example-hnn-point",
    "groups": {
        "F": {"kind": "free", "generators": ["a", "b"]},
        "H": {"kind": "hnn", "base": "F", "edge": "all", "iso": "phi",
              "stable_letter": "t"},
    },
    "subgroups": {
        "all": {"group": "F", "kind": "whole"},
    },
    "monomorphisms": {
        "phi": {"domain_subgroup": "all", "codomain_subgroup": "all",
                "images": ["a", "b"]},
    },
    "graphs": {
        "X": {"kind": "single_vertex", "group": "F"},
    },
    "pipeline": [
        {"op": "coalesce", "id": "Z", "group": "H", "graph": "X",
         "x": {"orbit": "pt"}, "y": {"orbit": "pt"},
         "require_hypotheses": False},
        {"op": "orbit_counts", "graph": "Z", "vertices": 1, "edges": 0},
        {"op": "ball", "id": "B", "graph": "Z", "radius": 6},
        {"op": "ball_counts", "ball": "B", "vertices": 1, "edges": 0},
    ],
}

EXAMPLE_HNN_COALESCE = {
    "name": "example-hnn-coalesce",
    "groups": {
        "H1": {"kind": "cyclic", "order": 2, "generator": "p"},
        "H2": {"kind": "cyclic", "order": 2, "generator": "q"},
        "D": {"kind": "free_product", "factors": ["H1", "H2"]},
        "G": {"kind": "hnn", "base": "D", "edge": "h1", "iso": "phi",
              "stable_letter": "t"},
    },
    "subgroups": {
        "h1": {"group": "D", "kind": "free_factor", "generators": ["p"]},
        "h2": {"group": "D", "kind": "free_factor", "generators": ["q"]},
    },
    "monomorphisms": {
        "phi": {"domain_subgroup": "h1", "codomain_subgroup": "h2",
                "images": ["q"]},
    },
    "graphs": {
        "X": {"kind": "edgeless_cosets", "group": "D",
              "subgroups": ["h1", "h2"], "labels": ["xH1", "yH2"]},
    },
    "pipeline": [
        {"op": "coalesce", "id": "Z", "group": "G", "graph": "X",
         "x": {"orbit": "xH1"}, "y": {"orbit": "yH2"}},
        {"op": "orbit_counts", "graph": "Z", "vertices": 1, "edges": 0},
        {"op": "stabilizer_check", "graph": "Z", "orbit": "yH2",
         "contains": ["q", "t p t^-1"], "excludes": ["p", "t"]},
    ],
}

EXAMPLE_FINENESS_FAIL = {
    "name": "example-fineness-fail",
    "groups": {
        "Z": {"kind": "free_abelian", "generators": ["a"]},
    },
    "subgroups": {
        "evens": {"group": "Z", "kind": "cyclic", "generator": "a a"},
    },
    "graphs": {
        "coned": {"kind": "coned_off", "group": "Z", "peripherals": ["evens"],
                  "relative_generators": ["a"], "labels": ["E"]},
    },
    "pipeline": [
        {"op": "validate", "graph": "coned"},
        {"op": "audit_fineness", "id": "cone-probe", "graph": "coned",
         "vertex": {"orbit": "cone:E"}, "angle_bound": 4, "radius": 12,
         "threshold": 10},
    ],
}

EXAMPLE_TREE_MODULAR = {
    "name": "example-tree-modular",
    "groups": {
        "Z4": {"kind": "cyclic", "order": 4, "generator": "a"},
        "Z6": {"kind": "cyclic", "order": 6, "generator": "b"},
        "Z2": {"kind": "cyclic", "order": 2, "generator": "c"},
        "G": {"kind": "amalgam", "left": "Z4", "right": "Z6",
              "edge": "Z2", "into_left": "d1", "into_right": "d2"},
    },
    "subgroups": {
        "K1": {"group": "Z4", "kind": "generated", "generators": ["a a"]},
        "K2": {"group": "Z6", "kind": "generated", "generators": ["b b b"]},
    },
    "monomorphisms": {
        "d1": {"domain": "Z2", "codomain_subgroup": "K1", "images": ["a a"]},
        "d2": {"domain": "Z2", "codomain_subgroup": "K2", "images": ["b b b"]},
    },
    "pipeline": [
        {"op": "bass_serre", "id": "T", "group": "G"},
        {"op": "validate", "graph": "T"},
        {"op": "ball", "id": "B", "graph": "T",
         "base": [{"orbit": "vA"}], "radius": 6},
        {"op": "audit_tree", "ball": "B"},
        {"op": "audit_all_angles_infinite", "ball": "B"},
        {"op": "audit_delta", "ball": "B", "expect_delta": 0},
        {"op": "audit_gh", "graph": "T", "peripherals": [],
         "delta_radius": 3, "radius": 6},
    ],
}

EXAMPLE_CONED_FREE = {
    "name": "example-coned-free",
    "groups": {
        "F": {"kind": "free", "generators": ["a", "b"]},
    },
    "subgroups": {
        "axis": {"group": "F", "kind": "cyclic", "generator": "a"},
    },
    "graphs": {
        "coned": {"kind": "coned_off", "group": "F", "peripherals": ["axis"],
                  "relative_generators": ["a", "b"], "labels": ["A"]},
    },
    "pipeline": [
        {"op": "validate", "graph": "coned"},
        {"op": "audit_fineness", "id": "cone-probe", "graph": "coned",
         "vertex": {"orbit": "cone:A"}, "angle_bound": 6, "radius": 8,
         "threshold": 10},
        {"op": "audit_gh", "graph": "coned", "peripherals": ["axis"],
         "angle_bound": 6, "radius": 8},
        {"op": "audit_cayley_abels", "graph": "coned", "peripherals": ["axis"]},
    ],
}

EXAMPLE_SHIFT_COALESCE = {
    "name": "example-shift-coalesce",
    "groups": {
        "F": {"kind": "free", "generators": ["a", "b"]},
        "G": {"kind": "hnn", "base": "F", "edge": "cA", "iso": "phi",
              "stable_letter": "t"},
    },
    "subgroups": {
        "cA": {"group": "F", "kind": "cyclic", "generator": "a"},
        "cB": {"group": "F", "kind": "cyclic", "generator": "b"},
    },
    "monomorphisms": {
        "phi": {"domain_subgroup": "cA", "codomain_subgroup": "cB",
                "images": ["b"]},
    },
    "graphs": {
        "X": {"kind": "coned_off", "group": "F", "peripherals": ["cA", "cB"],
              "relative_generators": ["a", "b"], "labels": ["A", "B"]},
    },
    "pipeline": [
        {"op": "coalesce", "id": "Z", "group": "G", "graph": "X",
         "x": {"orbit": "cone:A"}, "y": {"orbit": "cone:B"}},
        {"op": "orbit_counts", "graph": "Z", "vertices": 2, "edges": 4},
        {"op": "validate", "graph": "Z"},
        {"op": "stabilizer_check", "graph": "Z", "orbit": "cone:B",
         "contains": ["b", "t a t^-1"], "excludes": ["a", "t"]},
        {"op": "audit_embedding", "graph": "Z", "radius": 4},
        {"op": "project_tree", "id": "T", "graph": "Z", "check_radius": 3},
    ],
}

EXAMPLE_HNN2 = {
    "name": "example-hnn2",
    "groups": {
        "F": {"kind": "free", "generators": ["a", "b"]},
        "K": {"kind": "free_abelian", "generators": ["k"]},
    },
    "subgroups": {
        "aF": {"group": "F", "kind": "cyclic", "generator": "a"},
        "c2": {"group": "F", "kind": "cyclic", "generator": "a a"},
        "conj": {"group": "F", "kind": "cyclic", "generator": "b a a b^-1"},
    },
    "monomorphisms": {
        "kEmbed": {"domain": "K", "codomain_subgroup": "aF", "images": ["a"]},
        "phi": {"domain_subgroup": "c2", "codomain_subgroup": "conj",
                "images": ["b a a b^-1"]},
    },
    "pipeline": [
        {"op": "hnn2", "id": "R", "group": "F", "k_group": "K",
         "k_embed": "kEmbed", "edge": "c2", "iso": "phi",
         "conjugator": "b", "stable_letter": "t", "recipe_letter": "u",
         "check_radius": 3},
        {"op": "normalize_check", "group": "R:hnn_phi",
         "word": "t a a t^-1", "equals": "b a a b^-1"},
        {"op": "normalize_check", "group": "R:amalgam",
         "word": "a k^-1", "equals": "1"},
    ],
}

EXAMPLE_DEHN_FLAT = {
    "name": "example-dehn-flat",
    "groups": {
        "Z2": {"kind": "free_abelian", "generators": ["a", "b"]},
    },
    "subgroups": {
        "axis": {"group": "Z2", "kind": "free_factor", "generators": ["a"]},
    },
    "presentations": {
        "P": {"letters": ["b"], "peripherals": {"A": "axis"},
              "relators": ["A(a) b A(a^-1) b^-1"]},
    },
    "pipeline": [
        {"op": "verify_relators", "presentation": "P", "group": "Z2"},
        {"op": "dehn", "id": "table", "presentation": "P", "group": "Z2",
         "max_length": 6, "expect_values": [0, 0, 0, 1, 1, 2]},
    ],
}


BUILTIN_EXAMPLES = {
    spec["name"]: spec for spec in [
        EXAMPLE_AMALGAM_1,
        EXAMPLE_AMALGAM_2,
        EXAMPLE_HNN_POINT,
        EXAMPLE_HNN_COALESCE,
        EXAMPLE_FINENESS_FAIL,
        EXAMPLE_TREE_MODULAR,
        EXAMPLE_CONED_FREE,
        EXAMPLE_SHIFT_COALESCE,
        EXAMPLE_HNN2,
        EXAMPLE_DEHN_FLAT,
    ]
}


def builtin_examples():
    """Name -> spec dict for every shipped pipeline."""
    return dict(BUILTIN_EXAMPLES)
