"""Pipeline specs: declarative JSON in, deterministic run reports out.

A spec declares groups, subgroups, injections, graphs and presentations,
then runs a list of steps (constructions, windows, audits, exports).  Steps
that audit something contribute verdicts; the report is byte-deterministic
for a fixed spec (timings are opt-in and default to null).

Exit-code contract: 0 all verdicts pass, 1 some verdict failed, 2 a budget
ran out (partial report), 3 the spec itself was invalid.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from . import analysis
from .analysis import (
    INFINITE,
    angle_table,
    ball_view,
    cayley_abels_audit,
    cut_vertex_audit,
    delta_estimate,
    embedded_path_count,
    fineness_probe,
    gh_graph_audit,
)
from .errors import (
    BudgetExceeded,
    ForgeError,
    SpecError,
)
from .ggraphs import (
    GGraph,
    bass_serre,
    c_pushout,
    cayley_graph,
    coalesce,
    coned_off,
    edgeless_cosets,
    factor_embedding,
    induce_graph,
    project_to_tree,
    single_vertex_graph,
    validate_graph,
)
from .groups import (
    FiniteGroup,
    FreeAbelianGroup,
    FreeGroup,
    FreeProductGroup,
    ball_enumerate,
)
from .gsets import GSetElem, chain_factorize
from .relpres import (
    RelPresentation,
    amalgam_presentation,
    dehn_bruteforce,
    hnn_presentation,
    verify_relators,
)
from .subgroups import (
    JoinSubgroup,
    Monomorphism,
    RestrictedSubgroup,
    build_amalgam,
    build_hnn,
    cyclic,
    free_factor,
    generated,
    trivial,
    whole,
    YES,
    NO,
)
from .words import Word

TOP_KEYS = {"name", "groups", "subgroups", "monomorphisms", "graphs",
            "presentations", "pipeline", "budgets", "exports"}

DEFAULT_BUDGETS = {
    "radius": 4,
    "word_budget": None,
    "angle_bound": 4,
    "threshold": 10,
    "max_vertices": 200000,
    "delta_radius": 2,
    "delta_cap": 140,
    "conj_budget": 2,
    "fill_cap": 3,
    "conjugator_cap": 3,
    "h_ball": 1,
    "parallel": True,
    "trust_monomorphisms": False,
}


@dataclass
class RunReport:
    spec_name: str
    steps: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    budgets: dict = field(default_factory=dict)
    timings_ms: dict = None
    budget_exhausted: bool = False

    def record(self, step_id, op, outcome, detail=None):
        self.steps.append({
            "id": step_id, "op": op, "outcome": outcome,
            "detail": detail if detail is not None else {},
        })

    def verdict(self, step_id, name, verdict, detail=""):
        self.verdicts.append({
            "step": step_id, "name": name,
            "verdict": verdict, "detail": detail,
        })

    @property
    def failed(self):
        return any(v["verdict"] == "fail" for v in self.verdicts)

    def exit_code(self):
        if self.budget_exhausted:
            return 2
        if self.failed:
            return 1
        return 0

    def to_json(self) -> str:
        payload = {
            "spec": self.spec_name,
            "steps": self.steps,
            "verdicts": self.verdicts,
            "budgets": self.budgets,
            "timings_ms": self.timings_ms,
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _require(cond, message):
    if not cond:
        raise SpecError(message)


def _known_keys(obj, allowed, where):
    extra = set(obj) - set(allowed)
    _require(not extra, f"{where}: unknown keys {sorted(extra)}")


class SpecEnv:
    """Resolves the declaration sections with cycle detection."""

    def __init__(self, spec: dict):
        _require(isinstance(spec, dict), "spec must be a JSON object")
        _known_keys(spec, TOP_KEYS, "top level")
        self.spec = spec
        self.name = spec.get("name", "pipeline")
        self.groups = {}
        self.subgroups = {}
        self.monomorphisms = {}
        self.graphs = {}
        self.presentations = {}
        self.constructions = {}   # step products: graphs, balls, tables ...
        self.budgets = dict(DEFAULT_BUDGETS)
        budgets = spec.get("budgets", {})
        _known_keys(budgets, DEFAULT_BUDGETS, "budgets")
        self.budgets.update(budgets)
        for key in ("radius", "angle_bound", "threshold", "max_vertices"):
            _require(self.budgets[key] is None or self.budgets[key] > 0,
                     f"budgets.{key} must be positive")
        self._building = set()

    # -- declarations ---------------------------------------------------------

    def group(self, gid):
        if gid in self.groups:
            return self.groups[gid]
        _require(gid in self.spec.get("groups", {}), f"undeclared group {gid!r}")
        _require(gid not in self._building, f"cyclic declaration at group {gid!r}")
        self._building.add(gid)
        decl = self.spec["groups"][gid]
        kind = decl.get("kind")
        if kind == "free":
            g = FreeGroup(gid, decl["generators"])
        elif kind == "free_abelian":
            g = FreeAbelianGroup(gid, decl["generators"])
        elif kind == "cyclic":
            g = FiniteGroup.cyclic(decl["order"], decl.get("generator", "a"), gid)
        elif kind == "permutation":
            perms = {k: tuple(v) for k, v in decl["generators"].items()}
            g = FiniteGroup.from_permutations(gid, perms)
        elif kind == "free_product":
            g = FreeProductGroup(gid, [self.group(f) for f in decl["factors"]])
        elif kind == "amalgam":
            g = build_amalgam(
                gid, self.group(decl["left"]), self.group(decl["right"]),
                self.mono(decl["into_left"]), self.mono(decl["into_right"]),
                trust_monomorphisms=self.budgets["trust_monomorphisms"])
        elif kind == "hnn":
            g = build_hnn(
                gid, self.group(decl["base"]), self.subgroup(decl["edge"]),
                self.mono(decl["iso"]), decl["stable_letter"],
                trust_monomorphisms=self.budgets["trust_monomorphisms"])
        else:
            raise SpecError(f"group {gid!r}: unknown kind {kind!r}")
        self._building.discard(gid)
        self.groups[gid] = g
        return g

    def subgroup(self, sid):
        if sid in self.subgroups:
            return self.subgroups[sid]
        _require(sid in self.spec.get("subgroups", {}),
                 f"undeclared subgroup {sid!r}")
        decl = self.spec["subgroups"][sid]
        amb = self.group(decl["group"])
        kind = decl.get("kind", "generated")
        if kind == "trivial":
            h = trivial(amb)
        elif kind == "whole":
            h = whole(amb)
        elif kind == "cyclic":
            h = cyclic(amb, Word.parse(decl["generator"]))
        elif kind == "free_factor":
            h = free_factor(amb, decl["generators"])
        elif kind == "generated":
            h = generated(amb, [Word.parse(w) for w in decl["generators"]],
                          budget=decl.get("budget", 12))
        elif kind == "restricted":
            inner = self.subgroup(decl["inner"])
            h = RestrictedSubgroup(amb, inner, decl["side"])
        else:
            raise SpecError(f"subgroup {sid!r}: unknown kind {kind!r}")
        self.subgroups[sid] = h
        return h

    def mono(self, mid):
        if mid in self.monomorphisms:
            return self.monomorphisms[mid]
        _require(mid in self.spec.get("monomorphisms", {}),
                 f"undeclared monomorphism {mid!r}")
        decl = self.spec["monomorphisms"][mid]
        if "domain_subgroup" in decl:
            dom = self.subgroup(decl["domain_subgroup"])
        else:
            dom = whole(self.group(decl["domain"]))
        cod = self.subgroup(decl["codomain_subgroup"])
        images = [Word.parse(w) for w in decl["images"]]
        m = Monomorphism(dom, cod, images)
        self.monomorphisms[mid] = m
        return m

    def graph(self, gid) -> GGraph:
        if gid in self.constructions:
            obj = self.constructions[gid]
            _require(isinstance(obj, GGraph), f"{gid!r} is not a graph")
            return obj
        if gid in self.graphs:
            return self.graphs[gid]
        _require(gid in self.spec.get("graphs", {}), f"undeclared graph {gid!r}")
        decl = self.spec["graphs"][gid]
        kind = decl.get("kind")
        amb = self.group(decl["group"])
        if kind == "coned_off":
            g = coned_off(amb, [self.subgroup(s) for s in decl["peripherals"]],
                          [Word.parse(w) for w in decl["relative_generators"]],
                          labels=decl.get("labels"))
        elif kind == "cayley":
            gens = decl.get("generators")
            g = cayley_graph(amb, [Word.parse(w) for w in gens] if gens else None)
        elif kind == "single_vertex":
            stab = self.subgroup(decl["stabilizer"]) if "stabilizer" in decl else None
            g = single_vertex_graph(amb, stab, label=decl.get("label", "pt"))
        elif kind == "edgeless_cosets":
            g = edgeless_cosets(amb, [self.subgroup(s) for s in decl["subgroups"]],
                                labels=decl.get("labels"))
        else:
            raise SpecError(f"graph {gid!r}: unknown kind {kind!r}")
        self.graphs[gid] = g
        return g

    def presentation(self, pid) -> RelPresentation:
        if pid in self.constructions:
            obj = self.constructions[pid]
            _require(isinstance(obj, RelPresentation), f"{pid!r} is not a presentation")
            return obj
        if pid in self.presentations:
            return self.presentations[pid]
        _require(pid in self.spec.get("presentations", {}),
                 f"undeclared presentation {pid!r}")
        decl = self.spec["presentations"][pid]
        peripherals = {lab: self.subgroup(s)
                       for lab, s in decl.get("peripherals", {}).items()}
        pres = RelPresentation(tuple(decl.get("letters", [])), peripherals, [])
        pres.relators = [pres.parse(r) for r in decl.get("relators", [])]
        self.presentations[pid] = pres
        return pres

    def vertex(self, graph: GGraph, ref) -> GSetElem:
        _require(isinstance(ref, dict) and "orbit" in ref,
                 "vertex references look like {'orbit': ..., 'rep': ...}")
        return graph.vertices.elem(ref["orbit"], Word.parse(ref.get("rep", "1")))

    def ball(self, bid):
        obj = self.constructions.get(bid)
        _require(obj is not None and isinstance(obj, analysis.BallView),
                 f"{bid!r} is not a materialized ball")
        return obj


def validate_spec(spec: dict) -> SpecEnv:
    """Parse and build every declaration; raises SpecError on nonsense."""
    env = SpecEnv(spec)
    for gid in spec.get("groups", {}):
        env.group(gid)
    for sid in spec.get("subgroups", {}):
        env.subgroup(sid)
    for mid in spec.get("monomorphisms", {}):
        env.mono(mid)
    for gid in spec.get("graphs", {}):
        env.graph(gid)
    for pid in spec.get("presentations", {}):
        env.presentation(pid)
    _require(isinstance(spec.get("pipeline", []), list), "pipeline must be a list")
    for i, step in enumerate(spec.get("pipeline", [])):
        _require(isinstance(step, dict) and "op" in step,
                 f"pipeline[{i}] needs an 'op'")
        _require(step["op"] in STEP_HANDLERS,
                 f"pipeline[{i}]: unknown op {step['op']!r}")
    for i, exp in enumerate(spec.get("exports", [])):
        _known_keys(exp, {"format", "source", "path", "cut_orbits"},
                    f"exports[{i}]")
        _require(exp.get("format") in ("dot", "json"),
                 f"exports[{i}]: format must be dot or json")
    return env


# -- step implementations -------------------------------------------------------


def _step_induce(env, step, report):
    g = env.group(step["group"])
    emb = induce_graph(factor_embedding(g, step["side"]),
                       env.graph(step["graph"]),
                       prefix=step.get("prefix", ""))
    env.constructions[step["id"]] = emb.codomain
    report.record(step["id"], "induce", "ok",
                  {"vertex_orbits": emb.codomain.vertex_orbit_count,
                   "edge_orbits": emb.codomain.edge_orbit_count})


def _step_c_pushout(env, step, report):
    g = env.group(step["group"])
    left = env.graph(step["left"])
    right = env.graph(step["right"])
    res = c_pushout(g, left, right,
                    env.vertex(left, step["x"]), env.vertex(right, step["y"]))
    env.constructions[step["id"]] = res.graph
    env.constructions[f"{step['id']}:result"] = res
    report.record(step["id"], "c_pushout", "ok",
                  {"vertex_orbits": res.graph.vertex_orbit_count,
                   "edge_orbits": res.graph.edge_orbit_count,
                   "z_orbit": res.z.orbit_id})


def _step_coalesce(env, step, report):
    g = env.group(step["group"])
    graph = env.graph(step["graph"])
    res = coalesce(g, graph, env.vertex(graph, step["x"]),
                   env.vertex(graph, step["y"]),
                   require_hypotheses=step.get("require_hypotheses", True))
    env.constructions[step["id"]] = res.graph
    env.constructions[f"{step['id']}:result"] = res
    report.record(step["id"], "coalesce", "ok",
                  {"vertex_orbits": res.graph.vertex_orbit_count,
                   "edge_orbits": res.graph.edge_orbit_count,
                   "z_orbit": res.z.orbit_id,
                   "hypotheses": res.graph.provenance.hypotheses_hold})


def _step_bass_serre(env, step, report):
    g = env.group(step["group"])
    tree = bass_serre(g)
    env.constructions[step["id"]] = tree
    report.record(step["id"], "bass_serre", "ok",
                  {"vertex_orbits": tree.vertex_orbit_count})


def _step_ball(env, step, report):
    graph = env.graph(step["graph"])
    radius = step.get("radius", env.budgets["radius"])
    budget = step.get("word_budget", env.budgets["word_budget"])
    bases = [env.vertex(graph, ref) for ref in step.get("base", [])]
    if not bases:
        prov = graph.provenance
        bases = [prov.z] if prov is not None else \
            [graph.vertices.elem(graph.vertices.orbits[0].orbit_id)]
    view = ball_view(graph, bases, radius, word_budget=budget,
                     max_vertices=env.budgets["max_vertices"])
    env.constructions[step["id"]] = view
    env.constructions[f"{step['id']}:graph"] = graph
    report.record(step["id"], "ball", "ok",
                  {"vertices": view.vertex_count, "edges": view.edge_count,
                   "complete": view.complete})


def _step_validate(env, step, report):
    graph = env.graph(step["graph"])
    rep = validate_graph(graph)
    ok = rep.valid and \
        (rep.simplicial or not step.get("expect_simplicial", True)) and \
        (rep.no_inversions or not step.get("expect_no_inversions", True))
    report.record(step.get("id", step["graph"]), "validate",
                  "ok" if ok else "fail",
                  {"violations": [str(v) for v in rep.violations]})
    report.verdict(step.get("id", step["graph"]), "graph-valid",
                   "pass" if ok else "fail",
                   f"simplicial={rep.simplicial} no_inversions={rep.no_inversions}")


def _step_orbit_counts(env, step, report):
    graph = env.graph(step["graph"])
    ok = True
    detail = {"vertex_orbits": graph.vertex_orbit_count,
              "edge_orbits": graph.edge_orbit_count}
    if "vertices" in step:
        ok &= graph.vertex_orbit_count == step["vertices"]
    if "edges" in step:
        ok &= graph.edge_orbit_count == step["edges"]
    report.record(step.get("id", step["graph"]), "orbit_counts",
                  "ok" if ok else "fail", detail)
    report.verdict(step.get("id", step["graph"]), "orbit-counts",
                   "pass" if ok else "fail", json.dumps(detail, sort_keys=True))


def _step_ball_counts(env, step, report):
    view = env.ball(step["ball"])
    ok = True
    if "vertices" in step:
        ok &= view.vertex_count == step["vertices"]
    if "edges" in step:
        ok &= view.edge_count == step["edges"]
    detail = {"vertices": view.vertex_count, "edges": view.edge_count}
    report.record(step.get("id", step["ball"]), "ball_counts",
                  "ok" if ok else "fail", detail)
    report.verdict(step.get("id", step["ball"]), "ball-counts",
                   "pass" if ok else "fail", json.dumps(detail, sort_keys=True))


def _step_audit_tree(env, step, report):
    view = env.ball(step["ball"])
    forest = view.is_forest()
    conn = view.connected()
    ok = forest and conn
    report.record(step.get("id", step["ball"]), "audit_tree",
                  "ok" if ok else "fail",
                  {"forest": forest, "connected": conn})
    report.verdict(step.get("id", step["ball"]), "window-is-tree",
                   "pass" if ok else "fail",
                   f"forest={forest} connected={conn}")


def _step_audit_paths(env, step, report):
    """Exhaustive embedded-path counts over a window pair sample."""
    view = env.ball(step["ball"])
    bound = step.get("length_bound", 2 * view.radius)
    limit = step.get("pair_limit", 40)
    ok = True
    worst = 0
    for x in range(min(limit, view.vertex_count)):
        for y in range(x + 1, min(limit, view.vertex_count)):
            count = embedded_path_count(view, x, y, bound)
            worst = max(worst, count)
            if count > step.get("max_count", 1):
                ok = False
    report.record(step.get("id", step["ball"]), "audit_paths",
                  "ok" if ok else "fail", {"max_count": worst})
    report.verdict(step.get("id", step["ball"]), "embedded-path-counts",
                   "pass" if ok else "fail", f"max={worst}")


def _step_audit_fineness(env, step, report):
    graph = env.graph(step["graph"])
    vertex = env.vertex(graph, step["vertex"])
    cert = fineness_probe(
        graph, vertex,
        step.get("angle_bound", env.budgets["angle_bound"]),
        step.get("radius", env.budgets["radius"]),
        step.get("threshold", env.budgets["threshold"]),
        max_vertices=env.budgets["max_vertices"],
        parallel=env.budgets["parallel"])
    verdict = "pass" if cert.ok else (
        "fail" if cert.verdict == "violation" else "inconclusive")
    report.record(step.get("id", "fineness"), "audit_fineness", verdict,
                  {"verdict": cert.verdict,
                   "witnesses": len(cert.witness)})
    report.verdict(step.get("id", "fineness"), "fineness", verdict,
                   cert.verdict)


def _step_audit_all_angles_infinite(env, step, report):
    view = env.ball(step["ball"])
    parallel = env.budgets["parallel"]
    bad = []
    for v in range(view.vertex_count):
        if not view.vertices[v].complete:
            continue
        table = angle_table(view, v, parallel=parallel)
        for (x, y), val in sorted(table.values.items()):
            if x != y and val is not INFINITE:
                bad.append((v, x, y, val))
    ok = not bad
    report.record(step.get("id", step["ball"]), "audit_all_angles_infinite",
                  "ok" if ok else "fail", {"finite_angles": bad[:5]})
    report.verdict(step.get("id", step["ball"]), "all-angles-infinite",
                   "pass" if ok else "fail",
                   "" if ok else f"finite angle at {bad[0]}")


def _step_audit_cut_vertex(env, step, report):
    graph = env.graph(step["graph"])
    view = env.ball(step["ball"])
    z = graph.provenance.z if "vertex" not in step \
        else env.vertex(graph, step["vertex"])
    rep = cut_vertex_audit(graph, view, z)
    verdict = "pass" if rep.passed else "fail"
    report.record(step.get("id", "cut"), "audit_cut_vertex", verdict,
                  {"components": rep.component_count,
                   "details": [str(d) for d in rep.details[:6]],
                   "sampled": rep.inconclusive})
    report.verdict(step.get("id", "cut"), "cut-vertex", verdict,
                   f"components={rep.component_count}")


def _step_audit_delta(env, step, report):
    view = env.ball(step["ball"])
    est = delta_estimate(view, parallel=env.budgets["parallel"])
    ok = ("expect_delta" not in step) or (est.delta == step["expect_delta"])
    report.record(step.get("id", step["ball"]), "audit_delta",
                  "ok" if ok else "fail", {"delta": est.delta})
    report.verdict(step.get("id", step["ball"]), "delta-estimate",
                   "pass" if ok else "fail", f"delta={est.delta:g}")


def _step_audit_gh(env, step, report):
    graph = env.graph(step["graph"])
    peripherals = [env.subgroup(s) if isinstance(s, str)
                   else graph.vertices.stabilizer(s["orbit"])
                   for s in step.get("peripherals", [])]
    rep = gh_graph_audit(
        graph, peripherals,
        angle_bound=step.get("angle_bound", env.budgets["angle_bound"]),
        fineness_radius=step.get("radius", env.budgets["radius"] + 4),
        threshold=step.get("threshold", env.budgets["threshold"]),
        delta_radius=step.get("delta_radius", env.budgets["delta_radius"]),
        delta_cap=env.budgets["delta_cap"],
        conj_budget=env.budgets["conj_budget"],
        parallel=env.budgets["parallel"])
    report.record(step.get("id", step["graph"]), "audit_gh", rep.verdict,
                  {"conditions": [c.as_tuple() for c in rep.conditions]})
    for c in rep.conditions:
        report.verdict(step.get("id", step["graph"]), f"gh:{c.name}",
                       c.verdict, c.detail)


def _step_audit_cayley_abels(env, step, report):
    graph = env.graph(step["graph"])
    peripherals = [env.subgroup(s) if isinstance(s, str)
                   else graph.vertices.stabilizer(s["orbit"])
                   for s in step.get("peripherals", [])]
    rep = cayley_abels_audit(
        graph, peripherals,
        radius=step.get("radius", env.budgets["radius"]),
        conj_budget=env.budgets["conj_budget"],
        parallel=env.budgets["parallel"])
    report.record(step.get("id", step["graph"]), "audit_cayley_abels",
                  rep.verdict,
                  {"conditions": [c.as_tuple() for c in rep.conditions]})
    for c in rep.conditions:
        report.verdict(step.get("id", step["graph"]), f"ca:{c.name}",
                       c.verdict, c.detail)


def _step_audit_stabilizer_chains(env, step, report):
    graph = env.graph(step["graph"])
    prov = graph.provenance
    _require(prov is not None and prov.kind == "pushout",
             "stabilizer chains need a pushout graph")
    result = env.constructions.get(f"{step['graph']}:result")
    po = prov.vertex_pushout
    group = graph.group
    z = prov.z
    stab = graph.vertices.stabilizer(z.orbit_id)
    radius = step.get("radius", 3)
    checked = 0
    certified = 0
    mismatches = []
    for w in ball_enumerate(group, group.generator_words(), radius):
        fixes = graph.vertices.elem_equal(graph.vertices.act(w, z), z)
        member = stab.contains(w) == YES
        if fixes != member:
            mismatches.append(str(w))
            continue
        if fixes:
            chain_factorize(po, w, z)  # raises on a bad certificate
            certified += 1
        checked += 1
    ok = not mismatches
    report.record(step.get("id", step["graph"]), "audit_stabilizer_chains",
                  "ok" if ok else "fail",
                  {"checked": checked, "certified": certified,
                   "mismatches": mismatches[:5]})
    report.verdict(step.get("id", step["graph"]), "stabilizer-chains",
                   "pass" if ok else "fail",
                   f"{certified} chain certificates over {checked} elements")


def _step_audit_embedding(env, step, report):
    """Injectivity of the original graph inside a coalescence, on a ball."""
    graph = env.graph(step["graph"])
    prov = graph.provenance
    _require(prov is not None and prov.kind == "coalescence",
             "embedding audit needs a coalescence graph")
    result = env.constructions.get(f"{step['graph']}:result")
    _require(result is not None, "missing coalescence result")
    source = prov.graph
    radius = step.get("radius", 4)
    view = ball_view(source, [prov.x, prov.y], radius,
                     max_vertices=env.budgets["max_vertices"])
    images = []
    collisions = []
    for v in view.vertices:
        big_elem = result.embedding.codomain.vertices.elem(
            v.elem.orbit_id, result.embedding.mono.push(v.elem.rep))
        img = result.quotient.vertex(big_elem)
        for other_v, other in images:
            if graph.vertices.elem_equal(img, other):
                collisions.append((str(v.elem), str(other_v)))
        images.append((v.elem, img))
    ok = not collisions
    report.record(step.get("id", step["graph"]), "audit_embedding",
                  "ok" if ok else "fail",
                  {"vertices": len(images), "collisions": collisions[:5]})
    report.verdict(step.get("id", step["graph"]), "embedding-injective",
                   "pass" if ok else "fail",
                   f"{len(images)} vertices embedded")


def _step_stabilizer_check(env, step, report):
    graph = env.graph(step["graph"])
    stab = graph.vertices.stabilizer(step["orbit"])
    bad = []
    for w in step.get("contains", []):
        if stab.contains(Word.parse(w)) != YES:
            bad.append(("missing", w))
    for w in step.get("excludes", []):
        if stab.contains(Word.parse(w)) != NO:
            bad.append(("present", w))
    ok = not bad
    report.record(step.get("id", step["orbit"]), "stabilizer_check",
                  "ok" if ok else "fail", {"bad": bad})
    report.verdict(step.get("id", step["orbit"]), "stabilizer-membership",
                   "pass" if ok else "fail", str(bad) if bad else "")


def _step_project_tree(env, step, report):
    graph = env.graph(step["graph"])
    tree, pi = project_to_tree(graph)
    env.constructions[step.get("id", "tree")] = tree
    radius = step.get("check_radius", 3)
    group = graph.group
    z = graph.provenance.z
    distinguished = tree.hooks.distinguished
    commuting = all(pi.commutes_on(graph.edges.elem(eo.orbit_id))
                    for eo in graph.edge_orbits)
    preimage_ok = True
    for w in ball_enumerate(group, group.generator_words(), radius):
        v = graph.vertices.act(w, z)
        hits = tree.vertices.elem_equal(pi.vertex(v), distinguished)
        if hits != graph.vertices.elem_equal(v, z):
            preimage_ok = False
            break
    ok = commuting and preimage_ok
    report.record(step.get("id", "tree"), "project_tree",
                  "ok" if ok else "fail",
                  {"commuting": commuting, "preimage_singleton": preimage_ok})
    report.verdict(step.get("id", "tree"), "tree-projection",
                   "pass" if ok else "fail",
                   f"commuting={commuting} preimage={preimage_ok}")


def _step_presentation_amalgam(env, step, report):
    g = env.group(step["group"])
    p1 = env.presentation(step["left"])
    p2 = env.presentation(step["right"])
    join = JoinSubgroup(g, p1.peripherals[step["left_label"]],
                        p2.peripherals[step["right_label"]])
    out = amalgam_presentation(p1, step["left_label"], p2, step["right_label"],
                               g, join, join_label=step.get("join_label", "KK"))
    env.constructions[step["id"]] = out
    count_ok = len(out.relators) == len(p1.relators) + len(p2.relators)
    rep = verify_relators(out, g)
    ok = count_ok and rep.passed
    report.record(step["id"], "presentation_amalgam", "ok" if ok else "fail",
                  {"relators": len(out.relators), "count_ok": count_ok,
                   "relators_pass": rep.passed})
    report.verdict(step["id"], "amalgam-presentation", "pass" if ok else "fail",
                   f"{len(out.relators)} relators")


def _step_presentation_hnn(env, step, report):
    g = env.group(step["group"])
    pres = env.presentation(step["presentation"])
    join = generated(g, [Word.parse(w) for w in step["join_generators"]],
                     budget=step.get("budget", 4))
    out = hnn_presentation(pres, step["k_label"], step["l_label"], g, join,
                           join_label=step.get("join_label", "KtL"))
    env.constructions[step["id"]] = out
    count_ok = len(out.relators) == len(pres.relators)
    rep = verify_relators(out, g)
    ok = count_ok and rep.passed
    report.record(step["id"], "presentation_hnn", "ok" if ok else "fail",
                  {"relators": len(out.relators), "count_ok": count_ok,
                   "relators_pass": rep.passed})
    report.verdict(step["id"], "hnn-presentation", "pass" if ok else "fail",
                   f"{len(out.relators)} relators")


def _step_verify_relators(env, step, report):
    pres = env.presentation(step["presentation"])
    g = env.group(step["group"])
    rep = verify_relators(pres, g)
    report.record(step.get("id", step["presentation"]), "verify_relators",
                  "ok" if rep.passed else "fail",
                  {"failures": [str(w) for _, w in rep.failures[:5]]})
    report.verdict(step.get("id", step["presentation"]), "relators-trivial",
                   "pass" if rep.passed else "fail",
                   f"{len(rep.failures)} failures")


def _step_dehn(env, step, report):
    pres = env.presentation(step["presentation"])
    g = env.group(step["group"])
    table = dehn_bruteforce(
        pres, g, step["max_length"],
        fill_cap=step.get("fill_cap", env.budgets["fill_cap"]),
        conjugator_cap=step.get("conjugator_cap", env.budgets["conjugator_cap"]),
        h_ball=step.get("h_ball", env.budgets["h_ball"]))
    env.constructions[step.get("id", "dehn")] = table
    values = [e.value for e in table.entries]
    flags = [e.flag() for e in table.entries]
    ok = values == sorted(values)
    if "expect_values" in step:
        ok &= values == list(step["expect_values"])
    report.record(step.get("id", "dehn"), "dehn", "ok" if ok else "fail",
                  {"values": values, "flags": flags})
    report.verdict(step.get("id", "dehn"), "dehn-table",
                   "pass" if ok else "fail",
                   f"values={values} flags={flags}")


def _step_hnn2(env, step, report):
    """Stable-letter-into-a-conjugate recipe: reduce to an amalgam with an
    HNN extension of the distinguished subgroup, and certify the natural
    isomorphism on a ball."""
    g = env.group(step["group"])
    k_group = env.group(step["k_group"])
    k_embed = env.mono(step["k_embed"])
    c_in_g = env.subgroup(step["edge"])
    phi = env.mono(step["iso"])
    s = g.normalize(Word.parse(step.get("conjugator", "1")))
    t_name = step.get("stable_letter", "t")
    u_name = step.get("recipe_letter", "u")

    g_phi = build_hnn(f"{step['id']}:hnn_phi", g, c_in_g, phi, t_name,
                      trust_monomorphisms=True)
    psi_images = [g.multiply(s.inverse(), phi.push(w), s)
                  for w in c_in_g.generators]
    psi = Monomorphism(c_in_g, generated(g, psi_images), psi_images)
    g_psi = build_hnn(f"{step['id']}:hnn_psi", g, c_in_g, psi, u_name,
                      trust_monomorphisms=True)

    # the same data inside the subgroup's own presentation
    c_in_k_gens = [k_embed.preimage(w) for w in c_in_g.generators]
    _require(all(w is not None for w in c_in_k_gens),
             "edge subgroup must lie inside the distinguished subgroup")
    c_in_k = generated(k_group, c_in_k_gens)
    psi_k_images = [k_embed.preimage(w) for w in psi_images]
    _require(all(w is not None for w in psi_k_images),
             "conjugated image must return into the distinguished subgroup")
    psi_k = Monomorphism(c_in_k, generated(k_group, psi_k_images), psi_k_images)
    ell = build_hnn(f"{step['id']}:L", k_group, c_in_k, psi_k, u_name,
                    trust_monomorphisms=True)
    into_left = k_embed
    into_right = Monomorphism(whole(k_group),
                              RestrictedSubgroup(ell, whole(k_group), "base"),
                              k_group.generator_words())
    amalg = build_amalgam(f"{step['id']}:amalgam", g, ell, into_left,
                          into_right, trust_monomorphisms=True)

    env.constructions[f"{step['id']}:hnn_phi"] = g_phi
    env.constructions[f"{step['id']}:hnn_psi"] = g_psi
    env.constructions[f"{step['id']}:amalgam"] = amalg
    env.groups[f"{step['id']}:hnn_phi"] = g_phi
    env.groups[f"{step['id']}:hnn_psi"] = g_psi
    env.groups[f"{step['id']}:amalgam"] = amalg

    t = Word(((t_name, 1),))
    u = Word(((u_name, 1),))

    def to_phi(word):
        out = []
        for name, sign in word:
            if name == u_name:
                rep = s.inverse() * t
                out.extend(rep if sign > 0 else rep.inverse())
            else:
                out.append((name, sign))
        return Word(out)

    relators_ok = all(
        g_phi.is_identity(to_phi(u * w * u.inverse()) *
                          g.multiply(s.inverse(), phi.push(w), s).inverse())
        for w in c_in_g.generators
    )
    ball = ball_enumerate(g_psi, g_psi.generator_words(),
                          step.get("check_radius", 3))
    images = {}
    injective = True
    for w in ball:
        img = g_phi.normalize(to_phi(w))
        if img in images and images[img] != w:
            injective = False
            break
        images[img] = w
    amalgam_ok = all(
        amalg.is_identity(u * k_embed.push(w) * u.inverse() *
                          k_embed.push(psi_k.push(w)).inverse())
        for w in c_in_k_gens
    )
    ok = relators_ok and injective and amalgam_ok
    report.record(step["id"], "hnn2", "ok" if ok else "fail",
                  {"relators_ok": relators_ok, "injective_on_ball": injective,
                   "amalgam_relation": amalgam_ok, "ball": len(ball)})
    report.verdict(step["id"], "hnn2-recipe", "pass" if ok else "fail",
                   f"ball={len(ball)} injective={injective}")


def _step_normalize_check(env, step, report):
    g = env.group(step["group"])
    lhs = g.normalize(Word.parse(step["word"]))
    rhs = g.normalize(Word.parse(step.get("equals", "1")))
    ok = lhs == rhs
    report.record(step.get("id", "normalize"), "normalize_check",
                  "ok" if ok else "fail", {"lhs": str(lhs), "rhs": str(rhs)})
    report.verdict(step.get("id", "normalize"), "normalize",
                   "pass" if ok else "fail", f"{lhs} vs {rhs}")


STEP_HANDLERS = {
    "induce": _step_induce,
    "c_pushout": _step_c_pushout,
    "coalesce": _step_coalesce,
    "bass_serre": _step_bass_serre,
    "ball": _step_ball,
    "validate": _step_validate,
    "orbit_counts": _step_orbit_counts,
    "ball_counts": _step_ball_counts,
    "audit_tree": _step_audit_tree,
    "audit_paths": _step_audit_paths,
    "audit_fineness": _step_audit_fineness,
    "audit_all_angles_infinite": _step_audit_all_angles_infinite,
    "audit_cut_vertex": _step_audit_cut_vertex,
    "audit_delta": _step_audit_delta,
    "audit_gh": _step_audit_gh,
    "audit_cayley_abels": _step_audit_cayley_abels,
    "audit_stabilizer_chains": _step_audit_stabilizer_chains,
    "audit_embedding": _step_audit_embedding,
    "stabilizer_check": _step_stabilizer_check,
    "project_tree": _step_project_tree,
    "presentation_amalgam": _step_presentation_amalgam,
    "presentation_hnn": _step_presentation_hnn,
    "verify_relators": _step_verify_relators,
    "dehn": _step_dehn,
    "hnn2": _step_hnn2,
    "normalize_check": _step_normalize_check,
}


def run_pipeline(spec: dict, *, overrides=None, audits_only=False,
                 timings=False) -> RunReport:
    """Execute a validated spec; determinism holds for fixed spec+budgets."""
    if overrides:
        spec = json.loads(json.dumps(spec))
        spec.setdefault("budgets", {}).update(overrides)
    env = validate_spec(spec)
    # the report echoes the numeric budgets; execution switches (parallelism,
    # injection trust) change how answers are computed, never what they are,
    # so they stay out of the byte-deterministic report
    echoed = {k: v for k, v in env.budgets.items()
              if k not in ("parallel", "trust_monomorphisms")}
    report = RunReport(env.name, budgets=echoed)
    report.audits_only = audits_only  # exports are skipped by the caller
    if timings:
        report.timings_ms = {}
    for i, step in enumerate(spec.get("pipeline", [])):
        op = step["op"]
        start = time.monotonic()
        try:
            STEP_HANDLERS[op](env, step, report)
        except BudgetExceeded as exc:
            report.record(step.get("id", f"step{i}"), op, "error",
                          {"budget_exceeded": str(exc)})
            report.budget_exhausted = True
            break
        except SpecError:
            raise
        except ForgeError as exc:
            report.record(step.get("id", f"step{i}"), op, "error",
                          {"error": f"{type(exc).__name__}: {exc}"})
            report.verdict(step.get("id", f"step{i}"), op, "fail",
                           f"{type(exc).__name__}: {exc}")
        if timings:
            key = f"{i}:{op}"
            report.timings_ms[key] = round(
                (time.monotonic() - start) * 1000, 3)
    report.env = env
    return report
