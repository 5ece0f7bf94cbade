"""Parsing, loading and canonical serialization of scenario documents.

A ``.scenario`` file is a JSON document validated against the shipped
schema.  It declares either a raw transition system or an
infrastructure, plus named state sets (extensional or by predicate),
attack trees, CTL formulas and queries.  Parsing is purely syntactic
and resolves names; loading materializes the state space and turns the
symbolic definitions into engine objects.

Serialization is canonical (sorted keys, two-space indent, trailing
newline), so ``parse(serialize(doc))`` reproduces the document and
identical inputs yield byte-identical outputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Optional

import jsonschema

from . import ctl
from .attack_tree import AndNode, AttackGoal, AttackTree, Base, OrNode
from .errors import (
    DuplicateName,
    ScenarioLoadError,
    ScenarioSyntaxError,
    SchemaViolation,
    UnresolvedReference,
)
from .infrastructure import (
    ACTIONS,
    AllOf,
    Anyone,
    AnyOf,
    AtLocation,
    Condition,
    GlobalPolicy,
    HasCredential,
    IGraph,
    Infrastructure,
    LabelledDatum,
    NotCond,
    PolicyClause,
    PresentWithCredential,
    DEFAULT_EXPLORATION_BOUND,
    datum,
    enables,
    explore,
)
from .kripke import KripkeStructure, TransitionSystem, reach_close

_MAX_NESTING = 256

SCENARIO_SUFFIX = ".scenario"


def _schema() -> dict:
    text = resources.files("atcalc").joinpath("schema/scenario.schema.json").read_text("utf-8")
    return json.loads(text)


_VALIDATOR = jsonschema.Draft202012Validator(_schema())


@dataclass(frozen=True)
class ScenarioDoc:
    """A validated scenario document in canonical abstract form."""

    data: dict

    @property
    def mode(self) -> str:
        return "infrastructure" if "infrastructure" in self.data else "system"

    @property
    def sets(self) -> dict:
        return self.data.get("sets", {})

    @property
    def trees(self) -> dict:
        return self.data.get("trees", {})

    @property
    def formulas(self) -> dict:
        return self.data.get("formulas", {})

    @property
    def queries(self) -> dict:
        return self.data.get("queries", {})

    def with_tree(self, name: str, tree_json: dict) -> "ScenarioDoc":
        if name in self.trees:
            raise DuplicateName(name)
        data = dict(self.data)
        trees = dict(data.get("trees", {}))
        trees[name] = tree_json
        data["trees"] = trees
        return ScenarioDoc(data)


def _reject_duplicates(pairs):
    seen = set()
    out = {}
    for key, value in pairs:
        if key in seen:
            raise DuplicateName(key)
        seen.add(key)
        out[key] = value
    return out


def _reject_constant(name):
    raise ValueError(f"non-finite numbers are not allowed: {name}")


def _check_depth(obj: Any) -> None:
    stack = [(obj, 1)]
    while stack:
        node, depth = stack.pop()
        if depth > _MAX_NESTING:
            raise SchemaViolation("document nesting too deep", "$")
        if isinstance(node, dict):
            stack.extend((v, depth + 1) for v in node.values())
        elif isinstance(node, list):
            stack.extend((v, depth + 1) for v in node)


def parse(text: str) -> ScenarioDoc:
    """Parse and validate one scenario document.

    Fails fast with the first error: :class:`ScenarioSyntaxError` with a
    position for malformed JSON, :class:`DuplicateName`,
    :class:`SchemaViolation` with a path, or
    :class:`UnresolvedReference`.
    """
    try:
        data = json.loads(
            text, object_pairs_hook=_reject_duplicates, parse_constant=_reject_constant
        )
    except DuplicateName:
        raise
    except json.JSONDecodeError as e:
        raise ScenarioSyntaxError(e.msg, e.lineno, e.colno) from None
    except (ValueError, RecursionError) as e:
        raise ScenarioSyntaxError(str(e), 1, 1) from None
    _check_depth(data)
    error = jsonschema.exceptions.best_match(_VALIDATOR.iter_errors(data))
    if error is not None:
        raise SchemaViolation(error.message, error.json_path)
    _resolve_references(data)
    return ScenarioDoc(data)


def parse_file(path) -> ScenarioDoc:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ScenarioSyntaxError(f"not valid UTF-8: {e.reason}", 1, max(e.start, 1)) from None
    return parse(text)


# --- reference resolution -------------------------------------------------

def _walk_set_refs(doc: dict):
    """Yield every set reference (name or inline definition) in the document."""

    def from_goal(g):
        yield g["pre"]
        yield g["post"]

    def from_tree(t):
        if "base" in t:
            yield from from_goal(t["base"])
            return
        yield from from_goal(t["goal"])
        for child in t.get("and", t.get("or", [])):
            yield from from_tree(child)

    def from_formula(f):
        if "atom" in f:
            yield f["atom"]
            return
        for key in ("not", "ex", "ax", "ef", "af", "eg", "ag"):
            if key in f:
                yield from from_formula(f[key])
                return
        for key in ("and", "or", "eu"):
            if key in f:
                for child in f[key]:
                    yield from from_formula(child)
                return

    for definition in doc.get("sets", {}).values():
        yield definition
    for tree in doc.get("trees", {}).values():
        yield from from_tree(tree)
    for formula in doc.get("formulas", {}).values():
        yield from from_formula(formula)
    for query in doc.get("queries", {}).values():
        if query["kind"] == "synth":
            yield query["init"]
            yield query["goal"]


def _resolve_references(doc: dict) -> None:
    sets = doc.get("sets", {})
    infra = doc.get("infrastructure")
    locations = set(infra["locations"]) if infra else set()

    def check_location(loc: str):
        if loc not in locations:
            raise UnresolvedReference(loc)

    if infra:
        for section in ("placement", "data", "policies"):
            for loc in infra.get(section, {}):
                check_location(loc)
        for src, dst in infra.get("edges", []):
            check_location(src)
            check_location(dst)
        gp = infra.get("global_policy")
        if gp:
            check_location(gp["location"])

    pending = list(_walk_set_refs(doc))
    while pending:
        ref = pending.pop()
        if isinstance(ref, str):
            if ref not in sets:
                raise UnresolvedReference(ref)
            continue
        if "all_of" in ref or "any_of" in ref:
            pending.extend(ref.get("all_of", ref.get("any_of", [])))
            continue
        if "complement" in ref:
            pending.append(ref["complement"])
            continue
        if "payloads" in ref and infra is not None:
            raise SchemaViolation("payload sets require a raw system", "$.sets")
        if infra is None:
            if not ({"ids", "payloads", "initial"} & ref.keys()):
                raise SchemaViolation(
                    "infrastructure predicates require an infrastructure", "$.sets"
                )
            continue
        for key in ("actor_at", "datum_at", "enables_holds"):
            if key in ref:
                check_location(ref[key]["location"])
        if "owner_is" in ref and "location" in ref["owner_is"]:
            check_location(ref["owner_is"]["location"])
        if "policy_violation" in ref and not infra.get("global_policy"):
            raise SchemaViolation(
                "policy_violation requires a global_policy block", "$.infrastructure"
            )

    if doc.get("system") is not None:
        system = doc["system"]
        states = system["states"]
        seen = set()
        for payload in states:
            key = (type(payload).__name__, payload)
            if key in seen:
                raise DuplicateName(str(payload))
            seen.add(key)
        declared = set((type(p).__name__, p) for p in states)
        for src, dst in system["edges"]:
            for endpoint in (src, dst):
                if (type(endpoint).__name__, endpoint) not in declared:
                    raise UnresolvedReference(str(endpoint))
        for payload in system.get("init", []):
            if (type(payload).__name__, payload) not in declared:
                raise UnresolvedReference(str(payload))

    for name, query in doc.get("queries", {}).items():
        for key in ("tree", "abstract", "concrete"):
            if key in query and query[key] not in doc.get("trees", {}):
                raise UnresolvedReference(query[key])
        if "formula" in query and query["formula"] not in doc.get("formulas", {}):
            raise UnresolvedReference(query["formula"])


# --- materialization -------------------------------------------------------

@dataclass(frozen=True)
class Query:
    kind: str
    tree: Optional[str] = None
    abstract: Optional[str] = None
    concrete: Optional[str] = None
    formula: Optional[str] = None
    init: Optional[frozenset] = None
    goal: Optional[frozenset] = None
    depth: Optional[int] = None


@dataclass
class LoadedScenario:
    """A scenario with its state space materialized."""

    doc: ScenarioDoc
    system: TransitionSystem
    kripke: KripkeStructure
    sets: dict = field(default_factory=dict)
    trees: dict = field(default_factory=dict)
    formulas: dict = field(default_factory=dict)
    queries: dict = field(default_factory=dict)
    infrastructure: Optional[Infrastructure] = None


def _build_condition(c: dict) -> Condition:
    if "anyone" in c:
        return Anyone()
    if "has_credential" in c:
        return HasCredential(c["has_credential"])
    if "at_location" in c:
        return AtLocation(c["at_location"])
    if "present_with_credential" in c:
        inner = c["present_with_credential"]
        return PresentWithCredential(inner["location"], inner["credential"])
    if "not" in c:
        return NotCond(_build_condition(c["not"]))
    if "all" in c:
        return AllOf(tuple(_build_condition(x) for x in c["all"]))
    if "any" in c:
        return AnyOf(tuple(_build_condition(x) for x in c["any"]))
    raise SchemaViolation("unknown condition", "$.infrastructure.policies")


def _build_infrastructure(block: dict) -> Infrastructure:
    locations = block["locations"]
    graph = IGraph(
        edges=[tuple(e) for e in block.get("edges", [])],
        placement={l: frozenset(ids) for l, ids in block.get("placement", {}).items()
                   } | {l: frozenset() for l in locations if l not in block.get("placement", {})},
        credentials={
            i: (frozenset(entry.get("credentials", [])), frozenset(entry.get("roles", [])))
            for i, entry in block.get("credentials", {}).items()
        },
        loc_state={
            l: (
                entry.get("state", ""),
                frozenset(
                    datum(item["owner"], item["readers"], item["payload"])
                    for item in entry.get("items", [])
                ),
            )
            for l, entry in block.get("data", {}).items()
        } | {l: ("", frozenset()) for l in locations if l not in block.get("data", {})},
    )
    delta = {
        l: frozenset(
            PolicyClause(_build_condition(cl["condition"]), frozenset(cl["actions"]))
            for cl in clauses
        )
        for l, clauses in block.get("policies", {}).items()
    }
    for l in locations:
        delta.setdefault(l, frozenset())
    gp = block.get("global_policy")
    global_policy = (
        GlobalPolicy(gp["location"], gp["action"], frozenset(gp["allowed"])) if gp else None
    )
    return Infrastructure(
        graph,
        delta,
        dlm_enforced=block.get("dlm_enforced", False),
        global_policy=global_policy,
        transforms=block.get("transforms", ()),
        put_payloads=block.get("put_payloads", ()),
        put_readers=block.get("put_readers", ()),
    )


class _SetResolver:
    def __init__(self, loaded: LoadedScenario):
        self.loaded = loaded
        self._cache: dict[str, frozenset] = {}
        self._resolving: set[str] = set()

    def resolve(self, ref) -> frozenset:
        if isinstance(ref, str):
            if ref in self._cache:
                return self._cache[ref]
            if ref in self._resolving:
                raise ScenarioLoadError(f"cyclic set definition: {ref!r}")
            self._resolving.add(ref)
            result = self._materialize(self.loaded.doc.sets[ref])
            self._resolving.discard(ref)
            self._cache[ref] = result
            return result
        return self._materialize(ref)

    def _materialize(self, definition: dict) -> frozenset:
        ts = self.loaded.system
        k = self.loaded.kripke
        if "ids" in definition:
            ids = definition["ids"]
            for sid in ids:
                if not (0 <= sid < len(ts)):
                    raise ScenarioLoadError(f"state id {sid} out of range")
            return frozenset(ids)
        if "payloads" in definition:
            out = set()
            for payload in definition["payloads"]:
                if payload not in ts:
                    raise ScenarioLoadError(f"unknown state payload: {payload!r}")
                out.add(ts.id_of(payload))
            return frozenset(out)
        if "initial" in definition:
            return k.init
        if "all_of" in definition:
            parts = [self.resolve(r) for r in definition["all_of"]]
            return frozenset.intersection(*parts)
        if "any_of" in definition:
            parts = [self.resolve(r) for r in definition["any_of"]]
            return frozenset.union(*parts)
        if "complement" in definition:
            return k.states - self.resolve(definition["complement"])
        return self._by_predicate(definition)

    def _by_predicate(self, definition: dict) -> frozenset:
        ts = self.loaded.system

        if "actor_at" in definition:
            spec = definition["actor_at"]

            def pred(state: Infrastructure) -> bool:
                return spec["actor"] in state.graph.actors_at(spec["location"])

        elif "datum_at" in definition:
            spec = definition["datum_at"]

            def pred(state: Infrastructure) -> bool:
                return any(
                    d.payload == spec["payload"]
                    for d in state.graph.data_at(spec["location"])
                )

        elif "enables_holds" in definition:
            spec = definition["enables_holds"]

            def pred(state: Infrastructure) -> bool:
                return enables(state, spec["location"], spec["actor"], spec["action"])

        elif "owner_is" in definition:
            spec = definition["owner_is"]
            wanted = [spec["location"]] if "location" in spec else None

            def pred(state: Infrastructure) -> bool:
                locs = wanted if wanted is not None else state.graph.locations
                return all(
                    d.label.owner == spec["owner"]
                    for l in locs
                    for d in state.graph.data_at(l)
                    if d.payload == spec["payload"]
                )

        elif "policy_violation" in definition:
            spec = definition["policy_violation"]

            def pred(state: Infrastructure) -> bool:
                return not state.global_policy.complied_by(state, spec["actor"])

        else:
            raise ScenarioLoadError(f"unknown set definition: {sorted(definition)}")

        return frozenset(sid for sid in range(len(ts)) if pred(ts.payload(sid)))


def _build_tree(t: dict, resolver: _SetResolver) -> AttackTree:
    def build_goal(g: dict) -> AttackGoal:
        return AttackGoal(resolver.resolve(g["pre"]), resolver.resolve(g["post"]))

    if "base" in t:
        return Base(build_goal(t["base"]))
    goal = build_goal(t["goal"])
    children = tuple(_build_tree(c, resolver) for c in t.get("and", t.get("or", [])))
    if "and" in t:
        return AndNode(children, goal)
    return OrNode(children, goal)


def _build_formula(f: dict, resolver: _SetResolver) -> ctl.CtlFormula:
    if "atom" in f:
        return ctl.Atom(resolver.resolve(f["atom"]))
    if "not" in f:
        return ctl.Not(_build_formula(f["not"], resolver))
    if "and" in f:
        left, right = f["and"]
        return ctl.And(_build_formula(left, resolver), _build_formula(right, resolver))
    if "or" in f:
        left, right = f["or"]
        return ctl.Or(_build_formula(left, resolver), _build_formula(right, resolver))
    for key, node in (("ex", ctl.EX), ("ax", ctl.AX), ("ef", ctl.EF),
                      ("af", ctl.AF), ("eg", ctl.EG), ("ag", ctl.AG)):
        if key in f:
            return node(_build_formula(f[key], resolver))
    if "eu" in f:
        left, right = f["eu"]
        return ctl.EU(_build_formula(left, resolver), _build_formula(right, resolver))
    raise ScenarioLoadError(f"unknown formula: {sorted(f)}")


def load(doc: ScenarioDoc, bound: int = DEFAULT_EXPLORATION_BOUND) -> LoadedScenario:
    """Materialize the document: explore the state space and resolve all
    named sets, trees, formulas and queries against it.

    Raises :class:`~atcalc.errors.BoundExceeded` when exploration
    overruns ``bound`` and :class:`ScenarioLoadError` on materialization
    problems.
    """
    if doc.mode == "infrastructure":
        seed = _build_infrastructure(doc.data["infrastructure"])
        kripke = explore(seed, bound)
        loaded = LoadedScenario(doc, kripke.system, kripke, infrastructure=seed)
    else:
        block = doc.data["system"]
        ts = TransitionSystem.from_edges(block["states"], [tuple(e) for e in block["edges"]])
        init_payloads = block.get("init")
        if init_payloads is None:
            init = ts.all_states()
        else:
            init = frozenset(ts.id_of(p) for p in init_payloads)
        kripke = reach_close(ts, init)
        loaded = LoadedScenario(doc, ts, kripke)

    resolver = _SetResolver(loaded)
    for name in doc.sets:
        loaded.sets[name] = resolver.resolve(name)
    for name, tree_json in doc.trees.items():
        loaded.trees[name] = _build_tree(tree_json, resolver)
    for name, formula_json in doc.formulas.items():
        loaded.formulas[name] = _build_formula(formula_json, resolver)
    for name, q in doc.queries.items():
        kwargs: dict[str, Any] = {"kind": q["kind"]}
        for key in ("tree", "abstract", "concrete", "formula"):
            if key in q:
                kwargs[key] = q[key]
        if "depth" in q:
            kwargs["depth"] = q["depth"]
        if q["kind"] == "synth":
            kwargs["init"] = resolver.resolve(q["init"])
            kwargs["goal"] = resolver.resolve(q["goal"])
        loaded.queries[name] = Query(**kwargs)
    return loaded


def load_file(path, bound: int = DEFAULT_EXPLORATION_BOUND) -> LoadedScenario:
    return load(parse_file(path), bound)


# --- canonical serialization ----------------------------------------------

def serialize(doc_or_report) -> str:
    """Canonical UTF-8 text: sorted keys, two-space indent, one trailing
    newline.  Accepts a :class:`ScenarioDoc` or a plain report mapping."""
    data = doc_or_report.data if isinstance(doc_or_report, ScenarioDoc) else doc_or_report
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def goal_to_json(goal: AttackGoal) -> dict:
    return {"pre": {"ids": sorted(goal.pre)}, "post": {"ids": sorted(goal.post)}}


def tree_to_json(tree: AttackTree) -> dict:
    """Symbolic form of a tree with explicit (id-level) state sets; the
    result re-parses under the scenario schema."""
    if isinstance(tree, Base):
        return {"base": goal_to_json(tree.goal)}
    children = [tree_to_json(c) for c in tree.children]
    key = "and" if isinstance(tree, AndNode) else "or"
    return {key: children, "goal": goal_to_json(tree.goal)}


def adequacy_to_json(report) -> dict:
    return {
        "tree_valid": report.tree_valid,
        "ef_holds": report.ef_holds,
        "consistent": report.consistent,
        "goal": goal_to_json(report.goal),
        "kripke": {
            "states": len(report.kripke.states),
            "init": len(report.kripke.init),
        },
    }
