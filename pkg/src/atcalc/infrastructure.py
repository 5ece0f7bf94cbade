"""Infrastructure models: location graphs, actors, policies, labelled data.

An infrastructure is one state of the instantiated transition system.
Actors stand at locations of a directed location graph, hold credential
strings, and perform the actions ``get``, ``move``, ``put`` and ``eval``
subject to per-location policies.  Data items carry decentralized
labels (an owner plus a reader set) that no rule ever rewrites; a mode
switch decides whether the ``get`` rule enforces those labels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Union

from .errors import UnknownLocation, UnknownTransform
from .kripke import KripkeStructure, TransitionSystem, build_system, reach_close

Identity = str
Location = str
Payload = Union[int, str]

ACTIONS = frozenset({"get", "move", "put", "eval"})

DEFAULT_EXPLORATION_BOUND = 100_000


@dataclass(frozen=True)
class DlmLabel:
    """Decentralized label: who owns a datum and who may read it."""

    owner: Identity
    readers: frozenset

    def __post_init__(self):
        object.__setattr__(self, "readers", frozenset(self.readers))


@dataclass(frozen=True)
class LabelledDatum:
    label: DlmLabel
    payload: Payload


def datum(owner: Identity, readers: Iterable[Identity], payload: Payload) -> LabelledDatum:
    return LabelledDatum(DlmLabel(owner, frozenset(readers)), payload)


def owner(d: LabelledDatum) -> Identity:
    return d.label.owner


def readers(d: LabelledDatum) -> frozenset:
    return d.label.readers


def owns(g: "IGraph", l: Location, a: Identity, d: LabelledDatum) -> bool:
    """Ownership test; the graph and location parameters are kept for
    signature fidelity but play no role."""
    return owner(d) == a


def has_access(g: "IGraph", l: Location, a: Identity, d: LabelledDatum) -> bool:
    return owns(g, l, a, d) or a in readers(d)


# --- policy conditions -------------------------------------------------

class Condition:
    """Closed predicate over (acting identity, current graph)."""

    __slots__ = ()

    def evaluate(self, actor: Identity, graph: "IGraph") -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class Anyone(Condition):
    def evaluate(self, actor, graph):
        return True


@dataclass(frozen=True)
class HasCredential(Condition):
    credential: str

    def evaluate(self, actor, graph):
        return self.credential in graph.credentials_of(actor)


@dataclass(frozen=True)
class AtLocation(Condition):
    location: Location

    def evaluate(self, actor, graph):
        return actor in graph.actors_at(self.location)


@dataclass(frozen=True)
class PresentWithCredential(Condition):
    """The acting identity is at the location and holds the credential."""

    location: Location
    credential: str

    def evaluate(self, actor, graph):
        return actor in graph.actors_at(self.location) and self.credential in graph.credentials_of(actor)


@dataclass(frozen=True)
class NotCond(Condition):
    child: Condition

    def evaluate(self, actor, graph):
        return not self.child.evaluate(actor, graph)


@dataclass(frozen=True)
class AllOf(Condition):
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    def evaluate(self, actor, graph):
        return all(c.evaluate(actor, graph) for c in self.children)


@dataclass(frozen=True)
class AnyOf(Condition):
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    def evaluate(self, actor, graph):
        return any(c.evaluate(actor, graph) for c in self.children)


@dataclass(frozen=True)
class PolicyClause:
    """One (condition, enabled action set) pair of a local policy."""

    condition: Condition
    actions: frozenset

    def __post_init__(self):
        actions = frozenset(self.actions)
        if not actions <= ACTIONS:
            raise ValueError(f"unknown actions: {sorted(actions - ACTIONS)}")
        object.__setattr__(self, "actions", actions)


# --- the infrastructure graph ------------------------------------------

def _payload_key(p: Payload):
    return (0, "", p) if isinstance(p, int) else (1, p, 0)


def datum_sort_key(d: LabelledDatum):
    return (d.label.owner, tuple(sorted(d.label.readers)), _payload_key(d.payload))


class IGraph:
    """Location topology, actor placement, credentials and located data.

    Immutable; the constructor normalizes every mentioned location into
    the placement and data tables so structurally equal graphs intern to
    the same state.
    """

    __slots__ = ("edges", "placement", "credentials", "loc_state", "_locations", "_hash")

    def __init__(
        self,
        edges: Iterable[tuple[Location, Location]],
        placement: Mapping[Location, Iterable[Identity]],
        credentials: Mapping[Identity, tuple[Iterable[str], Iterable[str]]],
        loc_state: Mapping[Location, tuple[str, Iterable[LabelledDatum]]],
    ):
        edge_set = frozenset((str(a), str(b)) for a, b in edges)
        locations = set(placement) | set(loc_state)
        for a, b in edge_set:
            locations.add(a)
            locations.add(b)
        norm_placement = {
            l: frozenset(placement.get(l, frozenset())) for l in locations
        }
        norm_state = {}
        for l in locations:
            comp, data = loc_state.get(l, ("", frozenset()))
            norm_state[l] = (comp, frozenset(data))
        identities = set(credentials)
        for ids in norm_placement.values():
            identities |= ids
        norm_creds = {}
        for i in identities:
            cred, roles = credentials.get(i, (frozenset(), frozenset()))
            norm_creds[i] = (frozenset(cred), frozenset(roles))
        object.__setattr__(self, "edges", edge_set)
        object.__setattr__(self, "placement", norm_placement)
        object.__setattr__(self, "credentials", norm_creds)
        object.__setattr__(self, "loc_state", norm_state)
        object.__setattr__(self, "_locations", tuple(sorted(locations)))
        object.__setattr__(self, "_hash", hash(self._key()))

    def __setattr__(self, name, value):
        raise AttributeError("IGraph is immutable")

    def _key(self):
        return (
            self.edges,
            tuple((l, self.placement[l]) for l in self._locations),
            tuple((i, self.credentials[i]) for i in sorted(self.credentials)),
            tuple((l, self.loc_state[l]) for l in self._locations),
        )

    def __eq__(self, other):
        return isinstance(other, IGraph) and self._key() == other._key()

    def __hash__(self):
        return self._hash

    @property
    def locations(self) -> tuple:
        return self._locations

    def actors_at(self, l: Location) -> frozenset:
        return self.placement.get(l, frozenset())

    def credentials_of(self, a: Identity) -> frozenset:
        return self.credentials.get(a, (frozenset(), frozenset()))[0]

    def roles_of(self, a: Identity) -> frozenset:
        return self.credentials.get(a, (frozenset(), frozenset()))[1]

    def component_state(self, l: Location) -> str:
        return self.loc_state[l][0]

    def data_at(self, l: Location) -> frozenset:
        return self.loc_state.get(l, ("", frozenset()))[1]

    def with_placement(self, placement: Mapping[Location, frozenset]) -> "IGraph":
        return IGraph(self.edges, placement, self.credentials, self.loc_state)

    def with_location_data(self, l: Location, data: frozenset) -> "IGraph":
        new_state = dict(self.loc_state)
        new_state[l] = (new_state[l][0], frozenset(data))
        return IGraph(self.edges, self.placement, self.credentials, new_state)


@dataclass(frozen=True)
class GlobalPolicy:
    """Scenario-wide requirement: only the allowed identities may perform
    the action at the location."""

    location: Location
    action: str
    allowed: frozenset

    def __post_init__(self):
        object.__setattr__(self, "allowed", frozenset(self.allowed))

    def complied_by(self, infra: "Infrastructure", identity: Identity) -> bool:
        if identity in self.allowed:
            return True
        return not enables(infra, self.location, identity, self.action)


class Infrastructure:
    """One system state: a graph plus per-location policies and the
    rule configuration.

    ``delta`` and every configuration field are constant along
    transitions; only the graph's placement and located data evolve.
    """

    __slots__ = (
        "graph",
        "delta",
        "dlm_enforced",
        "global_policy",
        "transforms",
        "put_payloads",
        "put_readers",
        "_hash",
    )

    def __init__(
        self,
        graph: IGraph,
        delta: Mapping[Location, Iterable[PolicyClause]],
        dlm_enforced: bool = False,
        global_policy: Optional[GlobalPolicy] = None,
        transforms: Iterable[str] = (),
        put_payloads: Iterable[Payload] = (),
        put_readers: Iterable[Identity] = (),
    ):
        object.__setattr__(self, "graph", graph)
        object.__setattr__(
            self, "delta", {l: frozenset(cs) for l, cs in delta.items()}
        )
        object.__setattr__(self, "dlm_enforced", bool(dlm_enforced))
        object.__setattr__(self, "global_policy", global_policy)
        object.__setattr__(self, "transforms", tuple(sorted(set(transforms))))
        object.__setattr__(
            self, "put_payloads", tuple(sorted(set(put_payloads), key=_payload_key))
        )
        object.__setattr__(self, "put_readers", frozenset(put_readers))
        object.__setattr__(self, "_hash", hash(self._key()))

    def __setattr__(self, name, value):
        raise AttributeError("Infrastructure is immutable")

    def _key(self):
        return (
            self.graph,
            tuple(sorted((l, cs) for l, cs in self.delta.items())),
            self.dlm_enforced,
            self.global_policy,
            self.transforms,
            self.put_payloads,
            self.put_readers,
        )

    def __eq__(self, other):
        return isinstance(other, Infrastructure) and self._key() == other._key()

    def __hash__(self):
        return self._hash

    def with_graph(self, graph: IGraph) -> "Infrastructure":
        return Infrastructure(
            graph,
            self.delta,
            self.dlm_enforced,
            self.global_policy,
            self.transforms,
            self.put_payloads,
            self.put_readers,
        )


def enables(infra: Infrastructure, l: Location, h: Identity, action: str) -> bool:
    """Local-policy judgment: some clause at ``l`` lists the action and
    its condition holds for the acting identity."""
    if l not in infra.graph.locations:
        raise UnknownLocation(l)
    return any(
        action in clause.actions and clause.condition.evaluate(h, infra.graph)
        for clause in infra.delta.get(l, frozenset())
    )


# --- label-preserving payload transforms --------------------------------

def _increment(p: Payload) -> Payload:
    if not isinstance(p, int):
        raise TypeError("increment expects an integer payload")
    return p + 1


BUILTIN_TRANSFORMS: dict[str, Callable[[Payload], Payload]] = {
    "identity": lambda p: p,
    "increment": _increment,
}


def apply_label_fun(
    name: str,
    d: LabelledDatum,
    registry: Mapping[str, Callable[[Payload], Payload]] = BUILTIN_TRANSFORMS,
) -> LabelledDatum:
    """Apply a registered payload transform; the label is copied verbatim,
    so preservation holds by construction."""
    fn = registry.get(name)
    if fn is None:
        raise UnknownTransform(name)
    return LabelledDatum(d.label, fn(d.payload))


# --- the action rules ----------------------------------------------------

@dataclass(frozen=True)
class ActionInstance:
    """One fired rule: which actor did what, where, to which datum."""

    kind: str
    actor: Identity
    location: Location
    target: Optional[Location] = None
    datum: Optional[LabelledDatum] = None
    transform: Optional[str] = None


def step(infra: Infrastructure) -> list[tuple[ActionInstance, Infrastructure]]:
    """Enumerate all successor states in a fixed deterministic order:
    get, then move, then put, then eval; within a rule, lexicographic on
    (identity, locations, datum, transform).

    ``get``: the actor at ``l`` copies a datum from ``l2`` into ``l``,
    label intact, provided the policy at ``l2`` grants ``get``; with DLM
    enforcement the actor must additionally be the owner or a reader.
    ``move``: along a graph edge, policy checked at the destination.
    ``put``: inserts a datum owned by the actor with the scenario's
    default readers, one per configured payload.
    ``eval``: rewrites an accessible datum with a registered transform.
    """
    g = infra.graph
    locs = list(g.locations)
    actor_locs = sorted((a, l) for l in locs for a in g.actors_at(l))
    out: list[tuple[ActionInstance, Infrastructure]] = []

    for a, l in actor_locs:
        for l2 in locs:
            if not enables(infra, l2, a, "get"):
                continue
            for d in sorted(g.data_at(l2), key=datum_sort_key):
                if infra.dlm_enforced and not has_access(g, l2, a, d):
                    continue
                new_data = g.data_at(l) | {d}
                succ = infra.with_graph(g.with_location_data(l, new_data))
                out.append((ActionInstance("get", a, l, target=l2, datum=d), succ))

    for a, l in actor_locs:
        for l2 in locs:
            if (l, l2) not in g.edges or not enables(infra, l2, a, "move"):
                continue
            placement = dict(g.placement)
            placement[l] = placement[l] - {a}
            placement[l2] = placement[l2] | {a}
            succ = infra.with_graph(g.with_placement(placement))
            out.append((ActionInstance("move", a, l, target=l2), succ))

    for a, l in actor_locs:
        if not enables(infra, l, a, "put"):
            continue
        for payload in infra.put_payloads:
            d = LabelledDatum(DlmLabel(a, infra.put_readers), payload)
            succ = infra.with_graph(g.with_location_data(l, g.data_at(l) | {d}))
            out.append((ActionInstance("put", a, l, datum=d), succ))

    for a, l in actor_locs:
        if not enables(infra, l, a, "eval"):
            continue
        for d in sorted(g.data_at(l), key=datum_sort_key):
            if not has_access(g, l, a, d):
                continue
            for name in infra.transforms:
                d2 = apply_label_fun(name, d)
                new_data = (g.data_at(l) - {d}) | {d2}
                succ = infra.with_graph(g.with_location_data(l, new_data))
                out.append(
                    (ActionInstance("eval", a, l, datum=d, transform=name), succ)
                )

    return out


def successors(infra: Infrastructure) -> list[Infrastructure]:
    return [succ for _, succ in step(infra)]


def explore(seed: Infrastructure, bound: int = DEFAULT_EXPLORATION_BOUND) -> KripkeStructure:
    """Materialize the reachable state space of an infrastructure and
    wrap it as a Kripke structure initialized at the seed."""
    ts = build_system([seed], successors, bound)
    return reach_close(ts, frozenset({ts.id_of(seed)}))


# --- the healthcare/GDPR scenario ----------------------------------------

PATIENT = "Patient"
DOCTOR = "Doctor"
EVE = "Eve"

GDPR_LOCATIONS = ("home", "cloud", "sphone", "hospital")
GDPR_ACTORS = frozenset({PATIENT, DOCTOR})

CLOUD_DATUM = datum(PATIENT, {DOCTOR}, 42)


def gdpr_graph() -> IGraph:
    return IGraph(
        edges={("home", "cloud"), ("sphone", "cloud"), ("cloud", "hospital")},
        placement={"home": {PATIENT}, "hospital": {DOCTOR}},
        credentials={PATIENT: ({"PIN"}, frozenset()), DOCTOR: ({"skey"}, frozenset())},
        loc_state={"cloud": ("free", {CLOUD_DATUM})},
    )


def gdpr_policies() -> dict:
    free = frozenset({"put", "get", "move", "eval"})
    return {
        "home": {PolicyClause(Anyone(), free)},
        "sphone": {PolicyClause(HasCredential("PIN"), free)},
        "cloud": {PolicyClause(Anyone(), free)},
        "hospital": {PolicyClause(PresentWithCredential("hospital", "skey"), free)},
    }


def gdpr_global_policy() -> GlobalPolicy:
    return GlobalPolicy("cloud", "get", GDPR_ACTORS)


def gdpr_scenario(dlm_enforced: bool = False) -> Infrastructure:
    """The healthcare monitoring scenario: a patient at home, a doctor at
    the hospital, and one labelled bio-marker value in the cloud."""
    return Infrastructure(
        gdpr_graph(),
        gdpr_policies(),
        dlm_enforced=dlm_enforced,
        global_policy=gdpr_global_policy(),
    )


def gdpr_kripke(
    dlm_enforced: bool = False, bound: int = DEFAULT_EXPLORATION_BOUND
) -> KripkeStructure:
    return explore(gdpr_scenario(dlm_enforced), bound)
