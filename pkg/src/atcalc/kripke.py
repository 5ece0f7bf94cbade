"""Finite explicit-state transition systems and Kripke structures.

States are opaque payloads interned into a dense id table; a property is
simply a set of state ids, so set operations double as logical
connectives.  Everything here is generic over the instantiating
object-logic: the payloads only need to be hashable and
equality-comparable.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Optional, Sequence

from .errors import BoundExceeded

StateId = int
StateSet = frozenset  # frozenset[StateId]


class TransitionSystem:
    """Immutable state table plus successor lists.

    Payloads are pairwise distinct (the table is a bijection between
    payloads and ids) and successor lists are duplicate-free.
    """

    __slots__ = ("_payloads", "_index", "_successors")

    def __init__(self, payloads: Sequence[Hashable], successors: Sequence[Sequence[StateId]]):
        if len(payloads) != len(successors):
            raise ValueError("payloads and successor table differ in length")
        self._payloads = tuple(payloads)
        self._index = {p: i for i, p in enumerate(self._payloads)}
        if len(self._index) != len(self._payloads):
            raise ValueError("state payloads must be pairwise distinct")
        table = []
        for sid, succ in enumerate(successors):
            succ = tuple(succ)
            if len(set(succ)) != len(succ):
                raise ValueError(f"duplicate successor entries for state {sid}")
            for t in succ:
                if not (0 <= t < len(self._payloads)):
                    raise ValueError(f"successor {t} of state {sid} is not a valid state id")
            table.append(succ)
        self._successors = tuple(table)

    @classmethod
    def from_edges(cls, payloads: Sequence[Hashable], edges: Iterable[tuple[Hashable, Hashable]]) -> "TransitionSystem":
        """Build a system from payloads and payload-level edges."""
        index = {p: i for i, p in enumerate(payloads)}
        if len(index) != len(tuple(payloads)):
            raise ValueError("state payloads must be pairwise distinct")
        succ: list[list[int]] = [[] for _ in index]
        for src, dst in edges:
            if src not in index:
                raise ValueError(f"edge source {src!r} is not a declared state")
            if dst not in index:
                raise ValueError(f"edge target {dst!r} is not a declared state")
            t = index[dst]
            row = succ[index[src]]
            if t not in row:
                row.append(t)
        return cls(tuple(payloads), succ)

    def __len__(self) -> int:
        return len(self._payloads)

    @property
    def state_count(self) -> int:
        return len(self._payloads)

    def all_states(self) -> StateSet:
        return frozenset(range(len(self._payloads)))

    def payload(self, sid: StateId) -> Hashable:
        return self._payloads[sid]

    def id_of(self, payload: Hashable) -> StateId:
        return self._index[payload]

    def __contains__(self, payload: Hashable) -> bool:
        return payload in self._index

    def successors(self, sid: StateId) -> tuple[StateId, ...]:
        return self._successors[sid]

    def transition_count(self) -> int:
        return sum(len(row) for row in self._successors)

    def has_edge(self, src: StateId, dst: StateId) -> bool:
        return dst in self._successors[src]

    def __repr__(self) -> str:
        return f"TransitionSystem(states={len(self)}, transitions={self.transition_count()})"


@dataclass(frozen=True)
class KripkeStructure:
    """A transition system with a designated state set and initial set.

    ``states`` is the universe all property sets are restricted to; when
    produced by :func:`reach_close` it is exactly the reflexive-transitive
    closure of ``init`` under the one-step relation.
    """

    system: TransitionSystem
    states: StateSet
    init: StateSet

    def __post_init__(self):
        universe = self.system.all_states()
        if not self.states <= universe:
            raise ValueError("states contains invalid state ids")
        if not self.init <= self.states:
            raise ValueError("init must be a subset of states")


def build_system(
    seeds: Iterable[Hashable],
    successors: Callable[[Hashable], Iterable[Hashable]],
    bound: int,
) -> TransitionSystem:
    """Materialize the closure of ``seeds`` under a successor enumerator.

    Payloads are interned by structural equality; ids are assigned in
    BFS discovery order so the numbering is reproducible.  The enumerator
    must be pure and deterministic.

    Raises :class:`BoundExceeded` as soon as more than ``bound`` states
    are discovered.
    """
    if bound < 1:
        raise ValueError("bound must be at least 1")
    payloads: list[Hashable] = []
    index: dict[Hashable, int] = {}

    def intern(p: Hashable) -> int:
        sid = index.get(p)
        if sid is None:
            if len(payloads) >= bound:
                raise BoundExceeded(bound)
            sid = len(payloads)
            index[p] = sid
            payloads.append(p)
        return sid

    queue: deque[int] = deque()
    for seed in seeds:
        if seed not in index:
            queue.append(intern(seed))
    succ_table: dict[int, tuple[int, ...]] = {}
    while queue:
        sid = queue.popleft()
        row: list[int] = []
        for nxt in successors(payloads[sid]):
            known = nxt in index
            tid = intern(nxt)
            if tid not in row:
                row.append(tid)
            if not known:
                queue.append(tid)
        succ_table[sid] = tuple(row)
    return TransitionSystem(payloads, [succ_table[i] for i in range(len(payloads))])


def reach_close(ts: TransitionSystem, init: StateSet) -> KripkeStructure:
    """Kripke structure whose state set is the forward closure of ``init``.

    The closure is reflexive: initial states are always included.
    """
    universe = ts.all_states()
    if not frozenset(init) <= universe:
        raise ValueError("init contains invalid state ids")
    seen = set(init)
    queue = deque(sorted(init))
    while queue:
        sid = queue.popleft()
        for t in ts.successors(sid):
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return KripkeStructure(ts, frozenset(seen), frozenset(init))


def holds(k: KripkeStructure, f: StateSet) -> bool:
    """Satisfaction of a property set: every initial state lies in
    ``f`` restricted to the structure's states."""
    return k.init <= (k.states & f)


def shortest_path(
    ts: TransitionSystem,
    source: StateId,
    targets: StateSet,
    within: Optional[StateSet] = None,
) -> Optional[list[StateId]]:
    """BFS-shortest path from ``source`` into ``targets``; None if no path.

    Deterministic: the queue preserves successor enumeration order, so
    ties resolve to the first-discovered state.  ``within`` optionally
    restricts the explored states.
    """
    if source in targets:
        return [source]
    parent: dict[int, int] = {source: source}
    queue: deque[int] = deque([source])
    while queue:
        sid = queue.popleft()
        for t in ts.successors(sid):
            if within is not None and t not in within:
                continue
            if t in parent:
                continue
            parent[t] = sid
            if t in targets:
                path = [t]
                while path[-1] != source:
                    path.append(parent[path[-1]])
                path.reverse()
                return path
            queue.append(t)
    return None
