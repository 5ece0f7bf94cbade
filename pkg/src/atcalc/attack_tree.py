"""The attack-tree datatype, refinement, and the validity judgment.

An attack goal is a pair of state sets (pre, post).  A base attack is
valid when every pre-state can take one transition step into the post
set; and-nodes chain their children through intermediate state sets;
or-nodes split the pre set across alternative children.  Refinement is
the least relation that allows replacing a single base leaf of an
and-node's child list by a new sequence, wrapping a tree into an
or-node of refinements sharing its goal, plus reflexivity and
transitivity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Union

from .errors import DepthExhausted, EngineInconsistency
from .kripke import StateSet, TransitionSystem

DEFAULT_REFINE_DEPTH = 8


class AttackGoal(NamedTuple):
    """Pre/post state-set pair: where the attack starts and what it reaches."""

    pre: StateSet
    post: StateSet


def goal(pre: Iterable[int], post: Iterable[int]) -> AttackGoal:
    return AttackGoal(frozenset(pre), frozenset(post))


@dataclass(frozen=True)
class Base:
    goal: AttackGoal


@dataclass(frozen=True)
class AndNode:
    children: tuple["AttackTree", ...]
    goal: AttackGoal

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))


@dataclass(frozen=True)
class OrNode:
    children: tuple["AttackTree", ...]
    goal: AttackGoal

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))


AttackTree = Union[Base, AndNode, OrNode]


def attack(t: AttackTree) -> AttackGoal:
    """Project the goal stored at the root, regardless of node kind."""
    return t.goal


def _check_sets(ts: TransitionSystem, t: AttackTree) -> None:
    universe = ts.all_states()
    stack = [t]
    while stack:
        node = stack.pop()
        if not (node.goal.pre <= universe and node.goal.post <= universe):
            raise ValueError("attack tree references state ids outside the system")
        if isinstance(node, (AndNode, OrNode)):
            stack.extend(node.children)


def is_valid(ts: TransitionSystem, t: AttackTree) -> bool:
    """The recursive validity judgment.

    Base (s0, s1): every state in s0 has a one-step successor in s1.
    And-node: empty list needs pre <= post; a singleton child must be
    valid with exactly the node's goal; otherwise the head must be valid,
    start at the node's pre set, and the tail forms an and-node from the
    head's post set to the node's post set.
    Or-node: empty list needs pre <= post; a singleton child must be
    valid, cover the pre set and land inside the post set; otherwise the
    head handles part of the pre set and the tail covers the remainder
    (set difference) with the same post set.
    """
    _check_sets(ts, t)
    return _valid(ts, t)


def _valid(ts: TransitionSystem, t: AttackTree) -> bool:
    if isinstance(t, Base):
        pre, post = t.goal
        return all(any(y in post for y in ts.successors(x)) for x in pre)
    if isinstance(t, AndNode):
        children = t.children
        if not children:
            return t.goal.pre <= t.goal.post
        if len(children) == 1:
            return _valid(ts, children[0]) and attack(children[0]) == t.goal
        head, tail = children[0], children[1:]
        return (
            _valid(ts, head)
            and attack(head).pre == t.goal.pre
            and _valid(ts, AndNode(tail, AttackGoal(attack(head).post, t.goal.post)))
        )
    if isinstance(t, OrNode):
        children = t.children
        if not children:
            return t.goal.pre <= t.goal.post
        if len(children) == 1:
            child = children[0]
            return (
                _valid(ts, child)
                and attack(child).pre >= t.goal.pre
                and attack(child).post <= t.goal.post
            )
        head, tail = children[0], children[1:]
        return (
            _valid(ts, head)
            and attack(head).pre <= t.goal.pre
            and attack(head).post <= t.goal.post
            and _valid(ts, OrNode(tail, AttackGoal(t.goal.pre - attack(head).pre, t.goal.post)))
        )
    raise TypeError(f"not an attack tree: {t!r}")


# Three-valued search results for the bounded refinement decision.
_YES, _NO, _UNKNOWN = 1, 0, -1

_INF = float("inf")


def _min_leaf_expansions(xs: tuple, ys: tuple) -> float:
    """Fewest leaf-replacement steps turning and-children ``xs`` into ``ys``.

    A step replaces one base leaf by a nonempty block; non-leaf children
    must match verbatim.  Returns inf when no partition of ``ys`` into
    per-child blocks exists.
    """
    memo: dict[tuple[int, int], float] = {}

    def go(i: int, j: int) -> float:
        if i == len(xs):
            return 0.0 if j == len(ys) else _INF
        if j == len(ys):
            return _INF
        key = (i, j)
        if key in memo:
            return memo[key]
        best = _INF
        if xs[i] == ys[j]:
            best = go(i + 1, j + 1)
        if isinstance(xs[i], Base):
            for j2 in range(j + 1, len(ys) + 1):
                sub = go(i + 1, j2)
                if sub + 1 < best:
                    best = sub + 1
        memo[key] = best
        return best

    return go(0, 0)


class _RefinementSearch:
    """Bounded search for the refinement relation with memoization.

    Yes/no verdicts are depth-independent (a no is only recorded when the
    subtree was decided without hitting the bound), so they are cached on
    (abstract, concrete) pairs; inconclusive results are never cached.
    """

    def __init__(self):
        self.yes: set[tuple[AttackTree, AttackTree]] = set()
        self.no: set[tuple[AttackTree, AttackTree]] = set()

    def run(self, a: AttackTree, c: AttackTree, budget: int) -> int:
        key = (a, c)
        if key in self.yes:
            return _YES
        if key in self.no:
            return _NO
        if a == c:
            self.yes.add(key)
            return _YES
        if attack(a) != attack(c):
            # Every rule preserves the root goal.
            self.no.add(key)
            return _NO
        if isinstance(c, OrNode):
            # Only the or-introduction rule can produce an or-node.
            if not c.children:
                self.no.add(key)
                return _NO
            if budget <= 0:
                return _UNKNOWN
            exhausted = False
            for child in c.children:
                sub = self.run(a, child, budget - 1)
                if sub == _NO:
                    self.no.add(key)
                    return _NO
                if sub == _UNKNOWN:
                    exhausted = True
            if exhausted:
                return _UNKNOWN
            self.yes.add(key)
            return _YES
        if isinstance(a, AndNode) and isinstance(c, AndNode):
            # Chains of single-leaf replacements amount to partitioning the
            # concrete child list into one block per abstract child; the
            # replacement lists are drawn from the concrete tree itself.
            steps = _min_leaf_expansions(a.children, c.children)
            if steps == _INF:
                self.no.add(key)
                return _NO
            if steps <= budget:
                self.yes.add(key)
                return _YES
            return _UNKNOWN
        # No rule rewrites a base leaf or or-node in place into a
        # different base/and shape.
        self.no.add(key)
        return _NO


def refines_to(abstract: AttackTree, concrete: AttackTree, depth: int = DEFAULT_REFINE_DEPTH) -> bool:
    """Decide the refinement relation by bounded search.

    ``depth`` limits the number of rule applications along one derivation
    path.  Raises :class:`DepthExhausted` when the bound was hit without a
    verdict; a plain False is definitive.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    result = _RefinementSearch().run(abstract, concrete, depth)
    if result == _UNKNOWN:
        raise DepthExhausted(depth)
    return result == _YES


def refines_to_valid(
    abstract: AttackTree,
    concrete: AttackTree,
    ts: TransitionSystem,
    depth: int = DEFAULT_REFINE_DEPTH,
) -> bool:
    """Refinement into a valid tree: the conjunction of the two judgments."""
    if not is_valid(ts, concrete):
        return False
    return refines_to(abstract, concrete, depth)


def has_valid_refinement(
    t: AttackTree,
    ts: TransitionSystem,
    depth: int = DEFAULT_REFINE_DEPTH,
) -> Optional[AttackTree]:
    """Search for a valid tree the given one refines to.

    Strategy: a valid tree refines to itself; an and-node can have each
    non-valid base leaf replaced by a synthesized reachability witness
    for that leaf's goal (one leaf-replacement step each), which is the
    only shape of refinement that can repair validity -- or-wrapping a
    tree never makes it valid, and non-leaf children cannot be rewritten
    in place.  Returns None when no valid refinement exists; raises
    :class:`DepthExhausted` only when the confirming refinement check hit
    the bound.
    """
    from .adequacy import synthesize  # cycle: adequacy builds on this module

    if is_valid(ts, t):
        return t
    if not isinstance(t, AndNode):
        # Refinements of base leaves and or-nodes are or-nestings over
        # the tree itself; their validity always reduces to the validity
        # of the original, which just failed.
        return None
    replaced: list[AttackTree] = []
    for child in t.children:
        if _valid(ts, child):
            replaced.append(child)
            continue
        if not isinstance(child, Base):
            # Only top-level base leaves can be rewritten by refinement.
            return None
        pre, post = child.goal
        witness = synthesize(ts, pre, post)
        if witness is None:
            # Some pre-state cannot reach the post set at all, so no
            # valid subtree with this goal exists.
            return None
        replaced.append(witness)
    candidate = AndNode(tuple(replaced), t.goal)
    if not is_valid(ts, candidate):
        # The goals of the children do not chain to the node's goal;
        # refinement preserves every goal, so nothing can repair this.
        return None
    if not refines_to(t, candidate, depth):  # raises DepthExhausted at the bound
        raise EngineInconsistency("synthesized refinement not derivable")
    return candidate
