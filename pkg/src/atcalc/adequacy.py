"""Runtime correspondences between attack-tree validity and reachability.

A valid tree whose goal is (I, s) guarantees that the Kripke structure
closed over I satisfies EF s; conversely, whenever EF s holds there is a
constructively synthesizable valid tree with exactly that goal.  Both
directions are checked at runtime on every call: a violation is an
engine defect, never a user error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import ctl
from .attack_tree import (
    AndNode,
    AttackGoal,
    AttackTree,
    Base,
    DEFAULT_REFINE_DEPTH,
    OrNode,
    attack,
    has_valid_refinement,
    is_valid,
)
from .errors import EngineInconsistency, SelfCheckFailed
from .kripke import (
    KripkeStructure,
    StateSet,
    TransitionSystem,
    reach_close,
    shortest_path,
)


@dataclass(frozen=True)
class AdequacyReport:
    """One checked instance of the validity-implies-reachability law."""

    tree: AttackTree
    goal: AttackGoal
    kripke: KripkeStructure
    tree_valid: bool
    ef_holds: bool
    consistent: bool


def check_correctness(ts: TransitionSystem, t: AttackTree) -> AdequacyReport:
    """Check that validity of ``t`` implies EF of its goal.

    Builds the reachability closure of the goal's pre set, evaluates both
    sides, and raises :class:`EngineInconsistency` if the implication
    fails -- which no input should be able to cause.
    """
    goal = attack(t)
    k = reach_close(ts, goal.pre)
    tree_valid = is_valid(ts, t)
    ef_holds = ctl.check(k, ctl.EF(ctl.Atom(goal.post)))
    consistent = (not tree_valid) or ef_holds
    if not consistent:
        raise EngineInconsistency(
            f"valid tree with goal {goal} but EF fails -- engine defect"
        )
    return AdequacyReport(t, goal, k, tree_valid, ef_holds, consistent)


def check_abstract_correctness(
    ts: TransitionSystem,
    t: AttackTree,
    depth: int = DEFAULT_REFINE_DEPTH,
) -> AdequacyReport:
    """Like :func:`check_correctness` with the antecedent weakened to
    "has some valid refinement".

    Propagates :class:`~atcalc.errors.DepthExhausted` from the refinement
    search: an inconclusive antecedent cannot witness an inconsistency.
    """
    goal = attack(t)
    k = reach_close(ts, goal.pre)
    refined = has_valid_refinement(t, ts, depth)
    antecedent = refined is not None
    ef_holds = ctl.check(k, ctl.EF(ctl.Atom(goal.post)))
    consistent = (not antecedent) or ef_holds
    if not consistent:
        raise EngineInconsistency(
            f"refinable tree with goal {goal} but EF fails -- engine defect"
        )
    return AdequacyReport(t, goal, k, antecedent, ef_holds, consistent)


def synthesize(ts: TransitionSystem, init: StateSet, target: StateSet) -> Optional[AttackTree]:
    """Synthesize a valid attack tree with goal (init, target), or None.

    Returns a tree exactly when the closure of ``init`` satisfies
    EF ``target``.  Construction: one and-chain of single-step base
    attacks per initial state, following a BFS-shortest path; the chains
    are joined under an or-node whose branches use singleton pre sets so
    the or-recursion's set difference discharges one branch at a time.
    The final link of each chain targets the full ``target`` set so the
    singleton and-case (which demands goal equality) closes.

    The returned tree is re-checked with the validity judgment before it
    is handed out; a failure raises :class:`SelfCheckFailed`.
    """
    init = frozenset(init)
    target = frozenset(target)
    if not init:
        raise ValueError("initial state set must be nonempty")
    k = reach_close(ts, init)
    if not ctl.check(k, ctl.EF(ctl.Atom(target))):
        return None
    branches: list[AttackTree] = []
    for start in sorted(init):
        path = shortest_path(ts, start, target)
        if path is None:  # EF held, so every initial state has a path
            raise SelfCheckFailed(f"no path from state {start} despite EF")
        branch_goal = AttackGoal(frozenset({start}), target)
        if len(path) == 1:
            branches.append(AndNode((), branch_goal))
            continue
        links = [
            Base(AttackGoal(frozenset({path[i]}), frozenset({path[i + 1]})))
            for i in range(len(path) - 2)
        ]
        links.append(Base(AttackGoal(frozenset({path[-2]}), target)))
        branches.append(AndNode(tuple(links), branch_goal))
    if len(branches) == 1:
        tree: AttackTree = branches[0]
    else:
        tree = OrNode(tuple(branches), AttackGoal(init, target))
    if attack(tree) != AttackGoal(init, target) or not is_valid(ts, tree):
        raise SelfCheckFailed("synthesized witness failed validity self-check")
    return tree
