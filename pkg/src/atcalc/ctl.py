"""CTL operators computed as set-lattice fixpoints over a finite
Kripke structure.

A formula denotes a set of states, so atoms are state sets and the
boolean connectives are set operations restricted to the structure's
states.  Temporal operators are least/greatest fixpoints of the
one-step predecessor transformers; iteration converges in at most
``|states|`` rounds because the transformers are monotone on a finite
lattice.

Deadlock convention: a state with no successors inside the structure
satisfies ``AX f`` vacuously and never satisfies ``EX f``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .kripke import KripkeStructure, StateSet, holds


class CtlFormula:
    """Base class for formula nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Atom(CtlFormula):
    states: StateSet


@dataclass(frozen=True)
class Not(CtlFormula):
    child: CtlFormula


@dataclass(frozen=True)
class And(CtlFormula):
    left: CtlFormula
    right: CtlFormula


@dataclass(frozen=True)
class Or(CtlFormula):
    left: CtlFormula
    right: CtlFormula


@dataclass(frozen=True)
class EX(CtlFormula):
    child: CtlFormula


@dataclass(frozen=True)
class AX(CtlFormula):
    child: CtlFormula


@dataclass(frozen=True)
class EF(CtlFormula):
    child: CtlFormula


@dataclass(frozen=True)
class AF(CtlFormula):
    child: CtlFormula


@dataclass(frozen=True)
class EG(CtlFormula):
    child: CtlFormula


@dataclass(frozen=True)
class AG(CtlFormula):
    child: CtlFormula


@dataclass(frozen=True)
class EU(CtlFormula):
    left: CtlFormula
    right: CtlFormula


def _pre_exists(k: KripkeStructure, target: StateSet) -> StateSet:
    """States with at least one in-structure successor in ``target``."""
    ts = k.system
    return frozenset(
        s for s in k.states if any(t in k.states and t in target for t in ts.successors(s))
    )


def _pre_forall(k: KripkeStructure, target: StateSet) -> StateSet:
    """States whose in-structure successors all lie in ``target``.

    Counts only successors inside ``k.states``; a state with none is
    included vacuously.
    """
    ts = k.system
    return frozenset(
        s for s in k.states if all(t not in k.states or t in target for t in ts.successors(s))
    )


def _lfp(step):
    z: StateSet = frozenset()
    while True:
        nxt = step(z)
        if nxt == z:
            return z
        z = nxt


def _gfp(step, top: StateSet):
    z = top
    while True:
        nxt = step(z)
        if nxt == z:
            return z
        z = nxt


def denote(k: KripkeStructure, f: CtlFormula) -> StateSet:
    """The set of states of ``k`` satisfying ``f``, always a subset of
    ``k.states``."""
    match f:
        case Atom(states):
            if not states <= k.system.all_states():
                raise ValueError("atom contains invalid state ids")
            return states & k.states
        case Not(child):
            return k.states - denote(k, child)
        case And(left, right):
            return denote(k, left) & denote(k, right)
        case Or(left, right):
            return denote(k, left) | denote(k, right)
        case EX(child):
            return _pre_exists(k, denote(k, child))
        case AX(child):
            return _pre_forall(k, denote(k, child))
        case EF(child):
            target = denote(k, child)
            return _lfp(lambda z: target | _pre_exists(k, z))
        case AF(child):
            target = denote(k, child)
            return _lfp(lambda z: target | _pre_forall(k, z))
        case EG(child):
            target = denote(k, child)
            return _gfp(lambda z: target & _pre_exists(k, z), k.states)
        case AG(child):
            target = denote(k, child)
            return _gfp(lambda z: target & _pre_forall(k, z), k.states)
        case EU(left, right):
            hold = denote(k, left)
            target = denote(k, right)
            return _lfp(lambda z: target | (hold & _pre_exists(k, z)))
        case _:
            raise TypeError(f"not a CTL formula: {f!r}")


def check(k: KripkeStructure, f: CtlFormula) -> bool:
    """Model checking judgment: every initial state satisfies ``f``."""
    return holds(k, denote(k, f))
