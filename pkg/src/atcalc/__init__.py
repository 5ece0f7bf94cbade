"""Executable attack-tree calculus over explicit-state Kripke structures.

The package decides validity of attack trees, checks tree refinements,
model-checks CTL properties on finite state spaces, and synthesizes
valid attack trees as reachability witnesses.  An infrastructure model
with actors, location policies and label-carrying data instantiates the
generic state machinery for privacy-compliance analyses.
"""

from .adequacy import (
    AdequacyReport,
    check_abstract_correctness,
    check_correctness,
    synthesize,
)
from .attack_tree import (
    AndNode,
    AttackGoal,
    AttackTree,
    Base,
    OrNode,
    attack,
    goal,
    has_valid_refinement,
    is_valid,
    refines_to,
    refines_to_valid,
)
from .ctl import AF, AG, AX, And, Atom, CtlFormula, EF, EG, EU, EX, Not, Or, check, denote
from .errors import (
    AtcalcError,
    BoundExceeded,
    DepthExhausted,
    DuplicateName,
    EngineInconsistency,
    ScenarioError,
    ScenarioLoadError,
    ScenarioSyntaxError,
    SchemaViolation,
    SelfCheckFailed,
    UnknownLocation,
    UnknownTransform,
    UnresolvedReference,
)
from .kripke import (
    KripkeStructure,
    StateId,
    StateSet,
    TransitionSystem,
    build_system,
    holds,
    reach_close,
    shortest_path,
)

__version__ = "0.1.0"

__all__ = [
    "AdequacyReport",
    "AndNode",
    "AttackGoal",
    "AttackTree",
    "Base",
    "OrNode",
    "attack",
    "goal",
    "has_valid_refinement",
    "is_valid",
    "refines_to",
    "refines_to_valid",
    "check_abstract_correctness",
    "check_correctness",
    "synthesize",
    "AF",
    "AG",
    "AX",
    "And",
    "Atom",
    "CtlFormula",
    "EF",
    "EG",
    "EU",
    "EX",
    "Not",
    "Or",
    "check",
    "denote",
    "KripkeStructure",
    "StateId",
    "StateSet",
    "TransitionSystem",
    "build_system",
    "holds",
    "reach_close",
    "shortest_path",
    "AtcalcError",
    "BoundExceeded",
    "DepthExhausted",
    "DuplicateName",
    "EngineInconsistency",
    "ScenarioError",
    "ScenarioLoadError",
    "ScenarioSyntaxError",
    "SchemaViolation",
    "SelfCheckFailed",
    "UnknownLocation",
    "UnknownTransform",
    "UnresolvedReference",
    "__version__",
]
