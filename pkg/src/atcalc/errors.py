"""Exception hierarchy shared by the engine and the scenario front-end."""


class AtcalcError(Exception):
    """Base class for every error raised by this package."""


class BoundExceeded(AtcalcError):
    """State-space exploration hit the configured state bound.

    Signals that the instance is not desk-scale under the given bound;
    the partial exploration is discarded.
    """

    def __init__(self, bound: int):
        super().__init__(f"reachable state set exceeds bound {bound}")
        self.bound = bound


class DepthExhausted(AtcalcError):
    """Refinement search ran out of depth before reaching a verdict.

    Distinct from a definitive negative answer: the relation may still
    hold at a larger depth.
    """

    def __init__(self, depth: int):
        super().__init__(f"refinement search inconclusive at depth {depth}")
        self.depth = depth


class EngineInconsistency(AtcalcError):
    """A checked runtime correspondence between the calculus and the
    model-checker failed.  Never expected; indicates an engine defect."""


class SelfCheckFailed(AtcalcError):
    """A synthesized witness failed its mandatory validity self-check."""


class UnknownLocation(AtcalcError):
    """A policy or rule referenced a location absent from the graph."""

    def __init__(self, location: str):
        super().__init__(f"unknown location: {location!r}")
        self.location = location


class UnknownTransform(AtcalcError):
    """A payload transform name is not registered."""

    def __init__(self, name: str):
        super().__init__(f"unknown transform: {name!r}")
        self.name = name


class ScenarioError(AtcalcError):
    """Base class for scenario-document errors."""


class ScenarioSyntaxError(ScenarioError):
    """The document is not syntactically well-formed."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class SchemaViolation(ScenarioError):
    """The document parses but does not match the scenario schema."""

    def __init__(self, message: str, path: str):
        super().__init__(f"{message} (at {path})")
        self.path = path


class DuplicateName(ScenarioError):
    """Two definitions of the same kind share a name."""

    def __init__(self, name: str):
        super().__init__(f"duplicate name: {name!r}")
        self.name = name


class UnresolvedReference(ScenarioError):
    """A definition refers to a name that is not defined."""

    def __init__(self, name: str):
        super().__init__(f"unresolved reference: {name!r}")
        self.name = name


class ScenarioLoadError(ScenarioError):
    """The document is well-formed but cannot be materialized
    (bad state id, payload not in the system, inconsistent block)."""
