"""Batch command-line front-end wiring scenario files to the engine.

Every command prints exactly one canonical JSON report on standard
output and exits with 0 (property holds / tree valid / witness found),
1 (definitive negative), 2 (inconclusive: search depth or state bound
exhausted) or 3 (usage or parse error).  Identical invocations produce
byte-identical output.
"""

from __future__ import annotations

import os
import sys
from typing import Optional

import click

from . import adequacy as adequacy_mod
from . import attack_tree as at
from . import ctl
from .errors import (
    AtcalcError,
    BoundExceeded,
    DepthExhausted,
    EngineInconsistency,
    ScenarioError,
    SelfCheckFailed,
)
from .infrastructure import DEFAULT_EXPLORATION_BOUND
from .scenario_io import (
    LoadedScenario,
    adequacy_to_json,
    load_file,
    serialize,
    tree_to_json,
)

EXIT_HOLDS = 0
EXIT_FAILS = 1
EXIT_INCONCLUSIVE = 2
EXIT_ERROR = 3

_OUTCOME_CODES = {
    "holds": EXIT_HOLDS,
    "fails": EXIT_FAILS,
    "inconclusive": EXIT_INCONCLUSIVE,
    "error": EXIT_ERROR,
}

BOUND_ENV_VAR = "ATCALC_BOUND"


def default_bound() -> int:
    raw = os.environ.get(BOUND_ENV_VAR)
    if raw is None:
        return DEFAULT_EXPLORATION_BOUND
    try:
        value = int(raw)
    except ValueError:
        return DEFAULT_EXPLORATION_BOUND
    return value if value >= 1 else DEFAULT_EXPLORATION_BOUND


def _emit(command: str, target: dict, outcome: str, details: dict) -> int:
    code = _OUTCOME_CODES[outcome]
    report = {
        "command": command,
        "target": target,
        "outcome": outcome,
        "exit_code": code,
        "details": details,
    }
    sys.stdout.write(serialize(report))
    return code


def _error_details(e: Exception) -> dict:
    return {"error": type(e).__name__, "message": str(e)}


def _load(path: str, bound: Optional[int]) -> LoadedScenario:
    return load_file(path, bound if bound is not None else default_bound())


def _resolved_tree(loaded: LoadedScenario, name: str):
    if name not in loaded.trees:
        raise ScenarioError(f"tree {name!r} is not defined in the scenario")
    return loaded.trees[name]


def _resolved_set(loaded: LoadedScenario, name: str):
    if name not in loaded.sets:
        raise ScenarioError(f"state set {name!r} is not defined in the scenario")
    return loaded.sets[name]


_bound_option = click.option(
    "--bound",
    type=int,
    default=None,
    help=f"state-space bound (default {DEFAULT_EXPLORATION_BOUND}, env {BOUND_ENV_VAR})",
)


@click.group()
def main():
    """Attack-tree calculus: validity, refinement, model checking and
    witness synthesis over scenario files."""


@main.command()
@click.argument("scenario", type=click.Path())
@click.argument("tree_name")
@_bound_option
def check(scenario, tree_name, bound):
    """Decide validity of a named attack tree."""
    target = {"scenario": scenario, "tree": tree_name}
    try:
        loaded = _load(scenario, bound)
        tree = _resolved_tree(loaded, tree_name)
        valid = at.is_valid(loaded.system, tree)
    except BoundExceeded as e:
        sys.exit(_emit("check", target, "inconclusive", _error_details(e)))
    except (AtcalcError, OSError, ValueError) as e:
        sys.exit(_emit("check", target, "error", _error_details(e)))
    outcome = "holds" if valid else "fails"
    sys.exit(_emit("check", target, outcome, {"valid": valid}))


@main.command()
@click.argument("scenario", type=click.Path())
@click.argument("abstract_name")
@click.argument("concrete_name")
@click.option("--depth", type=int, default=at.DEFAULT_REFINE_DEPTH, show_default=True)
@_bound_option
def refine(scenario, abstract_name, concrete_name, depth, bound):
    """Decide whether one named tree refines to another."""
    target = {
        "scenario": scenario,
        "abstract": abstract_name,
        "concrete": concrete_name,
        "depth": depth,
    }
    try:
        loaded = _load(scenario, bound)
        abstract = _resolved_tree(loaded, abstract_name)
        concrete = _resolved_tree(loaded, concrete_name)
        result = at.refines_to(abstract, concrete, depth)
    except DepthExhausted as e:
        sys.exit(_emit("refine", target, "inconclusive", _error_details(e)))
    except BoundExceeded as e:
        sys.exit(_emit("refine", target, "inconclusive", _error_details(e)))
    except (AtcalcError, OSError, ValueError) as e:
        sys.exit(_emit("refine", target, "error", _error_details(e)))
    outcome = "holds" if result else "fails"
    sys.exit(_emit("refine", target, outcome, {"refines": result}))


@main.command()
@click.argument("scenario", type=click.Path())
@click.argument("formula_name")
@_bound_option
def mc(scenario, formula_name, bound):
    """Model-check a named CTL formula on the scenario's Kripke structure."""
    target = {"scenario": scenario, "formula": formula_name}
    try:
        loaded = _load(scenario, bound)
        if formula_name not in loaded.formulas:
            raise ScenarioError(f"formula {formula_name!r} is not defined in the scenario")
        formula = loaded.formulas[formula_name]
        satisfying = ctl.denote(loaded.kripke, formula)
        result = loaded.kripke.init <= satisfying
    except BoundExceeded as e:
        sys.exit(_emit("mc", target, "inconclusive", _error_details(e)))
    except (AtcalcError, OSError, ValueError) as e:
        sys.exit(_emit("mc", target, "error", _error_details(e)))
    outcome = "holds" if result else "fails"
    details = {
        "holds": result,
        "satisfying_states": len(satisfying),
        "states": len(loaded.kripke.states),
    }
    sys.exit(_emit("mc", target, outcome, details))


@main.command()
@click.argument("scenario", type=click.Path())
@click.argument("init_set")
@click.argument("goal_set")
@click.option("--out", type=click.Path(), default=None,
              help="write the input document extended with the witness tree")
@_bound_option
def synth(scenario, init_set, goal_set, out, bound):
    """Synthesize a valid attack tree witnessing reachability."""
    target = {"scenario": scenario, "init": init_set, "goal": goal_set}
    try:
        loaded = _load(scenario, bound)
        init = _resolved_set(loaded, init_set)
        goal = _resolved_set(loaded, goal_set)
        witness = adequacy_mod.synthesize(loaded.system, init, goal)
    except BoundExceeded as e:
        sys.exit(_emit("synth", target, "inconclusive", _error_details(e)))
    except (AtcalcError, OSError, ValueError) as e:
        sys.exit(_emit("synth", target, "error", _error_details(e)))
    if witness is None:
        sys.exit(_emit("synth", target, "fails", {"witness": None}))
    witness_json = tree_to_json(witness)
    if out:
        extended = loaded.doc.with_tree("witness", witness_json)
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(serialize(extended))
    sys.exit(_emit("synth", target, "holds", {"witness": witness_json}))


@main.command()
@click.argument("scenario", type=click.Path())
@click.argument("tree_name")
@click.option("--abstract", is_flag=True,
              help="weaken the antecedent to `has a valid refinement'")
@click.option("--depth", type=int, default=at.DEFAULT_REFINE_DEPTH, show_default=True)
@_bound_option
def adequacy(scenario, tree_name, abstract, depth, bound):
    """Check the validity-implies-reachability correspondence on one tree."""
    target = {"scenario": scenario, "tree": tree_name, "abstract": abstract}
    try:
        loaded = _load(scenario, bound)
        tree = _resolved_tree(loaded, tree_name)
        if abstract:
            report = adequacy_mod.check_abstract_correctness(loaded.system, tree, depth)
        else:
            report = adequacy_mod.check_correctness(loaded.system, tree)
    except DepthExhausted as e:
        sys.exit(_emit("adequacy", target, "inconclusive", _error_details(e)))
    except BoundExceeded as e:
        sys.exit(_emit("adequacy", target, "inconclusive", _error_details(e)))
    except (EngineInconsistency, SelfCheckFailed) as e:
        sys.exit(_emit("adequacy", target, "error", _error_details(e)))
    except (AtcalcError, OSError, ValueError) as e:
        sys.exit(_emit("adequacy", target, "error", _error_details(e)))
    sys.exit(_emit("adequacy", target, "holds", adequacy_to_json(report)))


@main.command()
@click.argument("scenario", type=click.Path())
@click.option("--stats", is_flag=True, help="include transition statistics")
@_bound_option
def explore(scenario, stats, bound):
    """Materialize the scenario's reachable state space."""
    target = {"scenario": scenario}
    try:
        loaded = _load(scenario, bound)
    except BoundExceeded as e:
        sys.exit(_emit("explore", target, "inconclusive", _error_details(e)))
    except (AtcalcError, OSError, ValueError) as e:
        sys.exit(_emit("explore", target, "error", _error_details(e)))
    details = {
        "states": len(loaded.kripke.states),
        "transitions": loaded.system.transition_count(),
        "init": len(loaded.kripke.init),
    }
    if stats:
        details["stats"] = _statistics(loaded)
    sys.exit(_emit("explore", target, "holds", details))


def _statistics(loaded: LoadedScenario) -> dict:
    ts = loaded.system
    out_degrees = [len(ts.successors(s)) for s in range(len(ts))]
    stats = {
        "max_out_degree": max(out_degrees, default=0),
        "deadlock_states": sum(1 for d in out_degrees if d == 0),
    }
    if loaded.infrastructure is not None:
        from .infrastructure import step

        by_kind: dict[str, int] = {}
        for sid in range(len(ts)):
            for action, _ in step(ts.payload(sid)):
                by_kind[action.kind] = by_kind.get(action.kind, 0) + 1
        stats["actions_by_kind"] = dict(sorted(by_kind.items()))
    return stats


def run_query(loaded: LoadedScenario, name: str) -> tuple[str, dict]:
    """Execute a query defined in the scenario's ``queries`` section.

    Returns (outcome, details) with the same semantics as the CLI
    commands; used programmatically and by the test suite.
    """
    if name not in loaded.queries:
        raise ScenarioError(f"query {name!r} is not defined in the scenario")
    q = loaded.queries[name]
    depth = q.depth if q.depth is not None else at.DEFAULT_REFINE_DEPTH
    if q.kind == "check-validity":
        valid = at.is_valid(loaded.system, loaded.trees[q.tree])
        return ("holds" if valid else "fails", {"valid": valid})
    if q.kind == "refine-check":
        try:
            result = at.refines_to(loaded.trees[q.abstract], loaded.trees[q.concrete], depth)
        except DepthExhausted as e:
            return ("inconclusive", _error_details(e))
        return ("holds" if result else "fails", {"refines": result})
    if q.kind == "mc":
        result = ctl.check(loaded.kripke, loaded.formulas[q.formula])
        return ("holds" if result else "fails", {"holds": result})
    if q.kind == "synth":
        witness = adequacy_mod.synthesize(loaded.system, q.init, q.goal)
        if witness is None:
            return ("fails", {"witness": None})
        return ("holds", {"witness": tree_to_json(witness)})
    if q.kind == "at-ef":
        report = adequacy_mod.check_correctness(loaded.system, loaded.trees[q.tree])
        return ("holds", adequacy_to_json(report))
    if q.kind == "atv-ef":
        try:
            report = adequacy_mod.check_abstract_correctness(loaded.system, loaded.trees[q.tree], depth)
        except DepthExhausted as e:
            return ("inconclusive", _error_details(e))
        return ("holds", adequacy_to_json(report))
    raise ScenarioError(f"unknown query kind: {q.kind!r}")


if __name__ == "__main__":
    main()
