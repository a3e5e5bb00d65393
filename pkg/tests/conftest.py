import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cokb.engine import Engine

GOLDEN = Path(__file__).parent / "golden"

# The bird/flight narrative: setup, an accepted instantiation, a rejected
# generalization, its corrective re-submission, and a definition that
# triggers term cloning.
SCENARIO = [
    ("pm", "register u1;"),
    ("pm", "register u2;"),
    ("pm", "register u3;"),
    ("pm", "source wn;"),
    ("wn", "pm#thing subtype: wn#bird;"),
    ("pm", "pm#process subtype: pm#flight;"),
    ("u1", "u1#`every wn#bird can be agent of a flight´;"),
    ("u2", "wn#bird instance: Tweety;"),
    ("u2", "u2#`Tweety can be agent of a flight with duration at least 2.5 hour´;"),
    ("u2", "u2#`75% of wn#bird can be agent of a flight´;"),
    ("u2", "u2#`u1#s1 has for corrective_generalization u2#`75% of wn#bird can be agent of a flight´´;"),
    ("u1", "u1#`any wn#bird is pm#agent of a pm#flight´;"),
]


def format_outcome(outcome) -> str:
    parts = [outcome.status.value, outcome.reason.value if outcome.reason else "-"]
    parts.append("conflicts=" + (",".join(sorted(c.render() for c in outcome.conflicts)) or "-"))
    parts.append("created=" + (",".join(i.render() for i in outcome.created) or "-"))
    if outcome.clone_report:
        r = outcome.clone_report
        parts.append("clones=" + (",".join(
            f"{c.new_term.render()}:{c.for_user}" for c in r.clones) or "-"))
        parts.append("rewritten=" + (",".join(
            i.render() for i in r.rewritten_statements) or "-"))
    return " ".join(parts)


def run_scenario(engine: Engine) -> list[str]:
    lines = []
    for i, (agent, command) in enumerate(SCENARIO, start=1):
        response = engine.execute(agent, command,
                                  timestamp=f"2026-01-05T10:00:{i:02d}Z")
        lines.append(f"{i:02d} {format_outcome(response.outcome)}")
    return lines


@pytest.fixture
def engine() -> Engine:
    return Engine()


@pytest.fixture
def seeded() -> Engine:
    """Engine with users u1..u3, the wn vocabulary and the demo terms."""
    e = Engine()
    for agent, cmd in SCENARIO[:6]:
        outcome = e.execute(agent, cmd).outcome
        assert outcome.accepted, cmd
    return e


@pytest.fixture
def scenario_engine() -> Engine:
    e = Engine()
    run_scenario(e)
    return e
