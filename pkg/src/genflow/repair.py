"""The parse-repair loop shared by every structured-output producer.

A producer emits a candidate document; a validator either accepts it or
returns the violation list. On violation the producer is re-invoked with
that list as feedback, up to the repair budget. Each repair is reported
through the optional event hook so transcripts record every attempt.
"""

from __future__ import annotations

from typing import Any, Callable, TypeVar

from .errors import ParseExhausted

_T = TypeVar("_T")

Producer = Callable[[int, list | None], Any]
Validator = Callable[[Any], Any]


def repair_loop(
    produce: Producer,
    validate: Validator,
    repair_budget: int,
    *,
    on_event: Callable[..., None] | None = None,
    role: str = "director_llm",
) -> Any:
    """Run produce/validate up to repair_budget+1 times; return the first valid result.

    Raises ParseExhausted carrying the last violation list when every
    attempt stayed invalid.
    """
    feedback: list | None = None
    for attempt in range(repair_budget + 1):
        candidate = produce(attempt, feedback)
        result = validate(candidate)
        if not isinstance(result, list):
            return result
        feedback = result
        if attempt < repair_budget and on_event is not None:
            on_event(
                kind="repair",
                agent_role=role,
                attempt=attempt,
                payload={
                    "attempt": attempt,
                    "violations": [v.to_dict() for v in result],
                },
            )
    raise ParseExhausted(repair_budget + 1, feedback or [])
