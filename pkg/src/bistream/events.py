from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Union

EventKind = Literal["release", "update"]
Value = Union[float, str]


@dataclass
class OutputEvent:
    """One line of the protected stream.

    ``release`` publishes a new individual's protected value; ``update``
    corrects an already released individual after it was mixed again.
    ``beta`` is the stream's guarantee after the arrival that produced it.
    """

    kind: EventKind
    t: int
    id: str
    value: Value
    beta: float
    partner_id: str | None = None
    attr: str | None = None
