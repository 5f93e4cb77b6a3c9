"""Randomized response on a categorical attribute, with on-line category growth.

Known categories are randomized record by record with a fixed bistochastic
matrix (row ``u`` of the matrix is the output distribution for true category
``u``).  When an unforeseen category shows up, the matrix is augmented and
the newcomer is T-mixed with an existing category ``j``; individuals already
published as ``j`` are re-randomized so that the published categories stay
distributed according to the updated matrix.
"""
from __future__ import annotations

from typing import Hashable, Sequence

from .errors import AlreadyKnown, DuplicateId, InvalidLambda, ShapeError, UnknownCategory
from .events import OutputEvent
from .matrix import TransitionMatrix, TTransform
from .rng import Rng

Label = Hashable


class CategorySpace:
    def __init__(self, labels: Sequence[Label]):
        self.labels: list[Label] = []
        self.index: dict[Label, int] = {}
        for label in labels:
            self.add(label)

    def add(self, label: Label) -> int:
        if label in self.index:
            raise AlreadyKnown(f"category {label!r} already exists")
        self.index[label] = len(self.labels)
        self.labels.append(label)
        return self.index[label]

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label) -> bool:
        return label in self.index


class CategoricalStream:
    def __init__(
        self,
        labels: Sequence[Label],
        matrix: TransitionMatrix,
        rng: Rng,
        attr: str | None = None,
        on_unknown: str = "expand",
        expand_lambda: float = 0.5,
        expand_transforms: int = 1,
        expand_target: Label | None = None,
        record: bool = False,
    ):
        self.space = CategorySpace(labels)
        if matrix.r != len(self.space):
            raise ShapeError(f"matrix is {matrix.r}x{matrix.r} but {len(self.space)} categories declared")
        matrix.validate()
        if on_unknown not in ("expand", "reject"):
            raise ValueError(f"on_unknown must be 'expand' or 'reject', got {on_unknown!r}")
        if not 0.0 < expand_lambda < 1.0:
            raise InvalidLambda(f"expansion lambda must lie strictly inside (0, 1), got {expand_lambda!r}")
        self.matrix = matrix.copy()
        self.rng = rng
        self.attr = attr
        self.on_unknown = on_unknown
        self.expand_lambda = expand_lambda
        self.expand_transforms = expand_transforms
        self.expand_target = expand_target
        # latest protected category per id; history lives in the event log
        self.released: dict[str, Label] = {}
        self.t = 0
        self.history: list[list[object]] | None = [] if record else None

    def current_beta(self) -> float:
        return self.matrix.entropy_report().beta

    def randomize_record(self, id: str, true_category: Label, _ops: list | None = None) -> OutputEvent:
        if id in self.released:
            raise DuplicateId(f"duplicate id {id!r}")
        u = self.space.index.get(true_category)
        if u is None:
            raise UnknownCategory(f"unknown category {true_category!r}")
        v = self.matrix.sample_category(u, self.rng)
        label = self.space.labels[v]
        self.released[id] = label
        self.t += 1
        if self.history is not None:
            self.history.append(_ops or [])
        return OutputEvent("release", self.t, id, label, self.current_beta(), attr=self.attr)

    def ingest(self, id: str, category: Label) -> list[OutputEvent]:
        """Randomize one record, expanding the category space first when allowed."""
        if id in self.released:
            raise DuplicateId(f"duplicate id {id!r}")
        if category in self.space:
            return [self.randomize_record(id, category)]
        if self.on_unknown == "reject":
            raise UnknownCategory(f"unknown category {category!r}")
        ops: list[object] = []
        events = self.expand_category(category, self.expand_target, self.expand_lambda, trigger_id=id, _ops=ops)
        for _ in range(self.expand_transforms - 1):
            others = [lab for lab in self.space.labels if lab != category]
            other = others[self.rng.next_index(len(others))]
            events = _merge_updates(
                events, self.mix_categories(category, other, self.expand_lambda, trigger_id=id, _ops=ops)
            )
        events.append(self.randomize_record(id, category, _ops=ops))
        beta = events[-1].beta
        for e in events:
            e.beta = beta
        return events

    def expand_category(
        self,
        new_label: Label,
        target: Label | None,
        lam: float,
        trigger_id: str | None = None,
        _ops: list | None = None,
    ) -> list[OutputEvent]:
        """Add ``new_label`` and T-mix it with ``target`` (random existing label if None).

        Returns one update per previously released individual whose
        published category moved to ``new_label``.
        """
        if new_label in self.space:
            raise AlreadyKnown(f"category {new_label!r} already exists")
        if not 0.0 < lam < 1.0:
            raise InvalidLambda(f"expansion lambda must lie strictly inside (0, 1), got {lam!r}")
        if target is None:
            target = self.space.labels[self.rng.next_index(len(self.space))]
        elif target not in self.space:
            raise UnknownCategory(f"expansion target {target!r} is not a known category")
        self.space.add(new_label)
        self.matrix.augment()
        if _ops is not None:
            _ops.append("augment")
        return self.mix_categories(target, new_label, lam, trigger_id=trigger_id, _ops=_ops)

    def mix_categories(
        self,
        a: Label,
        b: Label,
        lam: float,
        trigger_id: str | None = None,
        _ops: list | None = None,
    ) -> list[OutputEvent]:
        """T-mix categories ``a`` and ``b`` and re-randomize their published members.

        Each individual published as ``a`` moves to ``b`` with probability
        ``1 - lam`` and vice versa, which matches the column mixing applied
        to the matrix.
        """
        ia, ib = self.space.index[a], self.space.index[b]
        t = TTransform(ia, ib, lam)
        self.matrix.apply_t(t)
        if _ops is not None:
            _ops.append(t)
        stay = lam
        events = []
        beta = self.current_beta()
        for id, cat in self.released.items():
            if cat == a:
                dest = b
            elif cat == b:
                dest = a
            else:
                continue
            if self.rng.next_unit() >= stay:
                self.released[id] = dest
                events.append(
                    OutputEvent("update", self.t + 1, id, dest, beta, partner_id=trigger_id, attr=self.attr)
                )
        return events


def _merge_updates(first: list[OutputEvent], second: list[OutputEvent]) -> list[OutputEvent]:
    """Keep one update per id, carrying its latest category, in first-touch order."""
    merged: dict[str, OutputEvent] = {e.id: e for e in first}
    for e in second:
        if e.id in merged:
            merged[e.id].value = e.value
        else:
            merged[e.id] = e
    return list(merged.values())
