"""Event spaces and exact-rational correlation vectors.

A correlation vector lists the probabilities p_i of n events together with
the joint probabilities p_ij for a chosen set S of index pairs.  Coordinates
are flattened as the n singles in event order followed by the pairs of S in
lexicographic (i, j) order.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

logger = logging.getLogger(__name__)

ROLES = ("outcome", "setting")
SIDES = ("left", "right", "none")
LEVELS = ("range", "monotone")

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


class VectorFormatError(ValueError):
    """Raised when a correlation-vector document cannot be parsed."""


def parse_rational(text) -> Fraction:
    """Parse ``"num/den"`` or an integer string into an exact Fraction.

    Decimal literals and JSON floats are rejected so that no binary rounding
    can sneak into the data.
    """
    if isinstance(text, bool):
        raise VectorFormatError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, Fraction):
        return text
    if not isinstance(text, str):
        raise VectorFormatError(f"rational must be a string like '3/32', got {text!r}")
    m = _RATIONAL_RE.match(text)
    if m is None:
        raise VectorFormatError(f"not an exact rational literal: {text!r}")
    num, den = m.group(1), m.group(2)
    if den is not None and int(den) == 0:
        raise VectorFormatError(f"zero denominator in {text!r}")
    return Fraction(int(num), int(den) if den is not None else 1)


def format_rational(x: Fraction) -> str:
    return str(Fraction(x))


@dataclass(frozen=True)
class Event:
    label: str
    role: str = "outcome"
    side: str = "none"
    # label of the setting event that selects this outcome's measurement
    setting: str | None = None

    def __post_init__(self):
        if not self.label:
            raise ValueError("event labels must be nonempty")
        if "&" in self.label:
            raise ValueError(f"event label may not contain '&': {self.label!r}")
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}, got {self.role!r}")
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}, got {self.side!r}")


@dataclass(frozen=True)
class EventSpace:
    events: tuple[Event, ...]

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if not self.events:
            raise ValueError("an event space needs at least one event")
        labels = [e.label for e in self.events]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate event labels in {labels}")
        for e in self.events:
            if e.setting is not None and e.setting not in labels:
                raise ValueError(f"event {e.label!r} refers to unknown setting {e.setting!r}")

    @classmethod
    def from_labels(cls, labels: Iterable[str]) -> "EventSpace":
        return cls(tuple(Event(label) for label in labels))

    def __len__(self) -> int:
        return len(self.events)

    @property
    def n(self) -> int:
        return len(self.events)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(e.label for e in self.events)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown event {label!r}") from None

    def outcomes(self) -> list[int]:
        return [i for i, e in enumerate(self.events) if e.role == "outcome"]

    def settings(self) -> list[int]:
        return [i for i, e in enumerate(self.events) if e.role == "setting"]

    def setting_of(self, label: str) -> str | None:
        """Setting event associated with an outcome event.

        Uses the explicit ``setting`` field when present, otherwise falls
        back to a setting event whose label is the lower-cased outcome label
        (``A'`` pairs with ``a'``).
        """
        ev = self.events[self.index(label)]
        if ev.setting is not None:
            return ev.setting
        for other in self.events:
            if other.role == "setting" and other.label == ev.label.lower() and other.label != ev.label:
                return other.label
        return None


@dataclass(frozen=True)
class PairSet:
    """Sorted set of 0-based index pairs (i, j) with i < j."""

    n: int
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        normalized = set()
        for i, j in self.pairs:
            if i == j:
                raise ValueError(f"pair ({i}, {j}) is not a pair of distinct events")
            i, j = min(i, j), max(i, j)
            if i < 0 or j >= self.n:
                raise ValueError(f"pair ({i}, {j}) out of range for {self.n} events")
            normalized.add((i, j))
        object.__setattr__(self, "pairs", tuple(sorted(normalized)))

    @classmethod
    def complete(cls, n: int) -> "PairSet":
        return cls(n, tuple(combinations(range(n), 2)))

    @classmethod
    def empty(cls, n: int) -> "PairSet":
        return cls(n, ())

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __contains__(self, pair) -> bool:
        i, j = pair
        return (min(i, j), max(i, j)) in self.pairs


def coordinate_labels(space: EventSpace, pair_set: PairSet) -> list[str]:
    labels = space.labels
    return list(labels) + [f"{labels[i]}&{labels[j]}" for i, j in pair_set]


@dataclass(frozen=True)
class CorrelationVector:
    space: EventSpace
    pair_set: PairSet
    singles: tuple[Fraction, ...]
    pairs: tuple[Fraction, ...]  # aligned with pair_set.pairs

    def __post_init__(self):
        object.__setattr__(self, "singles", tuple(Fraction(x) for x in self.singles))
        object.__setattr__(self, "pairs", tuple(Fraction(x) for x in self.pairs))
        if self.pair_set.n != self.space.n:
            raise ValueError("pair set and event space disagree on the number of events")
        if len(self.singles) != self.space.n:
            raise ValueError(f"expected {self.space.n} single probabilities, got {len(self.singles)}")
        if len(self.pairs) != len(self.pair_set):
            raise ValueError(f"expected {len(self.pair_set)} pair probabilities, got {len(self.pairs)}")

    @classmethod
    def from_mappings(
        cls,
        space: EventSpace,
        singles: Mapping[str, Fraction],
        pairs: Mapping[tuple[str, str], Fraction],
    ) -> "CorrelationVector":
        """Build from label-keyed maps; the pair set is the set of keys of ``pairs``."""
        missing = [label for label in space.labels if label not in singles]
        if missing:
            raise ValueError(f"missing single probabilities for {missing}")
        values = {}
        for (l1, l2), value in pairs.items():
            i, j = space.index(l1), space.index(l2)
            key = (min(i, j), max(i, j))
            if key in values:
                raise ValueError(f"pair {l1}&{l2} given twice")
            values[key] = Fraction(value)
        ps = PairSet(space.n, tuple(values))
        return cls(
            space,
            ps,
            tuple(Fraction(singles[label]) for label in space.labels),
            tuple(values[p] for p in ps.pairs),
        )

    @property
    def n(self) -> int:
        return self.space.n

    def single(self, label: str) -> Fraction:
        return self.singles[self.space.index(label)]

    def pair(self, l1: str, l2: str) -> Fraction:
        i, j = self.space.index(l1), self.space.index(l2)
        key = (min(i, j), max(i, j))
        try:
            return self.pairs[self.pair_set.pairs.index(key)]
        except ValueError:
            raise KeyError(f"pair {l1}&{l2} is not in the pair set") from None

    def has_pair(self, l1: str, l2: str) -> bool:
        return (self.space.index(l1), self.space.index(l2)) in self.pair_set

    def coordinate_labels(self) -> list[str]:
        return coordinate_labels(self.space, self.pair_set)


@dataclass
class Violation:
    constraint: str
    coordinate: str
    detail: str


@dataclass
class ValidationReport:
    level: str
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def messages(self) -> list[str]:
        return [f"{v.constraint} violated at {v.coordinate}: {v.detail}" for v in self.violations]


def validate(v: CorrelationVector, level: str = "range") -> ValidationReport:
    """Check the elementary constraints of a correlation vector.

    ``range`` checks 0 <= p_i <= 1 and p_ij >= 0.  ``monotone`` additionally
    checks p_ij <= min(p_i, p_j).  Violations are reported, never raised.
    """
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}, got {level!r}")
    report = ValidationReport(level)
    labels = v.space.labels
    for label, p in zip(labels, v.singles):
        if not 0 <= p <= 1:
            report.violations.append(Violation("range", label, f"p = {p} not in [0, 1]"))
    for (i, j), p in zip(v.pair_set, v.pairs):
        name = f"{labels[i]}&{labels[j]}"
        if p < 0:
            report.violations.append(Violation("range", name, f"p = {p} < 0"))
        if p > 1:
            report.violations.append(Violation("range", name, f"p = {p} > 1"))
        if level == "monotone":
            bound = min(v.singles[i], v.singles[j])
            if p > bound:
                report.violations.append(
                    Violation("monotone", name, f"p = {p} > min(p_i, p_j) = {bound}")
                )
    return report


def flatten(v: CorrelationVector) -> list[Fraction]:
    """Singles in event order, then pairs in lexicographic (i, j) order."""
    return list(v.singles) + list(v.pairs)


def unflatten(space: EventSpace, pair_set: PairSet, values: Sequence[Fraction]) -> CorrelationVector:
    n = space.n
    if len(values) != n + len(pair_set):
        raise ValueError(f"expected {n + len(pair_set)} coordinates, got {len(values)}")
    return CorrelationVector(space, pair_set, tuple(values[:n]), tuple(values[n:]))


def restrict(v: CorrelationVector, keep: Iterable[str]) -> CorrelationVector:
    """Sub-vector over the events in ``keep`` (kept in their original order)."""
    keep = set(keep)
    if not keep:
        raise ValueError("cannot restrict to an empty set of events")
    unknown = keep - set(v.space.labels)
    if unknown:
        raise KeyError(f"unknown events {sorted(unknown)}")
    old = [i for i, label in enumerate(v.space.labels) if label in keep]
    new_index = {i: k for k, i in enumerate(old)}
    kept_labels = {v.space.labels[i] for i in old}
    events = []
    for i in old:
        ev = v.space.events[i]
        # drop a setting association that would dangle
        setting = ev.setting if ev.setting in kept_labels else None
        events.append(Event(ev.label, ev.role, ev.side, setting))
    space = EventSpace(tuple(events))
    pairs, values = [], []
    for (i, j), p in zip(v.pair_set, v.pairs):
        if i in new_index and j in new_index:
            pairs.append((new_index[i], new_index[j]))
            values.append(p)
    pair_set = PairSet(space.n, tuple(pairs))
    by_pair = dict(zip(pairs, values))
    return CorrelationVector(
        space, pair_set, tuple(v.singles[i] for i in old), tuple(by_pair[p] for p in pair_set.pairs)
    )


def project_pairs(v: CorrelationVector, keep: Iterable[tuple[str, str]]) -> CorrelationVector:
    """Same singles, pair set cut down to the labelled pairs in ``keep``."""
    pairs = {(l1, l2): v.pair(l1, l2) for l1, l2 in keep}
    singles = dict(zip(v.space.labels, v.singles))
    return CorrelationVector.from_mappings(v.space, singles, pairs)


def bell_restriction(v: CorrelationVector) -> CorrelationVector:
    """Absolute 4-outcome vector over the cross-side outcome pairs only."""
    setting_map = default_setting_map(v.space)
    sub = restrict(v, setting_map)
    cross = default_pair_settings(v.space, setting_map)
    return project_pairs(sub, cross)


def default_setting_map(space: EventSpace) -> dict[str, str]:
    mapping = {}
    for i in space.outcomes():
        label = space.labels[i]
        setting = space.setting_of(label)
        if setting is not None:
            mapping[label] = setting
    return mapping


def default_pair_settings(space: EventSpace, setting_map: Mapping[str, str]) -> dict[tuple[str, str], tuple[str, str]]:
    """Cross-side outcome pairs (left outcome, right outcome) with their settings."""
    left = [e.label for e in space.events if e.role == "outcome" and e.side == "left" and e.label in setting_map]
    right = [e.label for e in space.events if e.role == "outcome" and e.side == "right" and e.label in setting_map]
    return {(x, y): (setting_map[x], setting_map[y]) for x in left for y in right}


def conditionalize(
    v: CorrelationVector,
    outcome_setting_map: Mapping[str, str] | None = None,
    pair_settings: Mapping[tuple[str, str], tuple[str, str]] | None = None,
) -> CorrelationVector:
    """Pass from absolute to setting-conditional probabilities.

    Singles become p(X|x) = p(X & x) / p(x) and pairs become
    p(X & Y | x & y) = p(X & Y) / p(x & y).  The result lives on the outcome
    events only, with the given outcome pairs as its pair set.  When the
    pair (X, x) is not a coordinate, p(X & x) is taken to be p(X), i.e. the
    outcome X only occurs when its own setting x is selected.
    """
    if outcome_setting_map is None:
        outcome_setting_map = default_setting_map(v.space)
    if pair_settings is None:
        pair_settings = default_pair_settings(v.space, outcome_setting_map)
    if not outcome_setting_map:
        raise ValueError("no outcome is associated with a setting")

    outcomes = [label for label in v.space.labels if label in outcome_setting_map]
    singles = {}
    for x in outcomes:
        s = outcome_setting_map[x]
        denom = v.single(s)
        if denom == 0:
            raise ZeroDivisionError(f"setting {s!r} has probability 0; p({x}|{s}) is undefined")
        # without an (X, x) coordinate, rely on p(X & x) = p(X)
        joint = v.pair(x, s) if v.has_pair(x, s) else v.single(x)
        singles[x] = joint / denom
    pairs = {}
    for (x, y), (s, t) in pair_settings.items():
        denom = v.pair(s, t)
        if denom == 0:
            raise ZeroDivisionError(f"settings {s}&{t} have probability 0; p({x}&{y}|{s}&{t}) is undefined")
        pairs[(x, y)] = v.pair(x, y) / denom

    events = []
    for x in outcomes:
        ev = v.space.events[v.space.index(x)]
        events.append(Event(ev.label, "outcome", ev.side))
    return CorrelationVector.from_mappings(EventSpace(tuple(events)), singles, pairs)


# JSON file format


def vector_to_dict(v: CorrelationVector) -> dict:
    events = []
    for ev in v.space.events:
        obj = {"label": ev.label, "role": ev.role}
        if ev.side != "none":
            obj["side"] = ev.side
        if ev.setting is not None:
            obj["setting"] = ev.setting
        events.append(obj)
    labels = v.space.labels
    return {
        "events": events,
        "singles": {label: format_rational(p) for label, p in zip(labels, v.singles)},
        "pairs": {f"{labels[i]}&{labels[j]}": format_rational(p) for (i, j), p in zip(v.pair_set, v.pairs)},
    }


def dumps_vector(v: CorrelationVector) -> str:
    return json.dumps(vector_to_dict(v), indent=2, ensure_ascii=False) + "\n"


def events_from_list(items) -> EventSpace:
    if not isinstance(items, list) or not items:
        raise VectorFormatError("'events' must be a nonempty list")
    events = []
    for obj in items:
        if isinstance(obj, str):
            obj = {"label": obj}
        if not isinstance(obj, dict) or "label" not in obj:
            raise VectorFormatError(f"bad event entry {obj!r}")
        extra = set(obj) - {"label", "role", "side", "setting"}
        if extra:
            logger.warning("ignoring unknown event fields %s", sorted(extra))
        try:
            events.append(
                Event(str(obj["label"]), obj.get("role", "outcome"), obj.get("side", "none"), obj.get("setting"))
            )
        except ValueError as exc:
            raise VectorFormatError(str(exc)) from exc
    try:
        return EventSpace(tuple(events))
    except ValueError as exc:
        raise VectorFormatError(str(exc)) from exc


def vector_from_dict(doc) -> CorrelationVector:
    if not isinstance(doc, dict):
        raise VectorFormatError("a correlation-vector document must be a JSON object")
    for key in ("events", "singles", "pairs"):
        if key not in doc:
            raise VectorFormatError(f"missing field {key!r}")
    extra = set(doc) - {"events", "singles", "pairs"}
    if extra:
        logger.warning("ignoring unknown fields %s", sorted(extra))
    space = events_from_list(doc["events"])
    if not isinstance(doc["singles"], dict) or not isinstance(doc["pairs"], dict):
        raise VectorFormatError("'singles' and 'pairs' must be JSON objects")
    unknown = set(doc["singles"]) - set(space.labels)
    if unknown:
        raise VectorFormatError(f"singles given for unknown events {sorted(unknown)}")
    singles = {label: parse_rational(value) for label, value in doc["singles"].items()}
    pairs = {}
    for key, value in doc["pairs"].items():
        parts = key.split("&")
        if len(parts) != 2 or any(p not in space.labels for p in parts):
            raise VectorFormatError(f"bad pair key {key!r}; expected 'L1&L2' with known labels")
        pairs[(parts[0], parts[1])] = parse_rational(value)
    try:
        return CorrelationVector.from_mappings(space, singles, pairs)
    except (ValueError, KeyError) as exc:
        raise VectorFormatError(str(exc)) from exc


def loads_vector(text: str) -> CorrelationVector:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise VectorFormatError(f"invalid JSON: {exc}") from exc
    return vector_from_dict(doc)
