"""Correlation polytopes C(n, S): vertices, exact membership, certificates.

A deterministic world is a 0/1 assignment to the n events; its vertex
vector has u_i = e_i on the singles and u_ij = e_i e_j on the pairs of S.
A correlation vector lies in C(n, S) exactly when it is a convex mixture of
vertex vectors, i.e. when it is reproduced by a hidden-variable model.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterator, Sequence

from .correlation import (
    CorrelationVector,
    EventSpace,
    PairSet,
    VectorFormatError,
    coordinate_labels,
    events_from_list,
    flatten,
    parse_rational,
    unflatten,
    validate,
    vector_to_dict,
)
from .simplex import find_feasible

MAX_EVENTS = 20

World = tuple[int, ...]


class EnumerationBoundError(ValueError):
    pass


def iter_worlds(n: int) -> Iterator[World]:
    """All 2^n worlds in increasing binary order, first event most significant."""
    return product((0, 1), repeat=n)


def vertex_vector(world: Sequence[int], pair_set: PairSet) -> tuple[int, ...]:
    return tuple(world) + tuple(world[i] * world[j] for i, j in pair_set)


def enumerate_vertices(n: int, pair_set: PairSet, max_events: int = MAX_EVENTS) -> list[tuple[World, tuple[int, ...]]]:
    if n > max_events:
        raise EnumerationBoundError(
            f"{n} events means 2^{n} vertices; raise max_events (currently {max_events}) to allow this"
        )
    if pair_set.n != n:
        raise ValueError("pair set does not match the number of events")
    return [(w, vertex_vector(w, pair_set)) for w in iter_worlds(n)]


def world_to_bits(world: Sequence[int]) -> str:
    return "".join(str(int(e)) for e in world)


def bits_to_world(bits: str) -> World:
    if not bits or set(bits) - {"0", "1"}:
        raise VectorFormatError(f"bad world bitstring {bits!r}")
    return tuple(int(c) for c in bits)


@dataclass(frozen=True)
class HiddenVariableModel:
    """Finitely supported distribution over deterministic worlds."""

    space: EventSpace
    pair_set: PairSet
    atoms: tuple[tuple[World, Fraction], ...]

    def __post_init__(self):
        atoms = tuple((tuple(int(e) for e in w), Fraction(p)) for w, p in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise ValueError("a model needs at least one atom")
        for w, p in atoms:
            if len(w) != self.space.n:
                raise ValueError(f"world {world_to_bits(w)} has the wrong length for {self.space.n} events")
            if any(e not in (0, 1) for e in w):
                raise ValueError(f"world entries must be 0 or 1, got {w}")
            if p <= 0:
                raise ValueError(f"atom weights must be positive, got {p}")
        if len({w for w, _ in atoms}) != len(atoms):
            raise ValueError("duplicate worlds in model")
        total = sum(p for _, p in atoms)
        if total != 1:
            raise ValueError(f"atom weights sum to {total}, not 1")

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def worlds(self) -> list[World]:
        return [w for w, _ in self.atoms]

    @property
    def weights(self) -> list[Fraction]:
        return [p for _, p in self.atoms]


@dataclass(frozen=True)
class Certificate:
    """Integer inequality c.u <= bound valid on every vertex but violated by the target."""

    coefficients: tuple[int, ...]
    bound: int

    def value(self, coords: Sequence) -> Fraction:
        return sum((c * x for c, x in zip(self.coefficients, coords) if c), Fraction(0))

    def violation(self, p: CorrelationVector) -> Fraction:
        return self.value(flatten(p)) - self.bound


@dataclass
class MembershipReport:
    verdict: str  # "inside" | "outside"
    target: CorrelationVector
    model: HiddenVariableModel | None = None
    certificate: Certificate | None = None
    pivots: int = 0

    @property
    def inside(self) -> bool:
        return self.verdict == "inside"


def normalize_certificate(coeffs: Sequence[Fraction], bound: Fraction) -> Certificate:
    """Clear denominators and divide out the common gcd."""
    values = [Fraction(c) for c in coeffs] + [Fraction(bound)]
    scale = 1
    for v in values:
        scale = scale * v.denominator // math.gcd(scale, v.denominator)
    ints = [int(v * scale) for v in values]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    if g > 1:
        ints = [v // g for v in ints]
    return Certificate(tuple(ints[:-1]), ints[-1])


def membership(p: CorrelationVector, max_events: int = MAX_EVENTS) -> MembershipReport:
    """Decide p in C(n, S) by exact LP over the 2^n vertex vectors."""
    report = validate(p, "range")
    if not report.ok:
        raise ValueError("vector fails range validation: " + "; ".join(report.messages()))
    vertices = enumerate_vertices(p.n, p.pair_set, max_events)
    target = flatten(p)
    dim = len(target)
    A = [[u[k] for _, u in vertices] for k in range(dim)]
    A.append([1] * len(vertices))
    b = target + [Fraction(1)]
    result = find_feasible(A, b)

    if result.feasible:
        atoms = [(vertices[j][0], x) for j, x in enumerate(result.x) if x > 0]
        model = HiddenVariableModel(p.space, p.pair_set, tuple(atoms))
        return MembershipReport("inside", p, model=model, pivots=result.pivots)

    y = result.farkas
    # y.(u, 1) <= 0 on every vertex and y.(p, 1) > 0, so c = y[:-1], bound = -y[-1]
    cert = normalize_certificate(y[:-1], -y[-1])
    return MembershipReport("outside", p, certificate=cert, pivots=result.pivots)


def mixture_project(model: HiddenVariableModel) -> CorrelationVector:
    dim = model.space.n + len(model.pair_set)
    total = [Fraction(0)] * dim
    for w, weight in model.atoms:
        for k, u in enumerate(vertex_vector(w, model.pair_set)):
            if u:
                total[k] += weight
    return unflatten(model.space, model.pair_set, total)


def verify_certificate(
    cert: Certificate,
    p: CorrelationVector,
    n: int | None = None,
    pair_set: PairSet | None = None,
    max_events: int = MAX_EVENTS,
) -> bool:
    """Exhaustively check that ``cert`` separates ``p`` from every vertex."""
    n = p.n if n is None else n
    pair_set = p.pair_set if pair_set is None else pair_set
    if n != p.n or pair_set != p.pair_set:
        return False
    if len(cert.coefficients) != n + len(pair_set):
        return False
    if cert.value(flatten(p)) <= cert.bound:
        return False
    for _, u in enumerate_vertices(n, pair_set, max_events):
        if sum(c * x for c, x in zip(cert.coefficients, u)) > cert.bound:
            return False
    return True


# Clauser-Horne inequalities on the 4-event Bell scenario

BELL_PAIRS = ((0, 2), (0, 3), (1, 2), (1, 3))
BELL_PAIR_SET = PairSet(4, BELL_PAIRS)


@dataclass(frozen=True)
class ChInequality:
    """Affine form over (p1..p4, p13, p14, p23, p24); valid range [-1, 0]."""

    name: str
    singles: tuple[int, int, int, int]
    pairs: tuple[int, int, int, int]  # aligned with BELL_PAIRS
    constant: int = 0

    def value(self, p: CorrelationVector) -> Fraction:
        coords = flatten(p)
        return sum((c * x for c, x in zip(self.singles + self.pairs, coords)), Fraction(self.constant))

    def as_certificate(self) -> Certificate:
        """The upper half, form <= 0, as a certificate inequality."""
        return normalize_certificate(self.singles + self.pairs, -self.constant)


def _ch_forms(labels: Sequence[str]) -> list[ChInequality]:
    forms = []
    for i, j in BELL_PAIRS:
        other_left, other_right = 1 - i, 5 - j
        pairs = tuple(-1 if pq == (i, j) else 1 for pq in BELL_PAIRS)
        singles = tuple(-1 if k in (other_left, other_right) else 0 for k in range(4))
        forms.append((f"{labels[i]}&{labels[j]}", singles, pairs))
    out = []
    for tag, singles, pairs in forms:
        out.append(ChInequality(f"CH[-{tag}]", singles, pairs, 0))
    for tag, singles, pairs in forms:
        out.append(
            ChInequality(f"CH*[-{tag}]", tuple(-s for s in singles), tuple(-q for q in pairs), -1)
        )
    return out


def ch_inequalities(labels: Sequence[str] = ("A", "A'", "B", "B'")) -> list[ChInequality]:
    """The 8 CH forms: four minus-one-pair forms E and their mirrors -1 - E.

    Index 2 is the canonical form p13 + p14 + p24 - p23 - p1 - p4.
    """
    return _ch_forms(labels)


CANONICAL_CH = 2


@dataclass
class ChResult:
    form: ChInequality
    value: Fraction

    @property
    def violated(self) -> bool:
        return not -1 <= self.value <= 0


def check_bell_shape(p: CorrelationVector) -> None:
    if p.n != 4 or p.pair_set.pairs != BELL_PAIRS:
        labels = p.coordinate_labels()
        raise ValueError(
            f"CH evaluation needs 4 events with pairs (1,3),(1,4),(2,3),(2,4); got coordinates {labels}"
        )


def evaluate_ch(p: CorrelationVector) -> list[ChResult]:
    check_bell_shape(p)
    return [ChResult(form, form.value(p)) for form in ch_inequalities(p.space.labels)]


# JSON report format


def report_to_dict(report: MembershipReport) -> dict:
    p = report.target
    doc = {
        "verdict": report.verdict,
        "events": vector_to_dict(p)["events"],
        "pairs": coordinate_labels(p.space, p.pair_set)[p.n:],
        "pivots": report.pivots,
    }
    if report.model is not None:
        doc["model"] = [
            {"world": world_to_bits(w), "weight": str(weight)} for w, weight in report.model.atoms
        ]
    if report.certificate is not None:
        cert = report.certificate
        doc["certificate"] = {
            "coefficients": {label: str(c) for label, c in zip(p.coordinate_labels(), cert.coefficients)},
            "bound": str(cert.bound),
            "violation": str(cert.violation(p)),
        }
    return doc


def dumps_report(report: MembershipReport, **extra) -> str:
    doc = report_to_dict(report)
    doc.update(extra)
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _pair_set_from_labels(space: EventSpace, names) -> PairSet:
    pairs = []
    for name in names:
        parts = name.split("&")
        if len(parts) != 2:
            raise VectorFormatError(f"bad pair label {name!r}")
        try:
            pairs.append((space.index(parts[0]), space.index(parts[1])))
        except KeyError as exc:
            raise VectorFormatError(str(exc)) from exc
    return PairSet(space.n, tuple(pairs))


def model_from_dict(doc, space: EventSpace | None = None, pair_set: PairSet | None = None) -> HiddenVariableModel:
    """Load a hidden-variable model from a membership report document.

    The event space and pair set come from the document when present, else
    from the arguments.
    """
    if not isinstance(doc, dict) or "model" not in doc:
        raise VectorFormatError("document has no 'model' field")
    if "events" in doc:
        space = events_from_list(doc["events"])
    if space is None:
        raise VectorFormatError("model document has no 'events' and no event space was supplied")
    if "pairs" in doc:
        pair_set = _pair_set_from_labels(space, doc["pairs"])
    if pair_set is None:
        pair_set = PairSet.complete(space.n)
    atoms = []
    for item in doc["model"]:
        if not isinstance(item, dict) or "world" not in item or "weight" not in item:
            raise VectorFormatError(f"bad model atom {item!r}")
        atoms.append((bits_to_world(item["world"]), parse_rational(item["weight"])))
    try:
        return HiddenVariableModel(space, pair_set, tuple(atoms))
    except ValueError as exc:
        raise VectorFormatError(str(exc)) from exc


def model_to_dict(model: HiddenVariableModel) -> dict:
    return {
        "events": vector_to_dict(mixture_project(model))["events"],
        "pairs": coordinate_labels(model.space, model.pair_set)[model.space.n:],
        "model": [{"world": world_to_bits(w), "weight": str(p)} for w, p in model.atoms],
    }
