"""EPR/Aspect scenario generation and the singlet-state trace oracle.

Directions are coplanar angles in degrees.  The default geometry places
a = 0, a' = b = 120 and b' = 240, which realizes the required separations
(a, a') = (a', b) = (a, b') = 120 and (b, a') = 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
import mpmath
import numpy as np

from .correlation import (
    CorrelationVector,
    Event,
    EventSpace,
    PairSet,
    VectorFormatError,
    parse_rational,
)

CONVENTIONS = ("paper", "standard")
DEFAULT_DENOMINATOR_BOUND = 10**12

DIRECTION_KEYS = ("a", "a_prime", "b", "b_prime")
SWITCH_KEYS = ("ab", "ab'", "a'b", "a'b'")

DEFAULT_ANGLES = (Fraction(0), Fraction(120), Fraction(120), Fraction(240))
UNIFORM_SWITCH = (Fraction(1, 4),) * 4

# cos(psi) for the degree angles where it is rational (Niven's theorem)
_RATIONAL_COS = {
    0: Fraction(1),
    60: Fraction(1, 2),
    90: Fraction(0),
    120: Fraction(-1, 2),
    180: Fraction(-1),
    240: Fraction(-1, 2),
    270: Fraction(0),
    300: Fraction(1, 2),
}


def as_angle(x) -> Fraction:
    """Exact angle in degrees reduced to [0, 360)."""
    if isinstance(x, float):
        x = Fraction(repr(x))
    elif isinstance(x, str):
        x = Fraction(x.strip())
    return Fraction(x) % 360


def _sin_squared(deg: Fraction, bound: int) -> tuple[Fraction, bool]:
    """sin^2 of an angle in degrees, exact where possible.

    Returns the value and whether it is exact.  Irrational values are
    evaluated at 40 significant digits and rounded to the closest fraction
    with denominator at most ``bound``.
    """
    psi = (2 * deg) % 360
    if psi.denominator == 1 and int(psi) in _RATIONAL_COS:
        return (1 - _RATIONAL_COS[int(psi)]) / 2, True
    with mpmath.workdps(40):
        value = mpmath.sin(mpmath.radians(mpmath.mpf(deg.numerator) / deg.denominator)) ** 2
        text = mpmath.nstr(value, 35, strip_zeros=False)
    return Fraction(text).limit_denominator(bound), False


@dataclass(frozen=True)
class JointLaw:
    """Probability that both singlet detectors fire at relative angle theta.

    ``paper`` is 1/2 sin^2(theta), ``standard`` is 1/2 sin^2(theta / 2).  The
    two coincide at 0 and 120 degrees.
    """

    convention: str = "paper"
    denominator_bound: int = DEFAULT_DENOMINATOR_BOUND

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}, got {self.convention!r}")

    def value(self, theta) -> Fraction:
        return self.evaluate(theta)[0]

    def evaluate(self, theta) -> tuple[Fraction, bool]:
        theta = as_angle(theta)
        half_angle = theta if self.convention == "paper" else theta / 2
        s2, exact = _sin_squared(half_angle, self.denominator_bound)
        return s2 / 2, exact

    def real(self, theta) -> float:
        rad = math.radians(float(as_angle(theta)))
        if self.convention == "standard":
            rad /= 2
        return 0.5 * math.sin(rad) ** 2


def joint_probability(law: JointLaw | str, theta) -> Fraction:
    if isinstance(law, str):
        law = JointLaw(law)
    return law.value(theta)


def angle_between(x, y) -> Fraction:
    """Unsigned angle between two coplanar directions, in [0, 180]."""
    d = (as_angle(x) - as_angle(y)) % 360
    return min(d, 360 - d)


@dataclass(frozen=True)
class EprScenario:
    angles: tuple = DEFAULT_ANGLES  # a, a', b, b' in degrees
    switch_distribution: tuple = UNIFORM_SWITCH  # q(ab), q(ab'), q(a'b), q(a'b')
    convention: str = "paper"
    denominator_bound: int = DEFAULT_DENOMINATOR_BOUND

    def __post_init__(self):
        if len(self.angles) != 4:
            raise ValueError("need four directions a, a', b, b'")
        if len(self.switch_distribution) != 4:
            raise ValueError("need four switch probabilities q(ab), q(ab'), q(a'b), q(a'b')")
        object.__setattr__(self, "angles", tuple(as_angle(x) for x in self.angles))
        q = tuple(parse_rational(x) if isinstance(x, str) else Fraction(x) for x in self.switch_distribution)
        object.__setattr__(self, "switch_distribution", q)
        if any(x < 0 for x in q):
            raise ValueError(f"switch probabilities must be nonnegative, got {[str(x) for x in q]}")
        if sum(q) != 1:
            raise ValueError(f"switch probabilities must sum to 1, got {sum(q)}")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}, got {self.convention!r}")
        if self.denominator_bound < 1:
            raise ValueError("denominator bound must be positive")

    @property
    def law(self) -> JointLaw:
        return JointLaw(self.convention, self.denominator_bound)


def epr_event_space() -> EventSpace:
    return EventSpace(
        (
            Event("A", "outcome", "left", "a"),
            Event("A'", "outcome", "left", "a'"),
            Event("B", "outcome", "right", "b"),
            Event("B'", "outcome", "right", "b'"),
            Event("a", "setting", "left"),
            Event("a'", "setting", "left"),
            Event("b", "setting", "right"),
            Event("b'", "setting", "right"),
        )
    )


def build_epr_vector(s: EprScenario | None = None) -> CorrelationVector:
    """Full 8-event correlation vector over all 28 pairs for an EPR scenario."""
    if s is None:
        s = EprScenario()
    space = epr_event_space()
    direction = dict(zip(("a", "a'", "b", "b'"), s.angles))
    q = dict(zip((("a", "b"), ("a", "b'"), ("a'", "b"), ("a'", "b'")), s.switch_distribution))
    law = s.law
    half = Fraction(1, 2)

    def joint_settings(x, y):
        return q.get((x, y), q.get((y, x)))

    setting_prob = {
        "a": q[("a", "b")] + q[("a", "b'")],
        "a'": q[("a'", "b")] + q[("a'", "b'")],
        "b": q[("a", "b")] + q[("a'", "b")],
        "b'": q[("a", "b'")] + q[("a'", "b'")],
    }
    events = {e.label: e for e in space.events}

    def single(label):
        ev = events[label]
        if ev.role == "setting":
            return setting_prob[label]
        return half * setting_prob[ev.setting]

    def pair(l1, l2):
        e1, e2 = events[l1], events[l2]
        if e1.role == "setting" and e2.role == "outcome":
            e1, e2 = e2, e1
        if e1.role == "setting":  # setting-setting
            if e1.side == e2.side:
                return Fraction(0)
            return joint_settings(e1.label, e2.label)
        if e2.role == "setting":  # outcome-setting
            own = e1.setting
            if e2.label == own:
                return single(e1.label)
            if e2.side == e1.side:
                return Fraction(0)
            return half * joint_settings(own, e2.label)
        if e1.side == e2.side:  # outcome-outcome
            return Fraction(0)
        x, y = e1.setting, e2.setting
        return law.value(angle_between(direction[x], direction[y])) * joint_settings(x, y)

    pair_set = PairSet.complete(space.n)
    labels = space.labels
    return CorrelationVector(
        space,
        pair_set,
        tuple(single(label) for label in labels),
        tuple(pair(labels[i], labels[j]) for i, j in pair_set),
    )


def scenario_from_dict(doc) -> EprScenario:
    if not isinstance(doc, dict):
        raise VectorFormatError("a scenario document must be a JSON object")
    angles = list(DEFAULT_ANGLES)
    if "angles" in doc:
        given = doc["angles"]
        if not isinstance(given, dict):
            raise VectorFormatError("'angles' must be an object with keys a, a_prime, b, b_prime")
        for k, key in enumerate(DIRECTION_KEYS):
            if key in given:
                try:
                    angles[k] = as_angle(given[key])
                except (TypeError, ValueError, ZeroDivisionError) as exc:
                    raise VectorFormatError(f"bad angle for {key}: {given[key]!r}") from exc
    switch = list(UNIFORM_SWITCH)
    if "switch_distribution" in doc:
        given = doc["switch_distribution"]
        if not isinstance(given, dict) or set(given) != set(SWITCH_KEYS):
            raise VectorFormatError(f"'switch_distribution' needs exactly the keys {SWITCH_KEYS}")
        switch = [parse_rational(given[key]) for key in SWITCH_KEYS]
    try:
        return EprScenario(
            tuple(angles),
            tuple(switch),
            doc.get("convention", "paper"),
            int(doc.get("denominator_bound", DEFAULT_DENOMINATOR_BOUND)),
        )
    except (TypeError, ValueError) as exc:
        raise VectorFormatError(str(exc)) from exc


def scenario_to_dict(s: EprScenario) -> dict:
    return {
        "angles": {key: str(x) for key, x in zip(DIRECTION_KEYS, s.angles)},
        "switch_distribution": {key: str(x) for key, x in zip(SWITCH_KEYS, s.switch_distribution)},
        "convention": s.convention,
        "denominator_bound": s.denominator_bound,
    }


def loads_scenario(text: str) -> EprScenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise VectorFormatError(f"invalid JSON: {exc}") from exc
    return scenario_from_dict(doc)


# Hilbert-space oracle

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)

TOL = 1e-12


class SetupError(ValueError):
    pass


def spin_up_projector(direction) -> np.ndarray:
    """1/2 (I + n.sigma) for the unit vector at ``direction`` degrees in the x-z plane."""
    phi = math.radians(float(as_angle(direction)))
    return 0.5 * (I2 + math.cos(phi) * SIGMA_Z + math.sin(phi) * SIGMA_X)


def singlet_state() -> np.ndarray:
    up, down = np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
    psi = (np.kron(up, down) - np.kron(down, up)) / math.sqrt(2)
    return np.outer(psi, psi.conj())


@dataclass
class QuantumSetup:
    state: np.ndarray = field(default_factory=singlet_state)

    def __post_init__(self):
        self.state = np.asarray(self.state, dtype=complex)
        self.check()

    @classmethod
    def singlet(cls) -> "QuantumSetup":
        return cls(singlet_state())

    @classmethod
    def maximally_mixed(cls) -> "QuantumSetup":
        return cls(np.eye(4, dtype=complex) / 4)

    def check(self) -> None:
        w = self.state
        if w.shape != (4, 4):
            raise SetupError(f"state must be 4x4, got {w.shape}")
        if np.max(np.abs(w - w.conj().T)) > TOL:
            raise SetupError("state is not Hermitian")
        if abs(np.trace(w) - 1) > TOL:
            raise SetupError(f"state trace is {np.trace(w)}, not 1")
        if np.min(np.linalg.eigvalsh(w)) < -TOL:
            raise SetupError("state is not positive semidefinite")

    @property
    def is_pure(self) -> bool:
        return bool(np.max(np.abs(self.state @ self.state - self.state)) <= TOL)

    def left_projector(self, direction) -> np.ndarray:
        return np.kron(spin_up_projector(direction), I2)

    def right_projector(self, direction) -> np.ndarray:
        return np.kron(I2, spin_up_projector(direction))

    def expectation(self, op: np.ndarray) -> float:
        value = np.trace(self.state @ op)
        if abs(value.imag) > TOL:
            raise SetupError(f"trace has imaginary residue {value.imag:.3e}")
        return float(value.real)


def is_projector(p: np.ndarray, tol: float = TOL) -> bool:
    return bool(np.max(np.abs(p @ p - p)) <= tol and np.max(np.abs(p - p.conj().T)) <= tol)


def trace_oracle(setup: QuantumSetup, left_direction, right_direction) -> float:
    """tr(W A B): probability that both spin-up detectors fire."""
    setup.check()
    return setup.expectation(setup.left_projector(left_direction) @ setup.right_projector(right_direction))


def single_outcome_trace(setup: QuantumSetup, direction, side: str = "left") -> float:
    setup.check()
    if side == "left":
        return setup.expectation(setup.left_projector(direction))
    if side == "right":
        return setup.expectation(setup.right_projector(direction))
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def oracle_table(angles=DEFAULT_ANGLES, setup: QuantumSetup | None = None) -> list[dict]:
    """Oracle and both closed forms for the four cross-side direction pairs."""
    setup = setup or QuantumSetup.singlet()
    a, a2, b, b2 = (as_angle(x) for x in angles)
    rows = []
    for name, x, y in (("ab", a, b), ("ab'", a, b2), ("a'b", a2, b), ("a'b'", a2, b2)):
        theta = angle_between(x, y)
        rows.append(
            {
                "pair": name,
                "theta": theta,
                "oracle": trace_oracle(setup, x, y),
                "paper": JointLaw("paper").value(theta),
                "standard": JointLaw("standard").value(theta),
            }
        )
    return rows

