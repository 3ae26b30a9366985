"""Monte Carlo runs of a hidden-variable model as an Aspect-type experiment.

Each trial draws one deterministic world from the model.  The world fixes
both switch positions and all detector outcomes.  Draws use exact integer
inversion over the common denominator of the atom weights, so no floating
point bias enters the sampling.

Randomness comes from numpy's PCG64 with one SeedSequence substream per
fixed-size block of trials.  Shards process whole blocks, so the merged
result depends only on (model, N, seed) and never on the shard count.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from .correlation import CorrelationVector, EventSpace, PairSet, default_pair_settings, default_setting_map, flatten
from .polytope import HiddenVariableModel, World, world_to_bits

BLOCK_SIZE = 1 << 16
GENERATOR = f"numpy.PCG64 via SeedSequence(seed, spawn_key=(block,)), {BLOCK_SIZE} trials per block"


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


class ModelSampler:
    """Inversion sampling of atom indices with exact integer thresholds."""

    def __init__(self, model: HiddenVariableModel):
        self.model = model
        den = 1
        for w in model.weights:
            den = den * w.denominator // math.gcd(den, w.denominator)
        self.denominator = den
        cum, total = [], 0
        for w in model.weights:
            total += int(w * den)
            cum.append(total)
        assert total == den
        self.thresholds = cum
        self._small = den <= 2**63 - 1
        if self._small:
            self._cum = np.array(cum, dtype=np.int64)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self._small:
            r = rng.integers(0, self.denominator, size=size, dtype=np.int64)
            return np.searchsorted(self._cum, r, side="right")
        out = np.empty(size, dtype=np.int64)
        for k in range(size):
            out[k] = self._bisect(self._big_uniform(rng))
        return out

    def _big_uniform(self, rng) -> int:
        bits = self.denominator.bit_length()
        words = (bits + 63) // 64
        while True:
            r = 0
            for w in rng.integers(0, 2**64, size=words, dtype=np.uint64, endpoint=False):
                r = (r << 64) | int(w)
            r >>= words * 64 - bits
            if r < self.denominator:
                return r

    def _bisect(self, r: int) -> int:
        lo, hi = 0, len(self.thresholds)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.thresholds[mid] <= r:
                lo = mid + 1
            else:
                hi = mid
        return lo


def _blocks(n: int) -> list[tuple[int, int]]:
    if n < 1:
        raise ValueError("need at least one trial")
    return [(b, min(BLOCK_SIZE, n - b * BLOCK_SIZE)) for b in range((n + BLOCK_SIZE - 1) // BLOCK_SIZE)]


def _side_setting(world: World, space: EventSpace, side: str) -> str:
    chosen = [e.label for e, bit in zip(space.events, world) if bit and e.role == "setting" and e.side == side]
    return "+".join(chosen) if chosen else "none"


@dataclass(frozen=True)
class TrialRecord:
    index: int
    world: World
    left_setting: str
    right_setting: str
    left_detectors: dict
    right_detectors: dict
    space: EventSpace = field(repr=False, compare=False)

    @classmethod
    def from_world(cls, index: int, world: World, space: EventSpace) -> "TrialRecord":
        def detectors(side):
            return {
                e.label: bool(bit)
                for e, bit in zip(space.events, world)
                if e.role == "outcome" and e.side == side
            }

        return cls(
            index,
            tuple(world),
            _side_setting(world, space, "left"),
            _side_setting(world, space, "right"),
            detectors("left"),
            detectors("right"),
            space,
        )

    def to_dict(self) -> dict:
        return {
            "trial": self.index,
            "world": world_to_bits(self.world),
            "left_setting": self.left_setting,
            "right_setting": self.right_setting,
            "left_detectors": self.left_detectors,
            "right_detectors": self.right_detectors,
        }


def sample(model: HiddenVariableModel, n: int, seed: int) -> Iterator[TrialRecord]:
    """Stream ``n`` trial records; identical (model, n, seed) give identical streams."""
    sampler = ModelSampler(model)
    worlds = model.worlds
    index = 0
    for block, size in _blocks(n):
        for atom in sampler.draw(block_rng(seed, block), size):
            yield TrialRecord.from_world(index, worlds[atom], model.space)
            index += 1


@dataclass(frozen=True)
class EmpiricalSummary:
    space: EventSpace
    pair_set: PairSet
    samples: int
    world_counts: dict  # World -> count
    single_counts: tuple[int, ...]
    pair_counts: tuple[int, ...]

    @classmethod
    def from_world_counts(cls, space: EventSpace, pair_set: PairSet, counts: dict) -> "EmpiricalSummary":
        counts = {tuple(w): int(c) for w, c in sorted(counts.items()) if c}
        total = sum(counts.values())
        if total < 1:
            raise ValueError("cannot summarize an empty set of trials")
        singles = [0] * space.n
        pairs = [0] * len(pair_set)
        for w, c in counts.items():
            for i, bit in enumerate(w):
                if bit:
                    singles[i] += c
            for k, (i, j) in enumerate(pair_set):
                if w[i] and w[j]:
                    pairs[k] += c
        summary = cls(space, pair_set, total, counts, tuple(singles), tuple(pairs))
        summary.check_counts()
        return summary

    def check_counts(self) -> None:
        for c in self.single_counts:
            assert 0 <= c <= self.samples
        for (i, j), c in zip(self.pair_set, self.pair_counts):
            assert c <= min(self.single_counts[i], self.single_counts[j])

    def merge(self, other: "EmpiricalSummary") -> "EmpiricalSummary":
        if other.space != self.space or other.pair_set != self.pair_set:
            raise ValueError("cannot merge summaries over different event spaces")
        return EmpiricalSummary.from_world_counts(
            self.space, self.pair_set, Counter(self.world_counts) + Counter(other.world_counts)
        )

    @property
    def vector(self) -> CorrelationVector:
        n = self.samples
        return CorrelationVector(
            self.space,
            self.pair_set,
            tuple(Fraction(c, n) for c in self.single_counts),
            tuple(Fraction(c, n) for c in self.pair_counts),
        )

    def count(self, *labels: str) -> int:
        """Number of trials in which all the labelled events occurred."""
        idx = [self.space.index(label) for label in labels]
        return sum(c for w, c in self.world_counts.items() if all(w[i] for i in idx))

    def conditionals(self) -> dict:
        """Setting-conditional frequencies.

        ``singles`` maps X to count(X & x) / count(x); ``pairs`` maps (X, Y)
        to count(X & Y & x & y) / count(x & y).  Entries with a zero
        denominator are None.
        """
        setting_map = default_setting_map(self.space)
        singles = {}
        for x, s in setting_map.items():
            den = self.count(s)
            singles[x] = Fraction(self.count(x, s), den) if den else None
        pairs = {}
        for (x, y), (s, t) in default_pair_settings(self.space, setting_map).items():
            den = self.count(s, t)
            pairs[(x, y)] = Fraction(self.count(x, y, s, t), den) if den else None
        return {"singles": singles, "pairs": pairs}


def summarize(records: Iterable[TrialRecord], pair_set: PairSet | None = None) -> EmpiricalSummary:
    counts: Counter = Counter()
    space = None
    for rec in records:
        space = rec.space
        counts[rec.world] += 1
    if space is None:
        raise ValueError("cannot summarize an empty set of trials")
    return EmpiricalSummary.from_world_counts(space, pair_set or PairSet.complete(space.n), counts)


def _run_blocks(sampler: ModelSampler, seed: int, blocks) -> np.ndarray:
    counts = np.zeros(len(sampler.thresholds), dtype=np.int64)
    for block, size in blocks:
        counts += np.bincount(sampler.draw(block_rng(seed, block), size), minlength=len(counts))
    return counts


def simulate(model: HiddenVariableModel, n: int, seed: int, shards: int = 1) -> EmpiricalSummary:
    """Counting fast path equivalent to ``summarize(sample(model, n, seed))``."""
    if shards < 1:
        raise ValueError("need at least one shard")
    sampler = ModelSampler(model)
    blocks = _blocks(n)
    parts = [blocks[w::shards] for w in range(shards)]
    if shards == 1:
        totals = [_run_blocks(sampler, seed, blocks)]
    else:
        with ThreadPoolExecutor(max_workers=shards) as pool:
            totals = list(pool.map(lambda part: _run_blocks(sampler, seed, part), parts))
    atom_counts = sum(totals)
    counts = {w: int(c) for w, c in zip(model.worlds, atom_counts)}
    return EmpiricalSummary.from_world_counts(model.space, model.pair_set, counts)


@dataclass
class ComparisonEntry:
    coordinate: str
    target: Fraction
    empirical: Fraction
    deviation: float
    z: float
    flagged: bool


@dataclass
class ComparisonReport:
    z_threshold: float
    entries: list[ComparisonEntry]

    @property
    def passed(self) -> bool:
        return not any(e.flagged for e in self.entries)

    @property
    def max_deviation(self) -> float:
        return max(e.deviation for e in self.entries)


def compare(e: EmpiricalSummary, target: CorrelationVector, z_threshold: float = 4.0) -> ComparisonReport:
    """Binomial z-test of every coordinate against the target vector."""
    if e.space.labels != target.space.labels or e.pair_set != target.pair_set:
        raise ValueError("empirical summary and target have different shapes")
    n = e.samples
    entries = []
    for label, p, f in zip(target.coordinate_labels(), flatten(target), flatten(e.vector)):
        deviation = abs(float(f - p))
        se = math.sqrt(float(p * (1 - p)) / n) if 0 < p < 1 else 0.0
        if deviation == 0:
            z = 0.0
        elif se == 0:
            z = math.inf
        else:
            z = deviation / se
        entries.append(ComparisonEntry(label, p, f, deviation, z, z > z_threshold))
    return ComparisonReport(z_threshold, entries)


def summary_to_dict(
    summary: EmpiricalSummary,
    seed: int,
    comparison: ComparisonReport | None = None,
    generator: str = GENERATOR,
) -> dict:
    labels = summary.space.labels
    cond = summary.conditionals()

    def opt(x):
        return None if x is None else str(x)

    doc = {
        "seed": seed,
        "generator": generator,
        "samples": summary.samples,
        "counts": {
            "singles": dict(zip(labels, summary.single_counts)),
            "pairs": {f"{labels[i]}&{labels[j]}": c for (i, j), c in zip(summary.pair_set, summary.pair_counts)},
        },
        "conditionals": {
            "singles": {x: opt(v) for x, v in cond["singles"].items()},
            "pairs": {f"{x}&{y}": opt(v) for (x, y), v in cond["pairs"].items()},
        },
    }
    if comparison is not None:
        doc["comparison"] = {
            "z_threshold": comparison.z_threshold,
            "pass": comparison.passed,
            "entries": [
                {
                    "coordinate": c.coordinate,
                    "target": str(c.target),
                    "empirical": str(c.empirical),
                    "deviation": c.deviation,
                    "z": c.z if math.isfinite(c.z) else "inf",
                    "pass": not c.flagged,
                }
                for c in comparison.entries
            ],
        }
    return doc


def write_trace(records: Iterable[TrialRecord], fh) -> int:
    count = 0
    for rec in records:
        fh.write(json.dumps(rec.to_dict()) + "\n")
        count += 1
    return count
