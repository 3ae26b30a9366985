"""Exit criteria, one test per criterion, each run at its stated tolerance.

A summary line per criterion is printed at the end of the pytest run.
"""

import json
import math
import random
import time
from fractions import Fraction as F
from itertools import product

import numpy as np
import pytest

from epr_polytope.cli import main
from epr_polytope.correlation import EventSpace, PairSet, conditionalize, dumps_vector, flatten, loads_vector, unflatten
from epr_polytope.polytope import (
    BELL_PAIR_SET,
    CANONICAL_CH,
    ch_inequalities,
    enumerate_vertices,
    evaluate_ch,
    membership,
    mixture_project,
    model_from_dict,
    verify_certificate,
    vertex_vector,
)
from epr_polytope.quantum import QuantumSetup, build_epr_vector, oracle_table, single_outcome_trace
from epr_polytope.simulator import simulate
from facts import DEFAULT_FACTS
from randgen import brute_separates, random_model, random_vector

CONDITIONAL = (F(1, 2),) * 4 + (F(3, 8), F(3, 8), F(0), F(3, 8))
RESTRICTED = (F(1, 4),) * 4 + (F(3, 32), F(3, 32), F(0), F(3, 32))
BELL_SPACE = EventSpace.from_labels(["A", "A'", "B", "B'"])


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.setenv("EPR_POLYTOPE_OUTDIR", str(tmp_path))
    return tmp_path


def timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def test_criterion_1_default_vector(workdir, acceptance_line):
    code, elapsed = timed(main, ["epr-vector"])
    v = loads_vector((workdir / "epr_vector.json").read_text())
    expected_singles = [DEFAULT_FACTS["singles"][label] for label in v.space.labels]
    ok = (
        code == 0
        and len(flatten(v)) == 36
        and list(v.singles) == expected_singles
        and all(v.pair(*pair) == value for pair, value in DEFAULT_FACTS["pairs"].items())
        and v.pair("A", "B") == F(3, 32)
        and v.pair("A'", "B") == 0
        and v.pair("A", "b") == F(1, 8)
        and v.pair("a", "b") == F(1, 4)
        and v.pair("a", "a'") == 0
        and elapsed < 1.0
    )
    acceptance_line(1, "default EPR vector reproduction", ok, f"36 exact entries, {elapsed:.3f}s")
    assert ok


def test_criterion_2_extended_vector_inside(workdir, acceptance_line):
    main(["epr-vector"])
    code, elapsed = timed(main, ["membership", "--vector", str(workdir / "epr_vector.json")])
    doc = json.loads((workdir / "membership.json").read_text())
    model = model_from_dict(doc)
    target = build_epr_vector()
    lp_report, lp_time = timed(membership, target)
    ok = (
        code == 0
        and doc["verdict"] == "inside"
        and len(model) <= 37
        and mixture_project(model) == target
        and lp_report.inside
        and lp_time < 1.0
        and elapsed < 1.0
    )
    acceptance_line(2, "extended vector inside C(8, S_28)", ok, f"{len(model)} atoms, LP {lp_time:.3f}s")
    assert ok


def test_criterion_3_conditional_vector_outside(workdir, acceptance_line):
    p = unflatten(BELL_SPACE, BELL_PAIR_SET, CONDITIONAL)
    assert flatten(p) == flatten(conditionalize(build_epr_vector()))
    path = workdir / "conditional.json"
    path.write_text(dumps_vector(p))
    t0 = time.perf_counter()
    code = main(["membership", "--vector", str(path)])
    doc = json.loads((workdir / "membership.json").read_text())
    report = membership(p)
    certified = verify_certificate(report.certificate, p, 4, BELL_PAIR_SET)
    brute = brute_separates(
        report.certificate.coefficients, report.certificate.bound, flatten(p),
        [u for _, u in enumerate_vertices(4, BELL_PAIR_SET)],
    )
    ch_code = main(["ch", "--vector", str(path), "--format", "json", "-o", str(workdir / "ch.json")])
    ch = json.loads((workdir / "ch.json").read_text())
    canonical = next(f for f in ch["forms"] if f["name"] == ch_inequalities()[CANONICAL_CH].name)
    elapsed = time.perf_counter() - t0
    ok = (
        code == 2
        and doc["verdict"] == "outside"
        and certified
        and brute
        and ch_code == 2
        and ch["canonical"] == "1/8"
        and canonical["value"] == "1/8"
        and canonical["violated"]
        and elapsed < 1.0
    )
    acceptance_line(3, "conditional vector violates CH", ok, f"certificate violation {doc['certificate']['violation']}, CH 1/8")
    assert ok


def test_criterion_4_contrast(workdir, acceptance_line):
    p = unflatten(BELL_SPACE, BELL_PAIR_SET, RESTRICTED)
    path = workdir / "restricted.json"
    path.write_text(dumps_vector(p))
    code = main(["ch", "--vector", str(path), "--format", "json", "-o", str(workdir / "ch.json")])
    ch = json.loads((workdir / "ch.json").read_text())
    ok = code == 0 and ch["canonical"] == "-7/32" and not ch["violated"] and not any(f["violated"] for f in ch["forms"])
    acceptance_line(4, "restricted absolute vector satisfies CH", ok, "canonical -7/32")
    assert ok


def test_criterion_5_quantum_oracle(acceptance_line):
    setup = QuantumSetup.singlet()
    rows = oracle_table(setup=setup)
    joint_ok = all(abs(r["oracle"] - e) <= 1e-12 for r, e in zip(rows, [0.375, 0.375, 0.0, 0.375]))
    rng = np.random.default_rng(20240601)
    directions = rng.uniform(0, 360, size=10)
    single_ok = all(
        abs(single_outcome_trace(setup, float(d), side) - 0.5) <= 1e-12 for d in directions for side in ("left", "right")
    )
    ok = joint_ok and single_ok
    acceptance_line(5, "trace oracle reproduces 3/8, 3/8, 0, 3/8 and 1/2", ok, "tol 1e-12")
    assert ok


def test_criterion_6_simulation(workdir, acceptance_line):
    main(["membership"])
    main(["epr-vector"])
    t0 = time.perf_counter()
    code = main([
        "simulate", "--model", str(workdir / "membership.json"), "--target", str(workdir / "epr_vector.json"),
        "--samples", "1000000", "--seed", "42", "--format", "json",
    ])
    elapsed = time.perf_counter() - t0
    doc = json.loads((workdir / "simulation.json").read_text())
    entries = doc["comparison"]["entries"]
    abs_ok = all(e["deviation"] <= 0.005 for e in entries)
    cond = doc["conditionals"]
    expected = {"A": 0.5, "A'": 0.5, "B": 0.5, "B'": 0.5}
    expected_pairs = {"A&B": 0.375, "A&B'": 0.375, "A'&B": 0.0, "A'&B'": 0.375}
    cond_ok = all(abs(float(F(cond["singles"][k])) - v) <= 0.005 for k, v in expected.items()) and all(
        abs(float(F(cond["pairs"][k])) - v) <= 0.005 for k, v in expected_pairs.items()
    )
    counts = doc["counts"]["pairs"]
    impossible_ok = counts["A&a'"] == 0 and counts["a&a'"] == 0 and counts["A&A'"] == 0
    ok = code == 0 and doc["comparison"]["pass"] and abs_ok and cond_ok and impossible_ok and elapsed < 10
    worst = max(e["deviation"] for e in entries)
    acceptance_line(6, "deterministic-universe simulation", ok, f"N=1e6, max |dev| {worst:.5f}, {elapsed:.2f}s")
    assert ok


def test_criterion_7_properties(acceptance_line):
    rng = random.Random(7)

    # (a) round trip over 200 random models
    round_trip = True
    for _ in range(200):
        m = random_model(rng, max_events=6)
        target = mixture_project(m)
        report = membership(target)
        round_trip &= report.inside and mixture_project(report.model) == target

    # (b) certificate soundness over 200 non-classical vectors
    outside, sound = 0, True
    while outside < 200:
        p = random_vector(rng, max_events=4)
        report = membership(p)
        if report.inside:
            continue
        outside += 1
        cert = report.certificate
        sound &= verify_certificate(cert, p) and math.gcd(*cert.coefficients, cert.bound) == 1

    # (c) CH validity on the 16 Bell vertices
    ch_valid = True
    for world in product((0, 1), repeat=4):
        p = unflatten(BELL_SPACE, BELL_PAIR_SET, vertex_vector(world, BELL_PAIR_SET))
        ch_valid &= all(-1 <= r.value <= 0 for r in evaluate_ch(p))

    # (d) seed determinism, repeated runs and shard counts
    model = membership(build_epr_vector()).model
    runs = [simulate(model, 300_001, 99, w) for w in (1, 4, 8)] + [simulate(model, 300_001, 99, 1)]
    deterministic = all(r == runs[0] for r in runs)

    ok = round_trip and sound and ch_valid and deterministic
    detail = f"round-trip {round_trip}, soundness {sound}, CH {ch_valid}, determinism {deterministic}"
    acceptance_line(7, "property suites", ok, detail)
    assert ok
