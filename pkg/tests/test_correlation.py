import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epr_polytope.correlation import (
    CorrelationVector,
    Event,
    EventSpace,
    PairSet,
    VectorFormatError,
    conditionalize,
    dumps_vector,
    flatten,
    loads_vector,
    parse_rational,
    restrict,
    unflatten,
    validate,
)
from facts import DEFAULT_FACTS

OUTCOMES = ["A", "A'", "B", "B'"]


def coins(n, pairs, single=F(1, 2), joint=F(1, 4)):
    space = EventSpace.from_labels([f"e{k}" for k in range(1, n + 1)])
    ps = PairSet(n, pairs)
    return CorrelationVector(space, ps, (single,) * n, (joint,) * len(ps))


class TestTypes:
    def test_duplicate_labels_rejected(self):
        with pytest.raises(ValueError):
            EventSpace.from_labels(["A", "A"])

    def test_empty_space_rejected(self):
        with pytest.raises(ValueError):
            EventSpace(())

    def test_empty_label_rejected(self):
        with pytest.raises(ValueError):
            Event("")

    def test_pairs_normalized_and_sorted(self):
        ps = PairSet(4, [(3, 1), (0, 2), (1, 3)])
        assert ps.pairs == ((0, 2), (1, 3))

    @pytest.mark.parametrize("pair", [(0, 0), (0, 4), (-1, 2)])
    def test_bad_pairs(self, pair):
        with pytest.raises(ValueError):
            PairSet(4, [pair])

    def test_complete_pair_set_size(self):
        assert len(PairSet.complete(8)) == 28

    def test_setting_inferred_from_lowercase(self):
        space = EventSpace((Event("A", "outcome", "left"), Event("a", "setting", "left")))
        assert space.setting_of("A") == "a"

    @pytest.mark.parametrize(
        "text, value",
        [("3/32", F(3, 32)), ("0", F(0)), ("1", F(1)), (" 6/8 ", F(3, 4)), ("-1/2", F(-1, 2)), (2, F(2))],
    )
    def test_parse_rational(self, text, value):
        assert parse_rational(text) == value

    @pytest.mark.parametrize("text", ["0.25", "1e-3", 0.25, "1/0", "abc", "", True, None])
    def test_parse_rational_rejects(self, text):
        with pytest.raises(VectorFormatError):
            parse_rational(text)


class TestValidate:
    def test_default_vector_monotone(self, default_vector):
        report = validate(default_vector, "monotone")
        assert report.ok, report.messages()
        assert default_vector.pair("A", "a") == F(1, 4) <= min(default_vector.single("A"), default_vector.single("a"))

    def test_all_zero_passes(self):
        v = coins(3, [(0, 1), (1, 2)], F(0), F(0))
        assert validate(v, "monotone").ok

    def test_monotone_violation_reported(self):
        space = EventSpace.from_labels(["1", "2"])
        v = CorrelationVector(space, PairSet(2, [(0, 1)]), (F(0), F(1, 2)), (F(1, 2),))
        assert validate(v, "range").ok
        report = validate(v, "monotone")
        assert not report.ok
        assert [(x.constraint, x.coordinate) for x in report.violations] == [("monotone", "1&2")]

    def test_range_violations(self):
        space = EventSpace.from_labels(["x", "y"])
        v = CorrelationVector(space, PairSet(2, [(0, 1)]), (F(2), F(-1, 3)), (F(-1, 8),))
        coords = sorted(x.coordinate for x in validate(v).violations)
        assert coords == ["x", "x&y", "y"]

    def test_unknown_level(self, default_vector):
        with pytest.raises(ValueError):
            validate(default_vector, "strict")


class TestFlatten:
    def test_default_vector_entries(self, default_vector):
        # every coordinate agrees with the hand-written facts table
        labels = default_vector.space.labels
        for label in labels:
            assert default_vector.single(label) == DEFAULT_FACTS["singles"][label]
        for (l1, l2), value in DEFAULT_FACTS["pairs"].items():
            assert default_vector.pair(l1, l2) == value, (l1, l2)

    def test_default_vector_prefix(self, default_vector):
        flat = flatten(default_vector)
        assert len(flat) == 36
        q, h, e, t = F(1, 4), F(1, 2), F(1, 8), F(3, 32)
        assert flat[:15] == [q, q, q, q, h, h, h, h, 0, t, t, q, 0, e, e]

    def test_single_event(self):
        space = EventSpace.from_labels(["x"])
        assert flatten(CorrelationVector(space, PairSet.empty(1), (F(1),), ())) == [1]

    def test_two_coins(self):
        assert flatten(coins(2, [(0, 1)])) == [F(1, 2), F(1, 2), F(1, 4)]

    def test_unflatten_inverse(self, default_vector):
        assert unflatten(default_vector.space, default_vector.pair_set, flatten(default_vector)) == default_vector


class TestRestrict:
    def test_outcomes(self, default_vector):
        r = restrict(default_vector, OUTCOMES)
        assert r.space.labels == tuple(OUTCOMES)
        assert r.singles == (F(1, 4),) * 4
        expected = {
            ("A", "B"): F(3, 32), ("A", "B'"): F(3, 32), ("A'", "B"): 0,
            ("A'", "B'"): F(3, 32), ("A", "A'"): 0, ("B", "B'"): 0,
        }
        assert len(r.pair_set) == 6
        for (x, y), value in expected.items():
            assert r.pair(x, y) == value

    def test_identity(self, default_vector):
        assert restrict(default_vector, default_vector.space.labels) == default_vector

    def test_settings_ab(self, default_vector):
        r = restrict(default_vector, ["a", "b"])
        assert flatten(r) == [F(1, 2), F(1, 2), F(1, 4)]

    def test_empty(self, default_vector):
        with pytest.raises(ValueError):
            restrict(default_vector, [])


class TestConditionalize:
    def test_default_vector(self, conditional_vector):
        assert conditional_vector.space.labels == tuple(OUTCOMES)
        assert conditional_vector.singles == (F(1, 2),) * 4
        assert [conditional_vector.pair(*p) for p in [("A", "B"), ("A", "B'"), ("A'", "B"), ("A'", "B'")]] == [
            F(3, 8), F(3, 8), 0, F(3, 8)
        ]
        assert conditional_vector.pair_set.pairs == ((0, 2), (0, 3), (1, 2), (1, 3))

    @staticmethod
    def _product_space():
        events = [
            Event("X", "outcome", "left", "x"), Event("Y", "outcome", "right", "y"),
            Event("x", "setting", "left"), Event("y", "setting", "right"),
        ]
        return EventSpace(tuple(events))

    def test_product_measure_without_own_setting_pairs(self):
        # only (X, Y) and (x, y) are coordinates, so p(X & x) falls back to p(X)
        singles = {"X": F(1, 4), "Y": F(1, 4), "x": F(1, 2), "y": F(1, 2)}
        pairs = {("X", "Y"): F(1, 16), ("x", "y"): F(1, 4)}
        c = conditionalize(CorrelationVector.from_mappings(self._product_space(), singles, pairs))
        assert c.singles == (F(1, 2), F(1, 2))
        assert c.pair("X", "Y") == F(1, 16) / F(1, 4)

    def test_product_measure_with_own_setting_pairs(self):
        # full independence, (X, x) given explicitly: p(X|x) = p(X)
        singles = {"X": F(1, 4), "Y": F(1, 4), "x": F(1, 2), "y": F(1, 2)}
        keys = [("X", "Y"), ("X", "x"), ("Y", "y"), ("x", "y")]
        pairs = {(a, b): singles[a] * singles[b] for a, b in keys}
        c = conditionalize(CorrelationVector.from_mappings(self._product_space(), singles, pairs))
        assert c.singles == (F(1, 4), F(1, 4))
        assert c.pair("X", "Y") == F(1, 4)

    def test_zero_setting_probability(self):
        events = [Event("X", "outcome", "left", "x"), Event("x", "setting", "left")]
        v = CorrelationVector.from_mappings(EventSpace(tuple(events)), {"X": 0, "x": 0}, {("X", "x"): 0})
        with pytest.raises(ZeroDivisionError):
            conditionalize(v)


class TestJson:
    def test_round_trip(self, default_vector):
        assert loads_vector(dumps_vector(default_vector)) == default_vector

    def test_pair_keys_any_order(self):
        doc = {
            "events": [{"label": "x", "role": "outcome"}, {"label": "y", "role": "setting"}],
            "singles": {"x": "1/2", "y": "1"},
            "pairs": {"y&x": "1/2"},
        }
        v = loads_vector(json.dumps(doc))
        assert v.pair("x", "y") == F(1, 2)

    def test_decimal_rejected(self):
        doc = {"events": [{"label": "x"}], "singles": {"x": "0.5"}, "pairs": {}}
        with pytest.raises(VectorFormatError):
            loads_vector(json.dumps(doc))

    def test_unknown_field_warns(self, caplog):
        doc = {"events": [{"label": "x"}], "singles": {"x": "1/2"}, "pairs": {}, "comment": "hi"}
        v = loads_vector(json.dumps(doc))
        assert v.singles == (F(1, 2),)
        assert "comment" in caplog.text

    @pytest.mark.parametrize(
        "doc",
        [
            "[]",
            "{not json",
            json.dumps({"events": [{"label": "x"}], "singles": {}, "pairs": {}}),
            json.dumps({"events": [{"label": "x"}], "singles": {"x": "1"}, "pairs": {"x&z": "0"}}),
            json.dumps({"events": [{"label": "x", "role": "detector"}], "singles": {"x": "1"}, "pairs": {}}),
        ],
    )
    def test_malformed(self, doc):
        with pytest.raises(VectorFormatError):
            loads_vector(doc)


rationals = st.fractions(min_value=0, max_value=1, max_denominator=64)


@st.composite
def vectors(draw):
    n = draw(st.integers(1, 5))
    all_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(all_pairs), unique=True)) if all_pairs else []
    space = EventSpace(
        tuple(
            Event(f"E{k}", draw(st.sampled_from(["outcome", "setting"])), draw(st.sampled_from(["left", "right", "none"])))
            for k in range(n)
        )
    )
    ps = PairSet(n, chosen)
    return CorrelationVector(space, ps, tuple(draw(rationals) for _ in range(n)), tuple(draw(rationals) for _ in ps))


@settings(max_examples=100, deadline=None)
@given(vectors())
def test_json_round_trip_property(v):
    again = loads_vector(dumps_vector(v))
    assert again == v
    assert flatten(again) == flatten(v)


@settings(max_examples=100, deadline=None)
@given(vectors())
def test_restrict_to_all_is_identity(v):
    assert restrict(v, v.space.labels) == v
