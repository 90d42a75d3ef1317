import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from akg import (
    AttributeId,
    AttributeKind,
    DuplicateObjectError,
    FuzzyContext,
    MembershipRangeError,
    ObjectId,
    ObjectKind,
    UnknownAttributeError,
    UnknownObjectError,
)
from akg.names import canonical_key, canonical_name, split_tokens

from oracles import random_fuzzy_context


class TestNames:
    def test_canonical_name_joins_lowercase_words(self):
        assert canonical_name("engine separation") == "EngineSeparation"
        assert canonical_name("Fuel leak") == "FuelLeak"
        assert canonical_name("Reverser inadverted deploy") == "ReverserInadvertedDeploy"

    def test_canonical_name_keeps_cased_tokens(self):
        assert canonical_name("EngineSeparation") == "EngineSeparation"
        assert canonical_name("Model_Boeing777-9X") == "Model_Boeing777-9X"
        assert canonical_name("A380-800") == "A380-800"

    def test_canonical_name_idempotent(self):
        for raw in ("hot start", "HotStart", "Country_USA", "tail pipe fires"):
            once = canonical_name(raw)
            assert canonical_name(once) == once

    def test_canonical_key_ignores_case_and_punctuation(self):
        assert canonical_key("EngineSeparation") == canonical_key("engine separation")
        assert canonical_key("Model_Boeing777-9X") == "modelboeing7779x"

    def test_split_tokens_crosses_camel_case(self):
        assert split_tokens("EngineSeparation") == {"engine", "separation"}
        assert split_tokens("engine separation") == {"engine", "separation"}
        assert split_tokens("Boeing777") == {"boeing", "777"}


class TestIdentity:
    def test_attribute_equality_is_canonical(self):
        assert AttributeId("engine separation") == AttributeId("EngineSeparation")
        assert hash(AttributeId("Hot start")) == hash(AttributeId("HotStart"))

    def test_attribute_requires_name(self):
        with pytest.raises(ValueError):
            AttributeId("   ")

    def test_object_identity_is_exact_name(self):
        assert ObjectId("ticket_1") == ObjectId("ticket_1", ObjectKind.TICKET)
        assert ObjectId("ticket_1") != ObjectId("ticket_2")


class TestAddObject:
    def test_single_row(self):
        ctx = FuzzyContext().add_object("ticket_1", {"EngineSeparation": 0.9})
        assert len(ctx) == 1
        assert len(ctx.attributes) == 1
        assert ctx.membership("ticket_1", "EngineSeparation") == 0.9

    def test_duplicate_object_rejected(self):
        ctx = FuzzyContext().add_object("ticket_1", {"EngineSeparation": 0.9})
        with pytest.raises(DuplicateObjectError):
            ctx.add_object("ticket_1", {})

    def test_membership_outside_unit_interval_rejected(self):
        ctx = FuzzyContext()
        with pytest.raises(MembershipRangeError):
            ctx.add_object("t", {"a": 1.2})
        with pytest.raises(MembershipRangeError):
            ctx.add_object("t", {"a": -0.1})

    def test_add_is_persistent_not_in_place(self):
        base = FuzzyContext().add_object("a", {"x": 1.0})
        extended = base.add_object("b", {"y": 1.0})
        assert len(base) == 1
        assert len(extended) == 2
        assert not base.has_attribute("y")

    def test_zero_memberships_are_dropped(self):
        ctx = FuzzyContext().add_object("t", {"a": 0.0, "b": 0.5})
        rep = ctx.object_representation("t")
        assert {a.name for a in rep.memberships} == {"B"}
        assert ctx.has_attribute("a")  # attribute registered, pair absent


class TestDerivations:
    @pytest.fixture()
    def small(self) -> FuzzyContext:
        return (
            FuzzyContext(chi=0.6)
            .add_object("o1", {"a": 0.8, "b": 0.5})
            .add_object("o2", {"a": 0.7, "c": 1.0})
        )

    def test_empty_object_set_yields_all_attributes(self, small):
        assert small.derive_intent([]) == frozenset(small.attributes)

    def test_empty_attribute_set_yields_all_objects(self, small):
        assert small.derive_extent([]) == frozenset(small.objects)

    def test_threshold_cut(self, small):
        intent = small.derive_intent(["o1"])
        assert {a.name for a in intent} == {"A"}

    def test_unknown_object_raises(self, small):
        with pytest.raises(UnknownObjectError):
            small.derive_intent(["nope"])

    def test_unknown_attribute_raises(self, small):
        with pytest.raises(UnknownAttributeError):
            small.derive_extent(["nope"])

    def test_sample_context_c6_intent(self, sample_context):
        intent = sample_context.derive_intent(["ticket_4", "ticket_6"], 0.6)
        assert {a.name for a in intent} == {
            "EngineSeparation",
            "HotStart",
            "FuelLeak",
            "BirdIngestion",
        }

    def test_representation_lists_nonzero_pairs(self, small):
        rep = small.object_representation("o1")
        assert {a.name: m for a, m in rep.memberships.items()} == {"A": 0.8, "B": 0.5}

    def test_representation_empty_row(self):
        ctx = FuzzyContext().add_object("bare", {})
        assert ctx.object_representation("bare").memberships == {}


@st.composite
def contexts(draw):
    n_obj = draw(st.integers(min_value=0, max_value=5))
    n_attr = draw(st.integers(min_value=0, max_value=5))
    chi = draw(st.sampled_from([0.0, 0.25, 0.4, 0.6, 0.8, 1.0]))
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    import random

    return random_fuzzy_context(random.Random(seed), n_obj, n_attr, chi)


class TestDerivationProperties:
    @settings(max_examples=80, deadline=None)
    @given(ctx=contexts(), data=st.data())
    def test_antitone_on_object_sets(self, ctx, data):
        objs = [o.name for o in ctx.objects]
        sub = data.draw(st.sets(st.sampled_from(objs), max_size=len(objs)) if objs else st.just(set()))
        sup = sub | (set(data.draw(st.sets(st.sampled_from(objs)))) if objs else set())
        assert ctx.derive_intent(sup) <= ctx.derive_intent(sub)

    @settings(max_examples=80, deadline=None)
    @given(ctx=contexts(), data=st.data())
    def test_closure_extensive_and_idempotent(self, ctx, data):
        objs = [o.name for o in ctx.objects]
        subset = data.draw(st.sets(st.sampled_from(objs), max_size=len(objs)) if objs else st.just(set()))
        chosen = frozenset(ctx.get_object(o) for o in subset)
        closed = ctx.derive_extent(ctx.derive_intent(chosen))
        assert chosen <= closed
        assert ctx.derive_extent(ctx.derive_intent(closed)) == closed

    @settings(max_examples=80, deadline=None)
    @given(ctx=contexts(), data=st.data())
    def test_raising_chi_never_enlarges_result(self, ctx, data):
        objs = [o.name for o in ctx.objects]
        subset = data.draw(st.sets(st.sampled_from(objs), max_size=len(objs)) if objs else st.just(set()))
        lo, hi = sorted((data.draw(st.sampled_from([0.0, 0.3, 0.6, 0.9])), data.draw(st.sampled_from([0.1, 0.5, 0.8, 1.0]))))
        assert ctx.derive_intent(subset, hi) <= ctx.derive_intent(subset, lo)


class TestSerialization:
    def test_round_trip_identity(self, sample_context):
        text = sample_context.to_json()
        back = FuzzyContext.from_json(text)
        assert back.to_dict() == sample_context.to_dict()
        assert back.content_hash() == sample_context.content_hash()

    @settings(max_examples=40, deadline=None)
    @given(ctx=contexts())
    def test_round_trip_random(self, ctx):
        back = FuzzyContext.from_json(ctx.to_json())
        assert back.to_dict() == ctx.to_dict()
        assert back.content_hash() == ctx.content_hash()

    def test_kinds_survive(self, tmp_path):
        ctx = FuzzyContext().add_object(
            ObjectId("t1", ObjectKind.TICKET),
            {AttributeId("FuelLeak", AttributeKind.SYMPTOM): 1.0},
        )
        path = tmp_path / "ctx.json"
        ctx.to_json(path)
        back = FuzzyContext.load(path)
        assert back.get_attribute("FuelLeak").kind == AttributeKind.SYMPTOM
        assert back.get_object("t1").kind == ObjectKind.TICKET

    def test_rejects_unknown_version(self):
        with pytest.raises(ValueError):
            FuzzyContext.from_dict({"version": 99})

    def test_memberships_bit_exact(self):
        ctx = FuzzyContext().add_object("o", {"a": 0.1 + 0.2})  # 0.30000000000000004
        back = FuzzyContext.from_json(ctx.to_json())
        assert back.membership("o", "a") == ctx.membership("o", "a")

    def test_table_one_ingestion_shape(self, sample_context):
        # five of the six sample tickets carry the symptoms from the bundled dataset
        extent = sample_context.derive_extent(["EngineSeparation"])
        assert {o.name for o in extent} == {"ticket_2", "ticket_3", "ticket_4", "ticket_5", "ticket_6"}
