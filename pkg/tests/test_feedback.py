import json

import pytest

from akg import (
    FeatureSet,
    FeedbackEvent,
    FeedbackLedger,
    LedgerError,
    apply_accepted,
    build_lattice,
    get_relatedness,
    rank_concepts,
    recommend,
    replay,
)

EXACT = get_relatedness("exact")


def event(n: int, verdict: str = "accepted", **overrides) -> FeedbackEvent:
    base = dict(
        query_id=f"q{n}",
        ticket_id=f"resolved_{n}",
        hint_object="ticket_4",
        verdict=verdict,
        timestamp=f"2021-01-01T00:00:{n:02d}+00:00",
        features=("EngineSeparation", "HotStart", "FuelLeak"),
    )
    base.update(overrides)
    return FeedbackEvent(**base)


class TestLedger:
    def test_append_grows_by_one(self):
        ledger = FeedbackLedger()
        ledger.record(event(1))
        assert len(ledger) == 1

    def test_double_verdict_rejected(self):
        ledger = FeedbackLedger()
        ledger.record(event(1))
        with pytest.raises(LedgerError):
            ledger.record(event(1, verdict="rejected", timestamp="2021-01-01T00:00:05+00:00"))

    def test_same_query_different_hint_allowed(self):
        ledger = FeedbackLedger()
        ledger.record(event(1))
        ledger.record(event(2, query_id="q1", hint_object="ticket_6"))
        assert len(ledger) == 2

    def test_timestamps_must_be_monotone(self):
        ledger = FeedbackLedger()
        ledger.record(event(30))
        with pytest.raises(LedgerError):
            ledger.record(event(10))

    def test_bad_verdict_rejected(self):
        with pytest.raises(LedgerError):
            event(1, verdict="maybe")

    def test_jsonl_round_trip(self, tmp_path):
        path = tmp_path / "ledger.jsonl"
        ledger = FeedbackLedger()
        for n in range(3):
            ledger.record(event(n, verdict="accepted" if n % 2 == 0 else "rejected"))
        ledger.save(path)
        back = FeedbackLedger.load(path)
        assert list(back) == list(ledger)
        assert len(path.read_text().splitlines()) == 3

    def test_append_to_writes_line(self, tmp_path):
        path = tmp_path / "ledger.jsonl"
        ledger = FeedbackLedger()
        ledger.append_to(path, event(1))
        ledger.append_to(path, event(2))
        lines = [json.loads(line) for line in path.read_text().splitlines()]
        assert [e["query_id"] for e in lines] == ["q1", "q2"]

    def test_corrupt_line_reports_position(self, tmp_path):
        path = tmp_path / "ledger.jsonl"
        path.write_text('{"query_id": "q1"\n')
        with pytest.raises(LedgerError, match="line 1"):
            FeedbackLedger.load(path)

    def test_missing_file_is_empty_ledger(self, tmp_path):
        assert len(FeedbackLedger.load(tmp_path / "none.jsonl")) == 0


class TestApplyAccepted:
    def test_accepted_event_inserts_object(self, sample_context, sample_lattice):
        ledger = FeedbackLedger([event(1)])
        ctx2, lat2 = apply_accepted(ledger, sample_context, sample_lattice)
        assert "resolved_1" in ctx2
        rep = ctx2.object_representation("resolved_1")
        names = {a.name for a in rep.memberships}
        assert {"EngineSeparation", "HotStart", "FuelLeak", "Solution_ticket_4"} == names
        # intent at chi includes the query features
        intent = ctx2.derive_intent(["resolved_1"])
        assert {"EngineSeparation", "HotStart", "FuelLeak"} <= {a.name for a in intent}

    def test_learning_never_demotes_matching_rank(self, sample_context, sample_lattice):
        query = FeatureSet.of("EngineSeparation", "HotStart", "FuelLeak")
        before = rank_concepts(sample_lattice, query, EXACT)[0]
        ledger = FeedbackLedger([event(1)])
        ctx2, lat2 = apply_accepted(ledger, sample_context, sample_lattice)
        after = rank_concepts(lat2, query, EXACT)[0]
        assert after.f_measure >= before.f_measure
        best = lat2.concepts[after.concept]
        assert "resolved_1" in best.extent
        hints = recommend(lat2, query, EXACT, k=3)
        assert "resolved_1" in {h.object.name for h in hints}

    def test_zero_accepted_is_noop(self, sample_context, sample_lattice):
        ledger = FeedbackLedger([event(1, verdict="rejected")])
        ctx2, lat2 = apply_accepted(ledger, sample_context, sample_lattice)
        assert ctx2.to_dict() == sample_context.to_dict()
        assert lat2.to_dict() == sample_lattice.to_dict()

    def test_rejections_recorded_but_never_applied(self, sample_context, sample_lattice):
        ledger = FeedbackLedger()
        ledger.record(event(1, verdict="rejected"))
        ledger.record(event(2, verdict="rejected"))
        ctx2, _ = apply_accepted(ledger, sample_context, sample_lattice)
        assert len(ctx2) == len(sample_context)

    def test_application_is_idempotent(self, sample_context, sample_lattice):
        ledger = FeedbackLedger([event(1)])
        ctx2, lat2 = apply_accepted(ledger, sample_context, sample_lattice)
        ctx3, lat3 = apply_accepted(ledger, ctx2, lat2)
        assert ctx3.to_dict() == ctx2.to_dict()
        assert lat3.to_dict() == lat2.to_dict()

    def test_model_growth_keeps_existing_intents(self, sample_context, sample_lattice):
        ledger = FeedbackLedger([event(1), event(2, hint_object="ticket_6")])
        _, lat2 = apply_accepted(ledger, sample_context, sample_lattice)
        old_intents = {frozenset(a.name for a in c.intent) for c in sample_lattice.concepts.values()}
        # every old intent except the all-attribute bottom survives verbatim
        new_intents = {frozenset(a.name for a in c.intent) for c in lat2.concepts.values()}
        bottom = frozenset(a.name for a in sample_lattice.concepts[sample_lattice.bottom].intent)
        assert old_intents - {bottom} <= new_intents


class TestReplay:
    def test_replay_is_deterministic(self, sample_context, sample_lattice):
        ledger = FeedbackLedger(
            [event(1), event(2, verdict="rejected"), event(3, hint_object="ticket_6")]
        )
        a_ctx, a_lat = replay(ledger, sample_context, sample_lattice)
        b_ctx, b_lat = replay(ledger, sample_context, sample_lattice)
        assert a_ctx.content_hash() == b_ctx.content_hash()
        assert a_lat.to_json() == b_lat.to_json()

    def test_replay_equals_live_processing(self, sample_context, sample_lattice):
        events = [event(1), event(2, verdict="rejected"), event(3, hint_object="ticket_6")]
        # live: apply after each event
        ctx_live, lat_live = sample_context, sample_lattice
        partial = FeedbackLedger()
        for e in events:
            partial.record(e)
            ctx_live, lat_live = apply_accepted(partial, ctx_live, lat_live)
        # replay: one pass over the complete ledger
        ctx_replay, lat_replay = replay(FeedbackLedger(events), sample_context, sample_lattice)
        assert ctx_live.content_hash() == ctx_replay.content_hash()
        assert lat_live.to_json() == lat_replay.to_json()
