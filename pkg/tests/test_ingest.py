import json
import logging

import pytest

from akg import (
    AttributeKind,
    IngestError,
    ObjectKind,
    PRESETS,
    TaxonomyDictionary,
    Ticket,
    build_context,
    build_lattice,
    extract_features,
    get_preset,
    load_dataset,
    ticket_to_context_row,
)
from akg.names import canonical_name


def make_ticket(**overrides) -> Ticket:
    base = dict(
        customer="Emirates",
        problem_description="Engine separation, Hot start, Fuel leak",
        configuration="Boeing 777-300ER",
        timestamp="2020-03-01T10:00:00Z",
        extras={"country": "USA"},
        ticket_id="ticket_x",
    )
    base.update(overrides)
    return Ticket(**base)


class TestTicket:
    def test_requires_core_fields(self):
        with pytest.raises(IngestError):
            make_ticket(problem_description="   ")
        with pytest.raises(IngestError):
            make_ticket(customer="")

    def test_requires_parseable_timestamp(self):
        with pytest.raises(IngestError):
            make_ticket(timestamp="yesterday")

    def test_zulu_suffix_accepted(self):
        assert make_ticket().parsed_timestamp().year == 2020


class TestTaxonomy:
    def test_longest_match_wins(self):
        tax = TaxonomyDictionary()
        tax.add("engine", "Engine", 0.9)
        tax.add("engine separation", "EngineSeparation", 1.0)
        hits = tax.match("total engine separation event")
        assert hits == [("EngineSeparation", 1.0)]

    def test_matching_is_case_and_punctuation_insensitive(self, taxonomy):
        hits = taxonomy.match("FUEL LEAK!! engine-separation")
        assert [h[0] for h in hits] == ["FuelLeak", "EngineSeparation"]

    def test_entry_order_irrelevant(self):
        entries = {"fuel leak": ("FuelLeak", 1.0), "engine separation": ("EngineSeparation", 1.0)}
        a = TaxonomyDictionary(entries)
        b = TaxonomyDictionary(dict(reversed(list(entries.items()))))
        text = "fuel leak, engine separation"
        assert a.match(text) == b.match(text)

    def test_rejects_bad_confidence(self):
        with pytest.raises(IngestError):
            TaxonomyDictionary().add("x", "X", 1.5)

    def test_load_plain_string_form(self, tmp_path):
        path = tmp_path / "tax.json"
        path.write_text(json.dumps({"hot start": "HotStart"}))
        tax = TaxonomyDictionary.load(path)
        assert tax.match("hot start") == [("HotStart", 1.0)]


class TestPresets:
    def test_invariant_kinds_present(self):
        assert AttributeKind.SYMPTOM in PRESETS["reactive"].included_kinds
        assert AttributeKind.TIME_BUCKET in PRESETS["planned"].included_kinds
        assert AttributeKind.CAUSE in PRESETS["proactive"].included_kinds
        assert AttributeKind.SENSOR_OBSERVATION in PRESETS["predictive"].included_kinds

    def test_presets_are_cumulative(self):
        order = ["reactive", "planned", "proactive", "predictive"]
        for lo, hi in zip(order, order[1:]):
            assert PRESETS[lo].included_kinds < PRESETS[hi].included_kinds

    def test_unknown_preset(self):
        with pytest.raises(IngestError):
            get_preset("clairvoyant")


class TestExtractFeatures:
    def test_keywords_plus_structured(self, taxonomy):
        fs = extract_features(make_ticket(), taxonomy)
        assert {"EngineSeparation", "HotStart", "FuelLeak"} <= fs.features
        assert "Model_Boeing777-300ER" in fs.features
        assert "Client_Emirates" in fs.features
        assert "Country_USA" in fs.features
        assert "Year_2020" in fs.features

    def test_no_dictionary_hits_leaves_structured(self, taxonomy):
        fs = extract_features(make_ticket(problem_description="nothing matches here"), taxonomy)
        assert fs.features == {"Model_Boeing777-300ER", "Client_Emirates", "Country_USA", "Year_2020"}

    def test_empty_taxonomy_warns(self, caplog):
        with caplog.at_level(logging.WARNING):
            fs = extract_features(make_ticket(), TaxonomyDictionary())
        assert any("taxonomy" in r.message for r in caplog.records)
        assert "Model_Boeing777-300ER" in fs.features

    def test_reactive_preset_excludes_year(self, taxonomy):
        fs = extract_features(make_ticket(), taxonomy, get_preset("reactive"))
        assert not any(f.startswith("Year_") for f in fs.features)
        assert "EngineSeparation" in fs.features

    def test_features_are_canonical(self, taxonomy):
        fs = extract_features(make_ticket(), taxonomy)
        for f in fs.features:
            assert canonical_name(f) == f


class TestContextRow:
    def test_table_row_one(self, taxonomy):
        ticket = Ticket(
            customer="Emirates",
            problem_description="Reverser inadverted deploy",
            configuration="Boeing 777-300ER",
            timestamp="2019-01-01T00:00:00+00:00",
            extras={"country": "USA"},
            ticket_id="ticket_1",
        )
        obj, memberships = ticket_to_context_row(ticket, taxonomy)
        assert obj.name == "ticket_1"
        assert obj.kind == ObjectKind.TICKET
        assert {a.name: m for a, m in memberships.items()} == {
            "ReverserInadvertedDeploy": 1.0,
            "Model_Boeing777-300ER": 1.0,
            "Country_USA": 1.0,
            "Year_2019": 1.0,
            "Client_Emirates": 1.0,
        }

    def test_confidence_passes_through(self):
        tax = TaxonomyDictionary({"odd vibration": ("OddVibration", 0.8)})
        obj, memberships = ticket_to_context_row(
            make_ticket(problem_description="strong odd vibration"), tax
        )
        by_name = {a.name: m for a, m in memberships.items()}
        assert by_name["OddVibration"] == 0.8

    def test_missing_id_rejected(self, taxonomy):
        with pytest.raises(IngestError):
            ticket_to_context_row(make_ticket(ticket_id=None), taxonomy)

    def test_attribute_kinds(self, taxonomy):
        _, memberships = ticket_to_context_row(make_ticket(), taxonomy)
        kinds = {a.name: a.kind for a in memberships}
        assert kinds["EngineSeparation"] == AttributeKind.SYMPTOM
        assert kinds["Model_Boeing777-300ER"] == AttributeKind.MODEL
        assert kinds["Client_Emirates"] == AttributeKind.CLIENT
        assert kinds["Country_USA"] == AttributeKind.COUNTRY
        assert kinds["Year_2020"] == AttributeKind.TIME_BUCKET


class TestDatasetLoading:
    def test_bundled_dataset_loads_five_tickets(self, table_csv):
        tickets = load_dataset(table_csv)
        assert len(tickets) == 5
        assert [t.ticket_id for t in tickets] == [f"ticket_{i}" for i in range(1, 6)]
        assert tickets[1].problem_description == "Fuel leak, Engine separation"
        assert tickets[1].extras["country"] == "USA"

    def test_empty_file_warns(self, tmp_path, caplog):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with caplog.at_level(logging.WARNING):
            assert load_dataset(path) == []
        assert any("empty" in r.message or "no tickets" in r.message for r in caplog.records)

    def test_bad_row_is_reported_and_skipped(self, tmp_path, caplog):
        path = tmp_path / "rows.csv"
        path.write_text(
            "model,selling_country,selling_year,client,symptoms\n"
            "A320,France,2018,AirFrance,Surge\n"
            "A321,Spain,not-a-year,Iberia,Fuel leak\n"
            "A330,Italy,2019,ITA,Hot start\n"
        )
        with caplog.at_level(logging.WARNING):
            tickets = load_dataset(path)
        assert len(tickets) == 2
        assert any("line 3" in r.message for r in caplog.records)

    def test_missing_columns_raise(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(IngestError):
            load_dataset(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(IngestError):
            load_dataset(tmp_path / "nope.csv")

    def test_json_dataset(self, tmp_path):
        path = tmp_path / "tickets.json"
        path.write_text(
            json.dumps(
                [
                    {
                        "customer": "EasyJet",
                        "problem_description": "bird ingestion",
                        "configuration": "A320neo",
                        "timestamp": "2021-06-01T00:00:00Z",
                    },
                    {"customer": "NoDescription"},
                ]
            )
        )
        tickets = load_dataset(path)
        assert len(tickets) == 1
        assert tickets[0].ticket_id == "ticket_1"


class TestBuildContext:
    def test_table_dataset_context(self, table_csv, taxonomy):
        tickets = load_dataset(table_csv)
        ctx = build_context(tickets, taxonomy, chi=0.6)
        assert len(ctx) == 5
        names = {a.name for a in ctx.attributes}
        assert {"FuelLeak", "EngineSeparation", "HotStart", "TailPipeFires", "ReverserInadvertedDeploy"} <= names
        extent = ctx.derive_extent(["EngineSeparation"])
        assert {o.name for o in extent} == {"ticket_2", "ticket_3", "ticket_4"}

    def test_lattice_from_ingested_rows_has_symptom_concept(self, table_csv, taxonomy):
        ctx = build_context(load_dataset(table_csv), taxonomy, chi=0.6)
        lat = build_lattice(ctx)
        concept = lat.concept_by_intent(["EngineSeparation"])
        assert concept is not None
        assert set(concept.extent) == {"ticket_2", "ticket_3", "ticket_4"}
