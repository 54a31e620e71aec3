import pytest

from svcwatch.classify import (
    Classification,
    KbEntry,
    KnowledgeBase,
    Verdict,
    export_kb,
    import_kb,
    policy_violations,
    seed_kb,
)
from svcwatch.errors import BadFieldCount, InvariantViolation
from svcwatch.model import StartupType, Status

from helpers import make_record, make_snapshot


def entry(key="Some Service", verdict=Verdict.KNOWN, **kw) -> KbEntry:
    return KbEntry(service_key=key, verdict=verdict, **kw)


class TestClassify:
    def test_absent_is_unknown(self, kb):
        assert kb.classify("anything") is Classification.UNKNOWN

    def test_verdicts_map_to_classifications(self, kb):
        kb.upsert(entry("Good", Verdict.KNOWN))
        kb.upsert(entry("Bad", Verdict.HOSTILE))
        assert kb.classify("Good") is Classification.KNOWN
        assert kb.classify("Bad") is Classification.HOSTILE

    def test_lookup_folds_case_and_space(self, kb):
        kb.upsert(entry("DHCP Client"))
        assert kb.classify("dhcp client") is Classification.KNOWN
        assert kb.classify("  DHCP CLIENT ") is Classification.KNOWN

    def test_colors(self):
        assert Classification.HOSTILE.color == "red"
        assert Classification.UNKNOWN.color == "yellow"
        assert Classification.KNOWN.color == "green"


class TestMutation:
    def test_upsert_returns_previous(self, kb):
        assert kb.upsert(entry("X")) is None
        previous = kb.upsert(entry("X", Verdict.HOSTILE))
        assert previous is not None
        assert previous.verdict is Verdict.KNOWN
        assert kb.classify("X") is Classification.HOSTILE

    def test_upsert_stamps_updated_at(self, kb):
        kb.upsert(entry("X"))
        assert kb.get("X").updated_at is not None

    def test_remove_absent_is_noop(self, kb):
        assert kb.remove("ghost") is None

    def test_remove_returns_entry(self, kb):
        kb.upsert(entry("X"))
        removed = kb.remove("x")
        assert removed is not None
        assert kb.classify("X") is Classification.UNKNOWN

    def test_empty_key_rejected(self):
        with pytest.raises(InvariantViolation):
            KbEntry(service_key="   ", verdict=Verdict.KNOWN)

    def test_entries_sorted_by_canonical_key(self, kb):
        kb.upsert(entry("zeta"))
        kb.upsert(entry("Alpha"))
        assert [e.service_key for e in kb.entries()] == ["Alpha", "zeta"]


class TestPersistence:
    def test_replay_after_reopen(self, tmp_path):
        kb = KnowledgeBase(tmp_path / "d")
        kb.upsert(entry("Keep"))
        kb.upsert(entry("Drop"))
        kb.remove("Drop")
        reopened = KnowledgeBase(tmp_path / "d")
        assert len(reopened) == 1
        assert reopened.classify("Keep") is Classification.KNOWN
        assert reopened.classify("Drop") is Classification.UNKNOWN


class TestSeed:
    def test_ten_entries(self, kb):
        seed_kb(kb)
        assert len(kb) == 10

    def test_idempotent(self, kb):
        seed_kb(kb)
        seed_kb(kb)
        assert len(kb) == 10

    def test_recommended_startups(self, kb):
        seed_kb(kb)
        for name in ("Telnet", "Alerter", "ClipBook"):
            assert kb.get(name).recommended_startup is StartupType.DISABLED
        for name in (
            "DNS Client",
            "DHCP Client",
            "Error Reporting",
            "Event Log",
            "Help",
            "Print Spooler",
            "Protected Storage",
        ):
            assert kb.get(name).recommended_startup is StartupType.AUTOMATIC

    def test_example_lookup(self, kb):
        seed_kb(kb)
        assert kb.classify("DHCP Client") is Classification.KNOWN


class TestPolicy:
    def test_no_recommendation_no_violation(self, kb):
        kb.upsert(entry("Free", recommended_startup=None))
        snap = make_snapshot("h1", [make_record("h1", "Free", startup=StartupType.MANUAL)])
        assert policy_violations(snap, kb) == []

    def test_matching_startup_no_violation(self, kb):
        kb.upsert(entry("Strict", recommended_startup=StartupType.AUTOMATIC))
        snap = make_snapshot("h1", [make_record("h1", "Strict", startup=StartupType.AUTOMATIC)])
        assert policy_violations(snap, kb) == []

    def test_deviation_reported(self, kb):
        seed_kb(kb)
        snap = make_snapshot(
            "h1",
            [
                make_record("h1", "Telnet", status=Status.RUNNING, startup=StartupType.MANUAL)
            ],
        )
        assert policy_violations(snap, kb) == [
            ("telnet", StartupType.MANUAL, StartupType.DISABLED)
        ]


class TestImportExport:
    def test_roundtrip(self, kb):
        seed_kb(kb)
        kb.upsert(entry("Extra", Verdict.HOSTILE, note="watch this"))
        data = export_kb(kb)
        other = KnowledgeBase()
        assert import_kb(other, data) == 11
        assert len(other) == 11
        assert other.classify("Extra") is Classification.HOSTILE
        assert other.get("Telnet").recommended_startup is StartupType.DISABLED

    def test_bad_verdict_rejected(self, kb):
        data = export_kb(kb) + b"X\tSideways\t\t\t\t\t\n"
        with pytest.raises(InvariantViolation):
            import_kb(kb, data)

    def test_bad_field_count_rejected(self, kb):
        data = export_kb(kb) + b"X\tKnown\n"
        with pytest.raises(BadFieldCount):
            import_kb(kb, data)

    def test_verdict_case_folded_on_import(self, kb):
        data = export_kb(kb) + b"X\thostile\t\t\t\t\t\n"
        import_kb(kb, data)
        assert kb.classify("X") is Classification.HOSTILE
