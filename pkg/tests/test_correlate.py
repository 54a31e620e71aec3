import pytest

from svcwatch.correlate import (
    enrich_snapshot,
    group_by_image,
    service_to_process,
)
from svcwatch.errors import ConflictingHost, DuplicatePid
from svcwatch.ingest import parse_tasklist
from svcwatch.model import HostSnapshot, ProcessRecord, Status

from helpers import T0, make_record


class TestGroupByImage:
    def test_groups_and_totals(self):
        procs = [
            ProcessRecord("svchost.exe", 912, ("RpcSs",)),
            ProcessRecord("svchost.exe", 1080, ("A", "B", "C")),
            ProcessRecord("spoolsv.exe", 1448, ("Spooler",)),
        ]
        groups = {g.image_name: g for g in group_by_image(procs)}
        assert groups["svchost.exe"].instances == ((912, ("RpcSs",)), (1080, ("A", "B", "C")))
        assert groups["svchost.exe"].total_services == 4
        assert groups["spoolsv.exe"].total_services == 1

    def test_sorted_by_image_then_pid(self):
        procs = [
            ProcessRecord("z.exe", 2),
            ProcessRecord("a.exe", 9),
            ProcessRecord("a.exe", 3),
        ]
        groups = group_by_image(procs)
        assert [g.image_name for g in groups] == ["a.exe", "z.exe"]
        assert groups[0].instances == ((3, ()), (9, ()))

    def test_duplicate_pid_rejected(self):
        with pytest.raises(DuplicatePid):
            group_by_image([ProcessRecord("a.exe", 1), ProcessRecord("b.exe", 1)])

    def test_shared_host_pattern_from_sample(self, transcript_bytes):
        groups = {g.image_name: g for g in group_by_image(parse_tasklist(transcript_bytes))}
        shared = groups["svchost.exe"]
        assert len(shared.instances) == 5
        assert shared.total_services == 32
        assert [pid for pid, _ in shared.instances] == [912, 988, 1080, 1128, 1300]


class TestServiceToProcess:
    def test_mapping(self):
        procs = [
            ProcessRecord("svchost.exe", 1128, ("Dnscache",)),
            ProcessRecord("spoolsv.exe", 1448, ("Spooler",)),
        ]
        mapping = service_to_process(procs)
        assert mapping["dnscache"] == ("svchost.exe", 1128)
        assert mapping["spooler"] == ("spoolsv.exe", 1448)

    def test_conflicting_claim_rejected(self):
        procs = [
            ProcessRecord("a.exe", 1, ("Svc",)),
            ProcessRecord("b.exe", 2, ("SVC",)),
        ]
        with pytest.raises(ConflictingHost):
            service_to_process(procs)

    def test_sample_lookups(self, transcript_bytes):
        mapping = service_to_process(parse_tasklist(transcript_bytes))
        assert mapping["spooler"] == ("spoolsv.exe", 1448)
        assert mapping["dnscache"] == ("svchost.exe", 1128)


class TestEnrich:
    def test_without_processes_nothing_flagged(self):
        snap = HostSnapshot(
            host="h1", observed_at=T0, records=(make_record("h1", "A"),)
        )
        enriched = enrich_snapshot(snap)
        assert enriched.entries == ((snap.records[0], None),)
        assert enriched.unmapped_running == ()

    def test_running_unmapped_flagged(self):
        records = (
            make_record("h1", "Mapped", status=Status.RUNNING),
            make_record("h1", "Ghost", status=Status.RUNNING),
            make_record("h1", "Asleep", status=Status.STOPPED),
        )
        snap = HostSnapshot(
            host="h1",
            observed_at=T0,
            records=records,
            processes=(ProcessRecord("m.exe", 10, ("Mapped",)),),
        )
        enriched = enrich_snapshot(snap)
        assert enriched.unmapped_running == ("ghost",)
        pairings = dict((rec.service_key, hosting) for rec, hosting in enriched.entries)
        assert pairings["mapped"] == ("m.exe", 10)
        assert pairings["asleep"] is None
