from datetime import datetime, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from svcwatch.errors import (
    BadFieldCount,
    DuplicatePid,
    DuplicateService,
    EmptyKey,
    EncodingError,
    MalformedHeader,
    NoPidToken,
    UnknownStartup,
    UnknownStatus,
)
from svcwatch.ingest import (
    EXPORT_COLUMNS,
    RawExportRow,
    normalize_startup,
    normalize_status,
    parse_export,
    parse_export_lenient,
    parse_tasklist,
    parse_tasklist_lenient,
    rows_from_records,
    serialize_export,
    serialize_tasklist,
    snapshots_from_rows,
    to_service_records,
)
from svcwatch.model import ProcessRecord, StartupType, Status

T0 = datetime(2026, 3, 1, tzinfo=timezone.utc)

HEADER = "\t".join(EXPORT_COLUMNS)


def export_bytes(*lines: str) -> bytes:
    return ("\n".join((HEADER,) + lines) + "\n").encode("utf-8")


SPOOLER_LINE = (
    "hostA\tSpooler\tPrint Spooler\tRunning\tAutomatic\tLocal System\t"
    "C:\\WINDOWS\\system32\\spoolsv.exe\tMicrosoft Corporation\tqueues print jobs"
)


class TestParseExport:
    def test_single_row(self):
        rows = parse_export(export_bytes(SPOOLER_LINE))
        assert len(rows) == 1
        row = rows[0]
        assert row.host == "hostA"
        assert row.service_key == "Spooler"
        assert row.display_name == "Print Spooler"
        assert row.status_raw == "Running"

    def test_header_only_is_empty(self):
        assert parse_export(export_bytes()) == []

    def test_crlf_accepted(self):
        data = export_bytes(SPOOLER_LINE).replace(b"\n", b"\r\n")
        assert len(parse_export(data)) == 1

    def test_header_case_insensitive(self):
        data = export_bytes(SPOOLER_LINE).replace(b"Host\t", b"HOST\t")
        assert len(parse_export(data)) == 1

    def test_wrong_header_rejected(self):
        bad = "Name\tOther\n".encode()
        with pytest.raises(MalformedHeader):
            parse_export(bad)

    def test_reordered_header_rejected(self):
        cols = list(EXPORT_COLUMNS)
        cols[0], cols[1] = cols[1], cols[0]
        data = ("\t".join(cols) + "\n" + SPOOLER_LINE + "\n").encode()
        with pytest.raises(MalformedHeader):
            parse_export(data)

    def test_field_count_error_carries_line_number(self):
        data = export_bytes(SPOOLER_LINE, "too\tfew\tfields")
        with pytest.raises(BadFieldCount) as exc_info:
            parse_export(data)
        assert exc_info.value.line_no == 3

    def test_empty_key_rejected(self):
        line = SPOOLER_LINE.replace("\tSpooler\t", "\t \t")
        with pytest.raises(EmptyKey) as exc_info:
            parse_export(export_bytes(line))
        assert exc_info.value.line_no == 2

    def test_non_utf8_rejected(self):
        with pytest.raises(EncodingError):
            parse_export(b"\xff\xfe\x00")

    def test_custom_delimiter(self):
        data = export_bytes(SPOOLER_LINE).replace(b"\t", b"|")
        rows = parse_export(data, delimiter="|")
        assert rows[0].service_key == "Spooler"

    def test_lenient_keeps_good_rows(self):
        data = export_bytes(SPOOLER_LINE, "broken line", SPOOLER_LINE.replace("hostA", "hostB"))
        result = parse_export_lenient(data)
        assert [r.host for r in result.rows] == ["hostA", "hostB"]
        assert len(result.errors) == 1
        assert isinstance(result.errors[0], BadFieldCount)

    def test_lenient_header_error_empties_result(self):
        result = parse_export_lenient(b"nope\n")
        assert result.rows == []
        assert len(result.errors) == 1


class TestSerializeExport:
    def test_roundtrip_fixed(self):
        rows = parse_export(export_bytes(SPOOLER_LINE))
        assert parse_export(serialize_export(rows)) == rows

    @given(
        st.lists(
            st.builds(
                RawExportRow,
                host=st.text(
                    alphabet=st.characters(blacklist_characters="\t\n\r", blacklist_categories=("Cs",)),
                    min_size=1,
                    max_size=12,
                ).map(str.strip).filter(bool),
                service_key=st.text(
                    alphabet=st.characters(blacklist_characters="\t\n\r", blacklist_categories=("Cs",)),
                    min_size=1,
                    max_size=12,
                ).filter(lambda s: s.strip()),
                display_name=st.text(
                    alphabet="abcDEF ghi", max_size=12
                ),
                status_raw=st.sampled_from(["Running", "Stopped", "Started", ""]),
                startup_raw=st.sampled_from(["Automatic", "Manual", "Disabled"]),
                logon_raw=st.sampled_from(["LocalSystem", "Local System", "CORP\\user"]),
                path=st.text(alphabet="abc:\\. ", max_size=20),
                manufacturer=st.text(alphabet="xyz ", max_size=10),
                description=st.text(alphabet="lmnop ", max_size=20),
            ),
            max_size=25,
        )
    )
    def test_roundtrip_generated(self, rows):
        assert parse_export(serialize_export(rows)) == rows

    def test_delimiter_in_field_rejected(self):
        row = RawExportRow("h", "svc\tkey", "", "", "", "", "", "", "")
        with pytest.raises(ValueError):
            serialize_export([row])


class TestNormalization:
    def test_status_vocabulary(self):
        assert normalize_status("Running") is Status.RUNNING
        assert normalize_status("started") is Status.RUNNING
        assert normalize_status("Stopped") is Status.STOPPED
        assert normalize_status("") is Status.STOPPED
        assert normalize_status("  ") is Status.STOPPED

    def test_unknown_status_rejected(self):
        with pytest.raises(UnknownStatus):
            normalize_status("Paused")

    def test_startup_vocabulary(self):
        assert normalize_startup("Automatic") is StartupType.AUTOMATIC
        assert normalize_startup("manual") is StartupType.MANUAL
        assert normalize_startup("DISABLED") is StartupType.DISABLED

    def test_unknown_startup_rejected(self):
        with pytest.raises(UnknownStartup):
            normalize_startup("Boot")


class TestToServiceRecords:
    def test_canonicalizes_keys(self):
        rows = parse_export(export_bytes(SPOOLER_LINE))
        recs = to_service_records(rows, observed_at=T0)
        assert recs[0].service_key == "spooler"
        assert recs[0].status is Status.RUNNING

    def test_duplicate_key_same_host_rejected(self):
        rows = parse_export(
            export_bytes(SPOOLER_LINE, SPOOLER_LINE.replace("Spooler", "SPOOLER"))
        )
        with pytest.raises(DuplicateService):
            to_service_records(rows, observed_at=T0)

    def test_same_key_different_hosts_allowed(self):
        rows = parse_export(
            export_bytes(SPOOLER_LINE, SPOOLER_LINE.replace("hostA", "hostB"))
        )
        assert len(to_service_records(rows, observed_at=T0)) == 2

    def test_snapshots_grouped_by_host(self):
        rows = parse_export(
            export_bytes(SPOOLER_LINE, SPOOLER_LINE.replace("hostA", "hostB"))
        )
        snaps = snapshots_from_rows(rows, observed_at=T0)
        assert [s.host for s in snaps] == ["hostA", "hostB"]
        assert all(s.observed_at == T0 for s in snaps)

    def test_rows_from_records_roundtrip(self):
        rows = parse_export(export_bytes(SPOOLER_LINE))
        recs = to_service_records(rows, observed_at=T0)
        back = rows_from_records(recs)
        assert back[0].host == "hostA"
        assert back[0].status_raw == "Running"
        assert parse_export(serialize_export(back)) == back


TASKLIST = """\
Image Name                   PID Services
========================= ====== =============================================
System Idle Process            0 N/A
System                         4 N/A
svchost.exe                  912 RpcSs
spoolsv.exe                 1448 Spooler
svchost.exe                 1080 AudioSrv, BITS, Browser
"""


class TestParseTasklist:
    def test_basic_shape(self):
        recs = parse_tasklist(TASKLIST.encode())
        assert len(recs) == 5
        by_pid = {r.pid: r for r in recs}
        assert by_pid[0].image_name == "System Idle Process"
        assert by_pid[0].services == ()
        assert by_pid[1448].services == ("Spooler",)
        assert by_pid[1080].services == ("AudioSrv", "BITS", "Browser")

    def test_continuation_lines_merge(self):
        text = (
            "Image Name  PID Services\n"
            "svchost.exe 1080 AudioSrv, BITS,\n"
            "   Browser, CryptSvc\n"
        )
        recs = parse_tasklist(text.encode())
        assert recs[0].services == ("AudioSrv", "BITS", "Browser", "CryptSvc")

    def test_multi_token_image_name(self):
        recs = parse_tasklist(b"System Idle Process 0 N/A\n")
        assert recs[0].image_name == "System Idle Process"
        assert recs[0].pid == 0

    def test_no_pid_token_rejected(self):
        with pytest.raises(NoPidToken):
            parse_tasklist(b"headerless junk without digits\n")

    def test_duplicate_pid_rejected(self):
        text = "a.exe 5 N/A\nb.exe 5 N/A\n"
        with pytest.raises(DuplicatePid) as exc_info:
            parse_tasklist(text.encode())
        assert exc_info.value.pid == 5

    def test_duplicate_services_within_record_deduped(self):
        recs = parse_tasklist(b"x.exe 7 Svc, Svc, Other\n")
        assert recs[0].services == ("Svc", "Other")

    def test_lenient_collects_errors(self):
        text = "a.exe 5 N/A\nno pid here\nb.exe 6 Svc\n"
        result = parse_tasklist_lenient(text.encode())
        assert [r.pid for r in result.rows] == [5, 6]
        assert len(result.errors) == 1
        assert isinstance(result.errors[0], NoPidToken)

    def test_serialize_roundtrip(self):
        recs = parse_tasklist(TASKLIST.encode())
        assert parse_tasklist(serialize_tasklist(recs)) == recs

    @given(
        st.lists(
            st.builds(
                ProcessRecord,
                image_name=st.sampled_from(
                    ["svchost.exe", "System Idle Process", "app server.exe", "x"]
                ),
                pid=st.integers(min_value=0, max_value=99999),
                services=st.lists(
                    st.text(alphabet="ABCdef123", min_size=1, max_size=10),
                    unique=True,
                    max_size=6,
                ).map(tuple),
            ),
            max_size=20,
            unique_by=lambda r: r.pid,
        )
    )
    def test_serialize_roundtrip_generated(self, recs):
        assert parse_tasklist(serialize_tasklist(recs)) == recs


class TestSampleTranscript:
    """The bundled sample transcript of a real workstation."""

    def test_record_count(self, transcript_bytes):
        assert len(parse_tasklist(transcript_bytes)) == 41

    def test_misspelled_service_preserved_verbatim(self, transcript_bytes):
        all_services = [
            s for rec in parse_tasklist(transcript_bytes) for s in rec.services
        ]
        assert "wuauerv" in all_services
        assert "wuauserv" not in all_services
