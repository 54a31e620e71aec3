"""Builders shared by the test modules: quick records, snapshots, and
seeded random fleets for the property suites."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone
from random import Random

from svcwatch.model import (
    LOCAL_SYSTEM,
    HostSnapshot,
    ServiceRecord,
    StartupType,
    Status,
    canonical_key,
)

T0 = datetime(2026, 3, 1, 12, 0, 0, tzinfo=timezone.utc)


def make_record(
    host: str,
    key: str,
    status: Status = Status.RUNNING,
    startup: StartupType = StartupType.AUTOMATIC,
    display: str | None = None,
) -> ServiceRecord:
    return ServiceRecord(
        host=host,
        service_key=canonical_key(key),
        display_name=display if display is not None else key,
        description=f"{key} test service",
        status=status,
        startup=startup,
        logon=LOCAL_SYSTEM,
        path=f"C:\\svc\\{canonical_key(key).replace(' ', '')}.exe",
        manufacturer="Test Vendor",
    )


def make_snapshot(host: str, records, observed_at: datetime = T0) -> HostSnapshot:
    snap = HostSnapshot(host=host, observed_at=observed_at, records=tuple(records))
    snap.validate()
    return snap


def random_snapshot(
    rng: Random, host: str, pool: list[str], observed_at: datetime
) -> HostSnapshot:
    count = rng.randint(0, len(pool))
    keys = rng.sample(pool, count)
    records = [
        make_record(
            host,
            key,
            status=rng.choice((Status.RUNNING, Status.STOPPED)),
            startup=rng.choice(tuple(StartupType)),
        )
        for key in keys
    ]
    return make_snapshot(host, records, observed_at)


def random_fleet(
    rng: Random, max_hosts: int = 50, max_services: int = 200
) -> list[HostSnapshot]:
    pool = [f"svc {i:03d}" for i in range(rng.randint(1, max_services))]
    hosts = rng.randint(0, max_hosts)
    out = []
    for i in range(hosts):
        out.append(
            random_snapshot(rng, f"host{i:02d}", pool, T0 + timedelta(minutes=i))
        )
    return out
