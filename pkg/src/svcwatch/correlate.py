"""Join service observations with process listings.

Multiple instances of one hosting image (the svchost pattern) group into a
ProcessGroup; service-to-process lookup is total over listed services and
rejects a key claimed by two PIDs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConflictingHost, DuplicatePid
from .model import HostSnapshot, ProcessRecord, ServiceRecord, Status, canonical_key


@dataclass(frozen=True)
class ProcessGroup:
    """All instances of one image name with the services each instance hosts."""

    image_name: str
    instances: tuple[tuple[int, tuple[str, ...]], ...]  # (pid, hosted keys)
    total_services: int


def group_by_image(processes: list[ProcessRecord]) -> list[ProcessGroup]:
    """One group per distinct image name; instances by pid, groups by name."""
    pids: set[int] = set()
    for proc in processes:
        if proc.pid in pids:
            raise DuplicatePid(proc.pid)
        pids.add(proc.pid)
    by_image: dict[str, list[ProcessRecord]] = {}
    for proc in processes:
        by_image.setdefault(proc.image_name, []).append(proc)
    groups = []
    for image in sorted(by_image):
        instances = tuple(
            (proc.pid, proc.services)
            for proc in sorted(by_image[image], key=lambda p: p.pid)
        )
        total = sum(len(services) for _, services in instances)
        groups.append(ProcessGroup(image, instances, total))
    return groups


def service_to_process(processes: list[ProcessRecord]) -> dict[str, tuple[str, int]]:
    """Canonical service key -> (image_name, pid) over every listed service."""
    mapping: dict[str, tuple[str, int]] = {}
    for proc in processes:
        for key in proc.services:
            ckey = canonical_key(key)
            if ckey in mapping:
                raise ConflictingHost(ckey, mapping[ckey][1], proc.pid)
            mapping[ckey] = (proc.image_name, proc.pid)
    return mapping


@dataclass(frozen=True)
class EnrichedSnapshot:
    """Service records paired with their hosting process, when known.

    unmapped_running flags running services absent from the process listing;
    listings and exports are collected at different instants, so this is a
    warning surface, not an error.
    """

    entries: tuple[tuple[ServiceRecord, tuple[str, int] | None], ...]
    unmapped_running: tuple[str, ...] = field(default=())


def enrich_snapshot(snapshot: HostSnapshot) -> EnrichedSnapshot:
    """Pair each record with its hosting (image, pid) from snapshot.processes.

    Without process data every pairing is absent and nothing is flagged.
    """
    if snapshot.processes is None:
        return EnrichedSnapshot(
            entries=tuple((rec, None) for rec in snapshot.records)
        )
    mapping = service_to_process(list(snapshot.processes))
    entries = []
    unmapped = []
    for rec in snapshot.records:
        key = canonical_key(rec.service_key)
        hosting = mapping.get(key)
        entries.append((rec, hosting))
        if hosting is None and rec.status is Status.RUNNING:
            unmapped.append(key)
    return EnrichedSnapshot(entries=tuple(entries), unmapped_running=tuple(unmapped))
