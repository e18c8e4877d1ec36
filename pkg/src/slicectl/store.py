"""File persistence for catalog, inventory, audit log, and plan documents.

One directory holds one deployment: catalog.json (design-time entities),
inventory.yaml (infrastructure snapshot), audit.log (append-only JSON
lines). Snapshots are written atomically (temp file, fsync, rename), so an
interrupted save never corrupts the previous file. The audit file is the
write-ahead record of the lifecycle engine; replay_states folds it back
into lifecycle records.
"""

from __future__ import annotations

import contextlib
import hashlib
import json
import os
import tempfile
from collections.abc import Iterable, Mapping
from pathlib import Path

import yaml

from .errors import IoFailure, SchemaMismatch, SequenceGap, SliceError
from .infra import (
    Allocation,
    Host,
    Infrastructure,
    PhysicalLink,
    Tenant,
)
from .lifecycle import (
    ACTION_EFFECTS,
    CATALOG_VERSION,
    ArtifactKind,
    AuditEvent,
    Catalog,
    LifecycleRecord,
    Outcome,
    Role,
    ServiceState,
    SliceState,
    VfState,
)
from .model import (
    Customer,
    FunctionComponent,
    FunctionKind,
    NetworkFunction,
    NetworkService,
    NetworkSlice,
    ResourceDemand,
    ServiceProfile,
    ServiceRequirement,
    Sla,
    SliceProvider,
    SliceTemplate,
    VendorSoftwareProduct,
    VirtualLink,
)
from .placement import PlacementPlan, plan_from_mapping, plan_to_mapping

CATALOG_FILE = "catalog.json"
INVENTORY_FILE = "inventory.yaml"
AUDIT_FILE = "audit.log"

_STATE_ENUMS = {
    ArtifactKind.VF: VfState,
    ArtifactKind.SERVICE: ServiceState,
    ArtifactKind.SLICE: SliceState,
}


# -- low-level file plumbing ------------------------------------------------


def _atomic_write(path: Path, text: str) -> None:
    """Write text so readers see either the old file or the new, never less."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(
            dir=path.parent, prefix=path.name + ".", suffix=".tmp"
        )
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(text)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(tmp_name, path)
        except BaseException:
            with contextlib.suppress(OSError):
                os.unlink(tmp_name)
            raise
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _read_text(path: Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def _load_yaml(path: Path) -> object:
    text = _read_text(path)
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        where = ""
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            where = f" at line {mark.line + 1} column {mark.column + 1}"
        raise IoFailure(f"{path}: invalid YAML{where}: {exc}") from exc


# -- value codecs -------------------------------------------------------------


def _demand_to_dict(demand: ResourceDemand) -> dict:
    return {
        "vcpu": demand.vcpu,
        "ram": demand.ram,
        "storage": demand.storage,
        "ports": demand.ports,
    }


def _demand_from_dict(raw: Mapping) -> ResourceDemand:
    return ResourceDemand(
        vcpu=raw.get("vcpu", 0),
        ram=raw.get("ram", 0),
        storage=raw.get("storage", 0),
        ports=raw.get("ports", 0),
    )


def _profile_to_dict(profile: ServiceProfile) -> dict:
    return {
        "end_to_end_latency": profile.end_to_end_latency,
        "guaranteed_data_rate": profile.guaranteed_data_rate,
        "service_availability": profile.service_availability,
        "degree_of_isolation": profile.degree_of_isolation.value,
        "coverage_area": profile.coverage_area,
        "priority": profile.priority,
        "user_density": profile.user_density,
        "ue_speed": profile.ue_speed,
        "charging_model": profile.charging_model,
    }


def _profile_from_dict(raw: Mapping) -> ServiceProfile:
    return ServiceProfile(
        end_to_end_latency=raw["end_to_end_latency"],
        guaranteed_data_rate=raw["guaranteed_data_rate"],
        service_availability=raw["service_availability"],
        degree_of_isolation=raw.get("degree_of_isolation", "shared"),
        coverage_area=raw.get("coverage_area", ""),
        priority=raw.get("priority", 0),
        user_density=raw.get("user_density", 0.0),
        ue_speed=raw.get("ue_speed", 0.0),
        charging_model=raw.get("charging_model", ""),
    )


def _sla_to_dict(sla: Sla) -> dict:
    return {
        "slice_id": sla.slice_id,
        "committed_latency": sla.committed_latency,
        "committed_availability": sla.committed_availability,
        "committed_data_rate": sla.committed_data_rate,
        "penalties": sla.penalties,
    }


def _sla_from_dict(raw: Mapping) -> Sla:
    return Sla(
        slice_id=raw["slice_id"],
        committed_latency=raw["committed_latency"],
        committed_availability=raw["committed_availability"],
        committed_data_rate=raw["committed_data_rate"],
        penalties=raw.get("penalties", ""),
    )


# -- catalog codec ------------------------------------------------------------


def catalog_to_dict(catalog: Catalog) -> dict:
    return {
        "version": catalog.version,
        "customers": {
            c.id: {
                "id": c.id,
                "name": c.name,
                "description": c.description,
                "category": c.category,
            }
            for c in catalog.customers.values()
        },
        "providers": {
            p.id: {
                "id": p.id,
                "name": p.name,
                "administrative_domains": sorted(p.administrative_domains),
            }
            for p in catalog.providers.values()
        },
        "vsps": {
            v.id: {
                "id": v.id,
                "vendor_name": v.vendor_name,
                "product_name": v.product_name,
                "version": list(v.version),
                "owned_resources": sorted(v.owned_resources),
            }
            for v in catalog.vsps.values()
        },
        "functions": {
            f.id: {
                "id": f.id,
                "kind": f.kind.value,
                "components": [
                    {
                        "name": comp.name,
                        "compute_demand": _demand_to_dict(comp.compute_demand),
                        "ports": list(comp.ports),
                    }
                    for comp in f.components
                ],
                "template_ref": f.template_ref,
            }
            for f in catalog.functions.values()
        },
        "services": {
            s.id: {
                "id": s.id,
                "name": s.name,
                "functions": list(s.functions),
                "virtual_links": [
                    {"name": link.name, "endpoints": sorted(link.endpoints)}
                    for link in s.virtual_links
                ],
            }
            for s in catalog.services.values()
        },
        "slices": {
            s.id: {
                "id": s.id,
                "name": s.name,
                "customer": s.customer,
                "provider": s.provider,
                "services": list(s.services),
                "profile": _profile_to_dict(s.profile),
                "sla": None if s.sla is None else _sla_to_dict(s.sla),
                "chain_order": s.chain_order,
            }
            for s in catalog.slices.values()
        },
        "slice_templates": {
            t.slice_id: {
                "slice_id": t.slice_id,
                "per_service_requirements": {
                    service_id: {
                        "latency_budget": req.latency_budget,
                        "reliability": req.reliability,
                        "data_rate": req.data_rate,
                        "demand": _demand_to_dict(req.demand),
                    }
                    for service_id, req in t.per_service_requirements.items()
                },
                "template_refs": {
                    service_id: list(refs)
                    for service_id, refs in t.template_refs.items()
                },
            }
            for t in catalog.slice_templates.values()
        },
        "records": {
            r.subject: {
                "subject": r.subject,
                "kind": r.kind.value,
                "state": r.state.value,
                "history": list(r.history),
            }
            for r in catalog.records.values()
        },
        "template_blobs": dict(catalog.template_blobs),
    }


def catalog_from_dict(raw: Mapping) -> Catalog:
    catalog = Catalog(version=raw["version"])
    for key, entry in raw.get("customers", {}).items():
        catalog.customers[key] = Customer(
            id=entry["id"],
            name=entry["name"],
            description=entry.get("description", ""),
            category=entry.get("category", ""),
        )
    for key, entry in raw.get("providers", {}).items():
        catalog.providers[key] = SliceProvider(
            id=entry["id"],
            name=entry["name"],
            administrative_domains=frozenset(entry["administrative_domains"]),
        )
    for key, entry in raw.get("vsps", {}).items():
        catalog.vsps[key] = VendorSoftwareProduct(
            id=entry["id"],
            vendor_name=entry["vendor_name"],
            product_name=entry["product_name"],
            version=tuple(entry["version"]),
            owned_resources=frozenset(entry.get("owned_resources", ())),
        )
    for key, entry in raw.get("functions", {}).items():
        catalog.functions[key] = NetworkFunction(
            id=entry["id"],
            kind=FunctionKind(entry["kind"]),
            components=tuple(
                FunctionComponent(
                    name=comp["name"],
                    compute_demand=_demand_from_dict(comp["compute_demand"]),
                    ports=tuple(comp.get("ports", ())),
                )
                for comp in entry["components"]
            ),
            template_ref=entry.get("template_ref"),
        )
    for key, entry in raw.get("services", {}).items():
        catalog.services[key] = NetworkService(
            id=entry["id"],
            name=entry["name"],
            functions=tuple(entry["functions"]),
            virtual_links=tuple(
                VirtualLink(
                    name=link["name"], endpoints=frozenset(link["endpoints"])
                )
                for link in entry.get("virtual_links", ())
            ),
        )
    for key, entry in raw.get("slices", {}).items():
        sla_raw = entry.get("sla")
        catalog.slices[key] = NetworkSlice(
            id=entry["id"],
            name=entry["name"],
            customer=entry["customer"],
            provider=entry["provider"],
            services=tuple(entry["services"]),
            profile=_profile_from_dict(entry["profile"]),
            sla=None if sla_raw is None else _sla_from_dict(sla_raw),
            chain_order=entry.get("chain_order", True),
        )
    for key, entry in raw.get("slice_templates", {}).items():
        catalog.slice_templates[key] = SliceTemplate(
            slice_id=entry["slice_id"],
            per_service_requirements={
                service_id: ServiceRequirement(
                    latency_budget=req["latency_budget"],
                    reliability=req["reliability"],
                    data_rate=req["data_rate"],
                    demand=_demand_from_dict(req.get("demand", {})),
                )
                for service_id, req in entry["per_service_requirements"].items()
            },
            template_refs={
                service_id: tuple(refs)
                for service_id, refs in entry.get("template_refs", {}).items()
            },
        )
    for key, entry in raw.get("records", {}).items():
        kind = ArtifactKind(entry["kind"])
        catalog.records[key] = LifecycleRecord(
            subject=entry["subject"],
            kind=kind,
            state=_STATE_ENUMS[kind](entry["state"]),
            history=list(entry.get("history", ())),
        )
    catalog.template_blobs = dict(raw.get("template_blobs", {}))
    return catalog


def save_catalog(catalog: Catalog, path: str | Path) -> None:
    payload = json.dumps(catalog_to_dict(catalog), indent=2, sort_keys=True)
    _atomic_write(Path(path), payload + "\n")


def load_catalog(path: str | Path) -> Catalog:
    text = _read_text(Path(path))
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IoFailure(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}:"
            f" {exc.msg}"
        ) from exc
    if not isinstance(raw, dict):
        raise IoFailure(f"{path}: catalog root must be an object")
    version = raw.get("version")
    if version != CATALOG_VERSION:
        raise SchemaMismatch(
            f"{path}: catalog version {version!r}, this build reads"
            f" version {CATALOG_VERSION}"
        )
    try:
        catalog = catalog_from_dict(raw)
    except (KeyError, TypeError, ValueError, SliceError) as exc:
        raise IoFailure(f"{path}: corrupt catalog: {exc}") from exc
    for digest, blob in catalog.template_blobs.items():
        actual = hashlib.sha256(blob.encode("utf-8")).hexdigest()
        if actual != digest:
            raise IoFailure(
                f"{path}: template blob {digest[:12]} does not match its"
                f" content hash"
            )
    return catalog


# -- inventory codec ----------------------------------------------------------


def inventory_to_dict(infra: Infrastructure) -> dict:
    return {
        "hosts": [
            {
                "id": h.id,
                "name": h.name,
                "capacity": _demand_to_dict(h.capacity),
                "site": h.site,
                "isolation_class": h.isolation_class.value,
            }
            for h in sorted(infra.hosts.values(), key=lambda h: h.id)
        ],
        "tenants": [
            {
                "id": t.id,
                "name": t.name,
                "owner": t.owner,
                "host": t.host,
                "quota": _demand_to_dict(t.quota),
                "used": _demand_to_dict(t.used),
            }
            for t in sorted(infra.tenants.values(), key=lambda t: t.id)
        ],
        "links": [
            {
                "id": link.id,
                "endpoints": list(link.endpoints),
                "latency": link.latency,
                "bandwidth": link.bandwidth,
            }
            for link in sorted(infra.links.values(), key=lambda link: link.id)
        ],
        "allocations": [
            {
                "id": a.id,
                "tenant": a.tenant,
                "service": a.service,
                "demand": _demand_to_dict(a.demand),
            }
            for a in sorted(infra.allocations.values(), key=lambda a: a.id)
        ],
        "next_allocation_id": infra.next_allocation_id,
    }


def inventory_from_dict(raw: Mapping) -> Infrastructure:
    infra = Infrastructure()
    for entry in raw.get("hosts", ()):
        infra.add_host(
            Host(
                id=entry["id"],
                name=entry["name"],
                capacity=_demand_from_dict(entry["capacity"]),
                site=entry.get("site", ""),
                isolation_class=entry.get("isolation_class", "shared"),
            )
        )
    for entry in raw.get("tenants", ()):
        infra.add_tenant(
            Tenant(
                id=entry["id"],
                name=entry["name"],
                owner=entry["owner"],
                host=entry["host"],
                quota=_demand_from_dict(entry["quota"]),
                used=_demand_from_dict(entry.get("used", {})),
            )
        )
    for entry in raw.get("links", ()):
        infra.add_link(
            PhysicalLink(
                id=entry["id"],
                endpoints=tuple(entry["endpoints"]),
                latency=entry["latency"],
                bandwidth=entry["bandwidth"],
            )
        )
    for entry in raw.get("allocations", ()):
        allocation = Allocation(
            id=entry["id"],
            tenant=entry["tenant"],
            service=entry["service"],
            demand=_demand_from_dict(entry["demand"]),
        )
        if allocation.tenant not in infra.tenants:
            raise ValueError(
                f"allocation {allocation.id!r} references unknown tenant"
                f" {allocation.tenant!r}"
            )
        infra.allocations[allocation.id] = allocation
    infra.next_allocation_id = raw.get("next_allocation_id", 1)
    return infra


def save_inventory(infra: Infrastructure, path: str | Path) -> None:
    payload = yaml.safe_dump(inventory_to_dict(infra), sort_keys=False)
    _atomic_write(Path(path), payload)


def load_inventory(path: str | Path) -> Infrastructure:
    raw = _load_yaml(Path(path))
    if not isinstance(raw, dict):
        raise IoFailure(f"{path}: inventory root must be a mapping")
    try:
        infra = inventory_from_dict(raw)
    except (KeyError, TypeError, ValueError, SliceError) as exc:
        raise IoFailure(f"{path}: corrupt inventory: {exc}") from exc
    # Conservation: the stored used vectors are redundant with the
    # allocation list; any disagreement means the snapshot is corrupt.
    for tenant in infra.tenants.values():
        recomputed = ResourceDemand()
        for allocation in infra.allocations.values():
            if allocation.tenant == tenant.id:
                recomputed = recomputed + allocation.demand
        if recomputed != tenant.used:
            raise IoFailure(
                f"{path}: tenant {tenant.id!r} used vector"
                f" {tenant.used.as_tuple()} does not equal the sum of its"
                f" allocations {recomputed.as_tuple()}"
            )
    return infra


# -- audit log ----------------------------------------------------------------


def event_to_dict(event: AuditEvent) -> dict:
    return {
        "sequence_no": event.sequence_no,
        "actor": event.actor.value,
        "actor_id": event.actor_id,
        "action": event.action,
        "subject": event.subject,
        "timestamp": event.timestamp,
        "outcome": event.outcome.value,
    }


def event_from_dict(raw: Mapping) -> AuditEvent:
    return AuditEvent(
        sequence_no=raw["sequence_no"],
        actor=Role(raw["actor"]),
        actor_id=raw["actor_id"],
        action=raw["action"],
        subject=raw["subject"],
        timestamp=raw["timestamp"],
        outcome=Outcome(raw["outcome"]),
    )


class FileAuditLog:
    """Append-only JSON-lines sink enforcing the sequence discipline.

    The lifecycle engine calls append before it commits any state change,
    so after a crash the log is always at least as new as the catalog.
    """

    def __init__(self, path: str | Path, *, expected_next: int | None = None):
        self.path = Path(path)
        if expected_next is None:
            events = load_audit(self.path) if self.path.exists() else []
            expected_next = events[-1].sequence_no + 1 if events else 1
        self._next = expected_next

    @property
    def next_sequence(self) -> int:
        return self._next

    def append(self, event: AuditEvent) -> None:
        if event.sequence_no != self._next:
            raise SequenceGap(
                f"expected sequence {self._next}, got {event.sequence_no}"
            )
        line = json.dumps(event_to_dict(event))
        try:
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(line + "\n")
                handle.flush()
                os.fsync(handle.fileno())
        except OSError as exc:
            raise IoFailure(f"cannot append to {self.path}: {exc}") from exc
        self._next += 1


def load_audit(path: str | Path) -> list[AuditEvent]:
    """Load and validate the audit log: contiguous sequence from 1."""
    text = _read_text(Path(path))
    events: list[AuditEvent] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            events.append(event_from_dict(raw))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise IoFailure(f"{path}:{lineno}: corrupt audit record: {exc}") from exc
    for position, event in enumerate(events, start=1):
        if event.sequence_no != position:
            raise SequenceGap(
                f"{path}: expected sequence {position}, found"
                f" {event.sequence_no}"
            )
    return events


def replay_states(
    events: Iterable[AuditEvent],
    initial: Mapping[str, LifecycleRecord] | None = None,
) -> dict[str, LifecycleRecord]:
    """Fold ok events into lifecycle records.

    Replay over the full log from an empty catalog reconstructs the live
    records exactly; denied and failed events change nothing by design.
    """
    records: dict[str, LifecycleRecord] = {}
    if initial:
        records = {
            key: LifecycleRecord(
                subject=record.subject,
                kind=record.kind,
                state=record.state,
                history=list(record.history),
            )
            for key, record in initial.items()
        }
    for event in events:
        if event.outcome is not Outcome.OK:
            continue
        effect = ACTION_EFFECTS.get(event.action)
        if effect is None:
            continue
        kind, state, creates = effect
        if creates:
            records[event.subject] = LifecycleRecord(
                subject=event.subject,
                kind=kind,
                state=state,
                history=[event.sequence_no],
            )
            continue
        record = records.get(event.subject)
        if record is None or record.kind is not kind:
            continue
        record.state = state
        record.history.append(event.sequence_no)
    return records


# -- plan documents -----------------------------------------------------------


def save_plan(plan: PlacementPlan, path: str | Path) -> None:
    payload = yaml.safe_dump(plan_to_mapping(plan), sort_keys=False)
    _atomic_write(Path(path), payload)


def load_plan(path: str | Path) -> PlacementPlan:
    return plan_from_mapping(_load_yaml(Path(path)))
