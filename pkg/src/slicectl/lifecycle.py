"""Role-gated design-time workflow for VFs, services, and whole slices.

The orchestration engine owns all catalog mutation. Every operation is
gated by the acting role, records exactly one audit event per outcome
(ok, denied, failed), and appends the event before touching state, so the
log always explains the catalog. Slice-level operations add the
abstraction the per-service workflow lacks: readiness derivation,
plan-driven instantiation with all-or-nothing rollback, and teardown.
"""

from __future__ import annotations

import hashlib
import math
import re
import time
from collections.abc import Callable
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import (
    EmptyService,
    InsufficientCapacity,
    InvalidTransition,
    PartialFailure,
    PlanInvalid,
    RoleDenied,
    SliceError,
    TemplateRejected,
    UncertifiedVf,
    UnknownEntity,
    UnknownService,
)
from .infra import Allocation, Infrastructure, IsolationClass
from .model import (
    Customer,
    FunctionComponent,
    FunctionKind,
    IsolationLevel,
    NetworkFunction,
    NetworkService,
    NetworkSlice,
    ResourceDemand,
    SliceProvider,
    SliceTemplate,
    VendorSoftwareProduct,
    aggregate_sla,
    derive_service_sla,
    with_sla,
)
from .placement import (
    CapabilityRequirement,
    PlacementPlan,
    PlacementPolicy,
    offered_capabilities,
    plan_placement,
    required_capabilities,
    verify_plan,
)
from .template import (
    Finding,
    ResourceKind,
    RuleSet,
    Severity,
    TemplateDocument,
    ValidationReport,
    merge_reports,
    parse_template,
    referenced_resources,
    resource_footprint,
    validate_environment,
    validate_template,
)

CATALOG_VERSION = 1


class Role(str, Enum):
    SUPERUSER = "superuser"
    DESIGNER = "designer"
    TESTER = "tester"
    GOVERNOR = "governor"
    OPERATOR = "operator"


class VfState(str, Enum):
    DRAFT = "draft"
    CERTIFIED = "certified"


class ServiceState(str, Enum):
    DESIGNED = "designed"
    TESTED = "tested"
    APPROVED = "approved"
    DISTRIBUTED = "distributed"
    INSTANTIATED = "instantiated"
    TERMINATED = "terminated"


class SliceState(str, Enum):
    DRAFTED = "drafted"
    READY = "ready"
    PARTIALLY_INSTANTIATED = "partially_instantiated"
    ACTIVE = "active"
    TERMINATED = "terminated"


class ArtifactKind(str, Enum):
    VF = "vf"
    SERVICE = "service"
    SLICE = "slice"


class Outcome(str, Enum):
    OK = "ok"
    DENIED = "denied"
    FAILED = "failed"


# Who may do what. Superuser is the union of all permissions and is checked
# separately.
PERMISSIONS: dict[str, frozenset[Role]] = {
    "onboard_vf": frozenset({Role.DESIGNER}),
    "certify_vf": frozenset({Role.TESTER}),
    "create_service": frozenset({Role.DESIGNER}),
    "test_service": frozenset({Role.TESTER}),
    "approve_service": frozenset({Role.GOVERNOR}),
    "distribute_service": frozenset({Role.OPERATOR}),
    "instantiate_service": frozenset({Role.OPERATOR}),
    "create_slice": frozenset({Role.DESIGNER}),
    "instantiate_slice": frozenset({Role.OPERATOR}),
    "teardown_slice": frozenset({Role.OPERATOR}),
}

# How each logged ok-action folds into lifecycle state during replay:
# action -> (artifact kind, resulting state, whether the action creates the
# record). Derived actions (slice_ready and friends) appear here too so the
# log alone reconstructs every record.
ACTION_EFFECTS: dict[str, tuple[ArtifactKind, object, bool]] = {
    "onboard_vf": (ArtifactKind.VF, VfState.DRAFT, True),
    "certify_vf": (ArtifactKind.VF, VfState.CERTIFIED, False),
    "create_service": (ArtifactKind.SERVICE, ServiceState.DESIGNED, True),
    "test_service": (ArtifactKind.SERVICE, ServiceState.TESTED, False),
    "approve_service": (ArtifactKind.SERVICE, ServiceState.APPROVED, False),
    "distribute_service": (ArtifactKind.SERVICE, ServiceState.DISTRIBUTED, False),
    "instantiate_service": (ArtifactKind.SERVICE, ServiceState.INSTANTIATED, False),
    "terminate_service": (ArtifactKind.SERVICE, ServiceState.TERMINATED, False),
    "create_slice": (ArtifactKind.SLICE, SliceState.DRAFTED, True),
    "slice_ready": (ArtifactKind.SLICE, SliceState.READY, False),
    "instantiate_slice": (ArtifactKind.SLICE, SliceState.ACTIVE, False),
    "partially_instantiate_slice": (
        ArtifactKind.SLICE,
        SliceState.PARTIALLY_INSTANTIATED,
        False,
    ),
    "teardown_slice": (ArtifactKind.SLICE, SliceState.TERMINATED, False),
}

_ADVANCE_STEPS: dict[str, tuple[str, ServiceState, ServiceState]] = {
    "test": ("test_service", ServiceState.DESIGNED, ServiceState.TESTED),
    "approve": ("approve_service", ServiceState.TESTED, ServiceState.APPROVED),
    "distribute": (
        "distribute_service",
        ServiceState.APPROVED,
        ServiceState.DISTRIBUTED,
    ),
}


@dataclass(frozen=True)
class AuditEvent:
    sequence_no: int
    actor: Role
    actor_id: str
    action: str
    subject: str
    timestamp: float
    outcome: Outcome


@dataclass
class LifecycleRecord:
    """Current state machine position of one artifact.

    history lists the sequence numbers of the ok events that produced the
    current state, in order.
    """

    subject: str
    kind: ArtifactKind
    state: VfState | ServiceState | SliceState
    history: list[int] = field(default_factory=list)


@dataclass
class Catalog:
    """Design-time entity store; persisted by the store module."""

    version: int = CATALOG_VERSION
    customers: dict[str, Customer] = field(default_factory=dict)
    providers: dict[str, SliceProvider] = field(default_factory=dict)
    vsps: dict[str, VendorSoftwareProduct] = field(default_factory=dict)
    functions: dict[str, NetworkFunction] = field(default_factory=dict)
    services: dict[str, NetworkService] = field(default_factory=dict)
    slices: dict[str, NetworkSlice] = field(default_factory=dict)
    slice_templates: dict[str, SliceTemplate] = field(default_factory=dict)
    records: dict[str, LifecycleRecord] = field(default_factory=dict)
    template_blobs: dict[str, str] = field(default_factory=dict)


def _slug(name: str) -> str:
    slug = re.sub(r"-+", "-", "".join(
        ch if ch.isalnum() else "-" for ch in name.lower()
    )).strip("-")
    return slug or "x"


class Orchestrator:
    """Serialized command interface over one catalog and its infrastructure."""

    def __init__(
        self,
        infra: Infrastructure | None = None,
        *,
        catalog: Catalog | None = None,
        rules: RuleSet | None = None,
        audit_sink: Callable[[AuditEvent], None] | None = None,
        atomic: bool = True,
        start_sequence: int = 1,
        last_timestamp: float = 0.0,
        clock: Callable[[], float] = time.time,
    ):
        self.infra = infra
        self.catalog = catalog if catalog is not None else Catalog()
        self.rules = rules if rules is not None else RuleSet()
        self.atomic = atomic
        self.events: list[AuditEvent] = []
        self._sink = audit_sink
        self._clock = clock
        self._next_seq = start_sequence
        self._last_ts = last_timestamp
        self._doc_cache: dict[str, TemplateDocument] = {}
        self._footprint_cache: dict[str, ResourceDemand] = {}

    # -- registration (catalog plumbing, no lifecycle records) -------------

    def register_customer(self, customer: Customer) -> None:
        self.catalog.customers[customer.id] = customer

    def register_provider(self, provider: SliceProvider) -> None:
        self.catalog.providers[provider.id] = provider

    def register_vsp(self, vsp: VendorSoftwareProduct) -> None:
        triple = (vsp.vendor_name, vsp.product_name, vsp.version)
        for other in self.catalog.vsps.values():
            if other.id != vsp.id and (
                other.vendor_name,
                other.product_name,
                other.version,
            ) == triple:
                raise ValueError(
                    f"vsp (vendor, product, version) {triple!r} already registered"
                )
        self.catalog.vsps[vsp.id] = vsp

    # -- audit plumbing -----------------------------------------------------

    def _emit(
        self, actor: Role, action: str, subject: str, outcome: Outcome
    ) -> AuditEvent:
        actor = Role(actor)
        now = self._clock()
        # Wall clocks may stall or step back; the log's instants must not.
        if now <= self._last_ts:
            now = math.nextafter(self._last_ts, math.inf)
        self._last_ts = now
        event = AuditEvent(
            sequence_no=self._next_seq,
            actor=actor,
            actor_id=actor.value,
            action=action,
            subject=subject,
            timestamp=now,
            outcome=outcome,
        )
        if self._sink is not None:
            # Write-ahead: the event is durable before the operation commits
            # or reports anything.
            self._sink(event)
        self.events.append(event)
        self._next_seq += 1
        return event

    def _gate(self, actor: Role, action: str, subject: str) -> None:
        actor = Role(actor)
        if actor is Role.SUPERUSER:
            return
        if actor not in PERMISSIONS[action]:
            self._emit(actor, action, subject, Outcome.DENIED)
            raise RoleDenied(f"role {actor.value!r} may not {action}")

    def _fail(self, actor: Role, action: str, subject: str, exc: SliceError):
        self._emit(actor, action, subject, Outcome.FAILED)
        raise exc

    def _record(self, kind: ArtifactKind, subject: str) -> LifecycleRecord:
        record = self.catalog.records.get(subject)
        if record is None or record.kind is not kind:
            raise UnknownEntity(f"no {kind.value} record for {subject!r}")
        return record

    def _fresh_id(self, base: str) -> str:
        if base not in self.catalog.records:
            return base
        n = 2
        while f"{base}-{n}" in self.catalog.records:
            n += 1
        return f"{base}-{n}"

    def _require_infra(self) -> Infrastructure:
        if self.infra is None:
            raise ValueError("this operation needs an attached infrastructure")
        return self.infra

    # -- VF onboarding ------------------------------------------------------

    def onboard_vf(
        self, actor: Role, vsp_id: str, template_text: str
    ) -> LifecycleRecord:
        """Validate and freeze one VF template under a vendor product.

        The template text is content-addressed into the catalog so the
        certified artifact can never drift from what was validated.
        """
        self._gate(actor, "onboard_vf", vsp_id)
        try:
            vsp = self.catalog.vsps.get(vsp_id)
            if vsp is None:
                raise UnknownEntity(f"unknown vendor software product {vsp_id!r}")
            doc = parse_template(template_text)
            report = merge_reports(
                validate_template(doc, self.rules),
                validate_environment(doc.environment, self.rules),
            )
            computes = doc.resources_of_kind(ResourceKind.COMPUTE)
            if not computes:
                report = merge_reports(
                    report,
                    ValidationReport.from_findings(
                        [
                            Finding(
                                rule_id="vf-structure",
                                severity=Severity.ERROR,
                                location=doc.name,
                                message=(
                                    "template defines no compute resources;"
                                    " a VF needs at least one component"
                                ),
                            )
                        ]
                    ),
                )
            if not report.accepted:
                raise TemplateRejected(report)
            footprint = resource_footprint(doc)
        except SliceError as exc:
            self._fail(actor, "onboard_vf", vsp_id, exc)

        digest = hashlib.sha256(template_text.encode("utf-8")).hexdigest()
        self.catalog.template_blobs[digest] = template_text
        self._doc_cache[digest] = doc
        self._footprint_cache[digest] = footprint
        vf_id = self._fresh_id(f"vf-{_slug(doc.name)}")
        components = []
        for compute in computes:
            port_names = tuple(
                referenced_resources(compute.properties.get("ports") or [])
            )
            components.append(
                FunctionComponent(
                    name=compute.name,
                    compute_demand=ResourceDemand(
                        vcpu=compute.properties["vcpu"],
                        ram=compute.properties["ram"],
                        storage=compute.properties["storage"],
                        ports=len(port_names),
                    ),
                    ports=port_names,
                )
            )
        function = NetworkFunction(
            id=vf_id,
            kind=FunctionKind.VIRTUAL,
            components=tuple(components),
            template_ref=digest,
        )
        event = self._emit(actor, "onboard_vf", vf_id, Outcome.OK)
        self.catalog.functions[vf_id] = function
        self.catalog.vsps[vsp_id] = replace(
            vsp, owned_resources=vsp.owned_resources | {vf_id}
        )
        record = LifecycleRecord(
            subject=vf_id,
            kind=ArtifactKind.VF,
            state=VfState.DRAFT,
            history=[event.sequence_no],
        )
        self.catalog.records[vf_id] = record
        return record

    def certify_vf(self, actor: Role, vf_id: str) -> LifecycleRecord:
        self._gate(actor, "certify_vf", vf_id)
        try:
            record = self._record(ArtifactKind.VF, vf_id)
            if record.state is not VfState.DRAFT:
                raise InvalidTransition(
                    f"vf {vf_id!r} is {record.state.value}, certify needs draft"
                )
        except SliceError as exc:
            self._fail(actor, "certify_vf", vf_id, exc)
        event = self._emit(actor, "certify_vf", vf_id, Outcome.OK)
        record.state = VfState.CERTIFIED
        record.history.append(event.sequence_no)
        return record

    # -- services -----------------------------------------------------------

    def create_service(
        self,
        actor: Role,
        name: str,
        vf_ids: list[str],
        *,
        service_id: str | None = None,
    ) -> LifecycleRecord:
        subject = service_id or name
        self._gate(actor, "create_service", subject)
        try:
            if not vf_ids:
                raise EmptyService("a service needs at least one network function")
            for vf_id in vf_ids:
                record = self.catalog.records.get(vf_id)
                if record is None or record.kind is not ArtifactKind.VF:
                    raise UnknownEntity(f"unknown vf {vf_id!r}")
                if record.state is not VfState.CERTIFIED:
                    raise UncertifiedVf(f"vf {vf_id!r} is not certified")
            if service_id is not None and service_id in self.catalog.records:
                raise InvalidTransition(f"id {service_id!r} already exists")
        except SliceError as exc:
            self._fail(actor, "create_service", subject, exc)
        sid = service_id or self._fresh_id(f"svc-{_slug(name)}")
        service = NetworkService(id=sid, name=name, functions=tuple(vf_ids))
        event = self._emit(actor, "create_service", sid, Outcome.OK)
        self.catalog.services[sid] = service
        record = LifecycleRecord(
            subject=sid,
            kind=ArtifactKind.SERVICE,
            state=ServiceState.DESIGNED,
            history=[event.sequence_no],
        )
        self.catalog.records[sid] = record
        return record

    def advance_service(
        self, actor: Role, service_id: str, action: str
    ) -> LifecycleRecord:
        """Advance one workflow step: test, approve, or distribute."""
        step = _ADVANCE_STEPS.get(action)
        if step is None:
            raise ValueError(
                f"unknown action {action!r}, expected one of"
                f" {sorted(_ADVANCE_STEPS)}"
            )
        audit_action, pre_state, post_state = step
        self._gate(actor, audit_action, service_id)
        try:
            record = self._record(ArtifactKind.SERVICE, service_id)
            if record.state is not pre_state:
                raise InvalidTransition(
                    f"service {service_id!r} is {record.state.value},"
                    f" {action} needs {pre_state.value}"
                )
        except SliceError as exc:
            self._fail(actor, audit_action, service_id, exc)
        event = self._emit(actor, audit_action, service_id, Outcome.OK)
        record.state = post_state
        record.history.append(event.sequence_no)
        if post_state is ServiceState.DISTRIBUTED:
            self._propagate_readiness(actor, service_id)
        return record

    def instantiate_service(
        self, actor: Role, service_id: str, tenant_id: str
    ) -> LifecycleRecord:
        """Instantiate one distributed service on a single tenant."""
        self._gate(actor, "instantiate_service", service_id)
        infra = self._require_infra()
        try:
            record = self._record(ArtifactKind.SERVICE, service_id)
            if record.state is not ServiceState.DISTRIBUTED:
                raise InvalidTransition(
                    f"service {service_id!r} is {record.state.value},"
                    f" instantiate needs distributed"
                )
            footprint = self.footprint_of_service(service_id)
            infra.allocate(tenant_id, service_id, footprint)
        except SliceError as exc:
            self._fail(actor, "instantiate_service", service_id, exc)
        event = self._emit(actor, "instantiate_service", service_id, Outcome.OK)
        record.state = ServiceState.INSTANTIATED
        record.history.append(event.sequence_no)
        return record

    # -- slices -------------------------------------------------------------

    def create_slice(
        self, actor: Role, slice: NetworkSlice, template: SliceTemplate
    ) -> LifecycleRecord:
        """Register a slice with its template; derives and attaches the SLA."""
        if template.slice_id != slice.id:
            raise ValueError(
                f"template belongs to {template.slice_id!r}, not {slice.id!r}"
            )
        self._gate(actor, "create_slice", slice.id)
        try:
            if slice.id in self.catalog.records:
                raise InvalidTransition(f"id {slice.id!r} already exists")
            for service_id in slice.services:
                record = self.catalog.records.get(service_id)
                if record is None or record.kind is not ArtifactKind.SERVICE:
                    raise UnknownService(
                        f"slice member {service_id!r} is not a catalog service"
                    )
            service_slas = {
                service_id: derive_service_sla(slice.profile, template, service_id)
                for service_id in slice.services
            }
            slice_sla = aggregate_sla(slice, service_slas)
        except SliceError as exc:
            self._fail(actor, "create_slice", slice.id, exc)
        stored = with_sla(slice, slice_sla)
        event = self._emit(actor, "create_slice", slice.id, Outcome.OK)
        self.catalog.slices[slice.id] = stored
        self.catalog.slice_templates[slice.id] = template
        record = LifecycleRecord(
            subject=slice.id,
            kind=ArtifactKind.SLICE,
            state=SliceState.DRAFTED,
            history=[event.sequence_no],
        )
        self.catalog.records[slice.id] = record
        self._check_slice_ready(actor, slice.id)
        return record

    def _propagate_readiness(self, actor: Role, service_id: str) -> None:
        for slice_id, slc in self.catalog.slices.items():
            if service_id in slc.services:
                self._check_slice_ready(actor, slice_id)

    def _check_slice_ready(self, actor: Role, slice_id: str) -> None:
        # Derived transition: a drafted slice becomes ready the moment its
        # last member service is distributed. Logged explicitly so replay
        # needs no catalog lookups.
        record = self.catalog.records[slice_id]
        if record.state is not SliceState.DRAFTED:
            return
        slc = self.catalog.slices[slice_id]
        for service_id in slc.services:
            member = self.catalog.records.get(service_id)
            if member is None or member.state is not ServiceState.DISTRIBUTED:
                return
        event = self._emit(actor, "slice_ready", slice_id, Outcome.OK)
        record.state = SliceState.READY
        record.history.append(event.sequence_no)

    def footprint_of_service(self, service_id: str) -> ResourceDemand:
        """Total footprint of a service's virtual functions.

        Physical functions are referenced, never instantiated, and
        contribute nothing.
        """
        service = self.catalog.services.get(service_id)
        if service is None:
            raise UnknownService(f"unknown service {service_id!r}")
        total = ResourceDemand()
        for vf_id in service.functions:
            function = self.catalog.functions.get(vf_id)
            if function is None:
                raise UnknownEntity(f"unknown function {vf_id!r}")
            if function.kind is FunctionKind.PHYSICAL:
                continue
            total = total + self._template_footprint(function.template_ref)
        return total

    def _template_footprint(self, digest: str) -> ResourceDemand:
        footprint = self._footprint_cache.get(digest)
        if footprint is None:
            doc = self._doc_cache.get(digest)
            if doc is None:
                text = self.catalog.template_blobs.get(digest)
                if text is None:
                    raise UnknownEntity(f"no template blob {digest!r}")
                doc = parse_template(text)
                self._doc_cache[digest] = doc
            footprint = resource_footprint(doc)
            self._footprint_cache[digest] = footprint
        return footprint

    def requirements_for(self, slice_id: str) -> list[CapabilityRequirement]:
        slc = self.catalog.slices.get(slice_id)
        if slc is None:
            raise UnknownEntity(f"unknown slice {slice_id!r}")
        template = self.catalog.slice_templates.get(slice_id)
        if template is None:
            raise UnknownEntity(f"slice {slice_id!r} has no slice template")
        footprints = {
            service_id: self.footprint_of_service(service_id)
            for service_id in slc.services
        }
        return required_capabilities(slc, template, footprints)

    def plan_slice(
        self, slice_id: str, policy: PlacementPolicy | None = None
    ) -> PlacementPlan:
        """Pure planning over the current infrastructure snapshot; no audit."""
        infra = self._require_infra()
        slc = self.catalog.slices.get(slice_id)
        if slc is None:
            raise UnknownEntity(f"unknown slice {slice_id!r}")
        requirements = self.requirements_for(slice_id)
        offers = offered_capabilities(infra)
        if not offers:
            return PlacementPlan(slice_id, (), 0.0, False)
        return plan_placement(slc, requirements, offers, infra, policy)

    def _isolation_conflict(
        self, tenant_id: str, isolation: IsolationLevel
    ) -> str | None:
        infra = self.infra
        if isolation is IsolationLevel.SHARED:
            return None
        if infra.allocations_on(tenant_id):
            return f"tenant {tenant_id!r} already hosts another service"
        if isolation is IsolationLevel.DEDICATED_HOST:
            host_id = infra.tenants[tenant_id].host
            host = infra.hosts[host_id]
            if host.isolation_class is not IsolationClass.DEDICATED:
                return f"host {host_id!r} is not a dedicated-class host"
            if len(infra.tenants_on_host(host_id)) != 1:
                return f"host {host_id!r} carries other tenants"
        return None

    def instantiate_slice(
        self, actor: Role, slice_id: str, plan: PlacementPlan
    ) -> LifecycleRecord:
        """Execute a placement plan service by service, in slice order.

        Structural plan defects are rejected up front as PlanInvalid.
        Capacity and isolation are discovered while executing, because the
        infrastructure may have drifted since planning; in atomic mode (the
        default) any mid-flight failure rolls back every allocation this
        call made and raises PartialFailure. In best-effort mode successful
        services are kept and the slice lands in partially_instantiated.
        """
        self._gate(actor, "instantiate_slice", slice_id)
        infra = self._require_infra()
        try:
            record = self._record(ArtifactKind.SLICE, slice_id)
            slc = self.catalog.slices[slice_id]
            if record.state is not SliceState.READY:
                raise InvalidTransition(
                    f"slice {slice_id!r} is {record.state.value},"
                    f" instantiate needs ready"
                )
            member_records = {
                service_id: self._record(ArtifactKind.SERVICE, service_id)
                for service_id in slc.services
            }
            lagging = [
                service_id
                for service_id, member in member_records.items()
                if member.state is not ServiceState.DISTRIBUTED
            ]
            if lagging:
                raise InvalidTransition(
                    f"member services not distributed: {lagging}"
                )
            requirements = self.requirements_for(slice_id)
            offers = offered_capabilities(infra)
            ok, violations = verify_plan(
                plan,
                requirements,
                offers,
                infra,
                slice=slc,
                check_resources=False,
            )
            if not ok:
                codes = sorted(
                    {
                        v.code
                        for v in violations
                        if v.severity is Severity.ERROR
                    }
                )
                raise PlanInvalid(f"plan rejected: {', '.join(codes)}")
        except SliceError as exc:
            self._fail(actor, "instantiate_slice", slice_id, exc)

        demand_of = {r.service: r.demand for r in requirements}
        tenant_of = {a.service: a.tenant for a in plan.assignments}
        isolation = slc.profile.degree_of_isolation
        placed: list[Allocation] = []
        failures: list[str] = []
        failure_reason = ""
        for service_id in slc.services:
            tenant_id = tenant_of[service_id]
            conflict = self._isolation_conflict(tenant_id, isolation)
            if conflict is None:
                try:
                    placed.append(
                        infra.allocate(tenant_id, service_id, demand_of[service_id])
                    )
                    continue
                except InsufficientCapacity as exc:
                    conflict = str(exc)
            failures.append(service_id)
            failure_reason = failure_reason or conflict
            if self.atomic:
                break

        if failures and self.atomic:
            # All-or-nothing: undo this invocation completely, then make the
            # failure durable.
            for allocation in reversed(placed):
                infra.release(allocation.id)
            self._emit(actor, "instantiate_service", failures[0], Outcome.FAILED)
            self._emit(actor, "instantiate_slice", slice_id, Outcome.FAILED)
            raise PartialFailure(failures[0], failure_reason)

        succeeded = {allocation.service for allocation in placed}
        if failures:
            for service_id in failures:
                self._emit(
                    actor, "instantiate_service", service_id, Outcome.FAILED
                )
            if not succeeded:
                self._emit(actor, "instantiate_slice", slice_id, Outcome.FAILED)
                return record
            for service_id in slc.services:
                if service_id in succeeded:
                    event = self._emit(
                        actor, "instantiate_service", service_id, Outcome.OK
                    )
                    member_records[service_id].state = ServiceState.INSTANTIATED
                    member_records[service_id].history.append(event.sequence_no)
            event = self._emit(
                actor, "partially_instantiate_slice", slice_id, Outcome.OK
            )
            record.state = SliceState.PARTIALLY_INSTANTIATED
            record.history.append(event.sequence_no)
            return record

        for service_id in slc.services:
            event = self._emit(actor, "instantiate_service", service_id, Outcome.OK)
            member_records[service_id].state = ServiceState.INSTANTIATED
            member_records[service_id].history.append(event.sequence_no)
        event = self._emit(actor, "instantiate_slice", slice_id, Outcome.OK)
        record.state = SliceState.ACTIVE
        record.history.append(event.sequence_no)
        return record

    def teardown_slice(self, actor: Role, slice_id: str) -> LifecycleRecord:
        """Release every member allocation and terminate the slice."""
        self._gate(actor, "teardown_slice", slice_id)
        infra = self._require_infra()
        try:
            record = self._record(ArtifactKind.SLICE, slice_id)
            if record.state not in (
                SliceState.ACTIVE,
                SliceState.PARTIALLY_INSTANTIATED,
            ):
                raise InvalidTransition(
                    f"slice {slice_id!r} is {record.state.value},"
                    f" teardown needs active or partially_instantiated"
                )
        except SliceError as exc:
            self._fail(actor, "teardown_slice", slice_id, exc)
        slc = self.catalog.slices[slice_id]
        members = set(slc.services)
        for allocation in [
            a for a in infra.allocations.values() if a.service in members
        ]:
            infra.release(allocation.id)
        for service_id in slc.services:
            member = self.catalog.records[service_id]
            if member.state is ServiceState.INSTANTIATED:
                event = self._emit(
                    actor, "terminate_service", service_id, Outcome.OK
                )
                member.state = ServiceState.TERMINATED
                member.history.append(event.sequence_no)
        event = self._emit(actor, "teardown_slice", slice_id, Outcome.OK)
        record.state = SliceState.TERMINATED
        record.history.append(event.sequence_no)
        return record
