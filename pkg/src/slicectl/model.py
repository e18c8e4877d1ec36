"""Domain types of the slicing catalog.

Everything in this module is an immutable value object: construction runs
full invariant checking, so any instance that exists is valid. Mutable
runtime state (tenant usage, lifecycle positions) lives in the infra and
lifecycle modules instead. Invariant violations that amount to programming
errors raise ValueError; domain outcomes raise the dedicated exceptions
from errors.py.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import (
    DanglingReference,
    EmptyService,
    EmptySlice,
    InvalidProfile,
    MissingServiceSla,
    SlaViolatesProfile,
    UnknownService,
)

# Tolerance for float comparisons against profile bounds. Fixtures that sit
# exactly on a bound (latency budgets summing to the limit) must not be
# rejected by rounding noise.
EPSILON = 1e-9


class FunctionKind(str, Enum):
    VIRTUAL = "virtual"
    PHYSICAL = "physical"


class IsolationLevel(str, Enum):
    """Degree of isolation a profile demands, in increasing strictness."""

    SHARED = "shared"
    DEDICATED_TENANT = "dedicated_tenant"
    DEDICATED_HOST = "dedicated_host"


@dataclass(frozen=True)
class ResourceDemand:
    """Resource vector: vCPU count, RAM in MiB, storage in GiB, port count."""

    vcpu: float = 0
    ram: float = 0
    storage: float = 0
    ports: float = 0

    def __post_init__(self):
        for name in ("vcpu", "ram", "storage", "ports"):
            value = getattr(self, name)
            if value < 0:
                raise ValueError(f"demand field {name} must be >= 0, got {value}")

    def __add__(self, other: "ResourceDemand") -> "ResourceDemand":
        return ResourceDemand(
            self.vcpu + other.vcpu,
            self.ram + other.ram,
            self.storage + other.storage,
            self.ports + other.ports,
        )

    def __sub__(self, other: "ResourceDemand") -> "ResourceDemand":
        return ResourceDemand(
            self.vcpu - other.vcpu,
            self.ram - other.ram,
            self.storage - other.storage,
            self.ports - other.ports,
        )

    def fits_within(self, other: "ResourceDemand") -> bool:
        return (
            self.vcpu <= other.vcpu
            and self.ram <= other.ram
            and self.storage <= other.storage
            and self.ports <= other.ports
        )

    def max_with(self, other: "ResourceDemand") -> "ResourceDemand":
        return ResourceDemand(
            max(self.vcpu, other.vcpu),
            max(self.ram, other.ram),
            max(self.storage, other.storage),
            max(self.ports, other.ports),
        )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.vcpu, self.ram, self.storage, self.ports)


@dataclass(frozen=True)
class Customer:
    id: str
    name: str
    description: str = ""
    category: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValueError("customer id must be non-empty")
        if not self.name:
            raise ValueError("customer name must be non-empty")


@dataclass(frozen=True)
class SliceProvider:
    id: str
    name: str
    administrative_domains: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.id:
            raise ValueError("provider id must be non-empty")
        object.__setattr__(
            self, "administrative_domains", frozenset(self.administrative_domains)
        )
        if not self.administrative_domains:
            raise ValueError("provider needs at least one administrative domain")


@dataclass(frozen=True)
class VendorSoftwareProduct:
    """Vendor-owned product under which network functions are onboarded."""

    id: str
    vendor_name: str
    product_name: str
    version: tuple[int, int, int]
    owned_resources: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.id:
            raise ValueError("vsp id must be non-empty")
        version = tuple(self.version)
        if len(version) != 3 or any(
            not isinstance(part, int) or part < 0 for part in version
        ):
            raise ValueError(f"version must be a triple of ints >= 0, got {version!r}")
        object.__setattr__(self, "version", version)
        object.__setattr__(self, "owned_resources", frozenset(self.owned_resources))


@dataclass(frozen=True)
class ConnectionPoint:
    """A network port of one function; at most one attached virtual link."""

    name: str
    owner_function: str
    attached_link: str | None = None

    def __post_init__(self):
        if not self.name:
            raise ValueError("connection point name must be non-empty")

    @property
    def id(self) -> str:
        return f"{self.owner_function}/{self.name}"


@dataclass(frozen=True)
class VirtualLink:
    name: str
    endpoints: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "endpoints", frozenset(self.endpoints))
        if len(self.endpoints) < 2:
            raise ValueError("virtual link needs at least two endpoints")


@dataclass(frozen=True)
class FunctionComponent:
    """Sub-function of a network function (one deployable unit)."""

    name: str
    compute_demand: ResourceDemand
    ports: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.name:
            raise ValueError("component name must be non-empty")
        object.__setattr__(self, "ports", tuple(self.ports))


@dataclass(frozen=True)
class NetworkFunction:
    """A VNF or PNF; virtual functions carry exactly one frozen template."""

    id: str
    kind: FunctionKind
    components: tuple[FunctionComponent, ...]
    template_ref: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ValueError("network function needs at least one component")
        names = [c.name for c in self.components]
        if len(set(names)) != len(names):
            raise ValueError("component names must be unique within a function")
        if self.kind is FunctionKind.VIRTUAL and not self.template_ref:
            raise ValueError("virtual function must reference a template")
        if self.kind is FunctionKind.PHYSICAL and self.template_ref is not None:
            raise ValueError("physical function may not reference a template")


@dataclass(frozen=True)
class NetworkService:
    """Bundle of network functions, referenced by id."""

    id: str
    name: str
    functions: tuple[str, ...]
    virtual_links: tuple[VirtualLink, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "functions", tuple(self.functions))
        object.__setattr__(self, "virtual_links", tuple(self.virtual_links))
        if not self.functions:
            raise EmptyService(f"service {self.id!r} contains no functions")
        if len(set(self.functions)) != len(self.functions):
            raise ValueError("service function list contains duplicates")
        # Link endpoints are "<function id>/<port name>" and must point at
        # member functions.
        members = set(self.functions)
        for link in self.virtual_links:
            for endpoint in link.endpoints:
                owner = endpoint.split("/", 1)[0]
                if owner not in members:
                    raise DanglingReference(
                        f"link {link.name!r} endpoint {endpoint!r} does not"
                        f" resolve to a member function"
                    )


def _check_profile(profile: "ServiceProfile") -> None:
    if profile.end_to_end_latency <= 0:
        raise InvalidProfile(
            f"end_to_end_latency must be > 0, got {profile.end_to_end_latency}"
        )
    if profile.guaranteed_data_rate <= 0:
        raise InvalidProfile(
            f"guaranteed_data_rate must be > 0, got {profile.guaranteed_data_rate}"
        )
    if not 0 < profile.service_availability <= 1:
        raise InvalidProfile(
            f"service_availability must be in (0, 1], got {profile.service_availability}"
        )
    if profile.priority < 0:
        raise InvalidProfile(f"priority must be >= 0, got {profile.priority}")


@dataclass(frozen=True)
class ServiceProfile:
    """Customer-facing slice requirements (NSSP).

    The informational fields (coverage_area, user_density, ue_speed,
    charging_model) are stored verbatim and never constrain placement.
    """

    end_to_end_latency: float
    guaranteed_data_rate: float
    service_availability: float
    degree_of_isolation: IsolationLevel = IsolationLevel.SHARED
    coverage_area: str = ""
    priority: int = 0
    user_density: float = 0.0
    ue_speed: float = 0.0
    charging_model: str = ""

    def __post_init__(self):
        object.__setattr__(
            self, "degree_of_isolation", IsolationLevel(self.degree_of_isolation)
        )
        _check_profile(self)
        if self.service_availability == 1.0:
            # Analytically valid, physically unrealizable: keep it but warn.
            warnings.warn(
                "service availability of exactly 1.0 is physically unrealizable",
                stacklevel=2,
            )


@dataclass(frozen=True)
class Sla:
    """Committed contract values; composed per slice from service entries."""

    slice_id: str
    committed_latency: float
    committed_availability: float
    committed_data_rate: float
    penalties: str = ""

    def __post_init__(self):
        if self.committed_latency <= 0:
            raise ValueError("committed_latency must be > 0")
        if not 0 < self.committed_availability <= 1:
            raise ValueError("committed_availability must be in (0, 1]")
        if self.committed_data_rate <= 0:
            raise ValueError("committed_data_rate must be > 0")


@dataclass(frozen=True)
class NetworkSlice:
    """The slice aggregate: ordered services plus profile and derived SLA.

    chain_order states whether end-to-end traffic traverses the services in
    list order; it selects the latency composition rule and the placement
    objective.
    """

    id: str
    name: str
    customer: str
    provider: str
    services: tuple[str, ...]
    profile: ServiceProfile
    sla: Sla | None = None
    chain_order: bool = True

    def __post_init__(self):
        object.__setattr__(self, "services", tuple(self.services))
        if not self.services:
            raise EmptySlice(f"slice {self.id!r} contains no services")
        if len(set(self.services)) != len(self.services):
            raise ValueError("slice service list contains duplicates")


@dataclass(frozen=True)
class ServiceRequirement:
    """Per-service entry of a slice template."""

    latency_budget: float
    reliability: float
    data_rate: float
    demand: ResourceDemand = field(default_factory=ResourceDemand)

    def __post_init__(self):
        if self.latency_budget <= 0:
            raise ValueError("latency_budget must be > 0")
        if not 0 < self.reliability <= 1:
            raise ValueError("reliability must be in (0, 1]")
        if self.data_rate <= 0:
            raise ValueError("data_rate must be > 0")


@dataclass(frozen=True)
class SliceTemplate:
    """Technical descriptor mapping a slice to per-service guarantees.

    Build instances through make_slice_template, which checks coverage and
    budget consistency against the slice; direct construction only validates
    field-local invariants.
    """

    slice_id: str
    per_service_requirements: Mapping[str, ServiceRequirement]
    template_refs: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(
            self, "per_service_requirements", dict(self.per_service_requirements)
        )
        object.__setattr__(
            self,
            "template_refs",
            {k: tuple(v) for k, v in dict(self.template_refs).items()},
        )


def make_slice_template(
    slice: NetworkSlice,
    requirements: Mapping[str, ServiceRequirement],
    template_refs: Mapping[str, Sequence[str]] | None = None,
) -> SliceTemplate:
    """Validated constructor for SliceTemplate.

    Every member service needs an entry, entries may not reference
    non-members, and for a chain the latency budgets may not sum past the
    profile's end-to-end limit.
    """
    members = set(slice.services)
    for service_id in requirements:
        if service_id not in members:
            raise UnknownService(
                f"template entry {service_id!r} is not a member of slice {slice.id!r}"
            )
    missing = [s for s in slice.services if s not in requirements]
    if missing:
        raise MissingServiceSla(
            f"slice {slice.id!r} services without a template entry: {missing}"
        )
    if slice.chain_order:
        total_budget = sum(requirements[s].latency_budget for s in slice.services)
        if total_budget > slice.profile.end_to_end_latency + EPSILON:
            raise SlaViolatesProfile(
                f"latency budgets sum to {total_budget} ms, profile allows"
                f" {slice.profile.end_to_end_latency} ms"
            )
    refs = {k: tuple(v) for k, v in (template_refs or {}).items()}
    for service_id in refs:
        if service_id not in members:
            raise UnknownService(
                f"template_refs entry {service_id!r} is not a member of"
                f" slice {slice.id!r}"
            )
    return SliceTemplate(slice.id, dict(requirements), refs)


def compose_slice(
    customer: str,
    provider: str,
    services: Sequence[NetworkService],
    profile: ServiceProfile,
    *,
    name: str,
    slice_id: str | None = None,
    chain_order: bool = True,
) -> NetworkSlice:
    """Compose a slice from services, preserving their order; sla stays unset."""
    if not services:
        raise EmptySlice("a slice needs at least one service")
    _check_profile(profile)
    if slice_id is None:
        slice_id = "slice-" + "".join(
            ch if ch.isalnum() else "-" for ch in name.lower()
        ).strip("-")
    return NetworkSlice(
        id=slice_id,
        name=name,
        customer=customer,
        provider=provider,
        services=tuple(s.id for s in services),
        profile=profile,
        sla=None,
        chain_order=chain_order,
    )


def derive_service_sla(
    profile: ServiceProfile, template: SliceTemplate, service: str
) -> Sla:
    """Per-service SLA: identity mapping from the template entry."""
    entry = template.per_service_requirements.get(service)
    if entry is None:
        raise UnknownService(
            f"service {service!r} has no entry in the slice template"
        )
    return Sla(
        slice_id=template.slice_id,
        committed_latency=entry.latency_budget,
        committed_availability=entry.reliability,
        committed_data_rate=entry.data_rate,
    )


def aggregate_sla(slice: NetworkSlice, service_slas: Mapping[str, Sla]) -> Sla:
    """Compose the slice SLA from per-service SLAs.

    Chain composition: latency is the sum over services, availability the
    product, data rate the minimum. Without chain order the services operate
    side by side, so latency becomes the maximum; the other two rules are
    unchanged. The aggregate must be no weaker than the profile demands.
    """
    missing = [s for s in slice.services if s not in service_slas]
    if missing:
        raise MissingServiceSla(f"no SLA supplied for services: {missing}")
    slas = [service_slas[s] for s in slice.services]
    latencies = [s.committed_latency for s in slas]
    latency = sum(latencies) if slice.chain_order else max(latencies)
    availability = math.prod(s.committed_availability for s in slas)
    data_rate = min(s.committed_data_rate for s in slas)

    profile = slice.profile
    if latency > profile.end_to_end_latency + EPSILON:
        raise SlaViolatesProfile(
            f"aggregate latency {latency} ms exceeds profile limit"
            f" {profile.end_to_end_latency} ms"
        )
    if availability < profile.service_availability - EPSILON:
        raise SlaViolatesProfile(
            f"aggregate availability {availability} is below profile"
            f" {profile.service_availability}"
        )
    if data_rate < profile.guaranteed_data_rate - EPSILON:
        raise SlaViolatesProfile(
            f"aggregate data rate {data_rate} Mbit/s is below profile"
            f" {profile.guaranteed_data_rate} Mbit/s"
        )
    return Sla(
        slice_id=slice.id,
        committed_latency=latency,
        committed_availability=availability,
        committed_data_rate=data_rate,
    )


def with_sla(slice: NetworkSlice, sla: Sla) -> NetworkSlice:
    """Return a copy of the slice carrying the derived SLA."""
    if sla.slice_id != slice.id:
        raise ValueError(
            f"sla belongs to slice {sla.slice_id!r}, not {slice.id!r}"
        )
    return replace(slice, sla=sla)
