"""Simulated multi-tenant infrastructure.

Hosts carry capacity, tenants carry quotas and usage, physical links carry
latency. This is the offered-capability side of placement: allocation is
plain bookkeeping with a conservation invariant (used equals the sum of
live allocations), and inter-tenant latency is the shortest path over the
physical links.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import networkx as nx

from .errors import (
    InsufficientCapacity,
    UnknownAllocation,
    UnknownEntity,
    Unreachable,
)
from .model import ResourceDemand


class IsolationClass(str, Enum):
    SHARED = "shared"
    DEDICATED = "dedicated"


@dataclass(frozen=True)
class Host:
    id: str
    name: str
    capacity: ResourceDemand
    site: str = ""
    isolation_class: IsolationClass = IsolationClass.SHARED

    def __post_init__(self):
        if not self.id:
            raise ValueError("host id must be non-empty")
        object.__setattr__(
            self, "isolation_class", IsolationClass(self.isolation_class)
        )


@dataclass
class Tenant:
    """Isolated resource quota on one host; used tracks live allocations."""

    id: str
    name: str
    owner: str
    host: str
    quota: ResourceDemand
    used: ResourceDemand = field(default_factory=ResourceDemand)

    def __post_init__(self):
        if not self.id:
            raise ValueError("tenant id must be non-empty")
        if not self.used.fits_within(self.quota):
            raise ValueError(f"tenant {self.id!r}: used exceeds quota")

    @property
    def free(self) -> ResourceDemand:
        return self.quota - self.used


@dataclass(frozen=True)
class PhysicalLink:
    id: str
    endpoints: tuple[str, str]
    latency: float
    bandwidth: float

    def __post_init__(self):
        object.__setattr__(self, "endpoints", tuple(self.endpoints))
        if len(self.endpoints) != 2 or self.endpoints[0] == self.endpoints[1]:
            raise ValueError("link endpoints must be two distinct hosts")
        if self.latency <= 0:
            raise ValueError("link latency must be > 0")
        if self.bandwidth <= 0:
            raise ValueError("link bandwidth must be > 0")


@dataclass(frozen=True)
class Allocation:
    id: str
    tenant: str
    service: str
    demand: ResourceDemand


@dataclass
class Infrastructure:
    hosts: dict[str, Host] = field(default_factory=dict)
    tenants: dict[str, Tenant] = field(default_factory=dict)
    links: dict[str, PhysicalLink] = field(default_factory=dict)
    allocations: dict[str, Allocation] = field(default_factory=dict)
    next_allocation_id: int = 1
    _graph: nx.Graph | None = field(
        default=None, compare=False, repr=False, init=False
    )

    # -- construction ------------------------------------------------------

    def add_host(self, host: Host) -> None:
        if host.id in self.hosts:
            raise ValueError(f"host {host.id!r} already exists")
        self.hosts[host.id] = host
        self._graph = None

    def add_tenant(self, tenant: Tenant) -> None:
        if tenant.id in self.tenants:
            raise ValueError(f"tenant {tenant.id!r} already exists")
        host = self.hosts.get(tenant.host)
        if host is None:
            raise ValueError(f"tenant {tenant.id!r} references unknown host")
        # The quotas handed out on a host may not oversubscribe it.
        total = tenant.quota
        for other in self.tenants.values():
            if other.host == tenant.host:
                total = total + other.quota
        if not total.fits_within(host.capacity):
            raise ValueError(
                f"quotas on host {host.id!r} would exceed its capacity"
            )
        self.tenants[tenant.id] = tenant

    def add_link(self, link: PhysicalLink) -> None:
        if link.id in self.links:
            raise ValueError(f"link {link.id!r} already exists")
        for endpoint in link.endpoints:
            if endpoint not in self.hosts:
                raise ValueError(f"link {link.id!r} references unknown host")
        self.links[link.id] = link
        self._graph = None

    # -- queries -----------------------------------------------------------

    def tenants_on_host(self, host_id: str) -> list[Tenant]:
        return [t for t in self.tenants.values() if t.host == host_id]

    def allocations_on(self, tenant_id: str) -> list[Allocation]:
        return [a for a in self.allocations.values() if a.tenant == tenant_id]

    def usage_snapshot(self) -> dict[str, ResourceDemand]:
        return {tid: t.used for tid, t in self.tenants.items()}

    def tenant_latency(self, a: str, b: str) -> float:
        """Shortest-path latency between two tenants' hosts; 0 on one host."""
        ta = self.tenants.get(a)
        tb = self.tenants.get(b)
        if ta is None or tb is None:
            missing = a if ta is None else b
            raise UnknownEntity(f"unknown tenant {missing!r}")
        if ta.host == tb.host:
            return 0.0
        graph = self._latency_graph()
        try:
            return float(
                nx.shortest_path_length(graph, ta.host, tb.host, weight="latency")
            )
        except (nx.NodeNotFound, nx.NetworkXNoPath) as exc:
            raise Unreachable(
                f"no physical path between tenants {a!r} and {b!r}"
            ) from exc

    def _latency_graph(self) -> nx.Graph:
        if self._graph is None:
            graph = nx.Graph()
            graph.add_nodes_from(self.hosts)
            for link in self.links.values():
                u, v = link.endpoints
                # Parallel links: keep the faster one, Dijkstra never takes
                # the slower.
                if graph.has_edge(u, v):
                    if graph[u][v]["latency"] <= link.latency:
                        continue
                graph.add_edge(u, v, latency=link.latency)
            self._graph = graph
        return self._graph

    # -- allocation --------------------------------------------------------

    def allocate(
        self, tenant_id: str, service_id: str, demand: ResourceDemand
    ) -> Allocation:
        tenant = self.tenants.get(tenant_id)
        if tenant is None:
            raise UnknownEntity(f"unknown tenant {tenant_id!r}")
        if not (tenant.used + demand).fits_within(tenant.quota):
            raise InsufficientCapacity(
                f"tenant {tenant_id!r} cannot hold {demand} for"
                f" service {service_id!r}"
            )
        allocation = Allocation(
            id=f"alloc-{self.next_allocation_id}",
            tenant=tenant_id,
            service=service_id,
            demand=demand,
        )
        self.next_allocation_id += 1
        self.allocations[allocation.id] = allocation
        tenant.used = tenant.used + demand
        return allocation

    def release(self, allocation_id: str) -> None:
        allocation = self.allocations.pop(allocation_id, None)
        if allocation is None:
            raise UnknownAllocation(f"allocation {allocation_id!r} is not held")
        tenant = self.tenants[allocation.tenant]
        tenant.used = tenant.used - allocation.demand


def build_testbed(
    *,
    orch_cp_ms: float = 1.0,
    cp_dp_ms: float = 1.0,
    include_links: bool = True,
) -> Infrastructure:
    """The reference topology: three private tenants on three linked hosts.

    One tenant each for orchestration, control plane, and data plane. The
    quotas are sized so the bundled control-plane and data-plane service
    fixtures fit their intended tenants and nowhere else.
    """
    infra = Infrastructure()
    capacity = ResourceDemand(vcpu=8, ram=16384, storage=128, ports=16)
    for host_id in ("host-orch", "host-cp", "host-dp"):
        infra.add_host(Host(id=host_id, name=host_id, capacity=capacity, site="core"))
    infra.add_tenant(
        Tenant(
            id="tenant-orch",
            name="orchestration",
            owner="p-greyop",
            host="host-orch",
            quota=ResourceDemand(vcpu=2, ram=4096, storage=32, ports=8),
        )
    )
    infra.add_tenant(
        Tenant(
            id="tenant-cp",
            name="control-plane",
            owner="p-greyop",
            host="host-cp",
            quota=ResourceDemand(vcpu=6, ram=12288, storage=64, ports=10),
        )
    )
    infra.add_tenant(
        Tenant(
            id="tenant-dp",
            name="data-plane",
            owner="p-greyop",
            host="host-dp",
            quota=ResourceDemand(vcpu=4, ram=8192, storage=48, ports=8),
        )
    )
    if include_links:
        infra.add_link(
            PhysicalLink(
                id="link-orch-cp",
                endpoints=("host-orch", "host-cp"),
                latency=orch_cp_ms,
                bandwidth=10000,
            )
        )
        infra.add_link(
            PhysicalLink(
                id="link-cp-dp",
                endpoints=("host-cp", "host-dp"),
                latency=cp_dp_ms,
                bandwidth=10000,
            )
        )
    return infra
