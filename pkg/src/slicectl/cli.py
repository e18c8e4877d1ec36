"""Command-line front end.

Thin shell over the library: each subcommand delegates to exactly one
lifecycle, placement, or template operation, so anything the CLI can do is
reproducible through library calls. State lives in one catalog directory
(catalog.json, inventory.yaml, audit.log) selected with --catalog or the
SLICECTL_CATALOG environment variable; mutating commands hold an advisory
lock on it for the duration of the command.

Exit codes: 0 ok, 1 validation/denied/infeasible, 2 usage, 3 internal.
"""

from __future__ import annotations

import argparse
import contextlib
import fcntl
import json
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import yaml

from .errors import DanglingReference, IoFailure, SliceError, TemplateSyntaxError
from .infra import build_testbed
from .lifecycle import (
    ArtifactKind,
    Catalog,
    Orchestrator,
    Role,
    _slug,
)
from .model import (
    Customer,
    NetworkSlice,
    ResourceDemand,
    ServiceProfile,
    ServiceRequirement,
    SliceProvider,
    SliceTemplate,
    VendorSoftwareProduct,
    make_slice_template,
)
from .placement import (
    PlacementPolicy,
    Severity,
    Solver,
    offered_capabilities,
    verify_plan,
)
from .store import (
    AUDIT_FILE,
    CATALOG_FILE,
    INVENTORY_FILE,
    FileAuditLog,
    event_to_dict,
    load_audit,
    load_catalog,
    load_inventory,
    load_plan,
    save_catalog,
    save_inventory,
    save_plan,
)
from .template import (
    RuleSet,
    merge_reports,
    parse_template,
    validate_environment,
    validate_template,
)

ENV_CATALOG = "SLICECTL_CATALOG"


@dataclass
class CommandResult:
    """Outcome of one CLI invocation."""

    exit_code: int
    summary: str
    detail: dict | None = None
    machine: bool = False


class _Usage(Exception):
    """Bad invocation shape; maps to exit code 2."""


# -- catalog directory plumbing ----------------------------------------------


def _resolve_root(args) -> Path:
    root = args.catalog or os.environ.get(ENV_CATALOG)
    if not root:
        raise _Usage(
            f"no catalog directory: pass --catalog or set {ENV_CATALOG}"
        )
    return Path(root)


@contextlib.contextmanager
def _locked(root: Path):
    """Advisory exclusive lock for mutating commands; one writer at a time."""
    root.mkdir(parents=True, exist_ok=True)
    with open(root / ".lock", "w", encoding="utf-8") as handle:
        fcntl.flock(handle.fileno(), fcntl.LOCK_EX)
        try:
            yield
        finally:
            fcntl.flock(handle.fileno(), fcntl.LOCK_UN)


def _open_engine(root: Path, *, atomic: bool = True) -> Orchestrator:
    catalog_path = root / CATALOG_FILE
    catalog = load_catalog(catalog_path) if catalog_path.exists() else Catalog()
    inventory_path = root / INVENTORY_FILE
    infra = load_inventory(inventory_path) if inventory_path.exists() else None
    audit_path = root / AUDIT_FILE
    events = load_audit(audit_path) if audit_path.exists() else []
    log = FileAuditLog(audit_path, expected_next=len(events) + 1)
    return Orchestrator(
        infra,
        catalog=catalog,
        audit_sink=log.append,
        atomic=atomic,
        start_sequence=len(events) + 1,
        last_timestamp=events[-1].timestamp if events else 0.0,
    )


def _save_state(root: Path, engine: Orchestrator) -> None:
    save_catalog(engine.catalog, root / CATALOG_FILE)
    if engine.infra is not None:
        save_inventory(engine.infra, root / INVENTORY_FILE)


def _require_infra(engine: Orchestrator) -> None:
    if engine.infra is None:
        raise IoFailure("no inventory in this catalog; run init-testbed first")


def _read_file(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def _fixture_text(name: str) -> str:
    return (
        resources.files("slicectl").joinpath("fixtures").joinpath(name)
    ).read_text(encoding="utf-8")


# -- slice descriptors ---------------------------------------------------------


def _slice_from_descriptor(
    raw: object, engine: Orchestrator
) -> tuple[NetworkSlice, SliceTemplate]:
    """Build slice and template from a descriptor document.

    Optional customer/provider sections are registered as a side effect so
    a descriptor is self-contained.
    """
    if not isinstance(raw, dict):
        raise IoFailure("slice descriptor must be a mapping")
    try:
        slice_raw = raw["slice"]
        profile_raw = raw["profile"]
        requirements_raw = raw["requirements"]
        customer_id = slice_raw["customer"]
        provider_id = slice_raw["provider"]
        name = slice_raw["name"]
        profile = ServiceProfile(**profile_raw)
        requirements = {
            service_id: ServiceRequirement(
                latency_budget=entry["latency_budget"],
                reliability=entry["reliability"],
                data_rate=entry["data_rate"],
                demand=ResourceDemand(**entry.get("demand", {})),
            )
            for service_id, entry in requirements_raw.items()
        }
        slc = NetworkSlice(
            id=slice_raw.get("id") or f"slice-{_slug(name)}",
            name=name,
            customer=customer_id,
            provider=provider_id,
            services=tuple(slice_raw["services"]),
            profile=profile,
            chain_order=slice_raw.get("chain_order", True),
        )
        customer_raw = raw.get("customer")
        if isinstance(customer_raw, dict):
            engine.register_customer(
                Customer(
                    id=customer_id,
                    name=customer_raw.get("name", customer_id),
                    description=customer_raw.get("description", ""),
                    category=customer_raw.get("category", ""),
                )
            )
        provider_raw = raw.get("provider")
        if isinstance(provider_raw, dict):
            engine.register_provider(
                SliceProvider(
                    id=provider_id,
                    name=provider_raw.get("name", provider_id),
                    administrative_domains=frozenset(
                        provider_raw.get("administrative_domains", ("default",))
                    ),
                )
            )
    except (KeyError, TypeError) as exc:
        raise IoFailure(f"bad slice descriptor: {exc!r}") from exc
    template = make_slice_template(slc, requirements)
    return slc, template


# -- subcommand handlers --------------------------------------------------------


def _cmd_lint_template(args) -> CommandResult:
    rule_kwargs: dict = {"count_names": args.count_names}
    if args.env_limit is not None:
        rule_kwargs["env_char_limit"] = args.env_limit
    rules = RuleSet(**rule_kwargs)
    try:
        doc = parse_template(_read_file(args.template))
    except (TemplateSyntaxError, DanglingReference) as exc:
        return CommandResult(
            1,
            f"{type(exc).__name__}: {exc}",
            {"verdict": "rejected", "error": str(exc)},
            args.json,
        )
    report = merge_reports(
        validate_template(doc, rules),
        validate_environment(doc.environment, rules),
    )
    lines = [f"{doc.name}: {report.verdict.value}"]
    for finding in report.findings:
        lines.append(
            f"  [{finding.severity.value}] {finding.rule_id}"
            f" at {finding.location}: {finding.message}"
        )
    detail = {
        "template": doc.name,
        "verdict": report.verdict.value,
        "findings": [
            {
                "rule_id": f.rule_id,
                "severity": f.severity.value,
                "location": f.location,
                "message": f.message,
            }
            for f in report.findings
        ],
    }
    return CommandResult(
        0 if report.accepted else 1, "\n".join(lines), detail, args.json
    )


def _cmd_onboard_vf(args) -> CommandResult:
    root = _resolve_root(args)
    text = _read_file(args.template)
    with _locked(root):
        engine = _open_engine(root)
        if args.vsp not in engine.catalog.vsps:
            version = tuple(int(part) for part in args.version.split("."))
            engine.register_vsp(
                VendorSoftwareProduct(
                    id=args.vsp,
                    vendor_name=args.vendor,
                    product_name=args.product or args.vsp,
                    version=version,
                )
            )
        record = engine.onboard_vf(Role(args.role), args.vsp, text)
        _save_state(root, engine)
    return CommandResult(
        0,
        f"onboarded {record.subject} under {args.vsp} ({record.state.value})",
        {"vf": record.subject, "state": record.state.value},
        args.json,
    )


def _cmd_certify_vf(args) -> CommandResult:
    root = _resolve_root(args)
    with _locked(root):
        engine = _open_engine(root)
        record = engine.certify_vf(Role(args.role), args.vf)
        _save_state(root, engine)
    return CommandResult(
        0,
        f"{record.subject} is now {record.state.value}",
        {"vf": record.subject, "state": record.state.value},
        args.json,
    )


def _cmd_create_service(args) -> CommandResult:
    root = _resolve_root(args)
    with _locked(root):
        engine = _open_engine(root)
        record = engine.create_service(
            Role(args.role), args.name, args.vf, service_id=args.id
        )
        _save_state(root, engine)
    return CommandResult(
        0,
        f"created service {record.subject} ({record.state.value})",
        {"service": record.subject, "state": record.state.value},
        args.json,
    )


def _make_advance_handler(action: str):
    def handler(args) -> CommandResult:
        root = _resolve_root(args)
        with _locked(root):
            engine = _open_engine(root)
            record = engine.advance_service(Role(args.role), args.service, action)
            _save_state(root, engine)
        return CommandResult(
            0,
            f"{record.subject} is now {record.state.value}",
            {"service": record.subject, "state": record.state.value},
            args.json,
        )

    return handler


def _cmd_create_slice(args) -> CommandResult:
    root = _resolve_root(args)
    raw = yaml.safe_load(_read_file(args.descriptor))
    with _locked(root):
        engine = _open_engine(root)
        slc, template = _slice_from_descriptor(raw, engine)
        record = engine.create_slice(Role(args.role), slc, template)
        _save_state(root, engine)
    stored = engine.catalog.slices[slc.id]
    return CommandResult(
        0,
        f"created slice {record.subject} ({record.state.value}),"
        f" committed latency {stored.sla.committed_latency} ms",
        {
            "slice": record.subject,
            "state": record.state.value,
            "sla": {
                "committed_latency": stored.sla.committed_latency,
                "committed_availability": stored.sla.committed_availability,
                "committed_data_rate": stored.sla.committed_data_rate,
            },
        },
        args.json,
    )


def _cmd_place_slice(args) -> CommandResult:
    root = _resolve_root(args)
    with _locked(root):
        engine = _open_engine(root)
        _require_infra(engine)
        policy = (
            PlacementPolicy(solver=Solver(args.solver)) if args.solver else None
        )
        plan = engine.plan_slice(args.slice, policy)
        if not plan.feasible:
            return CommandResult(
                1,
                f"no feasible placement for {args.slice}",
                {"slice": args.slice, "feasible": False},
                args.json,
            )
        # Independent check: the verifier shares no code with the solver, so
        # a plan that fails here means the solver is wrong, not the input.
        requirements = engine.requirements_for(args.slice)
        offers = offered_capabilities(engine.infra)
        ok, violations = verify_plan(
            plan,
            requirements,
            offers,
            engine.infra,
            slice=engine.catalog.slices[args.slice],
        )
        if not ok:
            codes = sorted(
                v.code for v in violations if v.severity is Severity.ERROR
            )
            raise RuntimeError(
                f"solver produced a plan the verifier rejects: {codes}"
            )
        out = Path(args.out) if args.out else root / f"plan-{args.slice}.yaml"
        save_plan(plan, out)
    lines = [f"plan for {args.slice}: e2e latency {plan.e2e_latency} ms"]
    for assignment in plan.assignments:
        lines.append(f"  {assignment.service} -> {assignment.tenant}")
    for violation in violations:
        if violation.severity is Severity.WARNING:
            lines.append(f"  warning [{violation.code}]: {violation.message}")
    lines.append(f"plan written to {out}")
    return CommandResult(
        0,
        "\n".join(lines),
        {
            "slice": args.slice,
            "e2e_latency": plan.e2e_latency,
            "assignments": {
                a.service: a.tenant for a in plan.assignments
            },
            "plan_file": str(out),
            "warnings": [
                {"code": v.code, "message": v.message}
                for v in violations
                if v.severity is Severity.WARNING
            ],
        },
        args.json,
    )


def _cmd_instantiate_slice(args) -> CommandResult:
    root = _resolve_root(args)
    plan = load_plan(args.plan)
    with _locked(root):
        engine = _open_engine(root, atomic=not args.best_effort)
        _require_infra(engine)
        record = engine.instantiate_slice(Role(args.role), args.slice, plan)
        _save_state(root, engine)
    lines = [f"slice {record.subject} is now {record.state.value}"]
    for assignment in plan.assignments:
        lines.append(f"  {assignment.service} on {assignment.tenant}")
    return CommandResult(
        0,
        "\n".join(lines),
        {"slice": record.subject, "state": record.state.value},
        args.json,
    )


def _cmd_teardown_slice(args) -> CommandResult:
    root = _resolve_root(args)
    with _locked(root):
        engine = _open_engine(root)
        _require_infra(engine)
        record = engine.teardown_slice(Role(args.role), args.slice)
        _save_state(root, engine)
    return CommandResult(
        0,
        f"slice {record.subject} is now {record.state.value}",
        {"slice": record.subject, "state": record.state.value},
        args.json,
    )


def _cmd_status(args) -> CommandResult:
    root = _resolve_root(args)
    engine = _open_engine(root)
    catalog = engine.catalog
    if args.subject:
        record = catalog.records.get(args.subject)
        if record is None:
            return CommandResult(
                1,
                f"no record for {args.subject!r}",
                {"subject": args.subject},
                args.json,
            )
        return CommandResult(
            0,
            f"{record.subject}: {record.kind.value} in state {record.state.value}",
            {
                "subject": record.subject,
                "kind": record.kind.value,
                "state": record.state.value,
                "history": list(record.history),
            },
            args.json,
        )
    lines = []
    detail: dict = {"records": {}, "tenants": {}}
    for kind in (ArtifactKind.VF, ArtifactKind.SERVICE, ArtifactKind.SLICE):
        members = [
            r for r in catalog.records.values() if r.kind is kind
        ]
        if not members:
            continue
        lines.append(f"{kind.value}:")
        for record in sorted(members, key=lambda r: r.subject):
            lines.append(f"  {record.subject}: {record.state.value}")
            detail["records"][record.subject] = {
                "kind": record.kind.value,
                "state": record.state.value,
            }
    if engine.infra is not None:
        lines.append("tenants:")
        for tenant in sorted(engine.infra.tenants.values(), key=lambda t: t.id):
            used, quota = tenant.used, tenant.quota
            lines.append(
                f"  {tenant.id} on {tenant.host}:"
                f" used {used.vcpu}/{quota.vcpu} vcpu,"
                f" {used.ram}/{quota.ram} ram,"
                f" {used.storage}/{quota.storage} storage,"
                f" {used.ports}/{quota.ports} ports"
            )
            detail["tenants"][tenant.id] = {
                "host": tenant.host,
                "used": used.as_tuple(),
                "quota": quota.as_tuple(),
            }
    if not lines:
        lines.append("catalog is empty")
    return CommandResult(0, "\n".join(lines), detail, args.json)


def _cmd_audit(args) -> CommandResult:
    root = _resolve_root(args)
    audit_path = root / AUDIT_FILE
    events = load_audit(audit_path) if audit_path.exists() else []
    if args.tail is not None:
        events = events[-args.tail :]
    lines = [
        f"{e.sequence_no:>4}  {e.outcome.value:<7} {e.actor_id:<10}"
        f" {e.action:<30} {e.subject}"
        for e in events
    ]
    if not lines:
        lines = ["audit log is empty"]
    return CommandResult(
        0,
        "\n".join(lines),
        {"events": [event_to_dict(e) for e in events]},
        args.json,
    )


def _cmd_init_testbed(args) -> CommandResult:
    root = _resolve_root(args)
    with _locked(root):
        inventory_path = root / INVENTORY_FILE
        if inventory_path.exists() and not args.force:
            return CommandResult(
                1,
                f"{inventory_path} already exists; pass --force to replace it",
                None,
                args.json,
            )
        infra = build_testbed()
        save_inventory(infra, inventory_path)
    return CommandResult(
        0,
        f"testbed written to {inventory_path}:"
        f" {len(infra.hosts)} hosts, {len(infra.tenants)} tenants,"
        f" {len(infra.links)} links",
        {
            "hosts": sorted(infra.hosts),
            "tenants": sorted(infra.tenants),
            "links": sorted(infra.links),
        },
        args.json,
    )


def _cmd_demo(args) -> CommandResult:
    root = _resolve_root(args)
    with _locked(root):
        for name in (CATALOG_FILE, AUDIT_FILE):
            if (root / name).exists():
                return CommandResult(
                    1,
                    f"demo needs a fresh catalog directory, found {root / name}",
                    None,
                    args.json,
                )
        engine = Orchestrator(
            build_testbed(),
            catalog=Catalog(),
            audit_sink=FileAuditLog(root / AUDIT_FILE).append,
        )
        engine.register_customer(
            Customer(id="c-companyx", name="CompanyX", category="enterprise")
        )
        engine.register_provider(
            SliceProvider(
                id="p-greyop",
                name="GreyOp",
                administrative_domains=frozenset({"core"}),
            )
        )
        engine.register_vsp(
            VendorSoftwareProduct(
                id="vsp-core-cp",
                vendor_name="GreyOp Networks",
                product_name="Core CP",
                version=(1, 0, 0),
            )
        )
        engine.register_vsp(
            VendorSoftwareProduct(
                id="vsp-core-dp",
                vendor_name="GreyOp Networks",
                product_name="Core DP",
                version=(1, 0, 0),
            )
        )
        vf_cp = engine.onboard_vf(
            Role.DESIGNER, "vsp-core-cp", _fixture_text("core_cp.yaml")
        ).subject
        vf_dp = engine.onboard_vf(
            Role.DESIGNER, "vsp-core-dp", _fixture_text("core_dp.yaml")
        ).subject
        engine.certify_vf(Role.TESTER, vf_cp)
        engine.certify_vf(Role.TESTER, vf_dp)
        engine.create_service(
            Role.DESIGNER, "Core CP", [vf_cp], service_id="svc-core-cp"
        )
        engine.create_service(
            Role.DESIGNER, "Core DP", [vf_dp], service_id="svc-core-dp"
        )
        for service_id in ("svc-core-cp", "svc-core-dp"):
            engine.advance_service(Role.TESTER, service_id, "test")
            engine.advance_service(Role.GOVERNOR, service_id, "approve")
            engine.advance_service(Role.OPERATOR, service_id, "distribute")
        slc, template = _slice_from_descriptor(
            yaml.safe_load(_fixture_text("slice_a.yaml")), engine
        )
        engine.create_slice(Role.DESIGNER, slc, template)
        plan = engine.plan_slice(slc.id)
        if not plan.feasible:
            return CommandResult(
                1, f"no feasible placement for {slc.id}", None, args.json
            )
        requirements = engine.requirements_for(slc.id)
        offers = offered_capabilities(engine.infra)
        ok, violations = verify_plan(
            plan,
            requirements,
            offers,
            engine.infra,
            slice=engine.catalog.slices[slc.id],
        )
        if not ok:
            codes = sorted(
                v.code for v in violations if v.severity is Severity.ERROR
            )
            raise RuntimeError(
                f"solver produced a plan the verifier rejects: {codes}"
            )
        record = engine.instantiate_slice(Role.OPERATOR, slc.id, plan)
        save_plan(plan, root / f"plan-{slc.id}.yaml")
        _save_state(root, engine)

    by_outcome: dict[str, int] = {}
    for event in engine.events:
        by_outcome[event.outcome.value] = by_outcome.get(event.outcome.value, 0) + 1
    limit = engine.catalog.slices[slc.id].profile.end_to_end_latency
    lines = [f"slice {slc.id} is {record.state.value}"]
    for assignment in plan.assignments:
        lines.append(f"  {assignment.service} on {assignment.tenant}")
    lines.append(f"e2e latency {plan.e2e_latency} ms (profile limit {limit} ms)")
    lines.append(
        "audit: "
        + ", ".join(f"{count} {outcome}" for outcome, count in sorted(by_outcome.items()))
    )
    return CommandResult(
        0,
        "\n".join(lines),
        {
            "slice": slc.id,
            "state": record.state.value,
            "assignments": {a.service: a.tenant for a in plan.assignments},
            "e2e_latency": plan.e2e_latency,
            "audit_events": len(engine.events),
        },
        args.json,
    )


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--catalog",
        help=f"catalog directory (default: ${ENV_CATALOG})",
    )
    common.add_argument(
        "--as",
        dest="role",
        choices=sorted(role.value for role in Role),
        default=Role.SUPERUSER.value,
        help="acting role (default: superuser)",
    )
    common.add_argument(
        "--json", action="store_true", help="machine-readable output"
    )

    parser = argparse.ArgumentParser(
        prog="slicectl",
        description=(
            "Design-time orchestrator and placement simulator for network"
            " slices."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser(
        "lint-template",
        parents=[common],
        help="validate one template file against the onboarding rules",
    )
    p.add_argument("template", help="template file")
    p.add_argument(
        "--env-limit",
        type=int,
        default=None,
        dest="env_limit",
        help="environment character limit (default 2000)",
    )
    p.add_argument(
        "--count-names",
        action="store_true",
        help="count entry names toward the environment limit",
    )
    p.set_defaults(handler=_cmd_lint_template)

    p = sub.add_parser(
        "onboard-vf", parents=[common], help="onboard a VF template"
    )
    p.add_argument("template", help="template file")
    p.add_argument("--vsp", required=True, help="vendor software product id")
    p.add_argument("--vendor", default="unknown-vendor", help="vendor name")
    p.add_argument("--product", default=None, help="product name")
    p.add_argument("--version", default="1.0.0", help="product version X.Y.Z")
    p.set_defaults(handler=_cmd_onboard_vf)

    p = sub.add_parser(
        "certify-vf", parents=[common], help="certify a draft VF"
    )
    p.add_argument("vf", help="vf id")
    p.set_defaults(handler=_cmd_certify_vf)

    p = sub.add_parser(
        "create-service",
        parents=[common],
        help="bundle certified VFs into a service",
    )
    p.add_argument("name", help="service display name")
    p.add_argument(
        "--vf",
        action="append",
        required=True,
        help="member vf id (repeatable)",
    )
    p.add_argument("--id", default=None, help="explicit service id")
    p.set_defaults(handler=_cmd_create_service)

    for action, verb in (
        ("test", "test a designed service"),
        ("approve", "approve a tested service"),
        ("distribute", "distribute an approved service"),
    ):
        p = sub.add_parser(f"{action}-service", parents=[common], help=verb)
        p.add_argument("service", help="service id")
        p.set_defaults(handler=_make_advance_handler(action))

    p = sub.add_parser(
        "create-slice",
        parents=[common],
        help="create a slice from a descriptor file",
    )
    p.add_argument("descriptor", help="slice descriptor file")
    p.set_defaults(handler=_cmd_create_slice)

    p = sub.add_parser(
        "place-slice",
        parents=[common],
        help="compute and verify a placement plan",
    )
    p.add_argument("slice", help="slice id")
    p.add_argument(
        "--solver",
        choices=[solver.value for solver in Solver],
        default=None,
        help="placement solver (small instances always solve exactly)",
    )
    p.add_argument("--out", default=None, help="plan output file")
    p.set_defaults(handler=_cmd_place_slice)

    p = sub.add_parser(
        "instantiate-slice",
        parents=[common],
        help="execute a placement plan",
    )
    p.add_argument("slice", help="slice id")
    p.add_argument("--plan", required=True, help="plan file from place-slice")
    p.add_argument(
        "--best-effort",
        action="store_true",
        help="keep partial results instead of rolling back",
    )
    p.set_defaults(handler=_cmd_instantiate_slice)

    p = sub.add_parser(
        "teardown-slice",
        parents=[common],
        help="terminate a slice and release its resources",
    )
    p.add_argument("slice", help="slice id")
    p.set_defaults(handler=_cmd_teardown_slice)

    p = sub.add_parser(
        "status", parents=[common], help="show lifecycle states and usage"
    )
    p.add_argument("subject", nargs="?", default=None, help="one artifact id")
    p.set_defaults(handler=_cmd_status)

    p = sub.add_parser("audit", parents=[common], help="print the audit log")
    p.add_argument("--tail", type=int, default=None, help="last N events only")
    p.set_defaults(handler=_cmd_audit)

    p = sub.add_parser(
        "init-testbed",
        parents=[common],
        help="write the reference 3-host/3-tenant inventory",
    )
    p.add_argument(
        "--force", action="store_true", help="replace an existing inventory"
    )
    p.set_defaults(handler=_cmd_init_testbed)

    p = sub.add_parser(
        "demo",
        parents=[common],
        help="run a bundled end-to-end scenario",
    )
    p.add_argument("scenario", choices=["slice-a"], help="scenario name")
    p.set_defaults(handler=_cmd_demo)

    return parser


def run(argv: list[str] | None = None) -> CommandResult:
    """Parse argv and execute one subcommand; never raises."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 2
        return CommandResult(0 if code == 0 else 2, "")
    try:
        return args.handler(args)
    except _Usage as exc:
        return CommandResult(2, f"usage error: {exc}")
    except SliceError as exc:
        return CommandResult(
            1,
            f"{type(exc).__name__}: {exc}",
            {"error": type(exc).__name__, "message": str(exc)},
            args.json,
        )
    except Exception as exc:  # the CLI boundary must map bugs to exit 3
        return CommandResult(3, f"internal error: {type(exc).__name__}: {exc}")


def main(argv: list[str] | None = None) -> int:
    result = run(argv)
    if result.machine:
        payload: dict = {
            "exit_code": result.exit_code,
            "summary": result.summary,
        }
        if result.detail is not None:
            payload["detail"] = result.detail
        print(json.dumps(payload, indent=2, sort_keys=True, default=str))
    elif result.summary:
        print(result.summary)
    return result.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
