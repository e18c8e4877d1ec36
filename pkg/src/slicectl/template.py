"""VF template parsing, onboarding rules, and resource footprints.

Templates are YAML documents with top-level keys name, parameters,
resources, environment (schema in schemas/template.schema.json). Resource
kinds are carried as the external type strings of the orchestration
platform and mapped to a small internal enum; unknown kinds are preserved
as OTHER. Validation never raises for rule violations, it reports findings;
parsing raises for structural defects.
"""

from __future__ import annotations

import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum

import yaml

from .errors import DanglingReference, MissingSizing, TemplateSyntaxError
from .model import ResourceDemand


class ResourceKind(str, Enum):
    COMPUTE = "compute"
    NETWORK = "network"
    SUBNET = "subnet"
    PORT = "port"
    OTHER = "other"


# External kind strings are contractual and matched bit-exactly.
KIND_COMPUTE = "OS::Nova::Server"
KIND_NETWORK = "OS::Neutron::Net"
KIND_SUBNET = "OS::Neutron::Subnet"
KIND_PORT = "OS::Neutron::Port"
KIND_FLOATING_IP = "OS::Neutron::FloatingIP"
KIND_FLOATING_IP_ASSOCIATION = "OS::Neutron::FloatingIPAssociation"

EXTERNAL_TO_KIND = {
    KIND_COMPUTE: ResourceKind.COMPUTE,
    KIND_NETWORK: ResourceKind.NETWORK,
    KIND_SUBNET: ResourceKind.SUBNET,
    KIND_PORT: ResourceKind.PORT,
}

DEFAULT_NAME_PATTERN = r"^[a-z0-9_]{1,63}$"
DEFAULT_ENV_CHAR_LIMIT = 2000
DEFAULT_REQUIRED_METADATA = frozenset({"vnf_name", "vnf_id", "vf_module_id"})
DEFAULT_FORBIDDEN_KINDS = frozenset({KIND_FLOATING_IP, KIND_FLOATING_IP_ASSOCIATION})

RULE_REQUIRED_METADATA = "required-metadata"
RULE_FORBIDDEN_KIND = "forbidden-kind"
RULE_NAME_PATTERN = "name-pattern"
RULE_ENV_LIMIT = "env-limit"


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


class Verdict(str, Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"


@dataclass(frozen=True)
class Finding:
    rule_id: str
    severity: Severity
    location: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    verdict: Verdict
    findings: tuple[Finding, ...]

    def __post_init__(self):
        object.__setattr__(self, "findings", tuple(self.findings))
        has_error = any(f.severity is Severity.ERROR for f in self.findings)
        expected = Verdict.REJECTED if has_error else Verdict.ACCEPTED
        if self.verdict is not expected:
            raise ValueError(
                f"verdict {self.verdict.value} inconsistent with findings"
            )

    @classmethod
    def from_findings(cls, findings) -> "ValidationReport":
        findings = tuple(findings)
        has_error = any(f.severity is Severity.ERROR for f in findings)
        return cls(Verdict.REJECTED if has_error else Verdict.ACCEPTED, findings)

    @property
    def accepted(self) -> bool:
        return self.verdict is Verdict.ACCEPTED


def merge_reports(*reports: ValidationReport) -> ValidationReport:
    findings = []
    for report in reports:
        findings.extend(report.findings)
    return ValidationReport.from_findings(findings)


@dataclass(frozen=True)
class RuleSet:
    """Active onboarding rules; defaults match the platform guidelines."""

    env_char_limit: int = DEFAULT_ENV_CHAR_LIMIT
    forbidden_kinds: frozenset[str] = DEFAULT_FORBIDDEN_KINDS
    required_compute_metadata: frozenset[str] = DEFAULT_REQUIRED_METADATA
    naming_pattern: str = DEFAULT_NAME_PATTERN
    # Whether entry names count toward the environment limit; the guideline
    # text is ambiguous, values-only is the documented default.
    count_names: bool = False

    def __post_init__(self):
        if self.env_char_limit <= 0:
            raise ValueError("env_char_limit must be > 0")
        object.__setattr__(self, "forbidden_kinds", frozenset(self.forbidden_kinds))
        object.__setattr__(
            self,
            "required_compute_metadata",
            frozenset(self.required_compute_metadata),
        )


@dataclass(frozen=True)
class Parameter:
    type: str
    default: object = None
    has_default: bool = False


@dataclass(frozen=True)
class ResourceDescriptor:
    name: str
    kind: ResourceKind
    external_type: str
    properties: Mapping[str, object] = field(default_factory=dict)
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "properties", dict(self.properties))
        object.__setattr__(self, "metadata", dict(self.metadata))


@dataclass(frozen=True)
class EnvironmentDocument:
    entries: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "entries", dict(self.entries))


@dataclass(frozen=True)
class TemplateDocument:
    name: str
    parameters: Mapping[str, Parameter] = field(default_factory=dict)
    resources: Mapping[str, ResourceDescriptor] = field(default_factory=dict)
    environment: EnvironmentDocument = field(default_factory=EnvironmentDocument)

    def __post_init__(self):
        object.__setattr__(self, "parameters", dict(self.parameters))
        object.__setattr__(self, "resources", dict(self.resources))

    def resources_of_kind(self, kind: ResourceKind) -> list[ResourceDescriptor]:
        return [r for r in self.resources.values() if r.kind is kind]


def _require_mapping(value, what: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise TemplateSyntaxError(f"{what} must be a mapping, got {type(value).__name__}")
    return value


def _iter_references(value):
    """Yield ("param"|"resource", target) pairs found anywhere in a value."""
    if isinstance(value, dict):
        if len(value) == 1:
            key = next(iter(value))
            if key in ("get_param", "get_resource"):
                target = value[key]
                if not isinstance(target, str):
                    raise TemplateSyntaxError(
                        f"{key} target must be a string, got {target!r}"
                    )
                yield ("param" if key == "get_param" else "resource", target)
                return
        for inner in value.values():
            yield from _iter_references(inner)
    elif isinstance(value, list):
        for inner in value:
            yield from _iter_references(inner)


def _reference_target(value) -> str | None:
    """Return the get_resource target if the value is exactly such a ref."""
    if isinstance(value, dict) and len(value) == 1 and "get_resource" in value:
        target = value["get_resource"]
        if isinstance(target, str):
            return target
    return None


def referenced_resources(value) -> list[str]:
    """Resource names referenced anywhere in a property value, in order."""
    return [target for kind, target in _iter_references(value) if kind == "resource"]


def parse_template(text: str) -> TemplateDocument:
    """Parse and structurally check one template document.

    Raises TemplateSyntaxError for malformed documents and
    DanglingReference when a resource points at an undeclared parameter or
    resource, or when subnet/port wiring does not resolve.
    """
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise TemplateSyntaxError(f"malformed template: {exc}") from exc
    if not isinstance(raw, dict):
        raise TemplateSyntaxError("template root must be a mapping")
    name = raw.get("name")
    if not isinstance(name, str) or not name:
        raise TemplateSyntaxError("template needs a non-empty 'name'")

    parameters: dict[str, Parameter] = {}
    for pname, praw in _require_mapping(raw.get("parameters"), "parameters").items():
        praw = _require_mapping(praw, f"parameter {pname!r}")
        ptype = praw.get("type", "string")
        if not isinstance(ptype, str):
            raise TemplateSyntaxError(f"parameter {pname!r} type must be a string")
        parameters[str(pname)] = Parameter(
            type=ptype, default=praw.get("default"), has_default="default" in praw
        )

    resources: dict[str, ResourceDescriptor] = {}
    for rname, rraw in _require_mapping(raw.get("resources"), "resources").items():
        rname = str(rname)
        rraw = _require_mapping(rraw, f"resource {rname!r}")
        external = rraw.get("type")
        if not isinstance(external, str) or not external:
            raise TemplateSyntaxError(f"resource {rname!r} needs a 'type' string")
        kind = EXTERNAL_TO_KIND.get(external, ResourceKind.OTHER)
        properties = _require_mapping(
            rraw.get("properties"), f"resource {rname!r} properties"
        )
        metadata_raw = _require_mapping(
            rraw.get("metadata"), f"resource {rname!r} metadata"
        )
        if metadata_raw and kind is not ResourceKind.COMPUTE:
            raise TemplateSyntaxError(
                f"resource {rname!r}: metadata is only valid on compute resources"
            )
        metadata: dict[str, str] = {}
        for mname, mvalue in metadata_raw.items():
            if isinstance(mvalue, (dict, list)):
                raise TemplateSyntaxError(
                    f"resource {rname!r} metadata {mname!r} must be text"
                )
            metadata[str(mname)] = str(mvalue)
        resources[rname] = ResourceDescriptor(
            name=rname,
            kind=kind,
            external_type=external,
            properties=properties,
            metadata=metadata,
        )

    environment_raw = _require_mapping(raw.get("environment"), "environment")
    entries: dict[str, str] = {}
    for ename, evalue in environment_raw.items():
        if isinstance(evalue, (dict, list)) or evalue is None:
            raise TemplateSyntaxError(f"environment entry {ename!r} must be text")
        entries[str(ename)] = str(evalue)

    doc = TemplateDocument(
        name=name,
        parameters=parameters,
        resources=resources,
        environment=EnvironmentDocument(entries),
    )
    _check_references(doc)
    return doc


def _check_references(doc: TemplateDocument) -> None:
    for resource in doc.resources.values():
        for ref_kind, target in _iter_references(resource.properties):
            if ref_kind == "param" and target not in doc.parameters:
                raise DanglingReference(
                    f"resource {resource.name!r} references undeclared"
                    f" parameter {target!r}"
                )
            if ref_kind == "resource" and target not in doc.resources:
                raise DanglingReference(
                    f"resource {resource.name!r} references undeclared"
                    f" resource {target!r}"
                )
        if resource.kind is ResourceKind.SUBNET:
            target = _reference_target(resource.properties.get("network"))
            if target is None or doc.resources.get(target) is None:
                raise DanglingReference(
                    f"subnet {resource.name!r} must reference a network resource"
                )
            if doc.resources[target].kind is not ResourceKind.NETWORK:
                raise DanglingReference(
                    f"subnet {resource.name!r} references {target!r}, which is"
                    f" not a network"
                )
        if resource.kind is ResourceKind.PORT:
            net = _reference_target(resource.properties.get("network"))
            sub = _reference_target(resource.properties.get("subnet"))
            net_ok = net is not None and getattr(
                doc.resources.get(net), "kind", None
            ) is ResourceKind.NETWORK
            sub_ok = sub is not None and getattr(
                doc.resources.get(sub), "kind", None
            ) is ResourceKind.SUBNET
            if not (net_ok or sub_ok):
                raise DanglingReference(
                    f"port {resource.name!r} must reference a network or subnet"
                )


def validate_template(doc: TemplateDocument, rules: RuleSet) -> ValidationReport:
    """Check onboarding rules: (a) compute metadata, (b) forbidden kinds,
    (c) resource naming. One finding per violation; never raises."""
    findings: list[Finding] = []
    pattern = re.compile(rules.naming_pattern)
    for resource in doc.resources.values():
        if resource.kind is ResourceKind.COMPUTE:
            for required in sorted(rules.required_compute_metadata):
                if required not in resource.metadata:
                    findings.append(
                        Finding(
                            rule_id=RULE_REQUIRED_METADATA,
                            severity=Severity.ERROR,
                            location=resource.name,
                            message=(
                                f"compute resource {resource.name!r} is missing"
                                f" required metadata {required!r}"
                            ),
                        )
                    )
        if resource.external_type in rules.forbidden_kinds:
            findings.append(
                Finding(
                    rule_id=RULE_FORBIDDEN_KIND,
                    severity=Severity.ERROR,
                    location=resource.name,
                    message=(
                        f"resource {resource.name!r} uses forbidden kind"
                        f" {resource.external_type!r}"
                    ),
                )
            )
        if not pattern.match(resource.name):
            findings.append(
                Finding(
                    rule_id=RULE_NAME_PATTERN,
                    severity=Severity.ERROR,
                    location=resource.name,
                    message=(
                        f"resource name {resource.name!r} does not match"
                        f" {rules.naming_pattern!r}"
                    ),
                )
            )
    return ValidationReport.from_findings(findings)


def env_char_count(env: EnvironmentDocument, rules: RuleSet) -> int:
    """Characters the environment occupies once every value is quoted.

    Each value contributes len(value) + 2 for its surrounding quotes; with
    count_names enabled the names are quoted into the field as well.
    """
    count = sum(len(value) + 2 for value in env.entries.values())
    if rules.count_names:
        count += sum(len(name) + 2 for name in env.entries)
    return count


def validate_environment(env: EnvironmentDocument, rules: RuleSet) -> ValidationReport:
    count = env_char_count(env, rules)
    findings: list[Finding] = []
    if count > rules.env_char_limit:
        findings.append(
            Finding(
                rule_id=RULE_ENV_LIMIT,
                severity=Severity.ERROR,
                location="environment",
                message=(
                    f"environment counts {count} characters including quotes,"
                    f" limit is {rules.env_char_limit}"
                ),
            )
        )
    return ValidationReport.from_findings(findings)


def _numeric(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def resource_footprint(doc: TemplateDocument) -> ResourceDemand:
    """Sum compute sizing over the template and count its port resources."""
    vcpu = ram = storage = 0
    ports = 0
    for resource in doc.resources.values():
        if resource.kind is ResourceKind.PORT:
            ports += 1
            continue
        if resource.kind is not ResourceKind.COMPUTE:
            continue
        for prop in ("vcpu", "ram", "storage"):
            value = resource.properties.get(prop)
            if not _numeric(value):
                raise MissingSizing(
                    f"compute resource {resource.name!r} lacks numeric"
                    f" {prop!r} sizing"
                )
        vcpu += resource.properties["vcpu"]
        ram += resource.properties["ram"]
        storage += resource.properties["storage"]
    return ResourceDemand(vcpu=vcpu, ram=ram, storage=storage, ports=ports)
