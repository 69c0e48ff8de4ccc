"""API specification model: loading, path templates and endpoint lookup.

Two document dialects are accepted. The native one is a small YAML file
marked with ``restfix_spec: 1``; the other is a subset of OpenAPI 3.x.
Both normalize to the same immutable :class:`SpecModel`.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Iterable, Union
from urllib.parse import urlsplit

import yaml

from .errors import ParseError, SpecError, TemplateError

HTTP_METHODS = ("GET", "POST", "PUT", "PATCH", "DELETE", "HEAD")
FORMAT_HINTS = ("openapi-yaml", "openapi-json", "native", "auto")
NATIVE_MARKER = "restfix_spec"

# Placeholder for statically unknown text inside a concrete path. It matches
# any run of characters within a single segment.
WILDCARD = "\x00"

# Edit distance beyond which a template is not offered as a fix candidate.
CANDIDATE_MAX_DISTANCE = 2

Scalar = Union[str, int, float, bool]


@dataclass(frozen=True)
class Literal:
    text: str

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class Parameter:
    name: str

    def __str__(self) -> str:
        return "{" + self.name + "}"


Segment = Union[Literal, Parameter]


@dataclass(frozen=True)
class PathTemplate:
    segments: tuple[Segment, ...] = ()

    def __str__(self) -> str:
        return render(self)

    def shape(self) -> tuple[str | None, ...]:
        """Template with parameter names erased, used for duplicate checks."""
        return tuple(s.text if isinstance(s, Literal) else None for s in self.segments)


@dataclass(frozen=True)
class BodyField:
    name: str
    fixed_value: Scalar | None = None


@dataclass(frozen=True)
class EndpointSpec:
    method: str
    path_template: PathTemplate
    required_headers: tuple[str, ...] = ()
    required_body_fields: tuple[BodyField, ...] = ()

    @property
    def path(self) -> str:
        return render(self.path_template)

    def label(self) -> str:
        return f"{self.method} {self.path}"


@dataclass(frozen=True)
class SpecModel:
    api_name: str
    domain: str
    base_path: str = ""
    endpoints: tuple[EndpointSpec, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.domain or "://" in self.domain or "/" in self.domain:
            raise SpecError(f"invalid domain {self.domain!r}")
        seen: set[tuple] = set()
        for ep in self.endpoints:
            key = (ep.method, ep.path_template.shape())
            if key in seen:
                raise SpecError(f"duplicate endpoint {ep.label()}")
            seen.add(key)


@dataclass(frozen=True)
class Candidate:
    endpoint: EndpointSpec
    distance: int


@dataclass(frozen=True)
class EndpointMatch:
    """Result of :func:`lookup_endpoint`.

    ``endpoint`` is set on an exact match; otherwise ``candidates`` holds
    near templates sorted by distance, then declaration order.
    """

    endpoint: EndpointSpec | None
    candidates: tuple[Candidate, ...] = ()

    @property
    def is_exact(self) -> bool:
        return self.endpoint is not None


# ---------------------------------------------------------------------------
# Path templates


def parse_path_template(raw: str) -> PathTemplate:
    if not raw.startswith("/"):
        raise TemplateError(f"path must start with '/': {raw!r}")
    if "?" in raw:
        raise TemplateError(f"path template must not carry a query string: {raw!r}")
    body = raw[1:]
    if body.endswith("/"):
        body = body[:-1]
    if not body:
        return PathTemplate(())
    segments: list[Segment] = []
    for part in body.split("/"):
        if not part:
            raise TemplateError(f"empty segment in {raw!r}")
        if part.startswith("{") and part.endswith("}") and part.count("{") == 1 and part.count("}") == 1:
            name = part[1:-1].strip()
            if not name:
                raise TemplateError(f"empty parameter name in {raw!r}")
            segments.append(Parameter(name))
        elif "{" in part or "}" in part:
            raise TemplateError(f"unbalanced or embedded braces in segment {part!r} of {raw!r}")
        else:
            segments.append(Literal(part))
    return PathTemplate(tuple(segments))


def render(template: PathTemplate, values: dict[str, str] | None = None) -> str:
    """Render a template; parameters without a value keep their ``{name}`` form."""
    values = values or {}
    parts = []
    for seg in template.segments:
        if isinstance(seg, Parameter):
            parts.append(values.get(seg.name, str(seg)))
        else:
            parts.append(seg.text)
    return "/" + "/".join(parts)


def split_concrete_path(path: str) -> list[str]:
    """Split a request path into segments, dropping the query and empty segments."""
    path = path.split("?", 1)[0].split("#", 1)[0]
    return [p for p in path.split("/") if p]


def _segment_matches(seg: Segment, concrete: str) -> bool:
    if not concrete:
        return False
    if isinstance(seg, Parameter):
        return True
    if WILDCARD not in concrete:
        return seg.text == concrete
    pattern = ".*".join(re.escape(p) for p in concrete.split(WILDCARD))
    return re.fullmatch(pattern, seg.text, re.DOTALL) is not None


def template_matches(template: PathTemplate, segments: list[str]) -> bool:
    if len(template.segments) != len(segments):
        return False
    return all(_segment_matches(t, c) for t, c in zip(template.segments, segments))


def segment_distance(template: PathTemplate, segments: list[str]) -> int:
    """Edit distance over whole segments; a matching segment costs nothing."""
    tsegs = template.segments
    prev = list(range(len(segments) + 1))
    for i, tseg in enumerate(tsegs, 1):
        cur = [i] + [0] * len(segments)
        for j, cseg in enumerate(segments, 1):
            sub = 0 if _segment_matches(tseg, cseg) else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + sub)
        prev = cur
    return prev[-1]


def lookup_endpoint(spec: SpecModel, method: str, concrete_path: str) -> EndpointMatch:
    method = method.upper()
    segments = split_concrete_path(concrete_path)
    for ep in spec.endpoints:
        if ep.method == method and template_matches(ep.path_template, segments):
            return EndpointMatch(ep)
    scored = []
    for order, ep in enumerate(spec.endpoints):
        dist = segment_distance(ep.path_template, segments) + (ep.method != method)
        if dist <= CANDIDATE_MAX_DISTANCE:
            scored.append((dist, order, ep))
    scored.sort(key=lambda t: (t[0], t[1]))
    return EndpointMatch(None, tuple(Candidate(ep, d) for d, _, ep in scored))


# ---------------------------------------------------------------------------
# Document loading


class _SpecLoader(yaml.SafeLoader):
    """SafeLoader that only treats true/false as booleans.

    Field names such as ``on`` (Philips Hue) must survive as strings.
    """


_SpecLoader.yaml_implicit_resolvers = {
    k: [(tag, rx) for tag, rx in v if tag != "tag:yaml.org,2002:bool"]
    for k, v in yaml.SafeLoader.yaml_implicit_resolvers.items()
}
_SpecLoader.add_implicit_resolver(
    "tag:yaml.org,2002:bool",
    re.compile(r"^(?:true|True|TRUE|false|False|FALSE)$"),
    list("tTfF"),
)


def _decode(document: bytes, fmt: str) -> Any:
    try:
        text = document.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError(f"document is not UTF-8: {exc}") from exc
    if fmt == "auto":
        fmt = "json" if text.lstrip().startswith("{") else "yaml"
    try:
        if fmt in ("json", "openapi-json"):
            return json.loads(text)
        return yaml.load(text, Loader=_SpecLoader)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ParseError(f"malformed document: {exc}") from exc


def load_spec(document: bytes | str, format_hint: str = "auto") -> SpecModel:
    if format_hint not in FORMAT_HINTS:
        raise ValueError(f"unknown format hint {format_hint!r}")
    if isinstance(document, str):
        document = document.encode("utf-8")
    tree = _decode(document, format_hint)
    if not isinstance(tree, dict):
        raise ParseError("specification root must be a mapping")
    if format_hint == "native" or (format_hint == "auto" and NATIVE_MARKER in tree):
        return _load_native(tree)
    return _load_openapi(tree)


def load_spec_file(path) -> SpecModel:
    with open(path, "rb") as f:
        return load_spec(f.read(), "auto")


def _method(raw: Any) -> str:
    method = str(raw).upper()
    if method not in HTTP_METHODS:
        raise SpecError(f"unsupported HTTP method {raw!r}")
    return method


def _template(raw: Any) -> PathTemplate:
    if not isinstance(raw, str):
        raise SpecError(f"path must be a string, got {raw!r}")
    try:
        return parse_path_template(raw)
    except TemplateError as exc:
        raise SpecError(str(exc)) from exc


def _unique_headers(names: Iterable[Any]) -> tuple[str, ...]:
    out: list[str] = []
    seen: set[str] = set()
    for name in names:
        if not isinstance(name, str) or not name:
            raise SpecError(f"invalid header name {name!r}")
        if name.lower() in seen:
            raise SpecError(f"duplicate required header {name!r}")
        seen.add(name.lower())
        out.append(name)
    return tuple(out)


def _split_base_path(raw: Any) -> str:
    base = str(raw or "").strip()
    if not base or base == "/":
        return ""
    if not base.startswith("/"):
        base = "/" + base
    return base.rstrip("/")


def _load_native(tree: dict) -> SpecModel:
    domain = tree.get("domain")
    if not domain:
        raise SpecError("native spec declares no domain")
    endpoints = []
    for item in tree.get("endpoints") or []:
        if not isinstance(item, dict) or "method" not in item or "path" not in item:
            raise SpecError(f"endpoint entry needs method and path: {item!r}")
        body = []
        for entry in item.get("required_body") or []:
            if isinstance(entry, str):
                body.append(BodyField(entry))
            elif isinstance(entry, dict) and entry.get("name"):
                body.append(BodyField(str(entry["name"]), entry.get("value")))
            else:
                raise SpecError(f"invalid body field {entry!r}")
        endpoints.append(
            EndpointSpec(
                method=_method(item["method"]),
                path_template=_template(item["path"]),
                required_headers=_unique_headers(item.get("required_headers") or []),
                required_body_fields=tuple(body),
            )
        )
    return SpecModel(
        api_name=str(tree.get("api_name") or domain),
        domain=str(domain),
        base_path=_split_base_path(tree.get("base_path")),
        endpoints=tuple(endpoints),
    )


_PATH_ITEM_FIELDS = {"$ref", "summary", "description", "servers", "parameters"}


def _deref(doc: dict, node: Any, depth: int = 0) -> Any:
    """Resolve a same-document ``$ref``; other refs are left untouched."""
    while isinstance(node, dict) and isinstance(node.get("$ref"), str):
        ref = node["$ref"]
        if not ref.startswith("#/") or depth > 32:
            return node
        target: Any = doc
        for part in ref[2:].split("/"):
            part = part.replace("~1", "/").replace("~0", "~")
            if not isinstance(target, dict) or part not in target:
                raise SpecError(f"unresolvable reference {ref!r}")
            target = target[part]
        node = target
        depth += 1
    return node


def _openapi_headers(doc: dict, params: list) -> list[str]:
    # operation-level parameters override path-level ones of the same name
    by_name: dict[str, tuple[str, bool]] = {}
    for p in params:
        p = _deref(doc, p)
        if isinstance(p, dict) and p.get("in") == "header" and isinstance(p.get("name"), str):
            by_name[p["name"].lower()] = (p["name"], p.get("required") is True)
    return [name for name, required in by_name.values() if required]


def _openapi_body(doc: dict, request_body: Any) -> tuple[BodyField, ...]:
    request_body = _deref(doc, request_body)
    if not isinstance(request_body, dict):
        return ()
    content = request_body.get("content") or {}
    media = content.get("application/json") or next(iter(content.values()), None)
    schema = _deref(doc, (media or {}).get("schema"))
    if not isinstance(schema, dict):
        return ()
    props = schema.get("properties") or {}
    fields = []
    for name in schema.get("required") or []:
        prop = _deref(doc, props.get(name)) or {}
        fixed = None
        if "const" in prop:
            fixed = prop["const"]
        elif isinstance(prop.get("enum"), list) and len(prop["enum"]) == 1:
            fixed = prop["enum"][0]
        if isinstance(fixed, (dict, list)):
            fixed = None
        fields.append(BodyField(str(name), fixed))
    return tuple(fields)


def _load_openapi(doc: dict) -> SpecModel:
    servers = doc.get("servers") or []
    url = servers[0].get("url") if servers and isinstance(servers[0], dict) else None
    if not url:
        raise SpecError("no server URL declared")
    parts = urlsplit(url if "://" in url else "//" + url)
    if not parts.netloc:
        raise SpecError(f"server URL {url!r} has no domain")
    endpoints = []
    for raw_path, item in (doc.get("paths") or {}).items():
        item = _deref(doc, item)
        if not isinstance(item, dict):
            continue
        template = _template(raw_path)
        shared = item.get("parameters") or []
        for key, op in item.items():
            if key in _PATH_ITEM_FIELDS or str(key).startswith("x-"):
                continue
            method = _method(key)
            op = op or {}
            endpoints.append(
                EndpointSpec(
                    method=method,
                    path_template=template,
                    required_headers=_unique_headers(
                        _openapi_headers(doc, list(shared) + list(op.get("parameters") or []))
                    ),
                    required_body_fields=_openapi_body(doc, op.get("requestBody")),
                )
            )
    title = (doc.get("info") or {}).get("title")
    return SpecModel(
        api_name=str(title or parts.hostname),
        domain=parts.netloc,
        base_path=_split_base_path(parts.path),
        endpoints=tuple(endpoints),
    )
