from __future__ import annotations

import json
import random

import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from restfix.errors import ParseError, SpecError, TemplateError
from restfix.spec_model import (
    Literal,
    Parameter,
    PathTemplate,
    load_spec,
    load_spec_file,
    lookup_endpoint,
    parse_path_template,
    render,
)
from support import FIXTURES, brute_match

SWITCHBOT = FIXTURES / "switchbot_v11.yaml"


def test_native_switchbot_spec():
    spec = load_spec_file(SWITCHBOT)
    assert spec.domain == "api.switch-bot.com"
    assert len(spec.endpoints) == 1
    ep = spec.endpoints[0]
    assert ep.method == "GET" and ep.path == "/v1.1/devices"
    assert ep.required_headers == ("Authorization", "sign", "t", "nonce")


def test_zero_paths_is_empty_not_error():
    spec = load_spec("openapi: 3.0.0\nservers: [{url: 'https://h.example.com/api'}]\npaths: {}\n")
    assert spec.endpoints == ()
    assert spec.domain == "h.example.com" and spec.base_path == "/api"


def test_format_sniffing_json_and_yaml_agree():
    doc = {"restfix_spec": 1, "api_name": "A", "domain": "a.example", "endpoints": [{"method": "get", "path": "/x"}]}
    assert load_spec(json.dumps(doc)) == load_spec(yaml.safe_dump(doc))


def test_load_is_deterministic():
    raw = SWITCHBOT.read_bytes()
    assert load_spec(raw) == load_spec(raw)


@pytest.mark.parametrize(
    "text, error",
    [
        ("restfix_spec: 1\napi_name: x\nendpoints: []\n", SpecError),  # no domain
        ("openapi: 3.0.0\npaths: {}\n", SpecError),  # no server
        ("{not json", ParseError),
        ("a: [unclosed\n", ParseError),
        ("- just\n- a list\n", ParseError),
        (
            "restfix_spec: 1\napi_name: x\ndomain: d\nendpoints:\n"
            "  - {method: GET, path: '/a/{id}'}\n  - {method: GET, path: '/a/{other}'}\n",
            SpecError,
        ),
        ("restfix_spec: 1\napi_name: x\ndomain: d\nendpoints:\n  - {method: TRACE, path: /a}\n", SpecError),
        ("openapi: 3.0.0\nservers: [{url: 'https://d'}]\npaths:\n  /a:\n    fetch: {}\n", SpecError),
    ],
)
def test_load_errors(text, error):
    with pytest.raises(error):
        load_spec(text)


def _openapi_doc(rng: random.Random) -> dict:
    methods = ["get", "post", "put", "patch", "delete", "head"]
    paths = {}
    for i in range(5):
        item = {"summary": f"path {i}", "parameters": [{"name": "X-Trace", "in": "header", "required": True}]}
        for m in rng.sample(methods, rng.randint(1, 4)):
            op = {"parameters": [{"name": f"H{i}{m}", "in": "header", "required": rng.random() < 0.5}]}
            if m in ("post", "put"):
                op["requestBody"] = {
                    "content": {
                        "application/json": {
                            "schema": {
                                "type": "object",
                                "required": ["kind"],
                                "properties": {"kind": {"type": "string", "enum": ["switch"]}},
                            }
                        }
                    }
                }
            item[m] = op
        item["x-note"] = "ignored"
        paths[f"/r{i}/{{id}}" if i % 2 else f"/r{i}"] = item
    return {"openapi": "3.0.3", "servers": [{"url": "https://svc.example.com/base/v2"}], "paths": paths}


def _walk_pairs(doc: dict) -> set[tuple[str, str]]:
    pairs = set()
    for path, item in doc["paths"].items():
        for key in item:
            if key in ("get", "post", "put", "patch", "delete", "head"):
                pairs.add((key.upper(), path))
    return pairs


@pytest.mark.parametrize("seed", range(10))
def test_openapi_endpoint_count_matches_document_walk(seed):
    doc = _openapi_doc(random.Random(seed))
    spec = load_spec(json.dumps(doc), "openapi-json")
    assert {(e.method, e.path) for e in spec.endpoints} == _walk_pairs(doc)
    assert len(spec.endpoints) == len(_walk_pairs(doc))
    assert spec.base_path == "/base/v2"
    for e in spec.endpoints:
        assert "X-Trace" in e.required_headers
        if e.method in ("POST", "PUT"):
            assert [(f.name, f.fixed_value) for f in e.required_body_fields] == [("kind", "switch")]


def test_openapi_refs_and_const():
    doc = """
openapi: 3.0.0
servers: [{url: 'https://api.example.com'}]
components:
  parameters:
    Key: {name: api-key, in: header, required: true}
  schemas:
    Light:
      type: object
      required: [on, type]
      properties:
        on: {type: boolean, const: true}
        type: {type: string}
paths:
  /lights/{id}:
    put:
      parameters: [{$ref: '#/components/parameters/Key'}]
      requestBody:
        content:
          application/json:
            schema: {$ref: '#/components/schemas/Light'}
"""
    (ep,) = load_spec(doc).endpoints
    assert ep.required_headers == ("api-key",)
    assert [(f.name, f.fixed_value) for f in ep.required_body_fields] == [("on", True), ("type", None)]


def test_parse_path_template_examples():
    assert parse_path_template("/v1.1/devices").segments == (Literal("v1.1"), Literal("devices"))
    assert parse_path_template("/").segments == ()
    assert parse_path_template("/lights/{id}/state").segments == (
        Literal("lights"),
        Parameter("id"),
        Literal("state"),
    )
    assert parse_path_template("/a/b/") == parse_path_template("/a/b")


@pytest.mark.parametrize("raw", ["/a/{id", "/a/id}", "/a/{}", "a/b", "/a/x{y}"])
def test_parse_path_template_errors(raw):
    with pytest.raises(TemplateError):
        parse_path_template(raw)


def test_lookup_version_bump():
    spec = load_spec_file(SWITCHBOT)
    m = lookup_endpoint(spec, "GET", "/v1.0/devices")
    assert not m.is_exact
    assert m.candidates[0].endpoint.path == "/v1.1/devices"
    assert m.candidates[0].distance == 1
    assert lookup_endpoint(spec, "GET", "/v1.1/devices").is_exact
    assert lookup_endpoint(spec, "GET", "/v1.1/devices/").is_exact
    assert lookup_endpoint(spec, "GET", "/v1.1/devices?x=1").is_exact


def test_lookup_method_participates():
    spec = load_spec_file(SWITCHBOT)
    m = lookup_endpoint(spec, "POST", "/v1.1/devices")
    assert not m.is_exact and m.candidates[0].distance == 1


def _random_spec_and_paths(rng: random.Random):
    words = ["a", "b", "c", "dev", "v1"]
    templates = []
    while len(templates) < 20:
        segs = [rng.choice(words + ["{p}"]) for _ in range(rng.randint(0, 4))]
        raw = "/" + "/".join(segs)
        shape = tuple("*" if s == "{p}" else s for s in segs)
        if shape not in {t[1] for t in templates}:
            templates.append((raw, shape))
    doc = {
        "restfix_spec": 1,
        "api_name": "R",
        "domain": "r.example",
        "endpoints": [{"method": "GET", "path": t} for t, _ in templates],
    }
    paths = ["/" + "/".join(rng.choice(words + ["zz", "42"]) for _ in range(rng.randint(0, 4))) for _ in range(100)]
    return load_spec(json.dumps(doc)), [t for t, _ in templates], paths


@pytest.mark.parametrize("seed", range(3))
def test_lookup_matches_brute_force(seed):
    spec, templates, paths = _random_spec_and_paths(random.Random(seed))
    for path in paths:
        expected = [t for t in templates if brute_match(t, path)]
        got = lookup_endpoint(spec, "GET", path)
        if expected:
            assert got.is_exact and got.endpoint.path in expected
        else:
            assert not got.is_exact


_seg = st.text(alphabet="abcxyz019.-_", min_size=1, max_size=6)
_template = st.lists(
    st.one_of(_seg.map(Literal), st.from_regex(r"[a-z_]{1,5}", fullmatch=True).map(Parameter)),
    max_size=5,
).map(lambda segs: PathTemplate(tuple(segs)))


@given(_template)
def test_template_round_trip(t):
    assert parse_path_template(render(t)) == t


@settings(max_examples=60)
@given(_template, st.data())
def test_rendered_endpoint_matches_itself(t, data):
    names = {s.name for s in t.segments if isinstance(s, Parameter)}
    doc = {
        "restfix_spec": 1,
        "api_name": "P",
        "domain": "p.example",
        "endpoints": [{"method": "PATCH", "path": render(t)}],
    }
    spec = load_spec(json.dumps(doc))
    values = {n: data.draw(_seg) for n in names}
    m = lookup_endpoint(spec, "PATCH", render(t, values))
    assert m.is_exact and m.endpoint == spec.endpoints[0]
