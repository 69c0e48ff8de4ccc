from __future__ import annotations

import ast
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from restfix.errors import NotAMapping, SourceSyntaxError
from restfix.source_analysis import (
    MODULE_SCOPE,
    Known,
    Unknown,
    extract_call_sites,
    find_api_literals,
    parse_source,
    resolve_mapping_expression,
    resolve_name,
    resolve_string_expression,
)
from restfix.spec_model import load_spec, load_spec_file
from support import DOMAIN, FIXTURES, MapProgram, StringProgram, mini_eval, planted_call_file

SWITCHBOT = load_spec_file(FIXTURES / "switchbot_v11.yaml")
GEN_SPEC = load_spec(f'{{"restfix_spec": 1, "api_name": "G", "domain": "{DOMAIN}", "endpoints": []}}')


def _probe(source: str, expr: str):
    """Append ``__probe = <expr>`` and return (model, value node)."""
    model = parse_source("<t>", source + f"\n__probe = {expr}\n")
    node = model.syntax_tree.body[-1].value
    return model, node


def test_missing_headers_bindings():
    model = parse_source("missing_headers.py", (FIXTURES / "missing_headers.py").read_text())
    headers = model.bindings["get_device_list"]["HEADERS"][-1].value
    assert isinstance(headers, ast.Dict)
    assert [k.value for k in headers.keys] == ["Authorization", "Content-Type"]
    rmap = resolve_mapping_expression(model, headers)
    assert rmap.known_keys() == ["Authorization", "Content-Type"]
    assert not rmap.has_unknown_spread


def test_empty_file():
    model = parse_source("e.py", "")
    assert model.syntax_tree.body == []
    assert all(not names for names in model.bindings.values())


def test_syntax_error_has_position():
    with pytest.raises(SourceSyntaxError) as info:
        parse_source("bad.py", "x = 1\ny = (\n")
    assert info.value.line == 2 or info.value.line == 3
    assert info.value.file_path == "bad.py"


def test_thirty_assignment_binding_count():
    rng = random.Random(7)
    names = [f"name_{rng.randint(0, 19)}" for _ in range(30)]
    text = "".join(f"{n} = {i!r}\n" for i, n in enumerate(names))
    # independent scan: text before the first " = " on each line
    distinct = set()
    for line in text.splitlines():
        head, _, _ = line.partition(" = ")
        distinct.add(head)
    model = parse_source("t.py", text)
    assert len(model.bindings[MODULE_SCOPE]) == len(distinct)


def test_find_api_literals_version_bump():
    text = (FIXTURES / "version_bump.py").read_text()
    hits = find_api_literals(parse_source("vb.py", text), "api.switch-bot.com")
    assert len(hits) == 1
    literal, span = hits[0]
    assert literal == "https://api.switch-bot.com"
    assert "API_HOST" in text.splitlines()[span.start_line - 1]


def test_find_api_literals_absent_and_comment_only():
    assert find_api_literals(parse_source("a.py", "x = 'https://other.org'\n"), "api.switch-bot.com") == []
    text = "# see https://api.switch-bot.com for docs\nx = 1\n"
    assert find_api_literals(parse_source("a.py", text), "api.switch-bot.com") == []


def test_fstring_version_bump():
    model, node = _probe("API_HOST = 'https://api.switch-bot.com'\nURL = f'{API_HOST}/v1.0/devices'\n", "URL")
    r = resolve_string_expression(model, node)
    assert r.parts == (Known("https://api.switch-bot.com"), Known("/v1.0/devices"))
    assert r.fully_known


def test_bare_literal():
    model, node = _probe("", "'abc'")
    assert resolve_string_expression(model, node).parts == (Known("abc"),)


def test_concat_chain_of_five_matches_interpreter():
    src = "A = 'h'\nB = A + 'tt'\nC = B + 'ps://'\nD = C + 'x.org'\nE = D + '/p'\n"
    model, node = _probe(src, "E")
    assert resolve_string_expression(model, node).value == mini_eval(src)["E"]


def test_unknown_parts_keep_source_text():
    model, node = _probe("ID = get_id()\n", "f'https://h/{ID}/x' + suffix")
    r = resolve_string_expression(model, node)
    assert not r.fully_known
    assert Unknown("get_id()") in r.parts and Unknown("suffix") in r.parts
    assert r.parts[0] == Known("https://h/")


def test_cyclic_bindings_terminate():
    model, node = _probe("A = B\nB = A\n", "A")
    assert not resolve_string_expression(model, node).fully_known


def test_non_str_concat_is_unknown():
    model, node = _probe("N = 3\n", "N + 4")
    assert not resolve_string_expression(model, node).fully_known


def test_function_scope_prefers_local_then_module():
    src = "X = 'mod'\ndef f():\n    X = 'local'\n    return X\ndef g():\n    return X\n"
    model = parse_source("s.py", src)
    assert resolve_name(model, "X", "f").value == "local"
    assert resolve_name(model, "X", "g").value == "mod"


def test_empty_map_and_not_a_mapping():
    model, node = _probe("", "{}")
    assert resolve_mapping_expression(model, node).entries == ()
    model, node = _probe("H = load()\n", "H")
    with pytest.raises(NotAMapping):
        resolve_mapping_expression(model, node)


def test_merge_of_two_literals_matches_interpreter():
    src = "A = {'Authorization': 'x', 'Accept': 'y'}\nB = {'sign': 's', 'Accept': 'z'}\nC = {**A, **B}\n"
    model, node = _probe(src, "C")
    r = resolve_mapping_expression(model, node)
    assert set(r.known_keys()) == set(mini_eval(src)["C"])
    assert r.get("Accept").value == "z"


def test_scalar_values_canonical():
    model, node = _probe("", "{'on': True, 'off': False, 'n': 3, 'f': 2.0, 'z': None}")
    r = resolve_mapping_expression(model, node)
    assert {k: r.get(k).value for k in r.known_keys()} == {"on": "true", "off": "false", "n": "3", "f": "2", "z": "null"}


def test_unresolvable_spread_flagged():
    model, node = _probe("def helper():\n    return {}\n", "{**helper(), 'a': 'b'}")
    r = resolve_mapping_expression(model, node)
    assert r.has_unknown_spread and r.known_keys() == ["a"]


def test_missing_headers_call_site():
    model = parse_source("missing_headers.py", (FIXTURES / "missing_headers.py").read_text())
    sites, warnings = extract_call_sites(model, SWITCHBOT)
    assert len(sites) == 1
    site = sites[0]
    assert site.method == "GET"
    assert site.url.value == "https://api.switch-bot.com/v1.1/devices"
    assert len(site.headers.entries) == 2
    assert any(w.code == "late-binding" for w in warnings)


def test_no_calls():
    assert extract_call_sites(parse_source("n.py", "x = 1\n"), SWITCHBOT) == ([], [])


@pytest.mark.parametrize("seed", range(50))
def test_planted_call_count(seed):
    source, planted = planted_call_file(random.Random(seed))
    model = parse_source("p.py", source)
    sites, _ = extract_call_sites(model, GEN_SPEC)
    assert len(sites) == planted
    assert [s.call_span for s in sites] == sorted(s.call_span for s in sites)
    assert extract_call_sites(model, GEN_SPEC) == (sites, extract_call_sites(model, GEN_SPEC)[1])


@pytest.mark.parametrize("seed", range(40))
def test_random_string_programs_match_interpreter(seed):
    prog = StringProgram(random.Random(seed))
    env = mini_eval(prog.source)
    model = parse_source("r.py", prog.source)
    known = 0
    for name in prog.names:
        r = resolve_name(model, name)
        if r.fully_known:
            known += 1
            assert r.value == env[name], name
    # only the depth cap may leave a static program unresolved
    assert known >= len(prog.names) // 2


@pytest.mark.parametrize("seed", range(40))
def test_random_map_programs_match_interpreter(seed):
    keys = ["Authorization", "sign", "t", "nonce", "Accept"]
    prog = MapProgram(random.Random(seed), keys)
    env = mini_eval(prog.source)
    for name in prog.names:
        model, probe = _probe(prog.source, name)
        r = resolve_mapping_expression(model, probe)
        assert not r.has_unknown_spread
        assert set(r.known_keys()) == set(env[name])
        for k, v in env[name].items():
            assert r.get(k).value == v


_lit = st.text(alphabet="abc/:._-", max_size=6)


@settings(max_examples=80)
@given(st.lists(_lit, min_size=2, max_size=6), st.data())
def test_monotone_unknowns(pieces, data):
    idx = data.draw(st.integers(0, len(pieces) - 1))
    expr = " + ".join(repr(p) for p in pieces)
    opaque = " + ".join("opaque()" if i == idx else repr(p) for i, p in enumerate(pieces))
    model, node = _probe("", expr)
    before = resolve_string_expression(model, node)
    model, node = _probe("", opaque)
    after = resolve_string_expression(model, node)
    assert before.fully_known and not after.fully_known
    prefix = "".join(pieces[:idx])
    known_prefix = ""
    for p in after.parts:
        if isinstance(p, Unknown):
            break
        known_prefix += p.text
    assert known_prefix == prefix


def test_spans_use_character_columns():
    src = "X = 'ü'; Y = 'https://api.switch-bot.com'\n"
    (hit,) = find_api_literals(parse_source("u.py", src), "api.switch-bot.com")
    assert src[hit[1].start_col] == "'"
