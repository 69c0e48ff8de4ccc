"""Independent oracles and random program generators shared by the tests.

Nothing here imports restfix internals: the oracles recompute every verdict
from first principles so they can be compared against the library.
"""

from __future__ import annotations

import json
import random
import string
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

FIXTURES = Path(__file__).parent / "fixtures"

DOMAIN = "api.example.com"
HOST = f"https://{DOMAIN}"


# ---------------------------------------------------------------------------
# reference interpreter


def mini_eval(program: str) -> dict:
    """Run a program from the supported subset and return its module namespace.

    The generated programs only bind literals, f-strings, concatenations and
    dict merges, so plain execution is the reference semantics.
    """
    namespace: dict = {}
    exec(compile(program, "<oracle>", "exec"), namespace)
    namespace.pop("__builtins__", None)
    return namespace


# ---------------------------------------------------------------------------
# path matching by definition


def path_segments(path: str) -> list[str]:
    return [s for s in path.split("?", 1)[0].split("/") if s]


def is_param(seg: str) -> bool:
    return seg.startswith("{") and seg.endswith("}") and len(seg) > 2


def brute_match(template: str, path: str) -> bool:
    t, p = path_segments(template), path_segments(path)
    if len(t) != len(p):
        return False
    return all(is_param(a) or a == b for a, b in zip(t, p))


def seg_edit_distance(template: str, path: str) -> int:
    t, p = tuple(path_segments(template)), tuple(path_segments(path))

    @lru_cache(maxsize=None)
    def d(i: int, j: int) -> int:
        if i == len(t):
            return len(p) - j
        if j == len(p):
            return len(t) - i
        same = is_param(t[i]) or t[i] == p[j]
        return min(d(i + 1, j + 1) + (0 if same else 1), d(i + 1, j) + 1, d(i, j + 1) + 1)

    return d(0, 0)


# ---------------------------------------------------------------------------
# brute-force detection checker over plain data


@dataclass
class PlainEndpoint:
    method: str
    path: str
    headers: list[str] = field(default_factory=list)
    body: list[tuple[str, object]] = field(default_factory=list)  # (name, fixed value or None)


def canonical(value) -> str:
    if isinstance(value, str):
        return value
    return json.dumps(value)


def brute_verdict(
    endpoints: list[PlainEndpoint],
    method: str,
    url: str,
    headers: dict | None,
    body: dict | None,
) -> dict:
    """Categories and payload sets a correct detector must report for one call."""
    assert url.startswith(HOST)
    path = url[len(HOST):]
    out: dict = {}
    target = next((e for e in endpoints if e.method == method and brute_match(e.path, path)), None)
    if target is None:
        scored = [(seg_edit_distance(e.path, path) + (e.method != method), i) for i, e in enumerate(endpoints)]
        scored = [s for s in scored if s[0] <= 2]
        best = min((s[0] for s in scored), default=None)
        nearest = [endpoints[i] for s, i in scored if s == best]
        out["Endpoint"] = frozenset(f"{e.method} {e.path}" for e in nearest)
        if len(nearest) != 1:
            return out
        target = nearest[0]
    declared_h = {k.lower() for k in (headers or {})}
    missing_h = frozenset(h for h in target.headers if h.lower() not in declared_h)
    if missing_h:
        out["RequestHeaders"] = missing_h
    declared_b = body or {}
    missing_b = frozenset(n for n, _ in target.body if n not in declared_b)
    wrong = frozenset(
        (n, canonical(v), canonical(declared_b[n]))
        for n, v in target.body
        if v is not None and n in declared_b and canonical(v) != canonical(declared_b[n])
    )
    if missing_b or wrong:
        out["RequestBody"] = (missing_b, wrong)
    return out


def report_verdict(report) -> dict:
    """Project a DeviationReport onto the same shape as :func:`brute_verdict`."""
    out: dict = {}
    for d in report.deviations:
        for u in d.unsatisfied:
            e = u.expected
            if u.category.value == "Endpoint":
                out["Endpoint"] = frozenset(c for c in e["candidates"])
            elif u.category.value == "RequestHeaders":
                out["RequestHeaders"] = frozenset(e["missing"])
            else:
                out["RequestBody"] = (
                    frozenset(e["missing"]),
                    frozenset((m["field"], m["expected"], m["actual"]) for m in e["mismatched"]),
                )
    return out


def native_spec_text(endpoints: list[PlainEndpoint], api_name: str = "Gen API") -> str:
    doc = {"restfix_spec": 1, "api_name": api_name, "domain": DOMAIN, "endpoints": []}
    for e in endpoints:
        entry: dict = {"method": e.method, "path": e.path}
        if e.headers:
            entry["required_headers"] = list(e.headers)
        if e.body:
            entry["required_body"] = [{"name": n} if v is None else {"name": n, "value": v} for n, v in e.body]
        doc["endpoints"].append(entry)
    return json.dumps(doc)


# ---------------------------------------------------------------------------
# random programs


WORDS = ["devices", "lights", "scenes", "status", "commands", "rooms", "zones", "users", "v1", "v2", "beta"]
HEADER_NAMES = ["Authorization", "sign", "t", "nonce", "X-Key", "Accept", "Content-Type"]
BODY_NAMES = ["type", "on", "command", "name", "level", "mode"]
METHODS = ["GET", "POST", "PUT", "DELETE"]


def ident(rng: random.Random) -> str:
    return rng.choice(string.ascii_uppercase) + "".join(rng.choices(string.ascii_uppercase + "_", k=5))


def text_literal(rng: random.Random) -> str:
    return "".join(rng.choices(string.ascii_letters + string.digits + "-_./", k=rng.randint(0, 8)))


class StringProgram:
    """Random straight-line program of string bindings."""

    def __init__(self, rng: random.Random, n: int = 12):
        self.lines: list[str] = []
        names: list[str] = []
        for _ in range(n):
            target = rng.choice(names) if names and rng.random() < 0.2 else ident(rng)
            kind = rng.random()
            if not names or kind < 0.3:
                expr = repr(text_literal(rng))
            elif kind < 0.6:
                a, b = rng.choice(names), rng.choice(names)
                expr = rng.choice([f"{a} + {b}", f"{a} + {text_literal(rng)!r}", f"{text_literal(rng)!r} + {b}"])
            elif kind < 0.9:
                holes = [rng.choice(names) for _ in range(rng.randint(1, 3))]
                body = "".join("{" + h + "}" + text_literal(rng).replace("{", "").replace("}", "") for h in holes)
                expr = "f" + repr(body)
            else:
                expr = rng.choice(names)
            self.lines.append(f"{target} = {expr}")
            if target not in names:
                names.append(target)
        self.names = names

    @property
    def source(self) -> str:
        return "\n".join(self.lines) + "\n"


class MapProgram:
    """Random dict bindings combined by literals, ``**`` spreads, ``|``, ``dict()`` and ``.update``."""

    def __init__(self, rng: random.Random, keys: list[str], n: int = 6):
        self.lines: list[str] = []
        names: list[str] = []
        for _ in range(n):
            target = ident(rng)
            kind = rng.random()
            lit = "{" + ", ".join(f"{k!r}: {text_literal(rng)!r}" for k in rng.sample(keys, rng.randint(0, 3))) + "}"
            if not names or kind < 0.35:
                self.lines.append(f"{target} = {lit}")
            elif kind < 0.55:
                a = rng.choice(names)
                self.lines.append(f"{target} = {{**{a}, **{lit}}}")
            elif kind < 0.7:
                a, b = rng.choice(names), rng.choice(names)
                self.lines.append(f"{target} = {a} | {b}")
            elif kind < 0.85:
                a = rng.choice(names)
                self.lines.append(f"{target} = dict({a})")
            else:
                a = rng.choice(names)
                self.lines.append(f"{target} = {a}.copy()")
                self.lines.append(f"{target}.update({lit})")
            names.append(target)
        self.names = names

    @property
    def source(self) -> str:
        return "\n".join(self.lines) + "\n"


def random_spec(rng: random.Random) -> list[PlainEndpoint]:
    endpoints: list[PlainEndpoint] = []
    seen = set()
    for _ in range(rng.randint(1, 5)):
        segs = [rng.choice(WORDS) for _ in range(rng.randint(1, 3))]
        if rng.random() < 0.4:
            segs.insert(rng.randint(1, len(segs)), "{id}")
        method = rng.choice(METHODS)
        path = "/" + "/".join(segs)
        shape = (method, tuple("*" if is_param(s) else s for s in segs))
        if shape in seen:
            continue
        seen.add(shape)
        headers = rng.sample(HEADER_NAMES, rng.randint(0, 3))
        body = []
        if method in ("POST", "PUT"):
            for name in rng.sample(BODY_NAMES, rng.randint(0, 3)):
                fixed = rng.choice([None, None, "light", "command", True, False, 3])
                body.append((name, fixed))
        endpoints.append(PlainEndpoint(method, path, headers, body))
    return endpoints


@dataclass
class CallProgram:
    source: str
    method: str
    url: str
    headers: dict | None
    body: dict | None


def random_call_program(rng: random.Random, endpoints: list[PlainEndpoint]) -> CallProgram:
    """A program with one request call that conforms, or not, at random."""
    e = rng.choice(endpoints)
    method = e.method if rng.random() < 0.85 else rng.choice(METHODS)
    segs = [("dev42" if is_param(s) else s) for s in path_segments(e.path)]
    roll = rng.random()
    if roll < 0.25:
        segs[rng.randrange(len(segs))] = rng.choice(WORDS + ["v1.0", "items"])
    elif roll < 0.35:
        segs.append(rng.choice(WORDS))
    elif roll < 0.4 and len(segs) > 1:
        segs.pop(rng.randrange(len(segs)))
    lines = [f"HOST = {HOST!r}"]
    if rng.random() < 0.5:
        lines.append(f"BASE = HOST + {'/' + segs[0]!r}")
        rest = "/".join(segs[1:])
        url_expr = "f'{BASE}/" + rest + "'" if rest else "BASE"
    else:
        lines.append(f"PREFIX = {'/' + '/'.join(segs)!r}")
        url_expr = "HOST + PREFIX"
    lines.append(f"URL = {url_expr}")

    headers = None
    if rng.random() < 0.85:
        names = [h for h in e.headers if rng.random() < 0.7] + rng.sample(HEADER_NAMES, rng.randint(0, 2))
        names = list(dict.fromkeys(names))
        if rng.random() < 0.3:
            names = [n.upper() if rng.random() < 0.5 else n for n in names]
            names = list({n.lower(): n for n in names}.values())
        headers = {n: f"value-{i}" for i, n in enumerate(names)}
        if len(headers) > 1 and rng.random() < 0.4:
            items = list(headers.items())
            cut = len(items) // 2
            lines.append(f"AUTH = {dict(items[:cut])!r}")
            lines.append(f"HEADERS = {{**AUTH, **{dict(items[cut:])!r}}}")
        else:
            lines.append(f"HEADERS = {headers!r}")

    body = None
    if e.body or rng.random() < 0.2:
        body = {}
        for name, fixed in e.body:
            if rng.random() < 0.8:
                body[name] = fixed if (fixed is not None and rng.random() < 0.7) else rng.choice(["x", "light", 7, True, False])
        lines.append(f"BODY = {body!r}")

    call = f"requests.{method.lower()}(URL"
    if headers is not None:
        call += ", headers=HEADERS"
    if body is not None:
        call += ", json=BODY"
    call += ")"
    lines += ["", "", "def send():", f"    return {call}"]
    ns = mini_eval("\n".join(lines[:-4]))  # bindings only; requests is never imported
    return CallProgram("import requests\n" + "\n".join(lines) + "\n", method, ns["URL"], ns.get("HEADERS"), ns.get("BODY"))


def planted_call_file(rng: random.Random) -> tuple[str, int]:
    """A file mixing qualifying request calls with decoys; returns (source, planted count)."""
    lines = ["import requests", f"HOST = {HOST!r}", "OTHER = 'https://elsewhere.org'", ""]
    count = 0
    for i in range(rng.randint(0, 8)):
        kind = rng.random()
        if kind < 0.5:
            method = rng.choice(["get", "post", "put", "patch", "delete", "head"])
            url = rng.choice(["HOST + '/a'", "f'{HOST}/b/{x}'", f"'{HOST}/c'"])
            form = rng.choice([f"requests.{method}({url})", f"session.{method}(url={url})", f"client.async_{method}({url}, timeout=3)"])
            count += 1
        elif kind < 0.7:
            form = f"requests.get(OTHER + '/{i}')"
        elif kind < 0.85:
            form = f"print(HOST + '/{i}')"
        else:
            form = f"requests.request('GET', HOST + '/{i}')"
        lines.append(f"def f{i}(x=None, session=None, client=None):")
        lines.append(f"    return {form}")
        lines.append("")
    return "\n".join(lines) + "\n", count
