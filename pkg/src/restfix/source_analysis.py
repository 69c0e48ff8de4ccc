"""Client source parsing and string/dict constant propagation.

The analysis is intra-file. A single top-to-bottom pass records every
binding per scope; resolution later picks the binding that is textually
closest before the use (see :meth:`SourceModel.lookup`).
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Union

from .errors import NotAMapping, SourceSyntaxError
from .spec_model import HTTP_METHODS, WILDCARD, SpecModel

MODULE_SCOPE = "<module>"
MAX_DEPTH = 8

URL_KEYWORDS = ("url",)
HEADER_KEYWORDS = ("headers",)
BODY_KEYWORDS = ("json", "data", "body")

# Longer names first so that e.g. "...patch" is not shadowed by a shorter suffix.
_METHOD_SUFFIXES = sorted((m.lower() for m in HTTP_METHODS), key=len, reverse=True)


@dataclass(frozen=True, order=True)
class Span:
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def to_dict(self) -> dict:
        return {
            "start_line": self.start_line,
            "start_col": self.start_col,
            "end_line": self.end_line,
            "end_col": self.end_col,
        }


@dataclass(frozen=True)
class AnalysisWarning:
    code: str
    message: str
    span: Span | None = None
    category: str | None = None

    @property
    def is_skip(self) -> bool:
        return self.code.startswith("skipped")

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "message": self.message,
            "span": self.span.to_dict() if self.span else None,
            "category": self.category,
        }


@dataclass(frozen=True)
class Known:
    text: str


@dataclass(frozen=True)
class Unknown:
    text: str


Part = Union[Known, Unknown]


@dataclass(frozen=True)
class ResolvedString:
    parts: tuple[Part, ...] = ()

    @property
    def fully_known(self) -> bool:
        return all(isinstance(p, Known) for p in self.parts)

    @property
    def value(self) -> str | None:
        """Concrete value when fully known, else None."""
        if not self.fully_known:
            return None
        return "".join(p.text for p in self.parts)

    def pattern(self) -> str:
        """Known text with every unknown part collapsed to :data:`WILDCARD`."""
        return "".join(p.text if isinstance(p, Known) else WILDCARD for p in self.parts)

    def display(self) -> str:
        return "".join(p.text if isinstance(p, Known) else "{" + p.text + "}" for p in self.parts)


@dataclass(frozen=True)
class ResolvedMap:
    entries: tuple[tuple[ResolvedString, ResolvedString], ...] = ()
    has_unknown_spread: bool = False

    def known_keys(self) -> list[str]:
        return [k.value for k, _ in self.entries if k.fully_known]

    @property
    def has_unknown_key(self) -> bool:
        return any(not k.fully_known for k, _ in self.entries)

    def get(self, key: str, case_insensitive: bool = False) -> ResolvedString | None:
        for k, v in self.entries:
            if k.fully_known and (k.value == key or (case_insensitive and k.value.lower() == key.lower())):
                return v
        return None


@dataclass(frozen=True)
class CallSite:
    method: str
    url: ResolvedString
    headers: ResolvedMap | None
    body: ResolvedMap | None
    call_span: Span
    endpoint_def_span: Span
    header_def_span: Span | None = None
    body_def_span: Span | None = None


@dataclass(frozen=True, eq=False)
class Binding:
    name: str
    scope: str
    value: ast.expr | None  # None: bound to something opaque (parameter, import, loop target)
    stmt: ast.stmt
    order: int
    synthetic: bool = False  # produced from x.update(...), x[k] = v or x += y


@dataclass(frozen=True)
class _Ctx:
    scope: str
    order: int


@dataclass(eq=False)
class SourceModel:
    file_path: str
    text: str
    syntax_tree: ast.Module
    bindings: dict[str, dict[str, list[Binding]]]
    _stmt_of: dict[int, ast.stmt] = field(repr=False, default_factory=dict)
    _scope_of: dict[int, str] = field(repr=False, default_factory=dict)
    _order_of: dict[int, int] = field(repr=False, default_factory=dict)
    _scope_parent: dict[str, str | None] = field(repr=False, default_factory=dict)

    @cached_property
    def _lines(self) -> list[str]:
        return self.text.splitlines(keepends=True)

    def span(self, node: ast.AST) -> Span:
        return Span(
            node.lineno,
            self._char_col(node.lineno, node.col_offset),
            node.end_lineno,
            self._char_col(node.end_lineno, node.end_col_offset),
        )

    def _char_col(self, line: int, byte_col: int) -> int:
        # ast reports UTF-8 byte offsets
        lines = self._lines
        if line - 1 >= len(lines):
            return byte_col
        return len(lines[line - 1].encode("utf-8")[:byte_col].decode("utf-8", "replace"))

    def statement_of(self, node: ast.AST) -> ast.stmt:
        return self._stmt_of.get(id(node), node)

    def context_of(self, node: ast.AST) -> _Ctx:
        stmt = self.statement_of(node)
        return _Ctx(self._scope_of.get(id(stmt), MODULE_SCOPE), self._order_of.get(id(stmt), 0))

    def scope_chain(self, scope: str) -> Iterator[str]:
        cur: str | None = scope
        while cur is not None:
            yield cur
            cur = self._scope_parent.get(cur)

    def lookup(self, name: str, scope: str, order: int) -> tuple[Binding | None, bool]:
        """Find the binding a use of ``name`` refers to.

        Returns ``(binding, late)``; ``late`` is set when only a binding that
        follows the use exists and was taken as a fallback.
        """
        for s in self.scope_chain(scope):
            entries = self.bindings.get(s, {}).get(name)
            if not entries:
                continue
            if s == MODULE_SCOPE and scope != MODULE_SCOPE:
                return entries[-1], False
            before = [b for b in entries if b.order < order]
            if before:
                return before[-1], False
        for s in (scope, MODULE_SCOPE):
            entries = self.bindings.get(s, {}).get(name)
            if entries:
                after = [b for b in entries if b.order > order]
                if after:
                    return after[-1], True
        return None, False


class _Binder(ast.NodeVisitor):
    """One pass over the module: statement order, scopes and bindings."""

    def __init__(self, model: SourceModel):
        self.m = model
        self.scope = MODULE_SCOPE
        self.counter = 0
        self.stmt: ast.stmt | None = None
        model._scope_parent[MODULE_SCOPE] = None

    def bind(self, name: str, value: ast.expr | None, synthetic: bool = False):
        table = self.m.bindings.setdefault(self.scope, {})
        table.setdefault(name, []).append(
            Binding(name, self.scope, value, self.stmt, self.m._order_of[id(self.stmt)], synthetic)
        )

    def generic_visit(self, node):
        if isinstance(node, ast.stmt):
            self.counter += 1
            self.m._order_of[id(node)] = self.counter
            self.m._scope_of[id(node)] = self.scope
            outer, self.stmt = self.stmt, node
            self._bind_stmt(node)
            self._visit_children(node)
            self.stmt = outer
        else:
            if self.stmt is not None:
                self.m._stmt_of[id(node)] = self.stmt
            if isinstance(node, ast.NamedExpr) and isinstance(node.target, ast.Name):
                self.bind(node.target.id, node.value)
            elif isinstance(node, ast.comprehension):
                for n in _target_names(node.target):
                    self.bind(n, None)
            super().generic_visit(node)

    def _visit_children(self, node: ast.stmt):
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            for dec in node.decorator_list:
                self.visit(dec)
            if not isinstance(node, ast.ClassDef):
                for d in node.args.defaults + [d for d in node.args.kw_defaults if d]:
                    self.visit(d)
            self.bind(node.name, None)
            outer = self.scope
            inner = node.name if outer == MODULE_SCOPE else f"{outer}.{node.name}"
            self.m._scope_parent[inner] = outer
            self.scope = inner
            if not isinstance(node, ast.ClassDef):
                a = node.args
                for arg in a.posonlyargs + a.args + a.kwonlyargs + [x for x in (a.vararg, a.kwarg) if x]:
                    self.bind(arg.arg, None)
            for child in node.body:
                self.visit(child)
            self.scope = outer
        else:
            ast.NodeVisitor.generic_visit(self, node)

    def _bind_stmt(self, node: ast.stmt):
        if isinstance(node, ast.Assign):
            for target in node.targets:
                self._bind_target(target, node.value)
        elif isinstance(node, ast.AnnAssign) and node.value is not None:
            self._bind_target(node.target, node.value)
        elif isinstance(node, ast.AugAssign) and isinstance(node.target, ast.Name):
            merged = ast.BinOp(left=ast.Name(node.target.id, ast.Load()), op=node.op, right=node.value)
            self.bind(node.target.id, ast.copy_location(merged, node), synthetic=True)
        elif isinstance(node, (ast.For, ast.AsyncFor)):
            for n in _target_names(node.target):
                self.bind(n, None)
        elif isinstance(node, (ast.With, ast.AsyncWith)):
            for item in node.items:
                if item.optional_vars is not None:
                    for n in _target_names(item.optional_vars):
                        self.bind(n, None)
        elif isinstance(node, (ast.Import, ast.ImportFrom)):
            for alias in node.names:
                self.bind((alias.asname or alias.name).split(".")[0], None)
        elif isinstance(node, ast.Try):
            for h in node.handlers:
                if h.name:
                    self.bind(h.name, None)
        elif isinstance(node, ast.Expr) and isinstance(node.value, ast.Call):
            call = node.value
            func = call.func
            if (
                isinstance(func, ast.Attribute)
                and func.attr == "update"
                and isinstance(func.value, ast.Name)
                and len(call.args) <= 1
            ):
                operands = list(call.args)
                if call.keywords:
                    operands.append(ast.Call(ast.Name("dict", ast.Load()), [], call.keywords))
                merged: ast.expr = ast.Name(func.value.id, ast.Load())
                for op in operands:
                    merged = ast.BinOp(left=merged, op=ast.BitOr(), right=op)
                self.bind(func.value.id, ast.copy_location(merged, node), synthetic=True)

    def _bind_target(self, target: ast.expr, value: ast.expr):
        if isinstance(target, ast.Name):
            self.bind(target.id, value)
        elif isinstance(target, (ast.Tuple, ast.List)):
            if isinstance(value, (ast.Tuple, ast.List)) and len(value.elts) == len(target.elts):
                for t, v in zip(target.elts, value.elts):
                    self._bind_target(t, v)
            else:
                for n in _target_names(target):
                    self.bind(n, None)
        elif isinstance(target, ast.Subscript) and isinstance(target.value, ast.Name):
            # HEADERS["k"] = v  ->  HEADERS | {"k": v}
            key = target.slice
            merged = ast.BinOp(
                left=ast.Name(target.value.id, ast.Load()),
                op=ast.BitOr(),
                right=ast.Dict(keys=[key], values=[value]),
            )
            self.bind(target.value.id, ast.copy_location(merged, target), synthetic=True)
        elif isinstance(target, ast.Starred):
            for n in _target_names(target.value):
                self.bind(n, None)


def _target_names(target: ast.expr) -> list[str]:
    return [n.id for n in ast.walk(target) if isinstance(n, ast.Name)]


def parse_source(file_path: str, text: str) -> SourceModel:
    try:
        tree = ast.parse(text, filename=file_path)
    except SyntaxError as exc:
        raise SourceSyntaxError(file_path, exc.lineno or 0, exc.offset or 0, exc.msg) from None
    except ValueError as exc:  # e.g. null bytes
        raise SourceSyntaxError(file_path, 0, 0, str(exc)) from None
    model = SourceModel(file_path=file_path, text=text, syntax_tree=tree, bindings={})
    binder = _Binder(model)
    for stmt in tree.body:
        binder.visit(stmt)
    return model


# ---------------------------------------------------------------------------
# Literal discovery


def find_api_literals(model: SourceModel, domain: str) -> list[tuple[str, Span]]:
    if not domain:
        raise ValueError("domain must be non-empty")
    hits: list[tuple[tuple[int, int], str, Span]] = []
    inside_fstring: set[int] = set()
    for node in ast.walk(model.syntax_tree):
        if isinstance(node, ast.JoinedStr):
            for v in node.values:
                inside_fstring.add(id(v))
            for v in node.values:
                if isinstance(v, ast.Constant) and isinstance(v.value, str) and domain in v.value:
                    hits.append(((node.lineno, node.col_offset), v.value, model.span(node)))
                    break
    for node in ast.walk(model.syntax_tree):
        if (
            isinstance(node, ast.Constant)
            and isinstance(node.value, str)
            and id(node) not in inside_fstring
            and domain in node.value
        ):
            hits.append(((node.lineno, node.col_offset), node.value, model.span(node)))
    hits.sort(key=lambda h: h[0])
    return [(text, span) for _, text, span in hits]


# ---------------------------------------------------------------------------
# Resolution


class _Resolver:
    def __init__(self, model: SourceModel, warnings: list[AnalysisWarning] | None):
        self.m = model
        self.warnings = warnings

    def deref(self, node: ast.Name, ctx: _Ctx) -> Binding | None:
        binding, late = self.m.lookup(node.id, ctx.scope, ctx.order)
        if late and self.warnings is not None:
            w = AnalysisWarning(
                "late-binding",
                f"{node.id!r} is used before its only assignment; using the later binding",
                self.m.span(binding.stmt),
            )
            if w not in self.warnings:
                self.warnings.append(w)
        return binding

    def string(self, node: ast.expr, ctx: _Ctx, depth: int) -> tuple[list[Part], bool | None]:
        """Resolve ``node`` under str() semantics.

        The flag reports whether the value is known to be a str (True), known
        not to be (False), or undetermined (None).
        """
        if isinstance(node, ast.Constant):
            v = node.value
            return [Known(str(v))], isinstance(v, str)
        if isinstance(node, ast.JoinedStr):
            parts: list[Part] = []
            for v in node.values:
                if isinstance(v, ast.Constant):
                    parts.append(Known(str(v.value)))
                elif isinstance(v, ast.FormattedValue) and v.conversion in (-1, 115) and v.format_spec is None:
                    parts.extend(self.string(v.value, ctx, depth)[0])
                else:
                    parts.append(Unknown(_text(v)))
            return parts, True
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Add):
            left, lk = self.string(node.left, ctx, depth)
            right, rk = self.string(node.right, ctx, depth)
            if lk is False or rk is False:
                return [Unknown(_text(node))], None
            return left + right, True if (lk or rk) else None
        if isinstance(node, ast.Name):
            if depth >= MAX_DEPTH:
                return [Unknown(node.id)], None
            b = self.deref(node, ctx)
            if b is None or b.value is None:
                return [Unknown(node.id)], None
            return self.string(b.value, _Ctx(b.scope, b.order), depth + 1)
        return [Unknown(_text(node))], None

    def scalar(self, node: ast.expr, ctx: _Ctx, depth: int) -> ResolvedString:
        """Resolve a dict value to canonical scalar text."""
        target, tctx, d = node, ctx, depth
        while isinstance(target, ast.Name) and d < MAX_DEPTH:
            b = self.deref(target, tctx)
            if b is None or b.value is None:
                break
            target, tctx, d = b.value, _Ctx(b.scope, b.order), d + 1
        if isinstance(target, ast.Constant) and not isinstance(target.value, (str, bytes)):
            return ResolvedString((Known(canonical_scalar(target.value)),))
        if isinstance(target, (ast.Dict, ast.List, ast.Tuple, ast.Set)):
            return ResolvedString((Unknown(_text(node)),))
        return ResolvedString(tuple(self.string(node, ctx, depth)[0]))

    def mapping(self, node: ast.expr, ctx: _Ctx, depth: int) -> tuple[list, bool]:
        if depth > MAX_DEPTH:
            raise NotAMapping(_text(node))
        if isinstance(node, ast.Dict):
            entries: list = []
            spread = False
            for k, v in zip(node.keys, node.values):
                if k is None:
                    try:
                        sub, sub_spread = self.mapping(v, ctx, depth)
                    except NotAMapping:
                        spread = True
                        continue
                    entries = _merge(entries, sub)
                    spread = spread or sub_spread
                else:
                    key = ResolvedString(tuple(self.string(k, ctx, depth)[0]))
                    entries = _merge(entries, [(key, self.scalar(v, ctx, depth))])
            return entries, spread
        if isinstance(node, ast.Name):
            b = self.deref(node, ctx)
            if b is None or b.value is None:
                raise NotAMapping(node.id)
            # only binding hops count toward the depth cap
            return self.mapping(b.value, _Ctx(b.scope, b.order), depth + 1)
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.BitOr):
            sides = []
            for side in (node.left, node.right):
                try:
                    sides.append(self.mapping(side, ctx, depth))
                except NotAMapping:
                    sides.append(None)
            if sides[0] is None and sides[1] is None:
                raise NotAMapping(_text(node))
            entries, spread = [], False
            for s in sides:
                if s is None:
                    spread = True
                else:
                    entries = _merge(entries, s[0])
                    spread = spread or s[1]
            return entries, spread
        if isinstance(node, ast.Call):
            func = node.func
            if isinstance(func, ast.Name) and func.id == "dict" and len(node.args) <= 1:
                entries, spread = [], False
                if node.args:
                    try:
                        entries, spread = self.mapping(node.args[0], ctx, depth)
                    except NotAMapping:
                        spread = True
                for kw in node.keywords:
                    if kw.arg is None:
                        try:
                            sub, sub_spread = self.mapping(kw.value, ctx, depth)
                            entries = _merge(entries, sub)
                            spread = spread or sub_spread
                        except NotAMapping:
                            spread = True
                    else:
                        entries = _merge(
                            entries, [(ResolvedString((Known(kw.arg),)), self.scalar(kw.value, ctx, depth))]
                        )
                return entries, spread
            if isinstance(func, ast.Attribute) and func.attr == "copy" and not node.args:
                return self.mapping(func.value, ctx, depth)
        raise NotAMapping(_text(node))


def _merge(entries: list, new: list) -> list:
    """Dict-update semantics with case-insensitive keys; later entries win."""
    out = list(entries)
    for key, value in new:
        if key.fully_known:
            low = key.value.lower()
            out = [(k, v) for k, v in out if not (k.fully_known and k.value.lower() == low)]
        out.append((key, value))
    return out


def _text(node: ast.AST) -> str:
    try:
        return ast.unparse(node)
    except Exception:  # pragma: no cover - unparse handles every parsed node
        return type(node).__name__


def canonical_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def resolve_string_expression(
    model: SourceModel, expr: ast.expr, warnings: list[AnalysisWarning] | None = None
) -> ResolvedString:
    parts, _ = _Resolver(model, warnings).string(expr, model.context_of(expr), 0)
    return ResolvedString(tuple(parts))


def resolve_mapping_expression(
    model: SourceModel, expr: ast.expr, warnings: list[AnalysisWarning] | None = None
) -> ResolvedMap:
    entries, spread = _Resolver(model, warnings).mapping(expr, model.context_of(expr), 0)
    return ResolvedMap(tuple(entries), spread)


def resolve_name(model: SourceModel, name: str, scope: str = MODULE_SCOPE) -> ResolvedString:
    """Resolve the final value of ``name`` as seen at the end of ``scope``."""
    return ResolvedString(tuple(_Resolver(model, None).string(ast.Name(name, ast.Load()), _Ctx(scope, 1 << 30), 0)[0]))


# ---------------------------------------------------------------------------
# Call-site extraction


def _callee_method(func: ast.expr) -> str | None:
    if isinstance(func, ast.Attribute):
        name = func.attr
    elif isinstance(func, ast.Name):
        name = func.id
    else:
        return None
    name = name.lower()
    for suffix in _METHOD_SUFFIXES:
        if name.endswith(suffix):
            return suffix.upper()
    return None


def _keyword(call: ast.Call, names: tuple[str, ...]) -> ast.expr | None:
    for name in names:
        for kw in call.keywords:
            if kw.arg == name:
                return kw.value
    return None


def _definition_stmt(model: SourceModel, expr: ast.expr, through_synthetic: bool) -> ast.stmt | None:
    """Statement where the value of ``expr`` is built.

    Follows plain name aliases; with ``through_synthetic`` also walks back
    across update-style rebindings to the original definition.
    """
    ctx = model.context_of(expr)
    node = expr
    stmt = None
    for _ in range(MAX_DEPTH):
        if not isinstance(node, ast.Name):
            break
        b, _late = model.lookup(node.id, ctx.scope, ctx.order)
        if b is None:
            break
        stmt = b.stmt
        ctx = _Ctx(b.scope, b.order)
        if b.value is None:
            break
        if through_synthetic and b.synthetic and isinstance(b.value, ast.BinOp):
            node = b.value.left
            continue
        node = b.value
    return stmt


def _unwrap_body(node: ast.expr) -> ast.expr:
    # data=json.dumps({...})
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Attribute)
        and node.func.attr == "dumps"
        and node.args
    ):
        return node.args[0]
    return node


def extract_call_sites(model: SourceModel, spec: SpecModel) -> tuple[list[CallSite], list[AnalysisWarning]]:
    calls = [n for n in ast.walk(model.syntax_tree) if isinstance(n, ast.Call)]
    calls.sort(key=lambda c: (c.lineno, c.col_offset))
    sites: list[CallSite] = []
    warnings: list[AnalysisWarning] = []
    for call in calls:
        method = _callee_method(call.func)
        if method is None:
            continue
        url_expr = _keyword(call, URL_KEYWORDS) or (call.args[0] if call.args else None)
        if url_expr is None or isinstance(url_expr, ast.Starred):
            continue
        local: list[AnalysisWarning] = []
        resolver = _Resolver(model, local)
        ctx = model.context_of(call)
        url = ResolvedString(tuple(resolver.string(url_expr, ctx, 0)[0]))
        if spec.domain not in url.pattern():
            continue
        call_stmt = model.statement_of(call)
        call_span = model.span(call_stmt)
        if not url.fully_known:
            local.append(
                AnalysisWarning("unresolved-url", f"URL only partially resolved: {url.display()}", call_span)
            )
        url_stmt = _definition_stmt(model, url_expr, through_synthetic=False) or call_stmt

        maps: dict[str, tuple[ResolvedMap | None, Span | None]] = {}
        for label, names in (("headers", HEADER_KEYWORDS), ("body", BODY_KEYWORDS)):
            expr = _keyword(call, names)
            if expr is None:
                maps[label] = (None, None)
                continue
            if label == "body":
                expr = _unwrap_body(expr)
            def_stmt = _definition_stmt(model, expr, through_synthetic=True)
            try:
                entries, spread = resolver.mapping(expr, ctx, 0)
                rmap = ResolvedMap(tuple(entries), spread)
            except NotAMapping:
                rmap = ResolvedMap((), True)
                local.append(
                    AnalysisWarning(f"opaque-{label}", f"{label} argument is not a traceable dict: {_text(expr)}", call_span)
                )
            maps[label] = (rmap, model.span(def_stmt) if def_stmt is not None else None)

        sites.append(
            CallSite(
                method=method,
                url=url,
                headers=maps["headers"][0],
                body=maps["body"][0],
                call_span=call_span,
                endpoint_def_span=model.span(url_stmt),
                header_def_span=maps["headers"][1],
                body_def_span=maps["body"][1],
            )
        )
        for w in local:
            if w not in warnings:
                warnings.append(w)
    return sites, warnings
