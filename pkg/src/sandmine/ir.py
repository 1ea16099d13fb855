"""Mini-app intermediate representation: data model, parser, serializer.

An ``.app`` file is line oriented. Blank lines and ``#`` comments are
ignored; indentation is cosmetic.

::

    app <id>
    permission <permission-string>
    meta <key> <value>                 # value runs to end of line, or is quoted
    extern <api> [<api> ...]           # external API identifiers
    entry <method>
    screen <id> [on_enter=<method>]    # the first screen is the start screen
      widget <id> handler=<method> [target=<screen>] [weight=<rational>]
    method <id>(<param>, ...)
      <label>:
      x = <atom>                       # atom: variable, int, "string", true, false, null
      x = call f(a, b)
      call f(a, b)
      if x goto <target> else <target>
      goto <target>
      return [x]
    end

Branch targets are labels or statement indices; the index equal to the
statement count denotes the method exit. Variables named ``this.<field>``
live in the per-run global store, everything else is method local.

``call f`` resolves to a declared method when one exists, otherwise to an
external API identifier if ``f`` is declared ``extern`` or is present in the
catalog handed to the parser. Anything else is a reference error.
"""

from __future__ import annotations

import logging
import re
import shlex
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Union

logger = logging.getLogger(__name__)

MethodId = str
ApiId = str

GLOBAL_PREFIX = "this."


class IRError(ValueError):
    """Base class for all IR front-end errors."""


class IRSyntaxError(IRError):
    def __init__(self, message: str, line: int, column: int = 1, source: str | None = None):
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{column}: {message}")
        self.line = line
        self.column = column


class IRReferenceError(IRError):
    def __init__(self, name: str, context: str):
        super().__init__(f"unresolved reference {name!r} ({context})")
        self.name = name


class IRDuplicateError(IRError):
    def __init__(self, kind: str, name: str):
        super().__init__(f"duplicate {kind} {name!r}")
        self.kind = kind
        self.name = name


class DatasetError(IRError):
    def __init__(self, pair_id: str, message: str):
        super().__init__(f"pair {pair_id!r}: {message}")
        self.pair_id = pair_id


# --------------------------------------------------------------------------
# data model

Constant = Union[int, str, bool, None]


@dataclass(frozen=True)
class Const:
    value: Constant


@dataclass(frozen=True)
class Assign:
    dst: str
    src: Union[str, Const]


@dataclass(frozen=True)
class CallApi:
    api: ApiId
    args: tuple[str, ...] = ()
    ret: Optional[str] = None


@dataclass(frozen=True)
class CallMethod:
    callee: MethodId
    args: tuple[str, ...] = ()
    ret: Optional[str] = None


@dataclass(frozen=True)
class Branch:
    """Two-way jump. ``cond`` is ``None`` for an unconditional ``goto``."""

    cond: Optional[str]
    then_index: int
    else_index: int


@dataclass(frozen=True)
class Return:
    value: Optional[str] = None


Statement = Union[Assign, CallApi, CallMethod, Branch, Return]


def is_global(var: str) -> bool:
    return var.startswith(GLOBAL_PREFIX)


def reads(stmt: Statement) -> tuple[str, ...]:
    """Variables read by a statement."""
    if isinstance(stmt, Assign):
        return (stmt.src,) if isinstance(stmt.src, str) else ()
    if isinstance(stmt, (CallApi, CallMethod)):
        return stmt.args
    if isinstance(stmt, Branch):
        return (stmt.cond,) if stmt.cond is not None else ()
    if isinstance(stmt, Return):
        return (stmt.value,) if stmt.value is not None else ()
    raise TypeError(stmt)


def successors(stmt: Statement, index: int) -> tuple[int, ...]:
    """Intraprocedural successor indices; ``len(statements)`` is the exit."""
    if isinstance(stmt, Branch):
        if stmt.then_index == stmt.else_index:
            return (stmt.then_index,)
        return (stmt.then_index, stmt.else_index)
    if isinstance(stmt, Return):
        return ()
    return (index + 1,)


@dataclass(frozen=True)
class MethodBody:
    id: MethodId
    params: tuple[str, ...] = ()
    statements: tuple[Statement, ...] = ()


@dataclass(frozen=True)
class Widget:
    id: str
    handler: MethodId
    transition: Optional[str] = None
    weight: Fraction = Fraction(1)


@dataclass(frozen=True)
class Screen:
    id: str
    widgets: tuple[Widget, ...] = ()
    on_enter: Optional[MethodId] = None


@dataclass(frozen=True)
class Manifest:
    permissions: frozenset[str] = frozenset()
    metadata: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class AppModel:
    id: str
    manifest: Manifest
    screens: tuple[Screen, ...]
    methods: dict[MethodId, MethodBody]
    entry_points: tuple[MethodId, ...]
    externs: frozenset[ApiId] = frozenset()

    @property
    def start_screen(self) -> Optional[Screen]:
        return self.screens[0] if self.screens else None

    def screen(self, screen_id: str) -> Screen:
        for s in self.screens:
            if s.id == screen_id:
                return s
        raise KeyError(screen_id)

    def handlers(self) -> list[MethodId]:
        """Every GUI-reachable code root: widget handlers and on_enter methods."""
        out = []
        for s in self.screens:
            if s.on_enter is not None:
                out.append(s.on_enter)
            out.extend(w.handler for w in s.widgets)
        return out

    def roots(self) -> list[MethodId]:
        """Entry points followed by handlers, deduplicated, in declaration order."""
        return list(dict.fromkeys([*self.entry_points, *self.handlers()]))

    def apis(self) -> set[ApiId]:
        """Every external API identifier referenced by a call statement."""
        return {
            st.api for m in self.methods.values() for st in m.statements if isinstance(st, CallApi)
        }


@dataclass(frozen=True)
class AppPair:
    pair_id: str
    benign: AppModel
    malign: AppModel


# --------------------------------------------------------------------------
# validation


def validate(app: AppModel) -> AppModel:
    """Check every structural invariant of ``app``; return it unchanged."""
    if not app.entry_points:
        raise IRReferenceError("<entry>", "an app needs at least one entry point")
    for name in app.entry_points:
        if name not in app.methods:
            raise IRReferenceError(name, "entry point is not a declared method")

    for key, body in app.methods.items():
        if key != body.id:
            raise IRError(f"method table key {key!r} does not match body id {body.id!r}")
        if len(set(body.params)) != len(body.params):
            raise IRDuplicateError("parameter", f"{body.id}({', '.join(body.params)})")
        n = len(body.statements)
        for i, st in enumerate(body.statements):
            if isinstance(st, Branch):
                for t in (st.then_index, st.else_index):
                    if not 0 <= t <= n:
                        raise IRError(f"{body.id}[{i}]: branch target {t} out of range 0..{n}")
            elif isinstance(st, CallMethod):
                if st.callee not in app.methods:
                    raise IRReferenceError(st.callee, f"called from {body.id}[{i}]")
                if len(st.args) != len(app.methods[st.callee].params):
                    raise IRError(
                        f"{body.id}[{i}]: {st.callee} expects "
                        f"{len(app.methods[st.callee].params)} argument(s), got {len(st.args)}"
                    )

    seen_screens: set[str] = set()
    for s in app.screens:
        if s.id in seen_screens:
            raise IRDuplicateError("screen", s.id)
        seen_screens.add(s.id)
    for s in app.screens:
        if s.on_enter is not None and s.on_enter not in app.methods:
            raise IRReferenceError(s.on_enter, f"on_enter of screen {s.id}")
        seen_widgets: set[str] = set()
        for w in s.widgets:
            if w.id in seen_widgets:
                raise IRDuplicateError("widget", f"{s.id}.{w.id}")
            seen_widgets.add(w.id)
            if w.handler not in app.methods:
                raise IRReferenceError(w.handler, f"handler of widget {s.id}.{w.id}")
            if w.transition is not None and w.transition not in seen_screens:
                raise IRReferenceError(w.transition, f"transition of widget {s.id}.{w.id}")
            if w.weight <= 0:
                raise IRError(f"widget {s.id}.{w.id}: weight must be positive")

    for p in app.manifest.permissions:
        if not p:
            raise IRError("empty permission string")
    return app


def lint(app: AppModel) -> list[str]:
    """Warn about locals that may be read before any assignment.

    Globals are exempt: they carry state across handlers.
    """
    warnings = []
    for body in app.methods.values():
        n = len(body.statements)
        # may-defined locals per statement, forward union to fixpoint
        defined: list[Optional[frozenset[str]]] = [None] * (n + 1)
        defined[0] = frozenset(body.params) if n else None
        work = [0] if n else []
        while work:
            i = work.pop()
            st = body.statements[i]
            cur = defined[i] or frozenset()
            out = cur
            dst = st.dst if isinstance(st, Assign) else getattr(st, "ret", None)
            if dst is not None:
                out = cur | {dst}
            for j in successors(st, i):
                if j == n:
                    continue
                merged = out if defined[j] is None else defined[j] | out
                if merged != defined[j]:
                    defined[j] = merged
                    work.append(j)
        for i, st in enumerate(body.statements):
            if defined[i] is None:
                continue
            for v in reads(st):
                if not is_global(v) and v not in defined[i]:
                    warnings.append(f"{body.id}[{i}]: {v!r} may be read before assignment")
    return warnings


# --------------------------------------------------------------------------
# parser

_IDENT = r"[A-Za-z_$][\w$.]*"
_IDENT_RE = re.compile(rf"^{_IDENT}$")
_METHOD_HDR = re.compile(rf"^method\s+({_IDENT})\s*\(([^)]*)\)\s*$")
_CALL = re.compile(rf"^call\s+({_IDENT})\s*\(([^)]*)\)\s*$")
_ASSIGN = re.compile(rf"^({_IDENT})\s*=\s*(.+)$")
_IF = re.compile(rf"^if\s+({_IDENT})\s+goto\s+(\S+)\s+else\s+(\S+)$")
_GOTO = re.compile(r"^goto\s+(\S+)$")
_LABEL = re.compile(rf"^({_IDENT}):$")
_INT = re.compile(r"^-?\d+$")
_KEYWORDS = {"true", "false", "null", "call", "if", "goto", "else", "return", "end"}


@dataclass
class _RawCall:
    name: str
    args: tuple[str, ...]
    ret: Optional[str]
    line: int


@dataclass
class _RawBranch:
    cond: Optional[str]
    then_target: str
    else_target: str
    line: int


@dataclass
class _RawMethod:
    id: str
    params: tuple[str, ...]
    line: int
    items: list = field(default_factory=list)
    labels: dict[str, int] = field(default_factory=dict)


def _col(raw: str, token: str) -> int:
    pos = raw.find(token)
    return pos + 1 if pos >= 0 else 1


def _parse_atom(text: str, line: int, raw: str, source: str | None) -> Union[str, Const]:
    text = text.strip()
    if _INT.match(text):
        return Const(int(text))
    if text in ("true", "false"):
        return Const(text == "true")
    if text == "null":
        return Const(None)
    if text.startswith('"'):
        try:
            parts = shlex.split(text, posix=True)
        except ValueError as e:
            raise IRSyntaxError(f"bad string literal: {e}", line, _col(raw, text), source) from None
        if len(parts) != 1 or not text.endswith('"'):
            raise IRSyntaxError("bad string literal", line, _col(raw, text), source)
        return Const(parts[0])
    if _IDENT_RE.match(text) and text not in _KEYWORDS:
        return text
    raise IRSyntaxError(f"expected variable or constant, got {text!r}", line, _col(raw, text), source)


def _parse_names(text: str, line: int, raw: str, source: str | None, what: str) -> tuple[str, ...]:
    text = text.strip()
    if not text:
        return ()
    names = tuple(p.strip() for p in text.split(","))
    for n in names:
        if not _IDENT_RE.match(n) or n in _KEYWORDS:
            raise IRSyntaxError(f"bad {what} {n!r}", line, _col(raw, n or ","), source)
    return names


def _kv(tokens: list[str], allowed: set[str], line: int, raw: str, source: str | None) -> dict[str, str]:
    out: dict[str, str] = {}
    for t in tokens:
        if "=" not in t:
            raise IRSyntaxError(f"expected key=value, got {t!r}", line, _col(raw, t), source)
        k, v = t.split("=", 1)
        if k not in allowed:
            raise IRSyntaxError(f"unknown attribute {k!r}", line, _col(raw, t), source)
        if k in out:
            raise IRSyntaxError(f"repeated attribute {k!r}", line, _col(raw, t), source)
        out[k] = v
    return out


def parse_app(text: str, catalog: Iterable[ApiId] | None = None, *, source: str | None = None) -> AppModel:
    """Parse and validate one ``.app`` document.

    ``catalog`` (any container of API identifiers, typically a
    :class:`~sandmine.catalog.SensitiveCatalog`) lets calls to catalogued
    APIs resolve without an ``extern`` declaration.
    """
    app_id: Optional[str] = None
    permissions: set[str] = set()
    metadata: dict[str, str] = {}
    externs: set[str] = set()
    entries: list[str] = []
    screens: list[tuple[str, Optional[str], list[tuple[str, str, Optional[str], Fraction, int]], int]] = []
    methods: dict[str, _RawMethod] = {}
    current: Optional[_RawMethod] = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue

        if current is not None:
            if line == "end":
                current = None
                continue
            _parse_statement(current, line, lineno, raw, source)
            continue

        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "app":
            if app_id is not None:
                raise IRSyntaxError("repeated 'app' header", lineno, 1, source)
            if not _IDENT_RE.match(rest):
                raise IRSyntaxError(f"bad app id {rest!r}", lineno, _col(raw, rest or "app"), source)
            app_id = rest
        elif head == "permission":
            if not rest or " " in rest:
                raise IRSyntaxError("permission takes exactly one non-empty string", lineno, 1, source)
            if rest in permissions:
                raise IRDuplicateError("permission", rest)
            permissions.add(rest)
        elif head == "meta":
            key, _, value = rest.partition(" ")
            if not key:
                raise IRSyntaxError("meta needs a key", lineno, 1, source)
            value = value.strip()
            if value.startswith('"'):
                atom = _parse_atom(value, lineno, raw, source)
                if not isinstance(atom, Const) or not isinstance(atom.value, str):
                    raise IRSyntaxError("bad metadata value", lineno, _col(raw, value), source)
                value = atom.value
            if key in metadata:
                raise IRDuplicateError("metadata key", key)
            metadata[key] = value
        elif head == "extern":
            names = rest.split()
            if not names:
                raise IRSyntaxError("extern needs at least one identifier", lineno, 1, source)
            for n in names:
                if not _IDENT_RE.match(n):
                    raise IRSyntaxError(f"bad API identifier {n!r}", lineno, _col(raw, n), source)
                externs.add(n)
        elif head == "entry":
            if not _IDENT_RE.match(rest):
                raise IRSyntaxError(f"bad entry method {rest!r}", lineno, _col(raw, rest or "entry"), source)
            if rest in entries:
                raise IRDuplicateError("entry point", rest)
            entries.append(rest)
        elif head == "screen":
            toks = rest.split()
            if not toks or not _IDENT_RE.match(toks[0]):
                raise IRSyntaxError("screen needs an identifier", lineno, 1, source)
            attrs = _kv(toks[1:], {"on_enter"}, lineno, raw, source)
            screens.append((toks[0], attrs.get("on_enter"), [], lineno))
        elif head == "widget":
            if not screens:
                raise IRSyntaxError("widget outside of a screen", lineno, 1, source)
            toks = rest.split()
            if not toks or not _IDENT_RE.match(toks[0]):
                raise IRSyntaxError("widget needs an identifier", lineno, 1, source)
            attrs = _kv(toks[1:], {"handler", "target", "weight"}, lineno, raw, source)
            if "handler" not in attrs:
                raise IRSyntaxError("widget needs handler=<method>", lineno, 1, source)
            try:
                weight = Fraction(attrs.get("weight", "1"))
            except (ValueError, ZeroDivisionError):
                raise IRSyntaxError(f"bad weight {attrs['weight']!r}", lineno, _col(raw, "weight="), source) from None
            if weight <= 0:
                raise IRSyntaxError("weight must be positive", lineno, _col(raw, "weight="), source)
            screens[-1][2].append((toks[0], attrs["handler"], attrs.get("target"), weight, lineno))
        elif head == "method":
            m = _METHOD_HDR.match(line)
            if not m:
                raise IRSyntaxError("expected 'method <id>(<params>)'", lineno, 1, source)
            name = m.group(1)
            if name in methods:
                raise IRDuplicateError("method", name)
            current = _RawMethod(name, _parse_names(m.group(2), lineno, raw, source, "parameter"), lineno)
            methods[name] = current
        else:
            raise IRSyntaxError(f"unknown directive {head!r}", lineno, 1, source)

    if current is not None:
        raise IRSyntaxError(f"method {current.id!r} is missing 'end'", current.line, 1, source)
    if app_id is None:
        raise IRSyntaxError("missing 'app <id>' header", 1, 1, source)

    known_apis = set(externs)
    if catalog is not None:
        known_apis.update(catalog)

    bodies: dict[str, MethodBody] = {}
    for rm in methods.values():
        bodies[rm.id] = MethodBody(rm.id, rm.params, tuple(_resolve(rm, methods, known_apis, source)))

    screen_objs = []
    for sid, on_enter, widgets, _ in screens:
        screen_objs.append(
            Screen(sid, tuple(Widget(w, h, t, wt) for w, h, t, wt, _ in widgets), on_enter)
        )

    app = AppModel(
        id=app_id,
        manifest=Manifest(frozenset(permissions), metadata),
        screens=tuple(screen_objs),
        methods=bodies,
        entry_points=tuple(entries),
        externs=frozenset(externs),
    )
    # record catalog-resolved calls too, so the model is independent of the catalog used to parse it
    app = AppModel(app.id, app.manifest, app.screens, app.methods, app.entry_points, app.externs | app.apis())
    return validate(app)


def _strip_comment(raw: str) -> str:
    in_str = False
    escaped = False
    for i, ch in enumerate(raw):
        if escaped:
            escaped = False
        elif ch == "\\":
            escaped = True
        elif ch == '"':
            in_str = not in_str
        elif ch == "#" and not in_str:
            return raw[:i].strip()
    return raw.strip()


def _parse_statement(rm: _RawMethod, line: str, lineno: int, raw: str, source: str | None) -> None:
    m = _LABEL.match(line)
    if m:
        if m.group(1) in rm.labels:
            raise IRDuplicateError("label", f"{rm.id}:{m.group(1)}")
        rm.labels[m.group(1)] = len(rm.items)
        return
    m = _IF.match(line)
    if m:
        if m.group(1) in _KEYWORDS:
            raise IRSyntaxError(f"branch condition must be a variable, got {m.group(1)!r}", lineno, _col(raw, m.group(1)), source)
        rm.items.append(_RawBranch(m.group(1), m.group(2), m.group(3), lineno))
        return
    m = _GOTO.match(line)
    if m:
        rm.items.append(_RawBranch(None, m.group(1), m.group(1), lineno))
        return
    if line == "return" or line.startswith("return "):
        value = line[len("return"):].strip()
        if value and (not _IDENT_RE.match(value) or value in _KEYWORDS):
            raise IRSyntaxError(f"return takes a variable, got {value!r}", lineno, _col(raw, value), source)
        rm.items.append(Return(value or None))
        return
    m = _CALL.match(line)
    if m:
        rm.items.append(_RawCall(m.group(1), _parse_names(m.group(2), lineno, raw, source, "argument"), None, lineno))
        return
    m = _ASSIGN.match(line)
    if m:
        dst, rhs = m.group(1), m.group(2).strip()
        if dst in _KEYWORDS:
            raise IRSyntaxError(f"cannot assign to keyword {dst!r}", lineno, _col(raw, dst), source)
        cm = _CALL.match(rhs)
        if cm:
            args = _parse_names(cm.group(2), lineno, raw, source, "argument")
            rm.items.append(_RawCall(cm.group(1), args, dst, lineno))
        else:
            rm.items.append(Assign(dst, _parse_atom(rhs, lineno, raw, source)))
        return
    raise IRSyntaxError(f"cannot parse statement {line!r}", lineno, _col(raw, line), source)


def _resolve(rm: _RawMethod, methods: dict[str, _RawMethod], apis: set[str], source: str | None):
    n = len(rm.items)

    def target(t: str, line: int) -> int:
        if _INT.match(t):
            idx = int(t)
            if not 0 <= idx <= n:
                raise IRSyntaxError(f"branch target {idx} out of range 0..{n}", line, 1, source)
            return idx
        if t not in rm.labels:
            raise IRReferenceError(t, f"label in method {rm.id}")
        return rm.labels[t]

    for item in rm.items:
        if isinstance(item, _RawBranch):
            yield Branch(item.cond, target(item.then_target, item.line), target(item.else_target, item.line))
        elif isinstance(item, _RawCall):
            if item.name in methods:
                yield CallMethod(item.name, item.args, item.ret)
            elif item.name in apis:
                yield CallApi(item.name, item.args, item.ret)
            else:
                raise IRReferenceError(item.name, f"call in method {rm.id}, line {item.line}")
        else:
            yield item


# --------------------------------------------------------------------------
# serializer


def _fmt_const(c: Const) -> str:
    v = c.value
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _fmt_stmt(st: Statement) -> str:
    if isinstance(st, Assign):
        src = _fmt_const(st.src) if isinstance(st.src, Const) else st.src
        return f"{st.dst} = {src}"
    if isinstance(st, (CallApi, CallMethod)):
        name = st.api if isinstance(st, CallApi) else st.callee
        call = f"call {name}({', '.join(st.args)})"
        return f"{st.ret} = {call}" if st.ret else call
    if isinstance(st, Branch):
        if st.cond is None:
            return f"goto {st.then_index}"
        return f"if {st.cond} goto {st.then_index} else {st.else_index}"
    if isinstance(st, Return):
        return f"return {st.value}" if st.value else "return"
    raise TypeError(st)


def serialize(app: AppModel) -> str:
    """Canonical text for ``app``; ``parse_app(serialize(app)) == app``."""
    lines = [f"app {app.id}"]
    for p in sorted(app.manifest.permissions):
        lines.append(f"permission {p}")
    for k, v in sorted(app.manifest.metadata.items()):
        lines.append(f"meta {k} {_fmt_const(Const(v))}")
    externs = sorted(app.externs | app.apis())
    if externs:
        lines.append("extern " + " ".join(externs))
    for e in app.entry_points:
        lines.append(f"entry {e}")
    for s in app.screens:
        hdr = f"screen {s.id}"
        if s.on_enter:
            hdr += f" on_enter={s.on_enter}"
        lines.append(hdr)
        for w in s.widgets:
            wl = f"  widget {w.id} handler={w.handler}"
            if w.transition:
                wl += f" target={w.transition}"
            if w.weight != 1:
                wl += f" weight={w.weight}"
            lines.append(wl)
    for body in app.methods.values():
        lines.append(f"method {body.id}({', '.join(body.params)})")
        lines.extend(f"  {_fmt_stmt(st)}" for st in body.statements)
        lines.append("end")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# datasets


def load_app(path: str | Path, catalog: Iterable[ApiId] | None = None) -> AppModel:
    path = Path(path)
    return parse_app(path.read_text(encoding="utf-8"), catalog, source=str(path))


def parse_pair_dataset(root: str | Path, catalog: Iterable[ApiId] | None = None) -> list[AppPair]:
    """Load ``<root>/<pair_id>/{benign.app,malign.app}`` sorted by pair id."""
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(str(root), "dataset directory does not exist")
    pairs = []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        pair_id = sub.name
        halves = {}
        for half in ("benign", "malign"):
            f = sub / f"{half}.app"
            if not f.is_file():
                raise DatasetError(pair_id, f"missing {half}.app")
            try:
                halves[half] = load_app(f, catalog)
            except IRError as e:
                raise DatasetError(pair_id, f"{half}.app: {e}") from e
        if halves["benign"].id == halves["malign"].id:
            raise DatasetError(pair_id, "benign and malign versions share the app id")
        pairs.append(AppPair(pair_id, halves["benign"], halves["malign"]))
    if not pairs:
        logger.warning("dataset %s contains no pairs", root)
    else:
        logger.info("loaded %d pair(s) from %s", len(pairs), root)
    return pairs
