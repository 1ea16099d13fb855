"""Source-to-sink taint propagation and the taint differencing detector.

The engine is flow sensitive inside a method, context insensitive across
calls (one parameter summary and one return summary per method, joined over
all call sites) and field blind: ``this.*`` globals are plain named cells
with no object identity. Globals are summarised flow-insensitively across
handlers, because handlers may fire in any order: a method starts with every
taint ever written to a global, and a call may leave any of them behind.

Transfer rules
    ``x = y``             x gets y's taint; ``x = <const>`` clears x
    ``r = call api(a..)`` a sink reports a flow per origin tainting any
                          argument; r gets the union of argument taints
                          plus a fresh origin if ``api`` is a source
    ``r = call m(a..)``   arguments flow into m's parameters, r gets m's
                          return summary
    branches              both arms, joined (may analysis, no implicit flows)

Taint labels are origin sites, so each reported flow can be given a witness:
the shortest statement path from the tainting call to the sinking call along
which the same origin is carried, found by a breadth-first search that
respects call/return matching.
"""

from __future__ import annotations

import json
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Optional

from .catalog import SensitiveCatalog
from .ir import (
    ApiId,
    AppModel,
    AppPair,
    Assign,
    Branch,
    CallApi,
    CallMethod,
    MethodId,
    Return,
    is_global,
    successors,
)
from .static import reachable_methods

Site = tuple[MethodId, int]

WITNESS_STATE_CAP = 50_000
WITNESS_DEPTH_CAP = 16


class Origin(NamedTuple):
    api: ApiId
    method: MethodId
    index: int

    @property
    def site(self) -> Site:
        return (self.method, self.index)


class TaintState(dict):
    """Variable -> set of source APIs tainting it at one program point."""

    @classmethod
    def from_labels(cls, labels: Mapping[str, frozenset[Origin]]) -> "TaintState":
        return cls({v: frozenset(o.api for o in os) for v, os in labels.items() if os})


@dataclass(frozen=True)
class Flow:
    source: ApiId
    sink: ApiId
    witness: tuple[Site, ...]

    @property
    def pair(self) -> tuple[ApiId, ApiId]:
        return (self.source, self.sink)

    def to_dict(self) -> dict:
        return {"source": self.source, "sink": self.sink, "witness": [list(s) for s in self.witness]}


@dataclass(frozen=True)
class FlowSet:
    app_id: str
    flows: frozenset[Flow]
    elapsed_s: float = field(default=0.0, compare=False)

    def pairs(self) -> frozenset[tuple[ApiId, ApiId]]:
        return frozenset(f.pair for f in self.flows)

    def records(self) -> list[dict]:
        return [f.to_dict() for f in sorted(self.flows, key=lambda f: (f.source, f.sink, f.witness))]


def write_flows(flows: FlowSet, path: str | Path) -> None:
    """One JSON record per line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for rec in flows.records():
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_flows(path: str | Path, app_id: str) -> FlowSet:
    flows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            d = json.loads(line)
            flows.append(Flow(d["source"], d["sink"], tuple((m, i) for m, i in d["witness"])))
    return FlowSet(app_id, frozenset(flows))


# --------------------------------------------------------------------------
# fixpoint engine

_EMPTY: frozenset = frozenset()


class TaintEngine:
    def __init__(self, app: AppModel, catalog: SensitiveCatalog):
        self.app = app
        self.catalog = catalog
        self.methods = sorted(reachable_methods(app))
        self.param_in: dict[MethodId, list[frozenset[Origin]]] = {
            m: [_EMPTY] * len(app.methods[m].params) for m in self.methods
        }
        self.ret_out: dict[MethodId, frozenset[Origin]] = {m: _EMPTY for m in self.methods}
        self.globals: dict[str, frozenset[Origin]] = {}
        self.hits: set[tuple[Origin, Site]] = set()
        self.states: dict[Site, dict[str, frozenset[Origin]]] = {}
        self._changed = False

    def run(self) -> None:
        while True:
            self._changed = False
            for m in self.methods:
                self._analyze_method(m)
            if not self._changed:
                break

    def state_at(self, method: MethodId, index: int) -> TaintState:
        return TaintState.from_labels(self.states.get((method, index), {}))

    # summaries -----------------------------------------------------------

    def _join_global(self, var: str, taint: frozenset[Origin]) -> None:
        old = self.globals.get(var, _EMPTY)
        if not taint <= old:
            self.globals[var] = old | taint
            self._changed = True

    def _join_param(self, callee: MethodId, j: int, taint: frozenset[Origin]) -> None:
        old = self.param_in[callee][j]
        if not taint <= old:
            self.param_in[callee][j] = old | taint
            self._changed = True

    def _join_ret(self, m: MethodId, taint: frozenset[Origin]) -> None:
        if not taint <= self.ret_out[m]:
            self.ret_out[m] = self.ret_out[m] | taint
            self._changed = True

    def _hit(self, origin: Origin, site: Site) -> None:
        if (origin, site) not in self.hits:
            self.hits.add((origin, site))
            self._changed = True

    # intraprocedural ------------------------------------------------------

    def _analyze_method(self, m: MethodId) -> None:
        body = self.app.methods[m]
        stmts = body.statements
        n = len(stmts)
        if n == 0:
            return
        entry = dict(self.globals)
        for p, t in zip(body.params, self.param_in[m]):
            if t:
                entry[p] = t
        ins: list[Optional[dict]] = [None] * n
        ins[0] = entry
        work = [0]
        while work:
            i = work.pop()
            out = self._transfer(m, i, stmts[i], dict(ins[i]))
            for j in successors(stmts[i], i):
                if j >= n:
                    continue
                if ins[j] is None:
                    ins[j] = out
                    work.append(j)
                    continue
                merged, grew = _join(ins[j], out)
                if grew:
                    ins[j] = merged
                    work.append(j)
        for i, s in enumerate(ins):
            if s is not None:
                self.states[(m, i)] = s

    def _assign(self, state: dict, var: str, taint: frozenset[Origin]) -> None:
        if taint:
            state[var] = taint
        else:
            state.pop(var, None)
        if is_global(var):
            self._join_global(var, taint)

    def _transfer(self, m: MethodId, i: int, st, state: dict) -> dict:
        if isinstance(st, Assign):
            self._assign(state, st.dst, state.get(st.src, _EMPTY) if isinstance(st.src, str) else _EMPTY)
        elif isinstance(st, CallApi):
            arg_taint = frozenset().union(*(state.get(a, _EMPTY) for a in st.args))
            if arg_taint and self.catalog.is_sink(st.api):
                for o in arg_taint:
                    self._hit(o, (m, i))
            if st.ret is not None:
                t = arg_taint
                if self.catalog.is_source(st.api):
                    t = t | {Origin(st.api, m, i)}
                self._assign(state, st.ret, t)
        elif isinstance(st, CallMethod):
            for j, a in enumerate(st.args):
                self._join_param(st.callee, j, state.get(a, _EMPTY))
            for g, t in self.globals.items():
                state[g] = state.get(g, _EMPTY) | t
            if st.ret is not None:
                self._assign(state, st.ret, self.ret_out[st.callee])
        elif isinstance(st, Return):
            if st.value is not None:
                self._join_ret(m, state.get(st.value, _EMPTY))
        elif not isinstance(st, Branch):  # pragma: no cover
            raise TypeError(st)
        return state


def _join(a: dict, b: dict) -> tuple[dict, bool]:
    grew = False
    out = dict(a)
    for k, v in b.items():
        old = out.get(k, _EMPTY)
        if not v <= old:
            out[k] = old | v
            grew = True
    return out, grew


# --------------------------------------------------------------------------
# witnesses


class _Frame(NamedTuple):
    method: MethodId
    pc: int
    tainted: frozenset[str]
    ret_to: Optional[str]


class WitnessSearch:
    """Breadth-first search for a statement path carrying one origin to a sink.

    The search tracks a single boolean taint per variable. The bottom frame
    has no known caller: returning from it may resume after any call site of
    the method, or, for a root, start any root (the next handler).
    """

    def __init__(self, app: AppModel, methods: Iterable[MethodId]):
        self.app = app
        self.methods = sorted(methods)
        roots = [r for r in app.roots() if r in self.app.methods]
        self.roots = roots
        self.root_set = set(roots)
        self.call_sites: dict[MethodId, list[tuple[MethodId, int, Optional[str]]]] = {}
        for m in self.methods:
            for i, st in enumerate(app.methods[m].statements):
                if isinstance(st, CallMethod):
                    self.call_sites.setdefault(st.callee, []).append((m, i, st.ret))

    def find(self, origin: Origin, sink: Site) -> Optional[tuple[Site, ...]]:
        st = self.app.methods[origin.method].statements[origin.index]
        if st.ret is None:
            return None
        locals_, globals_ = _set_var(frozenset(), frozenset(), st.ret, True)
        start = ((_Frame(origin.method, origin.index + 1, locals_, None),), globals_)
        parent: dict = {start: None}
        queue = deque([start])
        while queue and len(parent) < WITNESS_STATE_CAP:
            state = queue.popleft()
            frames, _ = state
            top = frames[-1]
            stmts = self.app.methods[top.method].statements
            if top.pc < len(stmts) and (top.method, top.pc) == sink:
                call = stmts[top.pc]
                if any(_tainted(a, top, state[1]) for a in call.args):
                    return self._path(parent, state, origin)
            for nxt in self._step(state):
                if nxt not in parent:
                    parent[nxt] = state
                    queue.append(nxt)
        return None

    def _path(self, parent: dict, state, origin: Origin) -> tuple[Site, ...]:
        path = []
        while state is not None:
            top = state[0][-1]
            path.append((top.method, top.pc))
            state = parent[state]
        path.append(origin.site)
        return tuple(reversed(path))

    def _step(self, state):
        frames, g = state
        top = frames[-1]
        stmts = self.app.methods[top.method].statements
        if top.pc >= len(stmts):
            yield from self._return(frames, g, False)
            return
        st = stmts[top.pc]
        t = top.tainted
        if isinstance(st, Assign):
            val = isinstance(st.src, str) and _tainted(st.src, top, g)
            t, g2 = _set_var(t, g, st.dst, val)
            yield (frames[:-1] + (top._replace(pc=top.pc + 1, tainted=t),), g2)
        elif isinstance(st, CallApi):
            val = any(_tainted(a, top, g) for a in st.args)
            g2 = g
            if st.ret is not None:
                t, g2 = _set_var(t, g, st.ret, val)
            yield (frames[:-1] + (top._replace(pc=top.pc + 1, tainted=t),), g2)
        elif isinstance(st, CallMethod):
            if len(frames) >= WITNESS_DEPTH_CAP:
                return
            callee = self.app.methods[st.callee]
            params = frozenset(p for p, a in zip(callee.params, st.args) if _tainted(a, top, g))
            caller = top._replace(pc=top.pc + 1)
            yield (frames[:-1] + (caller, _Frame(st.callee, 0, params, st.ret)), g)
        elif isinstance(st, Branch):
            for j in successors(st, top.pc):
                yield (frames[:-1] + (top._replace(pc=j),), g)
        elif isinstance(st, Return):
            val = st.value is not None and _tainted(st.value, top, g)
            yield from self._return(frames, g, val)

    def _return(self, frames, g, val: bool):
        top = frames[-1]
        if len(frames) > 1:
            caller = frames[-2]
            t = caller.tainted
            if top.ret_to is not None:
                t, g = _set_var(t, g, top.ret_to, val)
            yield (frames[:-2] + (caller._replace(tainted=t),), g)
            return
        for cm, ci, ret in self.call_sites.get(top.method, ()):
            t, g2 = frozenset(), g
            if ret is not None:
                t, g2 = _set_var(t, g, ret, val)
            yield ((_Frame(cm, ci + 1, t, None),), g2)
        if top.method in self.root_set:
            for r in self.roots:
                yield ((_Frame(r, 0, frozenset(), None),), g)


def _tainted(var: str, frame: _Frame, g: frozenset[str]) -> bool:
    return var in (g if is_global(var) else frame.tainted)


def _set_var(t: frozenset[str], g: frozenset[str], var: str, val: bool):
    if is_global(var):
        return t, (g | {var}) if val else (g - {var})
    return ((t | {var}) if val else (t - {var})), g


# --------------------------------------------------------------------------
# public operations


def analyze_taint(app: AppModel, catalog: SensitiveCatalog, *, witnesses: bool = True) -> FlowSet:
    """Every (source, sink) flow reachable from the app's roots.

    Flows whose witness search fails (only possible when the flow is an
    artefact of call-site merging, or exceeds the search caps) carry the
    two-site witness ``(source site, sink site)``.
    """
    t0 = time.perf_counter()
    engine = TaintEngine(app, catalog)
    engine.run()
    search = WitnessSearch(app, engine.methods) if witnesses else None
    flows = set()
    for origin, sink_site in engine.hits:
        sink_api = app.methods[sink_site[0]].statements[sink_site[1]].api
        path = search.find(origin, sink_site) if search else None
        flows.add(Flow(origin.api, sink_api, path or (origin.site, sink_site)))
    return FlowSet(app.id, frozenset(flows), time.perf_counter() - t0)


@dataclass(frozen=True)
class TaintVerdict:
    pair_id: str
    s1: FlowSet
    s2: FlowSet
    s3: frozenset[tuple[ApiId, ApiId]]

    @property
    def detected(self) -> bool:
        return bool(self.s3)


def taint_diff(pair: AppPair, catalog: SensitiveCatalog, *, witnesses: bool = True) -> TaintVerdict:
    """S3 = pairs(S2) minus pairs(S1): source/sink pairs new in the malign version."""
    s1 = analyze_taint(pair.benign, catalog, witnesses=witnesses)
    s2 = analyze_taint(pair.malign, catalog, witnesses=witnesses)
    return TaintVerdict(pair.pair_id, s1, s2, s2.pairs() - s1.pairs())
