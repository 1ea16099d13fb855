"""Simulated exploratory phase: GUI test generators driving an app model.

Each run launches the app (entry points, then the start screen's
``on_enter``) and fires up to ``budget`` widget events chosen by a strategy.
Handlers are executed by a concrete small-step interpreter; branch
conditions over unknown values are resolved by a coin flip drawn from the
same seeded stream that picks widgets, so a run is a pure function of
``(app, catalog, strategy)``.

A screen without widgets ends the run early.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .catalog import SensitiveCatalog
from .ir import (
    ApiId,
    AppModel,
    Assign,
    Branch,
    CallApi,
    CallMethod,
    Const,
    MethodBody,
    MethodId,
    Return,
    Screen,
    Widget,
    is_global,
)

TOOLS = ("random", "modelbased", "humanoid", "joker")
DEFAULT_BUDGET = 200
DEFAULT_STEP_LIMIT = 10_000
_SEED_MAX = 2**64 - 1


@dataclass(frozen=True)
class Strategy:
    name: str
    seed: int = 0
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.name not in TOOLS:
            raise ValueError(f"unknown tool {self.name!r}; valid tools: {', '.join(TOOLS)}")
        if not 0 <= self.seed <= _SEED_MAX:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if self.budget < 0:
            raise ValueError(f"budget must be >= 0, got {self.budget}")


@dataclass(frozen=True)
class ExecutionTrace:
    app_id: str
    strategy: Strategy
    repetition: int
    events: tuple[tuple[str, str], ...] = ()
    sensitive_calls: frozenset[ApiId] = frozenset()
    truncated: bool = False

    def to_dict(self) -> dict:
        return {
            "app_id": self.app_id,
            "strategy": self.strategy.name,
            "seed": self.strategy.seed,
            "budget": self.strategy.budget,
            "repetition": self.repetition,
            "events": [list(e) for e in self.events],
            "sensitive_calls": sorted(self.sensitive_calls),
            "truncated": self.truncated,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "ExecutionTrace":
        return cls(
            app_id=d["app_id"],
            strategy=Strategy(d["strategy"], d["seed"], d["budget"]),
            repetition=d["repetition"],
            events=tuple(tuple(e) for e in d["events"]),
            sensitive_calls=frozenset(d["sensitive_calls"]),
            truncated=d["truncated"],
        )


def write_trace(trace: ExecutionTrace, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(trace.to_json() + "\n", encoding="utf-8")


def read_trace(path: str | Path) -> ExecutionTrace:
    return ExecutionTrace.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# --------------------------------------------------------------------------
# interpreter


class _Unknown:
    __slots__ = ()

    def __repr__(self):
        return "<unknown>"


UNKNOWN = _Unknown()


class StepLimitExceeded(Exception):
    pass


@dataclass
class _Frame:
    body: MethodBody
    locals: dict
    pc: int = 0
    ret_to: Optional[str] = None


@dataclass
class Interpreter:
    """Concrete interpreter with one global store shared by all handlers of a run.

    External API calls return an unknown value; only catalogued APIs are
    recorded.
    """

    app: AppModel
    catalog: SensitiveCatalog
    rng: random.Random
    step_limit: int = DEFAULT_STEP_LIMIT
    globals: dict = field(default_factory=dict)
    calls: set = field(default_factory=set)
    truncated: bool = False

    def coin(self) -> bool:
        return self.rng.random() < 0.5

    def run_handler(self, method: MethodId) -> None:
        try:
            self._run(method)
        except StepLimitExceeded:
            self.truncated = True

    def _run(self, method: MethodId) -> None:
        body = self.app.methods[method]
        frames = [_Frame(body, {p: UNKNOWN for p in body.params})]
        steps = 0
        while frames:
            f = frames[-1]
            stmts = f.body.statements
            if f.pc >= len(stmts):
                self._return(frames, None)
                continue
            steps += 1
            if steps > self.step_limit:
                raise StepLimitExceeded(method)
            st = stmts[f.pc]
            if isinstance(st, Assign):
                value = st.src.value if isinstance(st.src, Const) else self._get(f, st.src)
                self._set(f, st.dst, value)
                f.pc += 1
            elif isinstance(st, CallApi):
                if st.api in self.catalog:
                    self.calls.add(st.api)
                if st.ret is not None:
                    self._set(f, st.ret, UNKNOWN)
                f.pc += 1
            elif isinstance(st, CallMethod):
                callee = self.app.methods[st.callee]
                args = [self._get(f, a) for a in st.args]
                f.pc += 1
                frames.append(_Frame(callee, dict(zip(callee.params, args)), ret_to=st.ret))
            elif isinstance(st, Branch):
                if st.cond is None:
                    taken = True
                else:
                    v = self._get(f, st.cond)
                    taken = self.coin() if v is UNKNOWN else bool(v)
                f.pc = st.then_index if taken else st.else_index
            elif isinstance(st, Return):
                self._return(frames, None if st.value is None else self._get(f, st.value))
            else:  # pragma: no cover
                raise TypeError(st)

    def _return(self, frames: list[_Frame], value) -> None:
        done = frames.pop()
        if frames and done.ret_to is not None:
            self._set(frames[-1], done.ret_to, value)

    def _get(self, f: _Frame, var: str):
        store = self.globals if is_global(var) else f.locals
        return store.get(var, UNKNOWN)

    def _set(self, f: _Frame, var: str, value) -> None:
        (self.globals if is_global(var) else f.locals)[var] = value


# --------------------------------------------------------------------------
# strategies


def _pick_uniform(widgets: tuple[Widget, ...], rng: random.Random) -> Widget:
    return widgets[int(rng.random() * len(widgets))]


def _pick_weighted(widgets: tuple[Widget, ...], rng: random.Random) -> Widget:
    weights = [float(w.weight) for w in widgets]
    r = rng.random() * sum(weights)
    acc = 0.0
    for w, wt in zip(widgets, weights):
        acc += wt
        if r < acc:
            return w
    return widgets[-1]


class _ModelBased:
    def __init__(self):
        self.visited: set[tuple[str, str]] = set()

    def pick(self, screen: Screen, rng: random.Random) -> Widget:
        fresh = [w for w in sorted(screen.widgets, key=lambda w: w.id) if (screen.id, w.id) not in self.visited]
        w = fresh[0] if fresh else _pick_uniform(screen.widgets, rng)
        self.visited.add((screen.id, w.id))
        return w


def run_exploration(
    app: AppModel,
    catalog: SensitiveCatalog,
    strategy: Strategy,
    repetition: int = 1,
    step_limit: int = DEFAULT_STEP_LIMIT,
) -> ExecutionTrace:
    """Explore ``app`` with ``strategy`` and record the sensitive APIs called."""
    if repetition < 1:
        raise ValueError("repetition numbers start at 1")
    if strategy.name == "joker":
        return ExecutionTrace(app.id, strategy, repetition)

    rng = random.Random(strategy.seed)
    interp = Interpreter(app, catalog, rng, step_limit)
    for entry in app.entry_points:
        interp.run_handler(entry)
    screen = app.start_screen
    if screen is not None and screen.on_enter:
        interp.run_handler(screen.on_enter)

    model = _ModelBased() if strategy.name == "modelbased" else None
    events: list[tuple[str, str]] = []
    while len(events) < strategy.budget and screen is not None and screen.widgets:
        if model is not None:
            w = model.pick(screen, rng)
        elif strategy.name == "humanoid":
            w = _pick_weighted(screen.widgets, rng)
        else:
            w = _pick_uniform(screen.widgets, rng)
        events.append((screen.id, w.id))
        interp.run_handler(w.handler)
        if w.transition is not None:
            screen = app.screen(w.transition)
            if screen.on_enter:
                interp.run_handler(screen.on_enter)

    return ExecutionTrace(
        app.id, strategy, repetition, tuple(events), frozenset(interp.calls), interp.truncated
    )


def repetition_strategies(tool: str, seed: int, budget: int, repetitions: int) -> list[Strategy]:
    """Strategies for repetitions 1..n, seeded ``seed``, ``seed+1``, ..."""
    return [Strategy(tool, (seed + k) & _SEED_MAX, budget) for k in range(repetitions)]


def union_traces(traces: Iterable[ExecutionTrace]) -> frozenset[ApiId]:
    traces = list(traces)
    out: set[ApiId] = set()
    if not traces:
        return frozenset()
    app_id, tool = traces[0].app_id, traces[0].strategy.name
    for t in traces:
        if t.app_id != app_id:
            raise ValueError(f"cannot union traces of different apps: {app_id!r} vs {t.app_id!r}")
        if t.strategy.name != tool:
            raise ValueError(f"cannot union traces of different tools: {tool!r} vs {t.strategy.name!r}")
        out |= t.sensitive_calls
    return frozenset(out)
