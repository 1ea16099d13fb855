"""Seeded random app models for fuzzing the analyzers.

Generated apps always validate. With ``loop_free=True`` every branch jumps
forward and methods only call methods declared after them, so every method
has finitely many paths and there is no recursion.
"""

from __future__ import annotations

import random
from dataclasses import replace
from fractions import Fraction
from typing import Optional, Sequence

from .ir import (
    AppModel,
    AppPair,
    Assign,
    Branch,
    CallApi,
    CallMethod,
    Const,
    Manifest,
    MethodBody,
    Return,
    Screen,
    Statement,
    Widget,
    validate,
)

LOCALS = ("a", "b", "c", "d")
GLOBALS = ("this.f", "this.g")
PLAIN_APIS = ("Log.i", "String.concat", "getSystemService")
PERMISSIONS = (
    "android.permission.INTERNET",
    "android.permission.SEND_SMS",
    "android.permission.READ_PHONE_STATE",
    "android.permission.ACCESS_FINE_LOCATION",
)


def _var(rng: random.Random, pool: Sequence[str]) -> str:
    return pool[rng.randrange(len(pool))]


def _statement(
    rng: random.Random,
    index: int,
    length: int,
    callees: Sequence[tuple[str, int]],
    apis: Sequence[str],
    pool: Sequence[str],
    loop_free: bool,
    back_callees: Sequence[tuple[str, int]] = (),
) -> Statement:
    kind = rng.random()
    if kind < 0.25:
        if rng.random() < 0.3:
            return Assign(_var(rng, pool), Const(rng.choice([0, 1, True, False, None, "s"])))
        return Assign(_var(rng, pool), _var(rng, pool))
    if kind < 0.6:
        args = tuple(_var(rng, pool) for _ in range(rng.randrange(3)))
        ret = _var(rng, pool) if rng.random() < 0.7 else None
        return CallApi(apis[rng.randrange(len(apis))], args, ret)
    # calls that can recurse are kept rare so most runs terminate
    pick = back_callees if back_callees and rng.random() < 0.1 else callees
    if kind < 0.75 and pick:
        name, arity = pick[rng.randrange(len(pick))]
        ret = _var(rng, pool) if rng.random() < 0.6 else None
        return CallMethod(name, tuple(_var(rng, pool) for _ in range(arity)), ret)
    if kind < 0.92:
        lo = index + 1 if loop_free else 0
        if rng.random() < 0.1:
            # unconditional jumps only go forward, or most programs would spin forever
            t = rng.randint(index + 1, length)
            return Branch(None, t, t)
        return Branch(_var(rng, pool), rng.randint(lo, length), rng.randint(lo, length))
    return Return(_var(rng, pool) if rng.random() < 0.6 else None)


def random_app(
    rng: random.Random,
    apis: Sequence[str],
    *,
    app_id: str = "fuzz",
    loop_free: bool = False,
    max_methods: int = 5,
    max_statements: int = 8,
    total_statements: Optional[int] = None,
    max_screens: int = 3,
    variables: Sequence[str] = LOCALS,
) -> AppModel:
    """A random valid app calling APIs drawn from ``apis`` plus a few plain ones.

    ``total_statements`` caps the statement count across all methods;
    ``variables`` are the local names statements draw from (a smaller pool
    makes dataflow between calls more likely).
    """
    api_pool = tuple(apis) + PLAIN_APIS
    n_methods = rng.randint(1, max_methods)
    names = [f"m{i}" for i in range(n_methods)]
    arity = {n: rng.randrange(3) for n in names}
    params = {n: tuple(f"p{j}" for j in range(arity[n])) for n in names}
    budget = total_statements if total_statements is not None else n_methods * max_statements

    methods: dict[str, MethodBody] = {}
    for k, name in enumerate(names):
        callees = [(c, arity[c]) for j, c in enumerate(names) if j > k]
        back = [] if loop_free else [(c, arity[c]) for j, c in enumerate(names) if j <= k]
        pool = tuple(variables) + GLOBALS + params[name]
        length = min(rng.randint(0, max_statements), budget)
        budget -= length
        body = tuple(
            _statement(rng, i, length, callees, api_pool, pool, loop_free, back) for i in range(length)
        )
        methods[name] = MethodBody(name, params[name], body)

    n_screens = rng.randint(1, max_screens)
    sids = [f"s{i}" for i in range(n_screens)]
    screens = []
    for sid in sids:
        widgets = []
        for w in range(rng.randint(0, 3)):
            target = rng.choice(sids) if rng.random() < 0.5 else None
            weight = Fraction(rng.randint(1, 4), rng.randint(1, 4))
            widgets.append(Widget(f"w{w}", rng.choice(names), target, weight))
        on_enter = rng.choice(names) if rng.random() < 0.3 else None
        screens.append(Screen(sid, tuple(widgets), on_enter))

    entries = tuple(dict.fromkeys(rng.choice(names) for _ in range(rng.randint(1, 2))))
    perms = frozenset(p for p in PERMISSIONS if rng.random() < 0.4)
    app = AppModel(app_id, Manifest(perms, {}), tuple(screens), methods, entries)
    app = replace(app, externs=app.apis())
    return validate(app)


def insert_statement(body: MethodBody, at: int, stmt: Statement) -> MethodBody:
    """Insert ``stmt`` before index ``at``; jumps to ``at`` now reach the new statement."""
    shifted = []
    for st in body.statements:
        if isinstance(st, Branch):
            st = Branch(
                st.cond,
                st.then_index + (st.then_index > at),
                st.else_index + (st.else_index > at),
            )
        shifted.append(st)
    shifted.insert(at, stmt)
    return replace(body, statements=tuple(shifted))


def mutate_app(rng: random.Random, app: AppModel, apis: Sequence[str], *, app_id: str, max_insertions: int = 3) -> AppModel:
    """A repackaged variant: random sensitive calls inserted into random methods."""
    methods = dict(app.methods)
    for _ in range(rng.randint(0, max_insertions)):
        name = rng.choice(sorted(methods))
        body = methods[name]
        pool = LOCALS + GLOBALS + body.params
        stmt = CallApi(rng.choice(list(apis)), (rng.choice(pool),), rng.choice(pool + (None,)))
        methods[name] = insert_statement(body, rng.randint(0, len(body.statements)), stmt)
    out = replace(app, id=app_id, methods=methods)
    out = replace(out, externs=out.externs | out.apis())
    return validate(out)


def random_pair(rng: random.Random, apis: Sequence[str], pair_id: str, **kw) -> AppPair:
    benign = random_app(rng, apis, app_id=f"{pair_id}.benign", **kw)
    malign = mutate_app(rng, benign, apis, app_id=f"{pair_id}.malign")
    return AppPair(pair_id, benign, malign)
