"""Sandbox construction and the API-set differencing verdict."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .ir import ApiId, AppPair
from .static import StaticCallSet


@dataclass(frozen=True)
class Sandbox:
    app_id: str
    allowed: frozenset[ApiId]
    built_with_static: bool


@dataclass(frozen=True)
class SandboxVerdict:
    pair_id: str
    tool: str
    with_static: bool
    offending: frozenset[ApiId]

    @property
    def detected(self) -> bool:
        return bool(self.offending)


def build_sandbox(app_id: str, dynamic: Iterable[ApiId], static_set: Optional[StaticCallSet] = None) -> Sandbox:
    """Allow what exploration saw, plus the static set when one is given."""
    allowed = frozenset(dynamic)
    if static_set is not None:
        if static_set.app_id != app_id:
            raise ValueError(f"static set belongs to {static_set.app_id!r}, not {app_id!r}")
        allowed |= static_set.apis
    return Sandbox(app_id, allowed, static_set is not None)


def observed_calls(dynamic: Iterable[ApiId], static_set: Optional[StaticCallSet] = None) -> frozenset[ApiId]:
    """The malign-side observation under the same configuration as its sandbox."""
    out = frozenset(dynamic)
    return out | static_set.apis if static_set is not None else out


def detect(pair: AppPair, sandbox: Sandbox, malign_observed: Iterable[ApiId], tool: str = "") -> SandboxVerdict:
    if sandbox.app_id != pair.benign.id:
        raise ValueError(
            f"sandbox was mined from {sandbox.app_id!r} but pair {pair.pair_id!r} has benign {pair.benign.id!r}"
        )
    offending = frozenset(malign_observed) - sandbox.allowed
    return SandboxVerdict(pair.pair_id, tool, sandbox.built_with_static, offending)
