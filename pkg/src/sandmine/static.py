"""Static component: call-graph reachability and manifest diffing."""

from __future__ import annotations

from dataclasses import dataclass, field

from .catalog import SensitiveCatalog
from .ir import ApiId, AppModel, AppPair, CallApi, CallMethod

ROOT = "<root>"


@dataclass
class CallGraph:
    """Context-insensitive call graph.

    Nodes are declared methods, referenced API identifiers and the synthetic
    :data:`ROOT`, which points at every entry point, widget handler and
    ``on_enter`` method.
    """

    methods: set[str] = field(default_factory=set)
    apis: set[str] = field(default_factory=set)
    edges: dict[str, set[str]] = field(default_factory=dict)

    @property
    def nodes(self) -> set[str]:
        return {ROOT} | self.methods | self.apis

    def edge_pairs(self) -> set[tuple[str, str]]:
        return {(src, dst) for src, dsts in self.edges.items() for dst in dsts}

    def add_edge(self, src: str, dst: str) -> None:
        self.edges.setdefault(src, set()).add(dst)

    def successors(self, node: str) -> set[str]:
        return self.edges.get(node, set())

    def reachable(self, start: str = ROOT) -> set[str]:
        seen = {start}
        stack = [start]
        while stack:
            for nxt in self.edges.get(stack.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen

    def to_dot(self, name: str = "callgraph") -> str:
        lines = [f'digraph "{name}" {{']
        for a in sorted(self.apis):
            lines.append(f'  "{a}" [shape=box];')
        for src in sorted(self.edges):
            for dst in sorted(self.edges[src]):
                lines.append(f'  "{src}" -> "{dst}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_call_graph(app: AppModel) -> CallGraph:
    g = CallGraph(methods=set(app.methods))
    for r in app.roots():
        g.add_edge(ROOT, r)
    for body in app.methods.values():
        for st in body.statements:
            if isinstance(st, CallApi):
                g.apis.add(st.api)
                g.add_edge(body.id, st.api)
            elif isinstance(st, CallMethod):
                g.add_edge(body.id, st.callee)
    return g


def reachable_methods(app: AppModel) -> set[str]:
    return build_call_graph(app).reachable() & set(app.methods)


@dataclass(frozen=True)
class StaticCallSet:
    app_id: str
    apis: frozenset[ApiId]


def static_sensitive_set(app: AppModel, catalog: SensitiveCatalog) -> StaticCallSet:
    g = build_call_graph(app)
    reach = g.reachable()
    return StaticCallSet(app.id, frozenset(a for a in g.apis if a in reach and a in catalog))


@dataclass(frozen=True)
class ManifestDiff:
    added: frozenset[str]
    removed: frozenset[str]
    changed: frozenset[str]

    @property
    def empty(self) -> bool:
        return not (self.added or self.removed or self.changed)


def diff_manifest(pair: AppPair) -> ManifestDiff:
    """Permission set differences and metadata keys whose values differ.

    A key present on one side only counts as changed.
    """
    b, m = pair.benign.manifest, pair.malign.manifest
    keys = set(b.metadata) | set(m.metadata)
    return ManifestDiff(
        added=frozenset(m.permissions - b.permissions),
        removed=frozenset(b.permissions - m.permissions),
        changed=frozenset(k for k in keys if b.metadata.get(k) != m.metadata.get(k)),
    )
