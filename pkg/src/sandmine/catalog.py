"""Sensitive-API catalog with source/sink roles."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterator, Mapping

from .ir import ApiId


class CatalogError(ValueError):
    pass


class SensitivityClass(enum.Enum):
    SOURCE = "source"
    SINK = "sink"
    BOTH = "both"
    NEITHER = "sensitive"

    @property
    def is_source(self) -> bool:
        return self in (SensitivityClass.SOURCE, SensitivityClass.BOTH)

    @property
    def is_sink(self) -> bool:
        return self in (SensitivityClass.SINK, SensitivityClass.BOTH)


@dataclass(frozen=True)
class SensitiveCatalog:
    """Immutable map from API identifier to its sensitivity class.

    Every entry is sensitive for sandbox mining; the class only matters to
    the taint engine. Behaves as a read-only container of identifiers, so it
    can be passed straight to :func:`sandmine.ir.parse_app`.
    """

    entries: Mapping[ApiId, SensitivityClass]

    def __contains__(self, api: object) -> bool:
        return api in self.entries

    def __iter__(self) -> Iterator[ApiId]:
        return iter(sorted(self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    def is_sensitive(self, api: ApiId) -> bool:
        return api in self.entries

    def klass(self, api: ApiId) -> SensitivityClass | None:
        return self.entries.get(api)

    def is_source(self, api: ApiId) -> bool:
        k = self.entries.get(api)
        return k is not None and k.is_source

    def is_sink(self, api: ApiId) -> bool:
        k = self.entries.get(api)
        return k is not None and k.is_sink

    def sources(self) -> frozenset[ApiId]:
        return frozenset(a for a, k in self.entries.items() if k.is_source)

    def sinks(self) -> frozenset[ApiId]:
        return frozenset(a for a, k in self.entries.items() if k.is_sink)

    def dumps(self) -> str:
        return "".join(f"{a} {self.entries[a].value}\n" for a in self)


def is_sensitive(catalog: SensitiveCatalog, api: ApiId) -> bool:
    return catalog.is_sensitive(api)


def load_catalog(text: str) -> SensitiveCatalog:
    """Parse ``<ApiId> <source|sink|both|sensitive>`` lines; ``#`` starts a comment."""
    entries: dict[ApiId, SensitivityClass] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise CatalogError(f"line {lineno}: expected '<api> <class>', got {line!r}")
        api, word = parts
        try:
            klass = SensitivityClass(word)
        except ValueError:
            valid = ", ".join(k.value for k in SensitivityClass)
            raise CatalogError(f"line {lineno}: unknown class {word!r} (expected one of {valid})") from None
        if api in entries:
            raise CatalogError(f"line {lineno}: duplicate API {api!r}")
        entries[api] = klass
    if not entries:
        raise CatalogError("catalog is empty")
    return SensitiveCatalog(entries)


def load_catalog_file(path: str | Path) -> SensitiveCatalog:
    return load_catalog(Path(path).read_text(encoding="utf-8"))


def default_catalog() -> SensitiveCatalog:
    """The catalog shipped with the package (covers every API of the fixtures)."""
    text = resources.files("sandmine.data").joinpath("catalog.txt").read_text(encoding="utf-8")
    return load_catalog(text)
