"""Opening, listing, reading and materializing MiniFS instances.

The flow mirrors how the format is meant to be consumed: parse the
header, the name pool and both tables, then pull individual files out of
their decompressed chunks.  A chunk holds several files, so decompressed
chunks are cached on the view; a full extraction touches each chunk
exactly once.
"""

from __future__ import annotations

import os
from collections import Counter, OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from . import structs
from .codec import decompress_chunk
from .errors import (
    BadMagic,
    MiniFsError,
    NotFound,
    AmbiguousPath,
    OffsetOutOfRange,
    TruncatedImage,
    UnsafePath,
    ValidationFailed,
)


@dataclass
class MiniFsView:
    """A parsed instance inside (or equal to) a dump.

    ``violations`` is empty unless the view was opened in force mode.
    The view never copies chunk data out of ``source`` until a read
    needs it.
    """

    source: bytes
    header: structs.MiniFsHeader
    layout: structs.FsLayout
    names: structs.NameTable
    files: list[structs.FileRecord]
    chunks: list[structs.ChunkRecord]
    violations: list[structs.Violation] = field(default_factory=list)
    max_cache_bytes: int | None = None
    _cache: OrderedDict[int, bytes] = field(default_factory=OrderedDict, repr=False)

    @property
    def base(self) -> int:
        return self.layout.base

    def chunk_data(self, index: int) -> bytes:
        """Decompressed content of chunk ``index``, cached."""
        if index in self._cache:
            self._cache.move_to_end(index)
            return self._cache[index]
        if not 0 <= index < len(self.chunks):
            raise NotFound(f"no chunk {index} (table holds {len(self.chunks)})")
        data = decompress_chunk(*self.compressed_chunk(index))
        self._cache[index] = data
        if self.max_cache_bytes is not None:
            used = sum(len(v) for v in self._cache.values())
            while used > self.max_cache_bytes and len(self._cache) > 1:
                _, evicted = self._cache.popitem(last=False)
                used -= len(evicted)
        return data

    def compressed_chunk(self, index: int) -> tuple[bytes, int]:
        """Raw compressed bytes of chunk ``index`` plus its expected size."""
        rec = self.chunks[index]
        start = self.layout.data_start + rec.data_offset
        end = start + rec.compressed_size
        if end > len(self.source):
            raise TruncatedImage(
                f"chunk {index} data ends at {end} but dump is {len(self.source)} bytes"
            )
        return self.source[start:end], rec.decompressed_size


@dataclass(frozen=True)
class FileEntry:
    """One file of the instance, with its path already joined."""

    index: int
    path: str
    chunk_index: int
    offset_in_chunk: int
    file_size: int


def open_view(
    dump: bytes,
    base: int = 0,
    *,
    force: bool = False,
    max_cache_bytes: int | None = None,
) -> MiniFsView:
    """Parse and validate the instance whose magic sits at ``base``.

    Raises BadMagic or TruncatedImage when the bytes cannot be an
    instance at all, and ValidationFailed when structural invariants are
    broken — unless ``force`` is set, in which case the view is returned
    with its violations attached for best-effort work on damaged dumps.
    """
    if dump[base:base + len(structs.MAGIC)] != structs.MAGIC:
        raise BadMagic(f"no {structs.MAGIC!r} at offset {base}")
    if base + structs.HEADER_SIZE > len(dump):
        raise TruncatedImage(f"dump ends inside the header at offset {base}")
    header = structs.parse_header(dump[base:base + structs.HEADER_SIZE])

    probe = structs.compute_layout(header, 0, base)
    if probe.chunk_table_start > len(dump):
        raise TruncatedImage(
            f"name pool or file table extends past the {len(dump)}-byte dump"
        )
    names = structs.NameTable(dump[probe.names_start:probe.files_start])
    files = structs.parse_file_table(
        dump[probe.files_start:probe.chunk_table_start], header.file_count
    )
    chunk_count = structs.infer_chunk_count(files) if files else 0
    layout = structs.compute_layout(header, chunk_count, base)
    if layout.data_start > len(dump):
        raise TruncatedImage(f"chunk table extends past the {len(dump)}-byte dump")
    chunks = structs.parse_chunk_table(
        dump[layout.chunk_table_start:layout.data_start], chunk_count
    )

    violations = structs.validate_layout(
        header, files, chunks, len(dump), base=base, names=names
    )
    if violations and not force:
        raise ValidationFailed(violations)
    return MiniFsView(
        source=dump,
        header=header,
        layout=layout,
        names=names,
        files=files,
        chunks=chunks,
        violations=violations,
        max_cache_bytes=max_cache_bytes,
    )


def list_files(view: MiniFsView) -> list[FileEntry]:
    """All files in table order, with joined paths.

    Naming failures are re-raised with the offending record index
    prepended, so damaged tables are easy to pinpoint.
    """
    entries = []
    for i, rec in enumerate(view.files):
        try:
            path = structs.full_path(view.names, rec)
        except MiniFsError as exc:
            raise type(exc)(f"file record {i}: {exc}") from exc
        entries.append(FileEntry(
            index=i,
            path=path,
            chunk_index=rec.chunk_index,
            offset_in_chunk=rec.offset_in_chunk,
            file_size=rec.file_size,
        ))
    return entries


def _slice_entry(view: MiniFsView, entry: FileEntry) -> bytes:
    data = view.chunk_data(entry.chunk_index)
    end = entry.offset_in_chunk + entry.file_size
    if end > len(data):
        raise OffsetOutOfRange(
            f"file spans bytes {entry.offset_in_chunk}..{end} of a "
            f"{len(data)}-byte chunk"
        )
    return data[entry.offset_in_chunk:end]


def read_file(view: MiniFsView, selector: int | str) -> bytes:
    """File content by table index or by exact joined path.

    Path selection on an instance holding duplicate paths raises
    AmbiguousPath; pick by index instead.
    """
    if isinstance(selector, int):
        if not 0 <= selector < len(view.files):
            raise NotFound(f"no file record {selector} (table holds {len(view.files)})")
        rec = view.files[selector]
        entry = FileEntry(
            index=selector,
            path=structs.full_path(view.names, rec),
            chunk_index=rec.chunk_index,
            offset_in_chunk=rec.offset_in_chunk,
            file_size=rec.file_size,
        )
    else:
        matches = [e for e in list_files(view) if e.path == selector]
        if not matches:
            raise NotFound(f"no file named {selector!r}")
        if len(matches) > 1:
            raise AmbiguousPath(
                f"{len(matches)} entries share the path {selector!r}; select by index"
            )
        entry = matches[0]
    return _slice_entry(view, entry)


@dataclass
class FileResult:
    """Outcome for one file of an extraction run."""

    index: int
    path: str
    size: int
    chunk_index: int
    status: str                   # "ok" | "failed"
    error: str | None = None
    written_to: str | None = None


@dataclass
class ExtractReport:
    """Deterministic summary of one extraction run."""

    results: list[FileResult]
    out_dir: str
    chunk_count: int
    warnings: list[str] = field(default_factory=list)
    categories: Counter = field(default_factory=Counter)

    @property
    def written(self) -> int:
        return sum(1 for r in self.results if r.status == "ok")

    @property
    def failed(self) -> int:
        return sum(1 for r in self.results if r.status == "failed")

    @property
    def total_bytes(self) -> int:
        return sum(r.size for r in self.results if r.status == "ok")

    def to_machine(self) -> str:
        lines = [
            f"out_dir={self.out_dir}",
            f"files={len(self.results)}",
            f"written={self.written}",
            f"failed={self.failed}",
            f"bytes={self.total_bytes}",
            f"chunks={self.chunk_count}",
        ]
        for r in self.results:
            lines.append(f"file.{r.index}.path={r.path}")
            lines.append(f"file.{r.index}.size={r.size}")
            lines.append(f"file.{r.index}.chunk={r.chunk_index}")
            lines.append(f"file.{r.index}.status={r.status}")
            if r.error:
                lines.append(f"file.{r.index}.error={r.error}")
        for name in sorted(self.categories):
            lines.append(f"category.{name}={self.categories[name]}")
        for i, w in enumerate(self.warnings):
            lines.append(f"warning.{i}={w}")
        return "\n".join(lines) + "\n"


def classify_files(items: Iterable[tuple[str, bytes | None]]) -> Counter:
    """Bucket files into coarse content categories.

    Recognition is by extension plus a leading-bytes sniff for PEM
    material; content may be None when only names are known.  Only
    nonzero categories appear in the result.
    """
    counts: Counter = Counter()
    for name, content in items:
        counts[_classify_one(name, content)] += 1
    return counts


_EXTENSION_CATEGORIES = {
    "css": "css",
    "html": "html", "htm": "html",
    "js": "js",
    "png": "images", "jpg": "images", "jpeg": "images", "gif": "images", "ico": "images",
    "txt": "config", "cfg": "config", "dat": "config", "ini": "config",
}


def _classify_one(name: str, content: bytes | None) -> str:
    if content is not None and content.startswith(b"-----BEGIN"):
        return "keys"
    ext = name.rsplit(".", 1)[-1].lower() if "." in name.rsplit("/", 1)[-1] else ""
    return _EXTENSION_CATEGORIES.get(ext, "binary")


def _safe_destination(out_root: Path, relative: str) -> Path:
    # full_path() already rejected traversal; this is the belt-and-braces
    # check that nothing resolves outside the output root anyway.
    dest = (out_root / relative).resolve()
    if not dest.is_relative_to(out_root):
        raise UnsafePath(f"{relative!r} resolves outside the output directory")
    return dest


def extract_all(
    view: MiniFsView,
    out_dir: str | os.PathLike,
    *,
    force: bool = False,
    jobs: int = 1,
) -> ExtractReport:
    """Write every file of the instance under ``out_dir``.

    Each referenced chunk is decompressed exactly once; with ``jobs`` > 1
    chunks are decompressed in parallel (writes stay ordered).  Per-file
    problems are recorded in the report instead of aborting the run; only
    an unusable output directory is fatal.  In force mode records with
    broken names are reported as failed and skipped instead of raising.

    Duplicate joined paths never overwrite each other: later copies get a
    ``.dupN`` suffix and a warning.
    """
    out_root = Path(out_dir).resolve()
    out_root.mkdir(parents=True, exist_ok=True)

    warnings: list[str] = []
    results: dict[int, FileResult] = {}
    entries: list[FileEntry] = []
    if force:
        for i, rec in enumerate(view.files):
            try:
                path = structs.full_path(view.names, rec)
            except MiniFsError as exc:
                results[i] = FileResult(
                    index=i, path="", size=rec.file_size,
                    chunk_index=rec.chunk_index, status="failed",
                    error=f"{type(exc).__name__}: {exc}",
                )
                continue
            entries.append(FileEntry(i, path, rec.chunk_index, rec.offset_in_chunk, rec.file_size))
    else:
        entries = list_files(view)

    # Decompress each referenced chunk once, keeping failures per chunk.
    needed = sorted({e.chunk_index for e in entries})
    chunk_errors: dict[int, str] = {}

    def fetch(index: int) -> None:
        try:
            view.chunk_data(index)
        except MiniFsError as exc:
            chunk_errors[index] = f"{type(exc).__name__}: {exc}"

    if jobs > 1 and len(needed) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(fetch, needed))
    else:
        for index in needed:
            fetch(index)

    seen_paths: dict[str, int] = {}
    for entry in sorted(entries, key=lambda e: (e.chunk_index, e.offset_in_chunk, e.index)):
        target = entry.path
        bump = seen_paths.get(target, 0)
        seen_paths[target] = bump + 1
        if bump:
            target = f"{target}.dup{bump}"
            warnings.append(f"duplicate path {entry.path!r}; record {entry.index} written as {target!r}")

        if entry.chunk_index in chunk_errors:
            results[entry.index] = FileResult(
                index=entry.index, path=entry.path, size=entry.file_size,
                chunk_index=entry.chunk_index, status="failed",
                error=chunk_errors[entry.chunk_index],
            )
            continue
        try:
            content = _slice_entry(view, entry)
            dest = _safe_destination(out_root, target)
            dest.parent.mkdir(parents=True, exist_ok=True)
            dest.write_bytes(content)
        except (MiniFsError, OSError) as exc:
            results[entry.index] = FileResult(
                index=entry.index, path=entry.path, size=entry.file_size,
                chunk_index=entry.chunk_index, status="failed",
                error=f"{type(exc).__name__}: {exc}",
            )
            continue
        results[entry.index] = FileResult(
            index=entry.index, path=entry.path, size=entry.file_size,
            chunk_index=entry.chunk_index, status="ok",
            written_to=str(dest),
        )

    ordered = [results[i] for i in sorted(results)]
    categories = classify_files(
        (r.path, Path(r.written_to).read_bytes() if r.written_to else None)
        for r in ordered if r.status == "ok"
    )
    return ExtractReport(
        results=ordered,
        out_dir=str(out_root),
        chunk_count=len(view.chunks),
        warnings=warnings,
        categories=categories,
    )
