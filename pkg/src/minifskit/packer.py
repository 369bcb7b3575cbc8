"""Building MiniFS v2 images from file trees.

The inverse of extraction: a directory (or an in-memory entry list)
becomes header + name pool + file table + chunk table + compressed
chunks.  Emitted images always parse back with zero validation
violations, which is what makes round-trip testing and fixture
generation possible without any vendor dump.

The original tooling's grouping policy is unknown; files are packed
first-fit in entry order, starting a new chunk whenever the next file
would push the decompressed size over the cap.  The default cap sits
near the chunk sizes observed in real images.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .codec import compress_chunk
from .errors import (
    ArithmeticOverflow,
    FileTooLarge,
    NamePoolTooLarge,
    NonAsciiName,
    UnsafePath,
)
from .structs import ChunkRecord, FileRecord, MiniFsHeader

DEFAULT_CHUNK_CAP = 0x60000

_U32_MAX = 0xFFFF_FFFF


@dataclass
class PackOptions:
    """Knobs for image emission.

    ``unknown_b=None`` writes zero, or the first file's size when
    ``mimic_vendor`` is set (real headers have been seen carrying that
    value there).
    """

    max_chunk_decompressed: int = DEFAULT_CHUNK_CAP
    sort_entries: bool = True
    mimic_vendor: bool = False
    unknown_a: int = 0
    unknown_b: int | None = None
    reserved: bytes = b"\x00" * 10
    jobs: int = 1


def _check_component(text: str, what: str) -> str:
    for ch in text:
        code = ord(ch)
        if code < 0x20 or code >= 0x7F:
            raise NonAsciiName(f"{what} {text!r} contains non-printable byte {code:#04x}")
    return text


def split_entry_path(path: str) -> tuple[str, str]:
    """Split a relative POSIX path into (directory, file name).

    The same safety rules extraction enforces apply here, so a packed
    image can always be extracted: no absolute paths, no ``..`` or empty
    components, non-empty ASCII name.
    """
    if path.startswith("/"):
        raise UnsafePath(f"absolute path {path!r}")
    directory, _, name = path.rpartition("/")
    if not name:
        raise UnsafePath(f"path {path!r} has no file name")
    if name == "..":
        raise UnsafePath("file name is '..'")
    if directory:
        parts = directory.split("/")
        if "" in parts:
            raise UnsafePath(f"path {path!r} has an empty component")
        if ".." in parts:
            raise UnsafePath(f"path {path!r} contains a '..' component")
    _check_component(directory, "directory")
    _check_component(name, "file name")
    return directory, name


def build_name_pool(
    paths: Sequence[tuple[str, str]],
    *,
    limit: int = _U32_MAX,
) -> tuple[bytes, list[tuple[int, int]]]:
    """Lay out the NUL-delimited string pool for (directory, name) pairs.

    Each distinct string is stored once: directory strings first in
    first-use order, then file names, matching the layout seen in real
    images.  Returns the pool plus per-entry (path_offset, name_offset).
    """
    offsets: dict[str, int] = {}
    pieces: list[bytes] = []
    size = 0

    def intern(text: str) -> int:
        nonlocal size
        if text in offsets:
            return offsets[text]
        encoded = text.encode("ascii") + b"\x00"
        if size + len(encoded) > limit:
            raise NamePoolTooLarge(
                f"name pool would exceed {limit} bytes at string {text!r}"
            )
        offsets[text] = size
        pieces.append(encoded)
        size += len(encoded)
        return offsets[text]

    for directory, name in paths:
        _check_component(directory, "directory")
        if "/" in name:
            raise UnsafePath(f"file name {name!r} contains a path separator")
        _check_component(name, "file name")

    pairs = []
    for directory, _ in paths:
        intern(directory)
    for directory, name in paths:
        pairs.append((offsets[directory], intern(name)))
    return b"".join(pieces), pairs


@dataclass
class ChunkPlan:
    """First-fit grouping of entries into chunks.

    ``groups`` holds entry indices per chunk, ``offsets`` the byte
    position of each entry inside its chunk (parallel to the input), and
    ``chunk_sizes`` the decompressed size of each chunk.
    """

    groups: list[list[int]] = field(default_factory=list)
    offsets: list[int] = field(default_factory=list)
    chunk_sizes: list[int] = field(default_factory=list)


def plan_chunks(sizes: Sequence[int], max_chunk_decompressed: int) -> ChunkPlan:
    """Assign entries to chunks, first-fit in order.

    A new chunk starts whenever adding the next file would exceed the
    cap, so the last entry always lands in the highest-numbered chunk —
    which is what keeps the format's chunk-count inference rule true.
    """
    if max_chunk_decompressed <= 0:
        raise ValueError(f"chunk cap must be positive, got {max_chunk_decompressed}")
    plan = ChunkPlan(offsets=[0] * len(sizes))
    current: list[int] = []
    filled = 0
    for i, size in enumerate(sizes):
        if size > max_chunk_decompressed:
            raise FileTooLarge(
                f"entry {i} is {size} bytes, above the {max_chunk_decompressed}-byte chunk cap"
            )
        if current and filled + size > max_chunk_decompressed:
            plan.groups.append(current)
            plan.chunk_sizes.append(filled)
            current = []
            filled = 0
        plan.offsets[i] = filled
        current.append(i)
        filled += size
    if current:
        plan.groups.append(current)
        plan.chunk_sizes.append(filled)
    return plan


def _collect_tree(tree: str | os.PathLike) -> list[tuple[str, bytes]]:
    root = Path(tree)
    if not root.is_dir():
        raise NotADirectoryError(f"{root} is not a directory")
    entries = []
    for path in sorted(root.rglob("*")):
        if path.is_file() and not path.is_symlink():
            entries.append((path.relative_to(root).as_posix(), path.read_bytes()))
    return entries


def pack(
    tree: str | os.PathLike | Sequence[tuple[str, bytes]],
    options: PackOptions | None = None,
) -> bytes:
    """Build a complete image from a directory or (path, bytes) pairs.

    Entries are ordered lexicographically by path unless
    ``options.sort_entries`` is off.  The result satisfies ``open_view``
    with zero violations; an empty tree packs to the bare 32-byte
    header.
    """
    opts = options or PackOptions()
    if isinstance(tree, (str, os.PathLike)):
        entries = _collect_tree(tree)
    else:
        entries = [(path, bytes(content)) for path, content in tree]
    if opts.sort_entries:
        entries.sort(key=lambda e: e[0])

    split = [split_entry_path(path) for path, _ in entries]
    pool, name_offsets = build_name_pool(split)
    plan = plan_chunks([len(content) for _, content in entries], opts.max_chunk_decompressed)

    blobs = [
        b"".join(entries[i][1] for i in group)
        for group in plan.groups
    ]
    if opts.jobs > 1 and len(blobs) > 1:
        with ThreadPoolExecutor(max_workers=opts.jobs) as pool_exec:
            compressed = list(pool_exec.map(compress_chunk, blobs))
    else:
        compressed = [compress_chunk(blob) for blob in blobs]

    chunk_records = []
    data_offset = 0
    for blob, decompressed in zip(compressed, plan.chunk_sizes):
        chunk_records.append(ChunkRecord(
            data_offset=data_offset,
            compressed_size=len(blob),
            decompressed_size=decompressed,
        ))
        data_offset += len(blob)
    if data_offset > _U32_MAX:
        raise ArithmeticOverflow(f"chunk data region of {data_offset} bytes exceeds 32-bit offsets")

    chunk_of_entry = [0] * len(entries)
    for ci, group in enumerate(plan.groups):
        for i in group:
            chunk_of_entry[i] = ci

    file_records = [
        FileRecord(
            path_offset=name_offsets[i][0],
            name_offset=name_offsets[i][1],
            chunk_index=chunk_of_entry[i],
            offset_in_chunk=plan.offsets[i],
            file_size=len(entries[i][1]),
        )
        for i in range(len(entries))
    ]

    unknown_b = opts.unknown_b
    if unknown_b is None:
        unknown_b = len(entries[0][1]) if (opts.mimic_vendor and entries) else 0
    header = MiniFsHeader(
        file_count=len(entries),
        name_table_size=len(pool),
        unknown_a=opts.unknown_a,
        unknown_b=unknown_b,
        reserved=opts.reserved,
    )

    return b"".join([
        header.encode(),
        pool,
        b"".join(r.encode() for r in file_records),
        b"".join(r.encode() for r in chunk_records),
        b"".join(compressed),
    ])
