"""On-disk structures of the MiniFS v2 read-only file system.

An instance is laid out as five back-to-back regions, addressed from the
position of the magic string (the *base*)::

    base +  0   header, fixed 32 bytes, starts with ASCII "MINIFS"
    base + 32   name pool: NUL-delimited ASCII strings (paths and names)
    ...         file table: 20-byte records, one per file
    ...         chunk table: 12-byte records, one per compressed chunk
    ...         chunk data: raw LZMA streams, concatenated without padding

All multi-byte fields are unsigned 32-bit big-endian.  The header carries
two words and ten bytes whose meaning is unknown; they are preserved
verbatim so that decode/encode round-trips are byte-exact.

Everything in this module is a pure function over immutable inputs.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .errors import (
    ArithmeticOverflow,
    BadMagic,
    EmptyFileTable,
    NonAsciiName,
    OffsetOutOfRange,
    TruncatedTable,
    UnsafePath,
    UnterminatedString,
)

MAGIC = b"MINIFS"
HEADER_SIZE = 32
FILE_RECORD_SIZE = 20
CHUNK_RECORD_SIZE = 12

# Header field offsets (from base).
_RESERVED_SLICE = slice(6, 16)       # 10 bytes, unidentified
_UNKNOWN_A_OFFSET = 0x10
_FILE_COUNT_OFFSET = 0x14
_UNKNOWN_B_OFFSET = 0x18
_NAME_TABLE_SIZE_OFFSET = 0x1C

_U32_MAX = 0xFFFF_FFFF

_FILE_RECORD = struct.Struct(">IIIII")
_CHUNK_RECORD = struct.Struct(">III")


def _check_u32(value: int, what: str) -> int:
    if not 0 <= value <= _U32_MAX:
        raise ValueError(f"{what} {value} does not fit an unsigned 32-bit field")
    return value


@dataclass(frozen=True)
class MiniFsHeader:
    """Decoded 32-byte header.

    ``unknown_a``, ``unknown_b`` and ``reserved`` have no identified
    meaning; they are carried through unchanged.
    """

    file_count: int
    name_table_size: int
    unknown_a: int = 0
    unknown_b: int = 0
    reserved: bytes = b"\x00" * 10

    def encode(self) -> bytes:
        if len(self.reserved) != 10:
            raise ValueError(f"reserved must be 10 bytes, got {len(self.reserved)}")
        return (
            MAGIC
            + bytes(self.reserved)
            + _check_u32(self.unknown_a, "unknown_a").to_bytes(4, "big")
            + _check_u32(self.file_count, "file_count").to_bytes(4, "big")
            + _check_u32(self.unknown_b, "unknown_b").to_bytes(4, "big")
            + _check_u32(self.name_table_size, "name_table_size").to_bytes(4, "big")
        )


@dataclass(frozen=True)
class NameTable:
    """NUL-delimited ASCII string pool, addressed by byte offset."""

    pool: bytes

    def __len__(self) -> int:
        return len(self.pool)


@dataclass(frozen=True)
class FileRecord:
    """One 20-byte entry of the file table."""

    path_offset: int
    name_offset: int
    chunk_index: int
    offset_in_chunk: int
    file_size: int

    def encode(self) -> bytes:
        return _FILE_RECORD.pack(
            _check_u32(self.path_offset, "path_offset"),
            _check_u32(self.name_offset, "name_offset"),
            _check_u32(self.chunk_index, "chunk_index"),
            _check_u32(self.offset_in_chunk, "offset_in_chunk"),
            _check_u32(self.file_size, "file_size"),
        )


@dataclass(frozen=True)
class ChunkRecord:
    """One 12-byte entry of the chunk table.

    ``data_offset`` is relative to the start of the chunk data region,
    not to the image base.
    """

    data_offset: int
    compressed_size: int
    decompressed_size: int

    def encode(self) -> bytes:
        return _CHUNK_RECORD.pack(
            _check_u32(self.data_offset, "data_offset"),
            _check_u32(self.compressed_size, "compressed_size"),
            _check_u32(self.decompressed_size, "decompressed_size"),
        )


@dataclass(frozen=True)
class FsLayout:
    """Absolute start offsets of the five regions of one instance."""

    base: int
    names_start: int
    files_start: int
    chunk_table_start: int
    data_start: int
    chunk_count: int


@dataclass(frozen=True)
class Violation:
    """One broken invariant found by :func:`validate_layout`."""

    kind: str
    detail: str
    index: int | None = None

    def __str__(self) -> str:
        where = "" if self.index is None else f"[{self.index}] "
        return f"{self.kind}: {where}{self.detail}"


def parse_header(buf: bytes) -> MiniFsHeader:
    """Decode a 32-byte header, preserving the unidentified fields.

    Raises BadMagic if the buffer does not start with ``MINIFS``, and
    ValueError if it is not exactly 32 bytes.
    """
    if len(buf) != HEADER_SIZE:
        raise ValueError(f"header must be exactly {HEADER_SIZE} bytes, got {len(buf)}")
    if buf[:6] != MAGIC:
        raise BadMagic(f"expected magic {MAGIC!r}, found {bytes(buf[:6])!r}")
    return MiniFsHeader(
        file_count=int.from_bytes(buf[_FILE_COUNT_OFFSET:_FILE_COUNT_OFFSET + 4], "big"),
        name_table_size=int.from_bytes(
            buf[_NAME_TABLE_SIZE_OFFSET:_NAME_TABLE_SIZE_OFFSET + 4], "big"
        ),
        unknown_a=int.from_bytes(buf[_UNKNOWN_A_OFFSET:_UNKNOWN_A_OFFSET + 4], "big"),
        unknown_b=int.from_bytes(buf[_UNKNOWN_B_OFFSET:_UNKNOWN_B_OFFSET + 4], "big"),
        reserved=bytes(buf[_RESERVED_SLICE]),
    )


def name_at(table: NameTable, offset: int) -> str:
    """Return the NUL-terminated ASCII string starting at ``offset``.

    The empty string (a NUL at ``offset``) is valid: it is the path of
    files living in the file-system root.
    """
    pool = table.pool
    if not 0 <= offset < len(pool):
        raise OffsetOutOfRange(f"name offset {offset} outside pool of {len(pool)} bytes")
    end = pool.find(b"\x00", offset)
    if end < 0:
        raise UnterminatedString(f"no NUL terminator after offset {offset}")
    raw = pool[offset:end]
    for i, b in enumerate(raw):
        if b < 0x20 or b >= 0x7F:
            raise NonAsciiName(f"byte {b:#04x} at pool offset {offset + i} is not printable ASCII")
    return raw.decode("ascii")


def full_path(table: NameTable, record: FileRecord) -> str:
    """Join a record's directory string and file name into one path.

    An empty directory string means the file sits in the root and the
    name is returned alone.  Anything that could climb out of an
    extraction root is rejected: absolute paths, ``..`` components, a
    separator inside the name, or an empty name.
    """
    directory = name_at(table, record.path_offset)
    name = name_at(table, record.name_offset)
    if not name:
        raise UnsafePath("empty file name")
    if "/" in name:
        raise UnsafePath(f"file name {name!r} contains a path separator")
    if name == "..":
        raise UnsafePath("file name is '..'")
    if directory.startswith("/"):
        raise UnsafePath(f"absolute directory path {directory!r}")
    if directory and ".." in directory.split("/"):
        raise UnsafePath(f"directory path {directory!r} contains a '..' component")
    return f"{directory}/{name}" if directory else name


def parse_file_table(buf: bytes, file_count: int) -> list[FileRecord]:
    """Decode ``file_count`` big-endian file records from ``buf``."""
    need = FILE_RECORD_SIZE * file_count
    if len(buf) < need:
        raise TruncatedTable(
            f"file table needs {need} bytes for {file_count} records, got {len(buf)}"
        )
    return [
        FileRecord(*_FILE_RECORD.unpack_from(buf, i * FILE_RECORD_SIZE))
        for i in range(file_count)
    ]


def parse_chunk_table(buf: bytes, chunk_count: int) -> list[ChunkRecord]:
    """Decode ``chunk_count`` big-endian chunk records from ``buf``."""
    need = CHUNK_RECORD_SIZE * chunk_count
    if len(buf) < need:
        raise TruncatedTable(
            f"chunk table needs {need} bytes for {chunk_count} records, got {len(buf)}"
        )
    return [
        ChunkRecord(*_CHUNK_RECORD.unpack_from(buf, i * CHUNK_RECORD_SIZE))
        for i in range(chunk_count)
    ]


def infer_chunk_count(records: list[FileRecord]) -> int:
    """Chunk count = last file record's chunk index + 1.

    The format stores no explicit chunk count; the last record's chunk
    index is the convention.  :func:`validate_layout` cross-checks it
    against the maximum index seen anywhere in the table.
    """
    if not records:
        raise EmptyFileTable("cannot infer chunk count from an empty file table")
    return records[-1].chunk_index + 1


def compute_layout(header: MiniFsHeader, chunk_count: int, base: int = 0) -> FsLayout:
    """Compute the five region start offsets for an instance at ``base``.

    Raises ArithmeticOverflow when the span from base to the data region
    exceeds 32-bit addressing (no real image can be laid out that way).
    """
    if base < 0:
        raise ValueError(f"base must be non-negative, got {base}")
    names_start = base + HEADER_SIZE
    files_start = names_start + header.name_table_size
    chunk_table_start = files_start + FILE_RECORD_SIZE * header.file_count
    data_start = chunk_table_start + CHUNK_RECORD_SIZE * chunk_count
    if data_start - base > _U32_MAX:
        raise ArithmeticOverflow(
            f"table regions span {data_start - base} bytes from base, beyond 32-bit addressing"
        )
    return FsLayout(
        base=base,
        names_start=names_start,
        files_start=files_start,
        chunk_table_start=chunk_table_start,
        data_start=data_start,
        chunk_count=chunk_count,
    )


def validate_layout(
    header: MiniFsHeader,
    records: list[FileRecord],
    chunks: list[ChunkRecord],
    image_length: int,
    *,
    base: int = 0,
    names: NameTable | None = None,
) -> list[Violation]:
    """Cross-check parsed structures and report every broken invariant.

    Returns an empty list for a well-formed instance.  Violations are
    data, not failures: callers decide whether to stop (default) or to
    continue best-effort (force mode).  When ``names`` is given, each
    record's strings are also resolved through the pool.

    Path *safety* (traversal and separator rules) is deliberately not
    checked here; it is enforced when paths are joined for extraction.
    """
    violations: list[Violation] = []
    add = violations.append

    layout = None
    try:
        layout = compute_layout(header, len(chunks), base)
    except ArithmeticOverflow as exc:
        add(Violation("region-bounds", str(exc)))
    if layout is not None and layout.data_start > image_length:
        add(Violation(
            "region-bounds",
            f"tables end at {layout.data_start} but image is {image_length} bytes",
        ))

    for i, rec in enumerate(records):
        for what, off in (("path", rec.path_offset), ("name", rec.name_offset)):
            if off >= header.name_table_size:
                add(Violation(
                    "name-offset",
                    f"{what} offset {off} outside {header.name_table_size}-byte pool",
                    index=i,
                ))
            elif names is not None:
                try:
                    name_at(names, off)
                except (OffsetOutOfRange, UnterminatedString, NonAsciiName) as exc:
                    add(Violation("bad-name", f"{what} string: {exc}", index=i))
        if rec.chunk_index >= len(chunks):
            add(Violation(
                "chunk-index",
                f"chunk index {rec.chunk_index} with only {len(chunks)} chunks",
                index=i,
            ))
        else:
            chunk = chunks[rec.chunk_index]
            if rec.offset_in_chunk + rec.file_size > chunk.decompressed_size:
                add(Violation(
                    "file-span",
                    f"offset {rec.offset_in_chunk} + size {rec.file_size} exceeds "
                    f"{chunk.decompressed_size}-byte chunk {rec.chunk_index}",
                    index=i,
                ))

    for i, chunk in enumerate(chunks):
        if chunk.compressed_size < 5:
            add(Violation(
                "chunk-size",
                f"compressed size {chunk.compressed_size} below the 5-byte LZMA header minimum",
                index=i,
            ))
        if layout is not None:
            end = layout.data_start + chunk.data_offset + chunk.compressed_size
            if end > image_length:
                add(Violation(
                    "chunk-bounds",
                    f"chunk data ends at {end} but image is {image_length} bytes",
                    index=i,
                ))

    if records:
        last = records[-1].chunk_index
        highest = max(rec.chunk_index for rec in records)
        if highest != last:
            add(Violation(
                "chunk-inference",
                f"last record names chunk {last} but chunk {highest} is referenced earlier",
            ))
        if len(chunks) != last + 1:
            add(Violation(
                "chunk-count",
                f"last record implies {last + 1} chunks, table holds {len(chunks)}",
            ))

    return violations
