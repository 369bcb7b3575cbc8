"""Locating MiniFS instances inside raw flash dumps.

Two complementary techniques:

* magic search — every occurrence of the ASCII string ``MINIFS`` is a
  candidate instance; a structural parse attempt attaches a version hint
  so false positives (the string inside some HTML file) are kept apart
  from real file systems.

* block entropy — Shannon entropy per fixed-size block segments a dump
  into high-entropy regions (compressed or encrypted data), low-entropy
  regions (code, text, tables) and erased-flash runs, the usual first
  step when staring at an unknown dump.

Thresholds are conventional firmware-carving defaults, not properties of
the format; everything is tunable.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from . import structs
from .codec import Version, check_config_word
from .errors import EmptyInput, MiniFsError, TruncatedImage

DEFAULT_BLOCK_SIZE = 1024
DEFAULT_HIGH_THRESHOLD = 7.5
DEFAULT_EMPTY_BYTE = 0xFF

LABEL_LOW = "low"
LABEL_HIGH = "high"
LABEL_EMPTY = "empty"


@dataclass(frozen=True)
class MagicHit:
    """One occurrence of the magic string inside a dump."""

    offset: int
    version_hint: Version


@dataclass(frozen=True)
class MinifsSummary:
    """Header facts for a validated instance, attached to scan reports."""

    base: int
    file_count: int
    name_table_size: int
    chunk_count: int
    version: Version


@dataclass
class Section:
    """A maximal run of equally-labeled blocks."""

    start: int
    end: int
    label: str
    mean_entropy: float
    minifs: MinifsSummary | None = None


@dataclass
class SectionProfile:
    """Per-block entropy of a dump plus the derived section list.

    ``entropies`` are bits per byte in [0, 8].  ``constant_bytes[i]`` is
    the byte value when block ``i`` is one repeated byte (how erased
    flash is told apart from other zero-entropy content), else None.
    Sections are empty until :func:`segment_sections` fills them.
    """

    block_size: int
    length: int
    entropies: list[float]
    constant_bytes: list[int | None]
    sections: list[Section] = field(default_factory=list)


def find_magic(dump: bytes) -> list[MagicHit]:
    """Find every ``MINIFS`` occurrence, in ascending offset order.

    Each hit gets a version hint read from the first chunk's
    configuration word after a structural parse; hits where nothing
    parses (or there is no chunk to look at) are UNKNOWN.
    """
    hits = []
    at = dump.find(structs.MAGIC)
    while at >= 0:
        hits.append(MagicHit(offset=at, version_hint=_probe_version(dump, at)))
        at = dump.find(structs.MAGIC, at + 1)
    return hits


def _parse_instance(dump: bytes, base: int):
    """Structural parse at ``base``; no validation, no name decoding."""
    header = structs.parse_header(dump[base:base + structs.HEADER_SIZE])
    layout_probe = structs.compute_layout(header, 0, base)
    if layout_probe.chunk_table_start > len(dump):
        raise TruncatedImage(f"tables extend past the {len(dump)}-byte dump")
    records = structs.parse_file_table(
        dump[layout_probe.files_start:layout_probe.chunk_table_start], header.file_count
    )
    chunk_count = structs.infer_chunk_count(records) if records else 0
    layout = structs.compute_layout(header, chunk_count, base)
    if layout.data_start > len(dump):
        raise TruncatedImage(f"chunk table extends past the {len(dump)}-byte dump")
    chunks = structs.parse_chunk_table(
        dump[layout.chunk_table_start:layout.data_start], chunk_count
    )
    return header, records, chunks, layout


def _probe_version(dump: bytes, base: int) -> Version:
    try:
        header, records, chunks, layout = _parse_instance(dump, base)
        if not chunks:
            return Version.UNKNOWN
        first = chunks[0]
        start = layout.data_start + first.data_offset
        return check_config_word(dump[start:start + 4])
    except (MiniFsError, ValueError):
        return Version.UNKNOWN


def _summarize_instance(dump: bytes, base: int) -> MinifsSummary | None:
    """Full parse + validation; None unless the instance is clean."""
    try:
        header, records, chunks, layout = _parse_instance(dump, base)
        names = structs.NameTable(dump[layout.names_start:layout.files_start])
        if structs.validate_layout(
            header, records, chunks, len(dump), base=base, names=names
        ):
            return None
    except (MiniFsError, ValueError):
        return None
    return MinifsSummary(
        base=base,
        file_count=header.file_count,
        name_table_size=header.name_table_size,
        chunk_count=len(chunks),
        version=_probe_version(dump, base),
    )


def entropy_profile(dump: bytes, block_size: int = DEFAULT_BLOCK_SIZE) -> SectionProfile:
    """Per-block Shannon entropy over the whole dump.

    The final partial block, if any, is measured over its actual length.
    ``block_size`` must be a power of two, at least 16.
    """
    if len(dump) == 0:
        raise EmptyInput("cannot profile an empty dump")
    if block_size < 16 or block_size & (block_size - 1):
        raise ValueError(f"block_size must be a power of two >= 16, got {block_size}")

    entropies: list[float] = []
    constants: list[int | None] = []
    view = memoryview(dump)
    for start in range(0, len(dump), block_size):
        block = view[start:start + block_size]
        counts = np.bincount(np.frombuffer(block, dtype=np.uint8), minlength=256)
        p = counts[counts > 0] / len(block)
        entropies.append(min(float(-(p * np.log2(p)).sum()) + 0.0, 8.0))
        constants.append(block[0] if counts[block[0]] == len(block) else None)
    return SectionProfile(
        block_size=block_size,
        length=len(dump),
        entropies=entropies,
        constant_bytes=constants,
    )


def segment_sections(
    profile: SectionProfile,
    high_threshold: float = DEFAULT_HIGH_THRESHOLD,
    empty_byte: int = DEFAULT_EMPTY_BYTE,
) -> SectionProfile:
    """Label blocks and merge equal neighbours into maximal sections.

    A block is ``empty`` when it is one repeated byte equal to
    ``empty_byte`` (the erased-flash convention), ``high`` when its
    entropy reaches ``high_threshold``, otherwise ``low``.  A fourth
    label, ``mixed``, is reserved for sub-block splitting and never
    produced at block granularity.  The returned profile's sections
    tile [0, length) without gaps or overlap.
    """
    labels = [
        LABEL_EMPTY if constant == empty_byte
        else LABEL_HIGH if entropy >= high_threshold
        else LABEL_LOW
        for entropy, constant in zip(profile.entropies, profile.constant_bytes)
    ]

    sections: list[Section] = []
    run_start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[run_start]:
            start = run_start * profile.block_size
            end = min(i * profile.block_size, profile.length)
            run = profile.entropies[run_start:i]
            sections.append(Section(
                start=start,
                end=end,
                label=labels[run_start],
                mean_entropy=sum(run) / len(run),
            ))
            run_start = i
    return dataclasses.replace(profile, sections=sections)


@dataclass
class DumpReport:
    """Combined magic + section view of one dump."""

    length: int
    block_size: int
    high_threshold: float
    sections: list[Section]
    hits: list[MagicHit]

    @property
    def instances(self) -> list[MinifsSummary]:
        return [s.minifs for s in self.sections if s.minifs is not None]

    def to_machine(self) -> str:
        """Stable line-oriented key=value rendering."""
        lines = [
            f"length={self.length}",
            f"block_size={self.block_size}",
            f"threshold={self.high_threshold:.6f}",
            f"sections={len(self.sections)}",
        ]
        for i, s in enumerate(self.sections):
            lines.append(f"section.{i}.start={s.start}")
            lines.append(f"section.{i}.end={s.end}")
            lines.append(f"section.{i}.label={s.label}")
            lines.append(f"section.{i}.mean_entropy={s.mean_entropy:.6f}")
            if s.minifs is not None:
                m = s.minifs
                lines.append(f"section.{i}.minifs.base={m.base}")
                lines.append(f"section.{i}.minifs.files={m.file_count}")
                lines.append(f"section.{i}.minifs.names={m.name_table_size}")
                lines.append(f"section.{i}.minifs.chunks={m.chunk_count}")
                lines.append(f"section.{i}.minifs.version={m.version.value}")
        lines.append(f"hits={len(self.hits)}")
        for i, h in enumerate(self.hits):
            lines.append(f"hit.{i}.offset={h.offset}")
            lines.append(f"hit.{i}.version={h.version_hint.value}")
        return "\n".join(lines) + "\n"


def dump_report(
    dump: bytes,
    *,
    block_size: int = DEFAULT_BLOCK_SIZE,
    high_threshold: float = DEFAULT_HIGH_THRESHOLD,
    empty_byte: int = DEFAULT_EMPTY_BYTE,
) -> DumpReport:
    """Scan a dump: entropy sections plus magic hits, merged.

    A section containing a hit that parses and validates cleanly gets
    that instance's summary attached.  Never raises on odd input; an
    empty dump yields an empty report.
    """
    if len(dump) == 0:
        return DumpReport(
            length=0,
            block_size=block_size,
            high_threshold=high_threshold,
            sections=[],
            hits=[],
        )
    profile = segment_sections(
        entropy_profile(dump, block_size), high_threshold, empty_byte
    )
    hits = find_magic(dump)
    sections = profile.sections
    for hit in hits:
        summary = _summarize_instance(dump, hit.offset)
        if summary is None:
            continue
        for section in sections:
            if section.start <= hit.offset < section.end and section.minifs is None:
                section.minifs = summary
                break
    return DumpReport(
        length=len(dump),
        block_size=block_size,
        high_threshold=high_threshold,
        sections=sections,
        hits=hits,
    )
