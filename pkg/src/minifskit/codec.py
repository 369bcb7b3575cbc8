"""LZMA chunk compression and decompression.

Chunks are legacy-LZMA ("alone") streams: a 13-byte header (1 properties
byte, 4-byte little-endian dictionary size, 8-byte little-endian
uncompressed size) followed by the compressed payload.  The first four
header bytes double as the format's configuration word: ``5D 00 00 80``
for v2 images, ``5A 00 00 80`` for the earlier v1 generation.

The uncompressed-size field is not trusted: vendors may write the real
length or the unknown-size marker (all ``FF``).  The chunk table carries
the authoritative decompressed size, so the decoder parses the header
itself and runs the payload through a raw LZMA1 decoder capped at the
expected length.  That accepts both size-field variants, guards against
decompression bombs, and never allocates a dictionary larger than the
output could reference.
"""

from __future__ import annotations

import enum
import lzma

from .errors import CorruptStream, EncodeError, SizeMismatch, UnknownConfigWord

V2_CONFIG_WORD = bytes.fromhex("5d000080")
V1_CONFIG_WORD = bytes.fromhex("5a000080")

# Dictionary size written by the v2 encoder; little-endian 0x00800000 (8 MiB),
# which together with the 0x5D properties byte yields the v2 config word.
_ENCODER_DICT_SIZE = 0x0080_0000

_STREAM_HEADER_SIZE = 13
_UNKNOWN_SIZE_FIELD = b"\xff" * 8

# Largest decompressed chunk accepted by default.  Observed real chunks
# are a few hundred KiB; anything near this cap is hostile or corrupt.
DEFAULT_OUTPUT_LIMIT = 64 * 1024 * 1024

_MIN_DICT_SIZE = 4096


class Version(enum.Enum):
    """File-system generation, as identified by the configuration word."""

    V2 = "v2"
    V1_LEGACY = "v1-legacy"
    UNKNOWN = "unknown"


def check_config_word(chunk: bytes) -> Version:
    """Classify a chunk by its leading 4-byte configuration word.

    Returns V2 or V1_LEGACY; anything else raises UnknownConfigWord
    carrying the bytes actually seen.
    """
    word = bytes(chunk[:4])
    if len(word) < 4:
        raise UnknownConfigWord(word, f"chunk holds only {len(word)} bytes, need 4")
    if word == V2_CONFIG_WORD:
        return Version.V2
    if word == V1_CONFIG_WORD:
        return Version.V1_LEGACY
    raise UnknownConfigWord(word)


def _lzma1_filter_from_props(props: int, dict_size: int) -> list[dict]:
    if props > 224:
        raise CorruptStream(f"invalid LZMA properties byte {props:#04x}")
    lc = props % 9
    rest = props // 9
    lp = rest % 5
    pb = rest // 5
    return [{"id": lzma.FILTER_LZMA1, "lc": lc, "lp": lp, "pb": pb, "dict_size": dict_size}]


def _bounded_dict_size(declared: int, expected_size: int) -> int:
    # A match can never reach further back than the bytes already
    # produced, so a dictionary covering the whole output is always
    # enough.  This keeps decoder memory proportional to the chunk, no
    # matter what the header claims.
    needed = max(expected_size, _MIN_DICT_SIZE)
    if needed > _MIN_DICT_SIZE:
        needed = 1 << (needed - 1).bit_length()
    return min(max(declared, _MIN_DICT_SIZE), needed)


def decompress_chunk(
    chunk: bytes,
    expected_size: int,
    *,
    output_limit: int = DEFAULT_OUTPUT_LIMIT,
) -> bytes:
    """Decompress one v2 chunk to exactly ``expected_size`` bytes.

    ``expected_size`` comes from the chunk table and wins over whatever
    the stream's own size field says.  Never produces more than
    ``expected_size`` bytes of output.

    Raises UnknownConfigWord for a non-v2 leading word (including the
    legacy v1 word, whose chunks this toolkit does not decode),
    CorruptStream when the decoder rejects the payload, and SizeMismatch
    when the decoded length differs from ``expected_size``.
    """
    if expected_size < 0:
        raise ValueError(f"expected_size must be non-negative, got {expected_size}")
    if expected_size > output_limit:
        raise ValueError(
            f"expected_size {expected_size} exceeds the output limit {output_limit}; "
            "raise output_limit explicitly to allow chunks this large"
        )
    version = check_config_word(chunk)
    if version is not Version.V2:
        raise UnknownConfigWord(
            bytes(chunk[:4]),
            f"chunk carries the legacy v1 word {V1_CONFIG_WORD.hex()}; only v2 is decodable",
        )
    if len(chunk) < _STREAM_HEADER_SIZE:
        raise CorruptStream(
            f"chunk of {len(chunk)} bytes is shorter than the {_STREAM_HEADER_SIZE}-byte "
            "LZMA stream header"
        )

    declared_dict = int.from_bytes(chunk[1:5], "little")
    filters = _lzma1_filter_from_props(chunk[0], _bounded_dict_size(declared_dict, expected_size))
    decoder = lzma.LZMADecompressor(lzma.FORMAT_RAW, filters=filters)
    try:
        out = decoder.decompress(chunk[_STREAM_HEADER_SIZE:], max_length=expected_size)
        overrun = b""
        if len(out) == expected_size and not decoder.eof:
            # One probe byte tells apart "stream complete" from "stream
            # wants to emit more than the table promised".
            overrun = decoder.decompress(b"", max_length=1)
    except lzma.LZMAError as exc:
        raise CorruptStream(f"LZMA decoder failed: {exc}") from exc
    if overrun:
        raise SizeMismatch(
            expected_size,
            expected_size + len(overrun),
            f"stream decodes past the expected {expected_size} bytes",
        )
    if len(out) != expected_size:
        raise SizeMismatch(expected_size, len(out))
    return out


def compress_chunk(data: bytes, *, preset: int = 6) -> bytes:
    """Compress ``data`` into a v2 chunk.

    The output starts with the v2 configuration word and uses the
    unknown-size stream variant, exactly what
    :func:`decompress_chunk` (and stock LZMA tools) accept.
    """
    filters = [{"id": lzma.FILTER_LZMA1, "preset": preset, "dict_size": _ENCODER_DICT_SIZE}]
    try:
        out = lzma.compress(data, format=lzma.FORMAT_ALONE, filters=filters)
    except lzma.LZMAError as exc:
        raise EncodeError(f"LZMA encoder failed: {exc}") from exc
    if out[:4] != V2_CONFIG_WORD:
        raise EncodeError(f"encoder produced unexpected leading word {out[:4].hex()}")
    return out
