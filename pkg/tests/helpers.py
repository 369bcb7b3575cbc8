"""Builders shared across test modules."""

from minifskit import PackOptions, pack

# Three files across two chunks: the middle-of-the-road instance most
# extractor tests want.  With the 600-byte cap the sorted entries group
# as [boot.bin, fw/mtk/app.js] + [fw/mtk/base.css].
THREE_FILE_ENTRIES = [
    ("fw/mtk/base.css", b"body { margin: 0; }\n" * 20),
    ("fw/mtk/app.js", b"function f() { return 1; }\n" * 16),
    ("boot.bin", bytes(range(100))),
]


def build_three_file_image() -> bytes:
    return pack(
        THREE_FILE_ENTRIES,
        PackOptions(max_chunk_decompressed=600, sort_entries=True),
    )


def write_tree(root, entries) -> None:
    """Materialize (path, bytes) pairs under ``root``."""
    for rel, content in entries:
        dest = root / rel
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_bytes(content)


def read_tree(root) -> dict[str, bytes]:
    """Relative path -> bytes for every regular file under ``root``."""
    return {
        p.relative_to(root).as_posix(): p.read_bytes()
        for p in sorted(root.rglob("*")) if p.is_file()
    }
