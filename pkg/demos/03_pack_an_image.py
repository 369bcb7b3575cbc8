#!/usr/bin/env python3
"""Build an image from scratch, then modify it by extract/edit/repack.

The format is read-only on-device, so "editing" an image means
rebuilding it — which this demo does, proving the result still parses
and extracts byte-for-byte.

    python demos/03_pack_an_image.py
"""

import tempfile
from pathlib import Path

from minifskit import PackOptions, extract_all, list_files, open_view, pack


def main() -> None:
    work = Path(tempfile.mkdtemp(prefix="minifs-demo-"))

    tree = work / "rootfs"
    (tree / "web").mkdir(parents=True)
    (tree / "web" / "index.html").write_bytes(b"<html><body>admin</body></html>")
    (tree / "web" / "style.css").write_bytes(b"body { margin: 0 }\n" * 40)
    (tree / "boot.cfg").write_bytes(b"console=ttyS0\nbaud=115200\n")

    image = pack(tree, PackOptions(mimic_vendor=True))
    (work / "build.img").write_bytes(image)
    view = open_view(image)
    print(f"packed {view.header.file_count} files into "
          f"{view.layout.chunk_count} chunk(s): {len(image)} bytes")
    print(f"header word @0x18 mimics the vendor value: 0x{view.header.unknown_b:08x}")

    # Modify: extract, edit one file, repack.
    stage = work / "stage"
    extract_all(view, stage)
    (stage / "boot.cfg").write_bytes(b"console=ttyS0\nbaud=9600\n")
    patched = pack(stage)
    (work / "patched.img").write_bytes(patched)

    patched_view = open_view(patched)
    print("\npatched image file list:")
    for entry in list_files(patched_view):
        print(f"  {entry.path} ({entry.file_size} bytes)")

    out = work / "check"
    extract_all(patched_view, out)
    assert (out / "boot.cfg").read_bytes() == b"console=ttyS0\nbaud=9600\n"
    print(f"\nround trip verified under {work}")


if __name__ == "__main__":
    main()
