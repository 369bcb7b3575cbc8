#!/usr/bin/env python3
"""Walk through scanning a flash dump for embedded file systems.

Real dumps are proprietary, so the demo first builds a synthetic one
with the same five-region anatomy (padding, compressed blob, MiniFS
image, erased space, config text) and then runs the scanner over it the
way you would over a dump read off a flash chip:

    python demos/01_scan_a_dump.py [path/to/dump.bin]
"""

import sys

from minifskit import FixtureSpec, dump_report, find_magic, make_fixture


def main() -> None:
    if len(sys.argv) > 1:
        with open(sys.argv[1], "rb") as handle:
            dump = handle.read()
        print(f"scanning {sys.argv[1]} ({len(dump)} bytes)")
    else:
        dump, manifest = make_fixture(FixtureSpec(seed=7, shape="five-region"))
        print(f"no dump given; built the synthetic five-region dump "
              f"({len(dump)} bytes, seed {manifest.seed})")

    # Step 1: where does the magic string occur, and does anything parse?
    hits = find_magic(dump)
    print(f"\nmagic hits: {len(hits)}")
    for hit in hits:
        print(f"  offset 0x{hit.offset:08x}  version hint: {hit.version_hint.value}")

    # Step 2: entropy sections tell compressed/encrypted regions from
    # code, tables and erased flash; instances get annotated inline.
    report = dump_report(dump)
    print(f"\nsections (block {report.block_size}, "
          f"high-entropy threshold {report.high_threshold} bits/byte):")
    for s in report.sections:
        line = (f"  [0x{s.start:08x}..0x{s.end:08x})  {s.label:<6} "
                f"mean entropy {s.mean_entropy:5.2f}")
        if s.minifs:
            line += (f"  <- MiniFS: {s.minifs.file_count} files, "
                     f"{s.minifs.chunk_count} chunks, {s.minifs.version.value}")
        print(line)

    if not report.instances:
        print("\nno parseable MiniFS instance in this dump")


if __name__ == "__main__":
    main()
