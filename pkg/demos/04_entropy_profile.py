#!/usr/bin/env python3
"""Plot (or print) the entropy curve the scanner segments dumps with.

    python demos/04_entropy_profile.py [dump] [--png out.png]

Without a dump argument the five-region synthetic fixture is profiled;
with matplotlib available a PNG is rendered, otherwise the two-column
offset/entropy table (the same thing ``minifs entropy`` emits) is
printed for piping into any plotting tool.
"""

import sys

from minifskit import FixtureSpec, entropy_profile, make_fixture, segment_sections


def main() -> None:
    argv = [a for a in sys.argv[1:] if not a.startswith("--")]
    png = None
    if "--png" in sys.argv:
        png = sys.argv[sys.argv.index("--png") + 1]

    if argv:
        with open(argv[0], "rb") as handle:
            dump = handle.read()
        label = argv[0]
    else:
        dump, _ = make_fixture(FixtureSpec(seed=7, shape="five-region"))
        label = "synthetic five-region dump"

    profile = segment_sections(entropy_profile(dump, block_size=1024))
    print(f"{label}: {len(dump)} bytes, {len(profile.entropies)} blocks, "
          f"{len(profile.sections)} sections")
    for s in profile.sections:
        print(f"  [0x{s.start:06x}..0x{s.end:06x}) {s.label}")

    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("\noffset\tentropy")
        for i, e in enumerate(profile.entropies):
            print(f"{i * profile.block_size}\t{e:.6f}")
        return

    offsets = [i * profile.block_size for i in range(len(profile.entropies))]
    fig, ax = plt.subplots(figsize=(9, 3))
    ax.step(offsets, profile.entropies, where="post", lw=1.5)
    ax.set_xlabel("offset (bytes)")
    ax.set_ylabel("entropy (bits/byte)")
    ax.set_ylim(-0.2, 8.4)
    ax.set_title(f"block entropy: {label}")
    for s in profile.sections:
        if s.label == "high":
            ax.axvspan(s.start, s.end, alpha=0.15)
    out = png or "entropy.png"
    fig.savefig(out, bbox_inches="tight", dpi=120)
    print(f"\nwrote {out}")


if __name__ == "__main__":
    main()
