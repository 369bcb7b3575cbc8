"""Entropy profiling, section segmentation and magic search."""

import math
import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from minifskit import (
    Version,
    dump_report,
    entropy_profile,
    find_magic,
    segment_sections,
)
from minifskit.errors import EmptyInput
from helpers import build_three_file_image


def entropy_oracle(block: bytes) -> float:
    """Textbook frequency/log2 computation, independent of the library path."""
    counts = Counter(block)
    return -sum(
        (n / len(block)) * math.log2(n / len(block)) for n in counts.values()
    )


def naive_find(dump: bytes, needle: bytes = b"MINIFS") -> list[int]:
    """Byte-by-byte substring scan used as the search oracle."""
    return [i for i in range(len(dump) - len(needle) + 1) if dump[i:i + len(needle)] == needle]


class TestEntropyProfile:
    def test_constant_blocks_are_zero(self):
        profile = entropy_profile(b"\xff" * 4096, 1024)
        assert profile.entropies == [0.0, 0.0, 0.0, 0.0]

    def test_two_equiprobable_symbols(self):
        profile = entropy_profile(bytes([0x00, 0xFF]) * 512, 1024)
        assert profile.entropies == [1.0]

    def test_uniform_random_blocks_near_eight(self):
        rng = random.Random(1234)
        dump = bytes(rng.randrange(256) for _ in range(65536))
        profile = entropy_profile(dump, 4096)
        assert len(profile.entropies) == 16
        for start, e in zip(range(0, 65536, 4096), profile.entropies):
            assert 7.9 <= e <= 8.0
            assert e == pytest.approx(entropy_oracle(dump[start:start + 4096]), abs=1e-9)

    def test_partial_final_block_uses_actual_length(self):
        dump = b"\x00" * 1024 + bytes([0, 255]) * 256  # 512-byte tail
        profile = entropy_profile(dump, 1024)
        assert profile.entropies == [0.0, 1.0]
        assert profile.length == 1536

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            entropy_profile(b"", 1024)

    def test_block_size_must_be_power_of_two(self):
        for bad in (0, 8, 100, 1000):
            with pytest.raises(ValueError):
                entropy_profile(b"x" * 64, bad)

    @given(st.binary(min_size=1, max_size=2048))
    def test_bounds(self, data):
        for e in entropy_profile(data, 256).entropies:
            assert 0.0 <= e <= 8.0

    @given(st.binary(min_size=16, max_size=256), st.randoms(use_true_random=False))
    def test_permutation_invariance(self, block, rnd):
        shuffled = bytearray(block)
        rnd.shuffle(shuffled)
        original = entropy_profile(block, 256).entropies
        permuted = entropy_profile(bytes(shuffled), 256).entropies
        assert original == pytest.approx(permuted, abs=1e-12)


class TestSegmentSections:
    def test_merges_equal_neighbours(self):
        rng = random.Random(7)
        noise = bytes(rng.randrange(256) for _ in range(2048))
        dump = b"\xff" * 1024 + noise + b"\xff" * 1024
        profile = segment_sections(entropy_profile(dump, 1024))
        assert [s.label for s in profile.sections] == ["empty", "high", "empty"]
        assert [(s.start, s.end) for s in profile.sections] == [
            (0, 1024), (1024, 3072), (3072, 4096)]

    def test_all_random_is_one_high_section(self):
        rng = random.Random(8)
        dump = bytes(rng.randrange(256) for _ in range(8192))
        profile = segment_sections(entropy_profile(dump, 1024))
        assert [s.label for s in profile.sections] == ["high"]

    def test_all_erased_is_one_empty_section(self):
        profile = segment_sections(entropy_profile(b"\xff" * 8192, 1024))
        assert [s.label for s in profile.sections] == ["empty"]

    def test_constant_non_empty_byte_is_low(self):
        # Zero-filled padding has zero entropy too, but is not erased flash.
        profile = segment_sections(entropy_profile(b"\x00" * 2048, 1024))
        assert [s.label for s in profile.sections] == ["low"]

    def test_empty_byte_override(self):
        profile = segment_sections(entropy_profile(b"\x00" * 2048, 1024), empty_byte=0x00)
        assert [s.label for s in profile.sections] == ["empty"]

    @given(st.binary(min_size=1, max_size=4096))
    def test_sections_tile_the_dump(self, data):
        profile = segment_sections(entropy_profile(data, 256))
        sections = profile.sections
        assert sections[0].start == 0
        assert sections[-1].end == len(data)
        for left, right in zip(sections, sections[1:]):
            assert left.end == right.start
            assert left.label != right.label


class TestFindMagic:
    def test_planted_image_found_with_version(self):
        image = build_three_file_image()
        dump = b"\x00" * 4096 + image
        hits = find_magic(dump)
        assert [h.offset for h in hits] == [4096]
        assert hits[0].version_hint is Version.V2

    def test_absent(self):
        assert find_magic(b"\x12\x34" * 1024) == []

    def test_text_mention_is_unknown(self):
        dump = b"<html><body>the MINIFS file system</body></html>"
        hits = find_magic(dump)
        assert len(hits) == 1
        assert hits[0].version_hint is Version.UNKNOWN

    def test_back_to_back_magics_all_reported(self):
        dump = b"MINIFSMINIFS"
        assert [h.offset for h in find_magic(dump)] == [0, 6]

    @settings(max_examples=30, deadline=None)
    @given(
        filler=st.binary(min_size=0, max_size=2000),
        positions=st.lists(st.integers(min_value=0, max_value=2000), max_size=3),
    )
    def test_matches_naive_oracle(self, filler, positions):
        dump = bytearray(filler)
        for pos in positions:
            if pos + 6 <= len(dump):
                dump[pos:pos + 6] = b"MINIFS"
        dump = bytes(dump)
        assert [h.offset for h in find_magic(dump)] == naive_find(dump)


class TestDumpReport:
    def test_five_region_dump(self):
        # padding | high-entropy blob | image | padding | config text
        rng = random.Random(99)
        image = build_three_file_image()
        image_region = image + b"\xff" * (2048 - len(image) % 1024 if len(image) % 1024 else 0)
        regions = [
            b"\xff" * 4096,
            bytes(rng.randrange(256) for _ in range(4096)),
            image_region,
            b"\xff" * 4096,
            b"wlan0.channel=6\nwlan0.power=20\n" * 66,
        ]
        dump = b"".join(regions)
        report = dump_report(dump)
        labels = [s.label for s in report.sections]
        assert labels == ["empty", "high", "low", "empty", "low"]
        assert report.sections[2].minifs is not None
        assert report.sections[2].minifs.base == 8192
        assert report.sections[2].minifs.version is Version.V2
        assert [s.minifs is None for s in report.sections] == [True, True, False, True, True]

    def test_bare_image(self):
        report = dump_report(build_three_file_image())
        assert len(report.sections) == 1
        assert report.sections[0].minifs is not None
        assert report.instances[0].file_count == 3

    def test_pure_text_has_no_annotation(self):
        report = dump_report(b"set option value\n" * 300)
        assert all(s.minifs is None for s in report.sections)
        assert all(s.label == "low" for s in report.sections)
        assert report.instances == []

    def test_empty_dump(self):
        report = dump_report(b"")
        assert report.sections == []
        assert report.hits == []

    def test_machine_rendering_is_stable(self):
        dump = b"\xff" * 2048 + build_three_file_image()
        assert dump_report(dump).to_machine() == dump_report(dump).to_machine()

    def test_unparseable_hit_reported_but_not_annotated(self):
        dump = b"\x00" * 512 + b"MINIFS then nothing sensible" + b"\x00" * 512
        report = dump_report(dump)
        assert len(report.hits) == 1
        assert report.instances == []
