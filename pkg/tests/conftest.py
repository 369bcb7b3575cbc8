import pytest

from minifskit import open_view

from helpers import build_three_file_image


@pytest.fixture
def three_file_image() -> bytes:
    return build_three_file_image()


@pytest.fixture
def three_file_view(three_file_image):
    return open_view(three_file_image)
