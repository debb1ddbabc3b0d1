import numpy as np
import pytest

from app.utils import hash_utils, image_utils, patch_utils, plot_utils
from app.utils.exceptions import FileAccessError, ParameterError


@pytest.mark.parametrize("side, n", [(64, 1), (128, 2), (256, 3), (8192, 8)])
def test_order_for_side(side, n):
    assert patch_utils.order_for_side(side) == n


@pytest.mark.parametrize("side", [32, 300, 96, 0, 16384])
def test_order_for_side_rejects(side):
    with pytest.raises(ParameterError):
        patch_utils.order_for_side(side)


def test_patches_round_trip():
    plane = np.arange(128 * 128, dtype=np.float64).reshape(128, 128)
    patches = patch_utils.to_patches(plane)
    assert patches.shape == (4, 4, 32, 32)
    rows, cols = patch_utils.patch_slice(2, 1)
    assert np.array_equal(patches[1, 2], plane[rows, cols])
    assert np.array_equal(patch_utils.from_patches(patches), plane)


def test_rectangle_patches():
    rect = patch_utils.patch_rectangle(1, 2, 3, 2)
    assert rect == (32, 64, 96, 64)
    assert patch_utils.rectangle_patches(rect) == {(1, 2), (2, 2), (3, 2), (1, 3), (2, 3), (3, 3)}
    patch_utils.check_patch_rectangle(rect, 256)
    with pytest.raises(ParameterError):
        patch_utils.check_patch_rectangle(rect, 64)


def test_patch_mask_is_row_major():
    mask = patch_utils.patch_mask({(3, 0)}, 2)
    assert mask[0, 3] and mask.sum() == 1
    with pytest.raises(ParameterError):
        patch_utils.patch_mask({(4, 0)}, 2)


def test_ensure_rgb():
    with pytest.raises(ParameterError):
        image_utils.ensure_rgb(np.zeros((8, 8), dtype=np.uint8))
    with pytest.raises(ParameterError):
        image_utils.ensure_rgb(np.zeros((8, 8, 3), dtype=np.float32))


def test_luminance_of_grey_is_the_grey_level():
    grey = np.full((4, 4, 3), 77, dtype=np.uint8)
    assert np.allclose(image_utils.luminance(grey), 77.0)


def test_save_and_load_are_lossless(tmp_path, corpus):
    path = str(tmp_path / "nested" / "img.png")
    image_utils.save_image(corpus["img03.png"], path)
    assert np.array_equal(image_utils.load_image(path), corpus["img03.png"])


def test_load_image_errors(tmp_path):
    with pytest.raises(FileAccessError):
        image_utils.load_image(str(tmp_path / "nope.png"))


def test_load_corpus_is_sorted_and_filtered(tmp_path):
    for name in ("b.png", "a.png"):
        image_utils.save_image(np.zeros((64, 64, 3), dtype=np.uint8), str(tmp_path / name))
    (tmp_path / "notes.txt").write_text("skip me")
    assert list(image_utils.load_corpus(str(tmp_path))) == ["a.png", "b.png"]
    with pytest.raises(FileAccessError):
        image_utils.load_corpus(str(tmp_path / "missing"))


def test_center_crop_resize_takes_the_middle():
    img = np.zeros((64, 128, 3), dtype=np.uint8)
    img[:, 32:96] = 200
    out = image_utils.center_crop_resize(img, 64)
    assert out.shape == (64, 64, 3)
    assert (out == 200).all()


def test_pixel_digest():
    a = np.zeros((4, 8, 3), dtype=np.uint8)
    b = np.zeros((8, 4, 3), dtype=np.uint8)
    assert hash_utils.pixel_digest(a) == hash_utils.pixel_digest(a.copy())
    assert hash_utils.pixel_digest(a) != hash_utils.pixel_digest(b)
    assert len(hash_utils.text_digest("key")) == 64


def test_colorize_grid_scales_to_patches():
    grid = np.array([[0.0, 1.0], [0.5, 0.25]])
    img = plot_utils.colorize_grid(grid)
    assert img.shape == (64, 64, 3)
    assert img[40, 10].tolist() == img[63, 31].tolist()
    assert img[0, 32].tolist() == [255, 255, 255]


def test_blend():
    base = np.zeros((2, 2, 3), dtype=np.uint8)
    layer = np.full((2, 2, 3), 255, dtype=np.uint8)
    assert (plot_utils.blend(base, layer) == 128).all()
    with pytest.raises(ParameterError):
        plot_utils.blend(base, np.zeros((3, 3, 3), dtype=np.uint8))
