import math

import numpy as np
import pytest
from scipy.fft import idctn

from app.config import DEFAULT_COEFF_SLOTS, DEFAULT_DELTA, PATCH_SIZE
from app.services import attacks, detection, embedder, watermark
from app.services.embedder import EmbedConfig, SoftRecovery
from app.utils import image_utils, patch_utils
from app.utils.exceptions import ParameterError


def _slot_pattern(slot, amplitude):
    spectrum = np.zeros((PATCH_SIZE, PATCH_SIZE))
    spectrum[slot] = amplitude
    return idctn(spectrum, norm="ortho")


def test_qim_quantize_lands_on_lattice_parity():
    coeffs = np.array([0.0, 13.0, -57.0, 101.0])
    zeros = embedder.qim_quantize(coeffs, np.zeros(4), 40.0)
    ones = embedder.qim_quantize(coeffs, np.ones(4), 40.0)
    assert (np.mod(zeros / 40.0, 2) == 0).all()
    assert (np.mod(ones / 40.0, 2) == 1).all()
    assert embedder.qim_confidence(zeros, 40.0) == pytest.approx(np.zeros(4))
    assert embedder.qim_confidence(ones, 40.0) == pytest.approx(np.ones(4))


def test_qim_confidence_midpoint_decodes_as_one():
    recovery = SoftRecovery(embedder.qim_confidence(np.full((4, 1, 1), 20.0), 40.0))
    assert recovery.confidence[0, 0, 0] == pytest.approx(0.5)
    assert recovery.hard_bits.ravel().tolist() == [1, 1, 1, 1]


def test_identity_round_trip_is_exact(corpus, base_matrix, watermarked_corpus):
    for name in corpus:
        report = detection.compare(base_matrix, embedder.extract(watermarked_corpus[name], 3))
        assert report.bit_rate == 1.0, name
        assert report.patch_rate == 1.0, name


def test_embedding_is_deterministic(corpus, base_matrix, watermarked_corpus):
    img = corpus["img03.png"]
    again = embedder.embed(img, watermark.to_channelwise(base_matrix))
    assert np.array_equal(again, watermarked_corpus["img03.png"])


def test_embedding_leaves_chroma_alone(corpus, watermarked_corpus):
    before = corpus["img01.png"].astype(np.int16)
    after = watermarked_corpus["img01.png"].astype(np.int16)
    assert np.array_equal(after[..., 0] - after[..., 1], before[..., 0] - before[..., 1])
    assert np.array_equal(after[..., 2] - after[..., 1], before[..., 2] - before[..., 1])


def test_visual_quality_floor(corpus, watermarked_corpus):
    psnrs = [embedder.psnr(corpus[n], watermarked_corpus[n]) for n in corpus]
    ssims = [embedder.ssim(corpus[n], watermarked_corpus[n]) for n in corpus]
    assert np.mean(psnrs) >= 35.0
    assert np.mean(ssims) >= 0.95


def test_psnr_and_ssim_of_identical_images(corpus):
    img = corpus["img00.png"]
    assert math.isinf(embedder.psnr(img, img))
    assert embedder.ssim(img, img) == pytest.approx(1.0)


def test_psnr_of_unit_offset(corpus):
    img = corpus["img00.png"]
    # corpus pixels stay below 236, so +1 never wraps; MSE is exactly 1
    assert embedder.psnr(img, img + np.uint8(1)) == pytest.approx(20 * math.log10(255), abs=0.01)
    assert embedder.psnr(img, img + np.uint8(1)) == pytest.approx(48.13, abs=0.01)


def test_metrics_reject_mismatched_shapes(corpus):
    img = corpus["img00.png"]
    with pytest.raises(ParameterError):
        embedder.psnr(img, img[:128, :128])


def test_single_patch_tamper_flags_exactly_that_patch(base_matrix, watermarked_corpus):
    img = watermarked_corpus["img00.png"].astype(np.float64)
    bump = _slot_pattern(DEFAULT_COEFF_SLOTS[0], DEFAULT_DELTA)[:, :, None]
    for py in range(8):
        for px in range(8):
            tampered = img.copy()
            rows, cols = patch_utils.patch_slice(px, py)
            tampered[rows, cols] += bump
            recovered = embedder.extract(image_utils.to_uint8(tampered), 3)
            report = detection.compare(base_matrix, recovered)
            assert detection.localization_map(report).tampered() == {(px, py)}
            assert report.bit_rate == 255 / 256


def test_patches_are_independent(corpus, base_matrix):
    img = corpus["img05.png"]
    planes = watermark.to_channelwise(base_matrix)
    full = embedder.embed(img, planes)
    # embedding a cropped quadrant reproduces the same pixels as embedding the whole frame
    quarter = watermark.ChannelwiseWatermark(planes.planes[:, :4, :4].copy())
    part = embedder.embed(img[:128, :128].copy(), quarter)
    assert np.array_equal(part, full[:128, :128])


def test_wrong_image_size_is_rejected(corpus, base_matrix):
    planes = watermark.to_channelwise(base_matrix)
    with pytest.raises(ParameterError):
        embedder.embed(corpus["img00.png"][:224, :224].copy(), planes)
    with pytest.raises(ParameterError):
        embedder.extract(np.zeros((300, 300, 3), dtype=np.uint8), 3)


def test_non_rgb_input_is_rejected(base_matrix):
    planes = watermark.to_channelwise(base_matrix)
    with pytest.raises(ParameterError):
        embedder.embed(np.zeros((256, 256), dtype=np.uint8), planes)
    with pytest.raises(ParameterError):
        embedder.embed(np.zeros((256, 256, 3), dtype=np.float64), planes)


def test_embed_config_validation():
    with pytest.raises(ValueError):
        EmbedConfig(delta=0)
    with pytest.raises(ValueError):
        EmbedConfig(coeff_slots=((0, 0), (1, 2), (2, 1), (2, 2)))
    with pytest.raises(ValueError):
        EmbedConfig(coeff_slots=((1, 2), (1, 2), (2, 1), (2, 2)))
    with pytest.raises(ValueError):
        EmbedConfig(coeff_slots=((1, 2), (2, 1)))


def test_custom_delta_round_trips(corpus, base_matrix):
    cfg = EmbedConfig(delta=24.0)
    marked = embedder.embed(corpus["img02.png"], watermark.to_channelwise(base_matrix), cfg)
    report = detection.compare(base_matrix, embedder.extract(marked, 3, cfg))
    assert report.patch_rate == 1.0


def test_recovery_falls_as_more_of_each_patch_is_replaced(base_matrix, watermarked_corpus):
    donor = attacks.noise_donor(256, seed=21)
    row_in_patch = np.arange(256) % PATCH_SIZE
    rates = []
    for fraction in (0.0, 0.25, 0.5, 0.75, 1.0):
        rows = row_in_patch < int(PATCH_SIZE * fraction)
        per_image = []
        for marked in watermarked_corpus.values():
            tampered = marked.copy()
            tampered[rows] = donor[rows]
            report = detection.compare(base_matrix, embedder.extract(tampered, base_matrix.n))
            per_image.append(report.patch_rate)
        rates.append(float(np.mean(per_image)))

    assert rates[0] == 1.0
    assert rates[1] < rates[0]
    for before, after in zip(rates, rates[1:]):
        assert after <= before + 0.04
    assert rates[-1] <= 0.2
