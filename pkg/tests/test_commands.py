import json
import os

import numpy as np
import pytest

from app.main import main
from app.services import attacks, chaotic_keystream, evaluation, key_service
from app.utils import hash_utils, image_utils


@pytest.fixture
def marked_png(tmp_path, corpus, watermarked_corpus):
    path = str(tmp_path / "marked.png")
    image_utils.save_image(watermarked_corpus["img00.png"], path)
    return path


def test_keygen_explicit_parameters(tmp_path, capsys, base_key):
    out = str(tmp_path / "k.json")
    code = main(["keygen", "--out", out, "--r", "1", "--m", "4", "--o", "2", "--x0", "0.31", "--a", "3.91", "--k", "250", "--d", "7"])
    assert code == 0
    assert key_service.load_key(out) == base_key
    assert capsys.readouterr().out.strip() == key_service.fingerprint(base_key)


def test_keygen_rejects_upper_bound_of_a(tmp_path, capsys):
    code = main(["keygen", "--out", str(tmp_path / "k.json"), "--a", "4.0"])
    assert code == 2
    assert "error" in capsys.readouterr().err
    assert not os.path.exists(tmp_path / "k.json")


def test_keygen_same_seed_same_file(tmp_path):
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    assert main(["keygen", "--out", a, "--seed", "12"]) == 0
    assert main(["keygen", "--out", b, "--seed", "12"]) == 0
    assert open(a, encoding="utf-8").read() == open(b, encoding="utf-8").read()


def test_fingerprint_command(key_file, base_key, capsys):
    assert main(["fingerprint", key_file]) == 0
    assert capsys.readouterr().out.strip() == key_service.fingerprint(base_key)


def test_embed_then_verify(tmp_path, capsys, key_file, corpus_dir):
    src = os.path.join(corpus_dir, "img00.png")
    out = str(tmp_path / "out.png")
    assert main(["embed", src, out, "--key", key_file]) == 0
    printed = capsys.readouterr().out
    psnr = float(printed.split("psnr:")[1].split("dB")[0])
    assert psnr >= 32.0
    assert f"pixels_sha256: {hash_utils.pixel_digest(image_utils.load_image(out))}" in printed

    assert main(["verify", out, "--key", key_file]) == 0
    printed = capsys.readouterr().out
    assert "patch_rate: 1.000000" in printed
    assert "verdict: Real" in printed


def test_embed_uses_key_from_environment(tmp_path, monkeypatch, key_file, corpus_dir):
    monkeypatch.setenv("FRACTAL_WM_KEY", key_file)
    out = str(tmp_path / "env.png")
    assert main(["embed", os.path.join(corpus_dir, "img01.png"), out]) == 0
    assert main(["verify", out]) == 0


def test_degenerate_keystream_is_parameter_error(tmp_path, monkeypatch, key_file, corpus_dir):
    monkeypatch.setattr(chaotic_keystream, "_iterate", lambda x, a, steps: 0.55)
    out = str(tmp_path / "degenerate.png")
    assert main(["embed", os.path.join(corpus_dir, "img00.png"), out, "--key", key_file]) == 2
    assert not os.path.exists(out)


def test_embed_rejects_bad_size(tmp_path, key_file):
    src = str(tmp_path / "odd.png")
    image_utils.save_image(np.full((300, 300, 3), 128, dtype=np.uint8), src)
    assert main(["embed", src, str(tmp_path / "o.png"), "--key", key_file]) == 2


def test_embed_rejects_order_mismatch(tmp_path, key_file):
    src = str(tmp_path / "small.png")
    image_utils.save_image(np.full((128, 128, 3), 128, dtype=np.uint8), src)
    assert main(["embed", src, str(tmp_path / "o.png"), "--key", key_file]) == 2


def test_unreadable_image_is_io_error(tmp_path, key_file):
    missing = str(tmp_path / "missing.png")
    assert main(["embed", missing, str(tmp_path / "o.png"), "--key", key_file]) == 3
    garbage = tmp_path / "garbage.png"
    garbage.write_bytes(b"not an image")
    assert main(["verify", str(garbage), "--key", key_file]) == 3


def test_missing_key_is_parameter_error(tmp_path, monkeypatch, marked_png):
    monkeypatch.delenv("FRACTAL_WM_KEY", raising=False)
    assert main(["verify", marked_png]) == 2


def test_verify_plain_image_is_fake(tmp_path, capsys, key_file, corpus_dir):
    overlay = str(tmp_path / "overlay.png")
    code = main(["verify", os.path.join(corpus_dir, "img02.png"), "--key", key_file, "--overlay", overlay])
    assert code == 1
    assert "verdict: Fake" in capsys.readouterr().out
    assert image_utils.load_image(overlay).shape == (256, 256, 3)


def test_verify_after_splice_flags_the_block(tmp_path, capsys, key_file, marked_png):
    donor = str(tmp_path / "donor.png")
    image_utils.save_image(attacks.noise_donor(256, seed=8), donor)
    spliced = str(tmp_path / "spliced.png")
    assert main(["attack", marked_png, spliced, "--name", "splice", "--rect", "96,96,96,96", "--donor", donor]) == 0
    assert "tampered: 3,3 4,3 5,3 3,4 4,4 5,4 3,5 4,5 5,5" in capsys.readouterr().out

    report_csv = str(tmp_path / "verify.csv")
    code = main(["verify", spliced, "--key", key_file, "--tau", "0.95", "--csv", report_csv])
    assert code == 1
    row = evaluation.read_csv(report_csv)[0]
    assert row.attack == "verify"
    assert row.image == spliced
    flagged = {(i % 8, i // 8) for i, c in enumerate(row.tampered) if c == "1"}
    assert flagged <= {(px, py) for px in (3, 4, 5) for py in (3, 4, 5)}
    assert len(flagged) >= 6


def test_verify_with_crop_truth(tmp_path, capsys, key_file, marked_png):
    cropped = str(tmp_path / "cropped.png")
    assert main(["attack", marked_png, cropped, "--name", "crop_patches", "--rect", "0,0,32,32"]) == 0
    capsys.readouterr()
    overlay = str(tmp_path / "crop_overlay.png")
    code = main(["verify", cropped, "--key", key_file, "--truth-rect", "0,0,32,32", "--overlay", overlay])
    assert code == 0
    out = capsys.readouterr().out
    # entry (0, 0) of the base watermark is 5, so the black patch is caught
    assert "cropping_correctness: 1.000000" in out
    assert image_utils.load_image(overlay)[:32, :32].tolist() == np.full((32, 32, 3), [0, 128, 0]).tolist()


def test_attack_jpeg_keeps_size(tmp_path, capsys, marked_png):
    out = str(tmp_path / "j.png")
    assert main(["attack", marked_png, out, "--name", "jpeg", "--quality", "70"]) == 0
    assert "jpeg70" in capsys.readouterr().out
    assert image_utils.load_image(out).shape == (256, 256, 3)


def test_attack_rejects_bad_parameters(tmp_path, marked_png):
    out = str(tmp_path / "x.png")
    assert main(["attack", marked_png, out, "--name", "gaussian_blur", "--kernel", "4"]) == 2
    assert main(["attack", marked_png, out, "--name", "crop_patches"]) == 2
    assert main(["attack", marked_png, out, "--name", "crop_patches", "--rect", "10,0,32,32"]) == 2


def test_evaluate_writes_csv_and_summary(tmp_path, capsys, key_file, corpus_dir):
    report = str(tmp_path / "report.csv")
    code = main(["evaluate", corpus_dir, "--key", key_file, "--attacks", "identity,jpeg,splice", "--out", report, "--workers", "2"])
    assert code == 0
    out = capsys.readouterr().out
    assert "identity" in out and "splice4x4" in out

    rows = evaluation.read_csv(report)
    assert len(rows) == 4 * 3
    identity = [r for r in rows if r.attack == "identity"]
    assert all(r.patch_rate == 1.0 and r.verdict.value == "Real" for r in identity)

    again = str(tmp_path / "again.csv")
    assert main(["evaluate", corpus_dir, "--key", key_file, "--attacks", "identity,jpeg,splice", "--out", again]) == 0
    assert open(report, "rb").read() == open(again, "rb").read()


def test_evaluate_empty_corpus(tmp_path, key_file):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["evaluate", str(empty), "--key", key_file]) == 2


def test_evaluate_unknown_preset(key_file, corpus_dir):
    assert main(["evaluate", corpus_dir, "--key", key_file, "--attacks", "identity,rotate"]) == 2


def test_evaluate_with_quality(capsys, key_file, corpus_dir):
    assert main(["evaluate", corpus_dir, "--key", key_file, "--attacks", "identity", "--quality"]) == 0
    assert "visual quality over 4 images" in capsys.readouterr().out


def test_crop_sweep_command(capsys, key_file, corpus_dir):
    assert main(["crop-sweep", corpus_dir, "--key", key_file, "--sizes", "1,3"]) == 0
    out = capsys.readouterr().out
    assert "1x1" in out and "3x3" in out


def test_heatmap_command(tmp_path, key_file, corpus_dir, capsys):
    report = str(tmp_path / "splice.csv")
    assert main(["evaluate", corpus_dir, "--key", key_file, "--attacks", "splice", "--out", report]) == 0
    heatmap = str(tmp_path / "heat.png")
    reference = os.path.join(corpus_dir, "img00.png")
    assert main(["heatmap", report, "--out", heatmap, "--reference", reference]) == 0
    assert image_utils.load_image(heatmap).shape == (256, 256, 3)
    assert main(["heatmap", report, "--out", heatmap, "--attack", "jpeg80"]) == 2


def test_preprocess(tmp_path, capsys):
    raw = tmp_path / "raw"
    raw.mkdir()
    image_utils.save_image(np.full((300, 400, 3), 90, dtype=np.uint8), str(raw / "wide.jpg"))
    image_utils.save_image(np.full((64, 50, 3), 200, dtype=np.uint8), str(raw / "tall.png"))
    out_dir = tmp_path / "prepared"
    assert main(["preprocess", str(raw), str(out_dir), "--n", "2"]) == 0
    assert sorted(os.listdir(out_dir)) == ["tall.png", "wide.png"]
    assert image_utils.load_image(str(out_dir / "wide.png")).shape == (128, 128, 3)
    assert main(["preprocess", str(tmp_path / "nowhere"), str(out_dir)]) == 3


def test_bifurcation_command(tmp_path, capsys):
    out = str(tmp_path / "bif.png")
    assert main(["bifurcation", "--out", out, "--steps", "60", "--count", "40", "--lyapunov", "3.835", "3.91"]) == 0
    text = capsys.readouterr().out
    assert "a=3.835000" in text and "periodic" in text
    assert "a=3.910000" in text and "chaotic" in text
    assert os.path.getsize(out) > 0
    assert main(["bifurcation", "--out", out, "--a-min", "3.9", "--a-max", "3.8"]) == 2


def test_key_file_is_json(key_file):
    data = json.loads(open(key_file, encoding="utf-8").read())
    assert set(data) == {"schema_version", "kind", "n", "r", "m", "o", "x0", "a", "k", "d"}


def test_unknown_command_exits_with_usage():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
