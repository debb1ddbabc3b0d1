import argparse
import math

from app.commands.common import (
    EXIT_FAKE,
    EXIT_REAL,
    add_embed_options,
    add_key_option,
    embed_config,
    parse_rect,
    resolve_key,
)
from app.config import DEFAULT_TAU
from app.services import detection, embedder, evaluation, watermark
from app.services.detection import Label
from app.services.evaluation import EvaluationRow
from app.utils import hash_utils, image_utils, patch_utils
from app.utils.exceptions import ParameterError
from app.utils.logger import get_logger

logger = get_logger(__name__)

# attack column of reports written by verify
VERIFY_LABEL = "verify"


def _load_for_key(path: str, n: int):
    img = image_utils.load_image(path)
    h, w = img.shape[:2]
    if h != w:
        raise ParameterError(f"{path} is {w}x{h}, images must be square")
    side_order = patch_utils.order_for_side(w)
    if side_order != n:
        raise ParameterError(f"{path} is {w}x{w} (order {side_order}) but the key has order {n}")
    return img


def cmd_embed(args: argparse.Namespace) -> int:
    key = resolve_key(args)
    cfg = embed_config(args)
    img = _load_for_key(args.input, key.n)

    planes = watermark.to_channelwise(watermark.generate(key))
    marked = embedder.embed(img, planes, cfg)
    image_utils.save_image(marked, args.output)

    psnr = embedder.psnr(img, marked)
    psnr_text = "identical" if math.isinf(psnr) else f"{psnr:.2f} dB"
    print(f"psnr: {psnr_text}")
    print(f"ssim: {embedder.ssim(img, marked):.4f}")
    print(f"pixels_sha256: {hash_utils.pixel_digest(marked)}")
    logger.info(f"Embedded {args.input} -> {args.output}")
    return EXIT_REAL


def cmd_verify(args: argparse.Namespace) -> int:
    key = resolve_key(args)
    cfg = embed_config(args)
    img = _load_for_key(args.input, key.n)

    expected = watermark.generate(key)
    report = detection.compare(expected, embedder.extract(img, key.n, cfg))
    verdict = detection.decide(report, args.tau)
    mask = detection.localization_map(report)

    print(f"bit_rate: {report.bit_rate:.6f}")
    print(f"patch_rate: {report.patch_rate:.6f}")
    print(f"tampered_patches: {len(mask.tampered())}")

    if args.truth_rect is not None:
        patch_utils.check_patch_rectangle(args.truth_rect, img.shape[0])
        cropped = patch_utils.rectangle_patches(args.truth_rect)
        print(f"cropping_correctness: {detection.cropping_correctness(report, cropped):.6f}")
        if args.overlay:
            image_utils.save_image(detection.render_crop_overlay(img, report, cropped), args.overlay)
    elif args.overlay:
        image_utils.save_image(detection.render_overlay(img, mask), args.overlay)

    if args.csv:
        row = EvaluationRow(
            image=args.input,
            attack=VERIFY_LABEL,
            bit_rate=report.bit_rate,
            patch_rate=report.patch_rate,
            verdict=verdict.label,
            tampered=mask.to_bitstring(),
        )
        evaluation.write_csv([row], args.csv)

    print(f"verdict: {verdict.label.value} (tau={verdict.tau:g})")
    return EXIT_REAL if verdict.label is Label.REAL else EXIT_FAKE


def register(subparsers) -> None:
    p = subparsers.add_parser("embed", help="embed the key's watermark into a PNG")
    p.add_argument("input")
    p.add_argument("output")
    add_key_option(p)
    add_embed_options(p)
    p.set_defaults(handler=cmd_embed)

    p = subparsers.add_parser("verify", help="check an image against the key (exit 0 real, 1 fake)")
    p.add_argument("input")
    add_key_option(p)
    add_embed_options(p)
    p.add_argument("--tau", type=float, default=DEFAULT_TAU, help="patch-wise rate needed for Real")
    p.add_argument("--overlay", default=None, help="write the localization overlay PNG here")
    p.add_argument("--csv", default=None, help="write the report row here")
    p.add_argument(
        "--truth-rect",
        type=parse_rect,
        default=None,
        help="known cropped rectangle x,y,w,h; reports cropping correctness and colours the overlay",
    )
    p.set_defaults(handler=cmd_verify)
