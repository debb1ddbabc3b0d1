import argparse
import math
from typing import List

from app.commands.common import (
    EXIT_REAL,
    add_embed_options,
    add_key_option,
    add_workers_option,
    embed_config,
    resolve_key,
    resolve_workers,
)
from app.config import DEFAULT_TAU, PATCH_SIZE
from app.services import attacks, evaluation
from app.services.attacks import AttackName, AttackSpec
from app.utils import image_utils
from app.utils.exceptions import ParameterError
from app.utils.logger import get_logger

logger = get_logger(__name__)

# names accepted by --attacks
ATTACK_PRESETS = ("identity", "jpeg", "noise", "blur", "median", "resize", "perturb", "crop", "splice")
DEFAULT_PRESETS = "identity,jpeg,noise,blur,median,resize"


def build_attacks(names: List[str], n: int, seed: int, block: int) -> List[AttackSpec]:
    """Attack grid from preset names; crop and splice hit a centered block x block region."""
    grid = 1 << n
    specs = []
    for name in names:
        if name == "identity":
            specs.append(AttackSpec(name=AttackName.IDENTITY))
        elif name == "jpeg":
            specs.append(AttackSpec(name=AttackName.JPEG))
        elif name == "noise":
            specs.append(AttackSpec(name=AttackName.GAUSSIAN_NOISE, seed=seed))
        elif name == "blur":
            specs.append(AttackSpec(name=AttackName.GAUSSIAN_BLUR))
        elif name == "median":
            specs.append(AttackSpec(name=AttackName.MEDIAN_BLUR))
        elif name == "resize":
            specs.append(AttackSpec(name=AttackName.RESIZE))
        elif name == "perturb":
            specs.append(AttackSpec(name=AttackName.GLOBAL_PERTURB, seed=seed))
        elif name == "crop":
            px, py = attacks.central_block(grid, block)
            specs.append(attacks.crop_spec(px, py, block))
        elif name == "splice":
            px, py = attacks.central_block(grid, block)
            donor = attacks.noise_donor(PATCH_SIZE * grid, seed)
            specs.append(attacks.splice_spec(donor, px, py, block))
        else:
            raise ParameterError(f"unknown attack preset {name!r}, choose from {', '.join(ATTACK_PRESETS)}")
    return specs


def _corpus(directory: str):
    originals = image_utils.load_corpus(directory)
    if not originals:
        raise ParameterError(f"no images found in {directory}")
    return originals


def cmd_evaluate(args: argparse.Namespace) -> int:
    key = resolve_key(args)
    cfg = embed_config(args)
    originals = _corpus(args.corpus)
    names = [a.strip() for a in args.attacks.split(",") if a.strip()]
    specs = build_attacks(names, key.n, args.seed, args.block)

    rows = evaluation.evaluate_corpus(originals, key, specs, cfg, tau=args.tau, workers=resolve_workers(args))
    if args.out:
        evaluation.write_csv(rows, args.out)
    print(evaluation.format_summary(evaluation.summarize(rows)))

    if args.quality:
        q = evaluation.visual_quality(originals, key, cfg, workers=resolve_workers(args))
        psnr_text = "identical" if math.isinf(q.psnr) else f"{q.psnr:.2f} dB"
        print(f"visual quality over {q.images} images: psnr {psnr_text}, ssim {q.ssim:.4f}")
    return EXIT_REAL


def cmd_crop_sweep(args: argparse.Namespace) -> int:
    key = resolve_key(args)
    originals = _corpus(args.corpus)
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    rows = evaluation.crop_sweep(
        originals, key, sizes, embed_config(args), seed=args.seed, workers=resolve_workers(args)
    )
    print(evaluation.format_crop_sweep(rows))
    return EXIT_REAL


def cmd_heatmap(args: argparse.Namespace) -> int:
    rows = [row for path in args.reports for row in evaluation.read_csv(path)]
    if args.attack:
        rows = [row for row in rows if row.attack == args.attack]
    if not rows:
        raise ParameterError("no report rows to aggregate")

    reference = image_utils.load_image(args.reference) if args.reference else None
    image = evaluation.heatmap_image([row.to_report() for row in rows], reference)
    image_utils.save_image(image, args.out)
    print(f"aggregated {len(rows)} reports into {args.out}")
    return EXIT_REAL


def register(subparsers) -> None:
    p = subparsers.add_parser("evaluate", help="run the attack grid over a corpus directory")
    p.add_argument("corpus", help="directory of 32*2^n square images")
    add_key_option(p)
    add_embed_options(p)
    add_workers_option(p)
    p.add_argument("--attacks", default=DEFAULT_PRESETS, help=f"comma-separated from {', '.join(ATTACK_PRESETS)}")
    p.add_argument("--block", type=int, default=4, help="patch block size for crop / splice presets")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tau", type=float, default=DEFAULT_TAU)
    p.add_argument("--out", default=None, help="CSV report path")
    p.add_argument("--quality", action="store_true", help="also print mean PSNR / SSIM")
    p.set_defaults(handler=cmd_evaluate)

    p = subparsers.add_parser("crop-sweep", help="recovery and localization against crops of growing size")
    p.add_argument("corpus")
    add_key_option(p)
    add_embed_options(p)
    add_workers_option(p)
    p.add_argument("--sizes", default="1,2,3,4,5")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_crop_sweep)

    p = subparsers.add_parser("heatmap", help="cumulative localization heatmap from report CSVs")
    p.add_argument("reports", nargs="+")
    p.add_argument("--out", required=True, help="PNG to write")
    p.add_argument("--attack", default=None, help="only rows of this attack label")
    p.add_argument("--reference", default=None, help="blend the heatmap over this image")
    p.set_defaults(handler=cmd_heatmap)
