import argparse

from app.commands.common import EXIT_REAL, parse_rect
from app.config import (
    DEFAULT_BLUR_KERNEL,
    DEFAULT_BLUR_SIGMA,
    DEFAULT_JPEG_QUALITY,
    DEFAULT_NOISE_SIGMA,
    DEFAULT_PERTURB_STRENGTH,
    DEFAULT_RESIZE_SCALE,
)
from app.services import attacks
from app.services.attacks import AttackName, AttackSpec
from app.utils import image_utils
from app.utils.logger import get_logger

logger = get_logger(__name__)


def spec_from_args(args: argparse.Namespace) -> AttackSpec:
    donor = image_utils.load_image(args.donor) if args.donor else None
    return AttackSpec(
        name=AttackName(args.name),
        quality=args.quality,
        sigma=args.sigma,
        kernel=args.kernel,
        blur_sigma=args.blur_sigma,
        scale=args.scale,
        rect=args.rect,
        fill=args.fill,
        donor=donor,
        strength=args.strength,
        seed=args.seed,
    )


def cmd_attack(args: argparse.Namespace) -> int:
    img = image_utils.load_image(args.input)
    spec = spec_from_args(args)
    out = attacks.apply(img, spec)
    image_utils.save_image(out, args.output)

    truth = sorted(attacks.tampered_patches(spec), key=lambda c: (c[1], c[0]))
    print(f"attack: {spec.label()} {spec.params()}".rstrip())
    if truth:
        print("tampered: " + " ".join(f"{px},{py}" for px, py in truth))
    return EXIT_REAL


def register(subparsers) -> None:
    p = subparsers.add_parser("attack", help="apply one benign operation or tamper proxy to an image")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--name", choices=[a.value for a in AttackName], required=True)
    p.add_argument("--quality", type=int, default=DEFAULT_JPEG_QUALITY, help="JPEG quality 1-100")
    p.add_argument("--sigma", type=float, default=DEFAULT_NOISE_SIGMA, help="noise std as a fraction of 255")
    p.add_argument("--kernel", type=int, default=DEFAULT_BLUR_KERNEL, help="odd blur / median kernel size")
    p.add_argument("--blur-sigma", type=float, default=DEFAULT_BLUR_SIGMA)
    p.add_argument("--scale", type=float, default=DEFAULT_RESIZE_SCALE, help="down-scale factor before restoring")
    p.add_argument("--rect", type=parse_rect, default=None, help="x,y,w,h in pixels, multiples of 32")
    p.add_argument("--fill", type=int, default=0, help="crop fill value")
    p.add_argument("--donor", default=None, help="donor image for splice")
    p.add_argument("--strength", type=float, default=DEFAULT_PERTURB_STRENGTH)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_attack)
