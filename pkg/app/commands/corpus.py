import argparse
import os

from app.commands.common import EXIT_REAL
from app.config import MAX_ORDER, MIN_ORDER, PATCH_SIZE
from app.utils import image_utils
from app.utils.exceptions import ParameterError
from app.utils.logger import get_logger

logger = get_logger(__name__)


def cmd_preprocess(args: argparse.Namespace) -> int:
    if not MIN_ORDER <= args.n <= MAX_ORDER:
        raise ParameterError(f"order must lie in [{MIN_ORDER}, {MAX_ORDER}], got {args.n}")
    side = PATCH_SIZE << args.n

    images = image_utils.load_corpus(args.input_dir)
    if not images:
        raise ParameterError(f"no images found in {args.input_dir}")

    for name, img in images.items():
        stem, _ = os.path.splitext(name)
        image_utils.save_image(image_utils.center_crop_resize(img, side), os.path.join(args.output_dir, stem + ".png"))
    logger.info(f"Preprocessed {len(images)} images to {side}x{side}")
    print(f"wrote {len(images)} images of {side}x{side} to {args.output_dir}")
    return EXIT_REAL


def register(subparsers) -> None:
    p = subparsers.add_parser("preprocess", help="center-crop and resize a directory to 32*2^n square PNGs")
    p.add_argument("input_dir")
    p.add_argument("output_dir")
    p.add_argument("--n", type=int, default=3, help="target order; side is 32 * 2^n")
    p.set_defaults(handler=cmd_preprocess)
