import argparse
from typing import Tuple

from app.config import get_settings
from app.services import key_service
from app.services.embedder import EmbedConfig
from app.services.watermark import WatermarkKey
from app.utils.exceptions import ParameterError

# exit codes
EXIT_REAL = 0
EXIT_FAKE = 1
EXIT_PARAMETER = 2
EXIT_IO = 3


def add_key_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--key", default=None, help="key file (default: $FRACTAL_WM_KEY)")


def add_embed_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--delta", type=float, default=None, help="QIM step size")


def add_workers_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--workers", type=int, default=None, help="parallel images (default: $FRACTAL_WM_WORKERS)")


def resolve_key(args: argparse.Namespace) -> WatermarkKey:
    return key_service.load_key(args.key or get_settings().key_path)


def embed_config(args: argparse.Namespace) -> EmbedConfig:
    if args.delta is None:
        return EmbedConfig()
    return EmbedConfig(delta=args.delta)


def resolve_workers(args: argparse.Namespace) -> int:
    if args.workers is None:
        return get_settings().workers
    if args.workers < 1:
        raise ParameterError(f"--workers must be at least 1, got {args.workers}")
    return args.workers


def parse_rect(text: str) -> Tuple[int, int, int, int]:
    """'x,y,w,h' in pixels."""
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"expected x,y,w,h, got {text!r}")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers in x,y,w,h, got {text!r}")
