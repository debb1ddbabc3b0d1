import argparse
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from app.commands import analysis, attacks, corpus, evaluate, keys, watermark
from app.commands.common import EXIT_IO, EXIT_PARAMETER
from app.utils.exceptions import DegenerateKeystreamError, FileAccessError, ParameterError
from app.utils.logger import get_logger

logger = get_logger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fractal-wm",
        description="Storage-free semi-fragile watermarking with keyed fractal curves.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    # 各指令群組
    keys.register(subparsers)
    watermark.register(subparsers)
    attacks.register(subparsers)
    evaluate.register(subparsers)
    corpus.register(subparsers)
    analysis.register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ParameterError, ValidationError, DegenerateKeystreamError, ValueError) as e:
        logger.debug(f"Command {args.command} rejected its input", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARAMETER
    except (FileAccessError, OSError) as e:
        logger.debug(f"Command {args.command} hit an I/O error", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except Exception as e:
        logger.error(f"Error running {args.command}: {e}", exc_info=True)
        raise


if __name__ == "__main__":
    sys.exit(main())
