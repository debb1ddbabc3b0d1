import argparse

from app.commands.common import EXIT_REAL
from app.services import key_service
from app.services.fractal_curves import CurveKind
from app.utils.logger import get_logger

logger = get_logger(__name__)


def cmd_keygen(args: argparse.Namespace) -> int:
    if args.seed is not None:
        key = key_service.random_key(args.seed, kind=CurveKind(args.kind), n=args.n)
    else:
        key = key_service.make_key(
            kind=CurveKind(args.kind),
            n=args.n,
            r=args.r,
            m=args.m,
            o=args.o,
            x0=args.x0,
            a=args.a,
            k=args.k,
            d=args.d,
        )
    key_service.save_key(key, args.out)
    print(key_service.fingerprint(key))
    return EXIT_REAL


def cmd_fingerprint(args: argparse.Namespace) -> int:
    print(key_service.fingerprint(key_service.load_key(args.key_file)))
    return EXIT_REAL


def register(subparsers) -> None:
    p = subparsers.add_parser("keygen", help="write a key file and print its fingerprint")
    p.add_argument("--out", required=True, help="key file to write")
    p.add_argument("--seed", type=int, default=None, help="sample every parameter from this seed")
    p.add_argument("--kind", choices=[k.value for k in CurveKind], default=CurveKind.HILBERT.value)
    p.add_argument("--n", type=int, default=3, help="curve order (image side 32 * 2^n)")
    p.add_argument("--r", type=int, default=0, help="rotation code 0-3")
    p.add_argument("--m", type=int, default=0, help="mirror code 0-8")
    p.add_argument("--o", type=int, default=0, help="order modification 0-3 (Hilbert only)")
    p.add_argument("--x0", type=float, default=0.31)
    p.add_argument("--a", type=float, default=3.91)
    p.add_argument("--k", type=int, default=250, help="warm-up iterations")
    p.add_argument("--d", type=int, default=7, help="decimal digit position")
    p.set_defaults(handler=cmd_keygen)

    p = subparsers.add_parser("fingerprint", help="print the SHA-256 fingerprint of a key file")
    p.add_argument("key_file")
    p.set_defaults(handler=cmd_fingerprint)
