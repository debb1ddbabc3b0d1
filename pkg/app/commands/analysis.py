import argparse

import numpy as np

from app.commands.common import EXIT_REAL
from app.services import chaotic_keystream
from app.services.chaotic_keystream import A_RANGE
from app.utils import plot_utils
from app.utils.exceptions import ParameterError


def cmd_bifurcation(args: argparse.Namespace) -> int:
    if not 0.0 < args.a_min < args.a_max < 4.0:
        raise ParameterError(f"need 0 < a-min < a-max < 4, got [{args.a_min}, {args.a_max}]")
    if args.steps < 2:
        raise ParameterError(f"steps must be at least 2, got {args.steps}")

    a_values = np.linspace(args.a_min, args.a_max, args.steps, endpoint=False)
    samples = chaotic_keystream.bifurcation(a_values, x0=args.x0, k=args.k, count=args.count)
    plot_utils.save_bifurcation_plot(a_values, samples, args.out, safe_low=A_RANGE[0])
    print(f"wrote bifurcation diagram over a in [{args.a_min:g}, {args.a_max:g}) to {args.out}")

    for a in args.lyapunov or []:
        if not 0.0 < a < 4.0:
            raise ParameterError(f"lyapunov a must lie in (0, 4), got {a}")
        lam = chaotic_keystream.lyapunov_exponent(a, x0=args.x0, k=args.k)
        state = "chaotic" if lam > 0 else "periodic"
        print(f"a={a:.6f} lyapunov={lam:+.4f} {state}")
    return EXIT_REAL


def register(subparsers) -> None:
    p = subparsers.add_parser("bifurcation", help="plot the logistic map's bifurcation diagram")
    p.add_argument("--out", required=True, help="PNG to write")
    p.add_argument("--a-min", type=float, default=3.0)
    p.add_argument("--a-max", type=float, default=3.9999)
    p.add_argument("--steps", type=int, default=800, help="number of map parameters sampled")
    p.add_argument("--x0", type=float, default=0.1)
    p.add_argument("--k", type=int, default=100, help="transient iterations dropped")
    p.add_argument("--count", type=int, default=200, help="iterates kept per parameter")
    p.add_argument("--lyapunov", type=float, nargs="*", help="also print the Lyapunov exponent at these a")
    p.set_defaults(handler=cmd_bifurcation)
