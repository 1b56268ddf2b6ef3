#!/usr/bin/env python3
"""Sample a radius-r hull and render it to SVG (plus JSON for re-export).

Usage: python3 scripts/render_ball.py --alpha 2/3 --r 2 --seed 7 \
           --out ball.svg
"""

import argparse
import sys
from fractions import Fraction

from hptri.planar_map import dump_json, to_svg, validate
from hptri.sampler import build_ball


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", default="2/3")
    ap.add_argument("--r", type=int, default=2)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--schedule", default="leftmost_near_root")
    ap.add_argument("--max-jump", type=int, default=10 ** 4)
    ap.add_argument("--max-patch", type=int, default=10 ** 4)
    ap.add_argument("--out", default="ball.svg")
    ap.add_argument("--json", default=None)
    args = ap.parse_args(argv)
    alpha = Fraction(args.alpha) if "/" in args.alpha else float(args.alpha)
    mp = build_ball(alpha, args.r, args.seed, schedule=args.schedule,
                    max_jump=args.max_jump, max_patch=args.max_patch)
    rep = validate(mp)
    v, e, f = mp.counts()
    print("vertices=%d edges=%d faces=%d valid=%s" % (v, e, f, rep.ok))
    with open(args.out, "w") as fh:
        fh.write(to_svg(mp))
    print("wrote %s" % args.out)
    if args.json:
        dump_json(mp, args.json)
        print("wrote %s" % args.json)
    return 0 if rep.ok else 1


if __name__ == "__main__":
    sys.exit(main())
