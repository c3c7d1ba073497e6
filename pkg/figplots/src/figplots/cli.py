"""One console command per figure: ov-fig1 .. ov-fig4.

Each takes --from (the sweep/figure-dataset directory), --out (defaults
to fig<N>.<format> inside that directory), and --format (png or svg).
Exit codes: 0 rendered, 2 missing/bad input.
"""

import argparse
import sys

from figplots.readers import EmptyData, MissingInput, SchemaMismatch
from figplots.render import FigureJob, render


def _main(which, argv):
    parser = argparse.ArgumentParser(
        prog="ov-fig%d" % which,
        description="Render figure %d from its CSV dataset." % which)
    parser.add_argument("--from", dest="from_dir", required=True,
                        help="directory containing fig%d.csv" % which)
    parser.add_argument("--out", default=None,
                        help="output image path (default: fig%d.<format> "
                             "next to the input)" % which)
    parser.add_argument("--format", choices=("png", "svg"), default="png")
    args = parser.parse_args(argv)
    out = args.out
    if out is None:
        out = "%s/fig%d.%s" % (args.from_dir, which, args.format)
    job = FigureJob(which=which, input_dir=args.from_dir, output_path=out,
                    format=args.format)
    try:
        path = render(job)
    except (MissingInput, SchemaMismatch, EmptyData) as exc:
        print("error: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return 2
    print(path)
    return 0


def main_fig1(argv=None):
    return _main(1, sys.argv[1:] if argv is None else argv)


def main_fig2(argv=None):
    return _main(2, sys.argv[1:] if argv is None else argv)


def main_fig3(argv=None):
    return _main(3, sys.argv[1:] if argv is None else argv)


def main_fig4(argv=None):
    return _main(4, sys.argv[1:] if argv is None else argv)
