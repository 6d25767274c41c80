"""Tabulate exact second moments for every sigma up to a given length and size.

    python3 scripts/wick_table.py --max-len 3 --max-abs 3 --signed
"""

import argparse
import itertools
import sys

from ubmfield.experiments import ResultTable
from ubmfield.wick import wick_second_moment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-len", type=int, default=2)
    ap.add_argument("--max-abs", type=int, default=5)
    ap.add_argument("--signed", action="store_true", help="include negative exponents")
    args = ap.parse_args()

    vals = [s for s in range(-args.max_abs, args.max_abs + 1) if s and (args.signed or s > 0)]
    table = ResultTable(("sigma", "polynomial", "n_min", "value_at_n_min"), metadata={"max_len": args.max_len, "max_abs": args.max_abs})
    for j in range(1, args.max_len + 1):
        for sigma in itertools.product(vals, repeat=j):
            p = wick_second_moment(sigma)
            table.add(" ".join(map(str, sigma)), p.expression(), p.n_min, p(p.n_min))
    sys.stdout.write(table.to_csv())


if __name__ == "__main__":
    main()
