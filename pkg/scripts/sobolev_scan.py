"""Expected tensor Sobolev norm of the log characteristic polynomial field.

Default mode: Monte Carlo against the exact expectation at a few n.
--explore: exact values only, over a grid of (s, eps) and n up to 1024, to
see where the norms stay bounded in n and where they keep growing.

    python3 scripts/sobolev_scan.py --n 16,32,64 --seed 1
    python3 scripts/sobolev_scan.py --explore
"""

import argparse
import logging
import pathlib
import warnings

from ubmfield.experiments import ResultTable, SobolevScanConfig, run_sobolev_scan
from ubmfield.sobolev import SobolevIndex, expected_tensor_norm_exact


def explore(args, out):
    ns = [2**p for p in range(2, 11)]
    table = ResultTable(("s", "eps", "valid_regime", "n", "exact", "tail_bound"), metadata={"K": args.K, "T": args.T, "num_times": args.num_times})
    for s in (0.1, 0.3, 0.45):
        for eps in (s / 2, s, s + 0.1, s + 0.3):
            idx = SobolevIndex(s, eps)
            for n in ns:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    e = expected_tensor_norm_exact(n, idx, max(args.K, n), args.T, args.num_times)
                table.add(s, eps, idx.valid_regime, n, e.value, e.tail_bound)
    path = out / "sobolev_explore.csv"
    path.write_text(table.to_csv(), encoding="utf-8")
    logging.info("wrote %s", path)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", default="16,32,64")
    ap.add_argument("--s", type=float, default=0.3)
    ap.add_argument("--eps", type=float, default=0.4)
    ap.add_argument("--K", type=int, default=256)
    ap.add_argument("--T", type=float, default=1.0)
    ap.add_argument("--num-times", type=int, default=512)
    ap.add_argument("--substeps", type=int, default=4)
    ap.add_argument("--reps", type=int, default=64)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--explore", action="store_true")
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    if args.explore:
        explore(args, out)
        return
    if args.seed is None:
        ap.error("--seed is required for the Monte Carlo scan")
    cfg = SobolevScanConfig(
        n=tuple(int(x) for x in args.n.split(",")),
        seed=args.seed,
        s=args.s,
        eps=args.eps,
        K=args.K,
        T=args.T,
        num_times=args.num_times,
        substeps=args.substeps,
        reps=args.reps,
        workers=args.workers,
    )
    table = run_sobolev_scan(cfg)
    path = out / "sobolev_scan.csv"
    path.write_text(table.to_csv(), encoding="utf-8")
    logging.info("%s -> %s", "pass" if table.passed else "FAIL", path)


if __name__ == "__main__":
    main()
