"""Census of unlabelled MAG equivalence classes with checkpointed shards.

    python3 scripts/run_census.py -n 6 --connected --out runs/census6
"""

import argparse
import json
import logging
import sys

from magset.census import census_report


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-n", type=int, required=True)
    ap.add_argument("--connected", action="store_true")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", required=True, help="output and checkpoint directory")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    rep = census_report(args.n, args.connected, args.jobs, resume=args.out, log=logging.info)
    path = rep.write(args.out)
    summary = rep.counts()
    summary["non_combinatorial_graphs"] = [str(r.graph) for r in rep.non_combinatorial()]
    summary["imperfect_graphs"] = [str(r.graph) for r in rep.failures()]
    print(json.dumps(summary, indent=2))
    logging.info("wrote %s", path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
