"""Run every verification suite and write one JSON report per suite.

    python3 scripts/run_all_suites.py --n 4 --out reports/
"""

import argparse
import json
import pathlib
import sys

from fermifuse.suites import SUITES, run_suite


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--trials", type=int, default=10)
    parser.add_argument("--out", type=pathlib.Path, default=pathlib.Path("reports"))
    args = parser.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    ok = True
    for name in SUITES:
        report = run_suite(name, args.n, args.seed, trials=args.trials)
        path = args.out / f"{name}-n{args.n}.json"
        path.write_text(json.dumps(report.to_json(timing=True), indent=2, sort_keys=True) + "\n")
        status = "PASS" if report.passed else "FAIL"
        print(f"{status} {name:<17} max residual {report.max_residual():.2e}  {report.wall_time_ms / 1000:6.1f}s")
        ok &= report.passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
