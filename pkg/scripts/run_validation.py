"""Run every oracle suite and print the reports; exits nonzero on any failed check."""

import argparse
import sys

from toric_dlocc.validation import DEFAULT_SEED, SUITES, run_suite


def run(seed: int) -> int:
    ok = True
    for name in SUITES:
        rep = run_suite(name, seed=seed)
        sys.stdout.write(rep.render() + "\n")
        ok &= rep.passed
    return 0 if ok else 2


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sys.exit(run(ap.parse_args().seed))
