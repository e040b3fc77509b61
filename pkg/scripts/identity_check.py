import os
import sys

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.services.experiment_service import identity_suite  # noqa: E402


def main():
    trials = int(os.getenv("TRIALS", "100"))
    seed = int(os.getenv("SEED", "0"))
    report = identity_suite(np.random.default_rng(seed), trials)
    failed = False
    for name, row in report.items():
        print({name: row})
        failed = failed or row["violations"] > 0
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
