"""Document and verify the external tabular datasets.

The housing and concrete-strength tables are not redistributed with this
package; download them yourself from the sources below (or any mirror),
convert to headed CSV, and pass them to the harness via
``--benchmark csv --data-file ... --target-column ...``.

Running this script checks any files you already placed under data/ and
prints their sha256 so experiment metadata can pin the exact version used.
"""

import hashlib
import sys
from pathlib import Path

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

SOURCES = {
    "housing.csv": (
        "UCI ML repository, Boston housing (506 rows, 13 features; "
        "target: medv or nox)",
        "https://archive.ics.uci.edu/ml/machine-learning-databases/housing/",
    ),
    "concrete.csv": (
        "UCI ML repository, Concrete Compressive Strength "
        "(1030 rows, 8 features; target: compressive strength)",
        "https://archive.ics.uci.edu/ml/datasets/concrete+compressive+strength",
    ),
}


def main() -> int:
    DATA_DIR.mkdir(exist_ok=True)
    missing = []
    for name, (description, url) in SOURCES.items():
        path = DATA_DIR / name
        if path.exists():
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            print(f"{name}: present, sha256={digest}")
        else:
            missing.append((name, description, url))
    for name, description, url in missing:
        print(f"{name}: MISSING - {description}")
        print(f"    source: {url}")
        print(f"    place the headed CSV at {DATA_DIR / name}")
    return 0 if not missing else 1


if __name__ == "__main__":
    sys.exit(main())
