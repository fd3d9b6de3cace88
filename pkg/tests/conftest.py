import os
from pathlib import Path

import numpy as np
import pytest

DGS10_ENV = "ARBOUND_DGS10_CSV"
DGS10_DEFAULT = Path(__file__).parent / "data" / "DGS10.csv"


def dgs10_path():
    path = os.environ.get(DGS10_ENV)
    if path:
        return Path(path)
    return DGS10_DEFAULT if DGS10_DEFAULT.exists() else None


@pytest.fixture
def dgs10_csv():
    path = dgs10_path()
    if path is None or not path.exists():
        pytest.skip(f"FRED DGS10 CSV not supplied (set {DGS10_ENV} or add tests/data/DGS10.csv)")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def write_csv(path, rows, header=("date", "value")):
    lines = [",".join(header)] + [",".join(str(c) for c in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")
    return path
