import subprocess
import sys

import pytest

CURVEFIELD = [sys.executable, "-m", "curvefield.cli"]


def run_curvefield(args):
    """The primary toolkit is consumed strictly through its CLI."""
    result = subprocess.run(CURVEFIELD + list(args), capture_output=True, text=True)
    return result


@pytest.fixture(scope="session")
def curvefield_cli():
    return run_curvefield


@pytest.fixture(scope="session")
def tube_dataset(tmp_path_factory):
    """One synthetic tube volume (synth) + ground truth (gt), both produced
    by the primary CLI."""
    root = tmp_path_factory.mktemp("tube")
    result = run_curvefield([
        "synth", "--kind", "arc", "--radius", "12", "--angle", "150",
        "--grid", "32,32,32", "--spacing", "2,2,2", "--origin", "0,0,0",
        "--tube-radius", "6", "--falloff", "4",
        "--emit", "curve,volume",
        "--out-prefix", str(root / "tube"),
    ])
    assert result.returncode == 0, result.stderr
    result = run_curvefield([
        "gt", "--curve", str(root / "tube.curve.json"),
        "--grid", "32,32,32", "--spacing", "2,2,2", "--origin", "0,0,0",
        "--rc", "10", "--emit", "field,closeness",
        "--out-prefix", str(root / "tube"),
    ])
    assert result.returncode == 0, result.stderr
    return {
        "volume": root / "tube.volume",
        "field": root / "tube.field",
        "closeness": root / "tube.closeness",
        "curve": root / "tube.curve.json",
        "dir": root,
    }
