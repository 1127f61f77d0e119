import shutil
import subprocess

import pytest


@pytest.fixture(scope="session")
def ptfc_cli():
    exe = shutil.which("ptfc")
    if exe is None:
        pytest.skip("the ptfc command is not on PATH")
    return exe


@pytest.fixture(scope="session")
def fig1_file(ptfc_cli, tmp_path_factory):
    out = tmp_path_factory.mktemp("fixture")
    subprocess.run(
        [ptfc_cli, "fixture-fig1", "--out", str(out)],
        check=True,
        capture_output=True,
    )
    path = out / "fig1_tan.json"
    assert path.is_file()
    return path
