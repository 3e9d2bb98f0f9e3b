"""Shared fixtures: catalog networks, a CLI runner, and the acceptance
summary reporter that prints one verdict line per criterion at the end of
the run."""

import json

import pytest

from issnet.catalog import instantiate
from issnet import cli


@pytest.fixture(scope="session")
def two_cycle():
    return instantiate("uniform-2-cycle")


@pytest.fixture(scope="session")
def chain():
    return instantiate("nonuniform-discrete-chain")


@pytest.fixture(scope="session")
def counterexample():
    return instantiate("counterexample-chain")


@pytest.fixture(scope="session")
def diffusive():
    return instantiate("linear-diffusive-chain")


@pytest.fixture
def run_cli(tmp_path):
    """Invoke the CLI with a dict config; returns (exit_code, out_dir)."""

    counter = {"n": 0}

    def run(command, conf, seed=None, out=None):
        counter["n"] += 1
        cfg = tmp_path / f"conf{counter['n']}.json"
        cfg.write_text(json.dumps(conf))
        out_dir = tmp_path / (out or f"out{counter['n']}")
        argv = [command, "--config", str(cfg), "--out", str(out_dir)]
        if seed is not None:
            argv += ["--seed", str(seed)]
        return cli.main(argv), out_dir

    return run


# Acceptance summary -----------------------------------------------------

_CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record_criterion():
    def record(number: int, ok: bool, detail: str):
        _CRITERIA[number] = (bool(ok), detail)
        assert ok, f"criterion {number}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, detail = _CRITERIA[number]
        verdict = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict} - {detail}")
