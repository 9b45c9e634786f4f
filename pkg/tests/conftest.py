"""Shared fixtures: path setup, CLI runner, stub subprocess scripts."""

import json
import os
import subprocess
import sys
import textwrap
from pathlib import Path

import pytest

SRC = Path(__file__).resolve().parent.parent / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))


def _child_env(extra=None):
    env = dict(os.environ)
    env["PYTHONPATH"] = str(SRC) + os.pathsep + env.get("PYTHONPATH", "")
    env.pop("DIVSAT_SEED", None)
    if extra:
        env.update(extra)
    return env


@pytest.fixture
def run_cli():
    """Run the installed CLI in a subprocess and return (code, stdout, stderr)."""

    def _run(*args, stdin=None, env=None, timeout=120):
        proc = subprocess.run(
            [sys.executable, "-m", "divsat", *[str(a) for a in args]],
            input=stdin,
            capture_output=True,
            text=True,
            timeout=timeout,
            env=_child_env(env),
        )
        return proc.returncode, proc.stdout, proc.stderr

    return _run


@pytest.fixture
def stub_script(tmp_path):
    """Write an executable python stub and return the argv list to invoke it."""

    counter = {"n": 0}

    def _make(body, name=None):
        counter["n"] += 1
        path = tmp_path / (name or f"stub{counter['n']}.py")
        path.write_text(textwrap.dedent(body))
        return [sys.executable, str(path)]

    return _make


@pytest.fixture
def write_jsonl(tmp_path):
    def _write(name, rows):
        path = tmp_path / name
        with path.open("w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")
        return path

    return _write
