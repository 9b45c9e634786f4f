"""Blocking subprocess helper shared by the external-command wrappers."""

from __future__ import annotations

import shlex
import subprocess
from typing import Sequence

from .errors import DivsatError, SpawnError


def as_argv(command: Sequence[str] | str) -> list[str]:
    if isinstance(command, str):
        return shlex.split(command)
    return list(command)


def run_command(
    argv: Sequence[str],
    *,
    input_text: str | None = None,
    timeout: float = 300.0,
    failure: type[DivsatError],
) -> subprocess.CompletedProcess:
    """Run ``argv`` to completion; any failure maps to ``failure`` (or SpawnError).

    Captures stdout/stderr as text. Non-zero exit raises ``failure`` with a
    tail of stderr; an unlaunchable command raises SpawnError; a timeout
    raises ``failure``.
    """
    try:
        proc = subprocess.run(
            list(argv),
            input=input_text,
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    except (FileNotFoundError, PermissionError) as exc:
        raise SpawnError(f"cannot launch {argv[0]!r}: {exc}") from None
    except subprocess.TimeoutExpired:
        raise failure(f"{argv[0]!r} timed out after {timeout}s") from None
    if proc.returncode != 0:
        tail = (proc.stderr or "").strip().splitlines()[-5:]
        detail = " | ".join(tail) if tail else "no stderr"
        raise failure(f"{argv[0]!r} exited {proc.returncode}: {detail}")
    return proc
