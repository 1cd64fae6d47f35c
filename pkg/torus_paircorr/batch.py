#!/usr/bin/env python3
"""Run many CLI invocations as concurrent subprocesses."""

import asyncio
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from .core import ValidationError

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 3600.0


@dataclass(frozen=True)
class BatchRun:
    run_id: str
    args: List[str]


@dataclass
class RunOutcome:
    run_id: str
    args: List[str]
    returncode: int
    stdout: str = ""
    stderr_lines: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.returncode == 0

    def to_dict(self) -> Dict[str, Any]:
        return {"id": self.run_id, "args": self.args, "returncode": self.returncode}


def parse_manifest(text: str, source: str = "<manifest>") -> List[BatchRun]:
    """A JSON list whose entries are argument lists or {"id": ..., "args": [...]}."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"invalid JSON: {e.msg}", e.lineno, source)
    if not isinstance(data, list):
        raise ValidationError("the manifest must be a JSON list", None, source)
    runs = []
    for k, entry in enumerate(data):
        if isinstance(entry, dict):
            run_id, args = str(entry.get("id", k)), entry.get("args")
        else:
            run_id, args = str(k), entry
        if not isinstance(args, list) or not all(isinstance(a, str) for a in args):
            raise ValidationError(f"entry {k} must be a list of string arguments", None, source)
        runs.append(BatchRun(run_id, args))
    ids = [r.run_id for r in runs]
    if len(set(ids)) != len(ids):
        raise ValidationError("run ids must be unique", None, source)
    return runs


def read_manifest(path: Union[str, Path]) -> List[BatchRun]:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ValidationError(f"cannot read manifest: {e.strerror}", None, str(path))
    return parse_manifest(text, str(path))


class BatchRunner:
    def __init__(self, command: Optional[List[str]] = None, jobs: int = 1,
                 timeout: float = DEFAULT_TIMEOUT, env: Optional[Dict[str, str]] = None):
        self.command = command or [sys.executable, "-m", "torus_paircorr"]
        self.jobs = max(1, jobs)
        self.timeout = timeout
        self.env = env

    async def _read_stderr(self, run_id: str, stream: asyncio.StreamReader) -> List[str]:
        """Forward child stderr through our logger"""
        lines = []
        while True:
            line = await stream.readline()
            if not line:
                break
            msg = line.decode('utf-8').rstrip()
            if msg:
                lines.append(msg)
                logger.info(f"Run {run_id}: {msg}")
        return lines

    async def run_one(self, run: BatchRun) -> RunOutcome:
        argv = self.command + run.args
        logger.info(f"Starting run {run.run_id}: {' '.join(run.args)}")
        process = await asyncio.create_subprocess_exec(
            *argv,
            stdout=asyncio.subprocess.PIPE,
            stderr=asyncio.subprocess.PIPE,
            env=self.env,
        )
        stderr_task = asyncio.ensure_future(self._read_stderr(run.run_id, process.stderr))
        try:
            stdout = await asyncio.wait_for(process.stdout.read(), timeout=self.timeout)
            await asyncio.wait_for(process.wait(), timeout=self.timeout)
        except asyncio.TimeoutError:
            logger.error(f"Run {run.run_id} timed out after {self.timeout}s")
            await self._stop(process)
            stderr_task.cancel()
            return RunOutcome(run.run_id, run.args, -1, "", [f"timed out after {self.timeout}s"])
        stderr_lines = await stderr_task
        if process.returncode == 0:
            logger.info(f"✅ Run {run.run_id} finished")
        else:
            logger.warning(f"Run {run.run_id} exited with {process.returncode}")
        return RunOutcome(run.run_id, run.args, process.returncode,
                          stdout.decode('utf-8'), stderr_lines)

    async def _stop(self, process: asyncio.subprocess.Process) -> None:
        process.terminate()
        try:
            await asyncio.wait_for(process.wait(), timeout=5.0)
        except asyncio.TimeoutError:
            process.kill()
            await process.wait()

    async def run_all(self, runs: List[BatchRun]) -> List[RunOutcome]:
        """Run every entry, at most ``jobs`` at a time; outcomes keep manifest order."""
        gate = asyncio.Semaphore(self.jobs)

        async def gated(run: BatchRun) -> RunOutcome:
            async with gate:
                return await self.run_one(run)

        return list(await asyncio.gather(*(gated(r) for r in runs)))

    def run(self, runs: List[BatchRun]) -> List[RunOutcome]:
        return asyncio.run(self.run_all(runs))
