"""Run manifests: a JSON note written next to every command's outputs."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional

from . import __version__

MANIFEST_NAME = "manifest.json"


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def params_digest(params: dict, inputs=()) -> str:
    """Stable digest of canonical parameters plus the content of every input file."""
    h = hashlib.sha256(json.dumps(params, sort_keys=True, default=str).encode("utf-8"))
    for p in sorted(str(x) for x in inputs):
        h.update(file_sha256(p).encode("ascii"))
    return h.hexdigest()


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    command: str
    config_digest: str
    seed: Optional[int]
    inputs: List[str] = field(default_factory=list)
    outputs: List[str] = field(default_factory=list)
    tool_version: str = __version__
    started: str = field(default_factory=now_iso)
    finished: Optional[str] = None
    parameters: Dict = field(default_factory=dict)

    def write(self, out_dir, name: str = MANIFEST_NAME) -> Path:
        if self.finished is None:
            self.finished = now_iso()
        path = Path(out_dir) / name
        path.write_text(json.dumps(asdict(self), indent=2, default=str) + "\n", encoding="utf-8")
        return path


def read_manifest(path) -> RunManifest:
    return RunManifest(**json.loads(Path(path).read_text(encoding="utf-8")))
