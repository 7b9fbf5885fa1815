from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

from eigenfactors.models import RunManifest
from eigenfactors.utils import ensure_dir, read_text, write_json, write_text


class RunStore:
    """Output directory of one pipeline run: artifacts plus ``manifest.json``."""

    def __init__(self, out_dir: Path) -> None:
        self.base_dir = out_dir
        ensure_dir(self.base_dir)

    @property
    def manifest_path(self) -> Path:
        return self.base_dir / "manifest.json"

    def save_manifest(self, manifest: RunManifest) -> None:
        write_json(self.manifest_path, asdict(manifest))

    def save_artifact(self, name: str, content: str) -> Path:
        path = self.base_dir / name
        write_text(path, content)
        return path

    def load_manifest(self) -> RunManifest:
        return RunManifest(**json.loads(read_text(self.manifest_path)))
