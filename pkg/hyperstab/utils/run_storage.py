"""JSON run manifests (<out>/manifest.json) and config loading."""

import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path

from hyperstab import __version__

MANIFEST_NAME = "manifest.json"
SUMMARY_NAME = "summary.json"


class RunStorage:
    """Read/write helpers for run directories."""

    @staticmethod
    def canonical_json(data: dict) -> str:
        return json.dumps(data, sort_keys=True, separators=(",", ":"), default=str)

    @staticmethod
    def content_hash(resolved_config: dict) -> str:
        """sha256 of the canonical resolved config; a manifest replay hashes identically."""
        return hashlib.sha256(RunStorage.canonical_json(resolved_config).encode("utf-8")).hexdigest()

    @staticmethod
    def load_config(path: str | Path) -> dict:
        """Load a JSON config; a manifest is accepted and its resolved config used."""
        path = Path(path)
        data = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise ValueError(f"{path}: top-level JSON value must be an object")
        if "resolved_config" in data:
            data = data["resolved_config"]
        return data

    @staticmethod
    def write_manifest(
        out_dir: str | Path,
        command: str,
        resolved_config: dict,
        inputs_hash: str,
        status: int,
        outputs: list[str],
        certified: bool | None = None,
    ) -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        data = {
            "version": 1,
            "tool_version": __version__,
            "command": command,
            "resolved_config": resolved_config,
            "inputs_sha256": inputs_hash,
            "certified": certified,
            "exit_status": status,
            "outputs": sorted(outputs),
            "created_at": datetime.now(timezone.utc).isoformat(),
        }
        path = out_dir / MANIFEST_NAME
        path.write_text(json.dumps(data, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
        return path

    @staticmethod
    def load_manifest(out_dir: str | Path) -> dict | None:
        path = Path(out_dir) / MANIFEST_NAME
        if not path.exists():
            return None
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError:
            return None
