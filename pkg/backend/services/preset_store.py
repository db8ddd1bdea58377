from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List

import yaml

from ..models import CurveSpec

logger = logging.getLogger(__name__)

SPEC_SUFFIXES = (".json", ".yaml", ".yml")


def load_spec(path: Path) -> CurveSpec:
    """Read a curve spec from a JSON or YAML file."""
    with path.open("r", encoding="utf-8") as handle:
        if path.suffix.lower() in (".yaml", ".yml"):
            payload = yaml.safe_load(handle)
        else:
            payload = json.load(handle)
    if not isinstance(payload, dict):
        raise ValueError(f"{path} must contain a single curve spec object.")
    return CurveSpec(**payload)


@dataclass
class PresetRecord:
    name: str
    spec: CurveSpec
    source_path: str


class PresetStore:
    def __init__(self, presets_dir: Path):
        self.presets_dir = presets_dir
        self.records: Dict[str, PresetRecord] = {}
        self.reload()

    def reload(self) -> None:
        self.records.clear()
        if not self.presets_dir.exists():
            return
        for path in sorted(self.presets_dir.iterdir()):
            if path.suffix.lower() not in SPEC_SUFFIXES:
                continue
            spec = load_spec(path)
            name = spec.name or path.stem
            if name in self.records:
                logger.warning("preset %s in %s shadows %s", name, path, self.records[name].source_path)
            self.records[name] = PresetRecord(name=name, spec=spec, source_path=str(path))
        logger.info("loaded %d presets from %s", len(self.records), self.presets_dir)

    def get(self, name: str) -> CurveSpec:
        record = self.records.get(name)
        if record is None:
            known = ", ".join(sorted(self.records)) or "none"
            raise KeyError(f"unknown preset {name!r} (known: {known})")
        return record.spec

    def list_presets(self) -> List[dict]:
        return [
            {
                "name": record.name,
                "kind": record.spec.kind,
                "description": record.spec.description,
                "source_path": record.source_path,
            }
            for record in self.records.values()
        ]
