from __future__ import annotations

import os
from pathlib import Path
from typing import Optional

import yaml
from pydantic import BaseModel, Field, ValidationError

ROOT = Path(__file__).resolve().parent.parent
KNOWLEDGE_ENV = "CURVJET_KNOWLEDGE_DIR"


class Settings(BaseModel):
    max_order: int = Field(default=8, ge=1, le=8)
    tolerance_base: float = Field(default=1e-7, gt=0.0)
    tolerance_zero: float = Field(default=1e-8, gt=0.0)
    fd_accuracy: int = 4
    fd_richardson: int = Field(default=1, ge=0, le=2)
    fd_step_low: float = Field(default=1e-3, gt=0.0)
    fd_step_high: float = Field(default=1e-2, gt=0.0)
    significant_digits: int = Field(default=17, ge=1, le=17)

    def tolerance(self, order: int) -> float:
        """Mixed-error tolerance for a derivative of the given order."""
        if order == 0:
            return self.tolerance_zero
        return self.tolerance_base * 10.0 ** (order - 1)


def knowledge_dir() -> Path:
    return Path(os.getenv(KNOWLEDGE_ENV, str(ROOT / "knowledge")))


def load_settings(path: Optional[Path] = None) -> Settings:
    path = path or knowledge_dir() / "settings.yaml"
    if not path.exists():
        return Settings()
    with path.open("r", encoding="utf-8") as handle:
        try:
            data = yaml.safe_load(handle) or {}
        except yaml.YAMLError as exc:
            raise ValueError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError(f"{path} must contain a mapping of settings.")
    try:
        settings = Settings(**data)
    except ValidationError as exc:
        raise ValueError(f"{path}: {exc}") from exc
    if settings.fd_accuracy not in (2, 4, 6):
        raise ValueError(f"{path}: fd_accuracy must be 2, 4 or 6")
    return settings
