"""Verification report records and deterministic serialization.

Reports are reproducible byte for byte across runs with the same config:
iteration order is fixed, every tolerance is echoed next to its check, and
the only wall-clock content is an isolated `generated_at` field that is
excluded from the config hash.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Mapping, Sequence


@dataclass
class CheckResult:
    name: str
    max_gap: float
    mean_gap: float
    tol: float
    passed: bool
    points_evaluated: int
    points_skipped: int = 0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "max_gap": float(self.max_gap),
            "mean_gap": float(self.mean_gap),
            "tol": float(self.tol),
            "pass": bool(self.passed),
            "points_evaluated": int(self.points_evaluated),
            "points_skipped": int(self.points_skipped),
        }


def make_check(name: str, gaps: Sequence[float], tol: float,
               points_skipped: int = 0) -> CheckResult:
    """Aggregate pointwise gaps into a pass/fail record against `tol`."""
    gaps = [float(g) for g in gaps]
    if not gaps:
        return CheckResult(name, 0.0, 0.0, float(tol), False, 0, points_skipped)
    mx = max(gaps)
    mean = sum(gaps) / len(gaps)
    return CheckResult(name, mx, mean, float(tol), mx <= tol, len(gaps), points_skipped)


@dataclass
class VerificationReport:
    checks: list[CheckResult]
    config_hash: str
    seed: int
    extras: dict = field(default_factory=dict)

    @property
    def overall_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self, timestamp: str | None = None) -> dict:
        out: dict = {
            "checks": [c.to_dict() for c in self.checks],
            "config_hash": self.config_hash,
            "seed": int(self.seed),
        }
        if self.extras:
            out["extras"] = {k: _plain(v) for k, v in sorted(self.extras.items())}
        out["overall_pass"] = self.overall_pass
        out["generated_at"] = timestamp or datetime.now(timezone.utc).isoformat()
        return out

    def render_json(self, timestamp: str | None = None) -> str:
        return json.dumps(self.to_dict(timestamp), indent=2) + "\n"


def _plain(v):
    if isinstance(v, bool):
        return v
    if isinstance(v, (int,)):
        return int(v)
    if isinstance(v, float):
        # keep the emitted JSON standard-compliant
        return float(v) if math.isfinite(v) else repr(v)
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return str(v)


def config_digest(config: Mapping) -> str:
    """sha256 of the canonical key=value rendering of a config mapping."""
    lines = [f"{k}={config[k]!r}" for k in sorted(config)]
    return hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Plot-data CSV: header names the sampled variable and each emitted field."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)
