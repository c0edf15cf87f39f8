"""Deterministic file emission for scenario runs (CSV, JSON, optional SVG)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

__all__ = ["RunReport", "write_csv", "write_json", "write_report", "svg_plot"]

FLOAT_FMT = "%.12g"


@dataclass
class RunReport:
    """Everything needed to reproduce and audit one scenario run."""

    scenario: str
    config: dict
    seed: int
    shots: int
    metrics: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)   # (name, passed, detail)
    artifacts: list = field(default_factory=list)
    wall_clock_s: float = 0.0

    @property
    def all_checks_passed(self) -> bool:
        return all(passed for _, passed, _ in self.checks)

    def add_check(self, name: str, passed: bool, detail: str) -> None:
        self.checks.append((name, bool(passed), detail))

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "config": self.config,
            "seed": self.seed,
            "shots": self.shots,
            "metrics": _jsonable(self.metrics),
            "checks": [{"name": n, "passed": p, "detail": d}
                       for n, p, d in self.checks],
            "artifacts": sorted(self.artifacts),
            "wall_clock_s": round(self.wall_clock_s, 3),
        }


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _fmt(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return FLOAT_FMT % value
    return str(value)


def write_csv(path: Path, header: Sequence[str],
              rows: Iterable[Sequence[Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_json(path: Path, payload: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def write_report(out_dir: Path, report: RunReport) -> Path:
    """Emit report.json with artifact paths relative to the run directory."""
    rel = []
    for item in report.artifacts:
        p = Path(item)
        try:
            rel.append(str(p.relative_to(out_dir)))
        except ValueError:
            rel.append(str(p))
    report.artifacts = rel
    return write_json(out_dir / "report.json", report.to_dict())


def svg_plot(path: Path, kind: str, data: dict) -> Path:
    """Minimal SVG emission (line | heatmap | bars); dates stripped so output
    is byte-stable for identical inputs."""
    import matplotlib
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "phononlab"  # deterministic ids
    import matplotlib.pyplot as plt

    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    if kind == "line":
        for label, (x, y) in data["series"].items():
            ax.plot(np.asarray(x), np.asarray(y), label=label)
        ax.legend(fontsize=8)
    elif kind == "heatmap":
        ax.imshow(np.asarray(data["z"]), aspect="auto", origin="lower",
                  extent=data.get("extent"))
    elif kind == "bars":
        z = np.asarray(data["z"])
        ax.imshow(z, aspect="equal", origin="upper", cmap="viridis")
    else:
        plt.close(fig)
        raise ValueError(f"unknown plot kind {kind!r}")
    ax.set_xlabel(data.get("xlabel", ""))
    ax.set_ylabel(data.get("ylabel", ""))
    ax.set_title(data.get("title", ""))
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
