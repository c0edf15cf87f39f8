"""Finite-shot sampling and two-qubit readout-error application/correction.

The visibility matrix V maps true outcome probabilities to measured ones,
P_meas = V P_exp, over the joint outcomes (gg, ge, eg, ee) with the first
letter labeling qubit A. Correction inverts the map, P_corr = V^-1 P_meas;
small negative entries from shot noise are preserved by default (downstream
least-squares fits handle them) with simplex projection available opt-in.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .device import ConfigError, DeviceParams, NodeParams

__all__ = [
    "VisibilityMatrix",
    "build_visibility",
    "build_visibility_three_level",
    "sample_shots",
    "apply_visibility",
    "correct",
    "project_to_simplex",
    "TWO_QUBIT_OUTCOMES",
]

TWO_QUBIT_OUTCOMES = ("gg", "ge", "eg", "ee")
THREE_LEVEL_OUTCOMES = tuple(a + b for a in "gef" for b in "gef")


@dataclass(frozen=True)
class VisibilityMatrix:
    """Linear map from expected to measured outcome probability vectors."""

    matrix: np.ndarray
    outcomes: tuple[str, ...]

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        n = len(self.outcomes)
        if m.shape != (n, n):
            raise ConfigError(f"visibility matrix shape {m.shape} != ({n}, {n})")
        if np.any(m < -1e-12) or np.any(m > 1 + 1e-12):
            raise ConfigError("visibility entries must lie in [0, 1]")
        colsum = m.sum(axis=0)
        if np.max(np.abs(colsum - 1.0)) > 1e-6:
            raise ConfigError("visibility columns must sum to 1 within 1e-6")
        object.__setattr__(self, "matrix", m)

    @property
    def condition_number(self) -> float:
        return float(np.linalg.cond(self.matrix))

    @property
    def inverse(self) -> np.ndarray:
        try:
            return np.linalg.inv(self.matrix)
        except np.linalg.LinAlgError as exc:
            raise ConfigError("visibility matrix is singular") from exc

    def to_json(self) -> str:
        return json.dumps({"outcomes": list(self.outcomes),
                           "matrix": self.matrix.tolist()}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "VisibilityMatrix":
        doc = json.loads(text)
        return cls(np.asarray(doc["matrix"], dtype=float), tuple(doc["outcomes"]))

    @classmethod
    def from_measured(cls, matrix: np.ndarray,
                      outcomes: tuple[str, ...] = TWO_QUBIT_OUTCOMES
                      ) -> "VisibilityMatrix":
        """Accept a measured matrix whose columns carry rounding error.

        Published calibration matrices are printed to three digits and their
        columns can miss unit sum by ~1e-3; this renormalizes each column.
        """
        m = np.asarray(matrix, dtype=float)
        colsum = m.sum(axis=0)
        if np.any(np.abs(colsum - 1.0) > 0.05):
            raise ConfigError("measured visibility columns too far from unit sum")
        return cls(m / colsum[None, :], outcomes)

    @classmethod
    def load(cls, path: str | Path) -> "VisibilityMatrix":
        return cls.from_json(Path(path).read_text())

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())


def _single_qubit_confusion(f_g: float, f_e: float) -> np.ndarray:
    for v, name in ((f_g, "g"), (f_e, "e")):
        if not 0.5 < v <= 1.0:
            raise ConfigError(f"readout fidelity for |{name}> must be in (0.5, 1]")
    return np.array([[f_g, 1.0 - f_e],
                     [1.0 - f_g, f_e]])


def build_visibility(node_a: NodeParams | tuple[float, float],
                     node_b: NodeParams | tuple[float, float]) -> VisibilityMatrix:
    """Tensor-product two-qubit visibility from per-qubit readout fidelities.

    Accepts NodeParams or bare (F_g, F_e) pairs. Measured device matrices with
    correlated errors can be loaded from JSON instead via VisibilityMatrix.load.
    """
    def fid(node):
        if isinstance(node, NodeParams):
            return node.readout_fidelity_g, node.readout_fidelity_e
        return node

    va = _single_qubit_confusion(*fid(node_a))
    vb = _single_qubit_confusion(*fid(node_b))
    return VisibilityMatrix(np.kron(va, vb), TWO_QUBIT_OUTCOMES)


def build_visibility_three_level(node_a: NodeParams, node_b: NodeParams
                                 ) -> VisibilityMatrix:
    """9x9 three-outcome extension used for f-state diagnostics.

    Only the diagonal fidelities are published; the misread mass of each
    prepared state is split evenly over the two wrong outcomes.
    """
    def conf(node: NodeParams) -> np.ndarray:
        m = np.zeros((3, 3))
        fids = (node.readout_fidelity_g, node.readout_fidelity_e,
                node.readout_fidelity_f)
        for col, f in enumerate(fids):
            m[col, col] = f
            for row in range(3):
                if row != col:
                    m[row, col] = (1.0 - f) / 2.0
        return m

    return VisibilityMatrix(np.kron(conf(node_a), conf(node_b)),
                            THREE_LEVEL_OUTCOMES)


def default_visibility(device: DeviceParams) -> VisibilityMatrix:
    return build_visibility(device.node_a, device.node_b)


def apply_visibility(v: VisibilityMatrix, p_expected: np.ndarray) -> np.ndarray:
    p = np.asarray(p_expected, dtype=float)
    return v.matrix @ p


def sample_shots(p: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial counts for ``n`` shots of the outcome distribution ``p``."""
    p = np.asarray(p, dtype=float)
    if n < 1:
        raise ValueError("shot count must be >= 1")
    if np.any(p < -1e-9):
        raise ValueError(f"negative probability in {p}")
    total = p.sum()
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"probabilities sum to {total}, not 1")
    p = np.clip(p, 0.0, None)
    return rng.multinomial(n, p / p.sum())


def correct(p_meas: np.ndarray, v: VisibilityMatrix,
            simplex: bool = False) -> np.ndarray:
    """Measurement-corrected probabilities V^-1 P_meas.

    Entries may be slightly negative under shot noise; they are kept unless
    ``simplex`` requests Euclidean projection onto the probability simplex.
    """
    out = v.inverse @ np.asarray(p_meas, dtype=float)
    if simplex:
        out = project_to_simplex(out)
    return out


def project_to_simplex(p: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    p = np.asarray(p, dtype=float)
    u = np.sort(p)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, p.size + 1)
    cond = u - (css - 1.0) / k > 0
    rho = k[cond][-1]
    theta = (css[rho - 1] - 1.0) / rho
    return np.clip(p - theta, 0.0, None)


def write_counts_csv(path: str | Path, labels: np.ndarray,
                     counts: np.ndarray,
                     outcomes: tuple[str, ...] = TWO_QUBIT_OUTCOMES,
                     label_name: str = "tau_s") -> Path:
    """Write a shot-count table (one row per measurement setting)."""
    counts = np.asarray(counts)
    labels = np.asarray(labels)
    if counts.shape != (labels.size, len(outcomes)):
        raise ValueError(f"counts shape {counts.shape} does not match "
                         f"{labels.size} rows x {len(outcomes)} outcomes")
    lines = [",".join([label_name, *outcomes])]
    for lbl, row in zip(labels, counts):
        lines.append(",".join(["%.12g" % lbl, *(str(int(c)) for c in row)]))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path
