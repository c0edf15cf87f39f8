"""Joint Wigner tomography of the two mechanical resonators.

Pipeline: a displacement grid probes the joint resonator state; after each
displacement the qubits exchange with their resonators for a swept interaction
time and the joint qubit populations are recorded. Fitting the time traces
against per-phonon-number oscillations yields the diagonal of each displaced
state, and the state itself is recovered by convex inversion (projected
gradient descent constrained to Hermitian, positive semi-definite, unit-trace
matrices, with optional zero padding above a phonon cutoff).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import nnls

from .device import DeviceParams, NodeParams, PulseDefaults
from .hilbert import displacement_operator
from .readout import VisibilityMatrix, apply_visibility, correct, sample_shots

__all__ = [
    "IdentifiabilityError",
    "DisplacementGrid",
    "make_grid",
    "displaced_density",
    "TraceSet",
    "model_traces",
    "simulate_trace_measurement",
    "JointPopulations",
    "fit_populations",
    "TomographyDataset",
    "reconstruct",
    "ReconstructionInfo",
    "fidelity",
    "bootstrap",
    "BootstrapResult",
    "bell_target",
    "noon_target",
    "calibrate_displacement",
    "CalibrationCurve",
]


class IdentifiabilityError(ValueError):
    """The measurement set cannot determine the requested parameters."""


# ---------------------------------------------------------------------------
# Displacement grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DisplacementGrid:
    """Ordered list of joint displacement amplitudes (alpha_A, alpha_B)."""

    points: tuple[tuple[complex, complex], ...]
    style: str = "custom"

    def __post_init__(self):
        seen = set()
        for a, b in self.points:
            key = (round(a.real, 12), round(a.imag, 12),
                   round(b.real, 12), round(b.imag, 12))
            if key in seen:
                raise ValueError(f"duplicate grid point ({a}, {b})")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.points)


def _phase_circle(mag_a: float, mag_b: float, n: int) -> list[tuple[complex, complex]]:
    phases = np.exp(2j * np.pi * np.arange(n) / n)
    return [(mag_a * pa, mag_b * pb) for pa in phases for pb in phases]


def make_grid(style: str) -> DisplacementGrid:
    """Displacement grids used for the Bell and N00N analyses.

    Bell: 15-phase circles at |alpha_A| = 0.35, |alpha_B| = 0.26 (225 points).
    N00N: 6-phase circles at 0.3 plus 15-phase circles at 0.5 (261 points).
    Phase convention: k = 0 on the positive real axis, counterclockwise.
    """
    style = style.lower()
    if style == "bell":
        return DisplacementGrid(tuple(_phase_circle(0.35, 0.26, 15)), "bell")
    if style == "noon":
        pts = _phase_circle(0.3, 0.3, 6) + _phase_circle(0.5, 0.5, 15)
        return DisplacementGrid(tuple(pts), "noon")
    raise ValueError(f"unknown grid style {style!r}")


# ---------------------------------------------------------------------------
# Displaced states
# ---------------------------------------------------------------------------

def displaced_density(rho_m: np.ndarray, alpha_a: complex, alpha_b: complex,
                      dims: tuple[int, int] | None = None) -> np.ndarray:
    """Apply D_A(-alpha_A) D_B(-alpha_B) rho D_A(alpha_A) D_B(alpha_B)."""
    n = rho_m.shape[0]
    if dims is None:
        d = int(round(np.sqrt(n)))
        if d * d != n:
            raise ValueError("cannot infer per-mode dims; pass dims explicitly")
        dims = (d, d)
    da, db = dims
    if da * db != n:
        raise ValueError(f"dims {dims} inconsistent with matrix size {n}")
    m = np.kron(displacement_operator(-alpha_a, da),
                displacement_operator(-alpha_b, db))
    out = m @ rho_m @ m.conj().T
    diag = np.real(np.diag(out)).reshape(da, db)
    top = max(diag[-1, :].sum(), diag[:, -1].sum())
    if top > 1e-3:
        warnings.warn(
            f"displaced state has top-Fock population {top:.2e}; "
            "truncation may bias the tomography model", stacklevel=2)
    return out


# ---------------------------------------------------------------------------
# Readout-trace model
# ---------------------------------------------------------------------------

TRACE_OUTCOMES = ("gg", "ge", "eg", "ee")


@dataclass(frozen=True)
class TraceSet:
    """Joint qubit probabilities versus readout interaction time."""

    taus: np.ndarray                  # (T,)
    probabilities: np.ndarray         # (T, 4) ordered gg, ge, eg, ee
    shots: int | None = None

    def __post_init__(self):
        taus = np.asarray(self.taus, dtype=float)
        probs = np.asarray(self.probabilities, dtype=float)
        if probs.shape != (taus.size, 4):
            raise ValueError(f"probabilities shape {probs.shape} != ({taus.size}, 4)")
        sums = probs.sum(axis=1)
        if np.max(np.abs(sums - 1.0)) > 1e-6:
            raise ValueError("joint probabilities must sum to 1 within 1e-6")
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "probabilities", probs)


def effective_readout_coupling(node: NodeParams, rise: float) -> float:
    """Oscillation-rate coupling of the readout swap, lambda * g_ge (Hz)."""
    return 0.25 / (node.swap_duration - rise)


def _window_time(taus: np.ndarray, rise: float) -> np.ndarray:
    """Integrated coupler amplitude of a window of duration tau (trapezoid)."""
    taus = np.asarray(taus, dtype=float)
    w = np.where(taus >= 2 * rise, taus - rise, taus ** 2 / (4.0 * rise))
    return np.where(taus <= 0, 0.0, w)


def _excitation_curves(node: NodeParams, taus: np.ndarray, n_levels: int,
                       rise: float, decay: float) -> np.ndarray:
    """q_n(tau): probability the qubit is excited after interaction tau,
    given n phonons. q_0 = 0; oscillation at 2 g_eff sqrt(n) with the
    window-shape correction and an exponential envelope."""
    g_eff = effective_readout_coupling(node, rise)
    w = _window_time(taus, rise)
    n = np.arange(n_levels)
    phases = 2.0 * np.pi * 2.0 * g_eff * np.sqrt(n)[None, :] * w[:, None]
    env = np.exp(-taus / decay)[:, None]
    q = 0.5 * (1.0 - env * np.cos(phases))
    q[:, 0] = 0.0
    return q


def model_traces(populations: np.ndarray, device: DeviceParams,
                 taus: Sequence[float],
                 decay: tuple[float, float] | None = None,
                 rise: float | None = None) -> TraceSet:
    """Forward model of the joint readout traces for given phonon populations.

    ``populations`` is the joint distribution P[n, m] (node A index first).
    Joint outcomes assume the two readout interactions are independent; the
    envelope decay constants default to the swap-context qubit lifetimes.
    """
    p = np.asarray(populations, dtype=float)
    taus = np.asarray(taus, dtype=float)
    rise = PulseDefaults().coupler_rise if rise is None else rise
    if decay is None:
        decay = (device.node_a.t1_e_during_swap, device.node_b.t1_e_during_swap)
    qa = _excitation_curves(device.node_a, taus, p.shape[0], rise, decay[0])
    qb = _excitation_curves(device.node_b, taus, p.shape[1], rise, decay[1])
    pa_g, pa_e = 1.0 - qa, qa
    pb_g, pb_e = 1.0 - qb, qb
    probs = np.stack([
        np.einsum("tn,nm,tm->t", pa_g, p, pb_g),
        np.einsum("tn,nm,tm->t", pa_g, p, pb_e),
        np.einsum("tn,nm,tm->t", pa_e, p, pb_g),
        np.einsum("tn,nm,tm->t", pa_e, p, pb_e),
    ], axis=1)
    # Guard against tiny negative/overshoot from non-normalized input.
    total = p.sum()
    probs = probs + (1.0 - total) * np.array([1.0, 0.0, 0.0, 0.0])[None, :]
    return TraceSet(taus, probs)


def simulate_trace_measurement(
    populations: np.ndarray,
    device: DeviceParams,
    taus: Sequence[float],
    visibility: VisibilityMatrix | None,
    shots: int,
    rng: np.random.Generator,
    decay: tuple[float, float] | None = None,
    rise: float | None = None,
) -> TraceSet:
    """Finite-shot measured traces: model, readout error, sampling, correction."""
    ideal = model_traces(populations, device, taus, decay=decay, rise=rise)
    out = np.empty_like(ideal.probabilities)
    for t in range(ideal.taus.size):
        p = ideal.probabilities[t]
        if visibility is not None:
            p = apply_visibility(visibility, p)
        counts = sample_shots(p, shots, rng)
        freq = counts / counts.sum()
        out[t] = correct(freq, visibility) if visibility is not None else freq
    return TraceSet(ideal.taus, out, shots=shots)


# ---------------------------------------------------------------------------
# Population fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JointPopulations:
    """Fitted joint phonon distribution P[n, m] with the fit residual."""

    matrix: np.ndarray
    residual: float

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if np.any(m < -1e-9):
            raise ValueError("populations must be nonnegative")
        if abs(m.sum() - 1.0) > 1e-3:
            raise ValueError(f"populations sum to {m.sum():.4f}, outside 1 +- 1e-3")
        object.__setattr__(self, "matrix", m)


def fit_populations(traces: TraceSet, device: DeviceParams, n_max: int,
                    decay: tuple[float, float] | None = None,
                    rise: float | None = None,
                    simplex_weight: float = 100.0) -> JointPopulations:
    """Nonnegative least squares for P[n, m] against the trace model.

    The tau grid must cover at least one full period of the slowest (n = 1)
    oscillation of both nodes, otherwise the design matrix cannot separate
    the populations and an IdentifiabilityError is raised.
    """
    rise = PulseDefaults().coupler_rise if rise is None else rise
    if decay is None:
        decay = (device.node_a.t1_e_during_swap, device.node_b.t1_e_during_swap)
    taus = traces.taus
    d = n_max + 1
    slowest = max(1.0 / (2.0 * effective_readout_coupling(device.node_a, rise)),
                  1.0 / (2.0 * effective_readout_coupling(device.node_b, rise)))
    if taus.max() - taus.min() < slowest:
        raise IdentifiabilityError(
            f"tau grid spans {(taus.max()-taus.min())*1e9:.0f} ns but the slowest "
            f"oscillation period is {slowest*1e9:.0f} ns")

    qa = _excitation_curves(device.node_a, taus, d, rise, decay[0])
    qb = _excitation_curves(device.node_b, taus, d, rise, decay[1])
    rows = []
    for t in range(taus.size):
        rows.append(np.kron(1 - qa[t], 1 - qb[t]))
        rows.append(np.kron(1 - qa[t], qb[t]))
        rows.append(np.kron(qa[t], 1 - qb[t]))
        rows.append(np.kron(qa[t], qb[t]))
    a = np.asarray(rows)
    y = traces.probabilities.reshape(-1)
    cond = np.linalg.cond(a)
    if cond > 1e10:
        raise IdentifiabilityError(
            f"trace design matrix condition number {cond:.2e}; "
            "tau grid too short or too coarse")
    a_aug = np.vstack([a, simplex_weight * np.ones((1, d * d))])
    y_aug = np.concatenate([y, [simplex_weight]])
    sol, _ = nnls(a_aug, y_aug)
    residual = float(np.linalg.norm(a @ sol - y))
    total = sol.sum()
    if abs(total - 1.0) > 1e-3:
        sol = sol / total
    return JointPopulations(sol.reshape(d, d), residual)


# ---------------------------------------------------------------------------
# Dataset container
# ---------------------------------------------------------------------------

@dataclass
class TomographyDataset:
    """Per-grid-point fitted populations plus run metadata."""

    grid: DisplacementGrid
    populations: list[JointPopulations]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.populations) != len(self.grid):
            raise ValueError("one population record per grid point required")

    @property
    def n_levels(self) -> int:
        return self.populations[0].matrix.shape[0]

    def to_json(self) -> str:
        return json.dumps({
            "style": self.grid.style,
            "grid": [[a.real, a.imag, b.real, b.imag] for a, b in self.grid.points],
            "populations": [
                {"matrix": p.matrix.tolist(), "residual": p.residual}
                for p in self.populations
            ],
            "meta": self.meta,
        }, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TomographyDataset":
        doc = json.loads(text)
        grid = DisplacementGrid(
            tuple((complex(ar, ai), complex(br, bi))
                  for ar, ai, br, bi in doc["grid"]),
            doc.get("style", "custom"))
        pops = [JointPopulations(np.asarray(rec["matrix"]), rec["residual"])
                for rec in doc["populations"]]
        return cls(grid, pops, doc.get("meta", {}))


# ---------------------------------------------------------------------------
# Convex reconstruction
# ---------------------------------------------------------------------------

@dataclass
class ReconstructionInfo:
    objective: float
    iterations: int
    converged: bool
    gradient_norm: float


def _support_indices(d: int, zero_pad_above: int | None) -> np.ndarray:
    if zero_pad_above is None:
        return np.arange(d * d)
    n = np.arange(d)
    keep = (n[:, None] <= zero_pad_above) & (n[None, :] <= zero_pad_above)
    return np.flatnonzero(keep.reshape(-1))


def _measurement_rows(dataset: TomographyDataset, n_max: int,
                      support: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stacked linear model: row (k, j) gives diag_j of the displaced rho."""
    d = n_max + 1
    s_blocks = []
    p_blocks = []
    for (alpha_a, alpha_b), pops in zip(dataset.grid.points, dataset.populations):
        m = np.kron(displacement_operator(-alpha_a, d),
                    displacement_operator(-alpha_b, d))
        msup = m[:, support]
        s_blocks.append(np.einsum("ja,jb->jab", msup, msup.conj())
                        .reshape(d * d, support.size ** 2))
        pm = pops.matrix
        if pm.shape[0] != d:
            full = np.zeros((d, d))
            c = min(d, pm.shape[0])
            full[:c, :c] = pm[:c, :c]
            pm = full
        p_blocks.append(pm.reshape(-1))
    return np.concatenate(s_blocks, axis=0), np.concatenate(p_blocks)


def _project_psd_unit_trace(rho: np.ndarray) -> np.ndarray:
    """Euclidean projection onto Hermitian, PSD, unit-trace matrices.

    Hermitize, then project the eigenvalue vector onto the probability
    simplex (shift-and-clip). Rescaling the clipped eigenvalues instead is
    not a metric projection and lets the gradient iteration stall at points
    where the gradient is parallel to rho.
    """
    rho = 0.5 * (rho + rho.conj().T)
    vals, vecs = np.linalg.eigh(rho)
    u = np.sort(vals)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, vals.size + 1)
    mask = u - (css - 1.0) / k > 0
    k_star = int(k[mask][-1])
    theta = (css[k_star - 1] - 1.0) / k_star
    vals = np.clip(vals - theta, 0.0, None)
    return (vecs * vals) @ vecs.conj().T


def _pgd(a: np.ndarray, b: np.ndarray, const: float, s_dim: int,
         max_iter: int, tol: float,
         warm_start: np.ndarray | None) -> tuple[np.ndarray, ReconstructionInfo]:
    if warm_start is None:
        rho = np.eye(s_dim, dtype=complex) / s_dim
    else:
        rho = warm_start.copy()
    step = 1.0 / max(np.linalg.eigvalsh(a).max(), 1e-30)

    def objective(v):
        return float(np.real(0.5 * np.vdot(v, a @ v) - np.vdot(b, v)) + const)

    v = rho.reshape(-1)
    f_prev = objective(v)
    converged = False
    it = 0
    grad = a @ v - b
    for it in range(1, max_iter + 1):
        v = v - step * grad
        rho = _project_psd_unit_trace(v.reshape(s_dim, s_dim))
        v = rho.reshape(-1)
        grad = a @ v - b
        f = objective(v)
        if abs(f_prev - f) < tol * max(abs(f_prev), 1e-18):
            converged = True
            f_prev = f
            break
        f_prev = f
    info = ReconstructionInfo(objective=f_prev, iterations=it,
                              converged=converged,
                              gradient_norm=float(np.linalg.norm(grad)))
    if not converged:
        warnings.warn(
            f"reconstruction stopped at the iteration cap ({max_iter}); "
            f"final gradient norm {info.gradient_norm:.3e}", stacklevel=2)
    return rho, info


def reconstruct(dataset: TomographyDataset, n_max: int,
                zero_pad_above: int | None = None,
                max_iter: int = 20000, tol: float = 1e-9,
                warm_start: np.ndarray | None = None,
                ) -> tuple[np.ndarray, ReconstructionInfo]:
    """Invert the displaced-diagonal measurements by projected gradient descent.

    Minimizes sum_k ||diag(D_k rho D_k^dag) - p_k||^2 over Hermitian, PSD,
    unit-trace rho; with ``zero_pad_above`` = c, rows and columns with a phonon
    index above c in either mode are exact zeros by construction.
    """
    if len(dataset.grid) == 0:
        raise ValueError("dataset is empty")
    d = n_max + 1
    support = _support_indices(d, zero_pad_above)
    n_data = len(dataset.grid) * d * d
    n_param = support.size ** 2
    if n_data < n_param:
        warnings.warn(
            f"{n_data} measured populations for {n_param} real parameters; "
            "the reconstruction may be underdetermined", stacklevel=2)
    s, p = _measurement_rows(dataset, n_max, support)
    a = 2.0 * (s.conj().T @ s)
    b = 2.0 * (s.conj().T @ p)
    const = float(p @ p)
    if warm_start is not None and warm_start.shape[0] == d:
        warm_start = warm_start[np.ix_(support, support)]
    rho_s, info = _pgd(a, b, const, support.size, max_iter, tol, warm_start)
    rho = np.zeros((d * d, d * d), dtype=complex)
    rho[np.ix_(support, support)] = rho_s
    return rho, info


def fidelity(rho: np.ndarray, target: np.ndarray) -> float:
    """F = sqrt(<psi| rho |psi>) for a pure target state vector."""
    target = np.asarray(target, dtype=complex).reshape(-1)
    if rho.shape != (target.size, target.size):
        raise ValueError(f"dimension mismatch: rho {rho.shape}, target {target.size}")
    val = np.real(np.vdot(target, rho @ target))
    return float(np.sqrt(max(val, 0.0)))


def bell_target(d: int) -> np.ndarray:
    """(|10> + |01>)/sqrt(2) in a d-level-per-mode joint basis."""
    psi = np.zeros(d * d, dtype=complex)
    psi[1 * d + 0] = 1.0
    psi[0 * d + 1] = 1.0
    return psi / np.sqrt(2)


def noon_target(d: int, n: int = 2, m: int | None = None) -> np.ndarray:
    """(|n0> + |0m>)/sqrt(2); m defaults to n."""
    m = n if m is None else m
    psi = np.zeros(d * d, dtype=complex)
    psi[n * d + 0] = 1.0
    psi[0 * d + m] = 1.0
    return psi / np.sqrt(2)


@dataclass
class BootstrapResult:
    mean: float
    std: float
    samples: np.ndarray


@dataclass
class CalibrationCurve:
    """Mean phonon number versus displacement-drive amplitude."""

    amplitudes: np.ndarray
    mean_phonons: np.ndarray
    slope: float            # d<n>/d(amplitude^2) in the linear regime
    max_relative_residual: float
    linear_bound: float     # largest amplitude with residual within 2 percent


def calibrate_displacement(amplitudes: Sequence[float], device: DeviceParams,
                           node: str = "A", sigma: float = 10e-9,
                           resonator_levels: int = 12) -> CalibrationCurve:
    """Drive-amplitude calibration: <n> against the squared pulse amplitude.

    Each amplitude drives the resonator with a resonant Gaussian pulse in a
    lossy single-node simulation; the mean phonon number is fit to
    slope * amplitude^2 and the linear range is bounded where the relative
    residual exceeds 2 percent.
    """
    from . import pulses as pl
    from .dynamics import Simulator

    amplitudes = np.asarray(amplitudes, dtype=float)
    if np.any(amplitudes < 0) or np.any(amplitudes > 1):
        raise ValueError("amplitudes must lie in [0, 1]")
    sim = Simulator(device, nodes=(node,), resonator_levels=resonator_levels)
    mean_n = np.zeros_like(amplitudes)
    duration = 6 * sigma
    for i, amp in enumerate(amplitudes):
        if amp == 0.0:
            continue
        seg = pl.Segment(f"D{node}", 0.0, duration,
                         pl.DisplacementPulse(complex(amp), shape="gaussian",
                                              sigma=sigma))
        sched = pl.PulseSchedule((seg,), measure_time=duration)
        traj = sim.evolve(sim.ground_state(), sched, record_times=[duration])
        mean_n[i] = float(traj.mean_phonons[-1, 0])
    sq = amplitudes ** 2
    denom = float(sq @ sq)
    slope = float((mean_n @ sq) / denom) if denom > 0 else 0.0
    model = slope * sq
    nonzero = amplitudes > 0
    resid = np.zeros_like(amplitudes)
    resid[nonzero] = np.abs(mean_n[nonzero] - model[nonzero]) / \
        np.maximum(model[nonzero], 1e-12)
    linear_bound = float(amplitudes.max()) if amplitudes.size else 0.0
    for amp, r in zip(amplitudes[nonzero], resid[nonzero]):
        if r > 0.02:
            linear_bound = min(linear_bound, float(amp))
    return CalibrationCurve(amplitudes=amplitudes, mean_phonons=mean_n,
                            slope=slope,
                            max_relative_residual=float(resid[nonzero].max())
                            if nonzero.any() else 0.0,
                            linear_bound=linear_bound)


def bootstrap(dataset: TomographyDataset, target: np.ndarray, n_max: int,
              zero_pad_above: int | None = None, resamples: int = 10,
              rng: np.random.Generator | None = None,
              max_iter: int = 20000, tol: float = 1e-9) -> BootstrapResult:
    """Fidelity uncertainty by resampling grid points with replacement.

    Each resample re-weights the measurement rows and repeats the convex
    reconstruction (warm-started from the full-data solution); the sample mean
    and standard deviation of the fidelities are reported.
    """
    if resamples < 2:
        raise ValueError("resamples must be >= 2")
    rng = rng if rng is not None else np.random.default_rng(0)
    d = n_max + 1
    support = _support_indices(d, zero_pad_above)
    s, p = _measurement_rows(dataset, n_max, support)
    a = 2.0 * (s.conj().T @ s)
    b = 2.0 * (s.conj().T @ p)
    rho_full, _ = _pgd(a, b, float(p @ p), support.size, max_iter, tol, None)

    k = len(dataset.grid)
    rows_per_point = d * d
    fids = []
    for _ in range(resamples):
        choice = rng.integers(0, k, size=k)
        rows = (choice[:, None] * rows_per_point
                + np.arange(rows_per_point)[None, :]).reshape(-1)
        s_rs, p_rs = s[rows], p[rows]
        a_rs = 2.0 * (s_rs.conj().T @ s_rs)
        b_rs = 2.0 * (s_rs.conj().T @ p_rs)
        rho_s, _ = _pgd(a_rs, b_rs, float(p_rs @ p_rs), support.size,
                        max_iter, tol, rho_full)
        rho = np.zeros((d * d, d * d), dtype=complex)
        rho[np.ix_(support, support)] = rho_s
        fids.append(fidelity(rho, target))
    fids = np.asarray(fids)
    return BootstrapResult(mean=float(fids.mean()),
                           std=float(fids.std(ddof=1)),
                           samples=fids)
