"""End-to-end scenario pipelines reproducing the experiment's measurements.

Each scenario is deterministic given (config, seed, shots): every random draw
comes from a named Philox stream derived from the seed, and all emitted data
files are byte-stable across repeated runs. ``report.json`` additionally
carries the wall-clock time, the one field excluded from the byte-identity
contract.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import curve_fit

from . import pulses as pl
from . import readout as ro
from . import sawcom
from . import tomography as tomo
from .config import Config, apply_overrides, load_config
from .dynamics import Simulator, chevron
from .report import RunReport, svg_plot, write_csv, write_json, write_report
from .rng import derive_rng

__all__ = ["ScenarioSpec", "run_scenario", "SCENARIOS"]

@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    config_path: str | None = None
    seed: int = 1
    shots: int = 3000
    out_dir: str = "runs/out"
    overrides: dict = field(default_factory=dict)
    check: bool = False
    plots: bool = False

    def __post_init__(self):
        if self.name not in SCENARIOS:
            raise ValueError(
                f"unknown scenario {self.name!r}; choose from {sorted(SCENARIOS)}")
        if self.seed < 1 or self.shots < 1:
            raise ValueError("seed and shots must be positive")


def run_scenario(spec: ScenarioSpec) -> RunReport:
    """Execute one named pipeline end-to-end and write its artifacts."""
    t_start = time.perf_counter()
    config = load_config(spec.config_path)
    config = apply_overrides(config, spec.overrides)
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = RunReport(scenario=spec.name, config=config.raw,
                       seed=spec.seed, shots=spec.shots)
    runner = SCENARIOS[spec.name]
    try:
        runner(config, spec, out_dir, report)
    except Exception as exc:
        raise RuntimeError(f"scenario {spec.name!r} failed: {exc}") from exc
    report.wall_clock_s = time.perf_counter() - t_start
    write_report(out_dir, report)
    report.artifacts.append(str(out_dir / "report.json"))
    return report


# ---------------------------------------------------------------------------
# Entanglement pipelines (bell / noon / noom)
# ---------------------------------------------------------------------------

_PROTOCOLS = {
    "bell": dict(builder=pl.bell_sequence, grid="bell", fit_levels=5,
                 pad=None, coherence=((1, 0), (0, 1)), phase_div=1.0,
                 band=(0.89, 0.95)),
    "noon": dict(builder=pl.noon_sequence, grid="noon", fit_levels=6,
                 pad=2, coherence=((2, 0), (0, 2)), phase_div=2.0,
                 band=(0.70, 0.79)),
    "noom": dict(builder=pl.noom_sequence, grid="noon", fit_levels=6,
                 pad=2, coherence=((2, 0), (0, 1)), phase_div=2.0,
                 band=None),
}


def _protocol_target(kind: str, d: int) -> np.ndarray:
    (na, nb), (ma, mb) = _PROTOCOLS[kind]["coherence"]
    psi = np.zeros(d * d, dtype=complex)
    psi[na * d + nb] = 1.0
    psi[ma * d + mb] = 1.0
    return psi / np.sqrt(2.0)


def _phase_reference(rho_ideal: np.ndarray, kind: str, d: int) -> float:
    """Mode-A frame rotation aligning the protocol's coherence phase to zero."""
    (na, nb), (ma, mb) = _PROTOCOLS[kind]["coherence"]
    c = rho_ideal[na * d + nb, ma * d + mb]
    return float(-np.angle(c) / _PROTOCOLS[kind]["phase_div"])


def _rotate_mode_a(rho: np.ndarray, phase: float, d: int) -> np.ndarray:
    n = np.arange(d)
    u = np.kron(np.exp(1j * phase * n), np.ones(d))
    return (u[:, None] * rho) * u.conj()[None, :]


def _entanglement_pipeline(kind: str, config: Config, spec: ScenarioSpec,
                           out_dir: Path, report: RunReport) -> None:
    proto = _PROTOCOLS[kind]
    device = config.device
    sim = Simulator(device, resonator_levels=6)
    schedule = proto["builder"](device, config.pulses)
    d_sim = 6

    # Prepare: lossless twin fixes the deterministic protocol phases.
    traj_ideal = sim.evolve(sim.ground_state(), schedule, lossless=True,
                            record_times=[schedule.duration])
    rho_ideal = sim.reduce_to_resonators(traj_ideal.final_state)
    phase_a = _phase_reference(rho_ideal, kind, d_sim)
    rho_ideal = _rotate_mode_a(rho_ideal, phase_a, d_sim)

    traj = sim.evolve(sim.ground_state(), schedule,
                      record_times=[schedule.duration])
    rho_m = _rotate_mode_a(sim.reduce_to_resonators(traj.final_state),
                           phase_a, d_sim)

    target_sim = _protocol_target(kind, d_sim)
    report.metrics["ideal_state_fidelity"] = tomo.fidelity(rho_ideal, target_sim)
    report.metrics["prepared_state_fidelity"] = tomo.fidelity(rho_m, target_sim)

    # Zero-displacement traces back the time-domain figure.
    taus = np.arange(0.0, 300.0e-9 + 1e-15, 5.0e-9)
    pops_zero = np.real(np.diag(rho_m)).reshape(d_sim, d_sim)
    zero_traces = tomo.model_traces(pops_zero, device, taus)
    report.artifacts.append(str(write_csv(
        out_dir / "traces_zero_displacement.csv",
        ["tau_s", "p_gg", "p_ge", "p_eg", "p_ee"],
        [[t, *row] for t, row in zip(zero_traces.taus, zero_traces.probabilities)])))
    report.artifacts.append(str(write_csv(
        out_dir / "populations_zero_displacement.csv",
        ["n_a", "n_b", "population"],
        [[n, m, pops_zero[n, m]] for n in range(d_sim) for m in range(d_sim)])))

    # Tomography: displace, model the readout, sample, correct, fit.
    grid = tomo.make_grid(proto["grid"])
    visibility = ro.build_visibility(device.node_a, device.node_b)
    fit_levels = proto["fit_levels"]
    fits = []
    for k, (alpha_a, alpha_b) in enumerate(grid.points):
        rho_d = tomo.displaced_density(rho_m, alpha_a, alpha_b, dims=(d_sim, d_sim))
        pops = np.real(np.diag(rho_d)).reshape(d_sim, d_sim)
        rng = derive_rng(spec.seed, "tomography", kind, k)
        traces = tomo.simulate_trace_measurement(
            pops, device, taus, visibility, spec.shots, rng)
        fits.append(tomo.fit_populations(traces, device, fit_levels - 1))
    dataset = tomo.TomographyDataset(grid, fits, meta={
        "seed": spec.seed, "shots": spec.shots,
        "fit_levels": fit_levels, "protocol": kind})
    report.artifacts.append(str(
        write_json(out_dir / "dataset.json",
                   json.loads(dataset.to_json()))))

    n_max = fit_levels - 1
    rho_rec, info = tomo.reconstruct(dataset, n_max, zero_pad_above=proto["pad"])
    target = _protocol_target(kind, n_max + 1)
    fid = tomo.fidelity(rho_rec, target)
    boot = tomo.bootstrap(dataset, target, n_max, zero_pad_above=proto["pad"],
                          resamples=10, rng=derive_rng(spec.seed, "bootstrap", kind))
    report.metrics.update({
        "fidelity": fid,
        "bootstrap_mean": boot.mean,
        "bootstrap_std": boot.std,
        "reconstruction_objective": info.objective,
        "reconstruction_iterations": info.iterations,
        "reconstruction_converged": info.converged,
        "grid_points": len(grid),
    })

    report.artifacts.append(str(write_json(out_dir / "rho_reconstructed.json", {
        "n_levels": n_max + 1,
        "real": np.real(rho_rec).tolist(),
        "imag": np.imag(rho_rec).tolist(),
    })))
    report.artifacts.append(str(_write_rho_magnitude_csv(
        out_dir / "rho_magnitude.csv", rho_rec, n_max + 1)))

    if proto["band"] is not None:
        lo, hi = proto["band"]
        report.add_check(f"{kind}_fidelity_in_band", lo <= fid <= hi,
                         f"fidelity {fid:.4f} target [{lo}, {hi}]")
    if spec.plots:
        report.artifacts.append(str(svg_plot(
            out_dir / "traces_zero_displacement.svg", "line",
            {"series": {lbl: (taus * 1e9, zero_traces.probabilities[:, i])
                        for i, lbl in enumerate(["P_gg", "P_ge", "P_eg", "P_ee"])},
             "xlabel": "interaction time (ns)", "ylabel": "probability",
             "title": f"{kind} joint readout traces"})))
        report.artifacts.append(str(svg_plot(
            out_dir / "rho_magnitude.svg", "bars",
            {"z": np.abs(rho_rec), "title": f"|rho| ({kind})"})))


def _write_rho_magnitude_csv(path: Path, rho: np.ndarray, d: int) -> Path:
    """Magnitude table in the fixed 6-level joint basis |00> ... |55>."""
    full = np.zeros((36, 36))
    labels = [f"{n}{m}" for n in range(6) for m in range(6)]
    # Embed a smaller reconstruction into the 6-level layout.
    idx = [n * 6 + m for n in range(d) for m in range(d)]
    mag = np.abs(rho)
    for i, gi in enumerate(idx):
        for j, gj in enumerate(idx):
            full[gi, gj] = mag[i, j]
    header = ["state"] + labels
    rows = [[labels[i]] + list(full[i]) for i in range(36)]
    return write_csv(path, header, rows)


def _run_bell(config, spec, out_dir, report):
    _entanglement_pipeline("bell", config, spec, out_dir, report)


def _run_noon(config, spec, out_dir, report):
    _entanglement_pipeline("noon", config, spec, out_dir, report)


def _run_noom(config, spec, out_dir, report):
    _entanglement_pipeline("noom", config, spec, out_dir, report)


# ---------------------------------------------------------------------------
# Swap characterization (parallel-swap, chevron)
# ---------------------------------------------------------------------------

def _refined_minima(times: np.ndarray, p_e: np.ndarray,
                    window: int = 8) -> list[float]:
    """Deep local minima of an oscillating trace, parabola-refined."""
    lo, hi = float(p_e.min()), float(p_e.max())
    thresh = lo + 0.25 * (hi - lo)
    out = []
    for i in range(1, times.size - 1):
        w0, w1 = max(i - window, 0), min(i + window + 1, times.size)
        if p_e[i] > thresh or p_e[i] > p_e[w0:w1].min():
            continue
        y0, y1, y2 = p_e[i - 1:i + 2]
        denom = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if abs(denom) > 1e-12 else 0.0
        shift = float(np.clip(shift, -1.0, 1.0))
        t_min = times[i] + shift * (times[i] - times[i - 1])
        if not out or t_min - out[-1] > window * (times[1] - times[0]):
            out.append(float(t_min))
    return out


def _fit_swap_time(times: np.ndarray, p_e: np.ndarray, g_guess: float
                   ) -> tuple[float, float]:
    """(first-minimum time, oscillation frequency) from the trace minima.

    Minima positions are insensitive to the decay envelope; the oscillation
    frequency comes from the mean spacing of consecutive minima (or twice the
    first-minimum time when only one full dip fits in the window).
    """
    minima = _refined_minima(times, p_e)
    if not minima:
        raise RuntimeError("no oscillation minimum found in the trace")
    if len(minima) >= 2:
        freq = 1.0 / float(np.mean(np.diff(minima)))
    else:
        freq = 0.5 / minima[0]
    return minima[0], float(freq)


def _interaction_time(times: np.ndarray, rise: float) -> np.ndarray:
    """Integrated coupler amplitude: the resonant interaction time axis."""
    return np.where(times >= 2 * rise, times - rise, times ** 2 / (4.0 * rise))


def _run_parallel_swap(config, spec, out_dir, report):
    device = config.device
    sim = Simulator(device, resonator_levels=3)
    p = config.pulses
    t_hold = 220e-9
    segs = []
    for node in ("A", "B"):
        params = device.node(node)
        segs.append(pl.Segment(f"Q{node}-XY", 0.0, 0.0, pl.XYPulse("ge", np.pi)))
        segs.append(pl.Segment(f"Q{node}-Z", 0.0, p.z_ramp,
                               pl.FrequencyRamp(params.f_resonator)))
        segs.append(pl.Segment(f"G{node}", p.z_ramp, t_hold + p.coupler_rise,
                               pl.CouplerWindow(1.0, p.coupler_rise)))
    schedule = pl.PulseSchedule(tuple(segs),
                                measure_time=p.z_ramp + t_hold + p.coupler_rise)
    times = np.arange(0.0, t_hold, 1e-9)
    t_int = _interaction_time(times, p.coupler_rise)
    traj = sim.evolve(sim.ground_state(), schedule,
                      record_times=p.z_ramp + times)
    report.artifacts.append(str(write_csv(
        out_dir / "parallel_swap_traces.csv",
        ["t_interaction_s", "t_window_s", "p_e_a", "p_e_b"],
        [[ti, t, a, b] for ti, t, a, b in
         zip(t_int, times, traj.excited_population(0),
             traj.excited_population(1))])))
    expected = {"A": 42e-9, "B": 35e-9}
    for i, node in enumerate(("A", "B")):
        params = device.node(node)
        t_swap, freq = _fit_swap_time(t_int, traj.excited_population(i), params.g_ge)
        report.metrics[f"swap_time_{node.lower()}_s"] = t_swap
        report.metrics[f"swap_freq_{node.lower()}_hz"] = freq
        report.add_check(
            f"swap_time_{node.lower()}",
            abs(t_swap - expected[node]) <= 2e-9,
            f"fitted {t_swap*1e9:.2f} ns, expected {expected[node]*1e9:.0f} +- 2 ns")
    if spec.plots:
        report.artifacts.append(str(svg_plot(
            out_dir / "parallel_swap.svg", "line",
            {"series": {"P_e A": (t_int * 1e9, traj.excited_population(0)),
                        "P_e B": (t_int * 1e9, traj.excited_population(1))},
             "xlabel": "interaction time (ns)", "ylabel": "P_e",
             "title": "simultaneous vacuum-Rabi swaps"})))


def _run_chevron(config, spec, out_dir, report):
    device = config.device
    detunings = np.linspace(-30e6, 30e6, 21)
    times = np.arange(0.0, 200e-9, 2e-9)
    t_int = _interaction_time(times, config.pulses.coupler_rise)
    for node in ("A", "B"):
        params = device.node(node)
        pmap = chevron(device, node, detunings, times, pulses=config.pulses)
        report.artifacts.append(str(write_csv(
            out_dir / f"chevron_{node.lower()}.csv",
            ["detuning_hz"] + [f"t_{t:.3e}" for t in times],
            [[detunings[i]] + list(pmap[i]) for i in range(detunings.size)])))
        # Oscillation-frequency law: f_osc = sqrt((2g)^2 + delta^2).
        worst = 0.0
        for i, delta in enumerate(detunings):
            if abs(delta) > 2 * params.g_ge:
                continue
            _, freq = _fit_swap_time(t_int, pmap[i], params.g_ge)
            f_expected = np.hypot(2 * params.g_ge, delta)
            worst = max(worst, abs(freq - f_expected) / f_expected)
        i0 = int(np.argmin(np.abs(detunings)))
        t_swap, _ = _fit_swap_time(t_int, pmap[i0], params.g_ge)
        report.metrics[f"chevron_{node.lower()}_max_freq_error"] = worst
        report.metrics[f"chevron_{node.lower()}_resonant_swap_s"] = t_swap
        report.add_check(f"chevron_{node.lower()}_freq_law", worst <= 0.02,
                         f"max oscillation-frequency error {worst*100:.2f}% <= 2%")
        if spec.plots:
            report.artifacts.append(str(svg_plot(
                out_dir / f"chevron_{node.lower()}.svg", "heatmap",
                {"z": pmap, "extent": [0, times[-1] * 1e9,
                                       detunings[0] / 1e6, detunings[-1] / 1e6],
                 "xlabel": "time (ns)", "ylabel": "detuning (MHz)",
                 "title": f"chevron node {node}"})))


# ---------------------------------------------------------------------------
# Resonator coherence scenarios
# ---------------------------------------------------------------------------

def _measured_pe(sim: Simulator, rho: np.ndarray, node_idx: int,
                 params, shots: int, rng) -> float:
    """Single-qubit P_e after readout error, sampling, and correction."""
    diag = np.real(np.diag(rho))
    p_e = float(diag[sim._qubit_level_indices[node_idx][1]].sum())
    p_e = min(max(p_e, 0.0), 1.0)
    conf = np.array([[params.readout_fidelity_g, 1 - params.readout_fidelity_e],
                     [1 - params.readout_fidelity_g, params.readout_fidelity_e]])
    p_meas = conf @ np.array([1.0 - p_e, p_e])
    counts = rng.multinomial(shots, p_meas / p_meas.sum())
    freq = counts / counts.sum()
    corrected = np.linalg.inv(conf) @ freq
    return float(corrected[1])


def _swap_block_schedule(device, node, pulses, lead: Sequence[pl.Segment] = ()
                         ) -> pl.PulseSchedule:
    bld = pl._Builder()
    bld.segments.extend(lead)
    end = pl._single_node_swap(bld, device, pulses, node, 0.0)
    return bld.done(measure_time=end)


def _coherence_scenario(which: str, config, spec, out_dir, report):
    device = config.device
    p = config.pulses
    results = {}
    for node in ("A", "B"):
        params = device.node(node)
        t_ref = params.t1_resonator if which == "t1m" else params.t2_resonator
        delays = np.linspace(0.0, 3.5 * t_ref, 12)
        sim = Simulator(device, nodes=(node,), resonator_levels=4)
        angle = np.pi if which == "t1m" else np.pi / 2
        prep = _swap_block_schedule(
            device, node, p,
            lead=[pl.Segment(f"Q{node}-XY", 0.0, 0.0, pl.XYPulse("ge", angle))])
        traj = sim.evolve(sim.ground_state(), prep)
        rho_in = traj.final_state

        wait = pl.PulseSchedule((), measure_time=float(delays[-1]))
        traj_wait = sim.evolve(rho_in, wait, record_times=delays,
                               checkpoint_times=delays)
        swap_out = _swap_block_schedule(device, node, p)
        node_idx = 0
        pe_curves = []
        for i, delay in enumerate(delays):
            rho_ck = traj_wait.checkpoints[float(delay)]
            traj_out = sim.evolve(rho_ck, swap_out)
            rho_end = traj_out.final_state
            rng = derive_rng(spec.seed, which, node, i)
            if which == "t1m":
                pe_curves.append(_measured_pe(sim, rho_end, node_idx, params,
                                              spec.shots, rng))
            else:
                phases = np.linspace(0.0, 2 * np.pi, 8, endpoint=False)
                row = []
                for j, phi in enumerate(phases):
                    u = sim._xy_unitary(node_idx, pl.XYPulse("ge", np.pi / 2,
                                                             phase=float(phi)))
                    rho_f = u @ rho_end @ u.conj().T
                    rng_j = derive_rng(spec.seed, which, node, i, j)
                    row.append(_measured_pe(sim, rho_f, node_idx, params,
                                            spec.shots, rng_j))
                pe_curves.append(row)

        if which == "t1m":
            pe = np.asarray(pe_curves)

            def decay(t, amp, tau, base):
                return amp * np.exp(-t / tau) + base

            popt, _ = curve_fit(decay, delays, pe,
                                p0=(pe[0] - pe[-1], t_ref, pe[-1]), maxfev=20000)
            fitted = float(abs(popt[1]))
            rows = [[d, v] for d, v in zip(delays, pe)]
            header = ["delay_s", "p_e"]
        else:
            pe = np.asarray(pe_curves)  # (delays, phases)
            phases = np.linspace(0.0, 2 * np.pi, 8, endpoint=False)
            contrast = 2.0 * np.abs((pe * np.exp(-1j * phases[None, :])).mean(axis=1))

            def decay(t, amp, tau):
                return amp * np.exp(-t / tau)

            popt, _ = curve_fit(decay, delays, contrast,
                                p0=(contrast[0], t_ref), maxfev=20000)
            fitted = float(abs(popt[1]))
            rows = [[d, c] + list(prow)
                    for d, c, prow in zip(delays, contrast, pe)]
            header = ["delay_s", "contrast"] + [f"p_e_phase_{j}" for j in range(8)]

        key = f"{which}_{node.lower()}"
        results[node] = fitted
        report.metrics[f"{key}_fitted_s"] = fitted
        report.metrics[f"{key}_configured_s"] = t_ref
        rel = abs(fitted - t_ref) / t_ref
        report.add_check(key, rel <= 0.05,
                         f"fitted {fitted*1e9:.1f} ns vs configured "
                         f"{t_ref*1e9:.0f} ns ({rel*100:.2f}%)")
        report.artifacts.append(str(write_csv(
            out_dir / f"{which}_{node.lower()}.csv", header, rows)))

    if which == "t1m":
        q_targets = {"A": 7200.0, "B": 5600.0}
        for node in ("A", "B"):
            params = device.node(node)
            q = 2 * np.pi * params.f_resonator * results[node]
            report.metrics[f"quality_factor_{node.lower()}"] = q
            rel = abs(q - q_targets[node]) / q_targets[node]
            report.add_check(f"quality_factor_{node.lower()}", rel <= 0.05,
                             f"Q = {q:.0f} vs ~{q_targets[node]:.0f} "
                             f"({rel*100:.2f}%)")


def _run_resonator_t1(config, spec, out_dir, report):
    _coherence_scenario("t1m", config, spec, out_dir, report)


def _run_resonator_ramsey(config, spec, out_dir, report):
    _coherence_scenario("t2m", config, spec, out_dir, report)


# ---------------------------------------------------------------------------
# Displacement calibration
# ---------------------------------------------------------------------------

def _run_displacement_cal(config, spec, out_dir, report):
    device = config.device
    amplitudes = np.linspace(0.0, 1.0, 11)
    for node in ("A", "B"):
        curve = tomo.calibrate_displacement(
            amplitudes, device, node=node,
            sigma=config.pulses.displacement_sigma)
        key = node.lower()
        report.metrics[f"displacement_slope_{key}"] = curve.slope
        report.metrics[f"displacement_max_residual_{key}"] = \
            curve.max_relative_residual
        report.metrics[f"displacement_linear_bound_{key}"] = curve.linear_bound
        report.add_check(f"displacement_linear_{key}",
                         curve.slope > 0 and curve.max_relative_residual <= 0.02,
                         f"slope {curve.slope:.4f}, max relative residual "
                         f"{curve.max_relative_residual*100:.2f}% <= 2%")
        report.artifacts.append(str(write_csv(
            out_dir / f"displacement_cal_{key}.csv",
            ["amplitude", "mean_phonons"],
            [[a, n] for a, n in zip(curve.amplitudes, curve.mean_phonons)])))


# ---------------------------------------------------------------------------
# SAW scenarios
# ---------------------------------------------------------------------------

def _saw_curves_for(design, out_dir, report, label):
    lobe = 2.0 * design.f0_idt / design.idt_finger_pairs
    f = np.linspace(design.f0_idt - 0.9 * lobe, design.f0_idt + 0.9 * lobe, 4001)
    resp = sawcom.cavity_response(design, f)
    y = sawcom.idt_admittance(design, f)
    report.artifacts.append(str(write_csv(
        out_dir / f"saw_{label}.csv",
        ["f_hz", "s21", "gamma_mag", "re_y_idt"],
        [[fi, s, g, gy] for fi, s, g, gy in
         zip(f, resp.s21, resp.mirror_gamma, np.real(y))])))
    band = resp.stopband
    width = band[1] - band[0]
    report.metrics[f"saw_{label}_stopband_hz"] = width
    report.metrics[f"saw_{label}_modes_hz"] = list(resp.modes)
    if resp.fsr is not None:
        report.metrics[f"saw_{label}_fsr_hz"] = resp.fsr
    # Main-lobe null-to-null width from the conductance curve.
    g_a = np.real(sawcom.idt_admittance(design, f))
    i0 = int(np.argmax(g_a))
    left = i0 - 1
    while left > 0 and g_a[left] > g_a[left - 1]:
        left -= 1
    right = i0 + 1
    while right < f.size - 1 and g_a[right] > g_a[right + 1]:
        right += 1
    lobe_measured = f[right] - f[left]
    report.metrics[f"saw_{label}_idt_lobe_hz"] = lobe_measured
    return resp, lobe, lobe_measured


def _run_saw_curves(config, spec, out_dir, report):
    for label in ("a", "b"):
        design = config.saw_design(label)
        resp, lobe_expected, lobe_measured = _saw_curves_for(
            design, out_dir, report, label)
        width = resp.stopband[1] - resp.stopband[0]
        report.add_check(
            f"saw_{label}_stopband_width",
            abs(width - 50e6) <= 15e6,
            f"|Gamma|>0.9 width {width/1e6:.1f} MHz in 50 +- 15 MHz")
        report.add_check(
            f"saw_{label}_single_mode", len(resp.modes) == 1,
            f"{len(resp.modes)} mode(s) inside the stopband: "
            f"{[f'{m/1e9:.4f} GHz' for m in resp.modes]}")
        report.add_check(
            f"saw_{label}_idt_lobe",
            abs(lobe_measured - lobe_expected) <= 0.1 * lobe_expected,
            f"null-to-null {lobe_measured/1e6:.0f} MHz vs 2 f0/N_p = "
            f"{lobe_expected/1e6:.0f} MHz (10%)")
        if spec.plots:
            report.artifacts.append(str(svg_plot(
                out_dir / f"saw_{label}.svg", "line",
                {"series": {"|S21|": (resp.frequencies / 1e9, resp.s21),
                            "|Gamma|": (resp.frequencies / 1e9, resp.mirror_gamma)},
                 "xlabel": "frequency (GHz)", "ylabel": "magnitude",
                 "title": f"SAW resonator {label.upper()}"})))


def _run_multimode(config, spec, out_dir, report):
    design = config.saw_design("multimode")
    resp, _, _ = _saw_curves_for(design, out_dir, report, "multimode")
    n_modes = len(resp.modes)
    fsr = resp.fsr
    report.add_check("multimode_mode_count", n_modes >= 3,
                     f"{n_modes} in-band modes (need >= 3)")
    report.add_check(
        "multimode_fsr",
        fsr is not None and abs(fsr - 44e6) <= 4e6,
        f"FSR {fsr/1e6 if fsr else float('nan'):.1f} MHz in 44 +- 4 MHz")


SCENARIOS: dict[str, Callable] = {
    "bell": _run_bell,
    "noon": _run_noon,
    "noom": _run_noom,
    "chevron": _run_chevron,
    "parallel-swap": _run_parallel_swap,
    "resonator-t1": _run_resonator_t1,
    "resonator-ramsey": _run_resonator_ramsey,
    "displacement-cal": _run_displacement_cal,
    "saw-curves": _run_saw_curves,
    "multimode": _run_multimode,
}
