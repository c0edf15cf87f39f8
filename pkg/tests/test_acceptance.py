"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they complete. The heavyweight pipelines (Bell, N00N, coherence
fits) run once as session fixtures and are shared across criteria.
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import sqrtm

from phononlab import pulses as pl
from phononlab import readout as ro
from phononlab import tomography as tomo
from phononlab.dynamics import Simulator
from phononlab.hilbert import displacement_operator
from phononlab.rng import derive_rng
from phononlab.scenarios import ScenarioSpec, run_scenario

from conftest import PAPER_VISIBILITY


def _announce(criterion: str, passed: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")
    assert passed, f"{criterion}: {detail}"


def _run(name: str, tmp_factory, tag: str, seed: int = 1, shots: int = 3000):
    out = tmp_factory.mktemp(tag)
    spec = ScenarioSpec(name=name, seed=seed, shots=shots, out_dir=str(out))
    t0 = time.perf_counter()
    report = run_scenario(spec)
    report.metrics["_elapsed_s"] = time.perf_counter() - t0
    report.metrics["_out_dir"] = str(out)
    return report


@pytest.fixture(scope="session")
def bell_report(tmp_path_factory):
    return _run("bell", tmp_path_factory, "bell")


@pytest.fixture(scope="session")
def noon_report(tmp_path_factory):
    return _run("noon", tmp_path_factory, "noon")


@pytest.fixture(scope="session")
def swap_report(tmp_path_factory):
    return _run("parallel-swap", tmp_path_factory, "pswap")


@pytest.fixture(scope="session")
def t1_reports(tmp_path_factory):
    return (_run("resonator-t1", tmp_path_factory, "t1a"),
            _run("resonator-t1", tmp_path_factory, "t1b"))


@pytest.fixture(scope="session")
def ramsey_report(tmp_path_factory):
    return _run("resonator-ramsey", tmp_path_factory, "t2")


@pytest.fixture(scope="session")
def saw_reports(tmp_path_factory):
    return (_run("saw-curves", tmp_path_factory, "sawa"),
            _run("saw-curves", tmp_path_factory, "sawb"),
            _run("multimode", tmp_path_factory, "mm"))


def test_criterion_01_bell_pipeline(bell_report):
    fid = bell_report.metrics["fidelity"]
    elapsed = bell_report.metrics["_elapsed_s"]
    ok = 0.89 <= fid <= 0.95 and elapsed < 600.0
    _announce(
        "1 (Bell pipeline)", ok,
        f"reconstructed fidelity {fid:.4f} in [0.89, 0.95], "
        f"runtime {elapsed:.0f}s < 600s "
        f"(bootstrap {bell_report.metrics['bootstrap_mean']:.4f} "
        f"+- {bell_report.metrics['bootstrap_std']:.4f})")


def test_criterion_02_noon_pipeline(noon_report):
    fid = noon_report.metrics["fidelity"]
    ok = 0.70 <= fid <= 0.79
    _announce(
        "2 (N00N pipeline)", ok,
        f"reconstructed fidelity {fid:.4f} in [0.70, 0.79] "
        f"(bootstrap {noon_report.metrics['bootstrap_mean']:.4f} "
        f"+- {noon_report.metrics['bootstrap_std']:.4f})")


def test_criterion_03_parallel_swap(swap_report):
    ta = swap_report.metrics["swap_time_a_s"]
    tb = swap_report.metrics["swap_time_b_s"]
    ok = abs(ta - 42e-9) <= 2e-9 and abs(tb - 35e-9) <= 2e-9
    _announce(
        "3 (parallel swap times)", ok,
        f"fitted {ta*1e9:.2f} ns (42 +- 2) and {tb*1e9:.2f} ns (35 +- 2), "
        f"1/(4g) = {1e9/(4*5.9e6):.1f} / {1e9/(4*7.1e6):.1f} ns")


def test_criterion_04_resonator_coherence(t1_reports, ramsey_report):
    t1 = t1_reports[0]
    details = []
    ok = True
    for report, key, configured in (
        (t1, "t1m_a", 380e-9), (t1, "t1m_b", 270e-9),
        (ramsey_report, "t2m_a", 709e-9), (ramsey_report, "t2m_b", 527e-9),
    ):
        fitted = report.metrics[f"{key}_fitted_s"]
        rel = abs(fitted - configured) / configured
        ok = ok and rel <= 0.05
        details.append(f"{key}={fitted*1e9:.0f}ns ({rel*100:.1f}%)")
    _announce("4 (resonator T1m/T2m fits within 5%)", ok, ", ".join(details))


def test_criterion_05_quality_factors(t1_reports):
    t1 = t1_reports[0]
    qa = t1.metrics["quality_factor_a"]
    qb = t1.metrics["quality_factor_b"]
    ok = abs(qa - 7200) / 7200 <= 0.05 and abs(qb - 5600) / 5600 <= 0.05
    _announce("5 (quality factors)", ok,
              f"Q_A = {qa:.0f} (~7200), Q_B = {qb:.0f} (~5600), within 5%")


def test_criterion_06_saw_model(saw_reports):
    saw, _, mm = saw_reports
    failed = [c["name"] if isinstance(c, dict) else c[0]
              for c in saw.checks + mm.checks
              if not (c["passed"] if isinstance(c, dict) else c[1])]
    widths = (saw.metrics["saw_a_stopband_hz"] / 1e6,
              saw.metrics["saw_b_stopband_hz"] / 1e6)
    fsr = mm.metrics["saw_multimode_fsr_hz"] / 1e6
    n_modes = len(mm.metrics["saw_multimode_modes_hz"])
    ok = not failed
    _announce(
        "6 (SAW model)", ok,
        f"stopbands {widths[0]:.1f}/{widths[1]:.1f} MHz (50 +- 15), one mode "
        f"per node, IDT lobes within 10%, multimode {n_modes} modes at "
        f"FSR {fsr:.1f} MHz (44 +- 4)" + (f"; failed: {failed}" if failed else ""))


def test_criterion_07_tomography_roundtrip():
    rng = np.random.default_rng(20240)
    grid = tomo.make_grid("bell")
    worst = 1.0
    for trial in range(20):
        x = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
        rho = x @ x.conj().T
        rho /= np.trace(rho).real
        pops = []
        for aa, ab in grid.points:
            m = np.kron(displacement_operator(-aa, 3),
                        displacement_operator(-ab, 3))
            diag = np.real(np.diag(m @ rho @ m.conj().T))
            pops.append(tomo.JointPopulations(diag.reshape(3, 3), 0.0))
        ds = tomo.TomographyDataset(grid, pops, {})
        rho_rec, _ = tomo.reconstruct(ds, 2)
        sa = sqrtm(rho)
        fid = float(np.real(np.trace(sqrtm(sa @ rho_rec @ sa))))
        worst = min(worst, fid)
    ok = worst > 0.999
    _announce("7 (tomography round-trip oracle)", ok,
              f"20 random two-resonator states, worst fidelity {worst:.5f} > 0.999")


def test_criterion_08_readout_correction():
    v = ro.VisibilityMatrix.from_measured(PAPER_VISIBILITY)
    rng = np.random.default_rng(5150)
    exact_ok = True
    for _ in range(25):
        p = rng.dirichlet(np.ones(4))
        rec = ro.correct(ro.apply_visibility(v, p), v)
        exact_ok = exact_ok and np.max(np.abs(rec - p)) < 1e-9
    n = 100_000
    p_true = np.array([0.5, 0.25, 0.25, 0.0])
    q = v.matrix @ p_true
    cov = (np.diag(q) - np.outer(q, q)) / n
    v_inv = v.inverse
    sigma = np.sqrt(np.diag(v_inv @ cov @ v_inv.T))
    hits = 0
    for s in range(100):
        counts = ro.sample_shots(q, n, derive_rng(7000 + s, "acc8"))
        rec = ro.correct(counts / n, v)
        if np.all(np.abs(rec - p_true) <= 3 * sigma + 1e-12):
            hits += 1
    ok = exact_ok and hits >= 95
    _announce("8 (readout correction)", ok,
              f"exact apply-then-correct to 1e-9: {exact_ok}; "
              f"{hits}/100 seeded 1e5-shot trials within 3 sigma (need >= 95)")


def test_criterion_09_invariant_suites(device, pulse_defaults):
    details = []
    ok = True

    # Density-matrix invariants at every recorded step of a noisy run.
    sim = Simulator(device, resonator_levels=3)
    sched = pl.bell_sequence(device, pulse_defaults)
    try:
        sim.evolve(sim.ground_state(), sched, validate=True,
                   record_times=np.linspace(0, sched.duration, 13))
        details.append("state invariants hold along noisy trajectory")
    except AssertionError as exc:
        ok = False
        details.append(f"state invariants violated: {exc}")

    # Purity conservation without dissipation.
    traj = sim.evolve(sim.ground_state(), sched, lossless=True,
                      checkpoint_times=[sched.duration],
                      record_times=[sched.duration])
    purity = float(np.real(np.trace(traj.final_state @ traj.final_state)))
    ok = ok and abs(purity - 1.0) < 1e-6
    details.append(f"lossless purity {purity:.8f}")

    # Trace drift below 1e-6 over a microsecond.
    sim1 = Simulator(device, nodes=("A",), resonator_levels=3)
    ket = sim1.basis_ket((1,), (0,))
    traj1 = sim1.evolve(np.outer(ket, ket.conj()),
                        pl.PulseSchedule((), measure_time=1e-6),
                        record_times=[0, 1e-6])
    ok = ok and traj1.max_trace_drift < 1e-6
    details.append(f"trace drift {traj1.max_trace_drift:.2e}/us")

    # Displacement unitarity over the tomography amplitude range.
    worst_unit = 0.0
    for alpha in (0.26, 0.35, 0.5, 0.6, 0.3 + 0.4j):
        for dim in (8, 10):
            d = displacement_operator(alpha, dim)
            worst_unit = max(worst_unit, float(np.max(np.abs(
                d @ d.conj().T - np.eye(dim)))))
    ok = ok and worst_unit < 1e-6
    details.append(f"D(alpha) unitarity dev {worst_unit:.1e}")

    # Ideal Bell readout traces never show coincidences.
    pops = np.zeros((6, 6))
    pops[1, 0] = pops[0, 1] = 0.5
    traces = tomo.model_traces(pops, device, np.linspace(0, 300e-9, 61))
    pee = float(np.max(traces.probabilities[:, 3]))
    ok = ok and pee < 0.01
    details.append(f"ideal Bell P_ee max {pee:.4f}")

    # sqrt(2) oscillation-rate ratio between two- and one-phonon fits.
    from phononlab.scenarios import _refined_minima
    taus = np.linspace(0, 260e-9, 5201)
    freqs = {}
    for n in (1, 2):
        p = np.zeros((3, 3))
        p[n, 0] = 1.0
        tr = tomo.model_traces(p, device, taus)
        minima = _refined_minima(taus, tr.probabilities[:, 0])
        freqs[n] = 1.0 / float(np.mean(np.diff(minima)))
    ratio = freqs[2] / freqs[1]
    ok = ok and abs(ratio - np.sqrt(2)) <= 0.03 * np.sqrt(2)
    details.append(f"n=2/n=1 rate ratio {ratio:.4f} (sqrt2 within 3%)")

    _announce("9 (invariant suites)", ok, "; ".join(details))


def test_criterion_10_determinism(t1_reports, tmp_path_factory):
    def compare(dir_a: Path, dir_b: Path) -> list[str]:
        mismatched = []
        names_a = sorted(p.name for p in Path(dir_a).iterdir())
        names_b = sorted(p.name for p in Path(dir_b).iterdir())
        if names_a != names_b:
            return ["file lists differ"]
        for name in names_a:
            ba = (Path(dir_a) / name).read_bytes()
            bb = (Path(dir_b) / name).read_bytes()
            if name == "report.json":
                da, db = json.loads(ba), json.loads(bb)
                da.pop("wall_clock_s")
                db.pop("wall_clock_s")
                if da != db:
                    mismatched.append(name)
            elif ba != bb:
                mismatched.append(name)
        return mismatched

    bad = compare(t1_reports[0].metrics["_out_dir"],
                  t1_reports[1].metrics["_out_dir"])
    saw1 = _run("saw-curves", tmp_path_factory, "det1")
    saw2 = _run("saw-curves", tmp_path_factory, "det2")
    bad += compare(saw1.metrics["_out_dir"], saw2.metrics["_out_dir"])
    ok = not bad
    _announce("10 (byte-identical reruns)", ok,
              "resonator-t1 and saw-curves reruns identical"
              + (f"; mismatches: {bad}" if bad else
                 " (report.json compared without wall clock)"))
