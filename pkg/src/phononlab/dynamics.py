"""Time-dependent Hamiltonian assembly and Lindblad master-equation integration.

The simulator works in a rotating frame at each node's resonator frequency
(or optionally the lab frame), with a fixed-step classical RK4 integrator on
the density matrix. The right-hand side exploits the structure of the model:

* the Hamiltonian diagonal and every dissipator anticommutator act
  elementwise on rho through a cached complex factor matrix,
* the exchange couplings are sparse, and [H, rho] = H rho - (H rho)^dag for
  Hermitian rho needs one sparse-dense product per active coupling,
* collapse operators are single-band ladders, so L rho L^dag is a weighted
  sub-block gather/scatter rather than a matrix product.

Populations are frame-independent (the frame transformation is diagonal in
the product Fock basis), which the frame-invariance test exercises directly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from . import hilbert
from .device import DeviceParams, NodeParams
from .hilbert import HilbertLayout
from .pulses import (
    CouplerWindow,
    DisplacementPulse,
    FrequencyRamp,
    PulseSchedule,
    Segment,
    XYPulse,
)

__all__ = ["Simulator", "Trajectory", "chevron"]

TWO_PI = 2.0 * np.pi


@dataclass
class Trajectory:
    """Observables recorded along one master-equation integration."""

    times: np.ndarray                  # (T,)
    populations: np.ndarray            # (T, n_joint) joint qubit populations
    population_labels: tuple[str, ...]
    qubit_pops: np.ndarray             # (T, n_nodes, 3)
    mean_phonons: np.ndarray           # (T, n_nodes)
    final_state: np.ndarray
    final_time: float
    checkpoints: dict[float, np.ndarray] = field(default_factory=dict)
    max_top_fock: float = 0.0
    max_trace_drift: float = 0.0

    def joint(self, label: str) -> np.ndarray:
        return self.populations[:, self.population_labels.index(label)]

    def excited_population(self, node_index: int) -> np.ndarray:
        return self.qubit_pops[:, node_index, 1]


class _Kick:
    """Instantaneous unitary applied between integration intervals."""

    def __init__(self, time: float, order: int, unitary: np.ndarray):
        self.time = time
        self.order = order
        self.unitary = unitary


class _Drive:
    """Finite-envelope drive term z(t) * Op + conj(z(t)) * Op^dag."""

    def __init__(self, op: sp.csr_matrix, zfun: Callable[[float], complex],
                 t0: float, t1: float):
        self.op = op
        self.zfun = zfun
        self.t0 = t0
        self.t1 = t1


class Simulator:
    """Lindblad dynamics of one or both nodes under a pulse schedule."""

    def __init__(
        self,
        device: DeviceParams,
        nodes: Sequence[str] = ("A", "B"),
        qubit_levels: int = 3,
        resonator_levels: int = 6,
        frame: str = "rotating",
        dephasing: str = "number",
        swap_decay_rate: Callable[[str, float], float] | None = None,
    ):
        """``swap_decay_rate(node_name, f_qubit_hz) -> rate`` optionally
        replaces the constant swap-context relaxation rate with a
        frequency-dependent one (e.g. derived from the transducer emission
        profile of the sawcom module) while a node's coupler is active."""
        nodes = tuple(n.upper() for n in nodes)
        if nodes not in (("A",), ("B",), ("A", "B")):
            raise ValueError(f"nodes must be ('A',), ('B',) or ('A','B'), got {nodes}")
        if frame not in ("rotating", "lab"):
            raise ValueError(f"unknown frame {frame!r}")
        if dephasing not in ("number", "excited"):
            raise ValueError(f"unknown dephasing model {dephasing!r}")
        self.device = device
        self.nodes = nodes
        self.node_params: tuple[NodeParams, ...] = tuple(device.node(n) for n in nodes)
        self.frame = frame
        self.dephasing = dephasing
        self.qubit_levels = qubit_levels
        self.resonator_levels = resonator_levels
        self._swap_decay_rate = swap_decay_rate

        nn = len(nodes)
        self.layout = HilbertLayout(tuple([qubit_levels] * nn + [resonator_levels] * nn))
        self.dim = self.layout.total_dim
        self._occ = [self.layout.occupations(i) for i in range(2 * nn)]

        # Frame frequency per node (applies to its qubit and its resonator).
        if frame == "rotating":
            self._f_frame = [p.f_resonator for p in self.node_params]
        else:
            self._f_frame = [0.0 for _ in self.node_params]

        self._build_operators()
        self._build_dissipators()
        self._phi_cache: dict = {}

    # -- construction ------------------------------------------------------

    def _node_subsystems(self, i: int) -> tuple[int, int]:
        """(qubit, resonator) subsystem indices of node i in the layout."""
        return i, len(self.nodes) + i

    def _build_operators(self) -> None:
        lay = self.layout
        nn = len(self.nodes)
        occ = self._occ

        self._mask_e = [np.asarray(occ[i] == 1, dtype=float) for i in range(nn)]
        self._mask_f = [np.asarray(occ[i] == 2, dtype=float) for i in range(nn)]
        self._n_res = [np.asarray(occ[nn + i], dtype=float) for i in range(nn)]
        # e + 2f weight: the qubit diagonal responds to the g-e frequency with
        # weight 1 on |e> and 2 on |f> (f tracks 2*f_ge + eta).
        self._qubit_weight = [self._mask_e[i] + 2.0 * self._mask_f[i] for i in range(nn)]

        def embed_csr(op: np.ndarray, subsystem: int) -> sp.csr_matrix:
            return sp.csr_matrix(hilbert.embed(op, subsystem, lay))

        self._couplings: list[dict] = []
        for i, params in enumerate(self.node_params):
            qi, ri = self._node_subsystems(i)
            a = hilbert.destroy(self.resonator_levels)
            s_ge = hilbert.lowering(self.qubit_levels, "ge")
            s_ef = hilbert.lowering(self.qubit_levels, "ef")
            a_full = embed_csr(a, ri)
            ge_full = embed_csr(s_ge, qi)
            ef_full = embed_csr(s_ef, qi)
            exch_ge = (ge_full.conj().T @ a_full)
            exch_ef = (ef_full.conj().T @ a_full)
            self._couplings.append({
                "ge": sp.csr_matrix(exch_ge + exch_ge.conj().T),
                "ef": sp.csr_matrix(exch_ef + exch_ef.conj().T),
                "s_ge_dag": ge_full.conj().T.tocsr(),
                "s_ef_dag": ef_full.conj().T.tocsr(),
                "a_dag": a_full.conj().T.tocsr(),
            })

        self._qq = None
        self._qq_dag = None
        if nn == 2:
            s_ge = hilbert.lowering(self.qubit_levels, "ge")
            ge_a = embed_csr(s_ge, 0)
            ge_b = embed_csr(s_ge, 1)
            self._qq = (ge_a.conj().T @ ge_b).tocsr()
            self._qq_dag = self._qq.conj().T.tocsr()

        # Joint qubit population masks.
        letters = "gef"[: self.qubit_levels]
        labels = []
        index_sets = []
        if nn == 1:
            for k, c in enumerate(letters):
                labels.append(c)
                index_sets.append(np.flatnonzero(occ[0] == k))
        else:
            for ka, ca in enumerate(letters):
                for kb, cb in enumerate(letters):
                    labels.append(ca + cb)
                    index_sets.append(np.flatnonzero((occ[0] == ka) & (occ[1] == kb)))
        self._pop_labels = tuple(labels)
        self._pop_indices = index_sets
        self._qubit_level_indices = [
            [np.flatnonzero(occ[i] == k) for k in range(self.qubit_levels)]
            for i in range(nn)
        ]
        self._top_fock_indices = [
            np.flatnonzero(occ[nn + i] == self.resonator_levels - 1) for i in range(nn)
        ]

    def _stride(self, subsystem: int) -> int:
        return int(np.prod(self.layout.dims[subsystem + 1:], initial=1))

    def _build_dissipators(self) -> None:
        """Ladder index maps and dephasing vectors; rates resolved per context."""
        nn = len(self.nodes)
        occ = self._occ
        self._ladders = []
        for i, params in enumerate(self.node_params):
            qi, ri = self._node_subsystems(i)
            qs, rs = self._stride(qi), self._stride(ri)
            src_e = np.flatnonzero(occ[qi] == 1)
            src_f = np.flatnonzero(occ[qi] == 2)
            src_n = np.flatnonzero(occ[ri] >= 1)
            self._ladders.append({
                "ge": (src_e - qs, src_e, np.ones(src_e.size)),
                "ef": (src_f - qs, src_f, np.ones(src_f.size)),
                "res": (src_n - rs, src_n, np.sqrt(occ[ri][src_n].astype(float))),
            })
        self._deph_vectors = []
        for i, params in enumerate(self.node_params):
            qi, ri = self._node_subsystems(i)
            if self.dephasing == "number":
                vq = occ[qi].astype(float)
            else:
                vq = (occ[qi] == 1).astype(float)
            vr = occ[ri].astype(float)
            self._deph_vectors.append((vq, vr))

    def _ge_relaxation_rate(self, i: int, active: bool, f_qubit: float) -> float:
        params = self.node_params[i]
        if not active:
            return 1.0 / params.t1_qubit
        if self._swap_decay_rate is not None:
            return float(self._swap_decay_rate(self.nodes[i], f_qubit))
        return 1.0 / params.t1_e_during_swap

    def _dissipator_pieces(self, ge_rates: tuple[float, ...], lossless: bool):
        """(K matrix, scatter list) for one dissipation context."""
        key = (ge_rates, lossless)
        if key in self._phi_cache:
            return self._phi_cache[key]
        n = self.dim
        K = np.zeros((n, n))
        scatters = []
        if not lossless:
            diag_loss = np.zeros(n)
            for i, params in enumerate(self.node_params):
                rates = {
                    "ge": ge_rates[i],
                    "ef": 1.0 / params.t1_f_state,
                    "res": 1.0 / params.t1_resonator,
                }
                for kind, rate in rates.items():
                    tgt, src, w = self._ladders[i][kind]
                    m = np.zeros(n)
                    m[src] = w ** 2
                    diag_loss += rate * m
                    scatters.append((np.ix_(tgt, tgt), np.ix_(src, src),
                                     rate * np.outer(w, w)))
                vq, vr = self._deph_vectors[i]
                for v, gphi in ((vq, params.qubit_pure_dephasing_rate),
                                (vr, params.resonator_pure_dephasing_rate)):
                    c2 = 2.0 * gphi
                    K += c2 * (np.outer(v, v) - 0.5 * (v ** 2)[:, None]
                               - 0.5 * (v ** 2)[None, :])
            K -= 0.5 * (diag_loss[:, None] + diag_loss[None, :])
        self._phi_cache[key] = (K, scatters)
        return self._phi_cache[key]

    # -- public interface -----------------------------------------------------

    def collapse_operators(self, swap_active: Sequence[bool] | None = None
                           ) -> list[tuple[np.ndarray, float]]:
        """Dense collapse operators with their rates for the given context.

        With a frequency-dependent swap decay hook installed, the swap-active
        rate is evaluated at the node's resonator frequency (the nominal swap
        point)."""
        if swap_active is None:
            swap_active = tuple(False for _ in self.nodes)
        swap_active = tuple(bool(x) for x in swap_active)
        out = []
        n = self.dim
        for i, params in enumerate(self.node_params):
            rates = {
                "ge": self._ge_relaxation_rate(i, swap_active[i],
                                               params.f_resonator),
                "ef": 1.0 / params.t1_f_state,
                "res": 1.0 / params.t1_resonator,
            }
            for kind, rate in rates.items():
                tgt, src, w = self._ladders[i][kind]
                L = np.zeros((n, n), dtype=complex)
                L[tgt, src] = w
                out.append((L, rate))
            vq, vr = self._deph_vectors[i]
            out.append((np.diag(vq).astype(complex),
                        2.0 * params.qubit_pure_dephasing_rate))
            out.append((np.diag(vr).astype(complex),
                        2.0 * params.resonator_pure_dephasing_rate))
        return out

    def hamiltonian(self, schedule: PulseSchedule, t: float) -> np.ndarray:
        """Dense Hamiltonian (angular units, hbar = 1) at time ``t``."""
        controls = self._resolve_controls(schedule)
        d = self._diag_at(controls, t)
        H = np.diag(d).astype(complex)
        for i in range(len(self.nodes)):
            lam = controls["lam"][i](t)
            if lam != 0.0:
                H += (lam * TWO_PI * self.node_params[i].g_ge) * \
                    self._couplings[i]["ge"].toarray()
                H += (lam * TWO_PI * self.node_params[i].g_ef) * \
                    self._couplings[i]["ef"].toarray()
        if self._qq is not None:
            z = self._qq_coefficient(t)
            P = self._qq.toarray()
            H += z * P + np.conj(z) * P.conj().T
        for drv in controls["drives"]:
            if drv.t0 <= t <= drv.t1:
                z = drv.zfun(t)
                P = drv.op.toarray()
                H += z * P + np.conj(z) * P.conj().T
        assert np.max(np.abs(H - H.conj().T)) < 1e-9, "non-Hermitian assembly"
        return H

    def ground_state(self) -> np.ndarray:
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        rho[0, 0] = 1.0
        return rho

    def basis_ket(self, qubits: Sequence[int], phonons: Sequence[int]) -> np.ndarray:
        idx = self.layout.basis_index(tuple(qubits) + tuple(phonons))
        ket = np.zeros(self.dim, dtype=complex)
        ket[idx] = 1.0
        return ket

    def reduce_to_resonators(self, rho: np.ndarray) -> np.ndarray:
        nn = len(self.nodes)
        return hilbert.partial_trace(rho, range(nn, 2 * nn), self.layout)

    # -- control resolution ---------------------------------------------------

    def _resolve_controls(self, schedule: PulseSchedule) -> dict:
        nn = len(self.nodes)
        f_pts: list[tuple[list, list]] = [([0.0], [p.f_qubit_idle])
                                          for p in self.node_params]
        lam_pts: list[tuple[list, list]] = [([0.0], [0.0]) for _ in range(nn)]
        kicks: list[_Kick] = []
        drives: list[_Drive] = []
        order = 0

        for seg in sorted(schedule.segments, key=lambda s: (s.t0, s.channel)):
            label = seg.channel[1]  # QA-XY / GA / DA etc: node letter is index 1
            if label not in self.nodes:
                raise ValueError(
                    f"schedule touches node {label} but simulator covers {self.nodes}")
            i = self.nodes.index(label)
            payload = seg.payload
            if isinstance(payload, FrequencyRamp):
                ts, fs = f_pts[i]
                if seg.t0 > ts[-1]:
                    ts.append(seg.t0)
                    fs.append(fs[-1])
                ts.append(seg.t1 if seg.duration > 0 else seg.t0 + 1e-15)
                fs.append(payload.f_target)
            elif isinstance(payload, CouplerWindow):
                ts, vs = lam_pts[i]
                r = payload.rise
                if seg.duration >= 2 * r:
                    pts = [(seg.t0, 0.0), (seg.t0 + r, payload.amplitude),
                           (seg.t1 - r, payload.amplitude), (seg.t1, 0.0)]
                else:
                    peak = payload.amplitude * (seg.duration / 2.0) / r
                    pts = [(seg.t0, 0.0), ((seg.t0 + seg.t1) / 2, peak), (seg.t1, 0.0)]
                for tt, vv in pts:
                    ts.append(tt)
                    vs.append(vv)
            elif isinstance(payload, XYPulse):
                if payload.shape == "instant":
                    kicks.append(_Kick(seg.t0, order, self._xy_unitary(i, payload)))
                    order += 1
                else:
                    drives.append(self._xy_drive(i, payload, seg, f_pts[i]))
            elif isinstance(payload, DisplacementPulse):
                if payload.shape == "instant":
                    kicks.append(_Kick(seg.t0, order,
                                       self._displacement_unitary(i, payload.alpha)))
                    order += 1
                else:
                    drives.append(self._displacement_drive(i, payload, seg))
            else:  # pragma: no cover - payload types are closed
                raise TypeError(f"unhandled payload {payload!r}")

        horizon = max(schedule.duration, 1e-12)
        fge = []
        lam = []
        for i in range(nn):
            ts, fs = np.asarray(f_pts[i][0]), np.asarray(f_pts[i][1])
            fge.append(lambda t, ts=ts, fs=fs: float(np.interp(t, ts, fs)))
            ts2, vs2 = np.asarray(lam_pts[i][0]), np.asarray(lam_pts[i][1])
            lam.append(lambda t, ts=ts2, vs=vs2: float(np.interp(t, ts, vs)))
        breakpoints = {0.0, horizon}
        for ts, fs in f_pts:
            breakpoints.update(ts)
        for ts, vs in lam_pts:
            breakpoints.update(ts)
        for k in kicks:
            breakpoints.add(k.time)
        for d in drives:
            breakpoints.update((d.t0, d.t1))
        return {
            "fge": fge, "lam": lam, "kicks": kicks, "drives": drives,
            "breakpoints": sorted(b for b in breakpoints if 0.0 <= b <= horizon),
            "horizon": horizon,
            "f_pts": f_pts, "lam_pts": lam_pts,
        }

    def _xy_unitary(self, i: int, pulse: XYPulse) -> np.ndarray:
        q = self.qubit_levels
        lo = 0 if pulse.transition == "ge" else 1
        gen = np.zeros((q, q), dtype=complex)
        gen[lo + 1, lo] = np.exp(-1j * pulse.phase)
        gen[lo, lo + 1] = np.exp(1j * pulse.phase)
        vals, vecs = np.linalg.eigh(gen)
        u_local = (vecs * np.exp(-1j * pulse.angle / 2.0 * vals)) @ vecs.conj().T
        return hilbert.embed(u_local, i, self.layout)

    def _displacement_unitary(self, i: int, alpha: complex) -> np.ndarray:
        d_local = hilbert.displacement_operator(alpha, self.resonator_levels)
        return hilbert.embed(d_local, len(self.nodes) + i, self.layout)

    def _gaussian_envelope(self, area: float, sigma: float, t0: float, t1: float):
        tc = 0.5 * (t0 + t1)
        span = np.sqrt(2 * np.pi) * sigma * 0.9973  # +-3 sigma truncation
        peak = area / span

        def env(t: float) -> float:
            return peak * np.exp(-0.5 * ((t - tc) / sigma) ** 2)

        return env, tc

    def _xy_drive(self, i: int, pulse: XYPulse, seg: Segment, f_pts) -> _Drive:
        t0, t1 = seg.t0, seg.t1 if seg.duration > 0 else seg.t0 + 6 * pulse.sigma
        env, tc = self._gaussian_envelope(pulse.angle, pulse.sigma, t0, t1)
        ts, fs = np.asarray(f_pts[0]), np.asarray(f_pts[1])
        f_at = float(np.interp(tc, ts, fs))
        if pulse.transition == "ge":
            detune = TWO_PI * (f_at - self._f_frame[i])
            op = self._couplings[i]["s_ge_dag"]
        else:
            params = self.node_params[i]
            detune = TWO_PI * (f_at + params.anharmonicity - self._f_frame[i])
            op = self._couplings[i]["s_ef_dag"]

        def zfun(t: float, env=env, detune=detune, tc=tc, phase=pulse.phase) -> complex:
            return 0.5 * env(t) * np.exp(-1j * (detune * (t - tc) + phase))

        return _Drive(op, zfun, t0, t1)

    def _displacement_drive(self, i: int, pulse: DisplacementPulse,
                            seg: Segment) -> _Drive:
        t0 = seg.t0
        t1 = seg.t1 if seg.duration > 0 else seg.t0 + 6 * pulse.sigma
        env, tc = self._gaussian_envelope(1.0, pulse.sigma, t0, t1)
        detune = TWO_PI * (self.node_params[i].f_resonator - self._f_frame[i])

        def zfun(t: float, env=env, alpha=pulse.alpha, detune=detune, tc=tc) -> complex:
            return 1j * alpha * env(t) * np.exp(-1j * detune * (t - tc))

        return _Drive(self._couplings[i]["a_dag"], zfun, t0, t1)

    def _qq_coefficient(self, t: float) -> complex:
        delta = TWO_PI * (self._f_frame[0] - self._f_frame[1]) if len(self.nodes) == 2 else 0.0
        return TWO_PI * self.device.g_qubit_qubit * np.exp(1j * delta * t)

    def _diag_at(self, controls: dict, t: float) -> np.ndarray:
        d = np.zeros(self.dim)
        for i, params in enumerate(self.node_params):
            f = controls["fge"][i](t)
            d += TWO_PI * (f - self._f_frame[i]) * self._qubit_weight[i]
            d += TWO_PI * params.anharmonicity * self._mask_f[i]
            d += TWO_PI * (params.f_resonator - self._f_frame[i]) * self._n_res[i]
        return d

    # -- integration -----------------------------------------------------------

    def evolve(
        self,
        rho0: np.ndarray,
        schedule: PulseSchedule,
        dt_max: float = 5e-11,
        record_times: Sequence[float] | None = None,
        checkpoint_times: Sequence[float] = (),
        lossless: bool = False,
        validate: bool = False,
    ) -> Trajectory:
        """Integrate d rho/dt = -i[H(t), rho] + dissipators over the schedule."""
        if rho0.shape != (self.dim, self.dim):
            raise ValueError(f"rho0 shape {rho0.shape} does not match dim {self.dim}")
        if dt_max <= 0:
            raise ValueError("dt_max must be > 0")
        controls = self._resolve_controls(schedule)
        horizon = controls["horizon"]
        if record_times is None:
            record_times = np.linspace(0.0, horizon, 201)
        record_times = np.asarray(sorted(record_times), dtype=float)
        if record_times.size and (record_times[0] < -1e-15
                                  or record_times[-1] > horizon + 1e-12):
            raise ValueError("record times outside the schedule horizon")
        checkpoint_times = sorted(float(t) for t in checkpoint_times)

        stops = sorted(set(controls["breakpoints"])
                       | set(record_times.tolist())
                       | set(checkpoint_times))
        if stops[0] > 0.0:
            stops.insert(0, 0.0)
        if stops[-1] < horizon:
            stops.append(horizon)

        kicks = sorted(controls["kicks"], key=lambda k: (k.time, k.order))
        kick_pos = 0

        rho = np.array(rho0, dtype=complex)
        records = {"t": [], "pops": [], "qpops": [], "phonons": []}
        checkpoints: dict[float, np.ndarray] = {}
        max_top = 0.0
        tr0 = float(np.trace(rho).real)
        max_drift = 0.0
        record_set = set(np.round(record_times, 15).tolist())
        checkpoint_set = set(np.round(checkpoint_times, 15).tolist())

        def apply_kicks_at(t: float, rho: np.ndarray) -> np.ndarray:
            nonlocal kick_pos
            while kick_pos < len(kicks) and kicks[kick_pos].time <= t + 1e-15:
                U = kicks[kick_pos].unitary
                rho = U @ rho @ U.conj().T
                kick_pos += 1
            return rho

        def take_record(t: float, rho: np.ndarray):
            diag = np.real(np.diag(rho))
            records["t"].append(t)
            records["pops"].append([diag[idx].sum() for idx in self._pop_indices])
            records["qpops"].append(
                [[diag[idx].sum() for idx in levels]
                 for levels in self._qubit_level_indices])
            records["phonons"].append(
                [float(self._n_res[i] @ diag) for i in range(len(self.nodes))])

        rho = apply_kicks_at(0.0, rho)
        t_now = stops[0]
        if round(t_now, 15) in record_set:
            take_record(t_now, rho)
        if round(t_now, 15) in checkpoint_set:
            checkpoints[t_now] = rho.copy()

        for t_next in stops[1:]:
            span = t_next - t_now
            if span > 1e-18:
                rho = self._integrate_interval(rho, controls, t_now, t_next,
                                               dt_max, lossless)
            t_now = t_next
            rho = apply_kicks_at(t_now, rho)
            diag = np.real(np.diag(rho))
            for i in range(len(self.nodes)):
                max_top = max(max_top, float(diag[self._top_fock_indices[i]].sum()))
            max_drift = max(max_drift, abs(float(np.trace(rho).real) - tr0))
            if validate:
                hilbert.assert_density_matrix(rho, context=f"t={t_now:.3e}")
            if round(t_now, 15) in record_set:
                take_record(t_now, rho)
            if round(t_now, 15) in checkpoint_set:
                checkpoints[t_now] = rho.copy()

        if max_top > 1e-3:
            warnings.warn(
                f"top Fock level reached population {max_top:.2e}; "
                "resonator truncation may be too small", stacklevel=2)

        pops = np.asarray(records["pops"])
        sums = pops.sum(axis=1)
        if pops.size and np.max(np.abs(sums - sums[0])) > 1e-6:
            warnings.warn("joint population sum drifted by more than 1e-6",
                          stacklevel=2)
        return Trajectory(
            times=np.asarray(records["t"]),
            populations=pops,
            population_labels=self._pop_labels,
            qubit_pops=np.asarray(records["qpops"]),
            mean_phonons=np.asarray(records["phonons"]),
            final_state=rho,
            final_time=t_now,
            checkpoints=checkpoints,
            max_top_fock=max_top,
            max_trace_drift=max_drift,
        )

    def _integrate_interval(self, rho, controls, t0, t1, dt_max, lossless):
        nn = len(self.nodes)
        # Every control is linear inside an interval (all breakpoints are stops).
        f0 = [controls["fge"][i](t0) for i in range(nn)]
        f1 = [controls["fge"][i](t1) for i in range(nn)]
        lam0 = [controls["lam"][i](t0) for i in range(nn)]
        lam_mid = [controls["lam"][i]((t0 + t1) / 2) for i in range(nn)]
        lam1 = [controls["lam"][i](t1) for i in range(nn)]
        span = t1 - t0
        f_slope = [(b - a) / span for a, b in zip(f0, f1)]
        lam_slope = [(b - a) / span for a, b in zip(lam0, lam1)]
        swap_active = tuple(
            (abs(a) > 1e-12 or abs(m) > 1e-12 or abs(b) > 1e-12)
            for a, m, b in zip(lam0, lam_mid, lam1))
        if lossless:
            ge_rates = tuple(0.0 for _ in range(nn))
        else:
            # Rate resolved at the interval's midpoint frequency (rounded so
            # the context cache stays small for the built-in constant rates).
            ge_rates = tuple(
                round(self._ge_relaxation_rate(
                    i, swap_active[i],
                    controls["fge"][i](0.5 * (t0 + t1))), 6)
                for i in range(nn))
        K, scatters = self._dissipator_pieces(ge_rates, lossless)

        d0 = self._diag_at(controls, t0)
        ramping = any(abs(s) > 1e-6 for s in f_slope)
        if ramping:
            d_slope = np.zeros(self.dim)
            for i in range(nn):
                d_slope += TWO_PI * f_slope[i] * self._qubit_weight[i]
            phi_static = None
        else:
            d_slope = None
            phi_static = K - 1j * (d0[:, None] - d0[None, :])

        active_drives = [d for d in controls["drives"]
                         if d.t0 < t1 - 1e-15 and d.t1 > t0 + 1e-15]
        coupling_terms = []
        for i in range(nn):
            if abs(lam0[i]) > 1e-12 or abs(lam1[i]) > 1e-12 or abs(lam_mid[i]) > 1e-12:
                node = self.node_params[i]
                # ge and ef exchange share the coupler gate; pre-combine them.
                M = (TWO_PI * node.g_ge) * self._couplings[i]["ge"] \
                    + (TWO_PI * node.g_ef) * self._couplings[i]["ef"]
                coupling_terms.append((M.tocsr(), lam0[i], lam_slope[i]))
        qq, qq_dag = self._qq, self._qq_dag

        def offdiag(t: float):
            """Sparse off-diagonal Hamiltonian at time t (upper + lower parts)."""
            H = None
            for M, l0, ls in coupling_terms:
                term = (l0 + ls * (t - t0)) * M
                H = term if H is None else H + term
            if qq is not None:
                z = self._qq_coefficient(t)
                term = z * qq + np.conj(z) * qq_dag
                H = term if H is None else H + term
            for drv in active_drives:
                z = drv.zfun(t)
                term = z * drv.op + np.conj(z) * drv.op.conj().T
                H = term if H is None else H + term
            return H

        def rhs(t: float, r: np.ndarray) -> np.ndarray:
            if phi_static is None:
                d = d0 + d_slope * (t - t0)
                phi = K - 1j * (d[:, None] - d[None, :])
            else:
                phi = phi_static
            out = np.multiply(phi, r)
            H = offdiag(t)
            if H is not None:
                tmp = H @ r
                tmp_dag = tmp.conj().T
                np.subtract(tmp, tmp_dag, out=tmp)
                np.multiply(tmp, -1j, out=tmp)
                out += tmp
            if not lossless:
                for ix_tgt, ix_src, rate_w2 in scatters:
                    out[ix_tgt] += rate_w2 * r[ix_src]
            return out

        steps = max(int(np.ceil(span / dt_max)), 1)
        dt = span / steps
        t = t0
        y = np.empty_like(rho)
        for _ in range(steps):
            k1 = rhs(t, rho)
            np.multiply(k1, 0.5 * dt, out=y)
            y += rho
            k2 = rhs(t + 0.5 * dt, y)
            np.multiply(k2, 0.5 * dt, out=y)
            y += rho
            k3 = rhs(t + 0.5 * dt, y)
            np.multiply(k3, dt, out=y)
            y += rho
            k4 = rhs(t + dt, y)
            # rho += dt/6 (k1 + 2 k2 + 2 k3 + k4), reusing the k buffers.
            k2 += k3
            k1 += k4
            np.multiply(k2, 2.0, out=k2)
            k1 += k2
            np.multiply(k1, dt / 6.0, out=k1)
            rho = rho + k1
            t += dt
        return 0.5 * (rho + rho.conj().T)


def chevron(
    device: DeviceParams,
    node: str,
    detunings: Sequence[float],
    times: Sequence[float],
    resonator_levels: int = 3,
    dt_max: float = 5e-11,
    pulses=None,
) -> np.ndarray:
    """Qubit excited-state population map over (detuning, interaction time).

    Single-node simulation: pi pulse, 2 ns frequency move to f_res + detuning,
    then the coupler held open at full amplitude. Returned array has one row
    per detuning.
    """
    from .device import PulseDefaults

    pulses = pulses or PulseDefaults()
    detunings = np.asarray(detunings, dtype=float)
    times = np.asarray(times, dtype=float)
    if detunings.size == 0 or times.size == 0:
        raise ValueError("detuning and time grids must be nonempty")
    sim = Simulator(device, nodes=(node,), resonator_levels=resonator_levels)
    params = device.node(node)
    t_on = pulses.z_ramp
    out = np.zeros((detunings.size, times.size))
    for row, delta in enumerate(detunings):
        segs = (
            Segment(f"Q{node}-XY", 0.0, 0.0, XYPulse("ge", np.pi)),
            Segment(f"Q{node}-Z", 0.0, pulses.z_ramp,
                    FrequencyRamp(params.f_resonator + delta)),
            Segment(f"G{node}", t_on, float(times[-1]) + pulses.coupler_rise,
                    CouplerWindow(1.0, pulses.coupler_rise)),
        )
        schedule = PulseSchedule(segs, measure_time=t_on + times[-1] + pulses.coupler_rise)
        traj = sim.evolve(sim.ground_state(), schedule, dt_max=dt_max,
                          record_times=t_on + times)
        out[row] = traj.excited_population(0)
    return out
