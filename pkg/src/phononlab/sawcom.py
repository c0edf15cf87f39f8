"""Frequency-domain coupling-of-modes model of the SAW resonators.

Two complementary descriptions are used. Bragg mirrors are cascades of
identical point reflectors (transfer matrices), which reproduce the closed
COM grating solutions exactly in the uniform limit; the mirror reflection
coefficient and its stopband come from this route. The full resonator
(mirror, gap, transducer, gap, mirror) is assembled from three-port
P-matrices so the transducer's electrical port sees the cavity feedback: the
real part of the total input admittance peaks only at acoustic modes that the
transducer actually couples to, which is what a transmission measurement of
the device resolves.

Conventions: the acoustic ports use wave amplitudes at the section boundary
planes; a grating section of N elements at pitch p spans N*p. The transducer
section is referenced to the design wavelength (pitch lambda0/2), and its
transduction strength is normalized so the isolated-transducer radiation
conductance at synchronism matches the quasi-static value
G_a0 = 8 K^2 f0 N_p^2 C_pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .device import SawDesign

__all__ = [
    "mirror_reflection",
    "stopband",
    "idt_admittance",
    "cavity_response",
    "cavity_admittance",
    "emission_rate_profile",
    "CavityResponse",
]

Z0 = 50.0  # feedline impedance for the electrical transmission (ohm)


# ---------------------------------------------------------------------------
# Mirror gratings: transfer-matrix cascade
# ---------------------------------------------------------------------------

def _element_matrix(r: complex) -> np.ndarray:
    t = np.sqrt(1.0 - abs(r) ** 2)
    return np.array([[(t * t - r * r) / t, r / t],
                     [-r / t, 1.0 / t]], dtype=complex)


def _propagation(f: np.ndarray, length: float, v: float,
                 loss: float = 0.0) -> np.ndarray:
    k = 2.0 * np.pi * f / v - 1j * loss
    out = np.zeros(f.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(1j * k * length)
    out[..., 1, 1] = np.exp(-1j * k * length)
    return out


def _matpow(m: np.ndarray, n: int) -> np.ndarray:
    result = np.broadcast_to(np.eye(2, dtype=complex), m.shape).copy()
    base = m.copy()
    while n > 0:
        if n & 1:
            result = base @ result
        base = base @ base
        n >>= 1
    return result


def _grating_transfer(f: np.ndarray, r: complex, pitch: float, lines: int,
                      v: float, loss: float = 0.0) -> np.ndarray:
    elem = _element_matrix(r)
    prop = _propagation(f, pitch, v, loss)
    if lines == 1:
        return np.broadcast_to(elem, f.shape + (2, 2)).copy()
    cell = prop @ elem
    return elem @ _matpow(cell, lines - 1)


def mirror_reflection(design: SawDesign, f: Sequence[float] | float) -> np.ndarray:
    """Complex reflection coefficient of one Bragg mirror (|Gamma| <= 1)."""
    f = np.atleast_1d(np.asarray(f, dtype=float))
    if np.any(f <= 0):
        raise ValueError("frequencies must be > 0")
    t = _grating_transfer(f, design.r_mirror, design.mirror_pitch,
                          design.mirror_lines, design.sound_speed,
                          design.propagation_loss)
    return -t[..., 1, 0] / t[..., 1, 1]


def stopband(design: SawDesign, threshold: float = 0.9,
             n_points: int = 4001) -> tuple[float, float]:
    """Contiguous interval around the mirror center with |Gamma| > threshold."""
    f0 = design.f0_mirror
    f = np.linspace(0.9 * f0, 1.1 * f0, n_points)
    mag = np.abs(mirror_reflection(design, f))
    above = mag > threshold
    center = n_points // 2
    if not above[center]:
        idx = np.flatnonzero(above)
        if idx.size == 0:
            raise ValueError("mirror never reaches the stopband threshold")
        center = int(idx[np.argmin(np.abs(idx - center))])
    lo = center
    while lo > 0 and above[lo - 1]:
        lo -= 1
    hi = center
    while hi < n_points - 1 and above[hi + 1]:
        hi += 1
    return float(f[lo]), float(f[hi])


# ---------------------------------------------------------------------------
# Isolated transducer admittance (quasi-static closed form)
# ---------------------------------------------------------------------------

def _ga0(design: SawDesign) -> float:
    return (8.0 * design.k2 * design.f0_idt
            * design.idt_finger_pairs ** 2 * design.cap_per_pair)


def idt_admittance(design: SawDesign, f: Sequence[float] | float) -> np.ndarray:
    """Electrical admittance of the isolated transducer.

    G_a(f) = G_a0 (sin X / X)^2 with X = N_p pi (f - f0)/f0, the acoustic
    susceptance is its Hilbert pair (sin 2X - 2X)/(2 X^2), and the static
    capacitance N_p C_pair adds i omega C_T.
    """
    f = np.atleast_1d(np.asarray(f, dtype=float))
    if np.any(f <= 0):
        raise ValueError("frequencies must be > 0")
    f0 = design.f0_idt
    x = design.idt_finger_pairs * np.pi * (f - f0) / f0
    x = np.where(np.abs(x) < 1e-12, 1e-12, x)
    g_a0 = _ga0(design)
    g_a = g_a0 * (np.sin(x) / x) ** 2
    b_a = g_a0 * (np.sin(2.0 * x) - 2.0 * x) / (2.0 * x ** 2)
    c_t = design.idt_finger_pairs * design.cap_per_pair
    return g_a + 1j * (b_a + 2.0 * np.pi * f * c_t)


# ---------------------------------------------------------------------------
# P-matrix sections and cascade
# ---------------------------------------------------------------------------

def _com_section(f: np.ndarray, v: float, r_elem: complex, pitch: float,
                 n_elem: int, a1: complex = 0.0) -> dict[str, np.ndarray]:
    """Uniform COM section: closed-form P-matrix over the frequency grid.

    With zero transduction (a1 = 0) this is an ordinary reflective grating;
    with a1 set it is a transducer, and p33 is its acoustic admittance.
    """
    lam = 2.0 * pitch
    f0 = v / lam
    kc = 2.0 * np.pi / lam
    length = n_elem * pitch
    c12 = -np.conj(r_elem) / pitch
    delta = 2.0 * np.pi * (f - f0) / v
    s = np.sqrt(delta ** 2 - abs(c12) ** 2 + 0j)
    s_l = s * length
    den = s * np.cos(s_l) + 1j * delta * np.sin(s_l)
    p11 = -np.conj(c12) * np.sin(s_l) / den
    p22 = c12 * np.sin(s_l) * np.exp(-2j * kc * length) / den
    p12 = s * np.exp(-1j * kc * length) / den
    zero = np.zeros_like(p11)
    out = {"p11": p11, "p12": p12, "p21": p12, "p22": p22,
           "p13": zero, "p23": zero, "p31": zero, "p32": zero, "p33": zero}
    if a1 != 0.0:
        d2 = delta ** 2 - abs(c12) ** 2
        k1 = (np.conj(a1) * c12 - 1j * delta * a1) / d2
        k2 = (a1 * np.conj(c12) + 1j * delta * np.conj(a1)) / d2
        p31 = (2.0 * np.conj(a1) * np.sin(s_l)
               - 2.0 * s * k2 * (np.cos(s_l) - 1.0)) / den
        p32 = (-2.0 * a1 * np.sin(s_l)
               - 2.0 * s * k1 * (np.cos(s_l) - 1.0)) / den * np.exp(-1j * kc * length)
        p33 = (-k2 * p32 * np.exp(1j * kc * length) - k1 * p31
               + 2.0 * length * (np.conj(a1) * k1 - a1 * k2))
        out.update({"p31": p31, "p32": p32, "p13": -0.5 * p31,
                    "p23": -0.5 * p32, "p33": p33})
    return out


def _gap_section(f: np.ndarray, v: float, length: float,
                 loss: float = 0.0) -> dict[str, np.ndarray]:
    ph = np.exp(-1j * (2.0 * np.pi * f / v - 1j * loss) * length)
    zero = np.zeros_like(ph)
    return {"p11": zero, "p12": ph, "p21": ph, "p22": zero,
            "p13": zero, "p23": zero, "p31": zero, "p32": zero, "p33": zero}


def _concat(pl: dict, pr: dict) -> dict:
    d = 1.0 - pl["p22"] * pr["p11"]
    out: dict[str, np.ndarray] = {}
    out["p11"] = pl["p11"] + pr["p11"] * pl["p12"] ** 2 / d
    out["p12"] = pr["p12"] * pl["p12"] / d
    out["p21"] = out["p12"]
    out["p22"] = pr["p22"] + pl["p22"] * pr["p12"] ** 2 / d
    out["p13"] = pl["p13"] + pl["p12"] * (pr["p11"] * pl["p23"] + pr["p13"]) / d
    out["p31"] = -2.0 * out["p13"]
    out["p23"] = pr["p23"] + pr["p12"] * (pr["p13"] * pl["p22"] + pl["p23"]) / d
    out["p32"] = -2.0 * out["p23"]
    out["p33"] = (pl["p33"] + pr["p33"]
                  - 2.0 * pl["p23"] * (pr["p11"] * pl["p23"] + pr["p13"]) / d
                  - 2.0 * pr["p13"] * (pl["p22"] * pr["p13"] + pl["p23"]) / d)
    return out


def _transduction_scale(design: SawDesign) -> float:
    """Scale a1 so the isolated transducer hits the quasi-static G_a0."""
    f0 = np.asarray([design.f0_idt])
    probe = _com_section(f0, design.sound_speed, design.r_idt,
                         design.wavelength / 2.0, 2 * design.idt_finger_pairs,
                         a1=1.0)
    g_unit = float(np.real(probe["p33"][0]))
    return float(np.sqrt(_ga0(design) / g_unit))


def _resonator_pmatrix(design: SawDesign, f: np.ndarray) -> dict[str, np.ndarray]:
    v = design.sound_speed
    idt_len = design.idt_finger_pairs * design.wavelength
    gap = 0.5 * (design.cavity_length - idt_len)
    if gap <= 0:
        raise ValueError(f"saw {design.name}: transducer longer than the cavity")
    a1 = _transduction_scale(design)
    mirror = _com_section(f, v, design.r_mirror, design.mirror_pitch,
                          design.mirror_lines)
    idt = _com_section(f, v, design.r_idt, design.wavelength / 2.0,
                       2 * design.idt_finger_pairs, a1=a1)
    gap_s = _gap_section(f, v, gap, design.propagation_loss)
    total = _concat(mirror, gap_s)
    total = _concat(total, idt)
    total = _concat(total, gap_s)
    total = _concat(total, mirror)
    return total


def cavity_admittance(design: SawDesign, f: Sequence[float]) -> np.ndarray:
    """Electrical input admittance of the transducer inside its cavity."""
    f = np.atleast_1d(np.asarray(f, dtype=float))
    p = _resonator_pmatrix(design, f)
    c_t = design.idt_finger_pairs * design.cap_per_pair
    return p["p33"] + 2j * np.pi * f * c_t


@dataclass
class CavityResponse:
    frequencies: np.ndarray
    s21: np.ndarray                 # electrical transmission magnitude
    admittance: np.ndarray          # complex input admittance on the grid
    mirror_gamma: np.ndarray        # |Gamma| of one mirror on the same grid
    modes: list[float] = field(default_factory=list)
    stopband: tuple[float, float] = (0.0, 0.0)

    @property
    def fsr(self) -> float | None:
        if len(self.modes) < 2:
            return None
        return float(np.mean(np.diff(sorted(self.modes))))


def _electrical_s21(y: np.ndarray) -> np.ndarray:
    """|S21| of the resonator admittance inserted in series in a Z0 line."""
    w = 2.0 * Z0 * y
    return np.abs(w / (1.0 + w))


def cavity_response(design: SawDesign, f: Sequence[float],
                    mode_rel_height: float = 0.1) -> CavityResponse:
    """Resonator transmission curve and the confined-mode list.

    Modes are the local maxima of the radiation conductance Re Y(f) inside the
    mirror stopband (an internal fine grid plus parabolic refinement locates
    them independently of the caller's plotting grid). Only modes reaching
    ``mode_rel_height`` of the strongest in-band peak are reported, which is
    what a transmission measurement of the device resolves.
    """
    f = np.atleast_1d(np.asarray(f, dtype=float))
    y = cavity_admittance(design, f)
    gamma = np.abs(mirror_reflection(design, f))
    band = stopband(design)

    margin = 0.02 * (band[1] - band[0])
    f_fine = np.linspace(band[0] - margin, band[1] + margin, 60001)
    g_fine = np.real(cavity_admittance(design, f_fine))
    inband = (f_fine >= band[0]) & (f_fine <= band[1])
    peak_floor = mode_rel_height * max(g_fine[inband].max(), 1e-30)
    modes: list[float] = []
    for i in range(1, f_fine.size - 1):
        if not inband[i]:
            continue
        if g_fine[i] >= g_fine[i - 1] and g_fine[i] >= g_fine[i + 1] \
                and g_fine[i] > peak_floor:
            # Parabolic refinement on log-conductance.
            y0, y1, y2 = np.log(g_fine[i - 1:i + 2])
            denom = y0 - 2.0 * y1 + y2
            shift = 0.5 * (y0 - y2) / denom if abs(denom) > 1e-30 else 0.0
            freq = f_fine[i] + shift * (f_fine[1] - f_fine[0])
            if modes and abs(freq - modes[-1]) < 2e6:
                continue
            modes.append(float(freq))
    return CavityResponse(frequencies=f, s21=_electrical_s21(y),
                          admittance=y, mirror_gamma=gamma,
                          modes=modes, stopband=band)


def emission_rate_profile(design: SawDesign, f: Sequence[float]) -> np.ndarray:
    """Relative qubit decay rate vs frequency, max-normalized to 1.

    Proportional to the transducer radiation conductance weighted by the
    fraction of emitted power not returned by the mirrors, 1 - |Gamma|^2.
    """
    f = np.asarray(f, dtype=float)
    g_a = np.real(idt_admittance(design, f))
    gamma = np.abs(mirror_reflection(design, f))
    profile = g_a * (1.0 - gamma ** 2)
    peak = profile.max()
    if peak <= 0:
        return np.zeros_like(profile)
    return profile / peak
