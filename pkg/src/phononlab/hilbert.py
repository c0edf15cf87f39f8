"""Composite Hilbert-space construction and operator algebra.

The simulator works with two three-level qubits (levels g, e, f) and two
truncated bosonic modes, in the fixed subsystem order (QA, QB, RA, RB).
Operators are dense complex numpy arrays; everything here is a pure function
of its inputs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "HilbertLayout",
    "build_space",
    "embed",
    "destroy",
    "number_op",
    "lowering",
    "displacement_operator",
    "coherent_state",
    "fock",
    "partial_trace",
    "assert_density_matrix",
    "is_density_matrix",
]

# Tolerances for density-matrix validity checks.
HERMITICITY_ATOL = 1e-10
TRACE_ATOL = 1e-9
EIGENVALUE_ATOL = 1e-9


@dataclass(frozen=True)
class HilbertLayout:
    """Ordered subsystem dimensions of a composite space.

    ``dims`` follows the global order (QA, QB, RA, RB); reduced layouts for
    single-node simulations keep the same qubits-then-resonators ordering.
    """

    dims: tuple[int, ...]

    def __post_init__(self):
        if any(d < 2 for d in self.dims):
            raise ValueError(f"every subsystem dim must be >= 2, got {self.dims}")

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    def occupations(self, subsystem: int) -> np.ndarray:
        """Local basis index of ``subsystem`` for each composite basis state."""
        if not 0 <= subsystem < len(self.dims):
            raise IndexError(f"subsystem {subsystem} out of range for {self.dims}")
        grids = np.indices(self.dims).reshape(len(self.dims), -1)
        return grids[subsystem]

    def basis_index(self, locals_: Sequence[int]) -> int:
        """Composite index of the product basis state with the given local indices."""
        if len(locals_) != len(self.dims):
            raise ValueError("one local index per subsystem required")
        return int(np.ravel_multi_index(tuple(locals_), self.dims))

    def reduce(self, keep: Iterable[int]) -> "HilbertLayout":
        keep = sorted(set(keep))
        return HilbertLayout(tuple(self.dims[i] for i in keep))


def build_space(qubit_levels: int = 3, resonator_levels: int = 6) -> HilbertLayout:
    """Layout for the full two-node system: (QA, QB, RA, RB)."""
    if qubit_levels < 3:
        raise ValueError(f"qubit_levels must be >= 3, got {qubit_levels}")
    if resonator_levels < 2:
        raise ValueError(f"resonator_levels must be >= 2, got {resonator_levels}")
    return HilbertLayout((qubit_levels, qubit_levels, resonator_levels, resonator_levels))


def embed(local: np.ndarray, subsystem: int, layout: HilbertLayout) -> np.ndarray:
    """Lift a single-subsystem operator to the composite space.

    Acts as the identity on every other subsystem, so embeddings of operators
    on disjoint subsystems commute.
    """
    local = np.asarray(local, dtype=complex)
    d = layout.dims[subsystem]
    if local.shape != (d, d):
        raise ValueError(
            f"operator shape {local.shape} does not match subsystem dim {d}"
        )
    factors = [
        local if i == subsystem else np.eye(dim, dtype=complex)
        for i, dim in enumerate(layout.dims)
    ]
    return reduce(np.kron, factors)


def destroy(dim: int) -> np.ndarray:
    """Bosonic annihilation operator truncated to ``dim`` levels."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def number_op(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def lowering(levels: int, transition: str) -> np.ndarray:
    """Qubit lowering operator |g><e| ('ge') or |e><f| ('ef')."""
    if levels < 3:
        raise ValueError("three-level qubit required")
    op = np.zeros((levels, levels), dtype=complex)
    if transition == "ge":
        op[0, 1] = 1.0
    elif transition == "ef":
        op[1, 2] = 1.0
    else:
        raise ValueError(f"unknown transition {transition!r}")
    return op


def displacement_operator(alpha: complex, dim: int) -> np.ndarray:
    """D(alpha) = exp(alpha a^dag - alpha* a) on a ``dim``-level mode.

    Built from the eigendecomposition of the (Hermitian) i-times-generator, so
    D(-alpha) = D(alpha)^dag holds exactly and the matrix is exactly unitary;
    truncation error appears only as deviation from the infinite-dimensional
    displacement action near the top Fock level.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    a = destroy(dim)
    gen = alpha * a.conj().T - np.conj(alpha) * a  # anti-Hermitian
    herm = 1j * gen
    vals, vecs = np.linalg.eigh(herm)
    return (vecs * np.exp(-1j * vals)) @ vecs.conj().T


def coherent_state(alpha: complex, dim: int) -> np.ndarray:
    """Truncated coherent state, renormalized after truncation."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    if abs(alpha) ** 2 / dim > 0.25:
        warnings.warn(
            f"coherent state |alpha|^2={abs(alpha)**2:.3f} is large for dim={dim}; "
            "truncation may be unsafe",
            stacklevel=2,
        )
    n = np.arange(dim)
    log_fact = np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, dim)))))
    if alpha == 0:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        return amps
    amps = np.exp(n * np.log(complex(alpha)) - 0.5 * log_fact)
    amps /= np.linalg.norm(amps)
    return amps.astype(complex)


def fock(n: int, dim: int) -> np.ndarray:
    if not 0 <= n < dim:
        raise ValueError(f"Fock index {n} out of range for dim {dim}")
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return v


def partial_trace(
    rho: np.ndarray, keep: Iterable[int], layout: HilbertLayout
) -> np.ndarray:
    """Trace out every subsystem not in ``keep`` (returned dims keep global order)."""
    keep = sorted(set(keep))
    n = layout.n_subsystems
    if not keep or any(k < 0 or k >= n for k in keep):
        raise ValueError(f"invalid subsystem set {keep} for {layout.dims}")
    dims = layout.dims
    rho = np.asarray(rho, dtype=complex).reshape(dims + dims)
    # Contract traced-out row/column index pairs one by one.
    traced = [i for i in range(n) if i not in keep]
    for count, idx in enumerate(sorted(traced, reverse=True)):
        cur_n = n - count
        rho = np.trace(rho, axis1=idx, axis2=idx + cur_n)
    d_keep = int(np.prod([dims[k] for k in keep]))
    return rho.reshape(d_keep, d_keep)


def is_density_matrix(rho: np.ndarray) -> bool:
    try:
        assert_density_matrix(rho)
        return True
    except AssertionError:
        return False


def assert_density_matrix(rho: np.ndarray, context: str = "") -> None:
    """Check Hermiticity, unit trace and positivity at the standard tolerances."""
    label = f" ({context})" if context else ""
    herm = np.max(np.abs(rho - rho.conj().T))
    assert herm < HERMITICITY_ATOL, f"not Hermitian{label}: max dev {herm:.2e}"
    tr = np.trace(rho).real
    assert abs(tr - 1.0) < TRACE_ATOL, f"trace {tr!r} not 1{label}"
    evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    assert evals.min() > -EIGENVALUE_ATOL, f"negative eigenvalue {evals.min():.2e}{label}"
