"""Lag-indexed covariance kernels on a group, block-matrix assembly over
site windows, and the quantum/classical validity tests.

A kernel stores real 2k x 2k matrices K(a) indexed by group elements.
The defining symmetry is K(-a) = K(a)^T, so the block matrix with (i, j)
block K(a_j - a_i) over any window of distinct sites is symmetric.  A
quantum kernel is one for which every such block matrix passes the
uncertainty test; a classical kernel needs plain positive semidefiniteness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .groups import GroupDescriptor
from .symplectic import (
    DEFAULT_TOL,
    SYMMETRY_TOL,
    QuantumCovarianceMatrix,
    ValidationReport,
    _eig_report,
    _max_abs,
    check_uncertainty,
    symplectic_form,
)


class _LagMap:
    """Shared storage and mirror-fill logic for lag-indexed matrix maps.

    Entries come in as {element: 2k x 2k real array}.  Both a and -a may be
    given; they must agree up to transposition within 1e-12 of scale, and the
    stored mirrors are overwritten with exact transposes so downstream block
    matrices are exactly symmetric.
    """

    def __init__(self, group: GroupDescriptor, modes: int, entries: dict):
        if modes < 1:
            raise DomainError("modes must be >= 1")
        self.group = group
        self.modes = modes
        dim = 2 * modes
        table = {}
        for raw_lag, raw_mat in entries.items():
            lag = group.element(raw_lag)
            mat = np.array(raw_mat, dtype=float)
            if mat.shape != (dim, dim):
                raise DomainError(
                    f"lag {raw_lag}: expected a {dim}x{dim} matrix, got {mat.shape}")
            if lag in table:
                raise DomainError(f"duplicate lag {raw_lag}")
            table[lag] = mat
        scale = 1.0 + max((_max_abs(m) for m in table.values()), default=0.0)
        # consistency of explicitly given mirror pairs
        for lag, mat in table.items():
            neg = group.negate(lag)
            if neg in table and _max_abs(table[neg] - mat.T) > SYMMETRY_TOL * scale:
                raise DomainError(f"lags {lag} and {neg} break K(-a) = K(a)^T")
        zero = group.zero()
        if zero in table and _max_abs(table[zero] - table[zero].T) > SYMMETRY_TOL * scale:
            raise DomainError("the lag-0 matrix must be symmetric")
        # mirror-fill with exact transposes (canonical representative wins)
        filled = {}
        for lag in sorted(table, key=_lag_sort_key):
            neg = group.negate(lag)
            if lag not in filled:
                filled[lag] = table[lag]
                filled[neg] = table[lag].T
        if zero in filled:
            filled[zero] = 0.5 * (filled[zero] + filled[zero].T)
        if not group.is_integer:
            missing = [a for a in group.elements() if a not in filled]
            if missing:
                raise DomainError(f"finite-group kernel is missing lags {missing}")
        self._table = filled

    @property
    def dim(self) -> int:
        return 2 * self.modes

    def lags(self) -> list:
        return sorted(self._table, key=_lag_sort_key)

    def value(self, a) -> np.ndarray:
        """K(a); unlisted lags are zero on the integer group."""
        lag = self.group.element(a)
        mat = self._table.get(lag)
        if mat is not None:
            return mat
        if self.group.is_integer:
            return np.zeros((self.dim, self.dim))
        raise DomainError(f"lag {a} is not stored")

    def max_abs(self) -> float:
        return max((_max_abs(m) for m in self._table.values()), default=0.0)

    def to_dict(self) -> dict:
        lags = []
        for a in self.lags():
            lags.append({"a": list(a) if isinstance(a, tuple) else a,
                         "matrix": self._table[a].tolist()})
        return {"k": self.modes, "group": self.group.to_dict(), "lags": lags}

    @classmethod
    def from_dict(cls, payload: dict):
        try:
            group = GroupDescriptor.from_dict(payload["group"])
            modes = int(payload["k"])
            raw = payload["lags"]
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed kernel payload: {exc}") from exc
        entries = {}
        for item in raw:
            a = item["a"]
            key = tuple(a) if isinstance(a, list) else a
            if key in entries:
                raise DomainError(f"duplicate lag {a} in payload")
            entries[key] = item["matrix"]
        return cls(group, modes, entries)

    def _same_shape(self, other: "_LagMap"):
        if self.group != other.group or self.modes != other.modes:
            raise DomainError("kernels live on different groups or mode counts")


def _lag_sort_key(lag):
    return (lag,) if not isinstance(lag, tuple) else lag


class AutocovarianceMap(_LagMap):
    """Quantum-side lag map; validity means the uncertainty inequality holds
    over site windows."""


class ClassicalCovarianceKernel(_LagMap):
    """Classical lag map; validity means plain PSD block matrices."""


def assemble_block_matrix(kernel: _LagMap, sites) -> QuantumCovarianceMatrix:
    """Block matrix with (i, j) block K(sites[j] - sites[i]).

    Sites must be distinct group elements.  The result is exactly symmetric
    by the stored transpose pairing.
    """
    canon = [kernel.group.element(a) for a in sites]
    if not canon:
        raise DomainError("window must be nonempty")
    if len(set(canon)) != len(canon):
        raise DomainError("window sites must be distinct")
    n = len(canon)
    d = kernel.dim
    out = np.zeros((n * d, n * d))
    for i in range(n):
        for j in range(i, n):
            block = kernel.value(kernel.group.subtract(canon[j], canon[i]))
            out[i * d:(i + 1) * d, j * d:(j + 1) * d] = block
            out[j * d:(j + 1) * d, i * d:(i + 1) * d] = block.T
    return QuantumCovarianceMatrix(modes=kernel.modes, sites=n, matrix=out)


def augmented_block_matrix(kernel: AutocovarianceMap, sites) -> np.ndarray:
    """Complex Hermitian block matrix with blocks K(a) + (i/2) 1_{a=0} J.

    Since window sites are distinct, the indicator marks exactly the diagonal
    blocks, so this equals the plain block matrix plus (i/2) J over all modes.
    """
    block = assemble_block_matrix(kernel, sites)
    return block.matrix + 0.5j * symplectic_form(kernel.modes * block.sites)


def validate_quantum_kernel(kernel: AutocovarianceMap, window,
                            tol: float = DEFAULT_TOL) -> ValidationReport:
    """Uncertainty test of the assembled block matrix over one window.

    The verdict applies to this window only; sweeping window sizes is the
    caller's job (a failure on a sub-window persists on every super-window).
    """
    return check_uncertainty(assemble_block_matrix(kernel, window), tol=tol)


def validate_classical_kernel(kernel: ClassicalCovarianceKernel, window,
                              tol: float = DEFAULT_TOL) -> ValidationReport:
    """PSD test of the assembled block matrix over one window."""
    block = assemble_block_matrix(kernel, window)
    scale = 1.0 + _max_abs(block.matrix)
    return _eig_report(block.matrix.astype(complex), scale, tol, "psd")


def add_kernels(kernel: AutocovarianceMap,
                noise: ClassicalCovarianceKernel) -> AutocovarianceMap:
    """Lagwise sum; adding classical noise preserves quantum validity."""
    kernel._same_shape(noise)
    lags = set(kernel.lags()) | set(noise.lags())
    entries = {a: kernel.value(a) + noise.value(a) for a in lags}
    return AutocovarianceMap(kernel.group, kernel.modes, entries)
