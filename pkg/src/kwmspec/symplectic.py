"""Symplectic form, the uncertainty-relation positivity test, and the
purity determinant bound.

The quadrature ordering everywhere is ``(q_1, p_1, ..., q_k, p_k)`` per
site, with sites concatenated, so the symplectic form on ``kn`` modes is
the block-diagonal direct sum of ``kn`` copies of ``[[0, 1], [-1, 0]]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericError

DEFAULT_TOL = 1e-9
SYMMETRY_TOL = 1e-12


def symplectic_form(k: int) -> np.ndarray:
    """The 2k x 2k symplectic form: block diagonal copies of [[0, 1], [-1, 0]]."""
    if k < 1:
        raise DomainError("number of modes must be >= 1")
    j = np.zeros((2 * k, 2 * k))
    for m in range(k):
        j[2 * m, 2 * m + 1] = 1.0
        j[2 * m + 1, 2 * m] = -1.0
    return j


def _max_abs(m: np.ndarray) -> float:
    return float(np.max(np.abs(m))) if m.size else 0.0


def hermitian_min_eigenpair(h: np.ndarray):
    """Smallest eigenvalue of a Hermitian matrix and a unit eigenvector for it."""
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed: {exc}") from exc
    return float(w[0]), v[:, 0]


@dataclass
class QuantumCovarianceMatrix:
    """Real symmetric covariance matrix of ``sites`` copies of a k-mode system."""

    modes: int
    sites: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        dim = 2 * self.modes * self.sites
        if self.modes < 1 or self.sites < 1:
            raise DomainError("modes and sites must be >= 1")
        if m.shape != (dim, dim):
            raise DomainError(f"expected a {dim}x{dim} matrix, got {m.shape}")
        if _max_abs(m - m.T) > SYMMETRY_TOL * (1.0 + _max_abs(m)):
            raise DomainError("covariance matrix is not symmetric")
        self.matrix = m

    @property
    def dim(self) -> int:
        return 2 * self.modes * self.sites


@dataclass
class ConditionCheck:
    """One named condition of a validation run."""

    name: str
    ok: bool
    margin: float
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "ok": bool(self.ok), "margin": self.margin,
                "detail": self.detail}


@dataclass
class ValidationReport:
    """Outcome of a positivity test.

    ``min_eigenvalue`` is the smallest eigenvalue encountered, ``margin``
    its distance above the tolerance threshold (negative means invalid),
    and ``certificate`` a unit vector u with Re(u^dag H u) < 0 when the
    verdict is invalid.
    """

    verdict: str
    min_eigenvalue: float
    margin: float
    tolerance: float
    certificate: np.ndarray | None = None
    details: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.verdict == "valid"

    def to_dict(self) -> dict:
        cert = None
        if self.certificate is not None:
            cert = [[float(z.real), float(z.imag)] for z in np.asarray(self.certificate)]
        return {
            "verdict": self.verdict,
            "min_eigenvalue": self.min_eigenvalue,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "certificate": cert,
            "conditions": [c.to_dict() for c in self.details],
        }


def _eig_report(h: np.ndarray, scale: float, tol: float, name: str,
                detail: dict | None = None) -> ValidationReport:
    """Shared verdict machinery: valid iff min eig >= -tol * scale."""
    min_eig, vec = hermitian_min_eigenpair(h)
    threshold = tol * scale
    valid = min_eig >= -threshold
    check = ConditionCheck(name, valid, min_eig + threshold, detail or {})
    return ValidationReport(
        verdict="valid" if valid else "invalid",
        min_eigenvalue=min_eig,
        margin=min_eig + threshold,
        tolerance=tol,
        certificate=None if valid else vec,
        details=[check],
    )


def check_uncertainty(m, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Test the uncertainty inequality M + (i/2) J >= 0.

    Parameters
    ----------
    m : QuantumCovarianceMatrix or real symmetric ndarray of even dimension
    tol : nonnegative tolerance, scaled internally by (1 + max|M|) so that
        boundary cases such as the vacuum sit exactly at eigenvalue 0.

    Returns
    -------
    ValidationReport with the minimum eigenvalue of the Hermitian matrix
    H = M + (i/2) J and, on failure, a unit eigenvector certificate.
    """
    if isinstance(m, QuantumCovarianceMatrix):
        mat = m.matrix
    else:
        mat = np.asarray(m, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] % 2:
            raise DomainError("expected a square matrix of even dimension")
        if _max_abs(mat - mat.T) > SYMMETRY_TOL * (1.0 + _max_abs(mat)):
            raise DomainError("matrix is not symmetric")
    half = mat.shape[0] // 2
    h = mat + 0.5j * symplectic_form(half)
    return _eig_report(h, 1.0 + _max_abs(mat), tol, "uncertainty")


@dataclass
class PurityCheck:
    """Result of the determinant floor test det Re F >= 4^{-k}."""

    ok: bool
    det_value: float
    bound: float

    def to_dict(self) -> dict:
        return {"ok": bool(self.ok), "det": self.det_value, "bound": self.bound}


def purity_determinant_check(f: np.ndarray, k: int, tol: float = DEFAULT_TOL) -> PurityCheck:
    """Check the determinant floor forced on valid spectral densities.

    ``f`` must be Hermitian 2k x 2k; passes iff det(Re f) >= 4^{-k} - tol.
    """
    f = np.asarray(f, dtype=complex)
    if f.shape != (2 * k, 2 * k):
        raise DomainError(f"expected a {2 * k}x{2 * k} matrix, got {f.shape}")
    if _max_abs(f - f.conj().T) > tol * (1.0 + _max_abs(f)):
        raise DomainError("matrix is not Hermitian")
    det = float(np.linalg.det(f.real))
    bound = 4.0 ** (-k)
    return PurityCheck(ok=det >= bound - tol, det_value=det, bound=bound)
