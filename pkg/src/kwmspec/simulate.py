"""Constructive side: Gaussian state covariances over windows, classical
displacement noise with a Monte-Carlo verifier, quadrature path sampling,
and periodogram estimation.

The displacement construction works entirely at covariance level.  A
random classical displacement shifts the quadrature means by -gamma and
leaves the covariance alone, so the mixture over a mean-zero Gaussian
gamma with kernel C has covariance exactly K + C (law of total
covariance: mean of covariances plus covariance of means).  Models store
the quadrature shift vector directly, never a complex amplitude, which
removes sqrt(2) convention bugs.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericError, ValidationFailure
from .groups import TWO_PI
from .kernels import (
    AutocovarianceMap,
    ClassicalCovarianceKernel,
    add_kernels,
    assemble_block_matrix,
    validate_classical_kernel,
    validate_quantum_kernel,
)
from .spectra import ClassicalSpectralMeasure, classical_covariances
from .symplectic import DEFAULT_TOL, QuantumCovarianceMatrix

MAX_JITTER = 1e-10
MIN_MC_SAMPLES = 1000
MC_BATCH = 10_000
MAX_PATH_LENGTH = 4096


def _cholesky_with_jitter(matrix: np.ndarray):
    """Cholesky factor with an escalating diagonal jitter up to 1e-10.

    Boundary-valid covariances are numerically semidefinite, so a strict
    factorization can fail by rounding alone; the jitter ladder keeps the
    perturbation far below every tolerance in use.
    """
    sym = 0.5 * (matrix + matrix.T)
    eye = np.eye(sym.shape[0])
    for jitter in (0.0, 1e-14, 1e-12, MAX_JITTER):
        try:
            return np.linalg.cholesky(sym + jitter * eye), jitter
        except np.linalg.LinAlgError:
            continue
    raise NumericError(
        f"covariance is not positive semidefinite within jitter {MAX_JITTER}")


@dataclass
class GaussianStateCovariance:
    """Mean and covariance of the Gaussian state over one site window."""

    window: list
    covariance: QuantumCovarianceMatrix
    mean: np.ndarray

    def to_dict(self) -> dict:
        return {"window": [list(a) if isinstance(a, tuple) else a
                           for a in self.window],
                "mean": self.mean.tolist(),
                "covariance": self.covariance.matrix.tolist()}


@dataclass
class DisplacementNoiseModel:
    """Classical displacement noise: a kernel for the random quadrature
    shift gamma and the seed that drives it.

    The shift enters as mean -> mean - gamma with the covariance untouched.
    """

    noise: ClassicalCovarianceKernel
    seed: int = 0


def gaussian_state_covariance(kernel: AutocovarianceMap, window,
                              tol: float = DEFAULT_TOL) -> GaussianStateCovariance:
    """Covariance of the Gaussian state the kernel induces on a window.

    Refuses kernels that fail the uncertainty test on this window; the
    report rides along on the raised error.  Sub-windows always reproduce
    the matching principal sub-blocks, so the family is consistent.
    """
    report = validate_quantum_kernel(kernel, window, tol=tol)
    if not report.valid:
        raise ValidationFailure(
            "kernel fails the uncertainty test on this window", report=report)
    block = assemble_block_matrix(kernel, window)
    sites = [kernel.group.element(a) for a in window]
    return GaussianStateCovariance(window=sites, covariance=block,
                                   mean=np.zeros(block.dim))


def displaced_mixture_covariance(kernel: AutocovarianceMap,
                                 noise: ClassicalCovarianceKernel) -> AutocovarianceMap:
    """Exact covariance kernel of the displacement mixture: K + C."""
    return add_kernels(kernel, noise)


def monte_carlo_displacement(kernel: AutocovarianceMap,
                             noise: ClassicalCovarianceKernel, window,
                             n_samples: int, seed: int = 0,
                             tol: float = DEFAULT_TOL):
    """Estimate the mixture covariance by sampling displacements.

    Draws n_samples mean-zero Gaussian shift vectors gamma with covariance
    assembled from the noise kernel over the window; each displaced state
    keeps covariance K and takes mean -gamma, so the empirical second
    moment is K plus the average of gamma gamma^T.  Sampling runs in fixed
    batches with per-batch seeds derived from (seed, batch index), and the
    reduction order is fixed, so results are deterministic.

    Returns (empirical AutocovarianceMap, error report).  The report
    compares each lag block against the exact K + C and quotes the CLT
    standard error per entry: se = sqrt((C_rr(0) C_ss(0) + C_rs(a)^2) / n).
    """
    if n_samples < MIN_MC_SAMPLES:
        raise DomainError(f"need at least {MIN_MC_SAMPLES} samples")
    noise_report = validate_classical_kernel(noise, window, tol=tol)
    if not noise_report.valid:
        raise ValidationFailure("noise kernel is not PSD on this window",
                                report=noise_report)
    group = kernel.group
    sites = [group.element(a) for a in window]
    n = len(sites)
    d = kernel.dim

    base = assemble_block_matrix(kernel, sites).matrix
    noise_cov = assemble_block_matrix(noise, sites).matrix
    chol, jitter = _cholesky_with_jitter(noise_cov)

    second_moment = np.zeros_like(noise_cov)
    done = 0
    batch_index = 0
    while done < n_samples:
        take = min(MC_BATCH, n_samples - done)
        rng = np.random.default_rng([seed, batch_index])
        gammas = rng.standard_normal((take, n * d)) @ chol.T
        second_moment += gammas.T @ gammas
        done += take
        batch_index += 1
    estimate = base + second_moment / n_samples

    # average blocks sharing a lag; symmetry of the estimate makes the
    # mirror averages exact transposes
    sums = {}
    counts = {}
    for i in range(n):
        for j in range(n):
            lag = group.subtract(sites[j], sites[i])
            block = estimate[i * d:(i + 1) * d, j * d:(j + 1) * d]
            if lag in sums:
                sums[lag] = sums[lag] + block
                counts[lag] += 1
            else:
                sums[lag] = block.copy()
                counts[lag] = 1
    empirical = AutocovarianceMap(group, kernel.modes,
                                  {a: sums[a] / counts[a] for a in sums})

    exact = add_kernels(kernel, noise)
    c0 = noise.value(group.zero())
    per_lag = []
    worst_dev = 0.0
    worst_ratio = 0.0
    for lag in sorted(sums, key=lambda x: (x,) if not isinstance(x, tuple) else x):
        dev = np.abs(empirical.value(lag) - exact.value(lag))
        se = np.sqrt((np.outer(np.diag(c0), np.diag(c0))
                      + noise.value(lag) ** 2) / n_samples)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(se > 0, dev / se, np.where(dev > 0, np.inf, 0.0))
        per_lag.append({
            "a": list(lag) if isinstance(lag, tuple) else lag,
            "max_deviation": float(dev.max()),
            "max_clt_se": float(se.max()),
            "max_se_ratio": float(ratio.max()),
        })
        worst_dev = max(worst_dev, float(dev.max()))
        worst_ratio = max(worst_ratio, float(ratio.max()))
    report = {
        "n_samples": n_samples,
        "seed": seed,
        "jitter": jitter,
        "max_deviation": worst_dev,
        "max_se_ratio": worst_ratio,
        "per_lag": per_lag,
    }
    return empirical, report


def sample_quadrature_process(marginal: ClassicalSpectralMeasure, length: int,
                              seed: int = 0) -> np.ndarray:
    """Sample one mean-zero Gaussian path of the classical marginal process.

    Builds the block-Toeplitz covariance of (X_0, ..., X_{L-1}) from the
    marginal's covariance table and Cholesky-samples it; a factorization
    failure past the jitter ladder signals an invalid marginal.  Grid-form
    measures need a dual grid of at least 2L points to resolve the lags.
    Returns a (dim, L) array, bit-reproducible for a given seed.
    """
    if not marginal.group.is_integer:
        raise DomainError("path sampling applies to integer-indexed processes")
    if not 1 <= length <= MAX_PATH_LENGTH:
        raise DomainError(f"length must lie in 1..{MAX_PATH_LENGTH}")
    k = marginal.piece_dim
    table = classical_covariances(marginal, range(length))

    cov = np.zeros((length, k, length, k))
    rows = np.arange(length)
    for a in range(length):
        value = table[a]
        i = rows[: length - a]
        cov[i, :, i + a, :] = value
        if a:
            cov[i + a, :, i, :] = value.T
    cov = cov.reshape(length * k, length * k)

    chol, _ = _cholesky_with_jitter(cov)
    rng = np.random.default_rng(seed)
    path = chol @ rng.standard_normal(length * k)
    return path.reshape(length, k).T


@dataclass
class PeriodogramEstimate:
    """Bartlett-averaged spectral density estimate on a dyadic grid."""

    thetas: np.ndarray
    values: np.ndarray
    segments: int = field(default=0)


def periodogram(paths: np.ndarray, segments: int) -> PeriodogramEstimate:
    """Bartlett periodogram of real sample paths.

    Splits the (dim, L) path into ``segments`` disjoint pieces, takes the
    discrete Fourier transform of each, and averages the outer products
    normalized by segment length, so a flat density c is estimated without
    bias.  The estimate is Hermitian PSD at every frequency by construction.
    """
    arr = np.asarray(paths, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise DomainError("paths must be a (dim, length) array")
    k, total = arr.shape
    if segments < 4:
        raise DomainError("need at least 4 segments")
    if total % segments:
        raise DomainError(f"length {total} is not divisible by {segments} segments")
    seg_len = total // segments
    thetas = TWO_PI * np.arange(seg_len) / seg_len
    acc = np.zeros((seg_len, k, k), dtype=complex)
    for s in range(segments):
        piece = arr[:, s * seg_len:(s + 1) * seg_len]
        spec = np.fft.fft(piece, axis=1)
        acc += np.einsum("if,jf->fij", spec, np.conj(spec)) / seg_len
    return PeriodogramEstimate(thetas=thetas, values=acc / segments,
                               segments=segments)


# -- CSV plumbing -------------------------------------------------------------


def write_paths_csv(stream, paths: np.ndarray, component: str = "q") -> None:
    """Long-format path CSV with header site,mode,component,value."""
    if component not in ("q", "p"):
        raise DomainError("component must be 'q' or 'p'")
    arr = np.asarray(paths, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["site", "mode", "component", "value"])
    k, length = arr.shape
    for site in range(length):
        for mode in range(k):
            writer.writerow([site, mode + 1, component,
                             repr(float(arr[mode, site]))])


def read_paths_csv(stream):
    """Inverse of write_paths_csv; returns (paths, component)."""
    reader = csv.reader(stream)
    header = next(reader, None)
    if header != ["site", "mode", "component", "value"]:
        raise DomainError("unrecognized path CSV header")
    cells = {}
    component = None
    for row in reader:
        if not row:
            continue
        site, mode = int(row[0]), int(row[1])
        component = row[2] if component is None else component
        if row[2] != component:
            raise DomainError("mixed components in one path file")
        cells[(mode - 1, site)] = float(row[3])
    if not cells:
        raise DomainError("empty path file")
    k = 1 + max(m for m, _ in cells)
    length = 1 + max(s for _, s in cells)
    if len(cells) != k * length:
        raise DomainError("path file has missing cells")
    paths = np.zeros((k, length))
    for (mode, site), value in cells.items():
        paths[mode, site] = value
    return paths, component


def write_periodogram_csv(stream, estimate: PeriodogramEstimate) -> None:
    """Wide-format periodogram CSV: theta then entry_ij_re, entry_ij_im."""
    k = estimate.values.shape[1]
    header = ["theta"]
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            header += [f"entry_{i}{j}_re", f"entry_{i}{j}_im"]
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for theta, mat in zip(estimate.thetas, estimate.values):
        row = [repr(float(theta))]
        for i in range(k):
            for j in range(k):
                row += [repr(float(mat[i, j].real)), repr(float(mat[i, j].imag))]
        writer.writerow(row)


def read_periodogram_csv(stream) -> PeriodogramEstimate:
    """Inverse of write_periodogram_csv."""
    reader = csv.reader(stream)
    header = next(reader, None)
    if not header or header[0] != "theta" or (len(header) - 1) % 2:
        raise DomainError("unrecognized periodogram CSV header")
    k = int(round(((len(header) - 1) // 2) ** 0.5))
    if 2 * k * k != len(header) - 1:
        raise DomainError("periodogram CSV is not a square matrix layout")
    thetas = []
    values = []
    for row in reader:
        if not row:
            continue
        thetas.append(float(row[0]))
        flat = [complex(float(row[1 + 2 * t]), float(row[2 + 2 * t]))
                for t in range(k * k)]
        values.append(np.array(flat, dtype=complex).reshape(k, k))
    if not thetas:
        raise DomainError("empty periodogram file")
    return PeriodogramEstimate(thetas=np.array(thetas),
                               values=np.array(values), segments=0)


def paths_csv_text(paths: np.ndarray, component: str = "q") -> str:
    buf = io.StringIO()
    write_paths_csv(buf, paths, component)
    return buf.getvalue()


def periodogram_csv_text(estimate: PeriodogramEstimate) -> str:
    buf = io.StringIO()
    write_periodogram_csv(buf, estimate)
    return buf.getvalue()
