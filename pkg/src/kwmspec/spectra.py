"""Matrix spectral measures on the dual group: validation, Fourier
transforms to and from covariance kernels, decomposition diagnostics,
photon numbers, and classical reductions.

A measure is an absolutely continuous part plus finitely many atoms.  On
the integer group the AC part is either a piecewise-constant density on
the even dual grid (grid form) or a finite table of real matrix Fourier
coefficients (fourier form).  On a finite group the measure is the full
table of per-point masses; Haar weighs each point 1/N.

Conjugate symmetry of the measure, F(2*pi - theta) = conj(F(theta)) with
atom weights in conjugate pairs, is what makes every transformed kernel
real.  Constructors project densities onto the symmetric subspace and
record the size of that correction; atoms are left as given and audited
by validate_spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError, SpectrumDesignError
from .groups import TWO_PI, GroupDescriptor
from .kernels import AutocovarianceMap
from .symplectic import (
    DEFAULT_TOL,
    SYMMETRY_TOL,
    ConditionCheck,
    ValidationReport,
    _max_abs,
    check_uncertainty,
    hermitian_min_eigenpair,
    purity_determinant_check,
    symplectic_form,
)

GRID_FORM = "grid"
FOURIER_FORM = "fourier"

IMAG_TOL = 1e-10
ROUNDTRIP_TOL = 1e-10
ATOM_THETA_TOL = 1e-9
DET_UNDERFLOW = 1e-300


@dataclass
class Atom:
    """A point mass on the circle: angle in [0, 2*pi) and a Hermitian weight."""

    theta: float
    weight: np.ndarray

    def to_dict(self) -> dict:
        return {"theta": self.theta, "weight": _complex_matrix_to_json(self.weight)}


def _complex_matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _json_to_complex_matrix(rows) -> np.ndarray:
    def scal(entry):
        if isinstance(entry, (list, tuple)):
            return complex(entry[0], entry[1])
        return complex(entry)
    try:
        return np.array([[scal(e) for e in row] for row in rows], dtype=complex)
    except (TypeError, IndexError) as exc:
        raise DomainError(f"malformed matrix entry: {exc}") from exc


def _hermitized(m: np.ndarray, scale: float, where: str) -> np.ndarray:
    dev = _max_abs(m - m.conj().T)
    if dev > SYMMETRY_TOL * scale:
        raise DomainError(f"{where}: matrix is not Hermitian (deviation {dev:.3e})")
    return 0.5 * (m + m.conj().T)


class _MatrixMeasure:
    """Storage shared by the quantum and classical measures.

    ``piece_dim`` is the size of every matrix piece.  ``values`` holds the
    grid-form density (or the finite-group mass table) as a complex array,
    or the fourier-form coefficients as a lag -> real matrix dict.
    """

    def __init__(self, group: GroupDescriptor, piece_dim: int, form: str,
                 values, atoms=()):
        if piece_dim < 1:
            raise DomainError("matrix pieces must have dimension >= 1")
        self.group = group
        self.piece_dim = piece_dim
        self.form = form
        self.symmetrization_correction = 0.0
        if not group.is_integer:
            if form != GRID_FORM:
                raise DomainError("finite-group measures are stored as mass tables")
            if atoms:
                raise DomainError("finite-group measures carry no separate atoms; "
                                  "list masses in the table")
        if form == GRID_FORM:
            self._init_grid(values)
        elif form == FOURIER_FORM:
            if not group.is_integer:
                raise DomainError("fourier form applies to the integer group only")
            self._init_fourier(values)
        else:
            raise DomainError(f"unknown density form {form!r}")
        self.atoms = self._init_atoms(atoms)

    # -- construction ------------------------------------------------------

    def _init_grid(self, values):
        d = self.piece_dim
        count = self.group.dual_grid_size if self.group.is_integer else self.group.order
        # copy: hermitization edits in place and must not alias caller data
        arr = np.array(values, dtype=complex)
        if arr.shape != (count, d, d):
            raise DomainError(
                f"expected {count} matrices of size {d}x{d}, got shape {arr.shape}")
        scale = 1.0 + _max_abs(arr)
        for j in range(count):
            arr[j] = _hermitized(arr[j], scale, f"density point {j}")
        # project onto the conjugate-symmetric subspace and remember how far
        # the input was from it
        if self.group.is_integer:
            partner = (-np.arange(count)) % count
        else:
            pts = self.group.dual_points()
            partner = np.array([self.group.dual_index(self.group.negate(m))
                                for m in pts])
        sym = 0.5 * (arr + np.conj(arr[partner]))
        self.symmetrization_correction = _max_abs(sym - arr)
        self.values = sym

    def _init_fourier(self, values):
        d = self.piece_dim
        table = {}
        for raw_lag, raw_mat in dict(values).items():
            lag = self.group.element(raw_lag)
            mat = np.asarray(raw_mat, dtype=complex)
            if mat.shape != (d, d):
                raise DomainError(
                    f"coefficient {raw_lag}: expected {d}x{d}, got {mat.shape}")
            if lag in table:
                raise DomainError(f"duplicate fourier coefficient for lag {raw_lag}")
            table[lag] = mat
        # conjugate symmetry of the density is exactly: real coefficients
        # with c(-a) = c(a)^T; project and record the correction
        correction = 0.0
        out = {}
        for lag in sorted(table):
            if lag in out:
                continue
            c = table[lag]
            partner = table.get(-lag, c.T if -lag != lag else c)
            fixed = 0.5 * (c.real + partner.real.T)
            correction = max(correction, _max_abs(c - fixed))
            if -lag in table:
                correction = max(correction, _max_abs(table[-lag] - fixed.T))
            out[lag] = fixed
            out[-lag] = fixed.T
        self.symmetrization_correction = correction
        self.values = out

    def _init_atoms(self, atoms):
        d = self.piece_dim
        parsed = []
        for entry in atoms:
            if isinstance(entry, Atom):
                theta, weight = entry.theta, entry.weight
            else:
                theta, weight = entry
            theta = self.group.dual_element(theta)
            weight = np.asarray(weight, dtype=complex)
            if weight.shape != (d, d):
                raise DomainError(f"atom weight must be {d}x{d}, got {weight.shape}")
            parsed.append((theta, weight))
        scale = 1.0 + max((_max_abs(w) for _, w in parsed), default=0.0)
        out = []
        for theta, weight in sorted(parsed, key=lambda tw: tw[0]):
            if out and abs(out[-1].theta - theta) <= ATOM_THETA_TOL:
                raise DomainError(f"duplicate atom at theta = {theta}")
            out.append(Atom(theta, _hermitized(weight, scale, f"atom at {theta}")))
        return out

    # -- evaluation ----------------------------------------------------------

    def grid_points(self):
        """Dual sample points: angles on the integer group, tuples otherwise."""
        if self.group.is_integer:
            return self.group.grid_thetas()
        return self.group.dual_points()

    def density_values(self) -> np.ndarray:
        """The density (or mass table) sampled at :meth:`grid_points`.

        Fourier form is summed against the grid; this is exact for the
        piecewise-constant interpretation used throughout.
        """
        if self.form == GRID_FORM:
            return self.values
        thetas = self.group.grid_thetas()
        d = self.piece_dim
        out = np.zeros((len(thetas), d, d), dtype=complex)
        for lag, coeff in self.values.items():
            out += np.exp(-1j * lag * thetas)[:, None, None] * coeff
        return out

    def ac_mass(self) -> np.ndarray:
        """Total mass of the absolutely continuous part (the whole table
        when the group is finite)."""
        if self.form == FOURIER_FORM:
            zero = self.values.get(0)
            d = self.piece_dim
            return np.array(zero if zero is not None else np.zeros((d, d)),
                            dtype=complex)
        if self.group.is_integer:
            return self.values.mean(axis=0)
        return self.values.sum(axis=0)

    def atomic_mass(self) -> np.ndarray:
        total = np.zeros((self.piece_dim, self.piece_dim), dtype=complex)
        for atom in self.atoms:
            total = total + atom.weight
        return total

    def total_mass(self) -> np.ndarray:
        return self.ac_mass() + self.atomic_mass()

    def max_abs(self) -> float:
        pieces = [_max_abs(a.weight) for a in self.atoms]
        if self.form == GRID_FORM:
            pieces.append(_max_abs(self.values))
        else:
            pieces.extend(_max_abs(c) for c in self.values.values())
        return max(pieces, default=0.0)

    # -- serialization -------------------------------------------------------

    def _density_dict(self) -> dict:
        if self.form == GRID_FORM:
            vals = [_complex_matrix_to_json(m) for m in self.values]
        else:
            vals = [{"a": lag, "matrix": self.values[lag].tolist()}
                    for lag in sorted(self.values)]
        return {"form": self.form, "values": vals}

    @staticmethod
    def _parse_density(payload: dict):
        try:
            form = payload["form"]
            raw = payload["values"]
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed density payload: {exc}") from exc
        if form == GRID_FORM:
            return form, [_json_to_complex_matrix(m) for m in raw]
        if form == FOURIER_FORM:
            out = {}
            for item in raw:
                a = item["a"]
                key = tuple(a) if isinstance(a, list) else a
                if key in out:
                    raise DomainError(f"duplicate lag {a} in density payload")
                out[key] = np.asarray(item["matrix"], dtype=float)
            return form, out
        raise DomainError(f"unknown density form {form!r}")

    @staticmethod
    def _parse_atoms(payload) -> list:
        atoms = []
        for item in payload or ():
            try:
                atoms.append((float(item["theta"]),
                              _json_to_complex_matrix(item["weight"])))
            except (KeyError, TypeError) as exc:
                raise DomainError(f"malformed atom entry: {exc}") from exc
        return atoms


class SpectralMeasure(_MatrixMeasure):
    """Hermitian matrix measure representing the spectrum of a k-mode
    weakly stationary quantum process; pieces are 2k x 2k."""

    def __init__(self, group: GroupDescriptor, modes: int, form: str,
                 values, atoms=()):
        if modes < 1:
            raise DomainError("modes must be >= 1")
        self.modes = modes
        super().__init__(group, 2 * modes, form, values, atoms)

    @classmethod
    def from_grid(cls, group: GroupDescriptor, modes: int, values,
                  atoms=()) -> "SpectralMeasure":
        """Grid-form density on the dual grid (or the finite mass table)."""
        return cls(group, modes, GRID_FORM, values, atoms)

    @classmethod
    def from_fourier(cls, group: GroupDescriptor, modes: int, coefficients,
                     atoms=()) -> "SpectralMeasure":
        """Fourier-form density from a lag -> real matrix table (integer
        group only)."""
        return cls(group, modes, FOURIER_FORM, coefficients, atoms)

    def to_dict(self) -> dict:
        return {"k": self.modes, "group": self.group.to_dict(),
                "density": self._density_dict(),
                "atoms": [a.to_dict() for a in self.atoms]}

    @classmethod
    def from_dict(cls, payload: dict) -> "SpectralMeasure":
        try:
            group = GroupDescriptor.from_dict(payload["group"])
            modes = int(payload["k"])
            density = payload["density"]
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed spectrum payload: {exc}") from exc
        form, values = cls._parse_density(density)
        atoms = cls._parse_atoms(payload.get("atoms"))
        return cls(group, modes, form, values, atoms)


class ClassicalSpectralMeasure(_MatrixMeasure):
    """Matrix spectral measure of a classical weakly stationary process;
    pieces are dim x dim and validity is plain positivity."""

    def __init__(self, group: GroupDescriptor, dim: int, form: str,
                 values, atoms=()):
        self.dim = dim
        super().__init__(group, dim, form, values, atoms)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "group": self.group.to_dict(),
                "density": self._density_dict(),
                "atoms": [a.to_dict() for a in self.atoms]}

    @classmethod
    def from_dict(cls, payload: dict) -> "ClassicalSpectralMeasure":
        try:
            group = GroupDescriptor.from_dict(payload["group"])
            dim = int(payload["dim"])
            density = payload["density"]
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed spectrum payload: {exc}") from exc
        form, values = cls._parse_density(density)
        atoms = cls._parse_atoms(payload.get("atoms"))
        return cls(group, dim, form, values, atoms)


# -- validation --------------------------------------------------------------


def _points_for_report(measure: _MatrixMeasure) -> list:
    if measure.group.is_integer:
        return [float(t) for t in measure.grid_points()]
    return [list(m) for m in measure.grid_points()]


def _atom_symmetry_deviation(measure: _MatrixMeasure) -> tuple:
    """Worst conjugate-pairing defect over the atom list.

    Every atom at theta needs a partner at 2*pi - theta carrying the complex
    conjugate weight; theta in {0, pi} is its own partner, forcing a real
    weight there.
    """
    worst = 0.0
    unpaired = []
    for atom in measure.atoms:
        mate_theta = measure.group.conjugate_dual(atom.theta)
        if abs(mate_theta - atom.theta) <= ATOM_THETA_TOL or \
                abs(abs(mate_theta - atom.theta) - TWO_PI) <= ATOM_THETA_TOL:
            worst = max(worst, _max_abs(atom.weight - atom.weight.conj()))
            continue
        mate = next((b for b in measure.atoms
                     if abs(b.theta - mate_theta) <= ATOM_THETA_TOL), None)
        if mate is None:
            unpaired.append(atom.theta)
        else:
            worst = max(worst, _max_abs(mate.weight - atom.weight.conj()))
    return worst, unpaired


def validate_spectrum(measure: SpectralMeasure,
                      tol: float = DEFAULT_TOL) -> ValidationReport:
    """Full validity audit of a spectral measure.

    Conditions, each reported separately:

    * density_uncertainty: on the integer group, F(theta_j) + (i/2) J >= 0
      at every grid point (atoms carry no Haar mass, so positivity of the
      weights is all the atom contributes); on a finite group,
      Phi_m + (i/(2N)) J >= 0 at every dual point, which by additivity over
      singletons is equivalent to the inequality over every dual subset.
    * atom_positivity: every atom weight PSD.
    * conjugate_symmetry: the construction-time density correction plus the
      atom pairing defect stay below tolerance.
    * piece_positivity: the density values and atom weights are PSD as plain
      Hermitian matrices.

    The report's headline eigenvalue, margin and certificate come from the
    worst dual point of the density_uncertainty condition.
    """
    group = measure.group
    k = measure.modes
    scale = 1.0 + measure.max_abs()
    threshold = tol * scale
    j_half = 0.5 * symplectic_form(k)
    if not group.is_integer:
        j_half = j_half / group.order

    values = measure.density_values()
    points = _points_for_report(measure)
    eigs = []
    vectors = []
    for mat in values:
        val, vec = hermitian_min_eigenpair(mat + 1j * j_half)
        eigs.append(val)
        vectors.append(vec)
    worst = int(np.argmin(eigs)) if eigs else 0
    margins = [e + threshold for e in eigs]
    density_ok = all(m >= 0.0 for m in margins)
    conditions = [ConditionCheck(
        "density_uncertainty", density_ok, min(margins),
        {"points": points, "margins": margins,
         "worst_index": worst, "worst_point": points[worst]})]

    atom_eigs = [hermitian_min_eigenpair(a.weight)[0] for a in measure.atoms]
    atom_min = min(atom_eigs, default=0.0)
    conditions.append(ConditionCheck(
        "atom_positivity", atom_min + threshold >= 0.0, atom_min + threshold,
        {"thetas": [a.theta for a in measure.atoms], "min_eigenvalues": atom_eigs}))

    atom_dev, unpaired = _atom_symmetry_deviation(measure)
    sym_dev = max(measure.symmetrization_correction, atom_dev)
    sym_ok = not unpaired and sym_dev <= threshold
    conditions.append(ConditionCheck(
        "conjugate_symmetry", sym_ok, threshold - sym_dev,
        {"deviation": sym_dev, "unpaired_atoms": unpaired}))

    piece_eigs = [hermitian_min_eigenpair(m)[0] for m in values] + atom_eigs
    piece_min = min(piece_eigs, default=0.0)
    conditions.append(ConditionCheck(
        "piece_positivity", piece_min + threshold >= 0.0, piece_min + threshold))

    valid = all(c.ok for c in conditions)
    return ValidationReport(
        verdict="valid" if valid else "invalid",
        min_eigenvalue=eigs[worst] if eigs else 0.0,
        margin=min(c.margin for c in conditions),
        tolerance=tol,
        certificate=None if density_ok else vectors[worst],
        details=conditions,
    )


def validate_classical_spectrum(measure: ClassicalSpectralMeasure,
                                tol: float = DEFAULT_TOL) -> ValidationReport:
    """Validity audit without the symplectic term: every piece PSD plus
    conjugate symmetry."""
    scale = 1.0 + measure.max_abs()
    threshold = tol * scale
    values = measure.density_values()
    points = _points_for_report(measure)
    eigs = []
    vectors = []
    for mat in values:
        val, vec = hermitian_min_eigenpair(mat)
        eigs.append(val)
        vectors.append(vec)
    for atom in measure.atoms:
        val, vec = hermitian_min_eigenpair(atom.weight)
        eigs.append(val)
        vectors.append(vec)
    worst = int(np.argmin(eigs)) if eigs else 0
    margins = [e + threshold for e in eigs]
    pos_ok = all(m >= 0.0 for m in margins)
    conditions = [ConditionCheck(
        "piece_positivity", pos_ok, min(margins),
        {"points": points, "margins": margins[:len(points)]})]

    atom_dev, unpaired = _atom_symmetry_deviation(measure)
    sym_dev = max(measure.symmetrization_correction, atom_dev)
    sym_ok = not unpaired and sym_dev <= threshold
    conditions.append(ConditionCheck(
        "conjugate_symmetry", sym_ok, threshold - sym_dev,
        {"deviation": sym_dev, "unpaired_atoms": unpaired}))

    valid = all(c.ok for c in conditions)
    return ValidationReport(
        verdict="valid" if valid else "invalid",
        min_eigenvalue=min(eigs, default=0.0),
        margin=min(c.margin for c in conditions),
        tolerance=tol,
        certificate=None if pos_ok else vectors[worst],
        details=conditions,
    )


# -- Fourier transforms --------------------------------------------------------


def _kernel_value_from_measure(measure: _MatrixMeasure, lag) -> np.ndarray:
    group = measure.group
    if group.is_integer:
        if measure.form == FOURIER_FORM:
            d = measure.piece_dim
            acc = np.array(measure.values.get(lag, np.zeros((d, d))), dtype=complex)
        else:
            thetas = group.grid_thetas()
            phases = np.exp(1j * lag * thetas)
            acc = (phases[:, None, None] * measure.values).mean(axis=0)
        for atom in measure.atoms:
            acc = acc + np.exp(1j * lag * atom.theta) * atom.weight
        return acc
    acc = np.zeros((measure.piece_dim,) * 2, dtype=complex)
    for m, mass in zip(group.dual_points(), measure.values):
        acc = acc + group.character(m, lag) * mass
    return acc


def _measure_covariance_table(measure: _MatrixMeasure, lags) -> dict:
    """Real covariance matrices of the measure at canonical lag
    representatives (one per mirror pair)."""
    group = measure.group
    canon = []
    for a in lags:
        lag = group.element(a)
        # evaluate one lag per mirror pair; mirrors are exact transposes
        rep = min(lag, group.negate(lag))
        if rep not in canon:
            canon.append(rep)
    if group.is_integer and measure.form == GRID_FORM:
        nyquist = group.dual_grid_size // 2 - 1
        beyond = [a for a in canon if abs(a) > nyquist]
        if beyond:
            raise DomainError(
                f"lags {beyond} exceed the grid's Nyquist band (|a| <= {nyquist})")
    scale = 1.0 + measure.max_abs()
    entries = {}
    for rep in canon:
        value = _kernel_value_from_measure(measure, rep)
        drift = _max_abs(value.imag)
        if drift > IMAG_TOL * scale:
            raise NumericError(
                f"lag {rep}: imaginary residue {drift:.3e} exceeds tolerance; "
                "the measure is too far from conjugate symmetric")
        entries[rep] = value.real
    return entries


def spectrum_to_autocov(measure: SpectralMeasure, lags=None) -> AutocovarianceMap:
    """Transform the measure into its covariance kernel at the given lags.

    K(a) = integral of chi(a) against the measure: the exact DFT quadrature
    of exp(i*a*theta) F(theta) over the grid plus the atom sum, or the
    character sum over a finite group.  Grid densities resolve lags only up
    to the Nyquist band |a| <= G/2 - 1.  Conjugate symmetry makes the result
    real; the imaginary residue is checked against 1e-10 and dropped, and
    mirror lags are stored as exact transposes.

    Kernels on a finite group are complete tables, so the full group is
    always transformed there and ``lags`` may be omitted.
    """
    if not measure.group.is_integer:
        lags = measure.group.elements()
    elif lags is None:
        raise DomainError("lags are required on the integer group")
    table = _measure_covariance_table(measure, lags)
    return AutocovarianceMap(measure.group, measure.modes, table)


def classical_covariances(measure: ClassicalSpectralMeasure, lags) -> dict:
    """Lag -> dim x dim real covariance table of a classical measure,
    with both mirror lags present (C(-a) stored as the exact transpose)."""
    table = _measure_covariance_table(measure, lags)
    out = {}
    for rep, value in table.items():
        out[rep] = value
        neg = measure.group.negate(rep)
        if neg != rep:
            out[neg] = value.T
    return out


def autocov_to_spectrum(kernel: AutocovarianceMap) -> SpectralMeasure:
    """Invert the kernel into a spectral measure.

    Finite groups get the exact inverse character sum, one Hermitian mass
    per dual point.  The integer group gets the fourier-form density whose
    coefficients are the stored lags; atoms cannot be recovered from
    finitely many lags, so the result is purely absolutely continuous.
    """
    group = kernel.group
    if group.is_integer:
        coeffs = {a: kernel.value(a) for a in kernel.lags()}
        return SpectralMeasure.from_fourier(group, kernel.modes, coeffs)
    n = group.order
    elements = group.elements()
    table = []
    for m in group.dual_points():
        acc = np.zeros((kernel.dim, kernel.dim), dtype=complex)
        for a in elements:
            acc = acc + np.conj(group.character(m, a)) * kernel.value(a)
        table.append(acc / n)
    return SpectralMeasure.from_grid(group, kernel.modes, np.array(table))


# -- the design recipe -----------------------------------------------------------


def design_spectrum(group: GroupDescriptor, modes: int, covariance_field,
                    noise_density=None, noise_atoms=(),
                    tol: float = DEFAULT_TOL) -> SpectralMeasure:
    """Build a valid measure from a field of quantum covariance matrices
    plus an optional classical part.

    ``covariance_field`` is one 2k x 2k matrix (constant field) or one per
    dual point; each must pass check_uncertainty on its own.  The density
    is the field against Haar (mass M_m / N per point on a finite group)
    and the classical part contributes PSD pieces, so the sum is valid by
    construction; the returned measure is re-validated as a safety net.
    """
    d = 2 * modes
    count = group.dual_grid_size if group.is_integer else group.order
    field = np.asarray(covariance_field, dtype=float)
    if field.shape == (d, d):
        field = np.broadcast_to(field, (count, d, d))
    if field.shape != (count, d, d):
        raise DomainError(
            f"covariance field must be one {d}x{d} matrix or {count} of them")

    bad = []
    for j in range(count):
        if not check_uncertainty(field[j], tol=tol).valid:
            bad.append(j)
    if bad:
        all_points = (group.grid_thetas().tolist() if group.is_integer
                      else group.dual_points())
        offending = [all_points[j] for j in bad]
        raise SpectrumDesignError(
            f"{len(bad)} field matrices fail the uncertainty check", points=offending)

    if noise_density is not None:
        noise = np.array(noise_density, dtype=complex)
        if noise.shape == (d, d):
            noise = np.broadcast_to(noise, (count, d, d))
        if noise.shape != (count, d, d):
            raise DomainError("noise density has the wrong shape")
        noise_scale = 1.0 + _max_abs(noise)
        for j in range(count):
            piece = _hermitized(noise[j], noise_scale, f"noise point {j}")
            if hermitian_min_eigenpair(piece)[0] < -tol * noise_scale:
                raise DomainError(f"noise density at point {j} is not PSD")
    else:
        noise = np.zeros((count, d, d), dtype=complex)

    for theta, weight in (noise_atoms or ()):
        w = np.asarray(weight, dtype=complex)
        if hermitian_min_eigenpair(_hermitized(w, 1.0 + _max_abs(w), "noise atom"))[0] \
                < -tol * (1.0 + _max_abs(w)):
            raise DomainError(f"noise atom at theta = {theta} is not PSD")

    if group.is_integer:
        density = field.astype(complex) + noise
        result = SpectralMeasure.from_grid(group, modes, density, noise_atoms)
    else:
        if noise_atoms:
            raise DomainError("finite-group noise goes into the mass table")
        table = field.astype(complex) / count + noise
        result = SpectralMeasure.from_grid(group, modes, table)

    report = validate_spectrum(result, tol=tol)
    if not report.valid:
        raise NumericError("designed measure failed validation; this indicates "
                           "a numerically hostile input field")
    return result


# -- decomposition and diagnostics ------------------------------------------------


def decompose_and_diagnose(measure: SpectralMeasure,
                           tol: float = DEFAULT_TOL) -> dict:
    """Split the measure into AC and atomic masses and run the density
    diagnostics.

    Reports, per dual grid point, the determinant floor det Re F >= 4^{-k}
    that every valid density obeys, the Haar integral of log det Re F with
    an explicit finite/minus-infinity flag (a proxy for the deterministic
    versus purely nondeterministic dichotomy), and cells where the density
    vanishes without a nearby atom (a valid measure cannot leave a gap of
    positive Haar measure).  On a finite group the density with respect to
    normalized Haar is N * Phi_m and the same bounds apply.
    """
    group = measure.group
    k = measure.modes
    values = measure.density_values()
    if not group.is_integer:
        values = values * group.order
    count = len(values)
    scale = 1.0 + measure.max_abs()

    ac = measure.ac_mass()
    atomic = measure.atomic_mass()
    total = ac + atomic
    for name, mat in (("ac", ac), ("atomic", atomic)):
        if _max_abs(mat.imag) > IMAG_TOL * scale:
            raise NumericError(f"{name} mass has imaginary residue beyond tolerance")

    dets = []
    purity_fail = []
    for j in range(count):
        chk = purity_determinant_check(values[j], k, tol=tol)
        dets.append(chk.det_value)
        if not chk.ok:
            purity_fail.append(j)
    worst = int(np.argmin(dets)) if dets else 0

    finite_logdet = all(det > DET_UNDERFLOW for det in dets)
    log_det_integral = float(np.mean(np.log(dets))) if finite_logdet else None

    points = _points_for_report(measure)
    gap_cells = []
    half_cell = np.pi / count
    for j in range(count):
        if float(np.trace(values[j]).real) > tol * scale:
            continue
        if group.is_integer:
            theta = points[j]
            near_atom = any(
                min(abs(a.theta - theta), TWO_PI - abs(a.theta - theta)) <= half_cell
                for a in measure.atoms)
            if not near_atom:
                gap_cells.append({"index": j, "theta": theta})
        else:
            gap_cells.append({"index": j, "point": points[j]})

    return {
        "ac_mass": ac.real.tolist(),
        "atomic_mass": atomic.real.tolist(),
        "total_mass": total.real.tolist(),
        "purity": {
            "bound": 4.0 ** (-k),
            "min_det": min(dets, default=float("nan")),
            "worst_index": worst,
            "all_ok": not purity_fail,
            "failures": purity_fail,
            "determinants": dets,
        },
        "log_det_integral": log_det_integral,
        "log_det_finite": finite_logdet,
        "gap_cells": gap_cells,
    }


@dataclass
class PhotonNumberReport:
    """Per-mode photon expectations of the stationary Gaussian state."""

    per_mode: list
    total: float

    def to_dict(self) -> dict:
        return {"per_mode": [float(x) for x in self.per_mode],
                "total": float(self.total)}


def photon_numbers(measure: SpectralMeasure) -> PhotonNumberReport:
    """Expected photon count per mode from the total mass matrix.

    The total mass equals the one-site covariance K(0); with zero means the
    number observable N_j = (q_j^2 + p_j^2 - 1)/2 has expectation
    (Var q_j + Var p_j - 1)/2, so the vacuum sits exactly at zero.
    """
    total = measure.total_mass()
    scale = 1.0 + measure.max_abs()
    if _max_abs(total.imag) > IMAG_TOL * scale:
        raise NumericError("total mass has imaginary residue beyond tolerance")
    t = total.real
    per_mode = [0.5 * (t[2 * j, 2 * j] + t[2 * j + 1, 2 * j + 1] - 1.0)
                for j in range(measure.modes)]
    return PhotonNumberReport(per_mode=per_mode, total=float(sum(per_mode)))


# -- classical reductions ----------------------------------------------------------


def _extract(measure: SpectralMeasure, idx: np.ndarray) -> ClassicalSpectralMeasure:
    dim = len(idx)
    atoms = [(a.theta, a.weight[np.ix_(idx, idx)]) for a in measure.atoms]
    if measure.form == GRID_FORM:
        values = measure.values[:, idx[:, None], idx[None, :]]
    else:
        values = {lag: c[np.ix_(idx, idx)] for lag, c in measure.values.items()}
    return ClassicalSpectralMeasure(measure.group, dim, measure.form, values, atoms)


def marginal_spectra(measure: SpectralMeasure):
    """Spectra of the position and momentum marginal processes.

    Commuting families: all q components across sites commute, and likewise
    all p components, so each marginal is a classical k-dimensional weakly
    stationary process; its spectrum is the corresponding principal index
    pattern of the full measure.
    """
    q_idx = np.arange(0, 2 * measure.modes, 2)
    p_idx = np.arange(1, 2 * measure.modes, 2)
    return _extract(measure, q_idx), _extract(measure, p_idx)


def scalar_spectrum(measure: SpectralMeasure, c) -> ClassicalSpectralMeasure:
    """Spectrum of the scalar observable process c . X_a.

    ``c`` is a nonzero real vector of length 2k; the density is the
    quadratic form c^T F(theta) c, real by Hermiticity, and nonnegative for
    any valid measure.
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    if c.shape != (2 * measure.modes,):
        raise DomainError(f"direction must have length {2 * measure.modes}")
    if not np.any(c):
        raise DomainError("direction must be nonzero")
    atoms = [(a.theta, np.array([[c @ a.weight @ c]])) for a in measure.atoms]
    if measure.form == GRID_FORM:
        values = np.einsum("i,nij,j->n", c, measure.values, c)[:, None, None]
    else:
        values = {lag: np.array([[c @ coeff @ c]])
                  for lag, coeff in measure.values.items()}
    return ClassicalSpectralMeasure(measure.group, 1, measure.form, values, atoms)


def mixing_diagnostics(measure: SpectralMeasure, kernel: AutocovarianceMap = None,
                       tol: float = DEFAULT_TOL) -> dict:
    """Mixing indicators for the stationary process.

    Atoms in the spectrum obstruct mixing (the covariance keeps an
    oscillating term); decay of the covariance to zero at large lags is the
    sufficient condition for strong mixing of the scalar direction
    processes.  Finite groups are atomic by construction, so the decay
    diagnostics apply to the integer group only.
    """
    if not measure.group.is_integer:
        return {"group": "finite", "has_atoms": True,
                "note": "atomic by construction; decay diagnostics apply to "
                        "the integer group only"}
    has_atoms = bool(measure.atoms)
    if kernel is None:
        if measure.form == GRID_FORM:
            horizon = measure.group.dual_grid_size // 2 - 1
        else:
            top = max((abs(a) for a in measure.values), default=0)
            horizon = max(4 * top, 16)
        kernel = spectrum_to_autocov(measure, range(horizon + 1))
    stored = sorted(a for a in kernel.lags() if a > 0)
    if stored:
        tail = stored[-max(1, len(stored) // 4):]
        tail_max = max(_max_abs(kernel.value(a)) for a in tail)
        tail_range = [tail[0], tail[-1]]
    else:
        tail_max = 0.0
        tail_range = []
    scale = 1.0 + _max_abs(kernel.value(0))
    return {
        "group": "integer",
        "has_atoms": has_atoms,
        "tail_max": tail_max,
        "tail_lags": tail_range,
        "covariance_decays": tail_max <= tol * scale,
        "note": "covariance decay to zero is sufficient for strong mixing of "
                "scalar direction processes; atoms preclude it",
    }
