"""Command-line front end.

Every subcommand prints one JSON report object to stdout with the fixed
shape {"verdict": ..., "margins": ..., "data": ...} and a short human
summary to stderr.  Exit codes: 0 success/valid, 1 mathematically invalid
input (the report carries a certificate), 2 usage, parse, or numeric
failure.  All output is deterministic for identical invocations; the only
randomness source is --seed (default 0).  KWM_TOL overrides the default
tolerance; an explicit --tol wins over both.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .errors import DomainError, NumericError, SpectrumDesignError, ValidationFailure
from .groups import GroupDescriptor
from .kernels import AutocovarianceMap, ClassicalCovarianceKernel, validate_quantum_kernel
from .simulate import (
    monte_carlo_displacement,
    periodogram,
    read_paths_csv,
    sample_quadrature_process,
    write_paths_csv,
    write_periodogram_csv,
)
from .spectra import (
    ClassicalSpectralMeasure,
    SpectralMeasure,
    autocov_to_spectrum,
    decompose_and_diagnose,
    design_spectrum,
    marginal_spectra,
    mixing_diagnostics,
    photon_numbers,
    spectrum_to_autocov,
    validate_spectrum,
)

ENVELOPE_KEYS = {"verdict", "margins", "data"}


def _default_tol() -> float:
    raw = os.environ.get("KWM_TOL")
    if raw is None:
        return 1e-9
    try:
        value = float(raw)
    except ValueError as exc:
        raise DomainError(f"KWM_TOL is not a number: {raw!r}") from exc
    if value <= 0:
        raise DomainError("KWM_TOL must be positive")
    return value


def _load_payload(path: str | None) -> dict:
    """Read a JSON object from a file or stdin, unwrapping report envelopes
    so subcommands can be piped into each other."""
    try:
        if path is None or path == "-":
            payload = json.load(sys.stdin)
        else:
            with open(path, "r", encoding="utf-8") as fh:
                payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DomainError(f"input is not valid JSON: {exc}") from exc
    except OSError as exc:
        raise DomainError(f"cannot read input: {exc}") from exc
    if isinstance(payload, dict) and ENVELOPE_KEYS.issubset(payload.keys()):
        payload = payload["data"]
    if not isinstance(payload, dict):
        raise DomainError("input JSON must be an object")
    return payload


def _parse_site(token: str, group: GroupDescriptor):
    token = token.strip()
    if ":" in token:
        return tuple(int(p) for p in token.split(":"))
    return int(token)


def parse_window(text: str, group: GroupDescriptor) -> list:
    """Window grammar: 'a..b' (inclusive integer range) or a comma list of
    sites; multi-index finite-group sites use colons, e.g. '0:1,2:0'."""
    text = text.strip()
    if ".." in text:
        lo_s, hi_s = text.split("..", 1)
        try:
            lo, hi = int(lo_s), int(hi_s)
        except ValueError as exc:
            raise DomainError(f"bad window range {text!r}") from exc
        if hi < lo:
            raise DomainError(f"empty window range {text!r}")
        return [group.element(a) for a in range(lo, hi + 1)]
    try:
        return [group.element(_parse_site(tok, group))
                for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise DomainError(f"bad window {text!r}") from exc


def _emit(envelope: dict, summary: str) -> None:
    json.dump(envelope, sys.stdout, sort_keys=True)
    sys.stdout.write("\n")
    print(summary, file=sys.stderr)


def _report_margins(report) -> dict:
    return {check.name: check.margin for check in report.details}


# -- subcommand handlers -------------------------------------------------------


def _cmd_validate_kernel(args) -> int:
    kernel = AutocovarianceMap.from_dict(_load_payload(args.input))
    group = kernel.group
    if args.window is not None:
        windows = [parse_window(args.window, group)]
    elif group.is_integer:
        windows = [list(range(size)) for size in range(1, args.max_window + 1)]
    else:
        windows = [group.elements()]

    margins = {}
    reports = []
    first_bad = None
    for window in windows:
        report = validate_quantum_kernel(kernel, window, tol=args.tol)
        label = f"window_{len(window)}"
        margins[label] = report.margin
        reports.append({"sites": [list(a) if isinstance(a, tuple) else a
                                  for a in window],
                        "report": report.to_dict()})
        if first_bad is None and not report.valid:
            first_bad = report
    verdict = "valid" if first_bad is None else "invalid"
    data = {"windows": reports, "k": kernel.modes, "group": group.to_dict()}
    _emit({"verdict": verdict, "margins": margins, "data": data},
          f"validate-kernel: {verdict}; worst margin {min(margins.values()):.3e} "
          f"over {len(windows)} window(s)")
    return 0 if first_bad is None else 1


def _cmd_validate_spectrum(args) -> int:
    measure = SpectralMeasure.from_dict(_load_payload(args.input))
    report = validate_spectrum(measure, tol=args.tol)
    detail = report.details[0].detail
    failing = [p for p, m in zip(detail["points"], detail["margins"]) if m < 0.0]
    data = report.to_dict()
    data["failing_points"] = failing
    data["k"] = measure.modes
    data["group"] = measure.group.to_dict()
    _emit({"verdict": report.verdict, "margins": _report_margins(report),
           "data": data},
          f"validate-spectrum: {report.verdict}; min margin {report.margin:.3e}; "
          f"{len(failing)} failing dual point(s)")
    return 0 if report.valid else 1


def _cmd_to_kernel(args) -> int:
    measure = SpectralMeasure.from_dict(_load_payload(args.input))
    lags = parse_window(args.lags, measure.group)
    kernel = spectrum_to_autocov(measure, lags)
    _emit({"verdict": "ok", "margins": {}, "data": kernel.to_dict()},
          f"to-kernel: {len(kernel.lags())} lag(s) written")
    return 0


def _cmd_to_spectrum(args) -> int:
    kernel = AutocovarianceMap.from_dict(_load_payload(args.input))
    measure = autocov_to_spectrum(kernel)
    _emit({"verdict": "ok", "margins": {}, "data": measure.to_dict()},
          f"to-spectrum: {measure.form}-form measure written")
    return 0


def _cmd_design(args) -> int:
    payload = _load_payload(args.input)
    try:
        group = GroupDescriptor.from_dict(payload["group"])
        modes = int(payload["k"])
        field = payload["field"]
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed design payload: {exc}") from exc
    atoms = [(float(a["theta"]), np.asarray(a["weight"], dtype=float))
             for a in payload.get("noise_atoms", ())]
    measure = design_spectrum(group, modes, np.asarray(field, dtype=float),
                              noise_density=payload.get("noise_density"),
                              noise_atoms=atoms, tol=args.tol)
    _emit({"verdict": "ok", "margins": {}, "data": measure.to_dict()},
          "design: measure built and validated")
    return 0


def _cmd_photon_numbers(args) -> int:
    measure = SpectralMeasure.from_dict(_load_payload(args.input))
    report = photon_numbers(measure)
    data = report.to_dict()
    margins = {"min_per_mode": min(report.per_mode)}
    _emit({"verdict": "ok", "margins": margins, "data": data},
          f"photon-numbers: total {report.total:.6g}")
    return 0


def _cmd_diagnose(args) -> int:
    measure = SpectralMeasure.from_dict(_load_payload(args.input))
    decomposition = decompose_and_diagnose(measure, tol=args.tol)
    mixing = mixing_diagnostics(measure, tol=args.tol)
    purity = decomposition["purity"]
    margins = {"purity": purity["min_det"] - purity["bound"]}
    data = {"decomposition": decomposition, "mixing": mixing}
    gap = len(decomposition["gap_cells"])
    _emit({"verdict": "ok", "margins": margins, "data": data},
          f"diagnose: min det {purity['min_det']:.6g} vs bound "
          f"{purity['bound']:.6g}; {gap} gap cell(s)")
    return 0


def _cmd_simulate_displacement(args) -> int:
    kernel = AutocovarianceMap.from_dict(_load_payload(args.kernel))
    noise_payload = _load_payload(args.noise)
    noise = ClassicalCovarianceKernel.from_dict(noise_payload)
    window = parse_window(args.window, kernel.group)
    empirical, mc = monte_carlo_displacement(
        kernel, noise, window, args.samples, seed=args.seed, tol=args.tol)
    data = {"empirical": empirical.to_dict(), "mc": mc}
    _emit({"verdict": "ok", "margins": {"max_se_ratio": mc["max_se_ratio"]},
           "data": data},
          f"simulate-displacement: n={args.samples}, max deviation "
          f"{mc['max_deviation']:.3e} ({mc['max_se_ratio']:.2f} standard errors)")
    return 0


def _load_marginal(payload: dict, component: str) -> ClassicalSpectralMeasure:
    if "dim" in payload:
        return ClassicalSpectralMeasure.from_dict(payload)
    measure = SpectralMeasure.from_dict(payload)
    q_part, p_part = marginal_spectra(measure)
    return q_part if component == "q" else p_part


def _cmd_sample_quadrature(args) -> int:
    marginal = _load_marginal(_load_payload(args.input), args.component)
    paths = sample_quadrature_process(marginal, args.length, seed=args.seed)
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        write_paths_csv(fh, paths, component=args.component)
    data = {"csv_path": args.output, "dim": int(paths.shape[0]),
            "length": int(paths.shape[1]), "component": args.component,
            "seed": args.seed}
    _emit({"verdict": "ok", "margins": {}, "data": data},
          f"sample-quadrature: wrote {paths.shape[0]}x{paths.shape[1]} path "
          f"to {args.output}")
    return 0


def _cmd_periodogram(args) -> int:
    try:
        with open(args.input, "r", encoding="utf-8", newline="") as fh:
            paths, _component = read_paths_csv(fh)
    except OSError as exc:
        raise DomainError(f"cannot read paths: {exc}") from exc
    estimate = periodogram(paths, args.segments)
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        write_periodogram_csv(fh, estimate)
    # mean of the trace over the grid estimates the total process variance
    mass = float(np.mean(np.trace(estimate.values, axis1=1, axis2=2).real))
    data = {"csv_path": args.output, "grid_size": int(len(estimate.thetas)),
            "segments": args.segments, "trace_mass": mass}
    _emit({"verdict": "ok", "margins": {}, "data": data},
          f"periodogram: {len(estimate.thetas)} bins from {args.segments} "
          f"segments, trace mass {mass:.6g}")
    return 0


# -- wiring ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kwmspec",
        description="Covariance kernels and spectral measures of multi-mode "
                    "weakly stationary quantum processes")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=False):
        p.add_argument("--tol", type=float, default=None,
                       help="validation tolerance (default 1e-9, or KWM_TOL)")
        if seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("validate-kernel", help="uncertainty test over site windows")
    p.add_argument("--input", default=None, help="kernel JSON (default stdin)")
    p.add_argument("--window", default=None, help="sites, e.g. 0..7 or 0,2,5")
    p.add_argument("--max-window", type=int, default=8,
                   help="sweep contiguous windows up to this size (integer group)")
    common(p)
    p.set_defaults(handler=_cmd_validate_kernel)

    p = sub.add_parser("validate-spectrum", help="pointwise spectral validity audit")
    p.add_argument("--input", default=None)
    common(p)
    p.set_defaults(handler=_cmd_validate_spectrum)

    p = sub.add_parser("to-kernel", help="spectrum -> covariance kernel at lags")
    p.add_argument("--input", default=None)
    p.add_argument("--lags", required=True, help="e.g. --lags=-8..8")
    common(p)
    p.set_defaults(handler=_cmd_to_kernel)

    p = sub.add_parser("to-spectrum", help="covariance kernel -> spectrum")
    p.add_argument("--input", default=None)
    common(p)
    p.set_defaults(handler=_cmd_to_spectrum)

    p = sub.add_parser("design", help="build a valid measure from a covariance field")
    p.add_argument("--input", default=None,
                   help="JSON: {k, group, field, noise_density?, noise_atoms?}")
    common(p)
    p.set_defaults(handler=_cmd_design)

    p = sub.add_parser("photon-numbers", help="per-mode photon expectations")
    p.add_argument("--input", default=None)
    common(p)
    p.set_defaults(handler=_cmd_photon_numbers)

    p = sub.add_parser("diagnose", help="decomposition, purity floor, gaps, mixing")
    p.add_argument("--input", default=None)
    common(p)
    p.set_defaults(handler=_cmd_diagnose)

    p = sub.add_parser("simulate-displacement",
                       help="Monte-Carlo check of the displacement mixture")
    p.add_argument("--kernel", required=True, help="quantum kernel JSON")
    p.add_argument("--noise", required=True, help="classical kernel JSON")
    p.add_argument("--window", required=True)
    p.add_argument("--samples", type=int, default=100_000)
    common(p, seed=True)
    p.set_defaults(handler=_cmd_simulate_displacement)

    p = sub.add_parser("sample-quadrature",
                       help="sample a marginal process path to CSV")
    p.add_argument("--input", default=None, help="spectrum JSON (quantum or classical)")
    p.add_argument("--component", choices=("q", "p"), default="q")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--output", required=True, help="path CSV destination")
    common(p, seed=True)
    p.set_defaults(handler=_cmd_sample_quadrature)

    p = sub.add_parser("periodogram", help="Bartlett periodogram of a path CSV")
    p.add_argument("--input", required=True, help="path CSV")
    p.add_argument("--segments", type=int, default=16)
    p.add_argument("--output", required=True, help="periodogram CSV destination")
    common(p)
    p.set_defaults(handler=_cmd_periodogram)

    return parser


def _absorb_negative_ranges(argv: list) -> list:
    """Let '--lags -8..8' and '--window -3..3' work without an equals sign;
    argparse would otherwise read the value as an unknown option."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in ("--lags", "--window") and i + 1 < len(argv) \
                and argv[i + 1].startswith("-") and ".." in argv[i + 1]:
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_absorb_negative_ranges(argv))
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; pass both through
        return int(exc.code or 0)
    try:
        if args.tol is None:
            args.tol = _default_tol()
        if args.tol <= 0:
            raise DomainError("--tol must be positive")
        return args.handler(args)
    except ValidationFailure as exc:
        report = exc.report
        _emit({"verdict": "invalid", "margins": _report_margins(report),
               "data": report.to_dict()}, f"{args.command}: {exc}")
        return 1
    except SpectrumDesignError as exc:
        points = [list(p) if isinstance(p, tuple) else p for p in exc.points]
        _emit({"verdict": "invalid", "margins": {},
               "data": {"error": str(exc), "offending_points": points}},
              f"{args.command}: {exc}")
        return 1
    except (DomainError, NumericError) as exc:
        print(f"{args.command}: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
