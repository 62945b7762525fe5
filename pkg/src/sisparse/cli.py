"""Command-line front end.

    sisparse coherence --kind spike_fourier --n 4
    sisparse demo-tightness --n 9 --csv tight.csv
    sisparse decompose --spec problem.json --out report.json
    sisparse riesz-check --kind sinc_frame --n 4 --m 8
    sisparse synth --spec problem.json --out samples.json

Exit status is 0 on success, 1 on a domain error and 2 on a usage, parse or
validation error.  Errors are reported as one JSON record on stderr; the
human summary goes to stdout and the data to the report file.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
import warnings
from dataclasses import dataclass

import numpy as np

from . import __version__
from .bases import fourier_basis, lpf_train, random_unitary, sinc_frame, spike_basis, spike_fourier_pair, unitary_mixed_basis
from .coherence import analog_coherence
from .decompose import decompose_frame, decompose_rich, decompose_two_onb_constant
from .errors import ConditionViolated, IoError, ParseError, SisparseError, UsageError, ValidationError
from .problem import (
    MAX_DELAY,
    build_instance,
    complex_array,
    default_grid_size,
    dumps,
    load_problem,
    write_text,
)
from .sispace import (
    CoeffSpectra,
    FrequencyGrid,
    cross_spectrum,
    gram_matrix,
    hermitian_error,
    is_orthonormal,
    riesz_bounds,
    synthesize_samples,
)

REPORT_FORMAT = "sisparse-report"
SAMPLES_FORMAT = "sisparse-samples"


@dataclass(eq=False)
class Report:
    """Structured result of one command.

    ``tables`` holds per-grid-point arrays for CSV export and is not part of
    the structured document; ``timings`` is written only when present.
    """

    data: dict
    tables: dict | None = None
    timings: dict | None = None

    def document(self) -> dict:
        doc = {"format": REPORT_FORMAT, **self.data}
        if self.timings is not None:
            doc["timings"] = self.timings
        return doc

    def __eq__(self, other):
        if not isinstance(other, Report):
            return NotImplemented
        return (json.loads(dumps(self.document())) == json.loads(dumps(other.document())))


def _versions():
    return {"sisparse": __version__, "numpy": np.__version__}


def _csv_text(tables) -> str:
    omega = tables["omega"]
    M = tables["M"]  # (K, rows, cols)
    gamma = tables["gamma"]  # (count, K)
    header = ["omega"]
    header += [f"|M_{r}_{c}|" for r in range(M.shape[1]) for c in range(M.shape[2])]
    header += [f"|gamma_{l}|" for l in range(gamma.shape[0])]
    lines = [",".join(header)]
    absM = np.abs(M).reshape(M.shape[0], -1)
    absG = np.abs(gamma).T
    for i, w in enumerate(omega):
        row = [repr(float(w))] + [repr(float(v)) for v in absM[i]] + [repr(float(v)) for v in absG[i]]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_report(report: Report, path, format: str = "structured") -> None:
    if format == "structured":
        write_text(path, dumps(report.document()))
    elif format == "csv":
        if not report.tables:
            raise IoError("this report carries no per-frequency tables")
        write_text(path, _csv_text(report.tables))
    else:
        raise ValueError(f"unknown report format {format!r}")


def read_report(path) -> Report:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read report {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}") from None
    if not isinstance(doc, dict) or doc.pop("format", None) != REPORT_FORMAT:
        raise ParseError(f"{path} is not a report")
    timings = doc.pop("timings", None)
    return Report(doc, None, timings)


# --- commands --------------------------------------------------------------

def _grid(args):
    K = default_grid_size() if args.k is None else args.k
    try:
        return FrequencyGrid(K)
    except ValueError as exc:
        raise ValidationError(str(exc), "--k") from None


def _coherence_dict(rep):
    return {"mu": rep.mu, "argmax_pair": list(rep.argmax_pair), "argmax_omega": rep.argmax_omega,
            "lower_bound": rep.lower_bound, "upper_bound": rep.upper_bound,
            "within_bounds": rep.within_bounds()}


def cmd_coherence(args):
    grid = _grid(args)
    if args.kind == "spike_fourier":
        pair = spike_fourier_pair(args.n, args.t, grid)
        a, b = pair.spike, pair.fourier
        extra = {}
    else:
        rng = np.random.default_rng(args.seed)
        b = spike_basis(args.n, args.t, grid)
        U = random_unitary(args.n, rng)
        z = rng.integers(-MAX_DELAY, MAX_DELAY + 1, size=args.n)
        a = unitary_mixed_basis(b, U, z, grid)
        extra = {"seed": args.seed, "delays": z}
    rep = analog_coherence(a, b, grid)
    data = {"command": "coherence", "kind": args.kind, "N": args.n, "T": args.t, "K": grid.size,
            **extra, "coherence": _coherence_dict(rep), "versions": _versions()}
    M = cross_spectrum(a, b, grid).values
    tables = {"omega": grid.points, "M": M, "gamma": np.zeros((0, grid.size))}
    print(f"mu = {rep.mu:.12g}  (1/sqrt(N) = {rep.lower_bound:.12g})")
    return Report(data, tables)


def cmd_demo_tightness(args):
    grid = _grid(args)
    sig = lpf_train(args.n, args.t, grid)
    chk = sig.check
    data = {
        "command": "demo-tightness", "N": args.n, "T": args.t, "K": grid.size,
        "A": chk.A_count, "B": chk.B_count,
        "active_spike": list(sig.active_spike), "active_fourier": list(sig.active_fourier),
        "mu": sig.coherence, "geometric_mean": chk.geometric_mean,
        "arithmetic_mean": chk.arithmetic_mean, "bound": chk.bound,
        "satisfied": chk.satisfied, "tight": chk.tight, "versions": _versions(),
    }
    pair = spike_fourier_pair(args.n, args.t, grid)
    M = cross_spectrum(pair.spike, pair.fourier, grid).values
    gamma = np.vstack([sig.spike_coeffs.values, sig.fourier_coeffs.values])
    print(f"A = {chk.A_count}, B = {chk.B_count}, sqrt(AB) = {chk.geometric_mean:.12g}, "
          f"(A+B)/2 = {chk.arithmetic_mean:.12g}, 1/mu = {chk.bound:.12g}, tight = {chk.tight}")
    return Report(data, {"omega": grid.points, "M": M, "gamma": gamma})


def cmd_riesz_check(args):
    grid = _grid(args)
    if args.kind == "spike":
        bank = spike_basis(args.n, args.t, grid)
    elif args.kind == "fourier":
        bank = fourier_basis(args.n, args.t, grid)
    elif args.kind == "sinc_frame":
        if args.m is None:
            raise ValidationError("is required for kind sinc_frame", "--m")
        bank = sinc_frame(args.n, args.m, args.t, grid)
    else:
        rng = np.random.default_rng(args.seed)
        psi = spike_basis(args.n, args.t, grid)
        z = rng.integers(-MAX_DELAY, MAX_DELAY + 1, size=args.n)
        bank = unitary_mixed_basis(psi, random_unitary(args.n, rng), z, grid)
    G = gram_matrix(bank, grid)
    rb = riesz_bounds(G, grid)
    data = {"command": "riesz-check", "kind": args.kind, "N": args.n, "m": bank.count,
            "T": args.t, "K": grid.size, "alpha": rb.alpha, "beta": rb.beta,
            "riesz_basis": rb.is_riesz_basis, "orthonormal": is_orthonormal(bank, grid),
            "hermitian_error": hermitian_error(G), "versions": _versions()}
    print(f"alpha = {rb.alpha:.12g}, beta = {rb.beta:.12g}, riesz basis = {rb.is_riesz_basis}, "
          f"orthonormal = {data['orthonormal']}")
    return Report(data, {"omega": grid.points, "M": G.values, "gamma": np.zeros((0, grid.size))})


def _dictionary_spectrum(inst):
    spec = inst.spec
    if spec.kind == "sinc_frame" or spec.pipeline == "frame":
        return cross_spectrum(inst.sampler, inst.dictionary, inst.grid)
    return cross_spectrum(inst.sampler, inst.sampler.concat(inst.dictionary), inst.grid)


def _load_samples(path, spec):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read samples {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}") from None
    if not isinstance(doc, dict) or doc.get("format") != SAMPLES_FORMAT:
        raise ParseError(f"{path} is not a samples file")
    c = complex_array(doc.get("spectra"), "spectra")
    if c.shape != (spec.N, spec.K):
        raise ValidationError(f"must have shape ({spec.N}, {spec.K})", "spectra")
    return CoeffSpectra(c)


def cmd_synth(args):
    spec = load_problem(args.spec)
    if spec.planted is None:
        raise ValidationError("is required for synth", "planted")
    inst = build_instance(spec)
    D = _dictionary_spectrum(inst)
    c = synthesize_samples(D, inst.gamma)
    data = {"command": "synth", "spec": spec.to_dict(), "versions": _versions()}
    doc = {"format": SAMPLES_FORMAT, "N": spec.N, "K": spec.K, "spectra": c.values}
    if args.out is None:
        raise ValidationError("is required for synth", "--out")
    write_text(args.out, dumps(doc))
    print(f"wrote {spec.N} sample spectra on {spec.K} grid points to {args.out}")
    return Report(data, {"omega": inst.grid.points, "M": D.values, "gamma": inst.gamma.values},
                  None), False


def cmd_decompose(args):
    spec = load_problem(args.spec)
    inst = build_instance(spec)
    D = _dictionary_spectrum(inst)
    if args.samples is not None:
        samples = _load_samples(args.samples, spec)
    elif inst.gamma is not None:
        samples = synthesize_samples(D, inst.gamma)
    else:
        raise ValidationError("is required unless --samples is given", "planted")

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConditionViolated)
        if spec.pipeline == "rich":
            sol = decompose_rich(D, samples, inst.grid, spec.rich_freqs, spec.seed or 0, spec.solver)
        elif spec.pipeline == "frame":
            sol = decompose_frame(inst.dictionary, inst.sampler, samples, inst.grid, spec.solver)
        else:
            sol = decompose_two_onb_constant(inst.sampler, inst.dictionary, samples, inst.grid,
                                             spec.solver)
    notes = [str(w.message) for w in caught if issubclass(w.category, ConditionViolated)]

    diag = dict(sol.diagnostics)
    factorization = diag.pop("factorization", None)
    if spec.pipeline == "frame" or spec.kind == "sinc_frame":
        coherence = {"kind": "dictionary", "mu": diag.get("mu")}
    else:
        coherence = {"kind": "analog", **_coherence_dict(
            analog_coherence(inst.sampler, inst.dictionary, inst.grid))}
    solution = {"support": list(sol.support), "k": sol.k, "residual": sol.residual,
                "diagnostics": diag, "warnings": notes}
    if inst.gamma is not None and args.samples is None:
        planted = spec.planted["indices"]
        err = np.linalg.norm(sol.gamma.values - inst.gamma.values)
        ref = np.linalg.norm(inst.gamma.values)
        solution["planted_support"] = planted
        solution["support_matches"] = list(sol.support) == planted
        solution["spectral_error"] = float(err / ref) if ref > 0 else float(err)
    data = {"command": "decompose", "spec": spec.to_dict(), "coherence": coherence,
            "factorization": factorization, "solution": solution, "versions": _versions()}
    for note in notes:
        print(f"warning: {note}", file=sys.stderr)
    print(f"support = {list(sol.support)}, k = {sol.k}, residual = {sol.residual:.3e}")
    return Report(data, {"omega": inst.grid.points, "M": D.values, "gamma": sol.gamma.values})


# --- argument parsing -------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive_float(text):
    v = float(text)
    if not math.isfinite(v) or v <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sisparse", description="Analog sparse decomposition in shift-invariant spaces.")
    p.add_argument("--version", action="version", version=f"sisparse {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, report=True):
        sp.add_argument("--k", type=int, default=None, help="grid size (default $SISPARSE_GRID_K or 256)")
        sp.add_argument("--t", type=_positive_float, default=1.0, help="shift period T")
        if report:
            sp.add_argument("--out", help="structured report path")
            sp.add_argument("--csv", help="per-frequency table path")
            sp.add_argument("--timings", action="store_true", help="add a timings block")

    sp = sub.add_parser("coherence", help="analog coherence of a pair of bases")
    sp.add_argument("--kind", choices=("spike_fourier", "unitary_mixed"), default="spike_fourier")
    sp.add_argument("--n", type=_positive_int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    common(sp)
    sp.set_defaults(func=cmd_coherence)

    sp = sub.add_parser("demo-tightness", help="LPF train meeting the uncertainty bound")
    sp.add_argument("--n", type=_positive_int, required=True)
    common(sp)
    sp.set_defaults(func=cmd_demo_tightness)

    sp = sub.add_parser("riesz-check", help="Riesz bounds of a generator bank")
    sp.add_argument("--kind", choices=("spike", "fourier", "sinc_frame", "unitary_mixed"),
                    default="spike")
    sp.add_argument("--n", type=_positive_int, required=True)
    sp.add_argument("--m", type=_positive_int, default=None)
    sp.add_argument("--seed", type=int, default=0)
    common(sp)
    sp.set_defaults(func=cmd_riesz_check)

    sp = sub.add_parser("decompose", help="recover the sparsest joint representation")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--samples", help="samples file written by synth (default: planted data)")
    sp.add_argument("--out")
    sp.add_argument("--csv")
    sp.add_argument("--timings", action="store_true")
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("synth", help="forward-synthesize the samples of a planted spec")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_synth)
    return p


def run(argv) -> int:
    try:
        args = build_parser().parse_args(list(argv))
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except SisparseError as exc:
        print(json.dumps(exc.record()), file=sys.stderr)
        return exc.exit_code
    start = time.perf_counter()
    try:
        result = args.func(args)
        write_files = True
        if isinstance(result, tuple):
            result, write_files = result
        if getattr(args, "timings", False):
            result.timings = {"total_seconds": time.perf_counter() - start}
        if write_files:
            if args.out:
                write_report(result, args.out, "structured")
            if args.csv:
                write_report(result, args.csv, "csv")
    except SisparseError as exc:
        print(json.dumps(exc.record()), file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        err = ValidationError(str(exc))
        print(json.dumps(err.record()), file=sys.stderr)
        return err.exit_code
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
