"""Problem specs and reports as JSON documents.

Complex numbers are stored as ``[re, im]`` pairs and floats are written with
their shortest round-trip representation, so numeric fields survive a
save/load cycle bit for bit.  Generator indices are 0-based.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .bases import random_unitary, sinc_frame, spike_basis, spike_fourier_pair, unitary_mixed_basis
from .errors import IoError, ParseError, ValidationError
from .sispace import DEFAULT_K, CoeffSpectra, FrequencyGrid, GeneratorBank, dtft

KINDS = ("spike_fourier", "unitary_mixed", "sinc_frame", "custom")
SOLVERS = ("l1", "l0")
PIPELINES = ("constant", "rich", "frame")
GRID_ENV = "SISPARSE_GRID_K"
DEFAULT_PLANT_LENGTH = 8
MAX_DELAY = 2


def default_grid_size() -> int:
    raw = os.environ.get(GRID_ENV)
    if raw is None or raw == "":
        return DEFAULT_K
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"must be an integer, got {raw!r}", GRID_ENV) from None


def encode(obj):
    """Convert numpy and complex values into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(encode(obj), indent=2, sort_keys=True, allow_nan=True) + "\n"


def complex_array(table, name) -> np.ndarray:
    """Nested lists ending in [re, im] pairs to a complex array."""
    try:
        a = np.asarray(table, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError("must be a numeric table of [re, im] pairs", name) from None
    if a.ndim < 1 or a.shape[-1] != 2:
        raise ValidationError("innermost entries must be [re, im] pairs", name)
    return a[..., 0] + 1j * a[..., 1]


@dataclass(frozen=True)
class ProblemSpec:
    kind: str
    N: int
    K: int
    m: int | None = None
    T: float = 1.0
    seed: int | None = None
    planted: dict | None = None
    solver: str = "l1"
    pipeline: str = "constant"
    rich_freqs: int | None = None
    custom: dict | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: v for k, v in d.items() if v is not None}


def _int_field(raw, name, default=None, minimum=None):
    v = raw.get(name, default)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValidationError(f"must be an integer, got {v!r}", name)
    if minimum is not None and v < minimum:
        raise ValidationError(f"must be >= {minimum}, got {v}", name)
    return v


def _choice(raw, name, options, default):
    v = raw.get(name, default)
    if v not in options:
        raise ValidationError(f"must be one of {list(options)}, got {v!r}", name)
    return v


def validate(raw) -> ProblemSpec:
    """Check a decoded spec document and fill in defaults."""
    if not isinstance(raw, dict):
        raise ValidationError("spec must be a JSON object", "$")
    known = {f for f in ProblemSpec.__dataclass_fields__}
    for key in raw:
        if key not in known:
            raise ValidationError("unknown field", key)
    kind = _choice(raw, "kind", KINDS, None)
    N = _int_field(raw, "N", minimum=1)
    if N is None:
        raise ValidationError("is required", "N")
    K = _int_field(raw, "K", default_grid_size(), minimum=2)
    if K % 2:
        raise ValidationError(f"must be even, got {K}", "K")
    if K % N:
        raise ValidationError(f"K divisible by N is required (K={K}, N={N})", "K")
    T = raw.get("T", 1.0)
    if isinstance(T, bool) or not isinstance(T, (int, float)) or not math.isfinite(T) or T <= 0:
        raise ValidationError(f"must be a positive number, got {T!r}", "T")
    seed = _int_field(raw, "seed", minimum=0)
    solver = _choice(raw, "solver", SOLVERS, "l1")
    default_pipeline = "frame" if kind == "sinc_frame" else "constant"
    pipeline = _choice(raw, "pipeline", PIPELINES, default_pipeline)
    rich_freqs = _int_field(raw, "rich_freqs", minimum=1)
    if rich_freqs is not None and rich_freqs > K:
        raise ValidationError(f"must be <= K={K}", "rich_freqs")

    m = _int_field(raw, "m", minimum=1)
    custom = raw.get("custom")
    if kind == "sinc_frame":
        if m is None:
            raise ValidationError("is required for kind sinc_frame", "m")
        if m < N:
            raise ValidationError(f"must be >= N={N}", "m")
        if pipeline == "constant":
            raise ValidationError("sinc_frame needs pipeline frame or rich", "pipeline")
    elif kind in ("spike_fourier", "unitary_mixed"):
        if m is not None and m != 2 * N:
            raise ValidationError(f"two-basis dictionaries have m = 2N = {2 * N}", "m")
        m = 2 * N
        if pipeline == "frame":
            raise ValidationError(f"{kind} needs pipeline constant or rich", "pipeline")
    if kind == "custom":
        m = _validate_custom(custom, N, K, pipeline)
    elif custom is not None:
        raise ValidationError("only allowed for kind custom", "custom")
    if kind == "unitary_mixed" and seed is None:
        raise ValidationError("is required for kind unitary_mixed", "seed")

    planted = raw.get("planted")
    if planted is not None:
        planted = _validate_planted(planted, m, K, seed)
    return ProblemSpec(kind, N, K, m, float(T), seed, planted, solver, pipeline, rich_freqs,
                       custom)


def _validate_bank_table(table, name, K):
    if not isinstance(table, dict):
        raise ValidationError("must be an object with shifts and spectra", name)
    shifts = table.get("shifts")
    if not isinstance(shifts, list) or not all(isinstance(s, int) and not isinstance(s, bool)
                                                for s in shifts) or not shifts:
        raise ValidationError("must be a non-empty list of integers", f"{name}.shifts")
    spectra = complex_array(table.get("spectra"), f"{name}.spectra")
    if spectra.ndim != 3 or spectra.shape[1:] != (len(shifts), K):
        raise ValidationError(f"must have shape (count, {len(shifts)}, {K})", f"{name}.spectra")
    return spectra.shape[0]


def _validate_custom(custom, N, K, pipeline):
    if not isinstance(custom, dict):
        raise ValidationError("is required for kind custom", "custom")
    for key in custom:
        if key not in ("sampler", "dictionary"):
            raise ValidationError("unknown field", f"custom.{key}")
    if "sampler" not in custom or "dictionary" not in custom:
        raise ValidationError("needs sampler and dictionary tables", "custom")
    n_s = _validate_bank_table(custom["sampler"], "custom.sampler", K)
    n_d = _validate_bank_table(custom["dictionary"], "custom.dictionary", K)
    if n_s != N:
        raise ValidationError(f"must have N={N} generators", "custom.sampler")
    if pipeline == "constant" and n_d != N:
        raise ValidationError(f"constant pipeline needs N={N} generators", "custom.dictionary")
    return 2 * N if pipeline == "constant" else n_d


def _validate_planted(planted, m, K, seed):
    if not isinstance(planted, dict):
        raise ValidationError("must be an object", "planted")
    for key in planted:
        if key not in ("indices", "length", "sequences"):
            raise ValidationError("unknown field", f"planted.{key}")
    idx = planted.get("indices")
    if (not isinstance(idx, list) or len(set(idx)) != len(idx)
            or not all(isinstance(i, int) and not isinstance(i, bool) and 0 <= i < m for i in idx)):
        raise ValidationError(f"must be distinct integers in [0, {m})", "planted.indices")
    out = {"indices": sorted(idx)}
    if "sequences" in planted:
        seqs = planted["sequences"]
        if (not isinstance(seqs, list) or len(seqs) != len(idx)
                or not all(isinstance(row, list) and 1 <= len(row) <= K for row in seqs)):
            raise ValidationError(f"must be {len(idx)} sequences of length 1..{K}",
                                  "planted.sequences")
        try:
            rows = [[float(v) for v in row] for row in seqs]
        except (TypeError, ValueError):
            raise ValidationError("must hold real numbers", "planted.sequences") from None
        # rows follow the sorted indices
        out["sequences"] = [rows[i] for i in np.argsort(idx, kind="stable")]
    else:
        if seed is None:
            raise ValidationError("is required when planted sequences are random", "seed")
        length = planted.get("length", DEFAULT_PLANT_LENGTH)
        if isinstance(length, bool) or not isinstance(length, int) or not 1 <= length <= K:
            raise ValidationError(f"must be an integer in [1, {K}]", "planted.length")
        out["length"] = length
    return out


def load_problem(path) -> ProblemSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read spec {path}: {exc.strerror or exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return validate(raw)


def save_problem(spec: ProblemSpec, path) -> None:
    write_text(path, dumps(spec.to_dict()))


def write_text(path, text) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from None


# --- building the objects a spec describes ------------------------------------

@dataclass(frozen=True, eq=False)
class Instance:
    """Banks, dictionary spectrum and (optionally) planted data of a spec."""

    spec: ProblemSpec
    grid: FrequencyGrid
    sampler: GeneratorBank
    dictionary: GeneratorBank
    gamma: CoeffSpectra | None
    mixing: np.ndarray | None = None
    delays: np.ndarray | None = None


def _bank_from_table(table, period, name):
    spectra = complex_array(table["spectra"], name)
    return GeneratorBank(period, np.asarray(table["shifts"]), spectra, name=name)


def build_instance(spec: ProblemSpec) -> Instance:
    grid = FrequencyGrid(spec.K)
    rng = np.random.default_rng(spec.seed)
    mixing = delays = None
    if spec.kind == "spike_fourier":
        pair = spike_fourier_pair(spec.N, spec.T, grid)
        sampler, dictionary = pair.spike, pair.fourier
    elif spec.kind == "unitary_mixed":
        psi = spike_basis(spec.N, spec.T, grid)
        mixing = random_unitary(spec.N, rng)
        delays = rng.integers(-MAX_DELAY, MAX_DELAY + 1, size=spec.N)
        sampler = unitary_mixed_basis(psi, mixing, delays, grid)
        dictionary = psi
    elif spec.kind == "sinc_frame":
        sampler = spike_basis(spec.N, spec.T, grid)
        dictionary = sinc_frame(spec.N, spec.m, spec.T, grid)
    else:
        sampler = _bank_from_table(spec.custom["sampler"], spec.T, "sampler")
        dictionary = _bank_from_table(spec.custom["dictionary"], spec.T, "dictionary")
    gamma = None
    if spec.planted is not None:
        seqs = np.zeros((spec.m, spec.K))
        idx = spec.planted["indices"]
        if "sequences" in spec.planted:
            for i, row in zip(idx, spec.planted["sequences"]):
                seqs[i, :len(row)] = row
        else:
            L = spec.planted["length"]
            seqs[idx, :L] = rng.standard_normal((len(idx), L))
        gamma = dtft(seqs, grid)
    return Instance(spec, grid, sampler, dictionary, gamma, mixing, delays)
