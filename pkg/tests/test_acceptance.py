"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line (also collected into the terminal
summary) with the measured quantity and runtime.
"""

import contextlib
import json
import math
import time
import warnings

import numpy as np

from sisparse.bases import (
    dft_matrix,
    fourier_basis,
    random_unitary,
    sinc_frame,
    spike_basis,
    spike_fourier_pair,
    unitary_mixed_basis,
)
from sisparse.cli import run
from sisparse.coherence import analog_coherence, two_basis_coherence
from sisparse.decompose import decompose_frame, decompose_two_onb_constant, detect_segmented
from sisparse.mmv import MmvProblem, kruskal_rank, l0_oracle, l1_mmv_solve
from sisparse.sispace import (
    FrequencyGrid,
    cross_spectrum,
    dtft,
    is_orthonormal,
    signal_norm,
    synthesize_samples,
)

from conftest import ACCEPTANCE_LINES, two_onb_dictionary

GRID = FrequencyGrid(256)


@contextlib.contextmanager
def criterion(number, title):
    info = {}
    start = time.perf_counter()
    ok = False
    try:
        yield info
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        detail = info.get("detail", "")
        line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} {title} ({detail}; {elapsed:.2f} s)"
        ACCEPTANCE_LINES.append(line)
        print(line)


def test_1_spike_fourier_coherence():
    with criterion(1, "spike-Fourier coherence = 1/sqrt(N)") as info:
        worst = 0.0
        slowest = 0.0
        for N in (4, 9, 16):
            t0 = time.perf_counter()
            pair = spike_fourier_pair(N, 1.0, GRID)
            mu = analog_coherence(pair.spike, pair.fourier, GRID).mu
            slowest = max(slowest, time.perf_counter() - t0)
            worst = max(worst, abs(mu - 1 / math.sqrt(N)))
        info["detail"] = f"max error {worst:.2e}, slowest N {slowest:.3f} s"
        assert worst <= 1e-9
        assert slowest < 1.0


def test_2_coherence_bounds_unitary_mixed():
    with criterion(2, "1/sqrt(N) <= mu <= 1 for 100 unitary-mixed pairs") as info:
        t0 = time.perf_counter()
        bad = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            N = 2 + seed % 7
            psi = spike_basis(N, 1.0, GRID)
            phi = unitary_mixed_basis(psi, random_unitary(N, rng), rng.integers(-3, 4, size=N), GRID)
            mu = analog_coherence(phi, psi, GRID).mu
            if not 1 / math.sqrt(N) - 1e-9 <= mu <= 1 + 1e-9:
                bad += 1
        elapsed = time.perf_counter() - t0
        info["detail"] = f"{bad} violations"
        assert bad == 0
        assert elapsed < 10.0


def test_3_tightness(tmp_path):
    with criterion(3, "demo-tightness meets the uncertainty bound with equality") as info:
        t0 = time.perf_counter()
        worst = 0.0
        counts = []
        for N in (4, 9, 16):
            out = tmp_path / f"t{N}.json"
            assert run(["demo-tightness", "--n", str(N), "--k", "256", "--out", str(out)]) == 0
            rep = json.loads(out.read_text())
            r = math.isqrt(N)
            counts.append((rep["A"], rep["B"]))
            assert rep["A"] == rep["B"] == r
            assert rep["tight"]
            worst = max(worst, abs(rep["geometric_mean"] - 1 / rep["mu"]),
                        abs(rep["arithmetic_mean"] - rep["geometric_mean"]))
        elapsed = time.perf_counter() - t0
        info["detail"] = f"(A, B) = {counts}, max gap {worst:.2e}"
        assert worst <= 1e-9
        assert elapsed < 2.0


def _orthonormal_pairs():
    for N in (1, 2, 3, 4, 9, 16):
        p = spike_fourier_pair(N, 1.0, GRID)
        yield f"spike/fourier N={N}", p.spike, p.fourier
    f4 = fourier_basis(4, 1.0, GRID)
    yield "conj-DFT mix of fourier N=4", unitary_mixed_basis(f4, np.conj(dft_matrix(4)) / 2, range(4), GRID), f4
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        N = 2 + seed % 6
        base = spike_basis(N, 1.0, GRID) if seed % 2 else fourier_basis(N, 1.0, GRID)
        yield (f"mixed seed {seed}",
               unitary_mixed_basis(base, random_unitary(N, rng), rng.integers(-3, 4, size=N), GRID),
               base)


def test_4_cross_matrix_unitary():
    with criterion(4, "M_phi,psi unitary at every grid point") as info:
        worst = 0.0
        count = 0
        for _, phi, psi in _orthonormal_pairs():
            assert is_orthonormal(phi, GRID) and is_orthonormal(psi, GRID)
            M = cross_spectrum(phi, psi, GRID).values
            eye = np.eye(M.shape[1])
            worst = max(worst, np.abs(np.conj(np.swapaxes(M, 1, 2)) @ M - eye).max(),
                        np.abs(M @ np.conj(np.swapaxes(M, 1, 2)) - eye).max())
            count += 1
        info["detail"] = f"{count} pairs, max deviation {worst:.2e}"
        assert worst <= 1e-9


def _box_norm(U, z, seqs, T):
    # exact integral of |x|^2 for mixed box generators of width T/N
    N = U.shape[0]
    cells = {}
    for l in range(N):
        for m in range(seqs.shape[1]):
            for r in range(N):
                key = (m - int(z[r])) * N + r
                cells[key] = cells.get(key, 0) + seqs[l, m] * np.conj(U[l, r]) * math.sqrt(N / T)
    return math.sqrt(T / N * sum(abs(v) ** 2 for v in cells.values()))


def _spike_time_norm(seqs, N, T):
    # evaluate x(t) = sum c_l[n] phi_l(t - nT) from the bank spectra on the
    # Nyquist lattice t = k T/N and apply the sampling-theorem energy identity
    bank = spike_basis(N, T, GRID)
    L = seqs.shape[1]
    t = np.arange(-N, (L + 1) * N) * T / N
    x = np.zeros(len(t), dtype=complex)
    for n in range(L):
        x += seqs[:, n] @ bank.time_values(t - n * T)
    return math.sqrt(T / N * np.sum(np.abs(x) ** 2))


def test_5_parseval():
    with criterion(5, "time-domain norm equals signal_norm") as info:
        worst = 0.0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            N = 1 + seed % 5
            T = float(rng.uniform(0.5, 2.0))
            L = int(rng.integers(1, 10))
            seqs = rng.standard_normal((N, L)) + 1j * rng.standard_normal((N, L))
            reference = signal_norm(dtft(seqs, GRID), GRID)
            U = random_unitary(N, rng)
            z = rng.integers(-2, 3, size=N)
            for brute in (_box_norm(U, z, seqs, T), _spike_time_norm(seqs, N, T)):
                worst = max(worst, abs(brute - reference) / reference)
        info["detail"] = f"20 signals x 2 banks, max relative error {worst:.2e}"
        assert worst <= 1e-6


def _mmv_instances():
    i = 0
    while i < 120:
        rng = np.random.default_rng(i)
        N = (4, 8, 12)[i % 3]
        A = dft_matrix(N) / math.sqrt(N) if i % 2 == 0 else random_unitary(N, rng)
        mu = two_basis_coherence(A)
        kmax = math.ceil((math.sqrt(2) - 0.5) / mu) - 1
        k = int(rng.integers(1, kmax + 1))
        assert k < (math.sqrt(2) - 0.5) / mu
        D = np.hstack([np.eye(N), A])
        S = sorted(rng.choice(2 * N, k, replace=False))
        G = np.zeros((2 * N, 3), dtype=complex)
        G[S] = rng.standard_normal((k, 3)) + 1j * rng.standard_normal((k, 3))
        yield D, D @ G
        i += 1


def test_6_oracle_equivalence():
    with criterion(6, "l1 support equals l0 support under the coherence condition") as info:
        t0 = time.perf_counter()
        total = agree = 0
        for D, X in _mmv_instances():
            prob = MmvProblem(D, X)
            total += 1
            agree += l1_mmv_solve(prob).support == l0_oracle(prob).support
        elapsed = time.perf_counter() - t0
        info["detail"] = f"{agree}/{total} agree"
        assert total >= 100 and agree == total
        assert elapsed < 60.0


def test_7_constant_case_end_to_end():
    with criterion(7, "N=16 spike-Fourier planted recovery") as info:
        t0 = time.perf_counter()
        pair = spike_fourier_pair(16, 1.0, GRID)
        D = two_onb_dictionary(pair.spike, pair.fourier, GRID)
        worst = 0.0
        exact = 0
        for seed in range(50):
            rng = np.random.default_rng(seed)
            k = 1 + seed % 3
            S = tuple(sorted(int(s) for s in rng.choice(32, k, replace=False)))
            seqs = np.zeros((32, 1 + seed % 8))
            seqs[list(S)] = rng.standard_normal((k, seqs.shape[1]))
            gamma = dtft(seqs, GRID)
            sol = decompose_two_onb_constant(pair.spike, pair.fourier,
                                             synthesize_samples(D, gamma), GRID)
            err = np.linalg.norm(sol.gamma.values - gamma.values) / np.linalg.norm(gamma.values)
            worst = max(worst, err)
            exact += sol.support == S and err <= 1e-6
        elapsed = time.perf_counter() - t0
        info["detail"] = f"{exact}/50 exact, max spectral error {worst:.2e}"
        assert exact == 50
        assert elapsed < 120.0


def test_8_frame_pipeline():
    with criterion(8, "sinc frame N=4 m=8 recovery and closed-form W, Z") as info:
        frame = sinc_frame(4, 8, 1.0, GRID)
        sampler = spike_basis(4, 1.0, GRID)
        M = cross_spectrum(sampler, frame, GRID)
        phase_err = 0.0
        for seg in detect_segmented(M, GRID):
            assert seg.detected
            W = np.exp(1j * np.outer(seg.omega, np.arange(4) / 4))
            Z = np.exp(-1j * np.outer(seg.omega, np.arange(8) / 8))
            phase_err = max(phase_err, np.abs(seg.W - W).max(), np.abs(seg.Z - Z).max())
        exact = 0
        for seed in range(24):
            rng = np.random.default_rng(seed)
            S = (seed % 8,)
            seqs = np.zeros((8, 6))
            seqs[S[0]] = rng.standard_normal(6)
            gamma = dtft(seqs, GRID)
            with warnings.catch_warnings():
                warnings.simplefilter("error")
                sol = decompose_frame(frame, sampler, synthesize_samples(M, gamma), GRID)
            assert sol.diagnostics["l1_condition"]
            err = np.linalg.norm(sol.gamma.values - gamma.values) / np.linalg.norm(gamma.values)
            exact += sol.support == S and err <= 1e-6
        info["detail"] = f"{exact}/24 exact, W/Z phase error {phase_err:.2e}"
        assert exact == 24
        assert phase_err <= 1e-9


def test_9_kruskal_rank_bound():
    with criterion(9, "Kruskal rank >= 2/mu - 1 for two-basis dictionaries, N <= 6") as info:
        tested = 0
        for N in range(1, 7):
            mats = [dft_matrix(N) / math.sqrt(N), np.eye(N)]
            mats += [random_unitary(N, np.random.default_rng(100 * N + s)) for s in range(5)]
            for A in mats:
                mu = two_basis_coherence(A)
                sigma = kruskal_rank(np.hstack([np.eye(N), A]))
                assert sigma >= 2 / mu - 1 - 1e-9, (N, sigma, mu)
                tested += 1
        info["detail"] = f"{tested} dictionaries"


def test_10_cli_determinism(tmp_path):
    with criterion(10, "identical spec and seed give byte-identical reports") as info:
        specs = [
            {"kind": "spike_fourier", "N": 16, "K": 256, "seed": 7,
             "planted": {"indices": [1, 4, 30]}},
            {"kind": "unitary_mixed", "N": 4, "K": 128, "seed": 3, "planted": {"indices": [2, 5]}},
            {"kind": "sinc_frame", "N": 4, "m": 8, "K": 256, "seed": 1, "planted": {"indices": [6]}},
            {"kind": "spike_fourier", "N": 8, "K": 128, "seed": 2, "pipeline": "rich",
             "planted": {"indices": [0, 12]}},
        ]
        for i, raw in enumerate(specs):
            spec = tmp_path / f"s{i}.json"
            spec.write_text(json.dumps(raw))
            outs = []
            for rep in range(2):
                out = tmp_path / f"r{i}_{rep}.json"
                assert run(["decompose", "--spec", str(spec), "--out", str(out)]) == 0
                outs.append(out.read_bytes())
            assert outs[0] == outs[1]
        info["detail"] = f"{len(specs)} specs"
