"""Acceptance suite: one test per criterion, each tagged for the summary table.

Tolerances are pinned: zero violations where exactness is required, and the
trial counts (10^4 syndromes per code and mode, 10^4 Monte-Carlo trials,
100 combined/separate pairs per code, workers {1, 2, 8}, batches {1, 16, 64})
are the stated minima.
"""

import csv
import io
import itertools
from pathlib import Path

import numpy as np
import pytest

from oracles import TOY, coset, rank as oracle_rank
from qldpc_msa.benchmark import CSV_COLUMNS, THRESHOLD_US, read_bench_csv
from qldpc_msa.cli import bench_runs, build_parser, main
from qldpc_msa.codes import BUILTIN_CODES, build_tanner_graph, builtin_code, toy_code
from qldpc_msa.decoder import Decoder, DecoderConfig, decode, decode_css
from qldpc_msa.noise import Classification, NoiseModel, classify_batch, run_campaign

GOLDEN_HEADER = Path(__file__).parent / "data" / "bench_header.csv"
MODES = ("float", "int8", "int16")
DECLARED = {"bb72": (72, 12), "bb108": (108, 8), "bb144": (144, 12),
            "bb288": (288, 12), "bb784": (784, 24)}

N_SOUNDNESS = 10_000
N_MC = 10_000
N_PAIRS = 100


def dense_combined(code):
    hz, hx = code.hz.to_dense().astype(np.int64), code.hx.to_dense().astype(np.int64)
    top = np.hstack([hz, np.zeros_like(hz)])
    bottom = np.hstack([np.zeros_like(hx), hx])
    return np.vstack([top, bottom])


def soundness_syndromes(code, count, seed):
    """80% syndromes of random errors at rates spread over [0.005, 0.1], 20% uniform bits."""
    rng = np.random.default_rng(seed)
    H = dense_combined(code)
    n_err = count * 4 // 5
    rates = rng.uniform(0.005, 0.1, size=(n_err, 1))
    e = (rng.random((n_err, H.shape[1])) < rates).astype(np.int64)
    syn_err = (e @ H.T) % 2
    syn_rand = rng.integers(0, 2, (count - n_err, H.shape[0]))
    return np.vstack([syn_err, syn_rand]).astype(np.uint8), H


# --- 1 ----------------------------------------------------------------------------


@pytest.mark.criterion(1, "soundness: converged => H e_hat == s, 10^4 syndromes x code x mode")
def test_criterion_1_soundness():
    report = []
    violations = 0
    for i, name in enumerate(BUILTIN_CODES):
        code = builtin_code(name)
        syn, H = soundness_syndromes(code, N_SOUNDNESS, seed=1000 + i)
        for mode in MODES:
            res = Decoder(code.graph_combined, DecoderConfig(arithmetic=mode)).decode_array(syn)
            conv = res.converged.all(axis=1)
            recomputed = (res.e_hat.astype(np.int64) @ H.T) % 2
            bad = int((recomputed[conv] != syn[conv]).any(axis=1).sum())
            violations += bad
            report.append(f"{name}/{mode}: {int(conv.sum())}/{len(syn)} converged, {bad} violations")
            assert conv.sum() > 0, f"{name}/{mode}: nothing converged, check is vacuous"
    print("\n".join(report))
    assert violations == 0


# --- 2 ----------------------------------------------------------------------------


@pytest.mark.criterion(2, "toy code: every converged estimate lies in the oracle coset, all 8 syndromes")
def test_criterion_2_toy_oracle():
    g = build_tanner_graph(toy_code())
    lines = []
    for mode in MODES:
        cfg = DecoderConfig(alpha=0.8, max_iterations=10, arithmetic=mode)
        for s in itertools.product((0, 1), repeat=3):
            solutions = coset(TOY, s)  # exhaustive over all 2^6 error vectors
            out = decode(g, list(s), cfg)
            e_hat = tuple(out.e_hat.bits().tolist())
            lines.append(f"{mode} s={s}: |coset|={len(solutions)} converged={out.converged}")
            if out.converged:
                assert e_hat in solutions
            # the decoder never claims convergence on an infeasible syndrome
            if not solutions:
                assert not out.converged
    print("\n".join(lines))


# --- 3 ----------------------------------------------------------------------------


@pytest.mark.criterion(3, "BB family: H_X H_Z^T == 0 exactly and rank-derived k equals the declared k")
def test_criterion_3_code_family():
    for name in BUILTIN_CODES:
        code = builtin_code(name)
        hx = code.hx.to_dense().astype(np.int64)
        hz = code.hz.to_dense().astype(np.int64)
        assert not ((hx @ hz.T) % 2).any(), name
        n, k = DECLARED[name]
        k_oracle = n - oracle_rank(hx.tolist()) - oracle_rank(hz.tolist())
        print(f"{name}: n={code.params.n} k={code.params.k} (oracle {k_oracle}) declared {n},{k}")
        assert code.params.n == n
        assert code.params.k == k_oracle == k


# --- 4 ----------------------------------------------------------------------------


@pytest.mark.criterion(4, "[[72,12,6]]: all 72 weight-1 X and Z errors converge, never logical")
def test_criterion_4_weight_one():
    code = builtin_code("bb72")
    cfg = DecoderConfig(alpha=0.8, max_iterations=10)
    eye = np.eye(72, dtype=np.uint8)
    zero = np.zeros((72, 72), dtype=np.uint8)
    hz, hx = code.hz.to_dense().astype(int), code.hx.to_dense().astype(int)
    for species in ("X", "Z"):
        ex, ez = (eye, zero) if species == "X" else (zero, eye)
        hats_x, hats_z, conv = [], [], []
        for j in range(72):
            res = decode_css(code, (hz @ ex[j]) % 2, (hx @ ez[j]) % 2, cfg)
            hats_x.append(res.e_x.bits())
            hats_z.append(res.e_z.bits())
            conv.append(all(o.converged for o in res.outcomes))
        classes = classify_batch(code, ex, np.array(hats_x), ez, np.array(hats_z))
        assert all(conv), f"{species}: {conv.count(False)} did not converge"
        assert set(classes) <= {Classification.EXACT, Classification.STABILIZER}, species
        print(f"{species}: 72/72 converged, classes {sorted({c.value for c in classes})}")


# --- 5 ----------------------------------------------------------------------------


@pytest.mark.criterion(5, "bench defaults: float, early termination off, iterations_used == 10 always")
def test_criterion_5_protocol_fidelity():
    args = build_parser().parse_args(["bench", "--code", "bb72"])
    assert (args.iters, args.early_term, args.mode, args.warmup) == (10, False, ["float"], 100)
    assert args.batch == [1, 16, 64]
    for run in bench_runs(args):
        rec = run.record
        assert (rec.imax, rec.early_term, rec.mode) == (10, False, "float")
        assert run.all_iterations.size == rec.trials * rec.batch
        assert (run.all_iterations == 10).all()
        print(f"batch {rec.batch}: {run.all_iterations.size} decodes, all 10 iterations")


# --- 6 ----------------------------------------------------------------------------


@pytest.mark.criterion(6, "determinism: workers {1,2,8} and reruns identical; combined == separate")
def test_criterion_6_determinism():
    for i, name in enumerate(BUILTIN_CODES):
        code = builtin_code(name)
        syn, _ = soundness_syndromes(code, 256, seed=2000 + i)
        for mode in MODES:
            dec = Decoder(code.graph_combined, DecoderConfig(arithmetic=mode))
            ref = dec.decode_batch(syn, workers=1)
            for workers in (1, 2, 8):
                assert dec.decode_batch(syn, workers=workers) == ref, (name, mode, workers)
            rerun = Decoder(code.graph_combined, DecoderConfig(arithmetic=mode))
            assert rerun.decode_batch(syn, workers=8) == ref
        # combined vs two separate decodes on random syndrome pairs
        mx = code.hz.rows
        pairs = syn[:N_PAIRS]
        for mode in MODES:
            cfg = DecoderConfig(arithmetic=mode)
            dx, dz = Decoder(code.graph_x, cfg), Decoder(code.graph_z, cfg)
            sep_x = dx.decode_batch(pairs[:, :mx])
            sep_z = dz.decode_batch(pairs[:, mx:])
            for row, ox, oz in zip(pairs, sep_x, sep_z):
                res = decode_css(code, row[:mx], row[mx:], cfg)
                assert res.outcomes == (ox, oz), (name, mode)
        print(f"{name}: ok")


# --- 7 ----------------------------------------------------------------------------


@pytest.mark.criterion(7, "Monte-Carlo p=0.01 on [[72,12,6]]: below undecoded baseline, reproducible")
def test_criterion_7_monte_carlo():
    code = builtin_code("bb72")
    model = NoiseModel("independent", 0.01, seed=20240601)
    first = run_campaign(code, model, N_MC)
    second = run_campaign(code, model, N_MC, workers=2, chunk=999)
    print(first.summary())
    assert first.trials == N_MC
    assert first.logical_error_rate < first.undecoded_error_rate
    assert first.summary() == second.summary()


# --- 8 ----------------------------------------------------------------------------


@pytest.mark.criterion(8, "bench CSV for every code at batches {1,16,64}; header matches golden file")
def test_criterion_8_latency_report(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--out", str(out)]) == 0
    capsys.readouterr()
    text = out.read_text()
    assert text.splitlines()[0] + "\n" == GOLDEN_HEADER.read_text()
    assert tuple(next(csv.reader(io.StringIO(text)))) == CSV_COLUMNS
    rows = read_bench_csv(text)
    assert {(r["code"], r["batch"]) for r in rows} == {
        (c, b) for c in BUILTIN_CODES for b in (1, 16, 64)
    }
    with capsys.disabled():
        print()
        for r in rows:
            assert r["under_63us"] == (r["mean_us"] < THRESHOLD_US)
            flag = "under" if r["under_63us"] else "over"
            print(f"  {r['code']:>6} batch={r['batch']:>2} mean={r['mean_us']:9.2f} us "
                  f"p99={r['p99_us']:9.2f} us ({flag} 63 us, informative)")
