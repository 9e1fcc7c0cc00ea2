"""Command-line interface: ``qldpc-msa {gen-code,decode,simulate,bench}``.

Exit codes: 0 success, 1 usage or configuration error, 2 data or validation
error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import backends
from .benchmark import CSV_COLUMNS, read_bench_csv, run_bench, write_csv
from .codes import (
    BUILTIN_CODES,
    BbCodeSpec,
    CodeFormatError,
    CodeInvariantError,
    CssCode,
    build_bb_code,
    build_tanner_graph,
    builtin_code,
    load_alist,
    resolve_code,
    save_alist,
    save_css_json,
)
from .decoder import ConfigError, Decoder, DecoderConfig
from .noise import NoiseModel, run_campaign

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

DECODE_COLUMNS = ("index", "converged", "iterations_used", "e_hat_hex")
TRIAL_COLUMNS = (
    "trial", "weight_x", "weight_z", "converged_x", "converged_z",
    "iters_x", "iters_z", "classification", "syndrome",
)


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --- helpers --------------------------------------------------------------------

_MONO = re.compile(r"^(?:x(?:\^(\d+))?)?(?:y(?:\^(\d+))?)?$")


def parse_poly(text: str) -> tuple[tuple[int, int], ...]:
    """Parse ``x^3+y+y^2`` (or ``1``) into (x exponent, y exponent) pairs."""
    terms = []
    for tok in text.replace(" ", "").split("+"):
        if tok == "1":
            terms.append((0, 0))
            continue
        m = _MONO.match(tok)
        if not tok or m is None:
            raise UsageError(f"cannot parse monomial {tok!r} in {text!r}")
        i = 0 if "x" not in tok else int(m.group(1) or 1)
        j = 0 if "y" not in tok else int(m.group(2) or 1)
        terms.append((i, j))
    return tuple(terms)


def parse_bb(text: str) -> BbCodeSpec:
    parts = text.split(",")
    if len(parts) != 4:
        raise UsageError("--bb expects 'l,m,A,B', e.g. '6,6,x^3+y+y^2,y^3+x+x^2'")
    try:
        l, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise UsageError("l and m must be integers") from None
    try:
        return BbCodeSpec(l, m, parse_poly(parts[2]), parse_poly(parts[3]))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def read_syndromes(text: str, length: int) -> np.ndarray:
    """One 01-string per line; blank lines and ``#`` comments are skipped."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if len(body) != length or set(body) - {"0", "1"}:
            raise DataError(
                f"syndrome on line {lineno} (row {len(rows)}) must be a 01-string of length {length}"
            )
        rows.append(np.frombuffer(body.encode(), dtype=np.uint8) - ord("0"))
    return np.array(rows, dtype=np.uint8).reshape(len(rows), length)


def _config(args) -> DecoderConfig:
    return DecoderConfig(
        max_iterations=args.iters,
        alpha=args.alpha,
        early_termination=not args.no_early_term,
        arithmetic=args.mode,
        quant_scale=args.quant_scale,
    )


def _load_code(ref: str) -> CssCode:
    try:
        return resolve_code(ref)
    except (OSError, KeyError) as exc:
        raise DataError(str(exc)) from None


def _open_out(path: Optional[str]):
    return open(path, "w", newline="") if path and path != "-" else None


# --- commands ---------------------------------------------------------------


def cmd_gen_code(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.bb:
        spec = parse_bb(args.bb)
        name = args.code_name or f"bb_{spec.l}x{spec.m}"
        codes = [build_bb_code(spec, name=name)]
    elif args.name == "all":
        codes = [builtin_code(n) for n in BUILTIN_CODES]
    elif args.name in BUILTIN_CODES:
        codes = [builtin_code(args.name)]
    else:
        raise UsageError(f"unknown code {args.name!r}; choose from all, {', '.join(BUILTIN_CODES)}")
    for code in codes:
        (out_dir / f"{code.name}_hx.alist").write_bytes(save_alist(code.hx))
        (out_dir / f"{code.name}_hz.alist").write_bytes(save_alist(code.hz))
        (out_dir / f"{code.name}.json").write_text(save_css_json(code))
        print(f"{code.name} {code.params.label()} -> {out_dir / (code.name + '.json')}")
    return EXIT_OK


def _decode_target(args):
    """Graph, syndrome length and a label for the decode command."""
    ref = args.code
    if ref.endswith(".alist") and Path(ref).exists():
        H = load_alist(Path(ref).read_bytes())
        return build_tanner_graph(H), H.rows
    code = _load_code(ref)
    graph = {"css": code.graph_combined, "x": code.graph_x, "z": code.graph_z}[args.species]
    return graph, graph.num_checks


def cmd_decode(args) -> int:
    cfg = _config(args)
    graph, length = _decode_target(args)
    text = Path(args.syndromes).read_text() if args.syndromes != "-" else sys.stdin.read()
    syn = read_syndromes(text, length)
    outcomes = Decoder(graph, cfg, backend=args.backend).decode_batch(syn, workers=args.threads)
    rows = [
        {
            "index": i,
            "converged": str(o.converged).lower(),
            "iterations_used": o.iterations_used,
            "e_hat_hex": o.e_hat.to_hex(),
        }
        for i, o in enumerate(outcomes)
    ]
    fh = _open_out(args.out) or sys.stdout
    try:
        if args.format == "json":
            for r in rows:
                r["converged"] = r["converged"] == "true"
            json.dump(rows, fh, indent=1)
            fh.write("\n")
        else:
            writer = csv.DictWriter(fh, fieldnames=DECODE_COLUMNS, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _config(args)
    code = _load_code(args.code)
    model = NoiseModel(args.noise, args.p, args.seed)
    log_fh = _open_out(args.log)
    syn_fh = _open_out(args.syndromes_out)
    writer = None
    if log_fh:
        writer = csv.DictWriter(log_fh, fieldnames=TRIAL_COLUMNS, lineterminator="\n")
        writer.writeheader()

    def on_trial(t):
        syndrome = "".join(map(str, np.concatenate([t.s_x, t.s_z]).tolist()))
        if writer:
            writer.writerow({
                "trial": t.trial,
                "weight_x": int(t.e_x.sum()), "weight_z": int(t.e_z.sum()),
                "converged_x": str(t.converged_x).lower(),
                "converged_z": str(t.converged_z).lower(),
                "iters_x": t.iterations_x, "iters_z": t.iterations_z,
                "classification": t.classification.value,
                "syndrome": syndrome,
            })
        if syn_fh:
            syn_fh.write(syndrome + "\n")

    try:
        result = run_campaign(
            code, model, args.trials, cfg, workers=args.threads,
            on_trial=on_trial if (log_fh or syn_fh) else None, backend=args.backend,
        )
    finally:
        for fh in (log_fh, syn_fh):
            if fh:
                fh.close()
    summary = result.summary()
    summary.update(alpha=cfg.alpha, imax=cfg.max_iterations, mode=cfg.arithmetic,
                   early_term=cfg.early_termination)
    json.dump(summary, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def bench_runs(args):
    """Yield one BenchRun per (code, mode, batch) from parsed ``bench`` arguments."""
    codes = args.code or list(BUILTIN_CODES)
    for code in [_load_code(c) for c in codes]:
        for mode in args.mode:
            for batch in args.batch:
                yield run_bench(
                    code, mode=mode, batch=batch, threads=args.threads, warmup=args.warmup,
                    measure=args.measure, alpha=args.alpha, imax=args.iters,
                    early_term=args.early_term, seed=args.seed, backend=args.backend,
                )


def cmd_bench(args) -> int:
    records = []
    for run in bench_runs(args):
        rec = run.record
        records.append(rec)
        print(
            f"{rec.code} {rec.mode} batch={rec.batch}: mean {rec.mean_us:.1f} us "
            f"({'under' if rec.under_threshold else 'over'} 63 us) "
            f"outputs {run.digest()[:12]}",
            file=sys.stderr,
        )
    fh = _open_out(args.out) or sys.stdout
    try:
        if args.format == "json":
            json.dump([r.to_json() for r in records], fh, indent=1)
            fh.write("\n")
        else:
            write_csv(records, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def check_file(path: str) -> int:
    """Validate a CSV written by this tool; schema chosen from the header."""
    text = Path(path).read_text()
    header = tuple(next(csv.reader(io.StringIO(text)), []))
    if header == CSV_COLUMNS:
        rows = read_bench_csv(text)
    elif header == DECODE_COLUMNS:
        rows = _check_rows(text, {"index": int, "converged": _tf, "iterations_used": int,
                                  "e_hat_hex": bytes.fromhex})
    elif header == TRIAL_COLUMNS:
        rows = _check_rows(text, {"trial": int, "weight_x": int, "weight_z": int,
                                  "converged_x": _tf, "converged_z": _tf, "iters_x": int,
                                  "iters_z": int, "classification": str, "syndrome": _bits})
    else:
        raise DataError(f"{path}: unrecognised header {','.join(header)}")
    print(f"{path}: ok ({len(rows)} rows)")
    return EXIT_OK


def _tf(text: str) -> bool:
    if text not in ("true", "false"):
        raise ValueError(f"expected true/false, got {text!r}")
    return text == "true"


def _bits(text: str) -> str:
    if set(text) - {"0", "1"}:
        raise ValueError("not a 01-string")
    return text


def _check_rows(text: str, types: dict) -> list[dict]:
    rows = []
    for lineno, raw in enumerate(csv.DictReader(io.StringIO(text)), start=2):
        try:
            rows.append({k: conv(raw[k]) for k, conv in types.items()})
        except (TypeError, ValueError) as exc:
            raise DataError(f"line {lineno}: {exc}") from None
    return rows


# --- parser -----------------------------------------------------------------------


def _decoder_flags(p: argparse.ArgumentParser, *, bench: bool = False) -> None:
    p.add_argument("--alpha", type=float, default=0.8, help="check-node scaling factor")
    p.add_argument("--iters", type=int, default=10, help="maximum iterations")
    p.add_argument("--threads", type=int, default=1, help="worker threads for batch decoding")
    p.add_argument("--backend", choices=("auto", "cython", "python"), default=None)
    if not bench:
        p.add_argument("--mode", choices=("float", "int8", "int16"), default="float")
        p.add_argument("--quant-scale", type=float, default=None)
        p.add_argument("--no-early-term", action="store_true",
                       help="always run the maximum number of iterations")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qldpc-msa", description=__doc__.splitlines()[0])
    parser.add_argument("--check", metavar="CSV", help="validate a CSV written by this tool and exit")
    parser.add_argument("--version", action="version", version="qldpc-msa 0.1.0")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("gen-code", help="write built-in or custom BB codes as JSON + alist")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--name", help=f"built-in code or 'all' ({', '.join(BUILTIN_CODES)})")
    src.add_argument("--bb", help="custom spec 'l,m,A,B' with A, B like 'x^3+y+y^2'")
    p.add_argument("--code-name", help="name for a custom --bb code")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_gen_code)

    p = sub.add_parser("decode", help="decode syndromes from a file")
    p.add_argument("--code", required=True, help="built-in name, CSS JSON or .alist file")
    p.add_argument("--syndromes", required=True, help="file of 01-strings ('-' for stdin)")
    p.add_argument("--species", choices=("css", "x", "z"), default="css",
                   help="css: rows are s_X ++ s_Z; x: s_X = H_Z e_X; z: s_Z = H_X e_Z")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output file (default stdout)")
    _decoder_flags(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("simulate", help="Monte-Carlo decoding campaign")
    p.add_argument("--code", required=True)
    p.add_argument("--noise", choices=("independent", "depolarizing"), default="independent")
    p.add_argument("--p", type=float, default=0.01)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--log", help="per-trial CSV log")
    p.add_argument("--syndromes-out", help="write sampled s_X ++ s_Z rows for `decode`")
    _decoder_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="latency benchmark (defaults: 10 iterations, float, no early stop)")
    p.add_argument("--code", action="append", help="code to benchmark (repeatable; default all built-ins)")
    p.add_argument("--batch", type=int, nargs="+", default=[1, 16, 64])
    p.add_argument("--mode", nargs="+", choices=("float", "int8", "int16"), default=["float"])
    p.add_argument("--warmup", type=int, default=100, help="untimed batches before measuring")
    p.add_argument("--measure", type=int, default=1000, help="timed batches")
    p.add_argument("--early-term", action="store_true", help="stop once the syndrome is matched")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output file (default stdout)")
    _decoder_flags(p, bench=True)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.check:
            return check_file(args.check)
        if not args.command:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        if getattr(args, "backend", None) == "cython" and "cython" not in backends.available():
            raise UsageError("compiled backend is not available")
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"qldpc-msa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, CodeFormatError, CodeInvariantError, OSError, ValueError) as exc:
        print(f"qldpc-msa: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
