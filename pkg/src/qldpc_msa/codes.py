"""CSS quantum LDPC codes, Tanner graphs and their interchange formats."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Optional

import numpy as np

from .gf2 import RowSpace, SparseGf2Matrix, rank

__all__ = [
    "CodeFormatError",
    "CodeInvariantError",
    "TannerGraph",
    "CodeParams",
    "BbCodeSpec",
    "CssCode",
    "build_tanner_graph",
    "combine_graphs",
    "build_bb_code",
    "load_alist",
    "save_alist",
    "load_css_json",
    "save_css_json",
    "toy_code",
    "BUILTIN_CODES",
    "builtin_code",
    "resolve_code",
    "CODE_DIR_ENV",
]

CODE_DIR_ENV = "QLDPC_MSA_CODE_DIR"


class CodeFormatError(ValueError):
    """Malformed code file. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class CodeInvariantError(ValueError):
    """A code violates a structural invariant; ``invariant`` names which one."""

    def __init__(self, invariant: str, message: str):
        self.invariant = invariant
        super().__init__(f"{invariant}: {message}")


def _frozen(arr) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.int32)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class TannerGraph:
    """Bipartite check/variable graph with edges stored check-major.

    Edge ``e`` joins check ``edge_check[e]`` and variable ``edge_var[e]``.
    Check ``m`` owns the contiguous edge slice ``check_ptr[m]:check_ptr[m+1]``;
    variable ``n`` owns ``var_edges[var_ptr[n]:var_ptr[n+1]]`` (ordered by
    check index). ``block_check_ptr``/``block_var_ptr`` partition the graph
    into independent blocks that a decoder may stop separately.
    """

    num_checks: int
    num_vars: int
    edge_check: np.ndarray
    edge_var: np.ndarray
    check_ptr: np.ndarray
    var_ptr: np.ndarray
    var_edges: np.ndarray
    block_check_ptr: np.ndarray
    block_var_ptr: np.ndarray

    @property
    def num_edges(self) -> int:
        return int(self.edge_var.size)

    @property
    def num_blocks(self) -> int:
        return int(self.block_check_ptr.size - 1)

    @property
    def check_degrees(self) -> np.ndarray:
        return np.diff(self.check_ptr)

    @property
    def var_degrees(self) -> np.ndarray:
        return np.diff(self.var_ptr)

    def check_adjacency(self, m: int) -> np.ndarray:
        """Variables attached to check ``m``."""
        return self.edge_var[self.check_ptr[m] : self.check_ptr[m + 1]]

    def var_adjacency(self, n: int) -> np.ndarray:
        """Checks attached to variable ``n``."""
        return self.edge_check[self.var_edges[self.var_ptr[n] : self.var_ptr[n + 1]]]

    def to_matrix(self) -> SparseGf2Matrix:
        return SparseGf2Matrix(
            self.num_checks,
            self.num_vars,
            [self.check_adjacency(m) for m in range(self.num_checks)],
        )

    def validate(self) -> None:
        E = self.num_edges
        if self.check_ptr[-1] != E or self.var_ptr[-1] != E:
            raise CodeInvariantError("degree-sum", "degree sums differ from edge count")
        if sorted(self.var_edges.tolist()) != list(range(E)):
            raise CodeInvariantError("edge-partition", "variable slices do not cover edges once")
        for n in range(self.num_vars):
            sl = self.var_edges[self.var_ptr[n] : self.var_ptr[n + 1]]
            if np.any(self.edge_var[sl] != n):
                raise CodeInvariantError("edge-partition", f"variable {n} slice is wrong")
        expected = np.repeat(np.arange(self.num_checks), self.check_degrees)
        if not np.array_equal(expected, self.edge_check):
            raise CodeInvariantError("edge-partition", "check slices are not contiguous")


def build_tanner_graph(H: SparseGf2Matrix) -> TannerGraph:
    """Tanner graph of ``H``, one edge per nonzero, edges in row-major order."""
    if H.rows == 0 or H.cols == 0:
        raise ValueError("cannot build a Tanner graph from an empty matrix")
    edge_check = np.repeat(np.arange(H.rows, dtype=np.int32), H.row_weights())
    edge_var = np.asarray(H.row_idx, dtype=np.int32)
    var_edges = np.lexsort((edge_check, edge_var)).astype(np.int32)
    return TannerGraph(
        num_checks=H.rows,
        num_vars=H.cols,
        edge_check=_frozen(edge_check),
        edge_var=_frozen(edge_var),
        check_ptr=_frozen(H.row_ptr),
        var_ptr=_frozen(H.col_ptr),
        var_edges=_frozen(var_edges),
        block_check_ptr=_frozen([0, H.rows]),
        block_var_ptr=_frozen([0, H.cols]),
    )


def combine_graphs(*graphs: TannerGraph) -> TannerGraph:
    """Block-diagonal union; each input becomes one independently-stopped block."""
    edge_check, edge_var, var_edges = [], [], []
    check_ptr, var_ptr = [np.zeros(1, np.int32)], [np.zeros(1, np.int32)]
    bc, bv = [0], [0]
    c_off = v_off = e_off = 0
    for g in graphs:
        edge_check.append(g.edge_check + c_off)
        edge_var.append(g.edge_var + v_off)
        var_edges.append(g.var_edges + e_off)
        check_ptr.append(g.check_ptr[1:] + e_off)
        var_ptr.append(g.var_ptr[1:] + e_off)
        for b in range(g.num_blocks):
            bc.append(int(g.block_check_ptr[b + 1]) + c_off)
            bv.append(int(g.block_var_ptr[b + 1]) + v_off)
        c_off += g.num_checks
        v_off += g.num_vars
        e_off += g.num_edges
    return TannerGraph(
        num_checks=c_off,
        num_vars=v_off,
        edge_check=_frozen(np.concatenate(edge_check)),
        edge_var=_frozen(np.concatenate(edge_var)),
        check_ptr=_frozen(np.concatenate(check_ptr)),
        var_ptr=_frozen(np.concatenate(var_ptr)),
        var_edges=_frozen(np.concatenate(var_edges)),
        block_check_ptr=_frozen(bc),
        block_var_ptr=_frozen(bv),
    )


@dataclass(frozen=True)
class CodeParams:
    n: int
    k: int
    d: Optional[int] = None

    def __post_init__(self):
        if not self.n >= self.k >= 0:
            raise ValueError(f"need n >= k >= 0, got n={self.n}, k={self.k}")
        if self.d is not None and self.d < 1:
            raise ValueError(f"distance must be >= 1, got {self.d}")

    def label(self) -> str:
        return f"[[{self.n},{self.k},{self.d if self.d is not None else '?'}]]"


def _canonical_terms(terms, l: int, m: int, which: str) -> tuple[tuple[int, int], ...]:
    reduced = tuple((int(i) % l, int(j) % m) for i, j in terms)
    if not reduced:
        raise ValueError(f"{which} must not be empty")
    if len(set(reduced)) != len(reduced):
        raise ValueError(f"{which} has duplicate monomials after reduction: {reduced}")
    return reduced


@dataclass(frozen=True)
class BbCodeSpec:
    """Bivariate bicycle construction: A = sum x^i y^j over ``a_terms``, B likewise."""

    l: int
    m: int
    a_terms: tuple[tuple[int, int], ...]
    b_terms: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.l < 1 or self.m < 1:
            raise ValueError("l and m must be positive")
        object.__setattr__(self, "a_terms", _canonical_terms(self.a_terms, self.l, self.m, "a_terms"))
        object.__setattr__(self, "b_terms", _canonical_terms(self.b_terms, self.l, self.m, "b_terms"))

    def to_json(self) -> dict:
        return {
            "l": self.l,
            "m": self.m,
            "a_terms": [list(t) for t in self.a_terms],
            "b_terms": [list(t) for t in self.b_terms],
        }


@dataclass(eq=False)
class CssCode:
    """Pair of commuting parity-check matrices.

    ``hx`` rows are X-type stabilizers and detect Z errors; ``hz`` rows are
    Z-type stabilizers and detect X errors. Construction verifies commutativity
    and computes k by rank; a declared k that disagrees is rejected.
    """

    name: str
    hx: SparseGf2Matrix
    hz: SparseGf2Matrix
    declared_k: Optional[int] = None
    declared_d: Optional[int] = None
    construction: Optional[BbCodeSpec] = None
    params: CodeParams = field(init=False)

    def __post_init__(self):
        if self.hx.cols != self.hz.cols:
            raise CodeInvariantError(
                "column-count", f"H_X has {self.hx.cols} columns, H_Z has {self.hz.cols}"
            )
        if not commutes(self.hx, self.hz):
            raise CodeInvariantError("commutativity", "H_X . H_Z^T != 0")
        n = self.hx.cols
        k = n - rank(self.hx) - rank(self.hz)
        if self.declared_k is not None and self.declared_k != k:
            raise CodeInvariantError(
                "logical-count", f"declared k={self.declared_k} but rank gives k={k}"
            )
        self.params = CodeParams(n, k, self.declared_d)

    @property
    def n_phys(self) -> int:
        return self.hx.cols

    @cached_property
    def graph_x(self) -> TannerGraph:
        """Graph for decoding X errors (built from H_Z, syndrome s_X = H_Z e_X)."""
        return build_tanner_graph(self.hz)

    @cached_property
    def graph_z(self) -> TannerGraph:
        """Graph for decoding Z errors (built from H_X, syndrome s_Z = H_X e_Z)."""
        return build_tanner_graph(self.hx)

    @cached_property
    def graph_combined(self) -> TannerGraph:
        """diag(H_Z, H_X): decodes s_X ++ s_Z into e_X ++ e_Z in one pass."""
        return combine_graphs(self.graph_x, self.graph_z)

    @cached_property
    def x_stabilizers(self) -> RowSpace:
        return RowSpace(self.hx)

    @cached_property
    def z_stabilizers(self) -> RowSpace:
        return RowSpace(self.hz)


def commutes(hx: SparseGf2Matrix, hz: SparseGf2Matrix) -> bool:
    """Entry-exact check of H_X . H_Z^T == 0 over GF(2)."""
    prod = hx.to_dense().astype(np.float64) @ hz.to_dense().T.astype(np.float64)
    return not np.any(np.rint(prod).astype(np.int64) & 1)


def _shift_monomial(l: int, m: int, i: int, j: int) -> np.ndarray:
    """Column index hit by each row of the permutation matrix x^i y^j."""
    rows = np.arange(l * m)
    a, b = np.divmod(rows, m)
    return ((a + i) % l) * m + (b + j) % m


def _poly_supports(l: int, m: int, terms) -> list[list[int]]:
    cols = np.stack([_shift_monomial(l, m, i, j) for i, j in terms], axis=1)
    return [sorted(row.tolist()) for row in cols]


def build_bb_code(
    spec: BbCodeSpec, name: Optional[str] = None, declared_k: Optional[int] = None,
    declared_d: Optional[int] = None,
) -> CssCode:
    """H_X = [A | B], H_Z = [B^T | A^T] on 2*l*m qubits."""
    lm = spec.l * spec.m
    A = SparseGf2Matrix(lm, lm, _poly_supports(spec.l, spec.m, spec.a_terms))
    B = SparseGf2Matrix(lm, lm, _poly_supports(spec.l, spec.m, spec.b_terms))
    hx = SparseGf2Matrix.hstack(A, B)
    hz = SparseGf2Matrix.hstack(B.transpose(), A.transpose())
    return CssCode(
        name=name or f"bb_{spec.l}x{spec.m}",
        hx=hx,
        hz=hz,
        declared_k=declared_k,
        declared_d=declared_d,
        construction=spec,
    )


def toy_code() -> SparseGf2Matrix:
    """The 3x6 example matrix with check degree 4 and variable degree 2."""
    return SparseGf2Matrix.from_dense(
        [
            [1, 0, 1, 1, 0, 1],
            [1, 1, 0, 1, 1, 0],
            [0, 1, 1, 0, 1, 1],
        ]
    )


# --- alist -----------------------------------------------------------------


def _ints(line: str, lineno: int) -> list[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise CodeFormatError(f"non-integer token in {line.strip()!r}", lineno) from None


def load_alist(text: bytes | str) -> SparseGf2Matrix:
    """Parse MacKay alist text. Zero entries in support lines are padding."""
    if isinstance(text, bytes):
        text = text.decode("ascii")
    lines = text.splitlines()
    if not any(ln.strip() for ln in lines):
        raise CodeFormatError("empty alist input", 1)

    def line(i: int) -> list[int]:
        if i >= len(lines):
            raise CodeFormatError("unexpected end of file", i + 1)
        return _ints(lines[i], i + 1)

    header = line(0)
    if len(header) != 2 or min(header) < 0:
        raise CodeFormatError("expected 'N M'", 1)
    n_cols, n_rows = header
    max_deg = line(1)
    if len(max_deg) != 2:
        raise CodeFormatError("expected two maximum degrees", 2)
    col_deg = line(2)
    row_deg = line(3)
    if len(col_deg) != n_cols:
        raise CodeFormatError(f"expected {n_cols} column degrees, got {len(col_deg)}", 3)
    if len(row_deg) != n_rows:
        raise CodeFormatError(f"expected {n_rows} row degrees, got {len(row_deg)}", 4)
    if max(col_deg, default=0) != max_deg[0] or max(row_deg, default=0) != max_deg[1]:
        raise CodeFormatError("maximum degrees disagree with degree lists", 2)

    def supports(first: int, count: int, degs: list[int], bound: int, what: str):
        out = []
        for k in range(count):
            lineno = first + k + 1
            entries = [v for v in line(first + k) if v != 0]
            if len(entries) != degs[k]:
                raise CodeFormatError(
                    f"{what} {k + 1} lists {len(entries)} entries, degree says {degs[k]}", lineno
                )
            if any(v < 1 or v > bound for v in entries):
                raise CodeFormatError(f"{what} {k + 1} has index outside 1..{bound}", lineno)
            if len(set(entries)) != len(entries):
                raise CodeFormatError(f"{what} {k + 1} has duplicate indices", lineno)
            out.append(sorted(v - 1 for v in entries))
        return out

    col_sup = supports(4, n_cols, col_deg, n_rows, "column")
    row_sup = supports(4 + n_cols, n_rows, row_deg, n_cols, "row")
    if any(ln.strip() for ln in lines[4 + n_cols + n_rows :]):
        raise CodeFormatError("trailing data after row supports", 4 + n_cols + n_rows + 1)
    H = SparseGf2Matrix(n_rows, n_cols, row_sup)
    if H.col_support != col_sup:
        bad = next(j for j, (a, b) in enumerate(zip(H.col_support, col_sup)) if a != b)
        raise CodeFormatError(
            f"column {bad + 1} support contradicts the row supports", 4 + bad + 1
        )
    return H


def save_alist(H: SparseGf2Matrix) -> bytes:
    """Canonical alist bytes: no zero padding, 1-based sorted supports."""
    cw, rw = H.col_weights(), H.row_weights()
    out = [
        f"{H.cols} {H.rows}",
        f"{int(cw.max(initial=0))} {int(rw.max(initial=0))}",
        " ".join(map(str, cw.tolist())),
        " ".join(map(str, rw.tolist())),
    ]
    out += [" ".join(str(i + 1) for i in H.col(j)) for j in range(H.cols)]
    out += [" ".join(str(j + 1) for j in H.row(i)) for i in range(H.rows)]
    return ("\n".join(out) + "\n").encode("ascii")


# --- JSON descriptors --------------------------------------------------------


def _read_alist_ref(ref: str, base_dir: Optional[Path]) -> SparseGf2Matrix:
    if "\n" in ref:
        return load_alist(ref)
    path = Path(ref)
    if not path.is_absolute() and base_dir is not None:
        path = base_dir / path
    return load_alist(path.read_bytes())


def load_css_json(text: str, base_dir: Optional[os.PathLike] = None) -> CssCode:
    """Load a CSS descriptor; relative alist paths resolve against ``base_dir``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CodeFormatError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    try:
        name = str(doc["name"])
        params = doc["params"]
        construction = doc["construction"]
    except (KeyError, TypeError) as exc:
        raise CodeFormatError(f"descriptor missing field {exc}") from None
    k, d = params.get("k"), params.get("d")
    base = Path(base_dir) if base_dir is not None else None
    if "bb" in construction:
        bb = construction["bb"]
        spec = BbCodeSpec(
            int(bb["l"]), int(bb["m"]),
            tuple(tuple(t) for t in bb["a_terms"]), tuple(tuple(t) for t in bb["b_terms"]),
        )
        code = build_bb_code(spec, name=name, declared_k=k, declared_d=d)
    elif "alist_x" in construction and "alist_z" in construction:
        hx = _read_alist_ref(construction["alist_x"], base)
        hz = _read_alist_ref(construction["alist_z"], base)
        code = CssCode(name=name, hx=hx, hz=hz, declared_k=k, declared_d=d)
    else:
        raise CodeFormatError("construction needs 'bb' or 'alist_x'/'alist_z'")
    if "n" in params and params["n"] != code.n_phys:
        raise CodeInvariantError(
            "qubit-count", f"declared n={params['n']} but matrices have {code.n_phys} columns"
        )
    return code


def save_css_json(
    code: CssCode, alist_x: Optional[str] = None, alist_z: Optional[str] = None
) -> str:
    """Serialize ``code``. BB codes keep their construction; others embed alist
    text inline unless file names are given."""
    p = code.params
    doc: dict = {"name": code.name, "params": {"n": p.n, "k": p.k, "d": p.d}}
    if code.construction is not None and alist_x is None:
        doc["construction"] = {"bb": code.construction.to_json()}
    else:
        doc["construction"] = {
            "alist_x": alist_x or save_alist(code.hx).decode(),
            "alist_z": alist_z or save_alist(code.hz).decode(),
        }
    return json.dumps(doc, indent=2) + "\n"


# --- built-in codes ------------------------------------------------------------

# (l, m, A terms, B terms, declared d); terms are (x exponent, y exponent).
_BB_TABLE = {
    "bb72": (6, 6, ((3, 0), (0, 1), (0, 2)), ((0, 3), (1, 0), (2, 0)), 6),
    "bb108": (9, 6, ((3, 0), (0, 1), (0, 2)), ((0, 3), (1, 0), (2, 0)), 10),
    "bb144": (12, 6, ((3, 0), (0, 1), (0, 2)), ((0, 3), (1, 0), (2, 0)), 12),
    "bb288": (12, 12, ((3, 0), (0, 2), (0, 7)), ((0, 3), (1, 0), (2, 0)), 18),
    "bb784": (28, 14, ((26, 0), (0, 6), (0, 8)), ((0, 7), (9, 0), (20, 0)), 24),
}
_BB_K = {"bb72": 12, "bb108": 8, "bb144": 12, "bb288": 12, "bb784": 24}

BUILTIN_CODES: tuple[str, ...] = tuple(_BB_TABLE)


@lru_cache(maxsize=None)
def builtin_code(name: str) -> CssCode:
    if name not in _BB_TABLE:
        raise KeyError(f"unknown built-in code {name!r}; choose from {', '.join(BUILTIN_CODES)}")
    l, m, a, b, d = _BB_TABLE[name]
    return build_bb_code(BbCodeSpec(l, m, a, b), name=name, declared_k=_BB_K[name], declared_d=d)


def resolve_code(ref: str) -> CssCode:
    """Built-in name, or a JSON descriptor path (searched in $QLDPC_MSA_CODE_DIR too)."""
    if ref in _BB_TABLE:
        return builtin_code(ref)
    path = Path(ref)
    if not path.exists() and os.environ.get(CODE_DIR_ENV):
        alt = Path(os.environ[CODE_DIR_ENV]) / ref
        if alt.exists():
            path = alt
        elif alt.with_suffix(".json").exists():
            path = alt.with_suffix(".json")
    if not path.exists():
        raise FileNotFoundError(f"no built-in code or file named {ref!r}")
    return load_css_json(path.read_text(), base_dir=path.parent)

