"""The compiled kernels and the numpy fallback must agree bit for bit."""

import subprocess
import sys

import numpy as np
import pytest

from qldpc_msa import backends
from qldpc_msa.codes import build_tanner_graph, builtin_code
from qldpc_msa.decoder import Decoder, DecoderConfig
from qldpc_msa.gf2 import SparseGf2Matrix

needs_compiled = pytest.mark.skipif(
    "cython" not in backends.available(), reason="compiled kernels not built"
)


def test_backend_selection():
    assert backends.get("python") is backends._fallback
    assert backends.name_of(backends.get("python")) == "python"
    assert backends.get("auto") in (backends._compiled, backends._fallback)
    with pytest.raises(ValueError):
        backends.get("fortran")


def _both(graph, cfg, syn):
    a = Decoder(graph, cfg, backend="cython").decode_array(syn)
    b = Decoder(graph, cfg, backend="python").decode_array(syn)
    return a, b


@needs_compiled
@pytest.mark.parametrize("name", ["bb72", "bb144", "bb784"])
@pytest.mark.parametrize("mode", ["float", "int8", "int16"])
@pytest.mark.parametrize("early", [True, False])
def test_backends_identical_on_builtin_codes(name, mode, early):
    code = builtin_code(name)
    g = code.graph_combined
    rng = np.random.default_rng(hash((name, mode, early)) % 2**32)
    e = (rng.random((40, g.num_vars)) < 0.02).astype(np.uint8)
    syn = (e.astype(np.int64) @ g.to_matrix().to_dense().T.astype(np.int64)) % 2
    syn[:5] = rng.integers(0, 2, (5, g.num_checks))  # some unreachable-looking inputs
    a, b = _both(g, DecoderConfig(arithmetic=mode, early_termination=early), syn)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


@needs_compiled
@pytest.mark.parametrize("mode", ["float", "int8", "int16"])
def test_backends_identical_on_irregular_graph_with_degree_one(mode):
    rng = np.random.default_rng(99)
    A = (rng.random((15, 25)) < 0.2).astype(np.uint8)
    A[0] = 0
    A[0, 3] = 1  # degree-one check
    A[1] = 0
    A[1, 7] = 1
    for m in range(2, 15):
        if not A[m].any():
            A[m, m] = 1
    g = build_tanner_graph(SparseGf2Matrix.from_dense(A))
    syn = rng.integers(0, 2, (60, 15))
    prior = tuple(rng.uniform(0.2, 4.0, 25))
    a, b = _both(g, DecoderConfig(arithmetic=mode, prior=prior, alpha=0.65, max_iterations=15), syn)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


def test_fallback_selected_when_extension_missing():
    code = (
        "import sys; sys.modules['qldpc_msa._kernels'] = None\n"
        "from qldpc_msa import backends, builtin_code, decode\n"
        "assert backends.available() == ['python'], backends.available()\n"
        "g = builtin_code('bb72').graph_x\n"
        "assert decode(g, [0] * g.num_checks).converged\n"
    )
    subprocess.run([sys.executable, "-c", code], check=True)
