"""Numpy implementation of the min-sum kernels.

Same signatures and results as the compiled ``_kernels`` module. Work is
vectorized across the batch and across nodes; per-edge sums are accumulated
slot by slot so that floating-point rounding matches the compiled loops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NAME = "python"


@dataclass
class _Block:
    c0: int
    c1: int
    v0: int
    v1: int
    e0: int
    n_edges: int
    chk_idx: np.ndarray  # (checks, dc_max) local edge ids, padded with n_edges
    chk_mask: np.ndarray
    deg1: np.ndarray  # checks of degree one
    var_idx: np.ndarray  # (vars, dv_max) local edge ids, padded with n_edges
    var_mask: np.ndarray
    edge_var: np.ndarray  # local variable of each local edge
    check_ptr: np.ndarray  # local, starts at 0


_cache: dict[tuple, list[_Block]] = {}


def _padded(ptr: np.ndarray, members: np.ndarray, pad: int) -> tuple[np.ndarray, np.ndarray]:
    deg = np.diff(ptr)
    width = max(int(deg.max(initial=0)), 1)
    slot = np.arange(width)
    mask = slot[None, :] < deg[:, None]
    idx = np.full((deg.size, width), pad, dtype=np.int64)
    idx[mask] = members
    return idx, mask


def _blocks(check_ptr, edge_var, var_ptr, var_edges, block_check_ptr, block_var_ptr):
    key = tuple(
        np.ascontiguousarray(a, dtype=np.int32).tobytes()
        for a in (check_ptr, edge_var, var_ptr, var_edges, block_check_ptr, block_var_ptr)
    )
    hit = _cache.get(key)
    if hit is not None:
        return hit
    check_ptr = np.asarray(check_ptr, dtype=np.int64)
    edge_var = np.asarray(edge_var, dtype=np.int64)
    var_ptr = np.asarray(var_ptr, dtype=np.int64)
    var_edges = np.asarray(var_edges, dtype=np.int64)
    out = []
    for b in range(len(block_check_ptr) - 1):
        c0, c1 = int(block_check_ptr[b]), int(block_check_ptr[b + 1])
        v0, v1 = int(block_var_ptr[b]), int(block_var_ptr[b + 1])
        e0, e1 = int(check_ptr[c0]), int(check_ptr[c1])
        n_edges = e1 - e0
        cptr = check_ptr[c0 : c1 + 1] - e0
        chk_idx, chk_mask = _padded(cptr, np.arange(n_edges), n_edges)
        vptr = var_ptr[v0 : v1 + 1] - var_ptr[v0]
        members = var_edges[var_ptr[v0] : var_ptr[v1]] - e0
        var_idx, var_mask = _padded(vptr, members, n_edges)
        out.append(
            _Block(
                c0, c1, v0, v1, e0, n_edges, chk_idx, chk_mask,
                np.flatnonzero(np.diff(cptr) == 1), var_idx, var_mask,
                edge_var[e0:e1] - v0, cptr,
            )
        )
    if len(_cache) >= 32:
        _cache.pop(next(iter(_cache)))
    _cache[key] = out
    return out


def _syndrome_ok(blk: _Block, syn: np.ndarray, est: np.ndarray) -> np.ndarray:
    bits = est[:, blk.edge_var].astype(np.int64)
    csum = np.zeros((bits.shape[0], bits.shape[1] + 1), dtype=np.int64)
    np.cumsum(bits, axis=1, out=csum[:, 1:])
    par = (csum[:, blk.check_ptr[1:]] - csum[:, blk.check_ptr[:-1]]) & 1
    return ~((par ^ syn).astype(bool)).any(axis=1)


def _check_stage(blk: _Block, q: np.ndarray, syn: np.ndarray, alpha, large, integer: bool):
    """Check-node outputs on the padded check view; returns (rows, checks, dc_max)."""
    qc = q[:, blk.chk_idx]
    if integer:
        qc = qc.astype(np.int32)
    neg = qc < 0
    parity = (syn.astype(np.int64) + neg.sum(axis=2)) & 1
    if integer:
        mag = np.where(blk.chk_mask, np.abs(qc), large + 1)
    else:
        mag = np.where(blk.chk_mask, np.abs(qc), np.inf)
    imin = np.argmin(mag, axis=2)[..., None]
    min1 = np.take_along_axis(mag, imin, axis=2)
    rest = mag.copy()
    np.put_along_axis(rest, imin, large + 1 if integer else np.inf, axis=2)
    min2 = rest.min(axis=2, keepdims=True)
    if blk.deg1.size:
        min2[:, blk.deg1] = large
    slot = np.arange(mag.shape[2])
    excl = np.where(slot == imin, min2, min1)
    if integer:
        val = (excl * alpha + 512) >> 10
    else:
        val = alpha * excl
    out_neg = (parity[..., None] == 1) ^ neg
    return np.where(out_neg, -val, val)


def _run(check_ptr, edge_var, var_ptr, var_edges, block_check_ptr, block_var_ptr,
         syndromes, gamma, alpha, max_iter, early_term, large, e_hat, iters, conv,
         integer: bool, state: dict | None = None):
    syndromes = np.asarray(syndromes, dtype=np.uint8)
    gamma = np.asarray(gamma)
    dtype = gamma.dtype
    acc_dtype = np.int32 if integer else np.float64
    n_batch = syndromes.shape[0]
    for b_i, blk in enumerate(
        _blocks(check_ptr, edge_var, var_ptr, var_edges, block_check_ptr, block_var_ptr)
    ):
        g = gamma[blk.v0 : blk.v1].astype(acc_dtype)
        syn_all = syndromes[:, blk.c0 : blk.c1]
        active = np.arange(n_batch)
        q = np.zeros((n_batch, blk.n_edges + 1), dtype=dtype)
        r = np.zeros((n_batch, blk.n_edges + 1), dtype=dtype)
        Q = np.zeros((n_batch, blk.v1 - blk.v0), dtype=dtype)
        est = np.zeros((n_batch, blk.v1 - blk.v0), dtype=np.uint8)
        q[:, blk.var_idx[blk.var_mask]] = np.broadcast_to(
            np.repeat(gamma[blk.v0 : blk.v1], blk.var_mask.sum(axis=1)), (n_batch, blk.n_edges)
        )
        k = 0
        while k < max_iter and active.size:
            k += 1
            syn = syn_all[active]
            rc = _check_stage(blk, q[active], syn, alpha, large, integer)
            r_act = r[active]
            r_act[:, blk.chk_idx[blk.chk_mask]] = rc[:, blk.chk_mask]
            r_act[:, blk.n_edges] = 0
            r[active] = r_act
            rv = r_act[:, blk.var_idx].astype(acc_dtype)
            width = rv.shape[2]
            qv = np.empty_like(rv)
            for i in range(width):
                acc = np.broadcast_to(g, rv.shape[:2]).copy()
                for j in range(width):
                    if j != i:
                        acc = acc + rv[:, :, j]
                qv[:, :, i] = acc
            post = np.broadcast_to(g, rv.shape[:2]).copy()
            for j in range(width):
                post = post + rv[:, :, j]
            if integer:
                qv = np.clip(qv, -large, large)
            q_act = q[active]
            q_act[:, blk.var_idx[blk.var_mask]] = qv[:, blk.var_mask].astype(dtype)
            q[active] = q_act
            Q[active] = (np.clip(post, -large, large) if integer else post).astype(dtype)
            est[active] = post < 0
            ok = _syndrome_ok(blk, syn, est[active])
            done = ok if early_term else np.zeros_like(ok)
            if k == max_iter:
                done = np.ones_like(ok)
            finished = active[done]
            iters[finished, b_i] = k
            conv[finished, b_i] = ok[done]
            e_hat[finished, blk.v0 : blk.v1] = est[finished]
            active = active[~done]
        if state is not None:
            state["q"][:, blk.e0 : blk.e0 + blk.n_edges] = q[:, : blk.n_edges]
            state["r"][:, blk.e0 : blk.e0 + blk.n_edges] = r[:, : blk.n_edges]
            state["Q"][:, blk.v0 : blk.v1] = Q


def minsum_float(check_ptr, edge_var, var_ptr, var_edges, block_check_ptr, block_var_ptr,
                 syndromes, gamma, alpha, max_iter, early_term, large, e_hat, iters, conv,
                 state=None):
    _run(check_ptr, edge_var, var_ptr, var_edges, block_check_ptr, block_var_ptr,
         syndromes, np.asarray(gamma, dtype=np.float64), float(alpha), int(max_iter),
         bool(early_term), float(large), e_hat, iters, conv, integer=False, state=state)


def minsum_int(check_ptr, edge_var, var_ptr, var_edges, block_check_ptr, block_var_ptr,
               syndromes, gamma, alpha_fix, max_iter, early_term, satmax, e_hat, iters, conv,
               state=None):
    _run(check_ptr, edge_var, var_ptr, var_edges, block_check_ptr, block_var_ptr,
         syndromes, gamma, int(alpha_fix), int(max_iter), bool(early_term), int(satmax),
         e_hat, iters, conv, integer=True, state=state)
