"""Numeric inner loops behind landscape synthesis and map degradation.

Two interchangeable backends are provided: numba ``@njit`` kernels and a
pure-numpy implementation. Both consume pre-drawn uniform random arrays, so
for a given seed they produce bit-identical results. The active backend is
chosen at import time; set the environment variable ``LCVAL_NO_NUMBA=1`` to
force the numpy path (used by the benchmark and as a fallback when numba is
not installed).
"""
from __future__ import annotations

import os

import numpy as np

ENV_FLAG = "LCVAL_NO_NUMBA"

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - environment without numba
    HAVE_NUMBA = False


def _grow_step_numpy(labels: np.ndarray, rand: np.ndarray, out: np.ndarray) -> int:
    """One synchronous growth round: every unassigned cell copies the label
    of its first assigned 4-neighbour, scanning up/right/down/left in an
    order rotated by ``floor(rand*4)``. Returns the number of cells still
    unassigned afterwards."""
    up = np.full_like(labels, -1)
    up[1:, :] = labels[:-1, :]
    right = np.full_like(labels, -1)
    right[:, :-1] = labels[:, 1:]
    down = np.full_like(labels, -1)
    down[:-1, :] = labels[1:, :]
    left = np.full_like(labels, -1)
    left[:, 1:] = labels[:, :-1]
    stack = np.stack((up, right, down, left))

    k = (rand * 4.0).astype(np.int64)
    picked = np.full_like(labels, -1)
    for j in range(4):
        idx = (k + j) % 4
        cand = np.take_along_axis(stack, idx[None, :, :], axis=0)[0]
        picked = np.where((picked < 0) & (cand >= 0), cand, picked)

    np.copyto(out, np.where(labels < 0, picked, labels))
    return int(np.count_nonzero(out < 0))


def _degrade_cells_numpy(
    truth_idx: np.ndarray,
    cdf: np.ndarray,
    u_class: np.ndarray,
    u_nodata: np.ndarray,
    unclassified_rate: float,
) -> np.ndarray:
    """Sample a map-class index for every cell from the confusion kernel row
    of its truth-class index (inverse CDF over the row). Index -1 marks
    nodata in and out; ``u_nodata < unclassified_rate`` forces nodata out."""
    n_map = cdf.shape[1]
    out = np.full(truth_idx.shape, -1, dtype=np.int32)
    keep = (truth_idx >= 0) & (u_nodata >= unclassified_rate)
    rows = cdf[truth_idx[keep]]
    # smallest k with u < cdf[t, k]
    out[keep] = np.sum(u_class[keep, None] >= rows[:, : n_map - 1], axis=1).astype(
        np.int32
    )
    return out


if HAVE_NUMBA:

    @njit(cache=True)
    def _grow_step_numba(labels, rand, out):
        rows, cols = labels.shape
        remaining = 0
        for i in range(rows):
            for j in range(cols):
                lab = labels[i, j]
                if lab >= 0:
                    out[i, j] = lab
                    continue
                k = int(rand[i, j] * 4.0)
                picked = np.int32(-1)
                for step in range(4):
                    d = (k + step) % 4
                    if d == 0:
                        ni, nj = i - 1, j
                    elif d == 1:
                        ni, nj = i, j + 1
                    elif d == 2:
                        ni, nj = i + 1, j
                    else:
                        ni, nj = i, j - 1
                    if 0 <= ni < rows and 0 <= nj < cols:
                        nb = labels[ni, nj]
                        if nb >= 0:
                            picked = nb
                            break
                out[i, j] = picked
                if picked < 0:
                    remaining += 1
        return remaining

    @njit(cache=True)
    def _degrade_cells_numba(truth_idx, cdf, u_class, u_nodata, unclassified_rate):
        n = truth_idx.shape[0]
        n_map = cdf.shape[1]
        out = np.full(n, -1, dtype=np.int32)
        for i in range(n):
            t = truth_idx[i]
            if t < 0:
                continue
            if u_nodata[i] < unclassified_rate:
                continue
            u = u_class[i]
            k = 0
            while k < n_map - 1 and u >= cdf[t, k]:
                k += 1
            out[i] = k
        return out


def _select_backend():
    forced_numpy = os.environ.get(ENV_FLAG, "").strip() not in ("", "0")
    if forced_numpy or not HAVE_NUMBA:
        return "numpy", _grow_step_numpy, _degrade_cells_numpy
    return "numba", _grow_step_numba, _degrade_cells_numba


BACKEND, grow_step, degrade_cells = _select_backend()


def backend() -> str:
    """Name of the active kernel backend ('numba' or 'numpy')."""
    return BACKEND


def implementations() -> dict:
    """All available backends keyed by name (for benchmarks and tests)."""
    impls = {"numpy": (_grow_step_numpy, _degrade_cells_numpy)}
    if HAVE_NUMBA:
        impls["numba"] = (_grow_step_numba, _degrade_cells_numba)
    return impls
