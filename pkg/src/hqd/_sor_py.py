"""Pure numpy red-black projected SOR, same contract as the compiled kernels."""

from __future__ import annotations

import numpy as np

def _color_masks(active: np.ndarray):
    ny, nx = active.shape
    J, I = np.indices((ny, nx))
    inner = active[1:-1, 1:-1].astype(bool)
    parity = ((I + J) & 1)[1:-1, 1:-1]
    return inner & (parity == 0), inner & (parity == 1)


def sweeps(w, b, active, omega, inv_diag, count, nthreads=1):
    masks = _color_masks(active)
    core = w[1:-1, 1:-1]
    bc = b[1:-1, 1:-1]
    for _ in range(count):
        for mask in masks:
            gs = (w[1:-1, :-2] + w[1:-1, 2:] + w[:-2, 1:-1] + w[2:, 1:-1] + bc) * inv_diag
            new = (1.0 - omega) * core + omega * gs
            np.maximum(new, 0.0, out=new)
            np.copyto(core, new, where=mask)


def residual(w, b, active, inv_diag, nthreads=1):
    inner = active[1:-1, 1:-1].astype(bool)
    gs = (w[1:-1, :-2] + w[1:-1, 2:] + w[:-2, 1:-1] + w[2:, 1:-1] + b[1:-1, 1:-1]) * inv_diag
    r = np.abs(np.maximum(gs, 0.0) - w[1:-1, 1:-1])
    return float(r[inner].max()) if inner.any() else 0.0
