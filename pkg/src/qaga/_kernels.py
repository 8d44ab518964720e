"""Compiled inner loops.

Every kernel walks its data in a fixed order so results do not depend on how
callers batch rows.
"""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def batch_energy(spins, h, rows, cols, vals, offset):
    m, n = spins.shape
    out = np.empty(m)
    for r in range(m):
        e = offset
        for i in range(n):
            e += h[i] * spins[r, i]
        for k in range(rows.shape[0]):
            e += vals[k] * spins[r, rows[k]] * spins[r, cols[k]]
        out[r] = e
    return out


@njit(cache=True, nogil=True)
def anneal(spins, uniforms, betas, h, indptr, nbr, w):
    """Metropolis sweeps in ascending variable order, in place on ``spins``.

    ``uniforms[r]`` holds one draw per attempted flip (sweeps * n). Returns
    the accumulated energy change of each read.
    """
    m, n = spins.shape
    n_sweeps = betas.shape[0]
    delta_total = np.zeros(m)
    field = np.empty(n)
    for r in range(m):
        # local field seen by each spin: h_i + sum_j J_ij s_j
        for i in range(n):
            f = h[i]
            for p in range(indptr[i], indptr[i + 1]):
                f += w[p] * spins[r, nbr[p]]
            field[i] = f
        k = 0
        acc = 0.0
        for t in range(n_sweeps):
            beta = betas[t]
            for i in range(n):
                s = spins[r, i]
                de = -2.0 * s * field[i]
                u = uniforms[r, k]
                k += 1
                if de <= 0.0 or u < np.exp(-beta * de):
                    spins[r, i] = -s
                    acc += de
                    for p in range(indptr[i], indptr[i + 1]):
                        field[nbr[p]] -= 2.0 * s * w[p]
        delta_total[r] = acc
    return delta_total


@njit(cache=True, nogil=True)
def descend(z, h, indptr, nbr, w):
    """Single-flip descent in place: ascending sweeps, strict improvements only."""
    n = z.shape[0]
    field = np.empty(n)
    for i in range(n):
        f = h[i]
        for p in range(indptr[i], indptr[i + 1]):
            f += w[p] * z[nbr[p]]
        field[i] = f
    changed = True
    while changed:
        changed = False
        for i in range(n):
            s = z[i]
            if -2.0 * s * field[i] < 0.0:
                z[i] = -s
                changed = True
                for p in range(indptr[i], indptr[i + 1]):
                    field[nbr[p]] -= 2.0 * s * w[p]
    return z


@njit(cache=True, nogil=True)
def label_components(mask, indptr, nbr):
    """Connected components of the masked vertices; -1 outside the mask.

    Labels are numbered in order of each component's smallest vertex.
    """
    n = mask.shape[0]
    labels = np.full(n, -1, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    count = 0
    for start in range(n):
        if not mask[start] or labels[start] >= 0:
            continue
        labels[start] = count
        top = 0
        stack[top] = start
        top += 1
        while top > 0:
            top -= 1
            i = stack[top]
            for p in range(indptr[i], indptr[i + 1]):
                j = nbr[p]
                if mask[j] and labels[j] < 0:
                    labels[j] = count
                    stack[top] = j
                    top += 1
        count += 1
    return labels


@njit(cache=True, nogil=True)
def component_terms(z, labels, n_comp, h, indptr, nbr, w):
    """Per-component energy terms of ``z``: fields, internal couplers, couplers to unlabelled vertices."""
    n = z.shape[0]
    out = np.zeros(n_comp)
    for i in range(n):
        c = labels[i]
        if c < 0:
            continue
        t = h[i] * z[i]
        for p in range(indptr[i], indptr[i + 1]):
            j = nbr[p]
            if labels[j] < 0:
                t += w[p] * z[i] * z[j]
            elif j > i:
                t += w[p] * z[i] * z[j]
        out[c] += t
    return out
