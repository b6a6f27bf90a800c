"""Determinant-basis full CI via Slater-Condon rules.

Operates directly on (effective) spatial integrals in a fixed (n_alpha,
n_beta) sector, so it is independent of the Pauli representation and serves
as the reference oracle for fixture metadata energies.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np


def _spin_orbitals(n_spatial: int):
    return range(2 * n_spatial)


def _h_so(h1: np.ndarray, p: int, q: int) -> float:
    if p % 2 != q % 2:
        return 0.0
    return h1[p // 2, q // 2]


def _g_phys(eri: np.ndarray, p: int, q: int, r: int, s: int) -> float:
    """Physicist <pq|rs> from chemist (pr|qs) with spin deltas."""
    if p % 2 != r % 2 or q % 2 != s % 2:
        return 0.0
    return eri[p // 2, r // 2, q // 2, s // 2]


def _g_anti(eri, p, q, r, s) -> float:
    return _g_phys(eri, p, q, r, s) - _g_phys(eri, p, q, s, r)


def _single_sign(det: tuple[int, ...], p: int, q: int) -> int:
    lo, hi = (p, q) if p < q else (q, p)
    crossings = sum(1 for o in det if lo < o < hi)
    return -1 if crossings % 2 else 1


def sector_determinants(n_spatial: int, n_alpha: int, n_beta: int):
    alphas = [tuple(2 * o for o in occ) for occ in combinations(range(n_spatial), n_alpha)]
    betas = [tuple(2 * o + 1 for o in occ) for occ in combinations(range(n_spatial), n_beta)]
    return [tuple(sorted(a + b)) for a in alphas for b in betas]


def fci_ground_energy(h1: np.ndarray, eri: np.ndarray, constant: float,
                      n_electrons: int, sz2: int = 0) -> float:
    """Lowest eigenvalue in the (n_alpha, n_beta) sector plus the constant.

    sz2 is twice the spin projection; closed shells use 0.
    """
    n_spatial = h1.shape[0]
    n_alpha = (n_electrons + sz2) // 2
    n_beta = n_electrons - n_alpha
    dets = sector_determinants(n_spatial, n_alpha, n_beta)
    dim = len(dets)
    index = {d: i for i, d in enumerate(dets)}
    h = np.zeros((dim, dim))

    for i, det in enumerate(dets):
        occ = det
        # diagonal
        val = sum(_h_so(h1, p, p) for p in occ)
        for p in occ:
            for q in occ:
                val += 0.5 * _g_anti(eri, p, q, p, q)
        h[i, i] = val
        # singles p -> q
        occ_set = set(occ)
        for p in occ:
            for q in _spin_orbitals(n_spatial):
                if q in occ_set or q % 2 != p % 2:
                    continue
                new = tuple(sorted(occ_set - {p} | {q}))
                j = index[new]
                if j < i:
                    continue
                sign = _single_sign(occ, p, q)
                val = _h_so(h1, q, p)
                for o in occ:
                    if o != p:
                        val += _g_anti(eri, q, o, p, o)
                h[i, j] = h[j, i] = sign * val
        # doubles (p1, p2) -> (q1, q2)
        for p1, p2 in combinations(occ, 2):
            virt = [q for q in _spin_orbitals(n_spatial) if q not in occ_set]
            for q1, q2 in combinations(virt, 2):
                if (p1 % 2) + (p2 % 2) != (q1 % 2) + (q2 % 2):
                    continue
                new = tuple(sorted(occ_set - {p1, p2} | {q1, q2}))
                j = index[new]
                if j < i:
                    continue
                # sequential single moves fix the permutation sign
                mid_set = occ_set - {p1} | {q1}
                sign = _single_sign(occ, p1, q1) * _single_sign(tuple(sorted(mid_set)), p2, q2)
                val = _g_anti(eri, q1, q2, p1, p2)
                h[i, j] = h[j, i] = sign * val

    eigs = np.linalg.eigvalsh(h)
    return float(eigs[0] + constant)
