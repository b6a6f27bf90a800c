"""Gaussian integrals over contracted Cartesian functions (s and p shells).

McMurchie-Davidson scheme: Cartesian overlap distributions are expanded in
Hermite Gaussians (coefficients ``E``), Coulomb integrals reduce to Hermite
integrals ``R`` built from Boys functions.  Supports the angular momenta
STO-3G needs; recursions are generic in l.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import hyp1f1


@lru_cache(maxsize=None)
def _boys(n: int, x: float) -> float:
    return float(hyp1f1(n + 0.5, n + 1.5, -x)) / (2.0 * n + 1.0)


@lru_cache(maxsize=None)
def _hermite_e(i: int, j: int, t: int, q_ab: float, a: float, b: float) -> float:
    """Expansion coefficient E_t^{ij} for one Cartesian direction."""
    p = a + b
    mu = a * b / p
    if t < 0 or t > i + j:
        return 0.0
    if i == j == t == 0:
        return float(np.exp(-mu * q_ab * q_ab))
    if j == 0:
        return (
            _hermite_e(i - 1, j, t - 1, q_ab, a, b) / (2.0 * p)
            - (mu * q_ab / a) * _hermite_e(i - 1, j, t, q_ab, a, b)
            + (t + 1) * _hermite_e(i - 1, j, t + 1, q_ab, a, b)
        )
    return (
        _hermite_e(i, j - 1, t - 1, q_ab, a, b) / (2.0 * p)
        + (mu * q_ab / b) * _hermite_e(i, j - 1, t, q_ab, a, b)
        + (t + 1) * _hermite_e(i, j - 1, t + 1, q_ab, a, b)
    )


def _hermite_coulomb(t: int, u: int, v: int, n: int, p: float, pc) -> float:
    """Hermite Coulomb integral R^n_{tuv}(p, PC)."""
    if t == u == v == 0:
        r2 = pc[0] * pc[0] + pc[1] * pc[1] + pc[2] * pc[2]
        return (-2.0 * p) ** n * _boys(n, p * r2)
    if t > 0:
        val = pc[0] * _hermite_coulomb(t - 1, u, v, n + 1, p, pc)
        if t > 1:
            val += (t - 1) * _hermite_coulomb(t - 2, u, v, n + 1, p, pc)
        return val
    if u > 0:
        val = pc[1] * _hermite_coulomb(t, u - 1, v, n + 1, p, pc)
        if u > 1:
            val += (u - 1) * _hermite_coulomb(t, u - 2, v, n + 1, p, pc)
        return val
    val = pc[2] * _hermite_coulomb(t, u, v - 1, n + 1, p, pc)
    if v > 1:
        val += (v - 1) * _hermite_coulomb(t, u, v - 2, n + 1, p, pc)
    return val


def _overlap_prim(a, lmn1, ra, b, lmn2, rb) -> float:
    p = a + b
    s = (np.pi / p) ** 1.5
    for ax in range(3):
        s *= _hermite_e(lmn1[ax], lmn2[ax], 0, ra[ax] - rb[ax], a, b)
    return s


def _kinetic_prim(a, lmn1, ra, b, lmn2, rb) -> float:
    l2, m2, n2 = lmn2

    def ov(dl, dm, dn):
        lmn = (l2 + dl, m2 + dm, n2 + dn)
        if min(lmn) < 0:
            return 0.0
        return _overlap_prim(a, lmn1, ra, b, lmn, rb)

    term0 = b * (2 * (l2 + m2 + n2) + 3) * ov(0, 0, 0)
    term1 = -2.0 * b * b * (ov(2, 0, 0) + ov(0, 2, 0) + ov(0, 0, 2))
    term2 = -0.5 * (
        l2 * (l2 - 1) * ov(-2, 0, 0)
        + m2 * (m2 - 1) * ov(0, -2, 0)
        + n2 * (n2 - 1) * ov(0, 0, -2)
    )
    return term0 + term1 + term2


def _nuclear_prim(a, lmn1, ra, b, lmn2, rb, rc) -> float:
    p = a + b
    rp = [(a * ra[ax] + b * rb[ax]) / p for ax in range(3)]
    pc = (rp[0] - rc[0], rp[1] - rc[1], rp[2] - rc[2])
    val = 0.0
    for t in range(lmn1[0] + lmn2[0] + 1):
        et = _hermite_e(lmn1[0], lmn2[0], t, ra[0] - rb[0], a, b)
        for u in range(lmn1[1] + lmn2[1] + 1):
            eu = _hermite_e(lmn1[1], lmn2[1], u, ra[1] - rb[1], a, b)
            for v in range(lmn1[2] + lmn2[2] + 1):
                ev = _hermite_e(lmn1[2], lmn2[2], v, ra[2] - rb[2], a, b)
                val += et * eu * ev * _hermite_coulomb(t, u, v, 0, p, pc)
    return 2.0 * np.pi / p * val


def _eri_prim(a, lmn1, ra, b, lmn2, rb, c, lmn3, rc, d, lmn4, rd) -> float:
    p = a + b
    q = c + d
    omega = p * q / (p + q)
    rp = [(a * ra[ax] + b * rb[ax]) / p for ax in range(3)]
    rq = [(c * rc[ax] + d * rd[ax]) / q for ax in range(3)]
    pq = (rp[0] - rq[0], rp[1] - rq[1], rp[2] - rq[2])
    val = 0.0
    for t in range(lmn1[0] + lmn2[0] + 1):
        e1t = _hermite_e(lmn1[0], lmn2[0], t, ra[0] - rb[0], a, b)
        for u in range(lmn1[1] + lmn2[1] + 1):
            e1u = _hermite_e(lmn1[1], lmn2[1], u, ra[1] - rb[1], a, b)
            for v in range(lmn1[2] + lmn2[2] + 1):
                e1v = _hermite_e(lmn1[2], lmn2[2], v, ra[2] - rb[2], a, b)
                e1 = e1t * e1u * e1v
                if e1 == 0.0:
                    continue
                for tau in range(lmn3[0] + lmn4[0] + 1):
                    e2t = _hermite_e(lmn3[0], lmn4[0], tau, rc[0] - rd[0], c, d)
                    for nu in range(lmn3[1] + lmn4[1] + 1):
                        e2u = _hermite_e(lmn3[1], lmn4[1], nu, rc[1] - rd[1], c, d)
                        for phi in range(lmn3[2] + lmn4[2] + 1):
                            e2v = _hermite_e(lmn3[2], lmn4[2], phi, rc[2] - rd[2], c, d)
                            e2 = e2t * e2u * e2v
                            if e2 == 0.0:
                                continue
                            sign = -1.0 if (tau + nu + phi) % 2 else 1.0
                            val += e1 * e2 * sign * _hermite_coulomb(
                                t + tau, u + nu, v + phi, 0, omega, pq
                            )
    return val * 2.0 * np.pi ** 2.5 / (p * q * np.sqrt(p + q))


def _contract2(fn, f1, f2, *extra) -> float:
    val = 0.0
    for a, ca in zip(f1.exponents, f1.coefficients):
        for b, cb in zip(f2.exponents, f2.coefficients):
            val += ca * cb * fn(a, f1.powers, f1.center, b, f2.powers, f2.center, *extra)
    return val


def overlap_matrix(aos) -> np.ndarray:
    n = len(aos)
    s = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            s[i, j] = s[j, i] = _contract2(_overlap_prim, aos[i], aos[j])
    return s


def kinetic_matrix(aos) -> np.ndarray:
    n = len(aos)
    t = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            t[i, j] = t[j, i] = _contract2(_kinetic_prim, aos[i], aos[j])
    return t


def nuclear_matrix(aos, atoms) -> np.ndarray:
    from .basis import ATOMIC_NUMBER

    n = len(aos)
    v = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            val = 0.0
            for element, rc in atoms:
                val -= ATOMIC_NUMBER[element] * _contract2(
                    _nuclear_prim, aos[i], aos[j], tuple(rc)
                )
            v[i, j] = v[j, i] = val
    return v


def eri_tensor(aos) -> np.ndarray:
    """Chemist-notation (ij|kl) with full 8-fold symmetry."""
    n = len(aos)
    eri = np.zeros((n, n, n, n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1)]
    for a, (i, j) in enumerate(pairs):
        for (k, l) in pairs[: a + 1]:
            val = 0.0
            fi, fj, fk, fl = aos[i], aos[j], aos[k], aos[l]
            for ea, ca in zip(fi.exponents, fi.coefficients):
                for eb, cb in zip(fj.exponents, fj.coefficients):
                    for ec, cc in zip(fk.exponents, fk.coefficients):
                        for ed, cd in zip(fl.exponents, fl.coefficients):
                            val += ca * cb * cc * cd * _eri_prim(
                                ea, fi.powers, fi.center,
                                eb, fj.powers, fj.center,
                                ec, fk.powers, fk.center,
                                ed, fl.powers, fl.center,
                            )
            for (p, q) in ((i, j), (j, i)):
                for (r, s) in ((k, l), (l, k)):
                    eri[p, q, r, s] = eri[r, s, p, q] = val
    return eri
