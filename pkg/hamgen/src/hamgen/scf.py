"""Restricted Hartree-Fock and MO-basis integral transformation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import build_basis, nuclear_repulsion
from .integrals import eri_tensor, kinetic_matrix, nuclear_matrix, overlap_matrix


class ScfConvergenceError(RuntimeError):
    pass


@dataclass
class ScfResult:
    e_total: float
    e_nuc: float
    mo_coeff: np.ndarray          # AO x MO
    mo_energies: np.ndarray
    hcore_mo: np.ndarray          # MO one-electron integrals
    eri_mo: np.ndarray            # MO chemist (pq|rs)
    n_electrons: int


def run_rhf(atoms, n_electrons=None, max_iter=200, conv=1e-11, diis_size=8) -> ScfResult:
    """Closed-shell RHF with DIIS; atoms are [(element, xyz_bohr), ...]."""
    from .basis import ATOMIC_NUMBER

    aos = build_basis(atoms)
    if n_electrons is None:
        n_electrons = sum(ATOMIC_NUMBER[el] for el, _ in atoms)
    if n_electrons % 2:
        raise ValueError("run_rhf handles closed shells only")
    n_occ = n_electrons // 2

    s = overlap_matrix(aos)
    hcore = kinetic_matrix(aos) + nuclear_matrix(aos, atoms)
    eri = eri_tensor(aos)
    e_nuc = nuclear_repulsion(atoms)

    sval, svec = np.linalg.eigh(s)
    x = svec @ np.diag(sval ** -0.5) @ svec.T

    def density(fock):
        fp = x.T @ fock @ x
        eps, cp = np.linalg.eigh(fp)
        c = x @ cp
        cocc = c[:, :n_occ]
        return cocc @ cocc.T, c, eps

    d, c, eps = density(hcore)
    # long damped warm-up: the damped fixed-point map escapes the saddle
    # solutions the core guess sits near (N2 converges ~0.6 Ha too high
    # otherwise); only afterwards is DIIS allowed to accelerate
    for _ in range(250):
        j = np.einsum("pqrs,rs->pq", eri, d)
        k = np.einsum("prqs,rs->pq", eri, d)
        d_new, c, eps = density(hcore + 2.0 * j - k)
        d = 0.5 * d + 0.5 * d_new

    fock_list, err_list = [], []
    e_old = 0.0
    for _ in range(max_iter):
        j = np.einsum("pqrs,rs->pq", eri, d)
        k = np.einsum("prqs,rs->pq", eri, d)
        fock = hcore + 2.0 * j - k
        err = fock @ d @ s - s @ d @ fock
        fock_list.append(fock)
        err_list.append(err)
        if len(fock_list) > diis_size:
            fock_list.pop(0)
            err_list.pop(0)
        if len(fock_list) > 1:
            m = len(fock_list)
            b = -np.ones((m + 1, m + 1))
            b[-1, -1] = 0.0
            for ii in range(m):
                for jj in range(m):
                    b[ii, jj] = np.sum(err_list[ii] * err_list[jj])
            rhs = np.zeros(m + 1)
            rhs[-1] = -1.0
            try:
                w = np.linalg.solve(b, rhs)[:m]
                fock = sum(wi * fi for wi, fi in zip(w, fock_list))
            except np.linalg.LinAlgError:
                pass
        d, c, eps = density(fock)
        e_elec = np.sum(d * (2.0 * hcore + 2.0 * j - k))
        if abs(e_elec - e_old) < conv and np.max(np.abs(err)) < 1e-8:
            break
        e_old = e_elec
    else:
        raise ScfConvergenceError(f"SCF not converged after {max_iter} iterations")

    # final energy with the converged density
    j = np.einsum("pqrs,rs->pq", eri, d)
    k = np.einsum("prqs,rs->pq", eri, d)
    e_total = float(np.sum(d * (2.0 * hcore + 2.0 * j - k)) + e_nuc)

    hcore_mo = c.T @ hcore @ c
    eri_mo = np.einsum("pqrs,pi,qj,rk,sl->ijkl", eri, c, c, c, c, optimize=True)
    return ScfResult(
        e_total=e_total,
        e_nuc=e_nuc,
        mo_coeff=c,
        mo_energies=eps,
        hcore_mo=hcore_mo,
        eri_mo=eri_mo,
        n_electrons=n_electrons,
    )


@dataclass
class ActiveSpace:
    """One- and two-electron integrals after freezing core orbitals."""

    h1: np.ndarray                # active-space effective one-electron (chemist basis)
    eri: np.ndarray               # active-space (pq|rs)
    core_energy: float            # frozen-core electronic energy
    constant: float               # e_nuc + core_energy
    n_electrons: int              # active electrons
    n_orbitals: int               # active spatial orbitals


def freeze_core(scf: ScfResult, n_core: int) -> ActiveSpace:
    """Fold the lowest n_core doubly-occupied orbitals into constants."""
    n_orb = scf.hcore_mo.shape[0]
    core = list(range(n_core))
    active = list(range(n_core, n_orb))
    h, g = scf.hcore_mo, scf.eri_mo

    e_core = 2.0 * sum(h[c, c] for c in core)
    for c1 in core:
        for c2 in core:
            e_core += 2.0 * g[c1, c1, c2, c2] - g[c1, c2, c2, c1]

    h_eff = h[np.ix_(active, active)].copy()
    for c in core:
        for ip, p in enumerate(active):
            for iq, q in enumerate(active):
                h_eff[ip, iq] += 2.0 * g[p, q, c, c] - g[p, c, c, q]

    eri_act = g[np.ix_(active, active, active, active)]
    return ActiveSpace(
        h1=h_eff,
        eri=eri_act,
        core_energy=float(e_core),
        constant=float(scf.e_nuc + e_core),
        n_electrons=scf.n_electrons - 2 * n_core,
        n_orbitals=len(active),
    )
