"""Minimal STO-3G basis set for H, Li, Be, N.

Exponents are the standard published STO-3G values; 2s and 2p shells share
exponents.  Contraction coefficients are the universal STO-3G expansion
coefficients.  Each contracted function is renormalized numerically after
primitive normalization, so small rounding in the tabulated coefficients
cannot leak into overlap matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ANGSTROM_TO_BOHR = 1.0 / 0.52917721067

# universal contraction coefficients
_C_1S = (0.1543289673, 0.5353281423, 0.4446345422)
_C_2S = (-0.09996722919, 0.3995128261, 0.7001154689)
_C_2P = (0.1559162750, 0.6076837186, 0.3919573931)

# per-element shell exponents: list of ("1s" | "2sp", (a1, a2, a3))
_ELEMENT_SHELLS = {
    "H": [("1s", (3.425250914, 0.6239137298, 0.1688554040))],
    "Li": [
        ("1s", (16.11957475, 2.936200663, 0.7946504870)),
        ("2sp", (0.6362897469, 0.1478600533, 0.0480886784)),
    ],
    "Be": [
        ("1s", (30.16787069, 5.495115306, 1.487192653)),
        ("2sp", (1.314833110, 0.3055389383, 0.0993707456)),
    ],
    "N": [
        ("1s", (99.10616896, 18.05231239, 4.885660238)),
        ("2sp", (3.780455879, 0.8784966449, 0.2857143744)),
    ],
}

ATOMIC_NUMBER = {"H": 1, "Li": 3, "Be": 4, "N": 7}


@dataclass(frozen=True)
class BasisFunction:
    """Contracted Cartesian Gaussian: sum_k c_k N_k x^l y^m z^n exp(-a_k r^2)."""

    center: tuple[float, float, float]
    powers: tuple[int, int, int]
    exponents: tuple[float, ...]
    coefficients: tuple[float, ...]  # includes primitive norms and final renorm


def _double_factorial(k: int) -> int:
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def _primitive_norm(alpha: float, powers) -> float:
    l, m, n = powers
    num = (2.0 * alpha / np.pi) ** 0.75 * (4.0 * alpha) ** ((l + m + n) / 2.0)
    den = np.sqrt(
        _double_factorial(2 * l - 1)
        * _double_factorial(2 * m - 1)
        * _double_factorial(2 * n - 1)
    )
    return num / den


def _contracted(center, powers, exponents, raw_coeffs) -> BasisFunction:
    coeffs = [c * _primitive_norm(a, powers) for a, c in zip(exponents, raw_coeffs)]
    # renormalize the contraction
    s = 0.0
    l, m, n = powers
    ltot = l + m + n
    for ai, ci in zip(exponents, coeffs):
        for aj, cj in zip(exponents, coeffs):
            p = ai + aj
            s += (
                ci
                * cj
                * _double_factorial(2 * l - 1)
                * _double_factorial(2 * m - 1)
                * _double_factorial(2 * n - 1)
                * (np.pi / p) ** 1.5
                / (2.0 * p) ** ltot
            )
    coeffs = [c / np.sqrt(s) for c in coeffs]
    return BasisFunction(tuple(center), tuple(powers), tuple(exponents), tuple(coeffs))


def build_basis(atoms) -> list[BasisFunction]:
    """AO list for [(element, (x, y, z) in bohr), ...], shells in input order."""
    aos: list[BasisFunction] = []
    for element, xyz in atoms:
        if element not in _ELEMENT_SHELLS:
            raise ValueError(f"unsupported element {element!r} (basis has H, Li, Be, N)")
        for kind, exps in _ELEMENT_SHELLS[element]:
            if kind == "1s":
                aos.append(_contracted(xyz, (0, 0, 0), exps, _C_1S))
            else:
                aos.append(_contracted(xyz, (0, 0, 0), exps, _C_2S))
                for powers in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
                    aos.append(_contracted(xyz, powers, exps, _C_2P))
    return aos


def nuclear_repulsion(atoms) -> float:
    e = 0.0
    for i, (el_i, ri) in enumerate(atoms):
        for el_j, rj in atoms[i + 1:]:
            d = np.linalg.norm(np.subtract(ri, rj))
            e += ATOMIC_NUMBER[el_i] * ATOMIC_NUMBER[el_j] / d
    return e
