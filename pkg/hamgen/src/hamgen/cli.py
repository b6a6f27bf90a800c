"""Command-line fixture generation and verification."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .generate import generate, molecule_spec, verify, write_document


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hamgen",
        description="Generate qubit-Hamiltonian fixture documents (STO-3G, Jordan-Wigner).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="emit documents for a bond-length grid")
    gen.add_argument("--molecule", required=True, choices=["h2", "h4", "lih", "beh2", "n2"])
    gen.add_argument("--bond-lengths", required=True, nargs="+", type=float,
                     help="bond lengths in angstrom")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--no-frozen-core", action="store_true",
                     help="keep core orbitals active")

    ver = sub.add_parser("verify", help="re-derive metadata energies of emitted files")
    ver.add_argument("files", nargs="+")

    args = parser.parse_args(argv)

    if args.command == "generate":
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        for r in args.bond_lengths:
            spec = molecule_spec(args.molecule, r,
                                 frozen_core=False if args.no_frozen_core else None)
            doc = generate(spec)
            path = out_dir / f"{args.molecule}_{r:.2f}.json"
            write_document(doc, path)
            meta = doc["metadata"]
            print(f"{path}  n_qubits={doc['n_qubits']}  pool={len(doc['pool'])}  "
                  f"hf={meta['hf_energy']:.8f}  fci={meta['fci_energy']:.8f}")
        return 0

    failures = 0
    for path in args.files:
        report = verify(path)
        status = "ok" if report.ok else "MISMATCH"
        print(f"{path}: {status}  hf_delta={report.hf_delta:.3e}  fci_delta={report.fci_delta:.3e}")
        if not report.ok:
            failures += 1
    if failures:
        print(f"{failures} file(s) failed verification", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
