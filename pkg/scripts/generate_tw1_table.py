#!/usr/bin/env python3
"""Regenerate ``src/rmtnoise/data/tw1_table.txt``.

F_TW1 is evaluated as the Fredholm determinant

    F_1(z) = det(I - A_z),   A_z(x, y) = Ai((x + y) / 2 + z) / 2   on L2(0, inf),

discretised with Gauss-Legendre quadrature (Nystrom method). The kernel decays
like Ai, so the half-line is truncated where the Airy argument passes +14.

Usage::

    python scripts/generate_tw1_table.py [--nodes 120] [--out PATH]
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np
from scipy.special import airy

Z_MIN = -8.0
Z_MAX = 6.0
STEP = 0.01
DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "rmtnoise" / "data" / "tw1_table.txt"


def tw1_fredholm(z: float, nodes: int = 120) -> float:
    upper = 2.0 * (14.0 - min(z, 0.0))
    x, w = np.polynomial.legendre.leggauss(nodes)
    x = (x + 1.0) * upper / 2.0
    w = w * upper / 2.0
    kernel = 0.5 * airy((x[:, None] + x[None, :]) / 2.0 + z)[0]
    sw = np.sqrt(w)
    return float(np.linalg.det(np.eye(nodes) - sw[:, None] * kernel * sw[None, :]))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--nodes", type=int, default=120)
    parser.add_argument("--out", type=Path, default=DEFAULT_OUT)
    args = parser.parse_args()

    count = int(round((Z_MAX - Z_MIN) / STEP)) + 1
    zs = Z_MIN + STEP * np.arange(count)
    ps = np.array([tw1_fredholm(float(z), args.nodes) for z in zs])
    if np.any(np.diff(ps) <= 0):
        raise SystemExit("generated table is not strictly increasing")

    with open(args.out, "w") as fh:
        fh.write("# Tracy-Widom beta=1 CDF, F_TW1(z).\n")
        fh.write(f"# Fredholm determinant det(I - A_z), Gauss-Legendre Nystrom, {args.nodes} nodes.\n")
        fh.write("# Regenerate with scripts/generate_tw1_table.py. Columns: z p\n")
        for z, p in zip(zs, ps):
            fh.write(f"{z:.2f} {p:.17e}\n")
    print(f"wrote {count} rows to {args.out}")


if __name__ == "__main__":
    main()
