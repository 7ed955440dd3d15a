"""Fidelity of the translated vacuum against the displaced Gaussian, versus cutoff.

    python3 scripts/translation_fidelity.py --shifts 0.5 1.0 2.0 --cutoffs 8 16 32
"""

import argparse
from dataclasses import dataclass, field

from urfield.errors import NormLeakError
from urfield.poincare import TransformParameters, build_generators, poincare_transform
from urfield.position_rep import shifted_vacuum_fidelity
from urfield.tensor4 import vacuum


@dataclass
class FidelitySweep:
    shifts: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    cutoffs: list = field(default_factory=lambda: [8, 16, 32])
    margin: int = 2


def run(cfg: FidelitySweep):
    for n in cfg.cutoffs:
        gens = build_generators(n)
        for a in cfg.shifts:
            try:
                res = poincare_transform(vacuum(n), TransformParameters.shift(1, a), gens, margin=cfg.margin)
            except NormLeakError as exc:
                yield n, a, None, exc.leak
                continue
            # exp(+i a P_x) moves the packet to x = -a
            yield n, a, shifted_vacuum_fidelity(res.state, -a), res.leak


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shifts", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    ap.add_argument("--cutoffs", type=int, nargs="+", default=[8, 16, 32])
    args = ap.parse_args()
    print(f"{'n':>4} {'shift':>6} {'1 - fidelity':>14} {'leak':>10}")
    for n, a, f, leak in run(FidelitySweep(args.shifts, args.cutoffs)):
        gap = "leak > threshold" if f is None else f"{1 - f:14.3e}"
        print(f"{n:>4} {a:>6.2f} {gap:>14} {leak:10.2e}")


if __name__ == "__main__":
    main()
