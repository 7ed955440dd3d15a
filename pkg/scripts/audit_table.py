"""Commutator audit across cutoffs: worst residual per sector and fitted signs.

    python3 scripts/audit_table.py --cutoffs 4 6 8 --margin 2
"""

import argparse
import json
from dataclasses import asdict, dataclass, field

from urfield.poincare import audit_algebra, build_generators

SECTORS = ("PP", "MP", "MM", "heisenberg", "form", "rotation_closure")


@dataclass
class AuditSweep:
    cutoffs: list = field(default_factory=lambda: [4, 6, 8])
    margin: int = 2
    signatures: tuple = ("+---", "-+++")


def run(cfg: AuditSweep) -> list[dict]:
    rows = []
    for n in cfg.cutoffs:
        gens = build_generators(n)
        for sig in cfg.signatures:
            rep = audit_algebra(gens, sig, cfg.margin)
            rows.append({
                "cutoff": n,
                "signature": sig,
                "max_residual": {s: rep.max_residual(s) for s in SECTORS},
                "form_signs": rep.form_signs,
                "rotation_signs": list(rep.rotation_signs),
                "failures": rep.failures(),
            })
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cutoffs", type=int, nargs="+", default=[4, 6, 8])
    ap.add_argument("--margin", type=int, default=2)
    ap.add_argument("--json", default=None, help="also dump rows to this path")
    args = ap.parse_args()
    cfg = AuditSweep(args.cutoffs, args.margin)
    rows = run(cfg)

    print(f"{'n':>3} {'sig':>5} " + " ".join(f"{s:>16}" for s in SECTORS) + "  form signs")
    for r in rows:
        res = " ".join(f"{r['max_residual'][s]:16.2e}" for s in SECTORS)
        signs = "".join("+" if v > 0 else "-" for v in r["form_signs"].values())
        print(f"{r['cutoff']:>3} {r['signature']:>5} {res}  {signs}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"config": asdict(cfg), "rows": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
