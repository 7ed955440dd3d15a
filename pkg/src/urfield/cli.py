"""Poincare audits, wavefunctions, transforms and propagator tables on a truncated four-mode Fock space.

Subcommands: ``audit``, ``wavefunction``, ``transform``, ``propagator``.
Exit codes: 0 success, 2 input error, 3 domain violation, 4 tolerance failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._io import FORMAT_VERSION, atomic_write
from .errors import CutoffError, FormatError, NormLeakError, ParticleCapError, PreconditionError
from .fock import Cutoff
from .poincare import (
    LORENTZ,
    MetricSignature,
    TransformParameters,
    audit_algebra,
    build_generators,
    poincare_transform,
)
from .position_rep import GridSpec, parseval_check, synthesize, wavefunction_csv, wavefunction_metadata
from .second_quant import propagator_csv, propagator_direct, propagator_vev
from .tensor4 import state_from_json, state_to_json

EXIT_OK, EXIT_INPUT, EXIT_DOMAIN, EXIT_TOLERANCE = 0, 2, 3, 4
PROPAGATOR_TOL = 1e-12


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    cutoff: int = 4
    margin: int = 2
    signatures: tuple = ("+---", "-+++")
    quadrature_order: int | None = None
    particle_cap: int = 1
    seed: int = 0
    out: str | None = None
    include_boosts: bool = True

    def validate(self, command: str) -> None:
        if command == "propagator":
            if self.cutoff < 0:
                raise CliError(f"--cutoff must be >= 0 for propagator tables, got {self.cutoff}", EXIT_INPUT)
            if self.particle_cap < 1:
                raise CliError(f"--particle-cap must be >= 1, got {self.particle_cap}", EXIT_DOMAIN)
        else:
            try:
                Cutoff(self.cutoff)
            except CutoffError as exc:
                raise CliError(str(exc), EXIT_INPUT) from None
        if command == "audit":
            need = 2 if self.include_boosts else 1
            if self.margin < need:
                raise CliError(
                    f"--margin must be >= {need}"
                    + (" when boosts are audited (they shift two occupation layers)" if self.include_boosts else ""),
                    EXIT_INPUT,
                )
            if self.margin >= self.cutoff:
                raise CliError(f"--margin {self.margin} leaves no interior at cutoff {self.cutoff}", EXIT_INPUT)
        if command == "transform" and not 0 <= self.margin < self.cutoff:
            raise CliError(f"--margin must lie in [0, {self.cutoff})", EXIT_INPUT)
        if self.quadrature_order is not None and self.quadrature_order < self.cutoff + 1:
            raise CliError(f"--quadrature-order must be >= cutoff + 1 = {self.cutoff + 1}", EXIT_INPUT)
        for s in self.signatures:
            try:
                MetricSignature.parse(s)
            except ValueError as exc:
                raise CliError(str(exc), EXIT_INPUT) from None


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        atomic_write(out, text)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_INPUT) from None


def _load_state(path: str, cutoff: int):
    try:
        return state_from_json(_read(path), cutoff)
    except FormatError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INPUT) from None
    except CutoffError as exc:
        raise CliError(f"{path}: {exc}", EXIT_DOMAIN) from None


# -- subcommands -------------------------------------------------------------


def cmd_audit(cfg: RunConfig) -> int:
    cfg.validate("audit")
    gens = build_generators(cfg.cutoff)
    reports, failures = [], []
    for sig in cfg.signatures:
        rep = audit_algebra(gens, sig, cfg.margin, include_boosts=cfg.include_boosts)
        reports.append(rep.to_dict())
        failures.extend(f"[{sig}] {f}" for f in rep.failures())
    doc = {
        "format_version": FORMAT_VERSION,
        "cutoff": cfg.cutoff,
        "margin": cfg.margin,
        "include_boosts": cfg.include_boosts,
        "passed": not failures,
        "failures": failures,
        "reports": reports,
    }
    _emit(json.dumps(doc, indent=2) + "\n", cfg.out)
    if failures:
        sys.stderr.write(json.dumps({"failures": failures}) + "\n")
        return EXIT_TOLERANCE
    return EXIT_OK


def _parse_axis(text: str):
    try:
        label, rng = text.split("=", 1)
        lo, hi, steps = rng.split(":")
        return label.strip(), (float(lo), float(hi), int(steps))
    except ValueError:
        raise CliError(f"--axis expects LABEL=MIN:MAX:STEPS, got {text!r}", EXIT_INPUT) from None


def _parse_assign(text: str, flag: str):
    try:
        key, value = text.split("=", 1)
        return key.strip(), float(value)
    except ValueError:
        raise CliError(f"{flag} expects KEY=VALUE, got {text!r}", EXIT_INPUT) from None


def cmd_wavefunction(cfg: RunConfig, state_path: str, axes: list[str], fixed: list[str], parseval: bool) -> int:
    cfg.validate("wavefunction")
    state = _load_state(state_path, cfg.cutoff)
    try:
        grid = GridSpec(dict(_parse_axis(a) for a in axes), dict(_parse_assign(f, "--fixed") for f in fixed))
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INPUT) from None
    wf = synthesize(state, grid)
    extra = {"coefficient_norm_squared": float(np.sum(np.abs(state.coefficients) ** 2))}
    if parseval:
        q = cfg.quadrature_order or cfg.cutoff + 1
        coeff, quad = parseval_check(state, q)
        extra["parseval"] = {"quadrature_order": q, "coefficient_norm_squared": coeff, "quadrature_norm_squared": quad}
    text = wavefunction_csv(wf)
    meta = json.dumps(wavefunction_metadata(wf, extra), indent=2) + "\n"
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        atomic_write(cfg.out, text)
        atomic_write(f"{cfg.out}.json", meta)
    return EXIT_OK


def _parse_omega(text: str):
    key, value = _parse_assign(text, "--omega")
    if len(key) != 2 or not key.isdigit():
        raise CliError(f"--omega index must be two digits like 12, got {key!r}", EXIT_INPUT)
    mu, nu = int(key[0]), int(key[1])
    if (min(mu, nu), max(mu, nu)) not in LORENTZ:
        raise CliError(f"--omega index {key} is not a Lorentz generator", EXIT_INPUT)
    return mu, nu, value


def cmd_transform(cfg: RunConfig, state_path: str, translate: list[str], omega: list[str]) -> int:
    cfg.validate("transform")
    state = _load_state(state_path, cfg.cutoff)
    a = np.zeros(4)
    for t in translate:
        key, value = _parse_assign(t, "--translate")
        if key not in {"0", "1", "2", "3"}:
            raise CliError(f"--translate index must be 0..3, got {key!r}", EXIT_INPUT)
        a[int(key)] = value
    w = np.zeros((4, 4))
    for o in omega:
        mu, nu, value = _parse_omega(o)
        w[mu, nu] = value
        w[nu, mu] = -value
    params = TransformParameters(a, w)
    try:
        res = poincare_transform(state, params, build_generators(cfg.cutoff), margin=cfg.margin)
    except NormLeakError as exc:
        raise CliError(str(exc), EXIT_DOMAIN) from None
    _emit(state_to_json(res.state), cfg.out)
    if cfg.out is not None:
        meta = {
            "format_version": FORMAT_VERSION,
            "cutoff": cfg.cutoff,
            "margin": cfg.margin,
            "translation": a.tolist(),
            "omega": w.tolist(),
            "leak": res.leak,
            "norm_in": state.norm(),
            "norm_out": res.state.norm(),
        }
        atomic_write(f"{cfg.out}.json", json.dumps(meta, indent=2) + "\n")
    return EXIT_OK


def _load_points(path: str) -> list[tuple]:
    text = _read(path)
    pairs = []
    rows = csv.reader(io.StringIO(text))
    for lineno, row in enumerate(rows, 1):
        if not row or row[0].lstrip().startswith("#"):
            continue
        if row[0].strip() == "x":
            continue  # header
        if len(row) != 8:
            raise CliError(f"{path}: line {lineno}: expected 8 columns, got {len(row)}", EXIT_INPUT)
        try:
            vals = [float(v) for v in row]
        except ValueError:
            raise CliError(f"{path}: line {lineno}: non-numeric value", EXIT_INPUT) from None
        if not np.all(np.isfinite(vals)):
            raise CliError(f"{path}: line {lineno}: non-finite value", EXIT_DOMAIN)
        pairs.append((tuple(vals[:4]), tuple(vals[4:])))
    if not pairs:
        raise CliError(f"{path}: no point pairs", EXIT_INPUT)
    return pairs


def random_pairs(count: int, seed: int, scale: float = 1.5) -> list[tuple]:
    rng = np.random.default_rng(seed)
    pts = rng.normal(scale=scale, size=(count, 8))
    return [(tuple(map(float, p[:4])), tuple(map(float, p[4:]))) for p in pts]


def cmd_propagator(cfg: RunConfig, points_path: str | None, n_random: int | None) -> int:
    cfg.validate("propagator")
    if points_path is not None:
        pairs = _load_points(points_path)
    elif n_random:
        pairs = random_pairs(n_random, cfg.seed)
    else:
        raise CliError("give --points FILE or --random-pairs N", EXIT_INPUT)
    values, worst = [], 0.0
    for X, X2 in pairs:
        direct = propagator_direct(X, X2, cfg.cutoff)
        vev = propagator_vev(X, X2, cfg.cutoff, cfg.particle_cap)
        worst = max(worst, abs(direct.delta - vev.delta))
        values.append(direct)
    _emit(propagator_csv(values, worst), cfg.out)
    print(f"max |direct - vev| = {worst!r} over {len(values)} pairs", file=sys.stderr if cfg.out is None else sys.stdout)
    return EXIT_OK if worst <= PROPAGATOR_TOL else EXIT_TOLERANCE


# -- argument parsing --------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message, EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="urfield", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, cutoff_default=4):
        sp.add_argument("--cutoff", type=int, default=cutoff_default, help="largest occupation per mode")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None, help="output path (stdout if omitted)")

    a = sub.add_parser("audit", help="commutator audit of the Poincare generators")
    common(a)
    a.add_argument("--margin", type=int, default=2)
    a.add_argument("--signature", action="append", default=None,
                   help="'+---' or '-+++' (write as --signature=-+++); repeatable, default both")
    a.add_argument("--no-boosts", action="store_true", help="audit translations and rotations only")

    w = sub.add_parser("wavefunction", help="render a tensor-space state on a spacetime grid")
    common(w)
    w.add_argument("--state", required=True, help="state JSON file")
    w.add_argument("--axis", action="append", default=[], help="LABEL=MIN:MAX:STEPS, repeatable")
    w.add_argument("--fixed", action="append", default=[], help="LABEL=VALUE for an unswept axis (default 0)")
    w.add_argument("--parseval", action="store_true", help="add a quadrature norm check to the sidecar")
    w.add_argument("--quadrature-order", type=int, default=None)

    t = sub.add_parser("transform", help="apply exp(i(a.P + omega.M)) to a state")
    common(t)
    t.add_argument("--state", required=True)
    t.add_argument("--margin", type=int, default=2)
    t.add_argument("--translate", action="append", default=[], help="MU=VALUE, repeatable")
    t.add_argument("--omega", action="append", default=[], help="MUNU=VALUE such as 12=1.57, repeatable")

    r = sub.add_parser("propagator", help="propagator table computed two ways")
    common(r, cutoff_default=1)
    r.add_argument("--particle-cap", type=int, default=1)
    src = r.add_mutually_exclusive_group()
    src.add_argument("--points", default=None, help="CSV with columns x,y,z,t,x2,y2,z2,t2")
    src.add_argument("--random-pairs", type=int, default=None, help="draw N pairs from --seed")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = RunConfig(cutoff=args.cutoff, seed=args.seed, out=args.out)
        if args.command == "audit":
            cfg.margin = args.margin
            cfg.signatures = tuple(args.signature) if args.signature else ("+---", "-+++")
            cfg.include_boosts = not args.no_boosts
            return cmd_audit(cfg)
        if args.command == "wavefunction":
            cfg.quadrature_order = args.quadrature_order
            return cmd_wavefunction(cfg, args.state, args.axis, args.fixed, args.parseval)
        if args.command == "transform":
            cfg.margin = args.margin
            return cmd_transform(cfg, args.state, args.translate, args.omega)
        cfg.particle_cap = args.particle_cap
        return cmd_propagator(cfg, args.points, args.random_pairs)
    except CliError as exc:
        print(f"urfield: error: {exc}", file=sys.stderr)
        return exc.code
    except (CutoffError, ParticleCapError) as exc:
        print(f"urfield: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except PreconditionError as exc:
        print(f"urfield: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
