"""Command line front end.

Subcommands: bounds (analytic tables, no assembly), verify (assemble, run
the eigenvalue estimators and assert the enclosure chain), solve (conjugate
gradient comparison), quadrature (print nodes, weights and the pivot
sequence) and dump-matrix (coordinate-triplet text of an assembled matrix).

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 enclosure violation during verify.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import experiments
from .basis import assemble_G, assemble_G_tilde
from .config import load_config
from .errors import (
    ConfigError,
    ConvergenceError,
    DominanceError,
    EnclosureError,
    FactorizationError,
    SgprecondError,
)
from .fem import assemble_F, build_mesh, sample_coefficients, load_coefficient_table
from .orthopoly import family_from_name

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ENCLOSURE = 4


def _add_common(p):
    p.add_argument("--config", help="path to an sgp-config file")
    p.add_argument("--out", help="write output to this path instead of stdout")
    p.add_argument("--format", choices=("csv", "md", "raw"), default="csv")
    p.add_argument("--seed", type=int, help="override the configured random seed")
    p.add_argument("--tol", type=float, help="override the configured tolerance")
    p.add_argument("--threads", type=int, help="thread count hint (SGP_THREADS fallback)")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="sgp",
        description="Spectral bounds and preconditioners for parameter-dependent diffusion",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("bounds", "verify", "solve"):
        _add_common(sub.add_parser(name))
    q = sub.add_parser("quadrature")
    _add_common(q)
    q.add_argument("--family", required=True)
    q.add_argument("--gamma", type=float)
    q.add_argument("--s", type=int, required=True)
    q.add_argument("--mu", type=float, required=True)
    d = sub.add_parser("dump-matrix")
    _add_common(d)
    d.add_argument(
        "--matrix",
        required=True,
        help="which matrix: G<k>, Gt<k> (annihilated) or F<k>, e.g. G1, Gt2, F0",
    )
    return parser


def _resolve_threads(args):
    n = args.threads
    if n is None and os.environ.get("SGP_THREADS"):
        try:
            n = int(os.environ["SGP_THREADS"])
        except ValueError:
            raise ConfigError("SGP_THREADS must be an integer") from None
    if n is not None:
        if n < 1:
            raise ConfigError("--threads must be >= 1")
        # hint only: results are reduction-order deterministic regardless
        os.environ.setdefault("OMP_NUM_THREADS", str(n))
    return n


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_for(args):
    if not args.config:
        raise ConfigError("--config is required for this command")
    cfg = load_config(args.config)
    return cfg.with_overrides(seed=args.seed, tol=args.tol)


def _dump_matrix(args) -> str:
    cfg = _config_for(args)
    name = args.matrix.strip()
    kind, digits = name.rstrip("0123456789"), name[len(name.rstrip("0123456789")):]
    if kind not in ("G", "Gt", "F") or not digits:
        raise ConfigError(f"unknown matrix name {args.matrix!r} (use G<k>, Gt<k> or F<k>)")
    k = int(digits)
    degree = cfg.degrees[-1] if cfg.basis == "complete" else None
    iset = experiments._index_set(cfg, degree)
    if kind in ("G", "Gt"):
        if kind == "G":
            mat = assemble_G(cfg.family, iset, k)
        else:
            mat = assemble_G_tilde(cfg.family, iset, k, cfg.basis)
        return mat.to_coordinate_text()
    mesh = build_mesh(cfg.dim, cfg.elements)
    if cfg.table_path is not None:
        field = load_coefficient_table(cfg.table_path)
    else:
        field = sample_coefficients(cfg.coefficients, mesh)
    f = assemble_F(mesh, field, k).tocoo()
    lines = [f"{f.shape[0]} {f.shape[1]} {f.nnz}"]
    order = np.lexsort((f.col, f.row))
    for r, c, v in zip(f.row[order], f.col[order], f.data[order]):
        lines.append(f"{r + 1} {c + 1} {v:.17g}")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        _resolve_threads(args)
        if args.command == "quadrature":
            family = family_from_name(args.family, args.gamma)
            text = experiments.quadrature_report(family, args.s, args.mu, raw=args.format == "raw")
        elif args.command == "dump-matrix":
            text = _dump_matrix(args)
        else:
            cfg = _config_for(args)
            runner = {
                "bounds": experiments.run_bounds,
                "verify": experiments.run_verify,
                "solve": experiments.run_solve,
            }[args.command]
            text = runner(cfg).render(args.format)
        _emit(text, args.out)
    except ConfigError as exc:
        print(f"sgp: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EnclosureError as exc:
        print(f"sgp: enclosure violation: {exc}", file=sys.stderr)
        return EXIT_ENCLOSURE
    except (DominanceError, FactorizationError, ConvergenceError) as exc:
        print(f"sgp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SgprecondError as exc:
        print(f"sgp: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
