"""Command-line entry point: ``qudit-reservoir <subcommand> ...``.

Exit codes: 0 success, 1 non-convergence under ``--strict``, 2 invalid
input or configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DivergenceError, ReservoirError
from .experiments import DATA, ScanConfig, aggregate, preset, run_scan
from .gates import GateSpec, embed_target, gate_by_name
from .inference import TrainConfig, generate_dataset, train, verify_gate
from .io import (
    dumps,
    load_matrix_file,
    load_reservoir_obj,
    load_run,
    make_manifest,
    matrix_to_json,
    now,
    read_json,
    records_to_csv,
    save_run,
    write_json,
)
from .linalg import RandomSource, haar_unitary
from .rnn import OdeConfig, RnnProblem, solve
from .slm import ModulatorConstraint

EXIT_OK, EXIT_NOT_CONVERGED, EXIT_INVALID = 0, 1, 2


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_gate_args(p):
    p.add_argument("--gate", default="x", choices=["x", "x2", "z"], help="catalog gate name")
    p.add_argument("--gate-file", help="custom gate as a JSON matrix (overrides --gate)")
    p.add_argument("--dim", type=int, default=3, help="gate dimension N")


def _add_constraint_args(p):
    p.add_argument("--constraint", default="none", choices=["none", "phase", "amp"])
    p.add_argument("--bits", type=int, default=None, help="modulation bit depth (amp/phase)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qudit-reservoir", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gate", help="print a catalog gate matrix")
    p.add_argument("--name", required=True, choices=["x", "x2", "z"])
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--json", action="store_true", help="emit the JSON matrix format")

    p = sub.add_parser("solve-rnn", help="design S with a known reservoir (ODE flow)")
    _add_gate_args(p)
    p.add_argument("--embed", type=int, required=True, help="embedding dimension M")
    p.add_argument("--mode", choices=["unitary", "projected"], default="unitary")
    p.add_argument("--mu", type=float, default=100.0)
    p.add_argument("--tol", type=float, default=1e-8, help="residual tolerance on the error functional")
    p.add_argument("--max-time", type=float, default=10.0)
    p.add_argument("--max-steps", type=int, default=100_000)
    p.add_argument("--init", choices=["zero", "random"], default="zero")
    p.add_argument("--reservoir", help="reservoir JSON matrix (default: Haar sample from --seed)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output JSON path (default: stdout)")
    p.add_argument("--strict", action="store_true")

    p = sub.add_parser("train", help="learn S from labelled random states")
    _add_gate_args(p)
    p.add_argument("--embed", type=int, required=True, help="embedding dimension M")
    p.add_argument("--ntrain", type=int, default=100)
    p.add_argument("--nvalid", type=int, default=50)
    p.add_argument("--eps", type=float, default=1e-3, help="validation cost threshold")
    p.add_argument("--lr", type=float, default=0.5, help="step in units of inverse max curvature")
    p.add_argument("--max-epochs", type=int, default=5000)
    p.add_argument("--span", choices=["all_m", "first_n"], default=None)
    p.add_argument("--zero-complement", action="store_true", help="use O_C = 0 (non-unitary target)")
    _add_constraint_args(p)
    p.add_argument("--reservoir", help="reservoir JSON matrix (default: Haar sample from --seed)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output JSON path (default: stdout)")
    p.add_argument("--strict", action="store_true")

    p = sub.add_parser("scan", help="seeded scans over the embedding dimension")
    p.add_argument("--preset", choices=["fig3c", "fig4a", "fig4b"])
    p.add_argument("--gate", default="x", choices=["x", "x2", "z"])
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--m-values", type=_int_list)
    p.add_argument("--seeds", type=_int_list)
    p.add_argument("--solver", choices=["inference", "rnn"], default="inference")
    p.add_argument("--metric", choices=["epochs_to_threshold", "final_cost"])
    p.add_argument("--budget", type=int, help="epoch budget per trial")
    p.add_argument("--eps", type=float, help="validation threshold")
    p.add_argument("--lr", type=float)
    p.add_argument("--span", choices=["all_m", "first_n"], default=None)
    p.add_argument("--constraint", choices=["none", "phase", "amp"])
    p.add_argument("--bits", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--no-timing", action="store_true", help="leave wall_time_s empty in the CSV")
    p.add_argument("--out-csv", help="CSV path (default: stdout)")
    p.add_argument("--out-json", help="JSON summary path")

    p = sub.add_parser("verify", help="check a saved run against its target")
    p.add_argument("--run", required=True, help="run JSON written by solve-rnn or train")
    p.add_argument("--reservoir", help="override the stored reservoir with this JSON matrix")
    p.add_argument("--weights", help="override the stored weights with this JSON matrix")
    return parser


def _gate(args) -> GateSpec:
    if getattr(args, "gate_file", None):
        return GateSpec(Path(args.gate_file).stem, load_matrix_file(args.gate_file, "gate"))
    return gate_by_name(args.gate, args.dim)


def _reservoir(args, m: int, src: RandomSource) -> np.ndarray:
    if args.reservoir:
        u = load_reservoir_obj(read_json(args.reservoir))
        if u.shape != (m, m):
            raise ReservoirError(f"reservoir is {u.shape[0]}x{u.shape[1]}, expected {m}x{m}")
        return u
    return haar_unitary(m, src.derive(0))


def cmd_gate(args) -> int:
    g = gate_by_name(args.name, args.dim)
    if args.json:
        sys.stdout.write(json.dumps(matrix_to_json(g.matrix)) + "\n")
        return EXIT_OK
    for row in g.matrix:
        sys.stdout.write(" ".join(_fmt(v) for v in row) + "\n")
    return EXIT_OK


def _fmt(z: complex) -> str:
    re, im = float(np.real(z)) + 0.0, float(np.imag(z)) + 0.0
    if abs(im) < 1e-15:
        return f"{re:g}"
    return f"{re:g}{im:+g}j"


def cmd_solve(args, started: str) -> int:
    gate = _gate(args)
    m = args.embed
    src = RandomSource(args.seed).derive(m)
    emb = embed_target(gate, m, args.mode, src.derive(1))
    u = _reservoir(args, m, src)
    problem = RnnProblem(u, emb, args.mu)
    config = OdeConfig(max_time=args.max_time, residual_tol=args.tol, max_steps=args.max_steps, init=args.init, init_seed=args.seed)
    res = solve(problem, config)
    manifest = make_manifest(
        "solve-rnn",
        {"gate": gate.name, "dim": gate.dim, "embed": m, "mode": args.mode, "mu": args.mu, "tol": args.tol,
         "max_time": args.max_time, "max_steps": args.max_steps, "init": args.init},
        args.seed, started, outputs=[args.out] if args.out else [], inputs=[args.reservoir] if args.reservoir else [],
    )
    save_run(args.out, "solve-rnn", res, u, emb, manifest)
    if args.out:
        sys.stderr.write(f"converged={res.converged} final_error={res.final_error:.3e} steps={res.steps}\n")
    return EXIT_NOT_CONVERGED if args.strict and not res.converged else EXIT_OK


def cmd_train(args, started: str) -> int:
    gate = _gate(args)
    m = args.embed
    trial_src = RandomSource(args.seed).derive(m)
    complement = np.zeros((m - gate.dim, m - gate.dim)) if args.zero_complement and m > gate.dim else None
    emb = embed_target(gate, m, "unitary", trial_src.derive(1), complement=complement)
    u = _reservoir(args, m, trial_src)
    constraint = ModulatorConstraint(args.constraint, args.bits)
    config = TrainConfig(
        learning_rate=args.lr, max_epochs=args.max_epochs, valid_threshold=args.eps,
        seed=args.seed, constraint=constraint, cost_span=args.span,
    )
    data = generate_dataset(emb, args.ntrain, args.nvalid, trial_src.derive(DATA))
    run = train(u, data, config, n=gate.dim)
    report = verify_gate(u, run.weights, emb)
    cfg = {"gate": gate.name, "dim": gate.dim, "embed": m, "ntrain": args.ntrain, "nvalid": args.nvalid,
           "zero_complement": args.zero_complement, **config.to_json()}
    manifest = make_manifest("train", cfg, args.seed, started, outputs=[args.out] if args.out else [],
                             inputs=[args.reservoir] if args.reservoir else [])
    save_run(args.out, "train", run, u, emb, manifest, extra={"constraint": constraint.to_json(), "report": report.to_json()})
    if args.out:
        sys.stderr.write(f"converged={run.converged} epochs={run.epochs_used} valid={run.valid_history[-1]:.3e}\n")
    return EXIT_NOT_CONVERGED if args.strict and not run.converged else EXIT_OK


def _scan_config(args) -> ScanConfig:
    if args.preset:
        cfg = preset(args.preset, bits=args.bits)
    else:
        cfg = ScanConfig(gate=args.gate, dim=args.dim)
    trainer = cfg.trainer
    if args.constraint is not None:
        trainer = replace(trainer, constraint=ModulatorConstraint(args.constraint, args.bits))
    elif args.bits is not None and not args.preset:
        raise ReservoirError("--bits needs --constraint")
    if args.eps is not None:
        trainer = replace(trainer, valid_threshold=args.eps)
    if args.lr is not None:
        trainer = replace(trainer, learning_rate=args.lr)
    if args.span is not None:
        trainer = replace(trainer, cost_span=args.span)
    changes = {"trainer": trainer}
    if args.preset is None:
        changes["solver"] = args.solver
    for name, attr in (("m_values", "m_values"), ("seeds", "seeds"), ("metric", "metric"), ("budget", "epoch_budget")):
        value = getattr(args, name)
        if value is not None:
            changes[attr] = value
    return replace(cfg, **changes)


def cmd_scan(args, started: str) -> int:
    cfg = _scan_config(args)
    records = run_scan(cfg, workers=args.workers)
    text = records_to_csv(records, timing=not args.no_timing)
    if args.out_csv:
        Path(args.out_csv).write_text(text)
    else:
        sys.stdout.write(text)
    if args.out_json:
        outputs = [p for p in (args.out_csv, args.out_json) if p]
        summary = {
            "manifest": make_manifest("scan", cfg.to_json(), None, started, outputs=outputs),
            "summary": aggregate(records),
        }
        write_json(args.out_json, summary)
    return EXIT_OK


def cmd_verify(args) -> int:
    run = load_run(args.run)
    u = run["reservoir"]
    if args.reservoir:
        u = load_reservoir_obj(read_json(args.reservoir))
    result = run["result"]
    w = result.solution if run["kind"] == "solve-rnn" else result.weights
    if args.weights:
        w = load_matrix_file(args.weights, "weights")
    report = verify_gate(u, w, run["embedding"])
    sys.stdout.write(dumps(report.to_json()))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    started = now()
    try:
        if args.command == "gate":
            return cmd_gate(args)
        if args.command == "solve-rnn":
            return cmd_solve(args, started)
        if args.command == "train":
            return cmd_train(args, started)
        if args.command == "scan":
            return cmd_scan(args, started)
        return cmd_verify(args)
    except DivergenceError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NOT_CONVERGED
    except (ReservoirError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
