"""Command-line entry point: run games, verify the embezzlement results, emit reports.

Every command prints a JSON report (or writes it to --out). Exit status is 0
when every check passes, 1 when a verification fails and 2 on bad arguments.
"""

from __future__ import annotations

import argparse
import ast
import csv
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import transform as tf
from .config import CapExceeded
from .embezzle import embezzled_version, mu_tensor_state, verify_theorem1
from .games import (
    ClassicalGame,
    GameError,
    builtin,
    chsh_circuit,
    classical_value,
    embed_classical,
    run_quantum_game,
    strategy_value,
)
from .games.builtin import BUILTINS
from .optimize import SeesawConfig, seesaw_restarts
from .qlin import overlap, random_state, random_unitary, schmidt_decompose
from .synth import GATE_NAMES, SynthesisError, menu_gate, synthesize


@dataclass
class RunReport:
    command: list
    inputs: dict
    outputs: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    passed: bool = True

    def to_json(self) -> str:
        body = asdict(self)
        body["pass"] = body.pop("passed")
        return json.dumps(_plain(body), indent=2)


def _plain(obj):
    """Recursively convert numpy scalars and arrays into JSON types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        val = float(obj)
        return val if math.isfinite(val) else str(val)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


class _Timer:
    def __init__(self, report: RunReport, key: str):
        self.report, self.key = report, key

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        self.report.timings[self.key] = time.perf_counter() - self.t0


# ------------------------------------------------------------------ loaders

_SAFE_NODES = (
    ast.Expression, ast.BoolOp, ast.BinOp, ast.UnaryOp, ast.Compare, ast.Name, ast.Load,
    ast.Constant, ast.Subscript, ast.Tuple, ast.List, ast.IfExp, ast.Slice,
    ast.And, ast.Or, ast.Not, ast.Invert, ast.USub, ast.UAdd,
    ast.Add, ast.Sub, ast.Mult, ast.Mod, ast.FloorDiv, ast.BitAnd, ast.BitOr, ast.BitXor,
    ast.LShift, ast.RShift, ast.Eq, ast.NotEq, ast.Lt, ast.LtE, ast.Gt, ast.GtE, ast.In, ast.NotIn,
)


def _expression(text: str, rounds: int):
    tree = ast.parse(text, mode="eval")
    for node in ast.walk(tree):
        if not isinstance(node, _SAFE_NODES):
            raise ValueError(f"predicate uses unsupported syntax: {type(node).__name__}")
        if isinstance(node, ast.Name) and node.id not in ("s", "t", "a", "b"):
            raise ValueError(f"predicate may only name s, t, a, b; got {node.id!r}")
    code = compile(tree, "<predicate>", "eval")

    def predicate(s, t, a, b):
        env = dict(zip("stab", (s, t, a, b)))
        if rounds == 1:
            env = {k: v[0] for k, v in env.items()}
        return bool(eval(code, {"__builtins__": {}}, env))

    return predicate


def _hashable(x):
    return tuple(_hashable(v) for v in x) if isinstance(x, list) else x


def load_game(path) -> ClassicalGame:
    """Game from JSON: S, T, A, B, pi, rounds and a predicate.

    The predicate is either ``{"expr": "..."}`` over s, t, a, b (scalars in
    one-round games, k-tuples otherwise) or ``{"accept": [[s, t, a, b], ...]}``
    listing the accepted transcripts.
    """
    spec = json.loads(Path(path).read_text())
    rounds = int(spec.get("rounds", 1))
    pred = spec["predicate"]
    if "expr" in pred:
        predicate = _expression(pred["expr"], rounds)
    elif "accept" in pred:
        accepted = set()
        for row in pred["accept"]:
            s, t, a, b = (_hashable(x) for x in row)
            if rounds == 1:
                s, t, a, b = (s,), (t,), (a,), (b,)
            accepted.add((tuple(s), tuple(t), tuple(a), tuple(b)))
        predicate = lambda s, t, a, b: (s, t, a, b) in accepted  # noqa: E731
    else:
        raise ValueError("predicate needs 'expr' or 'accept'")
    labels = {k: [_hashable(x) for x in spec[k]] for k in "STAB"}
    return ClassicalGame(
        labels["S"], labels["T"], labels["A"], labels["B"],
        predicate, np.asarray(spec["pi"], dtype=float), rounds, spec.get("name", Path(path).stem),
    )


def load_matrix(path) -> np.ndarray:
    """Row-major JSON of [re, im] pairs."""
    rows = json.loads(Path(path).read_text())
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("matrix file must hold rows of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _game_and_strategy(name: str, seed):
    """Built-in optimal strategy, or a see-saw strategy for a game file."""
    if name in BUILTINS:
        return builtin(name)
    game = load_game(name)
    best, _ = seesaw_restarts(game, SeesawConfig(m=1, seed=seed, restarts=10))
    return game, best.strategy


def _target(name: str, d: int, rng) -> np.ndarray:
    if name.upper() in GATE_NAMES:
        return menu_gate(name, d)
    if name == "random":
        # I (x) U with U a Haar-random single-qubit unitary on the last qubit
        return np.kron(np.eye(1 << (d - 1)), random_unitary(2, rng))
    return load_matrix(name)


def _source_state(kind: str, m: int, rng) -> np.ndarray:
    dim = 1 << m
    if kind == "epr":
        return np.eye(dim, dtype=complex).reshape(-1) / np.sqrt(dim)
    if kind == "rank1":
        psi = np.zeros(dim * dim, dtype=complex)
        psi[0] = 1.0
        return psi
    return random_state(2 * m, rng)


# ------------------------------------------------------------------ commands


def cmd_game(args, rep: RunReport):
    rep.inputs.update(game=args.name, strategy=args.strategy)
    if args.strategy == "classical":
        game = builtin(args.name)[0] if args.name in BUILTINS else load_game(args.name)
        with _Timer(rep, "classical_value"):
            rep.outputs["value"] = classical_value(game)
        return
    game, strat = _game_and_strategy(args.name, args.seed)
    with _Timer(rep, "strategy_value"):
        rep.outputs["value"] = strategy_value(game, strat)
    if args.embed:
        with _Timer(rep, "embedded"):
            qg, cs = embed_classical(game, strat)
            emb = run_quantum_game(qg, cs)
        rep.outputs["embedded_value"] = emb
        rep.passed = abs(emb - rep.outputs["value"]) <= 1e-9


def cmd_embezzle(args, rep: RunReport):
    rng = np.random.default_rng(args.seed)
    rep.inputs.update(m=args.m, epsilon=args.epsilon, state=args.state)
    psi = _source_state(args.state, args.m, rng)
    source = schmidt_decompose(psi, args.m)
    with _Timer(rep, "closed_form"):
        res = verify_theorem1(source, args.m, args.epsilon)
    rep.outputs.update(res.as_dict())
    rep.passed = res.passed
    if res.n + args.m <= 8:
        with _Timer(rep, "dense"):
            dense = abs(overlap(mu_tensor_state(res.n, psi, args.m), embezzled_version(source, res.n).to_dense()))
        rep.outputs["dense_fidelity"] = dense
        rep.passed = rep.passed and abs(dense - res.fidelity) <= 1e-10


def cmd_transform(args, rep: RunReport):
    rep.inputs.update(game=args.game, epsilon=args.epsilon, n=args.n, circuit=args.circuit)
    if args.circuit:
        if args.game != "chsh":
            raise ValueError("--circuit is only available for chsh")
        game, strat = chsh_circuit()
    else:
        game, strat = _game_and_strategy(args.game, args.seed)
    eps = args.epsilon or []
    ns = args.n or []
    if len(eps) + len(ns) == 1 and not args.csv:
        with _Timer(rep, "compile"):
            if eps:
                compiled = tf.compile(strat, eps[0], game=game if args.circuit else None)
            else:
                compiled = tf.compile_n(strat, ns[0], game=game if args.circuit else None)
        with _Timer(rep, "verify"):
            res = tf.verify_bound(strat, compiled, game)
        rep.outputs.update(res.as_dict())
        rep.outputs["stated_qubits"] = compiled.stated_qubits
        rep.passed = res.passed
        return
    with _Timer(rep, "sweep"):
        rows = tf.sweep(game, strat, ns=ns, epsilons=eps)
    rep.outputs["rows"] = rows
    rep.passed = all(r["pass"] for r in rows if r["status"] == "ok")
    if args.csv:
        _write_csv(args.csv, tf.SWEEP_FIELDS, rows)


def cmd_synth(args, rep: RunReport):
    rng = np.random.default_rng(args.seed)
    rep.inputs.update(target=args.target, d=args.d, eps=args.eps, max_slots=args.max_slots)
    target = _target(args.target, args.d, rng)
    with _Timer(rep, "search"):
        res = synthesize(target, args.eps, args.max_slots)
    rep.outputs.update(
        program=res.program.bits if res.found else None,
        gates=res.program.gate_names() if res.found else None,
        slots=res.slots,
        distance=res.distance,
        level_distances=res.levels,
    )
    rep.passed = res.found


def cmd_optimize(args, rep: RunReport):
    game = builtin(args.game)[0] if args.game in BUILTINS else load_game(args.game)
    cfg = SeesawConfig(m=args.m, max_iters=args.max_iters, tol=args.tol, seed=args.seed, restarts=args.restarts)
    rep.inputs.update(game=args.game, m=args.m, restarts=args.restarts, max_iters=args.max_iters)
    with _Timer(rep, "seesaw"):
        best, results = seesaw_restarts(game, cfg, workers=args.workers)
    monotone = all(np.all(np.diff(r.trace) >= -1e-12) for r in results)
    rep.outputs.update(
        best_value=best.value,
        best_seed=best.seed,
        values=[r.value for r in results],
        iterations=[r.iterations for r in results],
        monotone=monotone,
    )
    rep.passed = bool(monotone)
    if args.csv:
        rows = [
            {"restart": k, "iter": i, "value": v}
            for k, r in enumerate(results)
            for i, v in enumerate(r.trace)
        ]
        _write_csv(args.csv, ("restart", "iter", "value"), rows)


def _write_csv(path, fields, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fields), extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)


# ------------------------------------------------------------------ parser


def _floats(text: str) -> list:
    return [float(x) for x in text.split(",") if x]


def _ints(text: str) -> list:
    return [int(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every stochastic path")
    common.add_argument("--out", help="write the JSON report here instead of stdout")

    parser = argparse.ArgumentParser(prog="embezzlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    game = sub.add_parser("game", help="evaluate a game")
    gsub = game.add_subparsers(dest="action", required=True)
    gv = gsub.add_parser("value", parents=[common], help="value of a built-in or JSON game")
    gv.add_argument("--name", required=True, help=f"one of {sorted(BUILTINS)} or a game JSON file")
    gv.add_argument("--strategy", choices=("optimal", "classical"), default="optimal")
    gv.add_argument("--embed", action="store_true", help="also run the circuit embedding and compare")
    gv.set_defaults(func=cmd_game)

    emb = sub.add_parser("embezzle", help="embezzlement fidelity checks")
    esub = emb.add_subparsers(dest="action", required=True)
    ev = esub.add_parser("verify", parents=[common], help="fidelity >= 1 - epsilon with n = ceil(m / epsilon)")
    ev.add_argument("--m", type=int, required=True)
    ev.add_argument("--epsilon", type=float, required=True)
    ev.add_argument("--state", choices=("epr", "rank1", "random"), default="epr")
    ev.set_defaults(func=cmd_embezzle)

    tr = sub.add_parser("transform", parents=[common], help="compile a strategy onto the embezzlement state")
    tr.add_argument("--game", required=True)
    tr.add_argument("--epsilon", type=_floats, help="comma-separated epsilons")
    tr.add_argument("--n", type=_ints, help="comma-separated embezzling sizes")
    tr.add_argument("--circuit", action="store_true", help="use the circuit-form CHSH strategy")
    tr.add_argument("--csv", help="write sweep rows to this CSV file")
    tr.set_defaults(func=cmd_transform)

    sy = sub.add_parser("synth", parents=[common], help="find a dispatch program for a target unitary")
    sy.add_argument("--target", required=True, help="swap, cnot, ih, it, random or a matrix JSON file")
    sy.add_argument("--d", type=int, default=2)
    sy.add_argument("--eps", type=float, required=True)
    sy.add_argument("--max-slots", type=int, default=12)
    sy.set_defaults(func=cmd_synth)

    op = sub.add_parser("optimize", parents=[common], help="see-saw search for a good strategy")
    op.add_argument("--game", required=True)
    op.add_argument("--m", type=int, default=1)
    op.add_argument("--restarts", type=int, default=20)
    op.add_argument("--max-iters", type=int, default=200)
    op.add_argument("--tol", type=float, default=1e-10)
    op.add_argument("--workers", type=int, default=1)
    op.add_argument("--csv", help="write traces as CSV (restart, iter, value)")
    op.set_defaults(func=cmd_optimize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "transform" and not (args.epsilon or args.n):
        parser.error("transform needs --epsilon or --n")
    rep = RunReport(command=list(sys.argv[1:] if argv is None else argv), inputs={"seed": args.seed})
    try:
        args.func(args, rep)
    except (CapExceeded, GameError, SynthesisError, ValueError, OSError, KeyError) as exc:
        rep.outputs["error"] = f"{type(exc).__name__}: {exc}"
        rep.passed = False
    text = rep.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
