"""Command line front end: ``nlgames <command> [options]``.

Exit status is 0 iff every check in the run passes.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .analysis import (
    coprime_rank_example,
    large_shape_report,
    no_state_selftest_certificate,
    peres_pipeline,
)
from .errors import GameError
from .games import NonlocalGame, classical_value, perfect_classical_exists
from .kochenspecker import RaySet
from .magicsquare import (
    magic_square_game,
    magic_square_reference_strategy,
    sync_magic_square_game,
    sync_magic_square_reference_strategy,
)
from .numerics import Tolerance, is_pvm
from .orgame import or_game
from .strategies import QuantumStrategy, check_sync_identity, win_prob

EXPECTED_PERES = {"rays": 33, "bases": 16, "vertices": 48, "alpha": 15, "qis": 16, "rank": 3}


def _builtin_games() -> dict:
    return {
        "magic-square": magic_square_game,
        "sync-magic-square": sync_magic_square_game,
        "peres-independent-set": lambda: peres_pipeline().game,
    }


@dataclass
class RunConfig:
    command: str
    inputs: list = field(default_factory=list)
    tol: Tolerance = field(default_factory=Tolerance)
    out: str | None = None
    fmt: str = "text"
    seed: int = 0


class Report:
    """Ordered list of named checks plus free-form values."""

    def __init__(self, command: str):
        self.command = command
        self.values: dict = {}
        self.checks: list[dict] = []
        self.headline: str | None = None
        self.dot: str | None = None

    def check(self, name: str, passed: bool, value=None) -> bool:
        self.checks.append({"name": name, "passed": bool(passed), "value": value})
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_dict(self) -> dict:
        return {"command": self.command, "passed": self.passed, "values": self.values, "checks": self.checks}

    def render_text(self) -> str:
        lines = [self.headline] if self.headline else []
        lines += [f"{k}={v}" for k, v in self.values.items() if not (self.headline and f"{k}=" in self.headline)]
        for c in self.checks:
            if not c["passed"]:
                lines.append(f"FAILED {c['name']}: {c['value']}")
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines) + "\n"


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerance must be strictly positive")
    return v


def _load_game(ref: str) -> NonlocalGame:
    if ref.startswith("builtin:"):
        name = ref.split(":", 1)[1]
        games = _builtin_games()
        if name not in games:
            raise GameError(f"unknown builtin game {name!r}; choose from {sorted(games)}")
        return games[name]()
    return NonlocalGame.from_json(Path(ref).read_text())


def _load_strategy(path: str, g: NonlocalGame) -> QuantumStrategy:
    return QuantumStrategy.from_json(Path(path).read_text(), g)


def _fmt_win(p: float) -> str:
    return f"{p:.9f}"


# -- commands --------------------------------------------------------------


def cmd_verify_magic_square(args, cfg: RunConfig) -> Report:
    rep = Report("verify-magic-square")
    tol = cfg.tol
    cases = [("ms", magic_square_game(), magic_square_reference_strategy, args.strategy),
             ("sync_ms", sync_magic_square_game(), sync_magic_square_reference_strategy, args.sync_strategy)]
    for tag, g, ref, path in cases:
        if path:
            try:
                s = _load_strategy(path, g)
            except (GameError, ValueError, KeyError, TypeError, OSError) as e:
                rep.check(f"{tag}.load-strategy", False, f"{type(e).__name__}: {e}")
                continue
        else:
            s = ref()
        fams = [("A", x, s.povms_a[x]) for x in range(g.shape[0])] + [("B", y, s.povms_b[y]) for y in range(g.shape[1])]
        bad = [f"{side}{x}" for side, x, fam in fams if not is_pvm(fam, tol)]
        rep.check(f"{tag}.pvm", not bad, bad or len(fams))
        if bad:
            continue
        wp = win_prob(g, s)
        rep.values[f"{tag}.win_prob"] = _fmt_win(wp)
        rep.check(f"{tag}.perfect", wp >= 1 - tol.eq, wp)
        cv = classical_value(g, limit=None)
        rep.values[f"{tag}.classical_value"] = str(cv.value)
        rep.check(f"{tag}.pseudo-telepathy", cv.value < 1, str(cv.value))
        if tag == "sync_ms":
            res = max(check_sync_identity(s, x, a) for x in range(g.shape[0]) for a in range(g.shape[2]))
            rep.check(f"{tag}.sync-identity", res <= tol.eq, res)
    return rep


def _read_rays(path: str) -> RaySet:
    return RaySet.from_text(Path(path).read_text())


def cmd_peres_pipeline(args, cfg: RunConfig) -> Report:
    rep = Report("peres-pipeline")
    rays = _read_rays(args.rays) if args.rays else None
    res = peres_pipeline(rays, cfg.tol)
    summary = res.summary()
    rep.values.update(rays=summary["rays"], bases=summary["bases"], verdict=summary["verdict"])
    if not rep.check("weak-ks", res.ks.is_weak_ks, summary["verdict"]):
        return rep
    rep.values.update(vertices=summary["vertices"], alpha=summary["alpha"], qis=summary["qis"],
                      rank=summary["rank"], win=round(summary["win"], 9))
    rep.headline = (f"vertices={summary['vertices']} alpha={summary['alpha']} qis={summary['qis']} "
                    f"rank={summary['rank']} win={round(summary['win'], 9)}")
    rep.dot = res.graph.graph.to_dot("orthogonality")
    rep.check("qis-valid", res.qis_check.passed, res.qis_check.__dict__)
    rep.check("strategy-perfect", res.win >= 1 - cfg.tol.eq, res.win)
    rep.check("quantum-beats-classical", res.qis.size > res.alpha, f"{res.qis.size} > {res.alpha}")
    if rays is None:
        for k, v in EXPECTED_PERES.items():
            rep.check(f"expected.{k}", summary[k] == v, f"{summary[k]} (expected {v})")
    if args.emit_dot:
        Path(args.emit_dot).write_text(rep.dot)
        rep.values["dot"] = args.emit_dot
    return rep


def cmd_no_state_selftest(args, cfg: RunConfig):
    if args.game:
        if not args.strategies:
            raise GameError("--game needs --strategies A B")
        g = _load_game(args.game)
        s1, s2 = (_load_strategy(p, g) for p in args.strategies)
        return no_state_selftest_certificate(g, s1, s2, cfg.tol)
    ex = coprime_rank_example(cfg.tol, swap_parents=args.swap_parents)
    return no_state_selftest_certificate(ex.og, ex.lifted_qis, ex.lifted_ms, cfg.tol, names=("qis", "magic-square"))


def cmd_nonrobust_report(args, cfg: RunConfig):
    return large_shape_report(cfg.tol, tuple(args.deltas))


def cmd_classical_value(args, cfg: RunConfig) -> Report:
    rep = Report("classical-value")
    g = _load_game(args.game)
    cv = classical_value(g, limit=None if args.limit == 0 else args.limit)
    rep.values["classical_value"] = str(cv.value)
    rep.values["exact"] = cv.exact
    rep.values["witness"] = cv.witness.labelled(g) if cv.witness is not None else None
    if args.perfect:
        rep.values["perfect_classical"] = perfect_classical_exists(g).exists
    rep.check("exact", cv.exact, cv.exact)
    return rep


def cmd_or_game(args, cfg: RunConfig) -> Report:
    rep = Report("or-game")
    og = or_game(_load_game(args.game1), _load_game(args.game2))
    nxa, nyb, na, nb = og.shape
    rep.values.update(inputsA=nxa, inputsB=nyb, outputsA=na, outputsB=nb)
    if args.save:
        Path(args.save).write_text(og.to_json())
        rep.values["saved"] = args.save
    rep.check("built", True)
    return rep


def cmd_eval_strategy(args, cfg: RunConfig) -> Report:
    rep = Report("eval-strategy")
    g = _load_game(args.game)
    s = _load_strategy(args.strategy, g)
    fails = s.povm_failures(cfg.tol)
    rep.check("povm", not fails, fails or "ok")
    wp = win_prob(g, s)
    rep.values["win_prob"] = _fmt_win(wp)
    if args.expect is not None:
        rep.check("expected-win", abs(wp - args.expect) <= cfg.tol.eq, wp)
    return rep


# -- plumbing --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive_float, default=None, help="equality tolerance (default 1e-9)")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", dest="fmt", choices=("json", "text", "dot"), default="text")
    common.add_argument("--seed", type=int, default=0, help="seed for randomised steps")

    p = argparse.ArgumentParser(prog="nlgames", description="Nonlocal game checks and certificates.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("verify-magic-square", parents=[common], help="check both magic square games")
    q.add_argument("--strategy", help="strategy JSON for the magic square game")
    q.add_argument("--sync-strategy", help="strategy JSON for the synchronous magic square game")
    q.set_defaults(func=cmd_verify_magic_square)

    q = sub.add_parser("peres-pipeline", parents=[common], help="Kochen-Specker to independent set pipeline")
    q.add_argument("--rays", help="ray file, one ray per line (default: built-in 33 rays)")
    q.add_argument("--emit-dot", help="write the orthogonality graph as DOT")
    q.set_defaults(func=cmd_peres_pipeline)

    q = sub.add_parser("no-state-selftest", parents=[common], help="coprime Schmidt rank certificate")
    q.add_argument("--swap-parents", action="store_true", help="put the magic square first")
    q.add_argument("--game", help="game JSON or builtin:<name>")
    q.add_argument("--strategies", nargs=2, metavar=("A", "B"), help="two strategy JSON files")
    q.set_defaults(func=cmd_no_state_selftest)

    q = sub.add_parser("nonrobust-report", parents=[common], help="or-game shape and lifting report")
    q.add_argument("--deltas", type=float, nargs="+", default=[0.1, 0.01, 0.001])
    q.set_defaults(func=cmd_nonrobust_report)

    q = sub.add_parser("classical-value", parents=[common], help="exact classical value")
    q.add_argument("--game", required=True, help="game JSON or builtin:<name>")
    q.add_argument("--limit", type=int, default=10**9, help="search cardinality limit, 0 for none")
    q.add_argument("--perfect", action="store_true", help="also decide perfect classical winnability")
    q.set_defaults(func=cmd_classical_value)

    q = sub.add_parser("or-game", parents=[common], help="build the or-combination of two games")
    q.add_argument("--game1", required=True)
    q.add_argument("--game2", required=True)
    q.add_argument("--save", help="write the combined game JSON here")
    q.set_defaults(func=cmd_or_game)

    q = sub.add_parser("eval-strategy", parents=[common], help="winning probability of a strategy")
    q.add_argument("--game", required=True)
    q.add_argument("--strategy", required=True)
    q.add_argument("--expect", type=float, help="fail unless the winning probability matches")
    q.set_defaults(func=cmd_eval_strategy)
    return p


def _render(report, cfg: RunConfig) -> str:
    if cfg.fmt == "json":
        return json.dumps(report.to_dict(), indent=2) + "\n"
    if cfg.fmt == "dot":
        dot = getattr(report, "dot", None)
        if dot is None:
            raise GameError("--format dot needs a peres-pipeline run that reached the graph stage")
        return dot
    return report.render_text()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    tol = Tolerance.loose(args.tol) if args.tol is not None else Tolerance()
    cfg = RunConfig(args.command, [], tol, args.out, args.fmt, args.seed)
    try:
        report = args.func(args, cfg)
        text = _render(report, cfg)
    except (GameError, OSError, ValueError, KeyError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    ok = report.valid if hasattr(report, "valid") else report.passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
