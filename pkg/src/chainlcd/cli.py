"""Command-line front end: analyze instances, verify bounds, generate chains.

Exit codes: 0 all checks passed, 1 usage or input error, 2 at least one
theorem-backed verdict failed (which signals an implementation bug, never a
counterexample).
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

from .core import ChainError, InstanceFormatError, parse_instance
from .forests import DEFAULT_ENUMERATION_BUDGET
from .generators import (
    fig2_prime_cycle,
    fig2_variant,
    fig3_absorption,
    random_chain,
)
from .core import serialize_instance
from .verify import (
    SuiteInstance,
    build_report,
    evaluate_instance,
    extremal_suite,
    random_suite,
    summarize,
)

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    # Usage problems exit with code 1, keeping 2 for theorem violations.
    def error(self, message: str):  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="chainlcd",
        description=(
            "Exact analysis of rational Markov chains: stationary"
            " distributions, absorption probabilities, gains and biases,"
            " with denominator bound verification."
        ),
    )
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", help="analyze one instance file")
    analyze.add_argument("instance", help="instance file, or - for stdin")
    analyze.add_argument(
        "--rewards",
        help="reward vector: inline comma-separated integers or a JSON file",
    )
    analyze.add_argument("--jobs", type=int, default=1)
    analyze.add_argument(
        "--forest-budget", type=int, default=DEFAULT_ENUMERATION_BUDGET
    )
    analyze.add_argument(
        "--decimal",
        action="store_true",
        help="add decimal approximations next to exact values",
    )
    analyze.add_argument("-o", "--output")

    verify = commands.add_parser(
        "verify", help="run the bound-verification harness"
    )
    verify.add_argument("--count", type=int, required=True)
    verify.add_argument("--n-min", type=int, required=True)
    verify.add_argument("--n-max", type=int, required=True)
    verify.add_argument("--m-min", type=int, required=True)
    verify.add_argument("--m-max", type=int, required=True)
    verify.add_argument("--density", type=float)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--jobs", type=int, default=1)
    verify.add_argument(
        "--forest-budget", type=int, default=DEFAULT_ENUMERATION_BUDGET
    )
    verify.add_argument("-o", "--output")

    generate = commands.add_parser("generate", help="emit a generated instance")
    generate.add_argument(
        "kind", choices=["fig2", "fig2-variant", "fig3", "random"]
    )
    generate.add_argument("--n", type=int)
    generate.add_argument("--q", type=int)
    generate.add_argument("--m", type=int)
    generate.add_argument("--p", help="comma-separated cycle weights")
    generate.add_argument("--density", type=float, default=0.5)
    generate.add_argument("--seed", type=int, default=0)
    generate.add_argument("-o", "--output")

    return parser


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_json(payload: dict, output: str | None) -> None:
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", output)


_INLINE_REWARDS = re.compile(r"^\s*[+-]?\d+(\s*,\s*[+-]?\d+)*\s*$")


def _parse_rewards_argument(value: str) -> tuple[int, ...]:
    if _INLINE_REWARDS.match(value):
        return tuple(int(tok) for tok in value.split(","))
    payload = json.loads(Path(value).read_text(encoding="utf-8"))
    if isinstance(payload, dict):
        payload = payload.get("r")
    if not isinstance(payload, list):
        raise InstanceFormatError(
            f"rewards file {value!r} must hold a list or an object with key 'r'"
        )
    return tuple(int(x) for x in payload)


def _cmd_analyze(args: argparse.Namespace) -> int:
    try:
        if args.instance == "-":
            text = sys.stdin.read()
            label = "stdin"
        else:
            text = Path(args.instance).read_text(encoding="utf-8")
            label = Path(args.instance).name
        instance = parse_instance(text)
        rewards = instance.rewards
        if args.rewards is not None:
            rewards = _parse_rewards_argument(args.rewards)
        if rewards is not None and len(rewards) != instance.matrix.n:
            raise InstanceFormatError(
                f"reward vector has {len(rewards)} entries,"
                f" expected {instance.matrix.n}"
            )
    except (OSError, ValueError, ChainError) as exc:
        print(f"chainlcd: error: {exc}", file=sys.stderr)
        return 1

    evaluation = evaluate_instance(
        instance.matrix, rewards, label=label, budget=args.forest_budget
    )
    _emit_json(build_report(evaluation, decimal=args.decimal), args.output)
    if not evaluation.all_pass:
        for message in evaluation.failures:
            print(f"chainlcd: theorem violation: {message}", file=sys.stderr)
        return 2
    return 0


def _evaluate_suite_entry(item: tuple[SuiteInstance, int]):
    suite_instance, budget = item
    return evaluate_instance(
        suite_instance.matrix,
        suite_instance.rewards,
        label=suite_instance.label,
        budget=budget,
    )


def _cmd_verify(args: argparse.Namespace) -> int:
    if args.count < 0:
        print("chainlcd: error: --count must be non-negative", file=sys.stderr)
        return 1
    if not (1 <= args.n_min <= args.n_max) or not (1 <= args.m_min <= args.m_max):
        print("chainlcd: error: empty n or m range", file=sys.stderr)
        return 1

    suite = random_suite(
        args.count,
        (args.n_min, args.n_max),
        (args.m_min, args.m_max),
        seed=args.seed,
        density=args.density,
    )
    suite.extend(extremal_suite((args.n_min, args.n_max), (args.m_min, args.m_max)))

    items = [(si, args.forest_budget) for si in suite]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            evaluations = list(pool.map(_evaluate_suite_entry, items, chunksize=4))
    else:
        evaluations = [_evaluate_suite_entry(item) for item in items]

    summary = summarize(evaluations)
    summary["parameters"] = {
        "count": args.count,
        "n_range": [args.n_min, args.n_max],
        "m_range": [args.m_min, args.m_max],
        "density": args.density,
        "seed": args.seed,
    }
    _emit_json(summary, args.output)
    return 0 if summary["failures"] == 0 else 2


def _cmd_generate(args: argparse.Namespace) -> int:
    try:
        if args.kind == "fig2":
            if args.n is None or args.q is None:
                raise ValueError("fig2 needs --n and --q")
            generated = fig2_prime_cycle(args.n, args.q)
            text = serialize_instance(generated.matrix, meta=generated.meta())
        elif args.kind == "fig2-variant":
            if not args.p:
                raise ValueError("fig2-variant needs --p (comma-separated weights)")
            weights = [int(tok) for tok in args.p.split(",")]
            generated = fig2_variant(weights)
            text = serialize_instance(generated.matrix, meta=generated.meta())
        elif args.kind == "fig3":
            if args.n is None or args.m is None:
                raise ValueError("fig3 needs --n and --m")
            generated = fig3_absorption(args.n, args.m)
            text = serialize_instance(generated.matrix, meta=generated.meta())
        else:
            if args.n is None or args.m is None:
                raise ValueError("random needs --n and --m")
            matrix = random_chain(args.n, args.m, args.density, args.seed)
            meta = {
                "kind": "random",
                "n": str(args.n),
                "m": str(args.m),
                "density": str(args.density),
                "seed": str(args.seed),
            }
            text = serialize_instance(matrix, meta=meta)
    except ValueError as exc:
        print(f"chainlcd: error: {exc}", file=sys.stderr)
        return 1
    _emit(text, args.output)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "analyze":
        return _cmd_analyze(args)
    if args.command == "verify":
        return _cmd_verify(args)
    return _cmd_generate(args)


if __name__ == "__main__":
    raise SystemExit(main())
