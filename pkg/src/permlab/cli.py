"""Command-line front end: exact enumeration, Monte Carlo runs, the witness
chain, growth-process batches, the bound checker, and trace replay.

Exit codes: 0 on success, 2 when any bound verdict is VIOLATED (so CI can
tell "claim contradicted at desk scale" from operational failure), 1 on
errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from .config import ExperimentConfig, make_record, write_records
from .errors import PermLabError
from .estimators import (
    GENERAL_CLAIMS,
    UNIFORM_CLAIMS,
    StatEquals,
    WitnessEvent,
    check_bounds,
    conditional_probability,
    det_singular_probability,
    enumerate_exact,
    limiting_singular_probability,
    mc_probability,
)
from .fields import make_field
from .processes import GrowthTrace, replay_growth_trace, run_growth_process
from .randomness import RandomStream, make_distribution, uniform_distribution


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; 2 is reserved for
    # VIOLATED verdicts here, so usage problems exit 1 instead.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser, *, dist: bool = False):
    if dist:
        p.add_argument("--q", type=int, help="field order (uniform entries)")
        p.add_argument("--weights", type=str,
                       help="comma-separated entry weights over F_p (non-uniform)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=str, default=None,
                   help="append records to this file (default: $PERMLAB_LOG_DIR)")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def _parse_weights(text: str) -> tuple:
    parts = [w.strip() for w in text.split(",") if w.strip()]
    out = []
    for w in parts:
        if "/" in w:
            out.append(Fraction(w))
        else:
            out.append(float(w))
    return tuple(out)


def _resolve_dist(args):
    if getattr(args, "weights", None):
        weights = _parse_weights(args.weights)
        field = make_field(args.q if args.q else len(weights))
        return make_distribution(field, weights)
    if args.q is None:
        raise PermLabError("need --q or --weights")
    return uniform_distribution(make_field(args.q))


def _weights_for_config(args):
    if getattr(args, "weights", None):
        return tuple(float(x) for x in _parse_weights(args.weights))
    return None


def _print_table(headers: list[str], rows: list[list]):
    cells = [[str(c) for c in row] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h)
              for i, h in enumerate(headers)]
    line = "  ".join(h.ljust(w) for h, w in zip(headers, widths))
    print(line)
    print("-" * len(line))
    for row in cells:
        print("  ".join(c.ljust(w) for c, w in zip(row, widths)))


def cmd_alpha(args) -> int:
    cfg = ExperimentConfig(command="alpha", q=args.q, tol=args.tol,
                           ladder=args.ladder, seed=None)
    alpha = limiting_singular_probability(args.q, args.tol)
    rows = [["alpha", f"{alpha:.12f}", ""]]
    ladder = []
    for n in range(1, args.ladder + 1):
        exact = det_singular_probability(n, args.q)
        ladder.append({"n": n, "value": f"{exact}", "float": float(exact)})
        rows.append([f"det-singular n={n}", f"{float(exact):.12f}", f"{exact}"])
    print(f"limiting singular probability for q={args.q}")
    _print_table(["quantity", "value", "exact"], rows)
    rec = make_record("alpha", cfg, {"alpha": alpha, "ladder": ladder})
    path = write_records([rec], args.out, args.format)
    if path:
        print(f"record appended to {path}")
    return 0


def cmd_enumerate(args) -> int:
    cfg = ExperimentConfig(command="enumerate", q=args.q, n=args.n, stat=args.stat)
    dist = enumerate_exact(args.n, args.q, args.stat)
    rows = []
    for z in range(args.q):
        prob = dist.probability(z)
        rows.append([z, dist.counts[z], f"{prob}", f"{float(prob):.9f}"])
    print(f"exact {args.stat} distribution, n={args.n}, q={args.q} "
          f"({dist.total} matrices)")
    _print_table(["value", "count", "exact", "float"], rows)
    rec = make_record("enumerate", cfg, dist.to_json())
    path = write_records([rec], args.out, args.format)
    if path:
        print(f"record appended to {path}")
    return 0


def _mc_event(args):
    if args.event == "witness":
        if args.s is None:
            raise PermLabError("--event witness needs --s")
        return WitnessEvent(args.s, args.ell or 1)
    return StatEquals(args.stat, args.value)


def cmd_mc(args) -> int:
    dist = _resolve_dist(args)
    cfg = ExperimentConfig(command="mc", q=dist.field.q,
                           weights=_weights_for_config(args), n=args.n,
                           s=args.s, ell=args.ell, n_samples=args.N,
                           seed=args.seed, workers=args.workers,
                           stat=args.stat if args.event is None else None,
                           value=args.value if args.event is None else None)
    event = _mc_event(args)
    est = mc_probability(event, args.n, dist, args.N, args.seed, args.workers)
    print(f"Pr[{json.dumps(event.describe())}] over n={args.n}, N={args.N}")
    _print_table(
        ["point", "lo99", "hi99", "successes", "N"],
        [[f"{est.point:.6f}", f"{est.lo:.6f}", f"{est.hi:.6f}",
          est.successes, est.n_samples]])
    rec = make_record("estimate", cfg,
                      {"event": event.describe(), **est.to_json()})
    path = write_records([rec], args.out, args.format)
    if path:
        print(f"record appended to {path}")
    return 0


def cmd_chain(args) -> int:
    dist = _resolve_dist(args)
    q = dist.field.q
    cfg = ExperimentConfig(command="chain", q=q,
                           weights=_weights_for_config(args), n=args.n,
                           s_max=args.s_max, n_samples=args.N,
                           seed=args.seed, workers=args.workers)
    rows = []
    results = []
    for s in range(1, args.s_max + 1):
        est = conditional_probability(WitnessEvent(s, 1), WitnessEvent(s - 1, 1),
                                      args.n, dist, args.N, args.seed,
                                      args.workers)
        bound = 1.0 - float(q) ** (-s)
        rows.append([s, f"{est.point:.6f}", f"{bound:.6f}",
                     est.n_samples, est.total_drawn])
        results.append({"s": s, "bound": bound, **est.to_json()})
    print(f"conditional witness chain, n={args.n}, q={q}")
    _print_table(["s", "Pr[E(s-1)|E(s)]", "1-q^-s", "accepted", "drawn"], rows)
    rec = make_record("chain", cfg, {"levels": results})
    path = write_records([rec], args.out, args.format)
    if path:
        print(f"record appended to {path}")
    return 0


def cmd_growth(args) -> int:
    dist = _resolve_dist(args)
    cfg = ExperimentConfig(command="growth", q=dist.field.q,
                           weights=_weights_for_config(args), n=args.n,
                           final_size=args.T, delta=args.delta,
                           runs=args.runs, seed=args.seed,
                           workers=args.workers)
    if args.target:
        target = tuple(int(c) for c in args.target.split(","))
    else:
        target = tuple(range(args.n - 2 * args.T + 1, args.n + 1))
    master = RandomStream(args.seed)
    outcomes: dict[str, int] = {}
    bad_counts = []
    traces = []
    for r in range(args.runs):
        trace = run_growth_process(dist, args.n, target, args.T, args.delta,
                                   master.split(r))
        outcomes[trace.outcome.value] = outcomes.get(trace.outcome.value, 0) + 1
        bad_counts.append(trace.bad_count)
        if args.trace_out:
            traces.append(trace.to_json())
    success = outcomes.get("SUCCESS_IN_J", 0) / args.runs
    mean_bad = float(np.mean(bad_counts))
    print(f"growth process, n={args.n}, T={args.T}, delta={args.delta}, "
          f"runs={args.runs}")
    _print_table(["outcome", "count", "frequency"],
                 [[k, v, f"{v / args.runs:.4f}"] for k, v in sorted(outcomes.items())])
    print(f"success-in-target frequency: {success:.4f}   mean bad steps: {mean_bad:.4f}")
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as fh:
            for t in traces:
                fh.write(json.dumps(t, sort_keys=True) + "\n")
        print(f"traces written to {args.trace_out}")
    rec = make_record("growth", cfg, {
        "target_cols": list(target), "outcomes": outcomes,
        "success_frequency": success, "mean_bad_steps": mean_bad,
    })
    path = write_records([rec], args.out, args.format)
    if path:
        print(f"record appended to {path}")
    return 0


def cmd_bounds(args) -> int:
    dist = _resolve_dist(args)
    if args.claim:
        claims = tuple(args.claim)
    else:
        claims = UNIFORM_CLAIMS if dist.is_uniform else GENERAL_CLAIMS
    cfg = ExperimentConfig(command="bounds", q=dist.field.q,
                           weights=_weights_for_config(args), n=args.n,
                           n_samples=args.N, seed=args.seed,
                           workers=args.workers, claims=claims)
    verdicts = check_bounds(claims, args.n, dist, args.N, args.seed, args.workers)
    rows = [[v.claim, v.verdict, f"{v.margin:+.6f}", v.method] for v in verdicts]
    print(f"bound verdicts, n={args.n}, q={dist.field.q}")
    _print_table(["claim", "verdict", "margin", "method"], rows)
    recs = [make_record("verdict", cfg, v.to_json()) for v in verdicts]
    path = write_records(recs, args.out, args.format)
    if path:
        print(f"record appended to {path}")
    if any(v.verdict == "VIOLATED" for v in verdicts):
        return 2
    return 0


def cmd_replay(args) -> int:
    with open(args.trace, "r", encoding="utf-8") as fh:
        text = fh.read()
    count = 0
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        trace = GrowthTrace.from_json(json.loads(line))
        replay_growth_trace(trace)
        count += 1
    print(f"replayed {count} trace(s): every step re-derived identically")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="permlab",
                     description="finite-field random-matrix laboratory")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("alpha", parents=[], help="limiting singularity constants")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--ladder", type=int, default=12,
                   help="print exact det-singularity for n = 1..ladder")
    _add_common(p)
    p.set_defaults(fn=cmd_alpha)

    p = sub.add_parser("enumerate", help="exact distribution by enumeration")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--stat", choices=("per", "det"), default="per")
    _add_common(p)
    p.set_defaults(fn=cmd_enumerate)

    p = sub.add_parser("mc", help="Monte Carlo probability of a matrix event")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--stat", choices=("per", "det"), default="per")
    p.add_argument("--value", type=int, default=0)
    p.add_argument("--event", choices=("witness",), default=None)
    p.add_argument("--s", type=int, default=None)
    p.add_argument("--ell", type=int, default=None)
    _add_common(p, dist=True)
    p.set_defaults(fn=cmd_mc)

    p = sub.add_parser("chain", help="conditional witness-chain estimates")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--s-max", dest="s_max", type=int, default=3)
    _add_common(p, dist=True)
    p.set_defaults(fn=cmd_chain)

    p = sub.add_parser("growth", help="seeded growth-process batch")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--T", type=int, required=True, help="final survivor-set size")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--target", type=str, default=None,
                   help="comma-separated 1-based target columns (default: last 2T)")
    p.add_argument("--trace-out", type=str, default=None,
                   help="write one JSON trace per line to this file")
    _add_common(p, dist=True)
    p.set_defaults(fn=cmd_growth)

    p = sub.add_parser("bounds", help="distribution bound verdicts")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", type=int, default=100000)
    p.add_argument("--claim", action="append", default=None,
                   choices=list(UNIFORM_CLAIMS + GENERAL_CLAIMS),
                   help="repeatable; default: all claims for the distribution")
    _add_common(p, dist=True)
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("replay", help="verify stored growth traces")
    p.add_argument("trace", type=str, help="trace file (one JSON object per line)")
    p.set_defaults(fn=cmd_replay)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except PermLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
