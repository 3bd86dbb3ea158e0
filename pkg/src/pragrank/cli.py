"""Command-line entry point for every pipeline stage.

Exit codes: 0 on success, 1 on usage errors (bad flags/subcommands), 2 on
data errors (unreadable or malformed files, invalid lexicons).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .annealing import anneal_ranking
from .bundles import BUNDLE_NAMES, DomainBundle, get_bundle
from .dataset import generate_dataset, load_dataset, save_dataset
from .errors import PragrankError
from .harness import (
    ExactPragmaticListener,
    LiteralListener,
    RankedListener,
    bench,
    exp_ranking_exists,
    exp_stability,
    ingest_replays,
    replay,
    simulate_traces,
    success_table,
    write_bench_csv,
    write_success_csv,
    write_traces,
)
from .lexicon import load_lexicon, save_lexicon
from .ranking import extract_ranking_from_chain, load_ranking, save_ranking
from .rsa import iter_chain_log
from .scorer import ScorerConfig, load_ensemble, save_ensemble, train_scorer

__all__ = ["main", "cli_dispatch"]


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="pragrank", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, help_text: str):
        return sub.add_parser(name, help=help_text)

    p = add("enumerate", "enumerate a domain and report class counts")
    p.add_argument("--domain", required=True, choices=BUNDLE_NAMES)
    p.add_argument("--programs-out", help="write one program id per line")
    p.add_argument("--lexicon-out", help="write the induced lexicon (PRAGLEX)")

    p = add("lexicon", "write a domain's lexicon file")
    p.add_argument("--domain", required=True, choices=BUNDLE_NAMES)
    p.add_argument("--out", required=True)

    p = add("rsa", "run the listener chain and export the depth-d ranking")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--out", required=True)

    p = add("distill-anneal", "distill a dataset into a ranking by annealing")
    p.add_argument("--dataset", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--V", type=int, default=10_000)
    p.add_argument("--t", type=int, default=5)
    p.add_argument("--T", type=int, default=10)
    p.add_argument("--max-iters", type=int, default=10_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = add("distill-neural", "train the scorer ensemble on a dataset")
    p.add_argument("--domain", required=True, choices=BUNDLE_NAMES)
    p.add_argument("--train", required=True)
    p.add_argument("--val", required=True)
    p.add_argument("--nets", type=int, default=10)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model file")
    p.add_argument("--ranking-out", help="also export the ensemble ranking")

    p = add("dataset", "generate the greedy-speaker ranking dataset")
    p.add_argument("--domain", required=True, choices=BUNDLE_NAMES)
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--out", required=True)

    p = add("replay", "replay traces against listeners; write success CSV")
    p.add_argument("--domain", required=True, choices=BUNDLE_NAMES)
    p.add_argument("--traces", help="trace file; default: simulated traces")
    p.add_argument("--simulate", type=int, default=3, metavar="N", help="simulated trace length")
    p.add_argument("--listeners", default="l0,l1,sigma")
    p.add_argument("--model", help="ensemble file for the neural listener")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--out", required=True)

    p = add("bench", "time listeners per turn; write timing CSV")
    p.add_argument("--domain", required=True, choices=BUNDLE_NAMES)
    p.add_argument("--traces", help="trace file; default: simulated traces")
    p.add_argument("--simulate", type=int, default=3, metavar="N")
    p.add_argument("--limit", type=int, help="cap the number of traces")
    p.add_argument("--listeners", default="l0,l1,sigma")
    p.add_argument("--model", help="ensemble file for the neural listener")
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--out", required=True)

    p = add("theory-exists", "ranking-existence check on random lexicons")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--depth", type=int, default=100)
    p.add_argument("--min-size", type=int, default=10)
    p.add_argument("--max-size", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)

    p = add("theory-stability", "rank-stability sweep; write stats CSV")
    p.add_argument("--p-trues", default="0.2,0.5,0.8")
    p.add_argument("--sizes", default="10,20,50")
    p.add_argument("--n-per-cell", type=int, default=20)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = add("serve", "start the interactive session service")
    p.add_argument("--domains", default="toy")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--event-log")

    return parser


def _make_listeners(names: str, bundle: DomainBundle, model_path: str | None):
    listeners = []
    for name in names.split(","):
        name = name.strip()
        if name == "l0":
            listeners.append(LiteralListener(bundle.lex, bundle.prior, name="L0"))
        elif name == "l1":
            listeners.append(ExactPragmaticListener(bundle.lex, None, name="L1"))
        elif name == "sigma":
            listeners.append(RankedListener(bundle.sigma, bundle.lex, name="L_sigma"))
        elif name == "anneal":
            records = generate_dataset(bundle.lex, N=3)
            sigma = anneal_ranking(records, bundle.lex.n, hypothesis_ids=bundle.lex.hypotheses)
            listeners.append(RankedListener(sigma, bundle.lex, name="L_anneal"))
        elif name == "neural":
            if not model_path:
                raise PragrankError("the neural listener needs --model")
            ensemble = load_ensemble(model_path)
            sigma = ensemble.to_ranking(bundle.encodings, bundle.lex.hypotheses)
            listeners.append(RankedListener(sigma, bundle.lex, name="L_neural"))
        else:
            raise PragrankError(f"unknown listener {name!r} (use l0, l1, sigma, anneal, neural)")
    return listeners


def _load_traces(args, bundle: DomainBundle):
    if args.traces:
        return ingest_replays(args.traces, bundle.lex)
    return simulate_traces(bundle.lex, bundle.prior, N=args.simulate)


def _run(args) -> int:
    if args.command == "enumerate":
        bundle = get_bundle(args.domain)
        print(f"domain: {bundle.name}")
        if "syntactic_count" in bundle.meta:
            print(f"syntactic programs: {bundle.meta['syntactic_count']}")
        print(f"semantic programs: {bundle.lex.n}")
        print(f"utterances: {bundle.lex.m}")
        if args.programs_out:
            with open(args.programs_out, "w", encoding="utf-8", newline="\n") as fh:
                fh.writelines(h + "\n" for h in bundle.lex.hypotheses)
        if args.lexicon_out:
            save_lexicon(bundle.lex, args.lexicon_out)

    elif args.command == "lexicon":
        save_lexicon(get_bundle(args.domain).lex, args.out)

    elif args.command == "rsa":
        lex = load_lexicon(args.lexicon)
        nv = None
        for _, _, nv in iter_chain_log(lex, None, args.depth):
            pass
        sigma = extract_ranking_from_chain(nv, args.depth, lex.hypotheses)
        save_ranking(sigma, args.out)
        print(f"ranking at depth {args.depth} over {lex.n} hypotheses -> {args.out}")

    elif args.command == "distill-anneal":
        lex = load_lexicon(args.lexicon)
        records = load_dataset(args.dataset, lex)
        sigma = anneal_ranking(
            records,
            lex.n,
            V=args.V,
            t=args.t,
            T=args.T,
            rng_seed=args.seed,
            max_iters=args.max_iters,
            hypothesis_ids=lex.hypotheses,
        )
        save_ranking(sigma, args.out)
        print(f"annealed ranking over {lex.n} hypotheses -> {args.out}")

    elif args.command == "distill-neural":
        bundle = get_bundle(args.domain)
        train = load_dataset(args.train, bundle.lex)
        val = load_dataset(args.val, bundle.lex)
        config = ScorerConfig(n_nets=args.nets, epochs=args.epochs, seed=args.seed)
        ensemble = train_scorer(train, val, bundle.encodings, config)
        save_ensemble(ensemble, args.out)
        accs = ", ".join(f"{tn.val_accuracy:.3f}" for tn in ensemble.nets)
        print(f"trained {args.nets} nets (val accuracy {accs}) -> {args.out}")
        if args.ranking_out:
            save_ranking(ensemble.to_ranking(bundle.encodings, bundle.lex.hypotheses), args.ranking_out)

    elif args.command == "dataset":
        bundle = get_bundle(args.domain)
        records = generate_dataset(bundle.lex, N=args.N)
        save_dataset(records, bundle.lex, args.out)
        print(f"{len(records)} records -> {args.out}")

    elif args.command == "replay":
        bundle = get_bundle(args.domain)
        traces = _load_traces(args, bundle)
        results = {}
        for listener in _make_listeners(args.listeners, bundle, args.model):
            results[listener.name] = [replay(t, listener.fresh(), bundle.lex, k=args.k) for t in traces]
        write_success_csv(success_table(results), args.out)
        for name, rs in results.items():
            final = sum(1 for r in rs if r.first_success is not None) / len(rs)
            print(f"{name}: cumulative success {final:.3f} over {len(rs)} traces")

    elif args.command == "bench":
        bundle = get_bundle(args.domain)
        traces = _load_traces(args, bundle)
        if args.limit:
            traces = traces[: args.limit]
        listeners = _make_listeners(args.listeners, bundle, args.model)
        rows = bench(listeners, traces, repetitions=args.repetitions)
        write_bench_csv(rows, args.out)
        for name in {r[0] for r in rows}:
            med = np.median([r[2] for r in rows if r[0] == name])
            print(f"{name}: median per-turn {med:.3f} ms")

    elif args.command == "theory-exists":
        report = exp_ranking_exists(
            num_lexicons=args.n,
            size_range=(args.min_size, args.max_size),
            depth=args.depth,
            seed=args.seed,
        )
        print(f"lexicons: {report.lexicons}  depth: {report.depth}  checks: {report.checks}")
        print(f"violations: {len(report.violations)}")
        for li, depth, witness in report.violations[:10]:
            print(f"  lexicon {li} depth {depth}: triple {witness}")

    elif args.command == "theory-stability":
        p_trues = [float(x) for x in args.p_trues.split(",")]
        sizes = [int(x) for x in args.sizes.split(",")]
        stats = exp_stability(p_trues, sizes, args.n_per_cell, args.iters, args.seed)
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("p_true,size,mean,ci_lo,ci_hi\n")
            for cell in stats.cells:
                fh.write(f"{cell.p_true},{cell.size},{cell.mean:.6f},{cell.ci_lo:.6f},{cell.ci_hi:.6f}\n")
        for cell in stats.cells:
            print(f"p={cell.p_true} size={cell.size}: mean {cell.mean:.3f} [{cell.ci_lo:.3f}, {cell.ci_hi:.3f}]")

    elif args.command == "serve":
        import uvicorn

        from .service import create_app

        names = [x.strip() for x in args.domains.split(",")]
        bundles = {name: get_bundle(name) for name in names}
        app = create_app(bundles, seed=args.seed, event_log_path=args.event_log)
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")

    return 0


def cli_dispatch(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _run(args)
    except (PragrankError, OSError) as exc:
        print(f"pragrank: error: {exc}", file=sys.stderr)
        return 2


def main(argv: list[str] | None = None) -> int:
    return cli_dispatch(argv)


if __name__ == "__main__":
    raise SystemExit(main())
