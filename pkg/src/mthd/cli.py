"""The mthd command line: train, translate, simulate, gen-corpus, serve."""

import argparse
import json
import logging
import sys

from .adaptation import AdaptationConfig, load_checkpoint, save_checkpoint
from .decoding import beam_search
from .errors import MthdError
from .server.config import TASK_MODES
from .textdata import (
    ParallelCorpus,
    load_parallel,
    load_rules,
    read_lines,
    tokenize,
    write_lines,
)
from .textdata.rules import antiquate_line
from .training import train_model


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mthd",
        description="Interactive, adaptive translation workbench for historical text",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a task model from a parallel corpus")
    p.add_argument("--task", choices=sorted(TASK_MODES), required=True)
    p.add_argument("--src", required=True, help="source-side sentence file")
    p.add_argument("--tgt", required=True, help="target-side sentence file")
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--epochs", type=int, default=6)
    p.add_argument("--lr", type=float, default=0.3)
    p.add_argument("--embed", type=int, default=64)
    p.add_argument("--hidden", type=int, default=128)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("translate", help="decode a sentence file with a checkpoint")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--beam", type=int, default=6)

    p = sub.add_parser("simulate", help="simulated-user effort benchmark")
    p.add_argument("--model", required=True)
    p.add_argument("--src", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--mode", choices=["interactive", "static", "both"], default="both")
    p.add_argument("--adapt", action="store_true")
    p.add_argument("--via-server", metavar="URL", default=None)
    p.add_argument("--task", choices=sorted(TASK_MODES), default="normalize")
    p.add_argument("--beam", type=int, default=6)
    p.add_argument("--adapt-steps", type=int, default=3)
    p.add_argument("--adapt-lr", type=float, default=0.01)
    p.add_argument("--report", required=True, help="JSON report output path")

    p = sub.add_parser("gen-corpus", help="synthesize an old-spelling corpus")
    p.add_argument("--rules", required=True)
    p.add_argument("--input", required=True, help="modern sentence file")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-src", required=True)
    p.add_argument("--out-tgt", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", default=None, help="config file (or MTHD_CONFIG)")
    p.add_argument("--host", default="127.0.0.1")

    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except MthdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def cmd_train(args) -> int:
    corpus = load_parallel(args.src, args.tgt)
    model, src_vocab, tgt_vocab, history = train_model(
        corpus,
        TASK_MODES[args.task],
        epochs=args.epochs,
        learning_rate=args.lr,
        embed_dim=args.embed,
        hidden_dim=args.hidden,
        seed=args.seed,
    )
    save_checkpoint(model, src_vocab, tgt_vocab, args.out)
    print(f"saved {args.out} (final epoch loss {history[-1]:.4f})")
    return 0


def cmd_translate(args) -> int:
    model, src_vocab, tgt_vocab = load_checkpoint(args.model)
    for line in read_lines(args.input):
        if not line.strip():
            print()
            continue
        hyp = beam_search(
            model, tokenize(line, src_vocab), beam_width=args.beam, vocab=tgt_vocab
        )[0]
        print(hyp.text)
    return 0


def cmd_simulate(args) -> int:
    from .simulator import HttpEngine, LocalEngine, run_benchmark

    corpus = load_parallel(args.src, args.ref)
    modes = {
        "interactive": ["interactive"],
        "static": ["static_post_edit"],
        "both": ["static_post_edit", "interactive"],
    }[args.mode]

    if args.via_server:
        def make_engine():
            return HttpEngine(args.via_server, args.task)
    else:
        def make_engine():
            return LocalEngine.from_checkpoint(
                args.model,
                args.task,
                adapt_config=AdaptationConfig(
                    steps=args.adapt_steps, learning_rate=args.adapt_lr
                ),
                beam_width=args.beam,
            )

    report = run_benchmark(make_engine, corpus, modes, adapt=args.adapt)
    with open(args.report, "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, ensure_ascii=False, indent=2)
    for name, agg in report.modes.items():
        print(
            f"{name}: KSMR {agg['ksmr']:.4f} "
            f"({agg['keystrokes']} keystrokes + {agg['mouse_actions']} mouse "
            f"/ {agg['reference_chars']} chars)"
        )
    if report.failures:
        print(f"{len(report.failures)} sentence(s) failed; see report")
    return 0


def cmd_gen_corpus(args) -> int:
    from .textdata import gen_synthetic_corpus

    rules = load_rules(args.rules)
    lines = [l for l in read_lines(args.input) if l.strip()]
    corpus = gen_synthetic_corpus(lines, rules, args.seed)
    write_lines(args.out_src, corpus.sources())
    write_lines(args.out_tgt, corpus.targets())
    print(f"wrote {len(corpus)} pairs to {args.out_src} / {args.out_tgt}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app, load_config

    config = load_config(args.config)
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=config.port, log_level="info")
    return 0


COMMANDS = {
    "train": cmd_train,
    "translate": cmd_translate,
    "simulate": cmd_simulate,
    "gen-corpus": cmd_gen_corpus,
    "serve": cmd_serve,
}


if __name__ == "__main__":
    sys.exit(main())
