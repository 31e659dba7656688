"""Command line interface: ``varmark <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from varmark.errors import VarmarkError

log = logging.getLogger("varmark")


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise argparse.ArgumentTypeError(f"no such file: {path}")
    return p


def _map(func, items, jobs: int):
    if jobs <= 1 or len(items) < 2:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items, chunksize=max(1, len(items) // (4 * jobs))))


def _read_inputs(path: Path, language: str) -> tuple[list[dict], bool]:
    """Records from a JSONL corpus, or a single source file as one record."""
    from varmark.corpus import read_jsonl

    if path.suffix == ".jsonl":
        return read_jsonl(path), True
    return [{"id": path.stem, "code": path.read_text(encoding="utf-8"), "language": language}], False


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _train_config(args):
    from varmark.train import TrainConfig

    overrides = {
        "alpha": args.alpha,
        "bits_per_var": args.bits_per_var,
        "seed": args.seed,
        "epochs": args.epochs,
        "lr": args.lr,
        "batch_size": args.batch_size,
    }
    if args.config:
        return TrainConfig.from_file(args.config, **overrides)
    return TrainConfig(**{k: v for k, v in overrides.items() if v is not None})


def cmd_train(args) -> int:
    import torch

    from varmark.corpus import read_jsonl, split_corpus
    from varmark.lang.parser import parse_function
    from varmark.teacher import LabelStore, load_exported_labels, train_corpus_teacher
    from varmark.train import train

    torch.set_num_threads(max(1, args.jobs))
    cfg = _train_config(args)
    records = read_jsonl(args.corpus)
    tr, va, te = split_corpus(records, valid_frac=args.valid_frac, test_frac=args.test_frac, seed=cfg.seed)
    parse = lambda rs: [parse_function(r["code"], r["language"], r["id"]) for r in rs]
    train_fns, valid_fns = parse(tr), parse(va)
    teacher = train_corpus_teacher(train_fns)
    labels = load_exported_labels(args.labels, fallback=teacher) if args.labels else LabelStore(fallback=teacher)
    metrics = args.metrics or str(Path(args.model).with_suffix(".metrics.csv"))
    result = train(train_fns, valid_fns, labels, cfg, metrics_path=metrics, max_seconds=args.max_seconds)
    result.bundle.meta["seed"] = cfg.seed
    result.bundle.meta["test_ids"] = [r["id"] for r in te]
    result.bundle.save(args.model)
    print(json.dumps({
        "model": str(args.model),
        "metrics": metrics,
        "best_epoch": result.best_epoch,
        "val_bitacc": result.bundle.meta["best_val_bitacc"],
        "seed": cfg.seed,
    }, sort_keys=True))
    return 0


def _load_model(path):
    from varmark.nn.model import ModelBundle

    return ModelBundle.load(path)


def _message(args):
    from varmark.pipeline import WatermarkMessage

    try:
        return WatermarkMessage.from_hex(args.message, args.bits)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"bad --message: {e}") from None


def cmd_embed(args) -> int:
    from varmark.pipeline import embed

    bundle = _load_model(args.model)
    msg = _message(args)
    records, is_corpus = _read_inputs(args.input, args.language)
    outputs, reports = [], []
    for r in records:
        code, report = embed(r["code"], msg, bundle, language=r["language"], fn_id=r["id"])
        rep = report.to_json() | {"seed": args.seed, "message_hex": msg.to_hex(), "message_bits": len(msg)}
        outputs.append(dict(r, code=code))
        reports.append(rep)
        print(
            f"{r['id']}: vars_used={report.variables_used}/{len(report.variables)} bits={report.bits_embedded} "
            f"bpt={report.bpt:.4f} ast_ok={report.checks.ast_ok} keyword_ok={report.checks.keyword_ok}",
            file=sys.stderr,
        )
    if is_corpus:
        _write(args.output, "".join(json.dumps(o, sort_keys=True) + "\n" for o in outputs))
        if args.report:
            _write(args.report, "".join(json.dumps(o, sort_keys=True) + "\n" for o in reports))
    else:
        _write(args.output, outputs[0]["code"])
        if args.report:
            _write(args.report, json.dumps(reports[0], sort_keys=True, indent=2) + "\n")
    return 0


def _framings(args, n: int):
    from varmark.pipeline import FramingDescriptor

    if args.framing is not None:
        text = args.framing.read_text(encoding="utf-8")
        try:
            objs = [json.loads(text)]
        except json.JSONDecodeError:
            try:
                objs = [json.loads(ln) for ln in text.splitlines() if ln.strip()]
            except json.JSONDecodeError as e:
                raise argparse.ArgumentTypeError(f"bad --framing file: {e}") from None
        return [FramingDescriptor.from_json(o.get("framing", o)) for o in objs]
    if args.length is None:
        raise argparse.ArgumentTypeError("extract needs --framing or --length")
    return [FramingDescriptor(args.length, args.bits_per_var or 2)] * n


def cmd_extract(args) -> int:
    from varmark.evalkit import bit_accuracy
    from varmark.pipeline import WatermarkMessage, extract

    bundle = _load_model(args.model)
    records, _ = _read_inputs(args.input, args.language)
    framings = _framings(args, len(records))
    if len(framings) != len(records):
        raise argparse.ArgumentTypeError("one framing descriptor per input function is required")
    truth = _message(args).bits if args.message else None
    for r, fr in zip(records, framings):
        bits, conf = extract(r["code"], bundle, fr, language=r["language"], fn_id=r["id"])
        out = {
            "id": r["id"],
            "bits": "".join(map(str, bits)),
            "hex": WatermarkMessage(tuple(bits)).to_hex(),
            "confidence": [round(c, 6) for c in conf],
            "seed": args.seed,
        }
        if truth is not None:
            out["bit_acc"] = bit_accuracy(truth, bits)
        print(json.dumps(out, sort_keys=True))
    return 0


def _attack_one(job):
    from varmark.attacks import apply_attack

    i, r, spec = job
    return dict(r, code=apply_attack(r["code"], spec, r["language"], index=i))


def cmd_attack(args) -> int:
    from varmark.attacks import AttackSpec

    spec = AttackSpec(args.type, p=args.rename_frac, seed=args.seed, rate=args.rate)
    records, is_corpus = _read_inputs(args.input, args.language)
    out = _map(_attack_one, [(i, r, spec) for i, r in enumerate(records)], args.jobs)
    if is_corpus:
        tag = {"type": spec.type, "p": spec.p, "seed": spec.seed}
        _write(args.output, "".join(json.dumps(dict(o, attack=tag), sort_keys=True) + "\n" for o in out))
    else:
        _write(args.output, out[0]["code"])
    return 0


def cmd_eval(args) -> int:
    import torch

    from varmark.attacks import standard_attacks
    from varmark.corpus import read_jsonl
    from varmark.evalkit import TrigramModel, entropy_tokens, run_benchmark
    from varmark.lang.parser import parse_function

    torch.set_num_threads(1)  # timing is measured on a single worker
    bundle = _load_model(args.model)
    records = read_jsonl(args.corpus)
    if args.limit:
        records = records[: args.limit]
    fns = [parse_function(r["code"], r["language"], r["id"]) for r in records]
    lm = None
    if args.lm_corpus:
        lm_fns = [parse_function(r["code"], r["language"], r["id"]) for r in read_jsonl(args.lm_corpus)]
        lm = TrigramModel().fit(entropy_tokens(f) for f in lm_fns)
    attacks = standard_attacks(args.seed) if args.attacks == "all" else []
    report = run_benchmark(fns, bundle, attacks, seed=args.seed, lm=lm)
    _write(args.out, report.to_json())
    if args.csv:
        _write(args.csv, report.to_csv())
    if args.out not in (None, "-"):
        Path(str(args.out) + ".timing.json").write_text(json.dumps(report.timings(), sort_keys=True) + "\n")
    return 0


def _graphs_one(job):
    from varmark.graph import build_context_graph
    from varmark.lang.parser import parse_function
    from varmark.lang.scope import list_variables

    r, seed = job
    fn = parse_function(r["code"], r["language"], r["id"])
    out = []
    for b in list_variables(fn):
        obj = build_context_graph(fn, b).to_json()
        obj["seed"] = seed
        out.append(json.dumps(obj, sort_keys=True))
    return out


def cmd_graph(args) -> int:
    records, _ = _read_inputs(args.input, args.language)
    lines = _map(_graphs_one, [(r, args.seed) for r in records], args.jobs)
    _write(args.output, "".join(line + "\n" for group in lines for line in group))
    return 0


def cmd_synth(args) -> int:
    from varmark.corpus import synthesize

    recs = synthesize(args.n, seed=args.seed)
    _write(args.output, "".join(json.dumps(r, sort_keys=True) + "\n" for r in recs))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="single source of randomness")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes / threads")
    common.add_argument("--language", default="java")
    common.add_argument("--grammar-dir", help="directory with compiled tree-sitter grammars")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="varmark", description="Watermark source code through variable names.")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", parents=[common], help="train a model on a JSONL corpus")
    t.add_argument("--corpus", type=_existing, required=True)
    t.add_argument("--model", required=True, help="checkpoint path to write (.npz)")
    t.add_argument("--config", type=_existing, help="INI file with a [train] section")
    t.add_argument("--labels", type=_existing, help="exported soft labels (JSONL)")
    t.add_argument("--metrics", help="metrics CSV path (default: next to the model)")
    t.add_argument("--alpha", type=float)
    t.add_argument("--bits-per-var", type=int)
    t.add_argument("--epochs", type=int)
    t.add_argument("--lr", type=float)
    t.add_argument("--batch-size", type=int)
    t.add_argument("--valid-frac", type=float, default=0.1)
    t.add_argument("--test-frac", type=float, default=0.1)
    t.add_argument("--max-seconds", type=float, help="wall-clock budget for training")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("embed", parents=[common], help="embed a message")
    e.add_argument("--model", type=_existing, required=True)
    e.add_argument("--message", required=True, help="message as hex")
    e.add_argument("--bits", type=int, help="use only the first N bits of the hex message")
    e.add_argument("--input", type=_existing, required=True, help="source file or .jsonl corpus")
    e.add_argument("--output", help="watermarked output (default stdout)")
    e.add_argument("--report", help="EmbedReport JSON (carries the framing descriptor)")
    e.set_defaults(func=cmd_embed)

    x = sub.add_parser("extract", parents=[common], help="extract a message")
    x.add_argument("--model", type=_existing, required=True)
    x.add_argument("--input", type=_existing, required=True)
    x.add_argument("--framing", type=_existing, help="EmbedReport or framing JSON/JSONL")
    x.add_argument("--length", type=int, help="message length in bits (when no --framing)")
    x.add_argument("--bits-per-var", type=int)
    x.add_argument("--message", help="expected message (hex) to report BitAcc")
    x.add_argument("--bits", type=int)
    x.set_defaults(func=cmd_extract)

    a = sub.add_parser("attack", parents=[common], help="transform code for robustness tests")
    a.add_argument("--input", type=_existing, required=True)
    a.add_argument("--output")
    a.add_argument("--type", choices=["I", "II", "III"], required=True)
    a.add_argument("--rename-frac", type=float, default=1.0)
    a.add_argument("--rate", type=float, default=0.5, help="rewrite probability per site (Types I/II)")
    a.set_defaults(func=cmd_attack)

    v = sub.add_parser("eval", parents=[common], help="benchmark a model")
    v.add_argument("--model", type=_existing, required=True)
    v.add_argument("--corpus", type=_existing, required=True)
    v.add_argument("--out", help="BenchReport JSON (timings go to <out>.timing.json)")
    v.add_argument("--csv", help="table CSV")
    v.add_argument("--lm-corpus", type=_existing, help="non-watermarked corpus for the 3-gram model")
    v.add_argument("--attacks", choices=["all", "none"], default="all")
    v.add_argument("--limit", type=int)
    v.set_defaults(func=cmd_eval)

    g = sub.add_parser("graph", parents=[common], help="dump variable context graphs")
    g.add_argument("--input", type=_existing, required=True)
    g.add_argument("--output")
    g.set_defaults(func=cmd_graph)

    s = sub.add_parser("synth", parents=[common], help="write a synthetic Java corpus")
    s.add_argument("--n", type=int, default=2000)
    s.add_argument("--output")
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.grammar_dir:
        os.environ["VARMARK_GRAMMAR_DIR"] = args.grammar_dir
    try:
        return args.func(args)
    except argparse.ArgumentTypeError as e:
        parser.error(str(e))
    except VarmarkError as e:
        print(json.dumps({"error": e.code, "message": str(e)}), file=sys.stderr)
        return 1
    except (FileNotFoundError, ValueError) as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
