"""Command-line entry point: ``qesynth <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from qesynth import __version__
from qesynth.corpus import (
    BITEXT_FORMATS,
    DEFAULT_MARGIN_THRESHOLD,
    PROFILES,
    FormatError,
    corpus_stats,
    filter_with_summary,
    parse_bitext,
    read_dataset,
    read_tags_file,
    read_tokenized_lines,
    subsample,
    write_bitext,
    write_dataset,
)
from qesynth.records import SCORING_MODES

logger = logging.getLogger("qesynth")


class CommandError(Exception):
    """Fatal, user-facing error; reported on stderr with exit status 1."""


def _read_bitext(args, path):
    rejects = [] if args.skip_bad_records else None
    try:
        with open(path, encoding="utf-8") as f:
            pairs = parse_bitext(f, args.format, args.profile, args.source_profile, rejects)
    except FileNotFoundError:
        raise CommandError(f"no such file: {path}") from None
    except FormatError as exc:
        raise CommandError(f"{path}:{str(exc)}") from None
    for exc in rejects or ():
        logger.warning("%s: rejected %s", path, exc)
    return pairs, len(rejects or ())


def _read_floats(path) -> list[float]:
    out = []
    try:
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                try:
                    out.append(float(line))
                except ValueError:
                    raise CommandError(f"{path}:line {lineno}: not a number: {line.strip()!r}") from None
    except FileNotFoundError:
        raise CommandError(f"no such file: {path}") from None
    return out


def _read_prob_lines(path):
    from qesynth.ensemble import WordProbSequence

    seqs = []
    try:
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                try:
                    seqs.append(WordProbSequence.from_interleaved([float(x) for x in line.split()]))
                except ValueError as exc:
                    raise CommandError(f"{path}:line {lineno}: {exc}") from None
    except FileNotFoundError:
        raise CommandError(f"no such file: {path}") from None
    return seqs


def _fmt_prob(x: float) -> str:
    # shortest round-trip repr keeps w=1 output byte-identical to its input
    return repr(float(x))


# -- subcommands ------------------------------------------------------------------

def cmd_filter(args):
    pairs, rejected = _read_bitext(args, args.input)
    kept, summary = filter_with_summary(pairs, args.threshold)
    out = open(args.output, "w", encoding="utf-8", newline="\n") if args.output else sys.stdout
    try:
        write_bitext(kept, out)
    finally:
        if args.output:
            out.close()
    print(f"filter: {summary}", file=sys.stderr)
    return {"inputs": [args.input], "outputs": [args.output or "-"], "rejected": rejected}


def cmd_synth_nmt(args):
    from qesynth.synth import synth_from_hypotheses

    pairs, rejected = _read_bitext(args, args.bitext)
    try:
        hyps = read_tokenized_lines(args.hyps)
    except FileNotFoundError:
        raise CommandError(f"no such file: {args.hyps}") from None
    except FormatError as exc:
        raise CommandError(str(exc)) from None
    if len(hyps) != len(pairs):
        raise CommandError(
            f"line count mismatch: {args.bitext} has {len(pairs)} pairs, "
            f"{args.hyps} has {len(hyps)} hypotheses"
        )
    ds = synth_from_hypotheses(pairs, hyps, args.scoring, jobs=args.jobs, provenance=str(args.bitext))
    write_dataset(ds, args.output, args.split)
    return {"inputs": [args.bitext, args.hyps], "outputs": [args.output], "rejected": rejected}


def _make_infiller(args, pairs):
    from qesynth import infill

    if args.infiller == "identity":
        return infill.IdentityInfiller()
    if args.infiller == "unigram":
        if args.vocab:
            return infill.UnigramInfiller(infill.load_vocab_table(args.vocab), args.seed)
        return infill.UnigramInfiller.from_sentences((p.target for p in pairs), args.seed)
    cfg = infill.RemoteInfillConfig.from_env(
        args.endpoint,
        timeout=args.timeout,
        max_retries=args.max_retries,
        batch_size=args.batch_size,
    )
    return infill.RemoteInfiller(cfg)


def cmd_synth_mlm(args):
    from qesynth.infill import InfillError
    from qesynth.synth import CorruptionConfig, synth_by_rewriting

    pairs, rejected = _read_bitext(args, args.bitext)
    if not pairs:
        raise CommandError(f"{args.bitext}: no usable pairs")
    config = CorruptionConfig(args.p_sub, args.p_del, args.p_ins, args.span_mean, args.seed)
    try:
        ds = synth_by_rewriting(
            pairs,
            config,
            _make_infiller(args, pairs),
            args.scoring,
            on_error="skip" if args.skip_bad_records else "abort",
            jobs=args.jobs,
            provenance=str(args.bitext),
        )
    except InfillError as exc:
        raise CommandError(f"infiller failed: {exc}") from None
    write_dataset(ds, args.output, args.split)
    return {
        "inputs": [args.bitext],
        "outputs": [args.output],
        "rejected": rejected + len(ds.rejected),
    }


def cmd_stats(args):
    try:
        ds = read_dataset(args.dataset, args.split)
    except (FileNotFoundError, FormatError) as exc:
        raise CommandError(str(exc)) from None
    report = corpus_stats(ds)
    print(report.to_text(args.label or Path(args.dataset).name))
    if args.json:
        print(json.dumps(report.to_dict(), sort_keys=True))
    return {"inputs": [args.dataset], "outputs": [], "rejected": 0}


def cmd_subsample(args):
    try:
        ds = read_dataset(args.dataset, args.split)
    except (FileNotFoundError, FormatError) as exc:
        raise CommandError(str(exc)) from None
    try:
        out = subsample(ds, args.n, args.seed)
    except ValueError as exc:
        raise CommandError(str(exc)) from None
    write_dataset(out, args.output, args.split or _split_of(args.dataset))
    return {"inputs": [args.dataset], "outputs": [args.output], "rejected": 0}


def _split_of(directory) -> str:
    return sorted(p.stem for p in Path(directory).glob("*.src"))[0]


def cmd_score(args):
    from qesynth.metrics import UndefinedCorrelation, evaluate_sentence_level, evaluate_word_level

    if args.level == "word":
        try:
            pred, gold = read_tags_file(args.pred), read_tags_file(args.gold)
        except FileNotFoundError as exc:
            raise CommandError(f"no such file: {exc.filename}") from None
        except FormatError as exc:
            raise CommandError(str(exc)) from None
        try:
            report = evaluate_word_level(pred, gold)
        except ValueError as exc:
            raise CommandError(str(exc)) from None
    else:
        pred, gold = _read_floats(args.pred), _read_floats(args.gold)
        try:
            report = evaluate_sentence_level(pred, gold, strict=False)
        except ValueError as exc:
            raise CommandError(str(exc)) from None
        if report.pearson is None:
            logger.warning("Pearson undefined: zero-variance input")
    print(report.to_text())
    if args.json:
        with open(args.json, "w", encoding="utf-8") as f:
            f.write(report.to_json() + "\n")
    return {"inputs": [args.pred, args.gold], "outputs": [args.json] if args.json else [], "rejected": 0}


def cmd_ensemble(args):
    from qesynth.ensemble import EnsembleWeights, combine_sentence, combine_word, fit_weight

    if args.level == "word":
        a, b = _read_prob_lines(args.pred_a), _read_prob_lines(args.pred_b)
    else:
        a, b = _read_floats(args.pred_a), _read_floats(args.pred_b)
    if len(a) != len(b):
        raise CommandError(f"{args.pred_a} has {len(a)} lines, {args.pred_b} has {len(b)}")
    try:
        if args.fit:
            gold = read_tags_file(args.fit) if args.level == "word" else _read_floats(args.fit)
            weights = fit_weight(a, b, gold, "mcc" if args.level == "word" else "pearson", args.threshold)
            print(f"ensemble: fitted w={weights.w:.2f}", file=sys.stderr)
        else:
            weights = EnsembleWeights(args.weight, args.threshold)
        lines, tag_lines = [], []
        for i, (x, y) in enumerate(zip(a, b)):
            if args.level == "word":
                probs, tags = combine_word(x, y, weights)
                lines.append(" ".join(_fmt_prob(v) for v in probs.interleaved()))
                tag_lines.append(" ".join(tags.interleaved()))
            else:
                lines.append(_fmt_prob(combine_sentence(x, y, weights, clamp=not args.no_clamp)))
    except (ValueError, FormatError) as exc:
        raise CommandError(str(exc)) from None
    with open(args.output, "w", encoding="utf-8", newline="\n") as f:
        f.writelines(line + "\n" for line in lines)
    outputs = [args.output]
    if args.tags_out and args.level == "word":
        with open(args.tags_out, "w", encoding="utf-8", newline="\n") as f:
            f.writelines(line + "\n" for line in tag_lines)
        outputs.append(args.tags_out)
    return {"inputs": [args.pred_a, args.pred_b], "outputs": outputs, "rejected": 0, "weight": weights.w}


def cmd_replay(args):
    with open(args.manifest_file, encoding="utf-8") as f:
        manifest = json.load(f)
    return main(manifest["argv"])


# -- parser -------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="single source of randomness (default 0)")
    p.add_argument("--jobs", type=int, default=1, help="record-parallel workers")
    p.add_argument("--format", choices=BITEXT_FORMATS, default="tsv", help="bitext input format")
    p.add_argument("--manifest", help="write the run manifest here")
    p.add_argument("--skip-bad-records", action="store_true", help="drop and summarize malformed records")
    p.add_argument("--profile", choices=PROFILES, default="pretokenized", help="target tokenizer profile")
    p.add_argument("--source-profile", choices=PROFILES, help="source tokenizer profile (default: --profile)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="qesynth", description="Synthesize and evaluate MT quality-estimation data."
    )
    parser.add_argument("--version", action="version", version=f"qesynth {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filter", parents=[common], help="keep bitext pairs above a margin score")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="output TSV (default stdout)")
    p.add_argument("--threshold", type=float, default=DEFAULT_MARGIN_THRESHOLD)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("synth-nmt", parents=[common], help="label MT hypotheses against mined targets")
    p.add_argument("bitext")
    p.add_argument("hyps")
    p.add_argument("-o", "--output", required=True, help="output dataset directory")
    p.add_argument("--scoring", choices=SCORING_MODES, default="hter")
    p.add_argument("--split", default="train")
    p.set_defaults(func=cmd_synth_nmt)

    p = sub.add_parser("synth-mlm", parents=[common], help="rewrite targets by corruption and infilling")
    p.add_argument("bitext")
    p.add_argument("-o", "--output", required=True, help="output dataset directory")
    p.add_argument("--p-sub", type=float, default=0.15)
    p.add_argument("--p-del", type=float, default=0.05)
    p.add_argument("--p-ins", type=float, default=0.05)
    p.add_argument("--span-mean", type=float, default=1.0)
    p.add_argument("--infiller", choices=("unigram", "identity", "remote"), default="unigram")
    p.add_argument("--vocab", help="token<TAB>weight table for the unigram infiller")
    p.add_argument("--endpoint", help="fill-mask service URL (env QESYNTH_INFILL_ENDPOINT wins)")
    p.add_argument("--timeout", type=float, default=10.0)
    p.add_argument("--max-retries", type=int, default=3)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--scoring", choices=SCORING_MODES, default="hter")
    p.add_argument("--split", default="train")
    p.set_defaults(func=cmd_synth_mlm)

    p = sub.add_parser("stats", parents=[common], help="size and BAD-tag percentages of a dataset")
    p.add_argument("dataset")
    p.add_argument("--split")
    p.add_argument("--label")
    p.add_argument("--json", action="store_true", help="also print the report as JSON")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("subsample", parents=[common], help="draw n records without replacement")
    p.add_argument("dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--split")
    p.set_defaults(func=cmd_subsample)

    p = sub.add_parser("score", parents=[common], help="evaluate predictions against gold")
    p.add_argument("pred")
    p.add_argument("gold")
    p.add_argument("--level", choices=("word", "sentence"), default="word")
    p.add_argument("--json", help="write the report as JSON to this path")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("ensemble", parents=[common], help="linearly combine two prediction streams")
    p.add_argument("pred_a")
    p.add_argument("pred_b")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--level", choices=("word", "sentence"), default="word")
    p.add_argument("--weight", type=float, default=0.5, help="weight on pred_a")
    p.add_argument("--threshold", type=float, default=0.5, help="BAD if p >= threshold")
    p.add_argument("--fit", metavar="GOLD", help="grid-fit the weight against gold first")
    p.add_argument("--tags-out", help="also write thresholded tags (word level)")
    p.add_argument("--no-clamp", action="store_true", help="do not clamp sentence scores to [0, 1]")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest_file")
    p.set_defaults(func=cmd_replay)
    return parser


def _manifest_path(args):
    if getattr(args, "manifest", None):
        return Path(args.manifest)
    out = getattr(args, "output", None)
    if args.command in ("synth-nmt", "synth-mlm", "subsample") and out:
        return Path(out) / "manifest.json"
    return None


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(name)s: %(levelname)s: %(message)s",
    )
    if args.command == "replay":
        return args.func(args)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    start = time.perf_counter()
    try:
        info = args.func(args)
    except CommandError as exc:
        print(f"qesynth {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"qesynth {args.command}: error: {exc}", file=sys.stderr)
        return 1
    rejected = info.get("rejected", 0)
    if rejected:
        print(f"qesynth {args.command}: {rejected} record(s) rejected", file=sys.stderr)

    path = _manifest_path(args)
    if path is not None:
        config = {k: v for k, v in vars(args).items() if k != "func"}
        manifest = {
            "subcommand": args.command,
            "argv": argv,
            "config": config,
            "seed": args.seed,
            "inputs": [str(x) for x in info.get("inputs", [])],
            "outputs": [str(x) for x in info.get("outputs", [])],
            "version": __version__,
            "duration_s": round(time.perf_counter() - start, 6),
        }
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    # rejects only reach here under --skip-bad-records; any other reject raised already
    return 0


if __name__ == "__main__":
    sys.exit(main())
