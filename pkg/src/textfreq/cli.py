"""Command-line interface.

Every subcommand echoes its effective configuration as one JSON line on
stderr before doing work, writes file outputs atomically, and is
deterministic given identical inputs (the mock provider included).  Exit
codes: 0 success, 1 operational failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from textfreq import corpus, distill, freq, policy, provider as providers, tfpd, theory
from textfreq.ioutil import atomic_write_text

logger = logging.getLogger(__name__)


class CliError(Exception):
    """Operational failure with a user-facing message."""


def _echo_config(args: argparse.Namespace) -> None:
    config = {
        key: value
        for key, value in sorted(vars(args).items())
        if key != "func" and value is not None
    }
    print(f"config {json.dumps(config, ensure_ascii=False, sort_keys=True)}", file=sys.stderr)


def _tokenizer_config(args: argparse.Namespace) -> corpus.TokenizerConfig:
    return corpus.TokenizerConfig(lowercase=not getattr(args, "no_lowercase", False))


def _smoothing(args: argparse.Namespace) -> freq.SmoothingPolicy:
    return freq.SmoothingPolicy(floor=args.floor)


def _load_table(path: str) -> corpus.FrequencyTable:
    try:
        return corpus.load_table(path)
    except FileNotFoundError:
        raise CliError(f"table not found: {path}") from None
    except corpus.TableFormatError as exc:
        raise CliError(str(exc)) from exc


def _write_lines(destination: str | None, lines: list[str]) -> None:
    body = "".join(line + "\n" for line in lines)
    if destination is None or destination == "-":
        sys.stdout.write(body)
    else:
        atomic_write_text(destination, body)


def _read_jsonl(path: str) -> list[dict]:
    records = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except ValueError as exc:
                    raise CliError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
                if not isinstance(record, dict):
                    raise CliError(f"{path}:{lineno}: record must be an object")
                records.append(record)
    except FileNotFoundError:
        raise CliError(f"input not found: {path}") from None
    return records


def _make_provider(args: argparse.Namespace) -> providers.Provider:
    if args.provider == "mock":
        if not args.fixtures:
            raise CliError("--fixtures is required with --provider mock")
        try:
            return providers.MockProvider.load(args.fixtures)
        except (FileNotFoundError, ValueError) as exc:
            raise CliError(f"cannot load fixtures: {exc}") from exc
    if not args.base_url or not args.model:
        raise CliError("--base-url and --model are required with --provider http")
    return providers.HttpProvider(base_url=args.base_url, model=args.model)


def _add_provider_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--provider", choices=("mock", "http"), default="mock")
    parser.add_argument("--fixtures", help="fixture file for the mock provider")
    parser.add_argument("--base-url", help="endpoint base URL for the http provider")
    parser.add_argument("--model", help="model name for the http provider")
    parser.add_argument("--parallelism", type=int, default=1)


# -- table commands -------------------------------------------------------


def cmd_build_table(args: argparse.Namespace) -> int:
    texts: list[str] = []
    for path in args.input:
        texts.extend(corpus.iter_text_records(path))
    table = corpus.build_table(
        texts, config=_tokenizer_config(args), label=args.label, workers=args.workers
    )
    corpus.save_table(table, args.output)
    print(f"built {args.output}: {len(table)} tokens, total {table.total}")
    return 0


def cmd_import_zipf(args: argparse.Namespace) -> int:
    try:
        table = corpus.import_zipf_list(
            args.input, virtual_total=args.virtual_total, label=args.label
        )
    except FileNotFoundError:
        raise CliError(f"input not found: {args.input}") from None
    except corpus.TableFormatError as exc:
        raise CliError(str(exc)) from exc
    corpus.save_table(table, args.output)
    print(f"imported {args.output}: {len(table)} tokens")
    return 0


# -- scoring commands -----------------------------------------------------


def _input_texts(args: argparse.Namespace) -> list[str]:
    texts = list(args.text or [])
    if args.input:
        texts.extend(corpus.iter_text_records(args.input))
    if not texts:
        raise CliError("nothing to score: pass --text or --input")
    return texts


def _score_lines(texts: list[str], score_one) -> list[str]:
    lines = []
    for text in texts:
        try:
            score = score_one(text)
        except freq.EmptySentenceError as exc:
            raise CliError(str(exc)) from exc
        lines.append(
            json.dumps(
                {
                    "text": score.text,
                    "token_count": score.token_count,
                    "log_sfreq": score.log_sfreq,
                    "zipf_sfreq": score.zipf_sfreq,
                },
                ensure_ascii=False,
            )
        )
    return lines


def cmd_score(args: argparse.Namespace) -> int:
    table = _load_table(args.table)
    smoothing = _smoothing(args)
    config = _tokenizer_config(args)
    if table.total == 0:
        raise CliError(f"table {args.table} is empty")
    lines = _score_lines(
        _input_texts(args),
        lambda text: freq.sentence_frequency(text, table, smoothing, config),
    )
    _write_lines(args.output, lines)
    return 0


def cmd_combine_score(args: argparse.Namespace) -> int:
    combined = distill.CombinedTable(
        base=_load_table(args.base),
        distilled=_load_table(args.distilled),
        config=distill.CombineConfig(alpha=args.alpha, beta=args.beta, zeta=args.zeta),
    )
    smoothing = _smoothing(args)
    config = _tokenizer_config(args)
    lines = _score_lines(
        _input_texts(args),
        lambda text: distill.combined_sentence_frequency(text, combined, smoothing, config),
    )
    _write_lines(args.output, lines)
    return 0


def _candidate_sets(path: str) -> list[policy.ParaphraseSet]:
    sets = []
    for record in _read_jsonl(path):
        try:
            sets.append(
                policy.ParaphraseSet(
                    id=str(record["id"]), candidates=tuple(record["candidates"])
                )
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise CliError(f"bad candidate record {record!r}: {exc}") from exc
    return sets


def cmd_select(args: argparse.Namespace) -> int:
    table = _load_table(args.table)
    smoothing = _smoothing(args)
    config = _tokenizer_config(args)

    def scorer(text: str) -> freq.SentenceScore:
        return freq.sentence_frequency(text, table, smoothing, config)

    lines = []
    for pset in _candidate_sets(args.input):
        try:
            index, score = policy.select_max(pset, scorer)
        except policy.ScoringError as exc:
            raise CliError(str(exc)) from exc
        lines.append(
            json.dumps(
                {
                    "id": pset.id,
                    "index": index,
                    "text": pset.candidates[index],
                    "zipf_sfreq": score.zipf_sfreq,
                },
                ensure_ascii=False,
            )
        )
    _write_lines(args.output, lines)
    return 0


def cmd_extremes(args: argparse.Namespace) -> int:
    table = _load_table(args.table)
    smoothing = _smoothing(args)
    config = _tokenizer_config(args)

    def scorer(text: str) -> freq.SentenceScore:
        return freq.sentence_frequency(text, table, smoothing, config)

    lines = []
    for pset in _candidate_sets(args.input):
        try:
            low, high = policy.select_extremes(pset, scorer)
        except (policy.ScoringError, ValueError) as exc:
            raise CliError(str(exc)) from exc
        lines.append(
            json.dumps(
                {
                    "id": pset.id,
                    "low_index": low,
                    "high_index": high,
                    "low_text": pset.candidates[low],
                    "high_text": pset.candidates[high],
                },
                ensure_ascii=False,
            )
        )
    _write_lines(args.output, lines)
    return 0


def cmd_sort(args: argparse.Namespace) -> int:
    records = _read_jsonl(args.input)
    mode = policy.OrderingMode(args.mode)
    instances = []
    keys: dict[str, float] = {}
    for record in records:
        try:
            inst_id = str(record["id"])
        except KeyError:
            raise CliError(f"record without id: {record!r}") from None
        if mode is policy.OrderingMode.EXTERNAL_KEY:
            if args.key_field not in record:
                raise CliError(f"record {inst_id!r} lacks key field {args.key_field!r}")
            keys[inst_id] = float(record[args.key_field])
            instances.append(policy.TrainingInstance(id=inst_id, input_text=""))
        else:
            text = record.get("text")
            if not isinstance(text, str) or not text:
                raise CliError(f"record {inst_id!r} lacks text")
            instances.append(policy.TrainingInstance(id=inst_id, input_text=text))
    if mode is not policy.OrderingMode.EXTERNAL_KEY:
        table = _load_table(args.table) if args.table else None
        if table is None:
            raise CliError("--table is required for frequency ordering")
        smoothing = _smoothing(args)
        config = _tokenizer_config(args)
        for inst in instances:
            try:
                keys[inst.id] = freq.sentence_frequency(
                    inst.input_text, table, smoothing, config
                ).log_sfreq
            except freq.EmptySentenceError as exc:
                raise CliError(f"instance {inst.id!r}: {exc}") from exc
    try:
        if mode is policy.OrderingMode.EXTERNAL_KEY:
            ordered = policy.order_curriculum(instances, mode=mode, external_keys=keys)
        else:
            ordered = policy.order_curriculum(instances, scores=keys, mode=mode)
    except (policy.MissingScoreError, ValueError) as exc:
        raise CliError(str(exc)) from exc
    _write_lines(args.output, ordered)
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    table = _load_table(args.table)
    smoothing = _smoothing(args)
    config = _tokenizer_config(args)
    try:
        edges = [float(part) for part in args.edges.split(",")]
    except ValueError:
        raise CliError(f"bad --edges {args.edges!r}") from None
    scores = []
    for text in _input_texts(args):
        try:
            scores.append(freq.sentence_frequency(text, table, smoothing, config))
        except freq.EmptySentenceError as exc:
            raise CliError(str(exc)) from exc
    try:
        hist = freq.bin_histogram(scores, edges)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    payload = {
        "edges": list(hist.edges),
        "counts": list(hist.counts),
        "below": hist.below,
        "above": hist.above,
        "observations": hist.observations,
    }
    _write_lines(args.output, [json.dumps(payload)])
    return 0


def cmd_distill(args: argparse.Namespace) -> int:
    texts = _input_texts(args)
    prov = _make_provider(args)
    try:
        result = distill.distill_corpus(
            texts,
            prov,
            completions_per_text=args.completions_per_text,
            parallelism=args.parallelism,
            label=args.label,
            config=_tokenizer_config(args),
            max_output_tokens=args.max_output_tokens,
            temperature=args.temperature,
        )
    except distill.EmptyDistillationError as exc:
        raise CliError(str(exc)) from exc
    corpus.save_table(result.table, args.output)
    print(
        f"distilled {args.output}: {len(result.table)} tokens from "
        f"{result.completions} completions ({result.skipped} skipped)"
    )
    return 0


# -- pipeline commands ----------------------------------------------------


def cmd_pipeline_ingest(args: argparse.Namespace) -> int:
    table = _load_table(args.table)
    smoothing = _smoothing(args)
    config = _tokenizer_config(args)
    prov = _make_provider(args)

    def scorer(text: str) -> freq.SentenceScore:
        return freq.sentence_frequency(text, table, smoothing, config)

    records = _read_jsonl(args.source)
    annotators = args.annotators.split(",") if args.annotators else None
    generated = rejected = 0
    with tfpd.AnnotationPipeline(args.journal, annotators=annotators) as pipeline:
        for job in tfpd.ingest_dataset(pipeline, records, prov, scorer):
            if job.status is tfpd.JobStatus.REJECTED:
                rejected += 1
            else:
                generated += 1
    print(f"ingested {generated + rejected} sources: {generated} generated, {rejected} rejected")
    return 0


def cmd_pipeline_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from textfreq.server import create_app

    annotators = args.annotators.split(",") if args.annotators else None
    pipeline = tfpd.AnnotationPipeline(args.journal, annotators=annotators)
    app = create_app(pipeline, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_pipeline_export(args: argparse.Namespace) -> int:
    with tfpd.AnnotationPipeline(args.journal) as pipeline:
        stats = tfpd.export_accepted(pipeline, args.output)
    print(
        json.dumps(
            {
                "records": stats.records,
                "low": vars(stats.low),
                "high": vars(stats.high),
            }
        )
    )
    return 0


def cmd_pipeline_progress(args: argparse.Namespace) -> int:
    with tfpd.AnnotationPipeline(args.journal) as pipeline:
        print(json.dumps(pipeline.progress(), ensure_ascii=False))
    return 0


def cmd_verify_theory(args: argparse.Namespace) -> int:
    try:
        s_values = [float(part) for part in args.s.split(",")]
    except ValueError:
        raise CliError(f"bad --s {args.s!r}") from None
    records = theory.run_verification(
        s_values=s_values,
        vocab_size=args.vocab,
        epsilon=args.epsilon,
        lam=args.lam,
        models=args.models,
        sentences=args.sentences,
        pairs=args.pairs,
        seed=args.seed,
    )
    if args.out:
        atomic_write_text(args.out, "".join(json.dumps(r) + "\n" for r in records))
    failed = 0
    for record in records:
        status = "ok" if record["ok"] else "FAIL"
        failed += 0 if record["ok"] else 1
        summary = " ".join(
            f"{key}={value}" for key, value in record.items() if key not in ("check", "ok")
        )
        print(f"{status} {record['check']} {summary}")
    if failed:
        raise CliError(f"{failed} verification checks failed")
    return 0


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="textfreq", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, **kwargs) -> argparse.ArgumentParser:
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(func=func)
        return p

    p = add("build-table", cmd_build_table, help="count a text corpus into a table")
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--label", default="corpus")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-lowercase", action="store_true")

    p = add("import-zipf", cmd_import_zipf, help="import a token<TAB>zipf word list")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--virtual-total", type=float, default=1e9)
    p.add_argument("--label")

    def scoring_args(p: argparse.ArgumentParser, table_required: bool = True) -> None:
        if table_required:
            p.add_argument("--table", required=True)
        p.add_argument("--floor", type=float, default=1e-9)
        p.add_argument("--no-lowercase", action="store_true")
        p.add_argument("--output")

    p = add("score", cmd_score, help="sentence frequency of texts")
    scoring_args(p)
    p.add_argument("--text", action="append")
    p.add_argument("--input")

    p = add("select", cmd_select, help="most frequent candidate per paraphrase set")
    scoring_args(p)
    p.add_argument("--input", required=True)

    p = add("extremes", cmd_extremes, help="least and most frequent candidate per set")
    scoring_args(p)
    p.add_argument("--input", required=True)

    p = add("sort", cmd_sort, help="curriculum-order instances by frequency")
    p.add_argument("--input", required=True)
    p.add_argument("--table")
    p.add_argument("--mode", choices=[m.value for m in policy.OrderingMode], default="ascending")
    p.add_argument("--key-field", default="key")
    p.add_argument("--floor", type=float, default=1e-9)
    p.add_argument("--no-lowercase", action="store_true")
    p.add_argument("--output")

    p = add("stats", cmd_stats, help="histogram of sentence scores on the Zipf scale")
    scoring_args(p)
    p.add_argument("--text", action="append")
    p.add_argument("--input")
    p.add_argument("--edges", default="0,1.5,3,4.5,6,7.5,9")

    p = add("distill", cmd_distill, help="build a table from story completions")
    p.add_argument("--input")
    p.add_argument("--text", action="append")
    p.add_argument("--output", required=True)
    p.add_argument("--label", default="distilled")
    p.add_argument("--completions-per-text", type=int, default=1)
    p.add_argument("--max-output-tokens", type=int, default=256)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--no-lowercase", action="store_true")
    _add_provider_args(p)

    p = add("combine-score", cmd_combine_score, help="sentence frequency under combined tables")
    p.add_argument("--base", required=True)
    p.add_argument("--distilled", required=True)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--zeta", type=float, default=1.0)
    p.add_argument("--floor", type=float, default=1e-9)
    p.add_argument("--no-lowercase", action="store_true")
    p.add_argument("--output")
    p.add_argument("--text", action="append")
    p.add_argument("--input")

    pipeline = sub.add_parser("pipeline", help="paired-paraphrase dataset pipeline")
    psub = pipeline.add_subparsers(dest="pipeline_command", required=True)

    def padd(name: str, func, **kwargs) -> argparse.ArgumentParser:
        p = psub.add_parser(name, **kwargs)
        p.set_defaults(func=func)
        return p

    p = padd("ingest", cmd_pipeline_ingest, help="generate jobs from a source dataset")
    p.add_argument("--journal", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--table", required=True)
    p.add_argument("--annotators", help="comma-separated annotator ids")
    p.add_argument("--floor", type=float, default=1e-9)
    p.add_argument("--no-lowercase", action="store_true")
    _add_provider_args(p)

    p = padd("serve", cmd_pipeline_serve, help="serve the annotation API")
    p.add_argument("--journal", required=True)
    p.add_argument("--annotators")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static", help="directory of UI files to serve at /")

    p = padd("export", cmd_pipeline_export, help="export accepted pairs as NDJSON")
    p.add_argument("--journal", required=True)
    p.add_argument("--output", required=True)

    p = padd("progress", cmd_pipeline_progress, help="print pipeline progress")
    p.add_argument("--journal", required=True)

    p = add("verify-theory", cmd_verify_theory, help="run the numerical verification suite")
    p.add_argument("--s", default="0.8,1.0,1.2")
    p.add_argument("--vocab", type=int, default=500)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--lam", type=float, default=0.3)
    p.add_argument("--models", type=int, default=50)
    p.add_argument("--sentences", type=int, default=100)
    p.add_argument("--pairs", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    _echo_config(args)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (tfpd.JournalError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
