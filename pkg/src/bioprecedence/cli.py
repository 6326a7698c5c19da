"""Command-line entry point: `bioprec <subcommand>`.

Exit codes: 0 success, 1 validation/usage error, 2 I/O error. Commands that
write an output directory drop exactly one manifest.json there recording
the command line, config, input digests, seed, and tool version, so any
run can be replayed.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from bioprecedence import __version__
from bioprecedence.candidates import (
    CandidateConfig,
    generate_candidates,
    pairs_to_candidate_json,
)
from bioprecedence.corpus import CoarseLabel, CorpusError, cohens_kappa, reduce_label, RelationLabel
from bioprecedence.evaluation import (
    EvalOptions,
    MODEL_SPECS,
    bootstrap_compare,
    distribution_csv,
    distribution_report,
    micro_prf,
    overlap_report,
    run_cv,
    train_predictor,
)
from bioprecedence.ingest import (
    Corpus,
    UNLABELED,
    corpus_from_json,
    corpus_to_json,
    load_annotations,
    load_event_mentions,
    parse_documents,
    usable_pairs,
)
from bioprecedence.pipeline import (
    SievePlan,
    combine_precomputed,
    consensus_plan,
    predictor_from_json,
    predictor_to_json,
)


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; the contract here is exit 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(message)


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_dir: Path, args: argparse.Namespace, inputs: list[str]):
    config = {
        k: v for k, v in vars(args).items()
        if k not in ("func", "argv")
        and isinstance(v, (str, int, float, bool, list, type(None)))
    }
    manifest = {
        "command": getattr(args, "argv", sys.argv[1:]),
        "config": config,
        "input_digests": {path: _digest(path) for path in sorted(set(inputs))},
        "seed": getattr(args, "seed", None),
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True)
    )


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_corpus(path: str) -> Corpus:
    return corpus_from_json(Path(path).read_text())


def _load_pairs(corpus: Corpus, path: str, include_unlabeled: bool = False):
    return load_annotations(Path(path).read_text(), corpus.mentions,
                            include_unlabeled=include_unlabeled)


def _eval_options(args) -> EvalOptions:
    return EvalOptions(
        linear_epochs=args.linear_epochs,
        class_weighting=args.class_weights,
        forest_trees=args.trees,
        forest_depth=args.depth,
        net_epochs=args.epochs,
        net_batch=args.batch,
        net_hidden=args.hidden,
        net_embedding_dim=args.embedding_dim,
        net_dropout=args.dropout,
        net_patience=args.patience,
        order_mode=args.order_mode,
        embeddings_path=args.embeddings,
    )


def _add_model_options(parser):
    parser.add_argument("--epochs", type=int, default=100,
                        help="max epochs for the recurrent models")
    parser.add_argument("--batch", type=int, default=32)
    parser.add_argument("--hidden", type=int, default=64)
    parser.add_argument("--embedding-dim", type=int, default=200)
    parser.add_argument("--dropout", type=float, default=0.5)
    parser.add_argument("--patience", type=int, default=10)
    parser.add_argument("--linear-epochs", type=int, default=50)
    parser.add_argument("--class-weights", action="store_true",
                        help="inverse-frequency class weights for linear models")
    parser.add_argument("--trees", type=int, default=100)
    parser.add_argument("--depth", type=int, default=8)
    parser.add_argument("--order-mode", choices=["nested", "fixed"],
                        default="nested")
    parser.add_argument("--embeddings", default=None,
                        help="word2vec text file for the +P model variants")


# ---------------------------------------------------------------------------
# subcommands


def cmd_ingest(args) -> int:
    corpus = Corpus()
    for path in args.conllu:
        for doc in parse_documents(Path(path).read_text()):
            if doc.id in corpus.documents:
                raise CorpusError(f"duplicate document id {doc.id!r}")
            corpus.documents[doc.id] = doc
    if args.mentions:
        for m in load_event_mentions(Path(args.mentions).read_text(),
                                     corpus.documents):
            if m.id in corpus.mentions:
                raise CorpusError(f"duplicate mention id {m.id!r}")
            corpus.mentions[m.id] = m
    out = _out_dir(args)
    (out / "corpus.json").write_text(corpus_to_json(corpus))
    _write_manifest(out, args, args.conllu + ([args.mentions] if args.mentions else []))
    print(f"ingested {len(corpus.documents)} documents, "
          f"{len(corpus.mentions)} mentions -> {out / 'corpus.json'}")
    return 0


def cmd_candidates(args) -> int:
    corpus = _load_corpus(args.corpus)
    config = CandidateConfig(
        max_sentence_distance=args.max_sentence_distance,
        require_shared_participant=not args.no_shared_participant,
        forbid_same_type=not args.allow_same_type,
        forbid_nested_regulation=not args.allow_nested_regulation,
    )
    pairs = []
    for doc_id in sorted(corpus.documents):
        pairs.extend(generate_candidates(
            corpus.documents[doc_id], corpus.mentions_in(doc_id), config
        ))
    out = _out_dir(args)
    (out / "candidates.json").write_text(pairs_to_candidate_json(pairs))
    _write_manifest(out, args, [args.corpus])
    print(f"{len(pairs)} candidate pairs -> {out / 'candidates.json'}")
    return 0


def _kappa_labels(path_a: str, path_b: str, coarse: bool):
    def read(path):
        items = json.loads(Path(path).read_text())
        labels = {}
        for item in items:
            text = item["label"]
            if text == UNLABELED:
                continue
            labels[item["pair_id"]] = RelationLabel.from_text(text)
        return labels

    a, b = read(path_a), read(path_b)
    shared = sorted(set(a) & set(b))
    if not shared:
        raise CorpusError("the two annotation files share no labeled pair ids")
    seq_a = [a[pid] for pid in shared]
    seq_b = [b[pid] for pid in shared]
    if coarse:
        seq_a = [reduce_label(lab) for lab in seq_a]
        seq_b = [reduce_label(lab) for lab in seq_b]
    return seq_a, seq_b


def cmd_kappa(args) -> int:
    seq_a, seq_b = _kappa_labels(args.file_a, args.file_b, args.coarse)
    kappa = cohens_kappa(seq_a, seq_b)
    if args.json:
        print(json.dumps({"kappa": kappa, "n": len(seq_a),
                          "protocol": "coarse" if args.coarse else "fine"}))
    else:
        print(f"{kappa:.4f}")
    return 0


def cmd_train(args) -> int:
    corpus = _load_corpus(args.corpus)
    pairs = usable_pairs(_load_pairs(corpus, args.annotations))
    predictor = train_predictor(args.model, pairs, corpus.documents,
                                _eval_options(args), seed=args.seed)
    out = _out_dir(args)
    (out / "model.json").write_text(predictor_to_json(predictor))
    _write_manifest(out, args, [args.corpus, args.annotations])
    print(f"trained {args.model} on {len(pairs)} pairs -> {out / 'model.json'}")
    return 0


def cmd_predict(args) -> int:
    corpus = _load_corpus(args.corpus)
    pairs = _load_pairs(corpus, args.pairs, include_unlabeled=True)
    predictor = predictor_from_json(Path(args.model).read_text())
    predictions = [
        {"pair_id": p.pair_id,
         "label": predictor.predict_pair(p, corpus.documents[p.doc_id]).value}
        for p in pairs
    ]
    out = _out_dir(args)
    (out / "predictions.json").write_text(json.dumps(predictions, indent=2))
    _write_manifest(out, args, [args.corpus, args.pairs, args.model])
    print(f"{len(predictions)} predictions -> {out / 'predictions.json'}")
    return 0


def _run_evaluation(args):
    corpus = _load_corpus(args.corpus)
    pairs = usable_pairs(_load_pairs(corpus, args.annotations))
    specs = [s.strip() for s in args.models.split(",") if s.strip()]
    unknown = [s for s in specs if s not in MODEL_SPECS]
    if unknown:
        raise CorpusError(f"unknown model specs: {unknown}; "
                          f"choose from {', '.join(MODEL_SPECS)}")
    jobs = args.jobs if args.jobs else (os.cpu_count() or 1)
    return run_cv(pairs, corpus.documents, specs, k=args.folds, seed=args.seed,
                  options=_eval_options(args), jobs=min(jobs, args.folds))


def cmd_evaluate(args) -> int:
    result = _run_evaluation(args)
    out = _out_dir(args)
    (out / "report.json").write_text(result.to_json())
    (out / "report.txt").write_text(result.to_text())
    _write_manifest(out, args, [args.corpus, args.annotations])
    print(json.dumps(json.loads(result.to_json())["models"], indent=2)
          if args.json else result.to_text(), end="")
    return 0


def cmd_sieve(args) -> int:
    result = _run_evaluation(args)
    plan = consensus_plan([SievePlan.from_json(json.dumps(p))
                           for p in result.plans], prior_order=result.specs)
    gold = [CoarseLabel(v) for v in result.gold]
    preds = {spec: [CoarseLabel(v) for v in result.predictions[spec]]
             for spec in result.specs}
    rows = []
    for cut in range(1, len(plan.entries) + 1):
        prefix = SievePlan(entries=plan.entries[:cut])
        combined = combine_precomputed(prefix, preds)
        p, r, f1 = micro_prf(combined, gold)
        rows.append({"sieves": cut, "added": plan.entries[cut - 1].model_id,
                     "precision": p, "recall": r, "f1": f1})
    best_single = max(result.specs, key=lambda s: result.models[s].f1)
    combined_all = combine_precomputed(plan, preds)
    p_value = bootstrap_compare(combined_all, preds[best_single], gold,
                                iterations=args.iterations, seed=args.seed)
    out = _out_dir(args)
    (out / "plan.json").write_text(plan.to_json())
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["sieves", "added", "precision",
                                             "recall", "f1"])
    writer.writeheader()
    writer.writerows(rows)
    (out / "curve.csv").write_text(buf.getvalue())
    (out / "significance.json").write_text(json.dumps({
        "combined_vs": best_single,
        "p_value": p_value,
        "iterations": args.iterations,
    }, indent=2, sort_keys=True))
    _write_manifest(out, args, [args.corpus, args.annotations])
    for row in rows:
        print(f"{row['sieves']:>2} +{row['added']:<14} p={row['precision']:.4f} "
              f"r={row['recall']:.4f} f1={row['f1']:.4f}")
    print(f"combined vs {best_single}: p = {p_value:.4f}")
    return 0


def cmd_overlap(args) -> int:
    report = json.loads(Path(args.report).read_text())
    universe = set(report["pair_ids"])
    models = ([m.strip() for m in args.models.split(",") if m.strip()]
              if args.models else sorted(report["models"]))
    tp_sets = {}
    for model in models:
        if model not in report["models"]:
            raise CorpusError(f"model {model!r} not in the report")
        tp_sets[model] = set(report["models"][model]["true_positive_ids"])
    overlap = overlap_report(tp_sets, universe=universe)
    out = _out_dir(args)
    (out / "overlap.json").write_text(overlap.to_json())
    (out / "overlap.csv").write_text(overlap.to_csv())
    _write_manifest(out, args, [args.report])
    print(overlap.to_json() if args.json else overlap.to_csv(), end="")
    return 0


def cmd_distributions(args) -> int:
    corpus = _load_corpus(args.corpus)
    pairs = usable_pairs(_load_pairs(corpus, args.annotations))
    rows = distribution_report(pairs)
    out = _out_dir(args)
    (out / "distributions.csv").write_text(distribution_csv(rows))
    (out / "distributions.json").write_text(json.dumps(rows, indent=2,
                                                       sort_keys=True))
    _write_manifest(out, args, [args.corpus, args.annotations])
    print(json.dumps(rows, indent=2, sort_keys=True) if args.json
          else distribution_csv(rows), end="")
    return 0


# ---------------------------------------------------------------------------
# wiring


def build_parser() -> _Parser:
    parser = _Parser(prog="bioprec",
                     description="causal precedence pipeline for biomedical "
                                 "event pairs")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--jobs", type=int, default=0,
                        help="worker processes for fold evaluation "
                             "(0 = all cores)")
    parser.add_argument("--json", action="store_true",
                        help="machine-readable stdout")
    sub = parser.add_subparsers(dest="subcommand", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("ingest", help="parse documents and mentions into a bundle")
    p.add_argument("--conllu", nargs="+", required=True)
    p.add_argument("--mentions", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("candidates", help="generate unlabeled candidate pairs")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-sentence-distance", type=int, default=1)
    p.add_argument("--no-shared-participant", action="store_true")
    p.add_argument("--allow-same-type", action="store_true")
    p.add_argument("--allow-nested-regulation", action="store_true")
    p.set_defaults(func=cmd_candidates)

    p = sub.add_parser("kappa", help="inter-annotator agreement between two files")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--coarse", action="store_true",
                   help="reduce to the three-way labels first")
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("train", help="train one model on annotated pairs")
    p.add_argument("--corpus", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--model", required=True, choices=MODEL_SPECS)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_model_options(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="apply a trained model to pairs")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    for name, help_text in (("evaluate", "cross-validated evaluation"),
                            ("sieve", "sieve plan, curve data, significance")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--corpus", required=True)
        p.add_argument("--annotations", required=True)
        p.add_argument("--models",
                       default="intra,inter,reichenbach,lr_l1,lr_l2,svm_l1,"
                               "svm_l2,forest")
        p.add_argument("--folds", type=int, default=10)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True)
        _add_model_options(p)
        if name == "sieve":
            p.add_argument("--iterations", type=int, default=10000,
                           help="bootstrap resamples")
            p.set_defaults(func=cmd_sieve)
        else:
            p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("overlap", help="true-positive overlap between models")
    p.add_argument("--report", required=True,
                   help="report.json from an evaluate run")
    p.add_argument("--models", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_overlap)

    p = sub.add_parser("distributions", help="label distribution tables")
    p.add_argument("--corpus", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_distributions)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.argv = list(sys.argv[1:] if argv is None else argv)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (CorpusError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
