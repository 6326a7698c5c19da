#!/usr/bin/env python3
"""Write a synthetic corpus bundle + annotations for trying out the CLI.

Usage: python scripts/make_synthetic_corpus.py OUTDIR [--docs N] [--seed S]
"""
import argparse
from pathlib import Path

from bioprecedence.ingest import corpus_to_json, export_annotations
from bioprecedence.synth import synthetic_labeled_corpus


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("outdir")
    parser.add_argument("--docs", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    corpus, pairs = synthetic_labeled_corpus(n_docs=args.docs, seed=args.seed)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "corpus.json").write_text(corpus_to_json(corpus))
    (out / "annotations.json").write_text(export_annotations(pairs))
    print(f"{len(corpus.documents)} documents, {len(pairs)} annotated pairs -> {out}")


if __name__ == "__main__":
    main()
