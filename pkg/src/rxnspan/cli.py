"""``rxnspan`` command line: ingest, stats, mask, train, predict, evaluate, synth.

Exit codes: 0 success, 1 data error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .chemmask import load_lexicon, mask_chems
from .config import RunConfig, load_config
from .corpus import MASK_MARKER, Corpus, assign_splits, load_corpus, write_document
from .decode import format_predictions, load_checkpoint, parse_predictions, predict_tags, save_checkpoint, train
from .encode import load_embedding_file
from .errors import ConfigError, InputError, RxnSpanError
from .evaluation import evaluate, report_table, report_to_kv
from .labeling import (
    GRANULARITIES,
    aggregate_noise,
    boundary_noise_report,
    corpus_stats,
    gold_unit_spans,
    parse_tag_lines,
    spans_to_tags,
    tags_to_spans,
    write_tag_file,
)
from .segment import PARAGRAPH_MODES
from .synth import SynthProfile, generate_corpus

log = logging.getLogger("rxnspan")


def _labels(arg):
    labels = [x.strip() for x in (arg or "").split(",") if x.strip()]
    return frozenset(labels) or None


def _require_dir(path, what="corpus directory"):
    path = Path(path)
    if not path.is_dir():
        raise InputError(f"{what} {path} does not exist")
    return path


# -- ingest / stats / mask ---------------------------------------------------

def cmd_ingest(args) -> int:
    corpus_dir = _require_dir(args.corpus_dir)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    errors: list = []
    corpus = load_corpus(corpus_dir, labels=_labels(args.labels), paragraph_mode=args.paragraph_mode,
                         errors=errors)
    seqs = []
    for doc in corpus.documents:
        try:
            seqs.append(spans_to_tags(doc, args.granularity))
        except RxnSpanError as exc:
            errors.append((corpus_dir / f"{doc.doc_id}.ann", exc))
    write_tag_file(seqs, out / "tags.tsv")

    stats = corpus_stats(corpus)
    lines = [f"files_loaded = {len(seqs)}", f"files_failed = {len(errors)}",
             f"granularity = {args.granularity}", f"units = {sum(len(s.tags) for s in seqs)}",
             f"reactions = {stats.reaction_count}"]
    lines += [f"error = {Path(path).name}: {exc}" for path, exc in errors]
    (out / "integrity.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("\n".join(lines))
    for path, exc in errors:
        print(f"error: {Path(path).name}: {exc}", file=sys.stderr)
    return 1 if errors else 0


def _stats_table(stats) -> str:
    rows = [
        ("files", stats.file_count),
        ("words", stats.word_count),
        ("paragraphs", stats.paragraph_count),
        ("avg tokens/paragraph", f"{stats.avg_tokens_per_paragraph:.2f}"),
        ("avg paragraphs/document", f"{stats.avg_paragraphs_per_document:.2f}"),
        ("reactions", stats.reaction_count),
    ]
    return "".join(f"{name:<26}{value:>12}\n" for name, value in rows)


def cmd_stats(args) -> int:
    corpus = load_corpus(_require_dir(args.corpus_dir), labels=_labels(args.labels),
                         paragraph_mode=args.paragraph_mode)
    text = _stats_table(corpus_stats(corpus))
    if args.noise:
        reports = [boundary_noise_report(d, args.granularity, args.threshold) for d in corpus.documents]
        total, over, share = aggregate_noise(reports)
        text += (f"{'reaction units':<26}{total:>12}\n"
                 f"{f'units > {args.threshold:g} non-reaction':<26}{over:>12}\n"
                 f"{'share':<26}{share:>12.4f}\n")
    print(text, end="")
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    return 0


def cmd_mask(args) -> int:
    corpus = load_corpus(_require_dir(args.corpus_dir), paragraph_mode=args.paragraph_mode)
    lexicon = load_lexicon(args.lexicon or None)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for doc in corpus.documents:
        masked = doc if doc.masked else mask_chems(doc, lexicon)
        write_document(masked, out)
    (out / MASK_MARKER).write_text("[CHEM]\n", encoding="utf-8")
    print(f"masked {len(corpus.documents)} documents into {out}")
    return 0


# -- train / predict ---------------------------------------------------------

def _overrides(pairs):
    out = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep:
            raise ConfigError(f"override {pair!r} must look like section.key=value")
        out[key.strip()] = value.strip()
    return out


def _load_store(path, expected_dim=None):
    return load_embedding_file(path, "contextual", expected_dim) if path else None


def _predict_corpus(model, corpus: Corpus, store=None):
    gran = model.granularity
    lines, tags = [], {}
    for doc in sorted(corpus.documents, key=lambda d: d.doc_id):
        t = predict_tags(model, doc, store)
        tags[doc.doc_id] = t
        lines.append(format_predictions(doc.doc_id, tags_to_spans(t, model.config.labeling.repair), gran))
    return "".join(lines), tags


def cmd_train(args) -> int:
    cfg = load_config(args.config, _overrides(args.set))
    if not cfg.paths.corpus_dir:
        raise ConfigError("paths.corpus_dir is required for training")
    out = Path(cfg.paths.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.resolved").write_text(cfg.to_text(), encoding="utf-8")

    corpus = load_corpus(_require_dir(cfg.paths.corpus_dir), labels=cfg.label_set,
                         paragraph_mode=cfg.segment.paragraph_mode)
    corpus = assign_splits(corpus, cfg.corpus.validation_fraction, cfg.seed)
    lexicon = load_lexicon(cfg.paths.lexicon or None, cfg.chemmask.patterns_version)
    pretrained = load_embedding_file(cfg.paths.word_embeddings, "word") if cfg.paths.word_embeddings else None
    store = _load_store(cfg.paths.contextual_embeddings)

    result = train(corpus, cfg, lexicon=lexicon, pretrained=pretrained, store=store)
    digest = save_checkpoint(result.model, out / "model.ckpt")
    with open(out / "train_log.tsv", "w", encoding="utf-8") as fh:
        fh.write("epoch\ttrain_loss\tvalidation_f1\n")
        for rec in result.history:
            f1 = "" if rec.validation_f1 is None else f"{rec.validation_f1:.6f}"
            fh.write(f"{rec.epoch}\t{rec.train_loss:.6f}\t{f1}\n")
    meta = result.model.metadata
    print(f"checkpoint {out / 'model.ckpt'} sha256 {digest}")
    print(f"epochs {meta['epochs']} best_epoch {meta['best_epoch']} "
          f"best_validation_f1 {meta['best_validation_f1']}")

    if cfg.paths.test_dir:
        test = load_corpus(_require_dir(cfg.paths.test_dir, "test directory"), labels=cfg.label_set,
                           paragraph_mode=cfg.segment.paragraph_mode)
        if cfg.chemmask.enabled:
            test = Corpus([d if d.masked else mask_chems(d, lexicon) for d in test.documents])
        text, _ = _predict_corpus(result.model, test, store)
        (out / "test_predictions.tsv").write_text(text, encoding="utf-8")
        gold = {d.doc_id: gold_unit_spans(d, cfg.labeling.granularity) for d in test.documents}
        pred, _ = parse_predictions(text)
        report = evaluate(gold, pred, cfg.eval.fuzzy_tolerance)
        (out / "test_report.kv").write_text(report_to_kv(report), encoding="utf-8")
        print(report_table(report), end="")
    return 0


def cmd_predict(args) -> int:
    model = load_checkpoint(args.checkpoint)
    corpus = load_corpus(_require_dir(args.corpus_dir), paragraph_mode=model.config.segment.paragraph_mode)
    store = _load_store(args.contextual_embeddings, model.context_dim or None)
    text, _ = _predict_corpus(model, corpus, store)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


# -- evaluate ----------------------------------------------------------------

def _read_spans(path, granularity, labels=None):
    """Spans (and tags, when available) from a corpus dir, tag file or predictions file."""
    path = Path(path)
    if path.is_dir():
        corpus = load_corpus(path, labels=labels)
        tags = {d.doc_id: list(spans_to_tags(d, granularity).tags) for d in corpus.documents}
        return {k: tags_to_spans(v) for k, v in tags.items()}, tags, granularity
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    first = next((line for line in text.splitlines() if line.strip()), "")
    if len(first.split("\t")) == 3:
        seqs = parse_tag_lines(text, source=path.name)
        grans = {s.granularity for s in seqs}
        if len(grans) > 1:
            raise InputError(f"{path.name}: mixed granularities {sorted(grans)}")
        tags = {s.doc_id: list(s.tags) for s in seqs}
        return {k: tags_to_spans(v) for k, v in tags.items()}, tags, (grans.pop() if grans else None)
    spans, gran = parse_predictions(text, source=path.name)
    return spans, None, gran


def cmd_evaluate(args) -> int:
    gold, gold_tags, g_gran = _read_spans(args.gold, args.granularity, _labels(args.labels))
    pred, pred_tags, p_gran = _read_spans(args.predictions, args.granularity)
    if g_gran and p_gran and g_gran != p_gran:
        raise InputError(f"granularity mismatch: gold {g_gran}, predictions {p_gran}")
    if gold_tags is not None and pred_tags is not None:
        missing = sorted(set(gold_tags) - set(pred_tags))
        if missing:
            raise InputError(f"no predicted tags for documents: {', '.join(missing)}")
    else:
        gold_tags = pred_tags = None
    report = evaluate(gold, pred, args.tolerance, gold_tags, pred_tags)
    table = report_table(report)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.kv").write_text(report_to_kv(report), encoding="utf-8")
        (out / "report.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    return 0


# -- synth -------------------------------------------------------------------

def cmd_synth(args) -> int:
    profile = SynthProfile(
        docs=args.docs,
        paragraphs_per_doc=args.paragraphs,
        reactions_per_doc=args.reactions,
        min_reaction_paragraphs=args.min_reaction_paragraphs,
        max_reaction_paragraphs=args.max_reaction_paragraphs,
        prefix=args.prefix,
    )
    try:
        manifest = generate_corpus(profile, args.seed, args.out_dir)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(f"wrote {len(manifest['documents'])} documents to {args.out_dir}")
    return 0


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rxnspan", description="Reaction span extraction from patent text.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--log-level", default="WARNING", help="logging level (default: WARNING)")
    sub = p.add_subparsers(dest="command", required=True)

    def corpus_opts(sp, granularity=True):
        sp.add_argument("--paragraph-mode", choices=PARAGRAPH_MODES, default="newline")
        sp.add_argument("--labels", default="", help="comma-separated annotation labels to keep")
        if granularity:
            sp.add_argument("--granularity", choices=GRANULARITIES, default="paragraph")

    sp = sub.add_parser("ingest", help="convert a BRAT corpus into IOB2 tag files")
    sp.add_argument("corpus_dir")
    sp.add_argument("--out", default="ingest", help="output directory (default: ingest)")
    corpus_opts(sp)
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("stats", help="corpus statistics table")
    sp.add_argument("corpus_dir")
    sp.add_argument("--noise", action="store_true", help="add the boundary-noise report")
    sp.add_argument("--threshold", type=float, default=0.4)
    sp.add_argument("--out", help="also write the table to this file")
    corpus_opts(sp)
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("mask", help="replace chemical names with [CHEM]")
    sp.add_argument("corpus_dir")
    sp.add_argument("out_dir")
    sp.add_argument("--lexicon", help="lexicon file (default: bundled list)")
    sp.add_argument("--paragraph-mode", choices=PARAGRAPH_MODES, default="newline")
    sp.set_defaults(func=cmd_mask)

    sp = sub.add_parser("train", help="train a tagger from a config file")
    sp.add_argument("--config", required=True)
    sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("predict", help="extract reaction spans with a trained checkpoint")
    sp.add_argument("checkpoint")
    sp.add_argument("corpus_dir")
    sp.add_argument("--out", help="predictions file (default: stdout)")
    sp.add_argument("--contextual-embeddings", help="precomputed contextual token vectors")
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("evaluate", help="strict and fuzzy span scores")
    sp.add_argument("gold", help="corpus directory, tag file or predictions file")
    sp.add_argument("predictions", help="predictions file or tag file")
    sp.add_argument("--tolerance", type=int, default=1)
    sp.add_argument("--out-dir", help="write report.kv and report.txt here")
    corpus_opts(sp)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("synth", help="generate a synthetic corpus")
    sp.add_argument("out_dir")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--docs", type=int, default=20)
    sp.add_argument("--paragraphs", type=int, default=60, help="paragraphs per document")
    sp.add_argument("--reactions", type=int, default=5, help="reactions per document")
    sp.add_argument("--min-reaction-paragraphs", type=int, default=1)
    sp.add_argument("--max-reaction-paragraphs", type=int, default=4)
    sp.add_argument("--prefix", default="synth")
    sp.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except RxnSpanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
