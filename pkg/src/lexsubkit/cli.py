"""Command-line interface.

Subcommands cover the full pipeline around external substitute producers:

* ``transform`` -- rewrite a dataset for one injection pattern, emitting the
  token lists and prediction positions an external model must score.
* ``rank`` -- produce top-k substitutes per example as JSONL.
* ``eval`` -- candidate or all-vocabulary ranking metrics, as TSV/JSON/PNG.
* ``wsi`` -- cluster occurrences per lemma and score against gold senses.
* ``relations`` -- profile target/substitute relations against the lexicon.

Every command is a pure function of its config and input files; reruns
write byte-identical outputs.  Exit codes: 0 ok, 1 input error, 2 internal
error.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

from lexsubkit import datasets, injection, metrics, reports, wsi
from lexsubkit.errors import LexsubError
from lexsubkit.estimators import (
    DEFAULT_WINDOW,
    FileEstimator,
    load_text_embeddings,
    npic_score,
    ooc_rank,
    stub_estimate,
)
from lexsubkit.interchange import (
    DISTRIBUTION_MAGIC,
    EMBEDDING_MAGIC,
    RankedSubstitutes,
    read_embeddings,
    read_prior,
    read_topk_jsonl,
    read_vocab,
    write_topk_jsonl,
)
from lexsubkit.pipeline import RankerPipeline, bcomb_source
from lexsubkit.postproc import Lemmatizer, builtin_lemmatizer
from lexsubkit.relations import WordnetGraph, builtin_graph, relation_profile

PROFILE_NAMES = ("bert", "roberta", "xlnet", "elmo", "c2v", "stub", "ooc", "npic")
INJECTIONS = ("none", "embs", "pattern-and", "duplicate")


class CliParser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are input errors: exit 1
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("model")
    group.add_argument("--profile", choices=PROFILE_NAMES, default="stub")
    group.add_argument("--injection", choices=INJECTIONS, default="none")
    group.add_argument(
        "--distributions",
        nargs="+",
        metavar="PATH",
        help="LSD1 file (two files combine left/right contexts), "
        "or a top-k JSONL for ranking-only workflows",
    )
    group.add_argument("--vocab", help="vocabulary file for LSD1/LSE1 inputs")
    group.add_argument("--embeddings", help="LSE1 or text embedding table")
    group.add_argument("--ctx-embeddings", help="context table (npic)")
    group.add_argument("--prior", help="word-prior TSV, or 'zipf'")
    group.add_argument("--temperature", type=float)
    group.add_argument("--beta", type=float)
    group.add_argument("--gamma", type=float)
    group.add_argument("--similarity", choices=("dot", "cosine"))
    group.add_argument("--visibility", choices=("original", "masked"))
    group.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    group.add_argument("--variant", help="distribution key suffix (id#variant)")
    group.add_argument("--config", help="key=value or JSON fusion config file")
    group.add_argument("--wordnet", help="lexicon directory (default: bundled)")
    group.add_argument(
        "--no-target-exclusion",
        action="store_true",
        help="ablation: keep target forms in the ranking",
    )
    group.add_argument("--skip-errors", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(prog="lexsubkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="emit injection inputs for a model")
    p.add_argument("--dataset", required=True)
    p.add_argument("--pattern", choices=injection.PATTERNS, required=True)
    p.add_argument("--separator", help="token between sentence copies")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("rank", help="top-k substitutes per example")
    p.add_argument("--dataset", required=True)
    _add_model_flags(p)
    p.add_argument("--topk", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("eval", help="ranking metrics over a dataset")
    p.add_argument("--dataset", required=True)
    _add_model_flags(p)
    p.add_argument("--mode", choices=("candidates", "all-vocab"), required=True)
    p.add_argument("--name", help="report row label (default: profile+injection)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("wsi", help="cluster occurrences and score senses")
    p.add_argument("--dataset", required=True, help="WSI JSONL, or XML with --flavor")
    p.add_argument("--flavor", choices=("semeval2010", "semeval2013"))
    p.add_argument("--key", help="gold key file (with --flavor)")
    _add_model_flags(p)
    p.add_argument("--kmax", type=int, default=wsi.DEFAULT_MAX_K)
    p.add_argument("--topk", type=int, default=wsi.DOCUMENT_SIZE)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_wsi)

    p = sub.add_parser("relations", help="semantic relation proportions")
    p.add_argument("--dataset", required=True)
    p.add_argument(
        "--source",
        choices=("gold", "model"),
        default="gold",
        help="profile the gold substitutes or the model's top-k",
    )
    _add_model_flags(p)
    p.add_argument("--top", type=int, default=10, help="substitutes per example")
    p.add_argument("--name", help="report row label")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_relations)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (LexsubError, OSError, ValueError, KeyError) as exc:
        print(f"lexsubkit: error: {exc}", file=sys.stderr)
        return 1
    except Exception:  # internal error
        traceback.print_exc()
        return 2


# ---------------------------------------------------------------------------
# Assembly helpers
# ---------------------------------------------------------------------------


def _sniff(path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read(4)


def _load_embedding_table(path, vocab):
    if _sniff(path) == EMBEDDING_MAGIC:
        if vocab is None:
            raise LexsubError("--vocab is required for LSE1 embeddings")
        return read_embeddings(path, vocab)
    return load_text_embeddings(path)


def _variant_for(args) -> str | None:
    if args.variant:
        return args.variant
    if args.injection == "pattern-and":
        return "and"
    if args.injection == "duplicate":
        return "duplicate"
    return None


def build_ranker(args, task: str = "lexsub") -> RankerPipeline:
    """Assemble the pipeline a command was configured to run."""
    profile = injection.load_profile(args.profile, task)
    overrides = dict(args.config and injection.load_config_file(args.config) or {})
    if "profile" in overrides:
        profile = injection.load_profile(overrides["profile"], task)
    fusion = injection.resolve_fusion(
        profile,
        temperature=args.temperature
        if args.temperature is not None
        else overrides.get("temperature"),
        beta=args.beta if args.beta is not None else overrides.get("beta"),
        similarity=args.similarity or overrides.get("similarity"),
        target_visibility=args.visibility or overrides.get("target_visibility"),
    )
    gamma = args.gamma if args.gamma is not None else overrides.get("gamma", profile.gamma)

    vocab = read_vocab(args.vocab) if args.vocab else None
    lemmatizer = (
        Lemmatizer.from_wordnet_dir(args.wordnet) if args.wordnet else builtin_lemmatizer()
    )
    embeddings = (
        _load_embedding_table(args.embeddings, vocab) if args.embeddings else None
    )

    fuse = args.injection == "embs"
    variant = _variant_for(args)

    if args.profile == "stub":
        if embeddings is None:
            raise LexsubError("the stub profile needs --embeddings")
        window = args.window
        context = lambda ex: stub_estimate(ex, embeddings, window)
    elif args.profile == "ooc":
        if embeddings is None:
            raise LexsubError("the ooc profile needs --embeddings")
        context = lambda ex: ooc_rank(ex, embeddings)
    elif args.profile == "npic":
        if embeddings is None or not args.ctx_embeddings:
            raise LexsubError("the npic profile needs --embeddings and --ctx-embeddings")
        ctx_table = _load_embedding_table(args.ctx_embeddings, vocab)
        window = args.window
        word_table = embeddings
        context = lambda ex: npic_score(ex, word_table, ctx_table, window)
    else:  # file-backed neural profile
        if not args.distributions:
            raise LexsubError(f"the {args.profile} profile needs --distributions")
        context = _file_context(args, vocab, fuse, gamma, variant)

    prior = _load_prior(args, embeddings, vocab)
    return RankerPipeline(
        context=context,
        lemmatizer=lemmatizer,
        injection="embs" if fuse else "none",
        embeddings=embeddings,
        prior=prior,
        fusion=fusion,
        exclude_target=not args.no_target_exclusion,
    )


def _file_context(args, vocab, fuse, gamma, variant):
    paths = args.distributions
    if len(paths) > 2:
        raise LexsubError("--distributions takes at most two files")
    if any(_sniff(p) != DISTRIBUTION_MAGIC for p in paths):
        if len(paths) != 1:
            raise LexsubError("left/right combination needs LSD1 files")
        if fuse:
            raise LexsubError(
                "top-k JSONL carries no full distributions; "
                "embs fusion needs LSD1 input"
            )
        rankings = dict(read_topk_jsonl(paths[0]))
        def context(ex):
            try:
                return rankings[ex.id if variant is None else f"{ex.id}#{variant}"]
            except KeyError:
                raise LexsubError(f"no stored ranking for {ex.id!r}") from None
        return context
    if vocab is None:
        raise LexsubError("--vocab is required for LSD1 distributions")
    if len(paths) == 2:
        left = FileEstimator.from_file(paths[0], vocab)
        right = FileEstimator.from_file(paths[1], vocab)
        prior = _load_prior(args, None, vocab)
        return bcomb_source(left, right, prior, gamma, variant)
    estimator = FileEstimator.from_file(paths[0], vocab)
    return lambda ex: estimator.estimate(ex, variant)


def _load_prior(args, embeddings, vocab):
    if not args.prior:
        from lexsubkit.interchange import WordPrior

        return WordPrior.neutral()
    if args.prior == "zipf":
        target_vocab = vocab or (embeddings.vocab if embeddings is not None else None)
        if target_vocab is None:
            raise LexsubError("'--prior zipf' needs --vocab or --embeddings")
        return injection.zipf_rank_prior(target_vocab, injection.ZipfPriorConfig())
    return read_prior(args.prior)


def _rank_all(examples, ranker, skip_errors: bool):
    """Rank every example once; returns (id -> ranking, kept examples)."""
    rankings: dict[str, RankedSubstitutes] = {}
    kept = []
    for example in examples:
        try:
            rankings[example.id] = ranker.rank(example)
            kept.append(example)
        except Exception as exc:
            if not skip_errors:
                raise
            print(f"lexsubkit: skipping {example.id}: {exc}", file=sys.stderr)
    return rankings, kept


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_transform(args) -> int:
    manifest = datasets.read_manifest_jsonl(args.dataset)
    with open(args.out, "w", encoding="utf-8") as fh:
        for example in manifest.examples:
            tokens, position = injection.apply_pattern(
                example, args.pattern, separator=args.separator
            )
            fh.write(
                json.dumps(
                    {
                        "id": example.id,
                        "variant": args.pattern,
                        "tokens": tokens,
                        "position": position,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    return 0


def cmd_rank(args) -> int:
    manifest = datasets.read_manifest_jsonl(args.dataset)
    ranker = build_ranker(args)
    rankings, kept = _rank_all(manifest.examples, ranker, args.skip_errors)
    write_topk_jsonl(
        args.out, ((ex.id, rankings[ex.id]) for ex in kept), top_k=args.topk
    )
    return 0


def cmd_eval(args) -> int:
    manifest = datasets.read_manifest_jsonl(args.dataset)
    ranker = build_ranker(args)
    rankings, kept = _rank_all(manifest.examples, ranker, args.skip_errors)
    mode = "all_vocab" if args.mode == "all-vocab" else args.mode
    result = metrics.evaluate(
        kept,
        lambda ex: rankings[ex.id],
        mode,
        candidates=manifest.per_lemma_candidates,
    )
    name = args.name or f"{args.profile}+{args.injection}"
    row = result.as_row()
    out = _outdir(args)
    reports.write_tsv(
        out / "eval.tsv",
        ["model", "mode", "n", "GAP", "P@1", "P@3", "R@10"],
        [[name, args.mode, row["n"], row["gap"], row["p@1"], row["p@3"], row["r@10"]]],
    )
    reports.write_json(
        out / "eval.json", {"model": name, "mode": args.mode, **row}
    )
    reports.metric_bars(
        out / "eval.png",
        {name: {k: v for k, v in row.items() if k != "n"}},
        f"{manifest.name}: {args.mode} ranking",
    )
    print(f"{name}\t" + "\t".join(reports.fmt(row[k]) for k in ("gap", "p@1", "p@3", "r@10")))
    return 0


def cmd_wsi(args) -> int:
    if args.flavor:
        instances = datasets.parse_wsi_dataset(args.dataset, args.flavor, args.key)
        avg_of = wsi.AVG_PAIRS[args.flavor]
    else:
        instances = datasets.read_wsi_jsonl(args.dataset)
        avg_of = wsi.AVG_PAIRS["semeval2010"]
    ranker = build_ranker(args, task="wsi")

    by_lemma: dict[tuple[str, str], list[wsi.WsiInstance]] = {}
    for instance in instances:
        by_lemma.setdefault((instance.lemma, instance.pos), []).append(instance)

    assignment_rows = []
    per_lemma = {}
    weighted = {"v_measure": 0.0, "paired_f": 0.0, "bcubed_f": 0.0, "nmi": 0.0, "avg": 0.0}
    scored = 0
    for (lemma, pos), group in sorted(by_lemma.items()):
        documents = wsi.build_documents(
            group, lambda ex: ranker.rank(ex), size=args.topk
        )
        vectors, _ = wsi.tfidf(documents)
        selection = wsi.select_k(
            vectors,
            k_range=range(2, min(args.kmax, len(group) - 1) + 1)
            if len(group) >= 3
            else None,
            ids=[i.id for i in group],
        )
        for instance in group:
            assignment_rows.append(
                [instance.id, selection.clustering.assignment[instance.id]]
            )
        gold = {i.id: i.gold_sense for i in group if i.gold_sense is not None}
        if len(gold) == len(group):
            scores = wsi.wsi_metrics(selection.clustering, gold, avg_of=avg_of)
            per_lemma[f"{lemma}.{pos}"] = {
                "n": len(group),
                "k": selection.k,
                **scores,
            }
            for key in weighted:
                weighted[key] += scores[key] * len(group)
            scored += len(group)

    out = _outdir(args)
    reports.write_tsv(out / "assignments.tsv", ["instance", "cluster"], assignment_rows)
    summary = {}
    if scored:
        summary = {key: value / scored for key, value in weighted.items()}
    reports.write_json(
        out / "wsi_metrics.json",
        {"per_lemma": per_lemma, "aggregate": summary, "instances_scored": scored},
    )
    if summary:
        reports.metric_bars(
            out / "wsi.png",
            {f"{args.profile}+{args.injection}": summary},
            "sense induction metrics (instance-weighted mean)",
        )
        print("\t".join(f"{key}={value:.4f}" for key, value in sorted(summary.items())))
    return 0


def cmd_relations(args) -> int:
    manifest = datasets.read_manifest_jsonl(args.dataset)
    graph = (
        WordnetGraph.from_wordnet_dir(args.wordnet) if args.wordnet else builtin_graph()
    )
    if args.source == "gold":
        name = args.name or "gold"
        pairs = [
            (example.target_lemma, substitute, example.pos)
            for example in manifest.examples
            for substitute in (example.gold_all or example.gold)
        ]
    else:
        name = args.name or f"{args.profile}+{args.injection}"
        ranker = build_ranker(args)
        rankings, kept = _rank_all(manifest.examples, ranker, args.skip_errors)
        pairs = [
            (example.target_lemma, substitute, example.pos)
            for example in kept
            for substitute in rankings[example.id].top(args.top)
        ]
    profile = relation_profile(pairs, graph)
    out = _outdir(args)
    rows = [
        [name, pos, label, proportion]
        for pos, by_label in profile.items()
        for label, proportion in by_label.items()
    ]
    reports.write_tsv(
        out / "relations.tsv", ["source", "pos", "relation", "proportion"], rows
    )
    reports.write_json(out / "relations.json", {name: profile})
    reports.proportion_bars(
        out / "relations.png", {name: profile}, f"{manifest.name}: relation profile"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
