import json

import numpy as np
import pytest

from lexsubkit.cli import main
from lexsubkit.datasets import DatasetManifest, write_manifest_jsonl, write_wsi_jsonl
from lexsubkit.estimators import stub_estimate
from lexsubkit.injection import FusionConfig, fuse_embs, target_similarity
from lexsubkit.interchange import (
    EmbeddingTable,
    SubstituteDistribution,
    Vocabulary,
    WordPrior,
    write_distributions,
    write_embeddings,
    write_vocab,
)
from lexsubkit.postproc import builtin_lemmatizer, postprocess
from lexsubkit.wsi import WsiInstance
from tests.conftest import make_example


@pytest.fixture
def toy_setup(tmp_path, rng):
    """A five-word vocabulary, text embeddings and a two-example dataset."""
    words = ["car", "auto", "truck", "road", "drive"]
    rows = rng.standard_normal((5, 3))
    emb_path = tmp_path / "emb.txt"
    emb_path.write_text(
        "".join(
            f"{w} " + " ".join(repr(float(x)) for x in row) + "\n"
            for w, row in zip(words, rows)
        )
    )
    manifest = DatasetManifest(
        name="toy",
        examples=[
            make_example(
                "we drive the car on the road",
                3,
                example_id="t1",
                lemma="car",
                gold={"auto": 2},
            ),
            make_example(
                "a truck and a car passed",
                4,
                example_id="t2",
                lemma="car",
                gold={"auto": 1, "truck": 1},
            ),
        ],
    )
    dataset = tmp_path / "dataset.jsonl"
    write_manifest_jsonl(dataset, manifest)
    return {
        "tmp": tmp_path,
        "embeddings": emb_path,
        "dataset": dataset,
        "table": EmbeddingTable(Vocabulary(words), rows),
        "manifest": manifest,
    }


class TestTransform:
    def test_and_pattern_on_known_sentence(self, tmp_path):
        manifest = DatasetManifest(
            name="toy",
            examples=[
                make_example("Let me fly away!", 2, example_id="f1", pos="v")
            ],
        )
        dataset = tmp_path / "d.jsonl"
        write_manifest_jsonl(dataset, manifest)
        out = tmp_path / "transformed.jsonl"
        assert main(
            ["transform", "--dataset", str(dataset), "--pattern", "and",
             "--out", str(out)]
        ) == 0
        record = json.loads(out.read_text())
        assert " ".join(record["tokens"]).replace("____", "___") == (
            "Let me fly and ___ away!"
        )
        assert record["tokens"][record["position"]] == "____"

    def test_none_points_at_target(self, toy_setup):
        out = toy_setup["tmp"] / "none.jsonl"
        main(["transform", "--dataset", str(toy_setup["dataset"]),
              "--pattern", "none", "--out", str(out)])
        records = [json.loads(l) for l in out.read_text().splitlines()]
        assert records[0]["position"] == 3
        assert records[0]["tokens"][3] == "car"

    def test_duplicate_doubles_tokens(self, toy_setup):
        out = toy_setup["tmp"] / "dup.jsonl"
        main(["transform", "--dataset", str(toy_setup["dataset"]),
              "--pattern", "duplicate", "--out", str(out)])
        record = json.loads(out.read_text().splitlines()[0])
        assert len(record["tokens"]) == 14

    def test_unknown_pattern_is_input_error(self, toy_setup, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["transform", "--dataset", str(toy_setup["dataset"]),
                  "--pattern", "reverse", "--out", "x.jsonl"])
        assert exc.value.code == 1


class TestRank:
    def test_matches_hand_composed_pipeline(self, toy_setup):
        """CLI stub+embs output equals the module-level composition."""
        out = toy_setup["tmp"] / "ranked.jsonl"
        code = main(
            ["rank", "--dataset", str(toy_setup["dataset"]),
             "--profile", "stub", "--injection", "embs",
             "--embeddings", str(toy_setup["embeddings"]),
             "--temperature", "0.5", "--topk", "5", "--out", str(out)]
        )
        assert code == 0
        records = {r["id"]: r for r in map(json.loads, out.read_text().splitlines())}

        emb = toy_setup["table"]
        fusion = FusionConfig(temperature=0.5)
        lemmatizer = builtin_lemmatizer()
        for example in toy_setup["manifest"].examples:
            fused = fuse_embs(
                stub_estimate(example, emb, 3),
                target_similarity(emb, "car", fusion),
                WordPrior.neutral(),
                beta=0.0,
            )
            expected = postprocess(fused.ranked(), "car", "n", lemmatizer)
            got = records[example.id]["substitutes"]
            assert [w for w, _ in got] == expected.top(5)
            for (word, score), (ew, es) in zip(got, expected.items[:5]):
                assert score == pytest.approx(es, abs=1e-12)

    def test_reruns_are_byte_identical(self, toy_setup):
        args = ["rank", "--dataset", str(toy_setup["dataset"]),
                "--profile", "stub", "--injection", "embs",
                "--embeddings", str(toy_setup["embeddings"])]
        out1 = toy_setup["tmp"] / "r1.jsonl"
        out2 = toy_setup["tmp"] / "r2.jsonl"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_injection_ablation_differs_only_by_fusion(self, toy_setup):
        out_none = toy_setup["tmp"] / "none.jsonl"
        out_embs = toy_setup["tmp"] / "embs.jsonl"
        base = ["rank", "--dataset", str(toy_setup["dataset"]),
                "--profile", "stub",
                "--embeddings", str(toy_setup["embeddings"])]
        main(base + ["--injection", "none", "--out", str(out_none)])
        main(base + ["--injection", "embs", "--out", str(out_embs)])
        plain = {r["id"]: r for r in map(json.loads, out_none.read_text().splitlines())}
        fused = {r["id"]: r for r in map(json.loads, out_embs.read_text().splitlines())}

        emb = toy_setup["table"]
        lemmatizer = builtin_lemmatizer()
        for example in toy_setup["manifest"].examples:
            p_context = stub_estimate(example, emb, 3).normalize()
            expected_plain = postprocess(
                p_context.ranked(), "car", "n", lemmatizer
            )
            assert [w for w, _ in plain[example.id]["substitutes"]] == (
                expected_plain.top(10)
            )
            combined = fuse_embs(
                p_context,
                target_similarity(emb, "car", FusionConfig(temperature=1.0)),
                WordPrior.neutral(),
                beta=0.0,
            )
            expected_fused = postprocess(combined.ranked(), "car", "n", lemmatizer)
            assert [w for w, _ in fused[example.id]["substitutes"]] == (
                expected_fused.top(10)
            )

    def test_missing_input_is_exit_one(self, toy_setup):
        assert main(
            ["rank", "--dataset", "no-such.jsonl", "--profile", "stub",
             "--embeddings", str(toy_setup["embeddings"]), "--out", "x"]
        ) == 1

    def test_config_file_matches_explicit_flag(self, toy_setup):
        config = toy_setup["tmp"] / "run.conf"
        config.write_text("temperature = 0.5\n")
        via_config = toy_setup["tmp"] / "via_config.jsonl"
        via_flag = toy_setup["tmp"] / "via_flag.jsonl"
        base = ["rank", "--dataset", str(toy_setup["dataset"]),
                "--profile", "stub", "--injection", "embs",
                "--embeddings", str(toy_setup["embeddings"])]
        assert main(base + ["--config", str(config), "--out", str(via_config)]) == 0
        assert main(base + ["--temperature", "0.5", "--out", str(via_flag)]) == 0
        assert via_config.read_bytes() == via_flag.read_bytes()


class TestEval:
    def _oracle_files(self, tmp_path):
        """LSD1 distributions whose scores mirror the gold weights."""
        words = ["suba", "subb", "subc", "filler"]
        vocab = Vocabulary(words)
        examples = [
            make_example("a worda b", 1, example_id="o1", lemma="worda",
                         gold={"suba": 3, "subb": 1}),
            make_example("c worda d", 1, example_id="o2", lemma="worda",
                         gold={"subb": 2, "subc": 1}),
        ]
        distributions = []
        for example in examples:
            scores = np.array(
                [float(example.gold.get(w, -40.0)) for w in words]
            )
            distributions.append(SubstituteDistribution(vocab, scores, example.id))
        manifest = DatasetManifest(name="oracle", examples=examples)
        dataset = tmp_path / "oracle.jsonl"
        write_manifest_jsonl(dataset, manifest)
        lsd = tmp_path / "oracle.lsd1"
        write_distributions(lsd, distributions)
        vocab_path = tmp_path / "vocab.txt"
        write_vocab(vocab_path, vocab)
        return dataset, lsd, vocab_path

    def test_oracle_scores_report_gap_one(self, tmp_path):
        dataset, lsd, vocab_path = self._oracle_files(tmp_path)
        out = tmp_path / "report"
        code = main(
            ["eval", "--dataset", str(dataset), "--profile", "bert",
             "--distributions", str(lsd), "--vocab", str(vocab_path),
             "--mode", "candidates", "--out", str(out)]
        )
        assert code == 0
        payload = json.loads((out / "eval.json").read_text())
        assert payload["gap"] == pytest.approx(1.0, abs=1e-9)
        assert (out / "eval.tsv").exists()
        assert (out / "eval.png").stat().st_size > 0

    def test_all_vocab_mode(self, tmp_path):
        dataset, lsd, vocab_path = self._oracle_files(tmp_path)
        out = tmp_path / "report"
        main(
            ["eval", "--dataset", str(dataset), "--profile", "bert",
             "--distributions", str(lsd), "--vocab", str(vocab_path),
             "--mode", "all-vocab", "--out", str(out)]
        )
        payload = json.loads((out / "eval.json").read_text())
        assert payload["p@1"] == pytest.approx(1.0)
        assert payload["r@10"] == pytest.approx(1.0)

    def test_reports_byte_identical(self, tmp_path):
        dataset, lsd, vocab_path = self._oracle_files(tmp_path)
        outs = []
        for name in ("rep1", "rep2"):
            out = tmp_path / name
            main(
                ["eval", "--dataset", str(dataset), "--profile", "bert",
                 "--distributions", str(lsd), "--vocab", str(vocab_path),
                 "--mode", "candidates", "--out", str(out)]
            )
            outs.append(out)
        for name in ("eval.tsv", "eval.json", "eval.png"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()

    def test_topk_jsonl_rejected_for_fusion(self, tmp_path, toy_setup):
        ranked = tmp_path / "topk.jsonl"
        ranked.write_text('{"id": "t1", "substitutes": [["auto", 1.0]]}\n')
        code = main(
            ["eval", "--dataset", str(toy_setup["dataset"]), "--profile", "bert",
             "--distributions", str(ranked), "--injection", "embs",
             "--embeddings", str(toy_setup["embeddings"]),
             "--mode", "candidates", "--out", str(tmp_path / "r")]
        )
        assert code == 1


class TestWsi:
    def test_synthetic_two_sense_corpus_scores_one(self, tmp_path):
        """Disjoint sense vocabularies: documents separate perfectly, the
        silhouette picks two clusters and every metric is 1.0."""
        sense_words = {
            "water": ["river", "water", "shore", "flow"],
            "money": ["money", "loan", "credit", "cash"],
        }
        words = sense_words["water"] + sense_words["money"]
        emb_path = tmp_path / "emb.txt"
        emb_path.write_text(
            "".join(
                f"{w} " + " ".join("1.0" if i == j else "0.0" for j in range(8)) + "\n"
                for i, w in enumerate(words)
            )
        )
        instances = []
        for i in range(6):
            sense = "water" if i % 2 == 0 else "money"
            context = sense_words[sense]
            sentence = f"{context[0]} {context[1]} bank {context[2]} {context[3]}"
            example = make_example(
                sentence, 2, example_id=f"bank.{i}", lemma="bank"
            )
            instances.append(
                WsiInstance(
                    id=f"bank.{i}", lemma="bank", pos="n",
                    example=example, gold_sense=sense,
                )
            )
        dataset = tmp_path / "wsi.jsonl"
        write_wsi_jsonl(dataset, instances)
        out = tmp_path / "wsi-out"
        code = main(
            ["wsi", "--dataset", str(dataset), "--profile", "stub",
             "--embeddings", str(emb_path), "--topk", "4",
             "--out", str(out)]
        )
        assert code == 0
        payload = json.loads((out / "wsi_metrics.json").read_text())
        assert payload["aggregate"]["avg"] == pytest.approx(1.0)
        assert payload["per_lemma"]["bank.n"]["k"] == 2
        assignments = (out / "assignments.tsv").read_text().splitlines()
        assert len(assignments) == 7  # header + 6 instances

    def test_flavored_xml_input(self, tmp_path, fixtures_dir, rng):
        words = ["river", "boat", "loan", "mortgage", "nature", "tackle"]
        emb_path = tmp_path / "emb.txt"
        emb_path.write_text(
            "".join(
                f"{w} " + " ".join(repr(float(x)) for x in rng.standard_normal(3)) + "\n"
                for w in words
            )
        )
        out = tmp_path / "wsi-out"
        code = main(
            ["wsi", "--dataset", str(fixtures_dir / "wsi2013" / "instances.xml"),
             "--flavor", "semeval2013",
             "--key", str(fixtures_dir / "wsi2013" / "gold.key"),
             "--profile", "stub", "--embeddings", str(emb_path),
             "--out", str(out)]
        )
        assert code == 0
        assert (out / "assignments.tsv").exists()


class TestRelations:
    def test_gold_profile_report_shape(self, tmp_path, fixtures_dir):
        from lexsubkit.datasets import parse_coinco

        manifest = parse_coinco(fixtures_dir / "coinco" / "coinco.xml")
        dataset = tmp_path / "coinco.jsonl"
        write_manifest_jsonl(dataset, manifest)
        out = tmp_path / "relations"
        code = main(
            ["relations", "--dataset", str(dataset), "--source", "gold",
             "--out", str(out)]
        )
        assert code == 0
        rows = (out / "relations.tsv").read_text().splitlines()
        assert rows[0] == "source\tpos\trelation\tproportion"
        assert len(rows) > 1
        payload = json.loads((out / "relations.json").read_text())
        for pos, by_label in payload["gold"].items():
            assert sum(by_label.values()) == pytest.approx(1.0, abs=1e-9)
        assert (out / "relations.png").stat().st_size > 0

    def test_model_source_uses_rankings(self, tmp_path, toy_setup):
        out = toy_setup["tmp"] / "relations"
        code = main(
            ["relations", "--dataset", str(toy_setup["dataset"]),
             "--source", "model", "--profile", "stub",
             "--embeddings", str(toy_setup["embeddings"]),
             "--top", "3", "--out", str(out)]
        )
        assert code == 0
        payload = json.loads((out / "relations.json").read_text())
        assert "stub+none" in payload
