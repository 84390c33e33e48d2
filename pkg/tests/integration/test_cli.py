"""Integration tests for the command-line interface."""

import json

import pytest

from pragmatic_colors.application.net import expected_param_count
from pragmatic_colors.cli import main
from pragmatic_colors.infrastructure.data_files import load_samples, load_triples
from pragmatic_colors.infrastructure.embeddings import load_embeddings
from pragmatic_colors.infrastructure.model_store import load_model
from pragmatic_colors.infrastructure.reports import read_manifest, verify_manifest

pytestmark = pytest.mark.integration

SMALL_NET = ["--embedding-dim", "4", "--hidden-size", "5"]
QUICK = SMALL_NET + ["--epochs", "3", "--samples-per-triple", "2", "--k", "5"]


def _corpus_args(files):
    return [
        "--triples", str(files["triples"]),
        "--samples", str(files["samples"]),
        "--embeddings", str(files["embeddings"]),
    ]


def _train(files, out, direction="speaker"):
    return main(["train", *_corpus_args(files), "--direction", direction, "--out", str(out), *QUICK])


class TestSynth:
    """Tests for corpus generation."""

    def test_outputs_parse(self, tmp_path, capsys):
        assert main(["synth", "--out", str(tmp_path), "--seed", "4"]) == 0
        printed = capsys.readouterr().out.split()
        assert len(printed) == 3
        triples = load_triples(tmp_path / "triples.csv")
        samples = load_samples(tmp_path / "samples.csv")
        table = load_embeddings(tmp_path / "embeddings.txt", 16)
        assert len(triples) == 48
        assert all(t.target_label in samples for t in triples)
        assert "more" in table

    def test_reseeding_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["synth", "--out", str(a), "--seed", "1", "--noise-sd", "3"]) == 0
        assert main(["synth", "--out", str(b), "--seed", "1", "--noise-sd", "3"]) == 0
        for name in ("triples.csv", "samples.csv", "embeddings.txt"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_synth_config_file(self, tmp_path):
        config = tmp_path / "synth.env"
        config.write_text("num_refs=3\nnum_mods=3\nembedding_dim=4\n", encoding="utf-8")
        out = tmp_path / "corpus"
        assert main(["synth", "--synth-config", str(config), "--out", str(out)]) == 0
        assert len(load_triples(out / "triples.csv")) == 9


class TestTrain:
    """Tests for training and artifacts."""

    def test_artifact_and_manifest(self, tmp_path, corpus_files, capsys):
        out = tmp_path / "speaker.npz"
        assert _train(corpus_files, out) == 0
        stdout = capsys.readouterr().out
        assert f"params: {expected_param_count(4, 5)}" in stdout

        artifact = load_model(out)
        assert artifact.net.embedding_dim == 4
        assert artifact.config.epochs == 3
        assert len(artifact.loss_trace) == 3

        manifest = read_manifest(tmp_path / "speaker.manifest.json")
        assert manifest.command == "train"
        assert verify_manifest(manifest) == []

    def test_json_artifact(self, tmp_path, corpus_files):
        out = tmp_path / "listener.json"
        assert _train(corpus_files, out, "listener") == 0
        assert load_model(out).direction.value == "listener"

    def test_wrong_embedding_dim(self, tmp_path, corpus_files):
        """A dimension mismatch in the embeddings file is a data error."""
        args = ["train", *_corpus_args(corpus_files), "--out", str(tmp_path / "m.npz")]
        assert main(args + ["--embedding-dim", "7", "--epochs", "1"]) == 2


@pytest.fixture
def trained(tmp_path, corpus_files):
    speaker, listener = tmp_path / "speaker.npz", tmp_path / "listener.npz"
    assert _train(corpus_files, speaker) == 0
    assert _train(corpus_files, listener, "listener") == 0
    return {"speaker": speaker, "listener": listener, **corpus_files}


def _predict_args(trained, *extra):
    return [
        "predict",
        "--speaker", str(trained["speaker"]),
        "--listener", str(trained["listener"]),
        "--samples", str(trained["samples"]),
        "--embeddings", str(trained["embeddings"]),
        "--ref-label", "ref00",
        "--modifier", "more mod01",
        *extra,
    ]


class TestPredict:
    """Tests for single-query prediction."""

    def test_single_candidate(self, trained, capsys):
        """With one candidate every distribution gives probability 1."""
        capsys.readouterr()
        assert main(_predict_args(trained, "--n", "1", "--k", "5")) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("chosen:")
        row = lines[-1].split()
        assert row[0] == "0"
        assert row[-3:] == ["1.000000", "1.000000", "1.000000"]

    def test_lambda_zero_matches_literal(self, trained, capsys):
        capsys.readouterr()
        assert main(_predict_args(trained, "--lambda", "0", "--n", "6", "--k", "5")) == 0
        lines = capsys.readouterr().out.splitlines()
        chosen = lines[0].split()[1:]
        literal = lines[1].split()[1:]
        assert chosen == literal
        assert len(lines) == 4 + 6

    def test_partition_and_seed_are_reproducible(self, trained, capsys):
        capsys.readouterr()
        args = _predict_args(trained, "--partition", "test", "--seed", "3", "--k", "5")
        assert main(args) == 0
        first = capsys.readouterr().out
        assert main(args) == 0
        assert capsys.readouterr().out == first

    def test_unknown_label(self, trained):
        args = _predict_args(trained)
        args[args.index("ref00")] = "no-such-color"
        assert main(args) == 2

    def test_three_token_modifier(self, trained):
        args = _predict_args(trained)
        args[args.index("more mod01")] = "much more mod01"
        assert main(args) == 1


class TestEval:
    """Tests for the multi-seed evaluation command."""

    def _eval(self, files, out):
        return main(
            [
                "eval", *_corpus_args(files),
                "--seeds", "0,1",
                "--out", str(out),
                "--n", "3",
                "--validation-size", "4",
                *QUICK,
            ]
        )

    def test_outputs_are_byte_identical(self, tmp_path, corpus_files, capsys):
        a, b = tmp_path / "a", tmp_path / "b"
        assert self._eval(corpus_files, a) == 0
        assert self._eval(corpus_files, b) == 0
        for name in ("metrics.json", "metrics.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

        report = json.loads((a / "metrics.json").read_text(encoding="utf-8"))
        assert report["seeds"] == [0, 1]
        assert report["split_counts"]["OR"] == 16
        assert verify_manifest(read_manifest(a / "manifest.json")) == []
        assert "lambdas:" in capsys.readouterr().out

    def test_fixed_lambda(self, tmp_path, corpus_files):
        out = tmp_path / "fixed"
        args = ["eval", *_corpus_args(corpus_files), "--seeds", "0", "--out", str(out)]
        assert main(args + ["--lambda", "0.25", "--n", "3", *QUICK]) == 0
        report = json.loads((out / "metrics.json").read_text(encoding="utf-8"))
        assert report["lambdas"] == [0.25]


class TestSwatchCommand:
    def test_ppm_and_svg(self, tmp_path):
        ppm, svg = tmp_path / "s.ppm", tmp_path / "s.svg"
        assert main(["swatch", "--colors", "#ff0000", "0,0,255", "--out", str(ppm)]) == 0
        assert main(["swatch", "--colors", "#ff0000", "--out", str(svg)]) == 0
        assert ppm.read_bytes().startswith(b"P6")
        assert svg.read_text(encoding="utf-8").startswith("<svg")

    def test_invalid_color(self, tmp_path):
        assert main(["swatch", "--colors", "nope", "--out", str(tmp_path / "s.ppm")]) == 1


class TestExitCodes:
    def test_missing_input_file(self, tmp_path):
        args = [
            "train",
            "--triples", str(tmp_path / "absent.csv"),
            "--samples", str(tmp_path / "absent.csv"),
            "--embeddings", str(tmp_path / "absent.txt"),
            "--out", str(tmp_path / "m.npz"),
        ]
        assert main(args) == 2

    def test_usage_error(self):
        with pytest.raises(SystemExit) as exc_info:
            main(["train"])
        assert exc_info.value.code == 1

    def test_bad_config_value(self, tmp_path):
        config = tmp_path / "run.env"
        config.write_text("epochs=0\n", encoding="utf-8")
        assert main(["--config", str(config), "swatch", "--colors", "#000000",
                     "--out", str(tmp_path / "s.svg")]) == 1

    def test_bad_environment_value(self, tmp_path, monkeypatch):
        """An invalid PRAGCOLOR_ variable is a configuration error, not a crash."""
        monkeypatch.setenv("PRAGCOLOR_EPOCHS", "0")
        assert main(["swatch", "--colors", "#ffffff", "--out", str(tmp_path / "s.ppm")]) == 1
