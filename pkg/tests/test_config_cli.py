import numpy as np
import pytest

from hetedge.cli import build_parser, main, resolve_config
from hetedge.config import (ConfigError, PipelineConfig, derive_seed,
                            load_config, set_key, validate)


class TestConfigFile:
    def write(self, tmp_path, text):
        path = tmp_path / "run.cfg"
        path.write_text(text)
        return path

    def test_sections_and_top_level(self, tmp_path):
        path = self.write(tmp_path, """
# experiment settings
seed = 42
strategy = node2vec
walk.p = 0.25
walk.walk_length = 40
sgns.dim = 64
train.batch_size = 128
eval.k = 10
serving.pool_size = 50
types = contact,chat
""")
        cfg = load_config(path)
        assert cfg.seed == 42
        assert cfg.strategy == "node2vec"
        assert cfg.walk.p == 0.25
        assert cfg.walk.walk_length == 40
        assert cfg.sgns.dim == 64
        assert cfg.train.batch_size == 128
        assert cfg.eval.k == 10
        assert cfg.serving.pool_size == 50
        assert cfg.types == ("contact", "chat")

    def test_unknown_key_reports_lineno(self, tmp_path):
        path = self.write(tmp_path, "seed = 1\nwombat = 3\n")
        with pytest.raises(ConfigError, match=":2:"):
            load_config(path)

    def test_bad_value_reports_lineno(self, tmp_path):
        path = self.write(tmp_path, "walk.p = banana\n")
        with pytest.raises(ConfigError, match=":1:.*banana"):
            load_config(path)

    def test_missing_equals_rejected(self, tmp_path):
        path = self.write(tmp_path, "just some words\n")
        with pytest.raises(ConfigError, match="key = value"):
            load_config(path)

    def test_shadowed_keys_redirect_to_top_level(self):
        cfg = PipelineConfig()
        for key in ("walk.seed", "sgns.seed", "train.seed", "walk.strategy"):
            with pytest.raises(ConfigError, match="top-level"):
                set_key(cfg, key, "3")

    def test_unknown_section(self):
        with pytest.raises(ConfigError, match="unknown config section"):
            set_key(PipelineConfig(), "volcano.heat", "1")

    def test_validate_cross_field(self):
        cfg = PipelineConfig()
        cfg.combiner = "xor"
        with pytest.raises(ConfigError, match="combiner"):
            validate(cfg)
        cfg = PipelineConfig()
        cfg.threads = 0
        with pytest.raises(ConfigError, match="threads"):
            validate(cfg)


class TestDeriveSeed:
    def test_stable_and_distinct(self):
        assert derive_seed(7, "walk:chat") == derive_seed(7, "walk:chat")
        assert derive_seed(7, "walk:chat") != derive_seed(7, "walk:contact")
        assert derive_seed(7, "walk:chat") != derive_seed(8, "walk:chat")

    def test_in_32bit_range(self):
        for label in ("a", "b", "train"):
            assert 0 <= derive_seed(123, label) < 2 ** 32


class TestFlagPrecedence:
    def test_flags_override_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("seed = 5\nstrategy = uniform\nsgns.dim = 16\n")
        args = build_parser().parse_args(
            ["walk", "--workdir", str(tmp_path), "--config", str(path),
             "--seed", "9", "--strategy", "hetero"])
        cfg = resolve_config(args)
        assert cfg.seed == 9               # flag wins
        assert cfg.strategy == "hetero"    # flag wins
        assert cfg.sgns.dim == 16          # file survives

    def test_defaults_without_inputs(self, tmp_path):
        args = build_parser().parse_args(["walk", "--workdir", str(tmp_path)])
        cfg = resolve_config(args)
        assert cfg.seed == 0
        assert cfg.strategy == "node2vec"
        assert cfg.combiner == "concatenate"
        assert cfg.model == "mtn"

    def test_types_flag(self, tmp_path):
        args = build_parser().parse_args(
            ["walk", "--workdir", str(tmp_path), "--types", "friend,chat"])
        assert resolve_config(args).types == ("friend", "chat")


class TestCliExitCodes:
    def test_missing_artifact_exits_2(self, tmp_path, capsys):
        code = main(["walk", "--workdir", str(tmp_path)])
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_bad_config_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("nope = 1\n")
        code = main(["synth", "--workdir", str(tmp_path), "--config", str(bad)])
        assert code == 2

    def test_synth_succeeds(self, tmp_path, capsys):
        code = main(["synth", "--workdir", str(tmp_path), "--nodes", "120",
                     "--positives", "60", "--seed", "1"])
        assert code == 0
        assert (tmp_path / "graph.txt").exists()
        assert (tmp_path / "pairs_train.txt").exists()
        assert (tmp_path / "pairs_test.txt").exists()

    def test_ingest_succeeds(self, tmp_path):
        edges = tmp_path / "edges.tsv"
        edges.write_text("a\tb\tcontact\nb\tc\tfriend\n")
        code = main(["ingest", "--workdir", str(tmp_path),
                     "--edges", str(edges)])
        assert code == 0
        assert (tmp_path / "graph.txt").exists()

    def test_ingest_bad_edge_file_exits_2(self, tmp_path, capsys):
        edges = tmp_path / "edges.tsv"
        edges.write_text("a b contact\n")  # spaces, not tabs
        assert main(["ingest", "--workdir", str(tmp_path),
                     "--edges", str(edges)]) == 2
