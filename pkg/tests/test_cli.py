import json
import math

import numpy as np
import pytest

from emofuse.cli import main
from emofuse.errors import InvalidInputError
from emofuse.features import N_FEATURES
from emofuse.io import (
    PROB_HEADER,
    load_features,
    load_labels,
    load_landmarks,
    load_probabilities,
    read_provenance,
    write_labels,
    write_landmarks,
)
from emofuse.alignment import LandmarkSet
from emofuse.pipeline import RunConfig
from workflow import full_workflow, run, write_corpus


def onehot_file(path, ids, k):
    rows = [",".join(PROB_HEADER)]
    for rid in ids:
        p = ["0"] * 8
        p[k] = "1"
        rows.append(",".join([rid, *p]))
    path.write_text("\n".join(rows) + "\n")
    return path


@pytest.fixture
def corpus(tmp_path):
    return write_corpus(tmp_path)


class TestSubcommands:
    def test_align(self, tmp_path, corpus):
        lm, _, cfg = corpus
        run("align", "--landmarks", lm, "--config", cfg, "--out", tmp_path / "aligned.csv")
        aligned = load_landmarks(tmp_path / "aligned.csv")
        assert len(aligned) == 48
        for a in aligned.values():
            np.testing.assert_allclose(a.points[33], [100, 100], atol=1e-9)
            assert a.src_width == a.src_height == 200

    def test_featurize_with_stats(self, tmp_path, corpus):
        lm, _, cfg = corpus
        run("featurize", "--landmarks", lm, "--fit-stats", "--stats", tmp_path / "s.json",
            "--out", tmp_path / "raw.csv")
        run("featurize", "--landmarks", lm, "--stats", tmp_path / "s.json", "--out", tmp_path / "z.csv")
        ids, X, names = load_features(tmp_path / "z.csv")
        assert X.shape == (48, N_FEATURES) and len(names) == N_FEATURES
        np.testing.assert_allclose(X.mean(axis=0), 0, atol=1e-9)

    def test_subset_split_dedup(self, tmp_path, corpus):
        lm, labels, _ = corpus
        run("subset", "--labels", labels, "--seed", 1, "--out", tmp_path / "sub.csv")
        assert len(load_labels(tmp_path / "sub.csv")) == 48
        run("split", "--labels", labels, "--ratio", 0.5, "--out", tmp_path / "sp")
        assert len(load_labels(tmp_path / "sp" / "train.csv")) == 24
        run("dedup", "--labels", labels, "--landmarks", lm, "--out", tmp_path / "dd.csv")
        assert len(load_labels(tmp_path / "dd.csv")) == 48

    def test_fuse_double_one_hot(self, tmp_path):
        a = onehot_file(tmp_path / "a.csv", ["x", "y"], 0)
        b = onehot_file(tmp_path / "b.csv", ["y", "x"], 0)
        run("fuse", "--probs-a", a, "--probs-b", b, "--method", "sum-softmax", "--out", tmp_path / "q.csv")
        ids, q = load_probabilities(tmp_path / "q.csv")
        assert ids == ["x", "y"]
        assert q[0, 0] == pytest.approx(math.e**2 / (math.e**2 + 7), abs=1e-12)
        assert q[0, 0] == pytest.approx(0.51351, abs=1e-5)
        assert "neutral" in (tmp_path / "q.csv").read_text().splitlines()[-1]

    def test_evaluate_truth(self, tmp_path):
        ids = [f"i{k}" for k in range(16)]
        labels = {rid: k % 8 for k, rid in enumerate(ids)}
        write_labels(tmp_path / "y.csv", labels)
        rows = [",".join(PROB_HEADER)]
        for rid, y in labels.items():
            p = ["0"] * 8
            p[y] = "1"
            rows.append(",".join([rid, *p]))
        (tmp_path / "p.csv").write_text("\n".join(rows) + "\n")
        run("evaluate", "--probs-a", tmp_path / "p.csv", "--labels", tmp_path / "y.csv", "--out", tmp_path / "e.json")
        rep = json.loads((tmp_path / "e.json").read_text())["evaluation"]
        assert rep["accuracy"] == 1.0 and rep["macro_f1"] == 1.0

    def test_workflow_and_provenance(self, tmp_path):
        outputs = full_workflow(tmp_path)
        for name in outputs:
            assert (tmp_path / name).stat().st_size > 0
        prov = read_provenance(tmp_path / "pa.csv")
        assert prov["command"] == "predict"
        assert set(prov["inputs"]) == {"landmarks", "model"}
        assert len(prov["inputs"]["model"]["sha256"]) == 64
        model = json.loads((tmp_path / "model_b.json").read_text())
        assert model["config"]["seed"] == 11
        assert model["provenance"]["config"]["train"]["rounds"] == 15
        agreement = json.loads((tmp_path / "agreement.json").read_text())["agreement"]
        assert agreement["breakdown"]["n_total"] == 48

    def test_rerun_is_byte_identical(self, tmp_path):
        (tmp_path / "one").mkdir()
        (tmp_path / "two").mkdir()
        names = full_workflow(tmp_path / "one")
        full_workflow(tmp_path / "two")
        for name in names:
            assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes(), name


class TestExitCodes:
    def test_parse_error(self, tmp_path, capsys):
        bad = tmp_path / "lm.csv"
        bad.write_text("id,width\na,1\n")
        assert main(["align", "--landmarks", str(bad), "--out", str(tmp_path / "o.csv")]) == 2
        assert "lm.csv" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["align", "--landmarks", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "o.csv")]) == 2

    def test_invalid_input(self, tmp_path):
        a = onehot_file(tmp_path / "a.csv", ["x"], 0)
        b = onehot_file(tmp_path / "b.csv", ["z"], 0)
        assert main(["fuse", "--probs-a", str(a), "--probs-b", str(b), "--out", str(tmp_path / "q.csv")]) == 3

    def test_missing_flag(self, tmp_path):
        assert main(["fuse", "--out", str(tmp_path / "q.csv")]) == 3

    def test_bad_config(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text('{"split_ratio": 1.5}')
        assert main(["split", "--config", str(cfg), "--out", str(tmp_path / "s")]) == 3
        cfg.write_text("[1, 2")
        assert main(["split", "--config", str(cfg), "--out", str(tmp_path / "s")]) == 2

    def test_degenerate_geometry(self, tmp_path, face):
        pts = face.points.copy()
        pts[27] = pts[33]  # bridge on top of the nose tip
        write_landmarks(tmp_path / "lm.csv", {"flat": LandmarkSet(pts)})
        code = main(["align", "--landmarks", str(tmp_path / "lm.csv"), "--out", str(tmp_path / "o.csv")])
        assert code == 4


class TestRunConfig:
    def test_flags_override_file(self, tmp_path):
        cfg = RunConfig.from_dict({"seed": 5, "fusion_method": "plain-sum"})
        assert cfg.train.seed == 5 and cfg.fusion_method == "plain_sum"
        cfg = cfg.override(seed=9, split_ratio=None)
        assert cfg.seed == 9 and cfg.train.seed == 9 and cfg.split_ratio == 0.8

    def test_unknown_key(self):
        with pytest.raises(InvalidInputError):
            RunConfig.from_dict({"seeds": 1})

    def test_round_trip(self):
        cfg = RunConfig(seed=4, bin_width=0.2)
        assert RunConfig.from_dict(cfg.to_dict()) == cfg
