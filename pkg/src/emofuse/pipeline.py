"""Workflow glue: run configuration, corpus-level featurization and the
subcommands behind the ``emofuse`` CLI.

Every subcommand reads its inputs, writes exactly one output (a CSV or JSON
document, or a directory for ``split``) and embeds a provenance block holding
the effective configuration and the sha256 of each input file. Outputs carry
no timestamps or absolute paths, so reruns are byte-identical.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import io as fio
from .alignment import EYE_TARGET, NOSE_TARGET, align
from .dataset import balanced_subset, dedup, manifest_from_labels, split_train_test
from .errors import EmofuseError, InvalidInputError, ParseError
from .features import (
    N_FEATURES,
    FeatureStats,
    feature_names,
    featurize,
    fit_stats,
    load_angle_table,
    standardize,
    table_digest,
)
from .fusion import METHODS, entropy, fuse
from .gbt import GbtModel, TrainConfig, feature_importance, predict_proba, train
from .labels import EMOTIONS
from .metrics import (
    DEFAULT_BIN_WIDTH,
    agreement_breakdown,
    accuracy,
    cross_method_matrix,
    evaluate,
    format_matrix,
    macro_f1,
)

SUBCOMMANDS = ("align", "featurize", "train", "predict", "importance", "fuse",
               "evaluate", "agreement", "subset", "split", "dedup")


@dataclass
class RunConfig:
    seed: int = 42
    split_ratio: float = 0.8
    bin_width: float = DEFAULT_BIN_WIDTH
    fusion_method: str = "sum_softmax"
    train: TrainConfig = field(default_factory=TrainConfig)
    nose_target: float = NOSE_TARGET
    eye_target: float = EYE_TARGET
    angle_table: str | None = None

    def __post_init__(self):
        if not 0.0 < self.split_ratio < 1.0:
            raise InvalidInputError(f"split_ratio must lie in (0, 1), got {self.split_ratio}")
        if not self.bin_width > 0:
            raise InvalidInputError(f"bin_width must be positive, got {self.bin_width}")
        self.fusion_method = self.fusion_method.replace("-", "_")
        if self.fusion_method not in METHODS:
            raise InvalidInputError(f"unknown fusion method {self.fusion_method!r}")
        if not (self.nose_target > 0 and self.eye_target > 0):
            raise InvalidInputError("alignment targets must be positive")

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["train"] = self.train.to_dict()
        if self.angle_table is not None:
            d["angle_table"] = Path(self.angle_table).name
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        unknown = set(d) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        train_d = dict(d.pop("train", {}))
        train_d.setdefault("seed", d.get("seed", 42))
        return cls(train=TrainConfig.from_dict(train_d), **d)

    @classmethod
    def from_file(cls, path):
        d = fio.read_json(path)
        if not isinstance(d, dict):
            raise ParseError("config must be a JSON object", path)
        try:
            return cls.from_dict(d)
        except TypeError as exc:
            raise ParseError(str(exc), path) from None

    def override(self, **flags):
        """Return a copy with non-None flag values applied; --seed also seeds training."""
        d = {k: v for k, v in flags.items() if v is not None}
        train_cfg = self.train
        if "seed" in d:
            train_cfg = dataclasses.replace(train_cfg, seed=d["seed"])
        return dataclasses.replace(self, train=train_cfg, **d)


def _record_error(exc, rid):
    return type(exc)(f"record {rid!r}: {exc}")


def align_corpus(landmarks, cfg):
    out = {}
    for rid, lm in landmarks.items():
        try:
            out[rid] = align(lm, cfg.nose_target, cfg.eye_target)
        except EmofuseError as exc:
            raise _record_error(exc, rid) from None
    return out


def featurize_corpus(landmarks, cfg, table):
    """Align and featurize every landmark set; returns (ids, raw feature matrix)."""
    aligned = align_corpus(landmarks, cfg)
    ids = list(aligned)
    X = np.empty((len(ids), N_FEATURES))
    for k, rid in enumerate(ids):
        try:
            X[k] = featurize(aligned[rid], table)
        except EmofuseError as exc:
            raise _record_error(exc, rid) from None
    return ids, X


def train_from_landmarks(landmarks, labels, cfg, table, stats=None):
    """Featurize the labelled faces, fit (or reuse) z-score stats and train a model."""
    missing = [rid for rid in labels if rid not in landmarks]
    if missing:
        raise InvalidInputError(f"{len(missing)} labelled ids have no landmarks, e.g. {missing[0]!r}")
    subset = {rid: landmarks[rid] for rid in labels}
    ids, X = featurize_corpus(subset, cfg, table)
    if stats is None:
        stats = fit_stats(X)
    y = np.array([labels[rid] for rid in ids])
    return train(
        standardize(X, stats), y, cfg.train, stats=stats, angle_table_hash=table_digest(table),
        alignment={"nose_target": cfg.nose_target, "eye_target": cfg.eye_target},
    )


def predict_from_landmarks(model, landmarks, table):
    if model.stats is None:
        raise InvalidInputError("model carries no feature statistics")
    if model.angle_table_hash is not None and model.angle_table_hash != table_digest(table):
        raise InvalidInputError("angle table differs from the one the model was trained with")
    align_cfg = RunConfig(**(model.alignment or {}))
    ids, X = featurize_corpus(landmarks, align_cfg, table)
    return ids, predict_proba(model, standardize(X, model.stats))


def _aligned_probs(path_a, path_b):
    ids_a, p_a = fio.load_probabilities(path_a)
    ids_b, p_b = fio.load_probabilities(path_b)
    if set(ids_a) != set(ids_b):
        raise InvalidInputError("probability files cover different ids")
    pos = {rid: k for k, rid in enumerate(ids_b)}
    return ids_a, p_a, p_b[[pos[rid] for rid in ids_a]]


def _truth_for(ids, labels_path):
    labels = fio.load_labels(labels_path)
    missing = [rid for rid in ids if rid not in labels]
    if missing:
        raise InvalidInputError(f"{len(missing)} ids lack a label, e.g. {missing[0]!r}")
    return np.array([labels[rid] for rid in ids], dtype=np.int64)


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise InvalidInputError(f"--{name.replace('_', '-')} is required for this subcommand")


def _provenance(command, cfg, args):
    inputs = {}
    for name in ("landmarks", "labels", "probs_a", "probs_b", "model", "stats", "angle_table", "config"):
        path = getattr(args, name, None)
        if path is None or (name == "stats" and getattr(args, "fit_stats", False)):
            continue
        if not Path(path).is_file():
            raise ParseError("file not found", path)
        inputs[name] = {"file": Path(path).name, "sha256": fio.file_digest(path)}
    return {"tool": "emofuse", "version": __version__, "command": command,
            "config": cfg.to_dict(), "inputs": inputs}


def run_pipeline(cfg, subcommand, args, echo=print):
    """Execute one subcommand; `args` is an argparse-style namespace of file flags."""
    if subcommand not in SUBCOMMANDS:
        raise InvalidInputError(f"unknown subcommand {subcommand!r}")
    _require(args, "out")
    out = Path(args.out)
    prov = _provenance(subcommand, cfg, args)
    table = load_angle_table(cfg.angle_table)

    if subcommand == "align":
        _require(args, "landmarks")
        aligned = align_corpus(fio.load_landmarks(args.landmarks), cfg)
        fio.write_landmarks(out, {rid: a.as_landmark_set() for rid, a in aligned.items()}, prov)
        echo(f"aligned {len(aligned)} faces -> {out}")

    elif subcommand == "featurize":
        _require(args, "landmarks")
        ids, X = featurize_corpus(fio.load_landmarks(args.landmarks), cfg, table)
        if args.fit_stats:
            _require(args, "stats")
            fio.write_json(args.stats, {"provenance": prov, "stats": fit_stats(X).to_dict()})
        elif args.stats is not None:
            X = standardize(X, _load_stats(args.stats))
        fio.write_features(out, ids, X, feature_names(table), prov)
        echo(f"featurized {len(ids)} faces ({X.shape[1]} features) -> {out}")

    elif subcommand == "train":
        _require(args, "landmarks", "labels")
        stats = _load_stats(args.stats) if args.stats is not None else None
        model = train_from_landmarks(fio.load_landmarks(args.landmarks), fio.load_labels(args.labels),
                                     cfg, table, stats)
        model.provenance = prov
        out.write_text(model.to_json(), encoding="utf-8", newline="\n")
        echo(f"trained {model.n_rounds} rounds, final train log-loss {model.train_log_loss[-1]:.4f} -> {out}")

    elif subcommand == "predict":
        _require(args, "landmarks", "model")
        model = load_model(args.model)
        ids, probs = predict_from_landmarks(model, fio.load_landmarks(args.landmarks), table)
        fio.write_probabilities(out, ids, probs, provenance=prov)
        echo(f"predicted {len(ids)} faces -> {out}")

    elif subcommand == "importance":
        _require(args, "model")
        rep = feature_importance(load_model(args.model))
        names = feature_names(table)
        d = rep.to_dict()
        d["important_names"] = [names[i] for i in rep.important] if len(names) == len(rep.gain) else None
        fio.write_json(out, {"provenance": prov, "importance": d})
        echo(f"{d['n_important']} important features "
             f"({rep.n_important_distances} distances, {rep.n_important_angles} angles) -> {out}")

    elif subcommand == "fuse":
        _require(args, "probs_a", "probs_b")
        ids, p_a, p_b = _aligned_probs(args.probs_a, args.probs_b)
        fused = fuse(p_a, p_b, cfg.fusion_method)
        fio.write_probabilities(out, ids, fused.q, np.atleast_1d(fused.choice), prov)
        echo(f"fused {len(ids)} rows with {fused.method} -> {out}")

    elif subcommand == "evaluate":
        _require(args, "probs_a", "labels")
        ids, probs = fio.load_probabilities(args.probs_a)
        truth = _truth_for(ids, args.labels)
        preds = np.argmax(probs, axis=1)
        report = evaluate(preds, truth, entropy(probs), cfg.bin_width)
        fio.write_json(out, {"provenance": prov, "evaluation": report.to_dict()})
        echo(f"accuracy {report.accuracy:.4f}  macro-F1 {report.macro_f1:.4f}  (n={len(ids)})")
        echo(format_matrix(report.confusion))

    elif subcommand == "agreement":
        _require(args, "probs_a", "probs_b", "labels")
        ids, p_a, p_b = _aligned_probs(args.probs_a, args.probs_b)
        truth = _truth_for(ids, args.labels)
        doc = agreement_document(p_a, p_b, truth)
        fio.write_json(out, {"provenance": prov, "agreement": doc})
        rep = doc["breakdown"]
        echo(f"agree {rep['n_agree']}  disagree {rep['n_disagree']}  "
             f"(higher right {rep['n_higher_conf_correct']}, lower right {rep['n_lower_conf_correct']}, "
             f"neither {rep['n_neither_correct']})  kappa {rep['kappa']:.4f}")

    elif subcommand == "subset":
        _require(args, "labels")
        recs = balanced_subset(manifest_from_labels(fio.load_labels(args.labels)), cfg.seed)
        fio.write_labels(out, {r.id: r.label for r in recs}, prov)
        echo(f"kept {len(recs)} records ({len(recs) // len(EMOTIONS)} per class) -> {out}")

    elif subcommand == "split":
        _require(args, "labels")
        train_recs, test_recs = split_train_test(
            manifest_from_labels(fio.load_labels(args.labels)), cfg.split_ratio, cfg.seed)
        out.mkdir(parents=True, exist_ok=True)
        fio.write_labels(out / "train.csv", {r.id: r.label for r in train_recs}, prov)
        fio.write_labels(out / "test.csv", {r.id: r.label for r in test_recs}, prov)
        echo(f"train {len(train_recs)} / test {len(test_recs)} -> {out}")

    elif subcommand == "dedup":
        _require(args, "labels", "landmarks")
        labels = fio.load_labels(args.labels)
        kept = dedup(manifest_from_labels(labels), fio.load_landmarks(args.landmarks))
        fio.write_labels(out, {r.id: r.label for r in kept}, prov)
        echo(f"kept {len(kept)} of {len(labels)} records -> {out}")
    return 0


def agreement_document(p_a, p_b, truth):
    """Everything needed to compare two branches and their fusions on shared items."""
    preds_a = np.argmax(p_a, axis=1)
    preds_b = np.argmax(p_b, axis=1)
    rep = agreement_breakdown(preds_a, preds_b, p_a.max(axis=1), p_b.max(axis=1), truth)
    fused = {}
    for method in METHODS:
        choice = np.atleast_1d(fuse(p_a, p_b, method).choice)
        fused[method] = {"accuracy": accuracy(choice, truth), "macro_f1": macro_f1(choice, truth)[0]}
    return {
        "breakdown": rep.to_dict(),
        "accuracy_a": accuracy(preds_a, truth),
        "accuracy_b": accuracy(preds_b, truth),
        "n_correct_a": int(np.sum(preds_a == truth)),
        "n_correct_b": int(np.sum(preds_b == truth)),
        "cross_method": cross_method_matrix(preds_a, preds_b).to_dict(),
        "fused": fused,
    }


def _load_stats(path):
    d = fio.read_json(path)
    try:
        return FeatureStats.from_dict(d.get("stats", d))
    except (KeyError, TypeError, AttributeError):
        raise ParseError("not a feature statistics document", path) from None


def load_model(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ParseError("file not found", path) from None
    try:
        return GbtModel.from_json(text)
    except ValueError as exc:
        if isinstance(exc, EmofuseError):
            raise
        raise ParseError(f"invalid model file: {exc}", path) from None
    except (KeyError, TypeError) as exc:
        raise ParseError(f"invalid model file: {exc}", path) from None


def save_model(model, path):
    Path(path).write_text(model.to_json(), encoding="utf-8", newline="\n")

