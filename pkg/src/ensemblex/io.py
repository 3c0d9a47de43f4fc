"""File formats: score manifests, CSV tensors, model and report documents.

Scores travel as headerless CSV, one unit per row, K columns, the same row
order in every learner's file. A JSON manifest names the learners and ties
the files together. Models and reports are versioned JSON documents; all
writes go through a temp file and an atomic rename, and floats serialize
via repr so loading reproduces them bit for bit.
"""

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import (
    PROB_FLOOR,
    Constraint,
    FitInfo,
    FittedEnsemble,
    LabelVector,
    ScoreTensor,
    WeightVector,
)
from .errors import (
    ClassCountMismatchError,
    DimensionMismatchError,
    FormatVersionError,
    ManifestError,
    MissingFileError,
    NonFiniteValueError,
    NormalizationError,
    RaggedRowError,
)
from .metrics import EvalReport
from .synthgen import (
    BayesOracle,
    CorrelatedWith,
    GenSpec,
    Noisy,
    OverConfident,
    Weak,
    generate,
    learner_name,
)

FORMAT_VERSION = "1"

SCALE_RAW = "raw_scores"
SCALE_PROB = "probabilities"


def _atomic_write_text(path, text):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def save_json(path, doc):
    """Write any JSON document atomically with the standard layout."""
    _atomic_write_text(path, _dump_json(doc))


def _read_json(path, what):
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"{what} not found: {path}")
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ManifestError(f"{what} {path} is not valid JSON: {e}") from e


def _check_version(doc, path, what):
    version = doc.get("version")
    if version is None:
        raise FormatVersionError(f"{what} {path} lacks the mandatory version field")
    if version != FORMAT_VERSION:
        raise FormatVersionError(
            f"{what} {path} has version {version!r}; this build reads "
            f"version {FORMAT_VERSION!r}"
        )


def load_matrix_csv(path, what="scores file"):
    """Headerless numeric CSV as a 2-d float array."""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"{what} not found: {path}")
    try:
        values = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as e:
        if "number of columns changed" in str(e) or "Wrong number of columns" in str(e):
            raise RaggedRowError(f"{what} {path} has ragged rows: {e}") from e
        raise ManifestError(f"{what} {path} failed to parse: {e}") from e
    if values.size == 0:
        raise ManifestError(f"{what} {path} is empty")
    return values


def _load_learner_scores(path, scale, n_classes, name):
    values = load_matrix_csv(path, what=f"scores file for {name!r}")
    if values.shape[1] != n_classes:
        raise ClassCountMismatchError(
            f"{path} has {values.shape[1]} columns but the manifest declares "
            f"{n_classes} classes"
        )
    if not np.all(np.isfinite(values)):
        raise NonFiniteValueError(f"{path} contains non-finite values")
    if scale == SCALE_PROB:
        sums = values.sum(axis=1)
        if values.min() < 0.0 or values.max() > 1.0 or np.abs(sums - 1.0).max() > 1e-6:
            bad = int(np.abs(sums - 1.0).argmax())
            raise NormalizationError(
                f"{path} row {bad} is not a probability distribution "
                f"(sum {sums[bad]!r})"
            )
        values = np.log(np.maximum(values, PROB_FLOOR))
    elif scale != SCALE_RAW:
        raise ManifestError(f"unknown score scale {scale!r} for learner {name!r}")
    return values


def load_labels_csv(path, n_classes):
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"labels file not found: {path}")
    try:
        raw = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=1)
    except ValueError as e:
        raise ManifestError(f"labels file {path} failed to parse: {e}") from e
    if raw.ndim != 1:
        raise ManifestError(f"labels file {path} must hold one label per row")
    if not np.all(np.isfinite(raw)) or not np.all(raw == np.floor(raw)):
        raise ManifestError(f"labels file {path} must hold integers")
    return LabelVector(raw.astype(np.int64), n_classes)


def load_scores(manifest_path):
    """Load a manifest and everything it references.

    Returns (ScoreTensor, LabelVector or None, learner name tuple); the
    learner axis follows manifest order.
    """
    manifest_path = Path(manifest_path)
    doc = _read_json(manifest_path, "manifest")
    _check_version(doc, manifest_path, "manifest")
    try:
        n_classes = int(doc["n_classes"])
        entries = list(doc["learners"])
    except KeyError as e:
        raise ManifestError(f"manifest {manifest_path} lacks key {e}") from e
    if not entries:
        raise ManifestError(f"manifest {manifest_path} lists no learners")

    base = manifest_path.parent
    names, blocks = [], []
    for idx, entry in enumerate(entries):
        try:
            name = str(entry["name"])
            rel = entry["scores_path"]
        except (KeyError, TypeError) as e:
            raise ManifestError(
                f"manifest learner {idx} needs 'name' and 'scores_path'"
            ) from e
        scale = entry.get("scale", SCALE_RAW)
        block = _load_learner_scores(base / rel, scale, n_classes, name)
        if blocks and block.shape[0] != blocks[0].shape[0]:
            raise DimensionMismatchError(
                f"{rel} has {block.shape[0]} rows but earlier learners "
                f"have {blocks[0].shape[0]}"
            )
        names.append(name)
        blocks.append(block)

    tensor = ScoreTensor(np.stack(blocks, axis=1))
    labels = None
    if doc.get("labels_path"):
        labels = load_labels_csv(base / doc["labels_path"], n_classes)
        if len(labels) != tensor.n_units:
            raise DimensionMismatchError(
                f"{len(labels)} labels for {tensor.n_units} score rows"
            )
    return tensor, labels, tuple(names)


def save_manifest(path, n_classes, learners, labels_path=None):
    """Write a manifest; learners is a list of (name, scores_path, scale)."""
    doc = {
        "version": FORMAT_VERSION,
        "n_classes": int(n_classes),
        "labels_path": labels_path,
        "learners": [
            {"name": name, "scores_path": rel, "scale": scale}
            for name, rel, scale in learners
        ],
    }
    _atomic_write_text(path, _dump_json(doc))


def format_matrix_csv(values):
    """CSV text with repr floats, so parsing returns identical bits."""
    rows = (",".join(repr(float(v)) for v in row) for row in np.asarray(values))
    return "\n".join(rows) + "\n"


def save_matrix_csv(path, values):
    _atomic_write_text(path, format_matrix_csv(values))


def save_labels_csv(path, labels: LabelVector):
    _atomic_write_text(path, "\n".join(str(int(v)) for v in labels.labels) + "\n")


def save_model(path, fitted: FittedEnsemble):
    """Serialize a fitted method as a versioned JSON document."""
    info = None
    if fitted.fit_info is not None:
        info = {
            "n_iters": int(fitted.fit_info.n_iters),
            "converged": bool(fitted.fit_info.converged),
            "final_loss": float(fitted.fit_info.final_loss),
        }
    constraint = None
    weights = None
    if fitted.weights is not None:
        c = fitted.weights.constraint
        constraint = {"kind": c.kind, "bound": c.bound}
        weights = [float(w) for w in fitted.weights.weights]
    doc = {
        "version": FORMAT_VERSION,
        "method": fitted.method,
        "n_classes": fitted.n_classes,
        "learner_names": list(fitted.learner_names)
        if fitted.learner_names is not None
        else None,
        "scale": fitted.scale,
        "loss": fitted.loss,
        "constraint": constraint,
        "weights": weights,
        "selected_learner": fitted.selected_learner,
        "fit_info": info,
    }
    _atomic_write_text(path, _dump_json(doc))


def load_model(path) -> FittedEnsemble:
    doc = _read_json(path, "model file")
    _check_version(doc, path, "model file")
    weights = None
    if doc.get("weights") is not None:
        cdoc = doc.get("constraint") or {"kind": "simplex", "bound": None}
        constraint = Constraint(cdoc["kind"], cdoc.get("bound"))
        weights = WeightVector(np.array(doc["weights"], dtype=np.float64), constraint)
    info = None
    if doc.get("fit_info") is not None:
        idoc = doc["fit_info"]
        info = FitInfo(
            loss_trace=np.array([idoc["final_loss"]]),
            n_iters=int(idoc["n_iters"]),
            converged=bool(idoc["converged"]),
        )
    names = doc.get("learner_names")
    return FittedEnsemble(
        method=doc["method"],
        weights=weights,
        selected_learner=doc.get("selected_learner"),
        scale=doc.get("scale"),
        loss=doc.get("loss"),
        learner_names=tuple(names) if names is not None else None,
        n_classes=doc.get("n_classes"),
        fit_info=info,
    )


def report_to_doc(report: EvalReport):
    per_class = [
        None if np.isnan(v) else float(v) for v in report.per_class_accuracy
    ]
    return {
        "version": FORMAT_VERSION,
        "n": int(report.n),
        "accuracy": float(report.accuracy),
        "mean_cross_entropy": None
        if report.mean_cross_entropy is None
        else float(report.mean_cross_entropy),
        "per_class_accuracy": per_class,
        "confusion": [[int(v) for v in row] for row in report.confusion],
    }


def save_report(path, report: EvalReport):
    _atomic_write_text(path, _dump_json(report_to_doc(report)))


_LEARNER_PARSERS = {
    "bayes_oracle": lambda e: BayesOracle(),
    "noisy": lambda e: Noisy(noise_sd=float(e["noise_sd"])),
    "over_confident": lambda e: OverConfident(
        temperature=float(e["temperature"]),
        noise_sd=float(e.get("noise_sd", 0.0)),
    ),
    "weak": lambda e: Weak(signal_shrink=float(e["signal_shrink"])),
    "correlated_with": lambda e: CorrelatedWith(
        base=int(e["base"]), mix=float(e["mix"])
    ),
}


def load_genspec(path, seed=None):
    """Parse a generator spec document. Returns (GenSpec, learner names)."""
    doc = _read_json(path, "generator spec")
    _check_version(doc, path, "generator spec")
    try:
        entries = list(doc["learners"])
        learners = []
        for entry in entries:
            kind = entry["kind"]
            if kind not in _LEARNER_PARSERS:
                raise ManifestError(f"unknown learner kind {kind!r}")
            learners.append(_LEARNER_PARSERS[kind](entry))
        spec = GenSpec(
            n_units=int(doc["n_units"]),
            n_classes=int(doc["n_classes"]),
            learners=tuple(learners),
            seed=int(doc["seed"] if seed is None else seed),
            class_sep=float(doc.get("class_sep", GenSpec.class_sep)),
            hard_labels=bool(doc.get("hard_labels", False)),
        )
    except KeyError as e:
        raise ManifestError(f"generator spec {path} lacks key {e}") from e
    names = tuple(
        str(entry.get("name", learner_name(j, spec.learners[j])))
        for j, entry in enumerate(entries)
    )
    return spec, names


def write_synth_dataset(out_dir, spec: GenSpec, names):
    """Materialize one generated dataset as CSV files plus a manifest.

    Returns the manifest path. The exact Bayes scores land in
    bayes_scores.csv next to the manifest but are not listed in it.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scores, labels, bayes = generate(spec)
    save_labels_csv(out_dir / "labels.csv", labels)
    save_matrix_csv(out_dir / "bayes_scores.csv", bayes.values[:, 0, :])
    entries = []
    for j, name in enumerate(names):
        rel = f"scores_{j}_{name}.csv"
        save_matrix_csv(out_dir / rel, scores.values[:, j, :])
        entries.append((name, rel, SCALE_RAW))
    manifest_path = out_dir / "manifest.json"
    save_manifest(manifest_path, spec.n_classes, entries, labels_path="labels.csv")
    return manifest_path
