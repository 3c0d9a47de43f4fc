"""Command-line surface: fit, predict, evaluate, compare, synth.

Every command reads score tensors through a JSON manifest, writes outputs
atomically, and reports failures as one machine-readable JSON object on
stderr with a nonzero exit status. All randomness (splits, generation)
flows from the --seed flag.
"""

import argparse
import json
import sys

import numpy as np

from . import io
from .combiners import (
    avg_after_softmax,
    avg_before_softmax,
    boc_ensemble,
    boc_fit,
    boc_predict,
    discrete_sl_predict,
    discrete_sl_select,
    vote_shares,
)
from .core import (
    METHOD_AVG_AFTER,
    METHOD_AVG_BEFORE,
    METHOD_BOC,
    METHOD_DISCRETE_SL,
    METHOD_MAJORITY_VOTE,
    METHOD_SUPER_LEARNER,
    SIMPLEX,
    FittedEnsemble,
    LabelVector,
    ScoreTensor,
    l1_ball,
)
from .cvharness import COMPARE_METHODS, FoldedScores, compare_all, cv_sl_fit, make_split
from .errors import (
    DimensionMismatchError,
    EnsembleError,
    LearnerNameMismatchError,
    ManifestError,
    UnsupportedScaleError,
)
from .metrics import evaluate
from .superlearner import sl_predict

METHOD_FLAGS = {
    "superlearner": METHOD_SUPER_LEARNER,
    "discrete-sl": METHOD_DISCRETE_SL,
    "boc": METHOD_BOC,
    "avg-before-softmax": METHOD_AVG_BEFORE,
    "avg-after-softmax": METHOD_AVG_AFTER,
    "majority-vote": METHOD_MAJORITY_VOTE,
}

_SL_SCALES = {"before-softmax": "score", "logit": "logit"}
_BOC_SCALES = {"before-softmax": "before_softmax", "after-softmax": "after_softmax"}


def _constraint_from(args):
    if args.constraint == "l1":
        return l1_ball(args.l1_bound)
    return SIMPLEX


def _build_folds(scores, labels, folds, seed):
    if folds <= 1:
        return FoldedScores.single(scores, labels)
    split = make_split(scores.n_units, folds, seed=seed, labels=labels)
    return FoldedScores.from_split(scores, labels, split)


def _require_labels(labels, action):
    if labels is None:
        raise ManifestError(f"{action} requires labels_path in the manifest")
    return labels


def cmd_fit(args):
    scores, labels, names = io.load_scores(args.manifest)
    method = METHOD_FLAGS[args.method]

    if method == METHOD_SUPER_LEARNER:
        _require_labels(labels, "fitting superlearner")
        scale = _SL_SCALES.get(args.scale or "before-softmax")
        if scale is None:
            raise UnsupportedScaleError(
                "superlearner supports --scale before-softmax or logit"
            )
        folds = _build_folds(scores, labels, args.folds, args.seed)
        fitted = cv_sl_fit(folds, constraint=_constraint_from(args), scale=scale,
                           learner_names=names)
    elif method == METHOD_DISCRETE_SL:
        _require_labels(labels, "fitting discrete-sl")
        val_s, val_y = _build_folds(scores, labels, args.folds, args.seed).concat()
        fitted = discrete_sl_select(val_s, val_y, loss=args.loss,
                                    learner_names=names)
    elif method == METHOD_BOC:
        _require_labels(labels, "fitting boc")
        scale = _BOC_SCALES.get(args.scale or "after-softmax")
        if scale is None:
            raise UnsupportedScaleError(
                "boc supports --scale before-softmax or after-softmax"
            )
        val_s, val_y = _build_folds(scores, labels, args.folds, args.seed).concat()
        fitted = boc_ensemble(boc_fit(val_s, val_y), scale=scale,
                              learner_names=names, n_classes=scores.n_classes)
    else:
        fitted = FittedEnsemble(method=method, learner_names=names,
                                n_classes=scores.n_classes)

    io.save_model(args.out, fitted)
    print(f"wrote {args.out}")
    return 0


def predict_with(fitted: FittedEnsemble, scores: ScoreTensor) -> np.ndarray:
    """Per-unit class probabilities (vote shares for majority voting)."""
    if fitted.method == METHOD_SUPER_LEARNER:
        return sl_predict(scores, fitted)
    if fitted.method == METHOD_DISCRETE_SL:
        return discrete_sl_predict(scores, fitted)
    if fitted.method == METHOD_BOC:
        return boc_predict(fitted, scores, fitted.scale)
    if fitted.method == METHOD_AVG_BEFORE:
        return avg_before_softmax(scores)
    if fitted.method == METHOD_AVG_AFTER:
        return avg_after_softmax(scores)
    return vote_shares(scores)


def _check_model_against(fitted, scores, names):
    if fitted.learner_names is not None and tuple(names) != fitted.learner_names:
        raise LearnerNameMismatchError(
            f"model was fitted on learners {list(fitted.learner_names)}, "
            f"manifest provides {list(names)}"
        )
    if fitted.n_classes is not None and fitted.n_classes != scores.n_classes:
        raise DimensionMismatchError(
            f"model expects {fitted.n_classes} classes, "
            f"manifest provides {scores.n_classes}"
        )


def cmd_predict(args):
    scores, _, names = io.load_scores(args.manifest)
    fitted = io.load_model(args.model)
    _check_model_against(fitted, scores, names)
    io.save_matrix_csv(args.out, predict_with(fitted, scores))
    print(f"wrote {args.out}")
    return 0


def cmd_evaluate(args):
    scores, labels, _ = io.load_scores(args.manifest)
    labels = _require_labels(labels, "evaluate")
    probs = io.load_matrix_csv(args.pred, what="predictions file")
    if probs.shape[0] != scores.n_units:
        raise DimensionMismatchError(
            f"{probs.shape[0]} prediction rows for {scores.n_units} units"
        )
    report = evaluate(probs, labels)
    doc = io.report_to_doc(report)
    if args.out:
        io.save_report(args.out, report)
        print(f"wrote {args.out}")
    else:
        print(json.dumps(doc, indent=2))
    return 0


def _format_compare_table(reports):
    lines = [f"{'method':<22}{'accuracy':>10}{'cross_entropy':>16}{'n':>8}"]
    for name in COMPARE_METHODS:
        r = reports[name]
        ce = "-" if r.mean_cross_entropy is None else f"{r.mean_cross_entropy:.6f}"
        lines.append(f"{name:<22}{r.accuracy:>10.4f}{ce:>16}{r.n:>8d}")
    return "\n".join(lines)


def cmd_compare(args):
    scores, labels, names = io.load_scores(args.manifest)
    labels = _require_labels(labels, "compare")
    if args.test_manifest:
        test_s, test_y, test_names = io.load_scores(args.test_manifest)
        if tuple(test_names) != tuple(names):
            raise LearnerNameMismatchError(
                f"test manifest learners {list(test_names)} do not match "
                f"fit manifest learners {list(names)}"
            )
        test_y = _require_labels(test_y, "compare")
        folds = _build_folds(scores, labels, args.folds, args.seed)
    else:
        split = make_split(scores.n_units, 1, seed=args.seed, labels=labels)
        folds = FoldedScores.from_split(scores, labels, split)
        hold = split.holdout_indices()
        test_s = ScoreTensor(scores.values[hold])
        test_y = LabelVector(labels.labels[hold], labels.n_classes)

    reports = compare_all(folds, test_s, test_y,
                          constraint=_constraint_from(args), learner_names=names)
    print(_format_compare_table(reports))
    if args.out:
        methods = {}
        for name in COMPARE_METHODS:
            doc = io.report_to_doc(reports[name])
            del doc["version"]
            methods[name] = doc
        io.save_json(args.out, {"version": io.FORMAT_VERSION, "methods": methods})
        print(f"wrote {args.out}")
    return 0


def cmd_synth(args):
    spec, names = io.load_genspec(args.spec, seed=args.seed)
    manifest = io.write_synth_dataset(args.out, spec, names)
    print(f"wrote {manifest}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ensemblex",
        description="Fit and evaluate ensemble combinations of base-learner "
        "score files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a combination method on a manifest")
    fit.add_argument("--manifest", required=True)
    fit.add_argument("--method", required=True, choices=sorted(METHOD_FLAGS))
    fit.add_argument("--loss", choices=["nll", "error"], default="nll")
    fit.add_argument("--scale",
                     choices=["before-softmax", "after-softmax", "logit"])
    fit.add_argument("--constraint", choices=["simplex", "l1"], default="simplex")
    fit.add_argument("--l1-bound", type=float, default=5.0)
    fit.add_argument("--folds", type=int, default=1)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--out", required=True)
    fit.set_defaults(func=cmd_fit)

    predict = sub.add_parser("predict", help="write per-unit probabilities")
    predict.add_argument("--manifest", required=True)
    predict.add_argument("--model", required=True)
    predict.add_argument("--out", required=True)
    predict.set_defaults(func=cmd_predict)

    ev = sub.add_parser("evaluate", help="score a predictions file")
    ev.add_argument("--manifest", required=True)
    ev.add_argument("--pred", required=True)
    ev.add_argument("--out")
    ev.set_defaults(func=cmd_evaluate)

    compare = sub.add_parser(
        "compare", help="fit every method and tabulate test metrics"
    )
    compare.add_argument("--manifest", required=True)
    compare.add_argument("--test-manifest")
    compare.add_argument("--constraint", choices=["simplex", "l1"],
                         default="simplex")
    compare.add_argument("--l1-bound", type=float, default=5.0)
    compare.add_argument("--folds", type=int, default=1)
    compare.add_argument("--seed", type=int, default=0)
    compare.add_argument("--out")
    compare.set_defaults(func=cmd_compare)

    synth = sub.add_parser("synth", help="generate a synthetic dataset")
    synth.add_argument("--spec", required=True)
    synth.add_argument("--seed", type=int)
    synth.add_argument("--out", required=True)
    synth.set_defaults(func=cmd_synth)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (EnsembleError, OSError) as e:
        json.dump({"error": type(e).__name__, "message": str(e)}, sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
