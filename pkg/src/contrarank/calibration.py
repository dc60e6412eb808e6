"""Binary logistic-regression calibration over QA and NLI confidence scores.

A calibration model predicts whether an answer is correct from any subset of
the four signals {QA, E, C, N} (QA model confidence, entailment,
contradiction, neutral). Training minimizes the L2-regularized negative
log-likelihood with the intercept left unregularized, using full-batch
Newton steps with step-halving: the problems are tiny (at most four
features), so second-order optimization is cheap and exactly deterministic.

Features are consumed raw in [0, 1]; no standardization is applied.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .analytics import candidate_is_correct
from .errors import ConfigError, DegenerateTrainingError, InputError
from .records import MULTIPLE_CHOICE, QuestionRecord, ScoredCandidate

CANONICAL_FEATURES = ("QA", "E", "C", "N")


@dataclass(frozen=True)
class FeatureSet:
    """Ordered subset of {QA, E, C, N} in canonical order."""

    members: tuple[str, ...]

    def __post_init__(self):
        seen = set()
        for m in self.members:
            if m not in CANONICAL_FEATURES:
                raise ConfigError(f"unknown feature {m!r}")
            if m in seen:
                raise ConfigError(f"duplicate feature {m!r}")
            seen.add(m)
        if not self.members:
            raise ConfigError("feature set is empty")
        ordered = tuple(f for f in CANONICAL_FEATURES if f in seen)
        object.__setattr__(self, "members", ordered)

    @classmethod
    def parse(cls, spec: str) -> "FeatureSet":
        """Parse "QA+E+C" / "qa,e,c" style feature lists."""
        parts = [p.strip().upper() for p in spec.replace(",", "+").split("+") if p.strip()]
        return cls(tuple(parts))

    @property
    def name(self) -> str:
        return "+".join(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, ...]


@dataclass
class TrainConfig:
    reg_strength: float = 1.0
    max_iters: int = 1000
    tol: float = 1e-8  # gradient-norm stopping rule


@dataclass
class CalibrationModel:
    feature_set: FeatureSet
    intercept: float
    weights: tuple[float, ...]
    training_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.weights) != len(self.feature_set):
            raise InputError(
                f"weights ({len(self.weights)}) do not match "
                f"feature set {self.feature_set.name}"
            )


def extract_features(candidate: ScoredCandidate, fs: FeatureSet) -> FeatureVector:
    """Project a candidate's scores onto a feature set, in canonical order."""
    mapping = {
        "QA": candidate.qa_confidence,
        "E": candidate.nli.entail,
        "C": candidate.nli.contradict,
        "N": candidate.nli.neutral,
    }
    return FeatureVector(tuple(mapping[m] for m in fs.members))


def build_training_examples(
    records: Sequence[QuestionRecord], fs: FeatureSet
) -> list[tuple[FeatureVector, bool]]:
    """Labeled calibration examples from holdout questions.

    Multiple choice: every candidate of every question contributes one
    example, labeled by whether it is the gold choice. Extractive: the QA
    model's produced answer contributes one example, labeled by the token-F1
    correctness threshold.
    """
    examples = []
    for record in records:
        if record.task_kind == MULTIPLE_CHOICE:
            indices: Iterable[int] = range(len(record.candidates))
        else:
            indices = [max(range(len(record.candidates)),
                           key=lambda i: record.candidates[i].qa_confidence)]
        for i in indices:
            examples.append(
                (extract_features(record.candidates[i], fs), candidate_is_correct(record, i))
            )
    return examples


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def regularized_nll(
    beta: np.ndarray, X: np.ndarray, y: np.ndarray, reg_strength: float
) -> tuple[float, np.ndarray]:
    """Loss and gradient of the penalized objective at ``beta``.

    ``beta[0]`` is the intercept and is excluded from the L2 penalty. X must
    not carry a ones column; it is added here.
    """
    Xa = np.hstack([np.ones((X.shape[0], 1)), X])
    z = Xa @ beta
    # log(1 + e^z) - y z, computed stably
    nll = float(np.sum(np.logaddexp(0.0, z) - y * z))
    penalty_vec = np.concatenate([[0.0], beta[1:]])
    loss = nll + 0.5 * reg_strength * float(penalty_vec[1:] @ penalty_vec[1:])
    p = _sigmoid(z)
    grad = Xa.T @ (p - y) + reg_strength * penalty_vec
    return loss, grad


def train_calibration(
    holdout: Sequence[tuple[FeatureVector, bool]],
    fs: FeatureSet,
    config: TrainConfig | None = None,
    dataset_id: str = "",
) -> CalibrationModel:
    """Fit a calibration model on labeled feature vectors.

    Deterministic given inputs and config: starts from zero coefficients and
    takes full Newton steps, halving the step until the loss decreases, until
    the gradient norm falls under ``config.tol`` or ``config.max_iters`` is
    reached.
    """
    config = config or TrainConfig()
    if not holdout:
        raise InputError("holdout is empty")
    X = np.array([fv.values for fv, _ in holdout], dtype=float)
    y = np.array([1.0 if label else 0.0 for _, label in holdout])
    if X.shape[1] != len(fs):
        raise InputError(
            f"feature vectors of length {X.shape[1]} do not match feature set {fs.name}"
        )
    if not np.all(np.isfinite(X)):
        raise InputError("holdout contains non-finite feature values")
    if y.min() == y.max():
        raise DegenerateTrainingError(
            "holdout contains a single label class; enlarge the holdout so both "
            "correct and incorrect answers are present"
        )

    lam = float(config.reg_strength)
    n_params = X.shape[1] + 1
    beta = np.zeros(n_params)
    penalty_diag = np.concatenate([[0.0], np.full(X.shape[1], lam)])
    Xa = np.hstack([np.ones((X.shape[0], 1)), X])

    loss, grad = regularized_nll(beta, X, y, lam)
    iterations = 0
    for iterations in range(1, config.max_iters + 1):
        if float(np.linalg.norm(grad)) <= config.tol:
            iterations -= 1
            break
        p = _sigmoid(Xa @ beta)
        w = p * (1.0 - p)
        hessian = (Xa * w[:, None]).T @ Xa + np.diag(penalty_diag)
        try:
            step = np.linalg.solve(hessian, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hessian, grad, rcond=None)[0]
        t = 1.0
        while t > 1e-12:
            candidate = beta - t * step
            new_loss, new_grad = regularized_nll(candidate, X, y, lam)
            if new_loss < loss:
                beta, loss, grad = candidate, new_loss, new_grad
                break
            t /= 2.0
        else:
            break  # no decreasing step exists: numerically converged

    weights = tuple(float(v) for v in beta[1:])
    intercept = float(beta[0])
    model = CalibrationModel(
        feature_set=fs,
        intercept=intercept,
        weights=weights,
        training_meta={
            "dataset_id": dataset_id,
            "holdout_size": len(holdout),
            "iterations": iterations,
            "final_loss": loss,
            "regularization_strength": lam,
        },
    )
    correct = sum(
        1
        for (fv, label) in holdout
        if (predict(model, fv) > 0.5) == bool(label)
    )
    model.training_meta["holdout_accuracy"] = correct / len(holdout)
    return model


def predict(model: CalibrationModel, x: FeatureVector) -> float:
    """Predicted probability that the answer is correct."""
    if len(x.values) != len(model.weights):
        raise InputError(
            f"feature vector of length {len(x.values)} does not match "
            f"model over {model.feature_set.name}"
        )
    z = model.intercept + float(np.dot(model.weights, x.values))
    return float(_sigmoid(np.array([z]))[0])


@dataclass(frozen=True)
class CoefficientRow:
    feature_set_name: str
    coefficients: dict  # feature name -> weight, absent features omitted
    intercept: float
    holdout_accuracy: float | None


def coefficient_report(models: Sequence[CalibrationModel]) -> list[CoefficientRow]:
    """One row per model: per-feature coefficients plus holdout accuracy."""
    rows = []
    for model in models:
        rows.append(
            CoefficientRow(
                feature_set_name=model.feature_set.name,
                coefficients=dict(zip(model.feature_set.members, model.weights)),
                intercept=model.intercept,
                holdout_accuracy=model.training_meta.get("holdout_accuracy"),
            )
        )
    return rows


def save_model(model: CalibrationModel, path: str | Path) -> None:
    payload = {
        "feature_set": list(model.feature_set.members),
        "intercept": model.intercept,
        "weights": list(model.weights),
        "training_meta": model.training_meta,
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> CalibrationModel:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    return CalibrationModel(
        feature_set=FeatureSet(tuple(obj["feature_set"])),
        intercept=float(obj["intercept"]),
        weights=tuple(float(w) for w in obj["weights"]),
        training_meta=dict(obj.get("training_meta", {})),
    )
