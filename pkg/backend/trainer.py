"""
Trainer interface and Behavioral Cloning on recorded trajectories
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Type

import numpy as np

from backend.config import CURVATURE_ITERATIONS, GRAD_CHECK_FLOOR, GRAD_CHECK_STEP, SCALE_FLOOR
from backend.policy import PolicyModel, featurize_fields, policy_forward
from shared.constants import Action, MOVES
from shared.exceptions import ActionOutOfSpace, EmptyDataset, UnknownTrainer
from shared.models import TrainConfig, TrajectoryRecord

logger = logging.getLogger(__name__)

# recollect(model, round) -> extra trajectories gathered with the current policy
Recollect = Callable[[PolicyModel, int], List[TrajectoryRecord]]


@dataclass
class TrainingResult:
    model: PolicyModel
    losses: List[float] = field(default_factory=list)
    initial_loss: float = 0.0
    learning_rates: List[float] = field(default_factory=list)


def build_pairs(dataset: Sequence[TrajectoryRecord],
                action_space: Sequence[Action] = MOVES) -> Tuple[np.ndarray, np.ndarray]:
    """Pool every (state, action) pair of every trajectory into a feature matrix and labels"""
    index = {Action(a): i for i, a in enumerate(action_space)}
    features, labels = [], []
    for traj in dataset:
        for fields, action in traj.pairs():
            if action not in index:
                raise ActionOutOfSpace(action)
            features.append(featurize_fields(fields))
            labels.append(index[action])
    if not labels:
        raise EmptyDataset()
    return np.vstack(features), np.asarray(labels, dtype=np.int64)


def cross_entropy(model: PolicyModel, features: np.ndarray, labels: np.ndarray) -> float:
    """Mean of -log pi(a* | s)"""
    logits = features @ model.weights.T + model.bias
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    return float(-log_probs[np.arange(len(labels)), labels].mean())


def cross_entropy_grad(model: PolicyModel, features: np.ndarray,
                       labels: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Gradient of the mean cross-entropy with respect to weights and bias"""
    probs = policy_forward(model, features)
    probs[np.arange(len(labels)), labels] -= 1.0
    probs /= len(labels)
    return probs.T @ features, probs.sum(axis=0)


@dataclass
class Standardizer:
    """Per-feature centering and scaling, folded back into raw weights after training"""
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, features: np.ndarray) -> 'Standardizer':
        scale = features.std(axis=0)
        # constant features stay centered at zero and never receive a gradient
        scale[scale < SCALE_FLOOR] = 1.0
        return cls(features.mean(axis=0), scale)

    def transform(self, features: np.ndarray) -> np.ndarray:
        return (features - self.mean) / self.scale

    def to_standard(self, model: PolicyModel) -> PolicyModel:
        return PolicyModel(model.weights * self.scale, model.bias + model.weights @ self.mean,
                           model.action_space)

    def to_raw(self, model: PolicyModel) -> PolicyModel:
        weights = model.weights / self.scale
        return PolicyModel(weights, model.bias - weights @ self.mean, model.action_space)


def curvature(features: np.ndarray, seed: int = 0, iterations: int = CURVATURE_ITERATIONS) -> float:
    """Largest eigenvalue of features^T features / n, by power iteration"""
    if features.size == 0:
        return 0.0
    vec = np.random.default_rng(seed).normal(size=features.shape[1])
    for _ in range(iterations):
        nxt = features.T @ (features @ vec) / len(features)
        norm = np.linalg.norm(nxt)
        if norm == 0.0:
            return 0.0
        vec = nxt / norm
    return float(vec @ (features.T @ (features @ vec)) / len(features))


def step_size(learning_rate: float, standardized: np.ndarray, seed: int = 0) -> float:
    """Learning rate over the Lipschitz bound of the mean cross-entropy gradient.

    The softmax Hessian is bounded by 1/2 and the bias direction adds an
    eigenvalue of 1, so learning rates below 2 are stable.
    """
    return learning_rate / (0.5 * max(curvature(standardized, seed), 1.0))


class Trainer(ABC):
    name = ''

    @abstractmethod
    def train(self, dataset: Sequence[TrajectoryRecord], config: TrainConfig) -> TrainingResult:
        ...


class BCTrainer(Trainer):
    """Mini-batch gradient descent on expert (state, action) pairs.

    Descent runs on standardized features with the step scaled by their
    measured curvature. The returned model works on raw features.

    With a recollect callback, each extra round gathers more trajectories with
    the current model and keeps training on the grown dataset.
    """
    name = 'bc'

    def __init__(self, action_space: Sequence[Action] = MOVES, recollect: Optional[Recollect] = None,
                 rounds: int = 1):
        self.action_space = tuple(action_space)
        self.recollect = recollect
        self.rounds = max(1, rounds)

    def train(self, dataset: Sequence[TrajectoryRecord], config: TrainConfig) -> TrainingResult:
        dataset = list(dataset)
        features, labels = build_pairs(dataset, self.action_space)
        model = PolicyModel.zeros(features.shape[1], self.action_space)
        rng = np.random.default_rng(config.seed)
        result = TrainingResult(model=model, initial_loss=cross_entropy(model, features, labels))

        for round_no in range(1, self.rounds + 1):
            if round_no > 1:
                dataset.extend(self.recollect(result.model, round_no))
                features, labels = build_pairs(dataset, self.action_space)
            scaler = Standardizer.fit(features)
            standardized = scaler.transform(features)
            unit_step = step_size(1.0, standardized, config.seed)
            working = scaler.to_standard(result.model)
            for epoch in range(1, config.epochs + 1):
                lr = config.learning_rate_at(epoch)
                order = rng.permutation(len(labels))
                for start in range(0, len(labels), config.batch_size):
                    batch = order[start:start + config.batch_size]
                    grad_w, grad_b = cross_entropy_grad(working, standardized[batch], labels[batch])
                    working.weights -= lr * unit_step * grad_w
                    working.bias -= lr * unit_step * grad_b
                result.model = scaler.to_raw(working)
                loss = cross_entropy(result.model, features, labels)
                result.losses.append(loss)
                result.learning_rates.append(lr)
                logger.info(f"Epoch {epoch}/{config.epochs}: loss={loss:.6f} lr={lr:.6g}")
            if self.recollect is None:
                break
        return result


TRAINERS: Dict[str, Type[Trainer]] = {}


def register_trainer(trainer_cls: Type[Trainer]) -> Type[Trainer]:
    TRAINERS[trainer_cls.name] = trainer_cls
    return trainer_cls


register_trainer(BCTrainer)


def get_trainer(name: str, **kwargs) -> Trainer:
    if name not in TRAINERS:
        raise UnknownTrainer(name)
    return TRAINERS[name](**kwargs)


def bc_train(dataset: Sequence[TrajectoryRecord], config: TrainConfig) -> TrainingResult:
    return BCTrainer().train(dataset, config)


def gradient_check(model: PolicyModel, features: np.ndarray, target_action: Action,
                   step: float = GRAD_CHECK_STEP) -> float:
    """Max relative error between analytic and central-difference gradients"""
    features = np.asarray(features, dtype=float)[None, :]
    labels = np.array([model.action_space.index(Action(target_action))])
    grad_w, grad_b = cross_entropy_grad(model, features, labels)

    shifted = model.copy()
    worst = 0.0
    for params, analytic in ((shifted.weights, grad_w), (shifted.bias, grad_b)):
        for idx in np.ndindex(params.shape):
            original = params[idx]
            params[idx] = original + step
            upper = cross_entropy(shifted, features, labels)
            params[idx] = original - step
            lower = cross_entropy(shifted, features, labels)
            params[idx] = original
            numeric = (upper - lower) / (2 * step)
            denom = max(abs(analytic[idx]), abs(numeric), GRAD_CHECK_FLOOR)
            worst = max(worst, abs(analytic[idx] - numeric) / denom)
    return worst
