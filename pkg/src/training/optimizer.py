import logging
import math
from dataclasses import dataclass, field

import numpy as np

from src.agents.tabular import TabularPolicy
from src.training.grpo import Gradient, LossMetrics, grpo_loss_and_grad
from src.training.schemas import GrpoConfig, LrSchedule, TrainingBatch

logger = logging.getLogger(__name__)


def global_norm(gradient: Gradient) -> float:
    return math.sqrt(sum(float(np.sum(g * g)) for g in gradient.values()))


def clip_gradients(gradient: Gradient, max_norm: float) -> tuple[Gradient, float]:
    norm = global_norm(gradient)
    if norm <= max_norm or norm == 0.0:
        return gradient, norm
    scale = max_norm / norm
    return {key: g * scale for key, g in gradient.items()}, norm


def learning_rate(cfg: GrpoConfig, step: int) -> float:
    if cfg.lr_schedule == LrSchedule.COSINE:
        progress = min(step, cfg.max_steps) / cfg.max_steps
        return cfg.learning_rate * 0.5 * (1.0 + math.cos(math.pi * progress))
    return cfg.learning_rate


@dataclass
class AdamState:
    step: int = 0
    first: dict[str, np.ndarray] = field(default_factory=dict)
    second: dict[str, np.ndarray] = field(default_factory=dict)


def adam_update(policy: TabularPolicy, gradient: Gradient, state: AdamState, cfg: GrpoConfig) -> float:
    """One Adam step with decoupled weight decay; returns the learning rate used."""
    lr = learning_rate(cfg, state.step)
    state.step += 1
    beta1, beta2 = cfg.betas
    for key, grad in gradient.items():
        m = state.first.get(key)
        v = state.second.get(key)
        if m is None or len(m) != len(grad):
            m, v = np.zeros_like(grad), np.zeros_like(grad)
        m = beta1 * m + (1.0 - beta1) * grad
        v = beta2 * v + (1.0 - beta2) * grad * grad
        state.first[key], state.second[key] = m, v
        m_hat = m / (1.0 - beta1**state.step)
        v_hat = v / (1.0 - beta2**state.step)
        theta = policy.logits[key]
        if cfg.weight_decay:
            theta = theta * (1.0 - lr * cfg.weight_decay)
        policy.logits[key] = theta - lr * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)
    return lr


def train_step(
    policy: TabularPolicy,
    old_snapshot: TabularPolicy,
    reference: TabularPolicy,
    batch: TrainingBatch,
    cfg: GrpoConfig,
    adam: AdamState,
    temperature: float,
) -> LossMetrics:
    """
    Clipped-gradient Adam update of one role's policy. ``epochs`` passes are
    made over the batch against the same old snapshot; the policy version is
    bumped once.
    """
    metrics = LossMetrics()
    for _ in range(cfg.epochs):
        _, gradient, metrics = grpo_loss_and_grad(policy, old_snapshot, reference, batch, cfg, temperature)
        gradient, norm = clip_gradients(gradient, cfg.grad_clip)
        lr = adam_update(policy, gradient, adam, cfg)
        metrics.extra.update({"grad_norm": norm, "lr": lr})
    policy.version += 1
    return metrics
