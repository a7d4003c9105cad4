import logging
from dataclasses import dataclass, field

import numpy as np

from src.agents.tabular import TabularPolicy, log_softmax
from src.core.exceptions import VersionMismatch
from src.training.schemas import GrpoConfig, KlAnchor, TrainingBatch

logger = logging.getLogger(__name__)

Gradient = dict[str, np.ndarray]


@dataclass
class LossMetrics:
    loss: float = 0.0
    surrogate: float = 0.0
    kl: float = 0.0
    clip_fraction: float = 0.0
    mean_abs_advantage: float = 0.0
    samples: int = 0
    extra: dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict[str, float]:
        return {
            "loss": self.loss,
            "surrogate": self.surrogate,
            "kl": self.kl,
            "clip_fraction": self.clip_fraction,
            "mean_abs_advantage": self.mean_abs_advantage,
            "samples": self.samples,
            **self.extra,
        }


def clipped_surrogate(ratio: float, advantage: float, clip_eps: float, dual_clip: float) -> tuple[float, float]:
    """Surrogate value and its derivative with respect to the ratio."""
    unclipped = ratio * advantage
    clipped = float(np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps)) * advantage
    if unclipped <= clipped:
        value, slope = unclipped, advantage
    else:
        value, slope = clipped, 0.0
    if advantage < 0 and value < dual_clip * advantage:
        value, slope = dual_clip * advantage, 0.0
    return value, slope


def _anchor_logits(anchor: TabularPolicy, key: str, size: int) -> np.ndarray:
    logits = anchor.logits.get(key)
    return np.zeros(size) if logits is None or len(logits) != size else logits


def grpo_loss_and_grad(
    policy: TabularPolicy,
    old_snapshot: TabularPolicy,
    reference: TabularPolicy,
    batch: TrainingBatch,
    cfg: GrpoConfig,
    temperature: float,
) -> tuple[float, Gradient, LossMetrics]:
    """
    Loss to minimize: the negated weighted clipped surrogate plus the KL
    coefficient times KL(policy || anchor) summed over the batch's state keys.
    The gradient is exact and keyed like ``policy.logits``.
    """
    if batch.version != old_snapshot.version:
        raise VersionMismatch(f"batch from policy v{batch.version}, old snapshot is v{old_snapshot.version}")
    stale = {s.policy_version for s in batch.samples} - {batch.version}
    if stale:
        raise VersionMismatch(f"batch mixes policy versions {sorted(stale)} with v{batch.version}")

    gradient: Gradient = {}
    metrics = LossMetrics(samples=len(batch.samples))
    if not batch.samples:
        return 0.0, gradient, metrics

    surrogate_total = 0.0
    clipped = 0
    for sample, weight in zip(batch.samples, batch.weights()):
        log_probs = policy.log_probabilities(sample.state_key, temperature)
        ratio = float(np.exp(log_probs[sample.option_id] - sample.old_logprob))
        value, slope = clipped_surrogate(ratio, sample.a_hybrid, cfg.clip_eps, cfg.dual_clip)
        surrogate_total += weight * value
        if slope == 0.0 and sample.a_hybrid != 0.0:
            clipped += 1
        if slope == 0.0:
            continue
        # d log pi(o) / d theta = (onehot(o) - pi) / T
        dlog = -np.exp(log_probs)
        dlog[sample.option_id] += 1.0
        grad = gradient.setdefault(sample.state_key, np.zeros_like(log_probs))
        grad -= weight * slope * ratio * dlog / temperature

    anchor = reference if cfg.kl_anchor == KlAnchor.REFERENCE else old_snapshot
    kl_total = 0.0
    if cfg.kl_coef > 0.0:
        for key in sorted({s.state_key for s in batch.samples}):
            log_p = policy.log_probabilities(key, temperature)
            log_q = log_softmax(_anchor_logits(anchor, key, len(log_p)), temperature)
            p = np.exp(log_p)
            diff = log_p - log_q
            kl = float(np.dot(p, diff))
            kl_total += kl
            grad = gradient.setdefault(key, np.zeros_like(log_p))
            grad += cfg.kl_coef * p * (diff - kl) / temperature

    metrics.surrogate = surrogate_total
    metrics.kl = kl_total
    metrics.loss = -surrogate_total + cfg.kl_coef * kl_total
    metrics.clip_fraction = clipped / len(batch.samples)
    metrics.mean_abs_advantage = float(np.mean([abs(s.a_hybrid) for s in batch.samples]))
    return metrics.loss, gradient, metrics
