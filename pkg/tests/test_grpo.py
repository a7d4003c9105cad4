import numpy as np
import pytest

from src.agents.tabular import TabularPolicy
from src.core.exceptions import VersionMismatch
from src.games import PlayerRole
from src.training.grpo import clipped_surrogate, grpo_loss_and_grad
from src.training.optimizer import AdamState, clip_gradients, global_norm, learning_rate, train_step
from src.training.schemas import AdvantageRecord, GrpoConfig, KlAnchor, LrSchedule, TrainingBatch

TEMPERATURE = 0.5


def advantage(trajectory_id, option_id, a_hybrid, old_logprob, version=0, key="s"):
    return AdvantageRecord(
        trajectory_id=trajectory_id,
        turn=0,
        role=PlayerRole.FIRST,
        state_key=key,
        option_id=option_id,
        old_logprob=old_logprob,
        policy_version=version,
        a_hybrid=a_hybrid,
    )


@pytest.fixture
def policies():
    policy = TabularPolicy(PlayerRole.FIRST)
    policy.register("s", ["a", "b", "c"])
    policy.logits["s"] = np.array([0.10, -0.20, 0.05])
    old = policy.snapshot()
    old.logits["s"] = np.array([0.08, -0.17, 0.06])
    reference = TabularPolicy(PlayerRole.FIRST)
    return policy, old, reference


def near_one_batch(old):
    log_old = old.log_probabilities("s", TEMPERATURE)
    return TrainingBatch(
        role=PlayerRole.FIRST,
        version=0,
        samples=[
            advantage("a", 0, 1.0, float(log_old[0])),
            advantage("b", 2, -0.5, float(log_old[2])),
        ],
    )


GRADIENT_INSTANCES = 50
# ratio ranges and advantage signs that put a sample in each branch of the dual-clipped surrogate
# (clip_eps 0.2, dual_clip 3.0), kept well away from the kinks
REGIMES = {
    "unclipped": ((0.85, 1.15), 0),
    "pessimistic": ((1.3, 2.5), -1),
    "clipped_high": ((1.3, 2.5), 1),
    "clipped_low": ((0.2, 0.7), -1),
    "dual_clipped": ((3.5, 6.0), -1),
}


def random_instance(rng, index):
    """Random tabular policy, anchors and batch; sample ratios are placed by regime."""
    temperature = float(rng.uniform(0.5, 1.5))
    policy = TabularPolicy(PlayerRole.FIRST)
    for k in range(int(rng.integers(1, 4))):
        policy.register(f"s{k}", [f"o{i}" for i in range(int(rng.integers(2, 6)))])
        policy.logits[f"s{k}"] = rng.normal(size=policy.option_count(f"s{k}"))
    old = policy.snapshot()
    reference = policy.snapshot()
    for anchor in (old, reference):
        for key, logits in anchor.logits.items():
            anchor.logits[key] = logits + rng.normal(scale=0.5, size=len(logits))

    names = list(REGIMES)
    regimes = [names[index % len(names)]] + list(rng.choice(names, size=int(rng.integers(0, 4))))
    samples = []
    for turn, regime in enumerate(regimes):
        (low, high), sign = REGIMES[regime]
        key = f"s{int(rng.integers(len(policy.logits)))}"
        option = int(rng.integers(policy.option_count(key)))
        ratio = float(rng.uniform(low, high))
        magnitude = float(rng.uniform(0.2, 2.0))
        a_hybrid = magnitude * (sign or rng.choice([-1.0, 1.0]))
        samples.append(
            AdvantageRecord(
                trajectory_id=f"t{int(rng.integers(3))}",
                turn=turn,
                role=PlayerRole.FIRST,
                state_key=key,
                option_id=option,
                old_logprob=policy.logprob(key, option, temperature) - np.log(ratio),
                policy_version=0,
                a_hybrid=a_hybrid,
            )
        )
    cfg = GrpoConfig(
        kl_coef=0.0 if index % 3 == 0 else float(rng.uniform(0.05, 0.3)),
        kl_anchor=KlAnchor.OLD if index % 2 else KlAnchor.REFERENCE,
    )
    batch = TrainingBatch(role=PlayerRole.FIRST, version=0, samples=samples)
    return policy, old, reference, batch, cfg, temperature, set(regimes)


def central_differences(policy, old, reference, batch, cfg, temperature, eps=1e-6):
    numeric = {}
    for key, base in list(policy.logits.items()):
        numeric[key] = np.zeros_like(base)
        for i in range(len(base)):
            step = eps * np.eye(len(base))[i]
            policy.logits[key] = base + step
            up, _, _ = grpo_loss_and_grad(policy, old, reference, batch, cfg, temperature)
            policy.logits[key] = base - step
            down, _, _ = grpo_loss_and_grad(policy, old, reference, batch, cfg, temperature)
            numeric[key][i] = (up - down) / (2 * eps)
        policy.logits[key] = base
    return numeric


class TestClippedSurrogate:
    """Tests for the dual-clipped surrogate"""

    @pytest.mark.parametrize(
        "ratio, adv, expected",
        [
            (1.5, 1.0, (1.2, 0.0)),
            (0.5, 1.0, (0.5, 1.0)),
            (1.5, -1.0, (-1.5, -1.0)),
            (0.5, -1.0, (-0.8, 0.0)),
            (4.0, -1.0, (-3.0, 0.0)),
        ],
    )
    def test_cases(self, ratio, adv, expected):
        """Test clipping on both sides and the lower bound for negative advantages"""
        value, slope = clipped_surrogate(ratio, adv, clip_eps=0.2, dual_clip=3.0)

        assert value == pytest.approx(expected[0])
        assert slope == pytest.approx(expected[1])


class TestLossAndGradient:
    """Tests for the GRPO loss on tabular policies"""

    def test_gradient_matches_finite_differences(self, policies):
        """Test the analytic gradient against central differences"""
        policy, old, reference = policies
        batch = near_one_batch(old)
        cfg = GrpoConfig(kl_coef=0.1)

        _, gradient, _ = grpo_loss_and_grad(policy, old, reference, batch, cfg, TEMPERATURE)

        eps = 1e-6
        numeric = np.zeros(3)
        for i in range(3):
            base = policy.logits["s"].copy()
            policy.logits["s"] = base + eps * np.eye(3)[i]
            up, _, _ = grpo_loss_and_grad(policy, old, reference, batch, cfg, TEMPERATURE)
            policy.logits["s"] = base - eps * np.eye(3)[i]
            down, _, _ = grpo_loss_and_grad(policy, old, reference, batch, cfg, TEMPERATURE)
            policy.logits["s"] = base
            numeric[i] = (up - down) / (2 * eps)

        np.testing.assert_allclose(gradient["s"], numeric, atol=1e-6)

    def test_randomized_finite_differences(self):
        """Test the analytic gradient on random instances covering every clipping branch and the KL term"""
        rng = np.random.default_rng(2024)
        seen = set()
        kl_active = 0

        for index in range(GRADIENT_INSTANCES):
            policy, old, reference, batch, cfg, temperature, regimes = random_instance(rng, index)

            _, gradient, _ = grpo_loss_and_grad(policy, old, reference, batch, cfg, temperature)
            numeric = central_differences(policy, old, reference, batch, cfg, temperature)

            analytic = np.concatenate([gradient.get(key, np.zeros_like(numeric[key])) for key in numeric])
            expected = np.concatenate(list(numeric.values()))
            scale = max(np.linalg.norm(analytic) + np.linalg.norm(expected), 1e-8)
            assert np.linalg.norm(analytic - expected) <= 1e-4 * scale, f"instance {index}"
            seen |= regimes
            kl_active += cfg.kl_coef > 0.0

        assert seen == set(REGIMES)
        assert kl_active > 0

    def test_kl_against_old_snapshot(self, policies):
        """Test that the KL term vanishes when the anchor equals the policy"""
        policy, _, reference = policies
        old = policy.snapshot()
        batch = near_one_batch(old)
        cfg = GrpoConfig(kl_coef=0.1, kl_anchor=KlAnchor.OLD)

        _, _, metrics = grpo_loss_and_grad(policy, old, reference, batch, cfg, TEMPERATURE)

        assert metrics.kl == pytest.approx(0.0)
        assert metrics.surrogate == pytest.approx(0.5 * 1.0 - 0.5 * 0.5)

    def test_batch_version_mismatch(self, policies):
        """Test that a batch from another policy version is rejected"""
        policy, old, reference = policies
        batch = near_one_batch(old).model_copy(update={"version": 1})

        with pytest.raises(VersionMismatch):
            grpo_loss_and_grad(policy, old, reference, batch, GrpoConfig(), TEMPERATURE)

    def test_stale_samples(self, policies):
        """Test that samples generated by an older policy are rejected"""
        policy, old, reference = policies
        old.version = 1
        batch = TrainingBatch(
            role=PlayerRole.FIRST,
            version=1,
            samples=[advantage("a", 0, 1.0, -1.0, version=1), advantage("b", 0, 1.0, -1.0, version=0)],
        )

        with pytest.raises(VersionMismatch):
            grpo_loss_and_grad(policy, old, reference, batch, GrpoConfig(), TEMPERATURE)

    def test_empty_batch(self, policies):
        """Test that an empty batch yields a zero loss"""
        policy, old, reference = policies
        batch = TrainingBatch(role=PlayerRole.FIRST, version=0)

        loss, gradient, metrics = grpo_loss_and_grad(policy, old, reference, batch, GrpoConfig(), TEMPERATURE)

        assert loss == 0.0
        assert gradient == {}
        assert metrics.samples == 0

    def test_weights(self):
        """Test 1/G per trajectory split over its turns"""
        batch = TrainingBatch(
            role=PlayerRole.FIRST,
            version=0,
            samples=[advantage("a", 0, 0.0, 0.0), advantage("a", 1, 0.0, 0.0), advantage("b", 0, 0.0, 0.0)],
        )

        assert batch.weights() == pytest.approx([0.25, 0.25, 0.5])


class TestOptimizer:
    """Tests for gradient clipping, schedules and the update step"""

    def test_clip_gradients(self):
        """Test rescaling to the maximum global norm"""
        gradient = {"a": np.array([3.0]), "b": np.array([4.0])}

        clipped, norm = clip_gradients(gradient, 1.0)

        assert norm == pytest.approx(5.0)
        assert global_norm(clipped) == pytest.approx(1.0)
        np.testing.assert_allclose(clipped["a"], [0.6])
        assert clip_gradients(gradient, 10.0)[0] is gradient

    def test_cosine_schedule(self):
        """Test that the cosine schedule decays to zero at the last step"""
        cfg = GrpoConfig(learning_rate=1.0, lr_schedule=LrSchedule.COSINE, max_steps=10)

        assert learning_rate(cfg, 0) == pytest.approx(1.0)
        assert learning_rate(cfg, 5) == pytest.approx(0.5)
        assert learning_rate(cfg, 10) == pytest.approx(0.0)
        assert learning_rate(GrpoConfig(learning_rate=0.3), 7) == 0.3

    def test_zero_advantage_leaves_policy(self, policies):
        """Test that a batch without signal changes nothing but the version"""
        policy, _, reference = policies
        old = policy.snapshot()
        before = policy.logits["s"].copy()
        batch = TrainingBatch(role=PlayerRole.FIRST, version=0, samples=[advantage("a", 0, 0.0, -1.0)])

        train_step(policy, old, reference, batch, GrpoConfig(kl_coef=0.0), AdamState(), TEMPERATURE)

        np.testing.assert_array_equal(policy.logits["s"], before)
        assert policy.version == 1

    def test_zero_advantage_at_reference(self, policies):
        """Test that zero advantages at the reference policy give no update even with KL on"""
        policy, _, _ = policies
        old = policy.snapshot()
        reference = policy.snapshot()
        before = policy.logits["s"].copy()
        batch = TrainingBatch(role=PlayerRole.FIRST, version=0, samples=[advantage("a", 1, 0.0, -1.0)])

        metrics = train_step(policy, old, reference, batch, GrpoConfig(kl_coef=0.15), AdamState(), TEMPERATURE)

        np.testing.assert_array_equal(policy.logits["s"], before)
        assert metrics.kl == pytest.approx(0.0)

    def test_positive_advantage_raises_probability(self):
        """Test that one update moves mass toward the rewarded option"""
        policy = TabularPolicy(PlayerRole.FIRST)
        policy.register("s", ["a", "b", "c"])
        old = policy.snapshot()
        reference = policy.snapshot()
        start = policy.probabilities("s", 1.0)[0]
        batch = TrainingBatch(
            role=PlayerRole.FIRST,
            version=0,
            samples=[advantage("a", 0, 1.0, float(old.logprob("s", 0, 1.0)))],
        )
        cfg = GrpoConfig(learning_rate=0.1, kl_coef=0.0)

        metrics = train_step(policy, old, reference, batch, cfg, AdamState(), 1.0)

        assert policy.probabilities("s", 1.0)[0] > start
        assert metrics.extra["lr"] == 0.1
        assert old.logits["s"].tolist() == [0.0, 0.0, 0.0]
