import numpy as np

TRAIN_STREAM = 0
VALIDATION_STREAM = 1
EVALUATION_STREAM = 2


def derive_seeds(master_seed: int, count: int, *stream: int) -> list[int]:
    """Per-game seeds split from a master seed; same inputs, same list."""
    sequence = np.random.SeedSequence([master_seed, *stream])
    return [int(s) for s in sequence.generate_state(count, dtype=np.uint32)]
