from src.protocol.schemas import OutcomeStatus, ParseOutcome, ShapingConfig


def shaping_reward(outcome: ParseOutcome, cfg: ShapingConfig) -> tuple[float, bool]:
    """Format term of a turn's reward and whether the episode must stop."""
    match outcome.status:
        case OutcomeStatus.PARSED:
            if outcome.missing_fields:
                return 0.0, False
            return cfg.format_bonus, False
        case OutcomeStatus.INVALID_ACTION:
            return cfg.invalid_penalty, True
        case _:
            return cfg.format_error_penalty, True


def length_penalty(length: int, cfg: ShapingConfig) -> float:
    """Zero up to ``l_max`` words, then linearly negative."""
    overflow = (length - cfg.l_min) / (cfg.l_max - cfg.l_min)
    return cfg.length_alpha * min(0.0, 1.0 - overflow)
