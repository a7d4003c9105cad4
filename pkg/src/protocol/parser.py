import re
import unicodedata
from typing import Callable

from src.games.base import Move
from src.protocol.schemas import (
    FIELD_NAMES,
    FormatErrorKind,
    OutcomeStatus,
    ParseOutcome,
    StructuredOutput,
)

THINK_OPEN, THINK_CLOSE = "<think>", "</think>"
ANSWER_OPEN, ANSWER_CLOSE = "<answer>", "</answer>"

FIELD_PATTERN = re.compile(
    r"\[(" + "|".join(re.escape(name) for name in FIELD_NAMES) + r"):\s*([^\]]*)\]"
)
_WHITESPACE = re.compile(r"\s+")


def word_count(text: str) -> int:
    return len(text.split())


def normalize_text(text: str) -> str:
    return _WHITESPACE.sub(" ", unicodedata.normalize("NFC", text)).strip()


def _format_error(kind: FormatErrorKind, length: int, missing: list[str] | None = None) -> ParseOutcome:
    return ParseOutcome(
        status=OutcomeStatus.FORMAT_ERROR,
        error_kind=kind,
        missing_fields=missing or [],
        length=length,
    )


def extract_fields(think: str) -> tuple[dict[str, str], int | None]:
    """First occurrence of each bracketed field and the offset of the earliest one."""
    fields: dict[str, str] = {}
    first_offset = None
    for match in FIELD_PATTERN.finditer(think):
        name, value = match.group(1), match.group(2).strip()
        if first_offset is None:
            first_offset = match.start()
        if name not in fields and value:
            fields[name] = value
    return fields, first_offset


def parse_structured_output(
    raw: str,
    legal: list[Move],
    require_all_fields: bool = True,
    length_fn: Callable[[str], int] = word_count,
) -> ParseOutcome:
    """
    Parse one ``<think>...</think><answer>...</answer>`` response.

    The opening ``<think>`` tag is optional, the closing one is not. Nothing but
    whitespace may follow ``</answer>``. The action is the ``MyAction`` field
    (or the answer text when that field is absent), matched against the legal
    move displays after NFC normalization and whitespace collapsing.
    """
    length = length_fn(raw)
    if raw.count(THINK_CLOSE) != 1:
        return _format_error(FormatErrorKind.MALFORMED_TAGS, length)
    think, rest = raw.split(THINK_CLOSE, 1)
    think = think.strip()
    if think.startswith(THINK_OPEN):
        think = think[len(THINK_OPEN) :]
    if THINK_OPEN in think:
        return _format_error(FormatErrorKind.MALFORMED_TAGS, length)

    rest = rest.strip()
    if not rest.startswith(ANSWER_OPEN) or ANSWER_CLOSE not in rest:
        return _format_error(FormatErrorKind.MALFORMED_TAGS, length)
    answer, trailing = rest[len(ANSWER_OPEN) :].split(ANSWER_CLOSE, 1)
    if trailing.strip():
        return _format_error(FormatErrorKind.TRAILING_TEXT, length)
    if ANSWER_OPEN in answer:
        return _format_error(FormatErrorKind.MALFORMED_TAGS, length)

    fields, first_offset = extract_fields(think)
    if first_offset is None:
        think_text = think.strip()
    else:
        line_start = think.rfind("\n", 0, first_offset) + 1
        think_text = think[:line_start].strip()

    output = StructuredOutput(
        think_text=think_text,
        answer_text=answer.strip(),
        **{FIELD_NAMES[name]: value for name, value in fields.items()},
    )
    missing = output.missing_fields()
    if missing and require_all_fields:
        return _format_error(FormatErrorKind.MISSING_FIELDS, length, missing)

    action_text = output.my_action or output.answer_text
    if not action_text:
        return _format_error(FormatErrorKind.MISSING_ACTION, length, missing)

    wanted = normalize_text(action_text)
    for move in legal:
        if normalize_text(move.display) == wanted:
            return ParseOutcome(
                status=OutcomeStatus.PARSED,
                output=output,
                move_id=move.id,
                missing_fields=missing,
                length=length,
            )
    return ParseOutcome(
        status=OutcomeStatus.INVALID_ACTION,
        output=output,
        invalid_text=action_text,
        missing_fields=missing,
        length=length,
    )


def serialize_structured_output(output: StructuredOutput) -> str:
    lines = [f"[{name}: {output.field(name)}]" for name in FIELD_NAMES if output.field(name)]
    body = "\n".join(lines)
    think = f"{output.think_text}\n\n{body}" if output.think_text else body
    answer = output.answer_text or output.my_action or ""
    return f"{THINK_OPEN}{think}{THINK_CLOSE}{ANSWER_OPEN}{answer}{ANSWER_CLOSE}"
