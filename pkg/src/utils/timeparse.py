"""
Timestamp parsing shared by answer parsing and intent interpretation
"""
import re
from datetime import datetime, timezone
from zoneinfo import ZoneInfo

_EPOCH_RE = re.compile(r"^\s*-?\d+(?:\.\d+)?\s*$")
_COMPACT_OFFSET_RE = re.compile(r"(:\d{2}(?:\.\d+)?)([+-]\d{2})(\d{2})$")
_DATETIME_FORMATS = (
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%d %H:%M",
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%dT%H:%M",
    "%Y/%m/%d %H:%M:%S",
    "%Y/%m/%d %H:%M",
    "%Y/%m/%d %H:%M:%S%z",
    "%Y/%m/%d %H:%M%z",
)


def resolve_timezone(name):
    """Return a tzinfo for an IANA name, UTC for empty/"UTC" names"""
    if not name or name.upper() == "UTC":
        return timezone.utc
    return ZoneInfo(name)


def parse_datetime_text(text, tz_name="UTC"):
    """
    Parse a calendar datetime string into unix seconds

    Args:
        text (str): e.g. "2021-03-05 10:00" or "2021-03-05T10:00:00+08:00"
        tz_name (str): Zone used for naive datetimes

    Returns:
        int: Unix seconds

    Raises:
        ValueError: If the text is not a recognised datetime
    """
    cleaned = text.strip()
    if cleaned.endswith(("Z", "z")):
        cleaned = cleaned[:-1] + "+00:00"
    # fromisoformat before 3.11 only reads offsets written as +HH:MM
    cleaned = _COMPACT_OFFSET_RE.sub(r"\1\2:\3", cleaned)
    try:
        parsed = datetime.fromisoformat(cleaned)
    except ValueError:
        parsed = None
        for fmt in _DATETIME_FORMATS:
            try:
                parsed = datetime.strptime(cleaned, fmt)
                break
            except ValueError:
                continue
    if parsed is None:
        raise ValueError(f"Unrecognised datetime: {text!r}")
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=resolve_timezone(tz_name))
    return int(parsed.timestamp())


def to_unix_seconds(value, tz_name="UTC"):
    """
    Coerce an answer value (number, numeric string or datetime text) to unix seconds

    Millisecond epochs (13 digits) are scaled down to seconds.
    """
    if isinstance(value, bool):
        raise ValueError("booleans are not timestamps")
    if isinstance(value, (int, float)):
        number = float(value)
    elif isinstance(value, str) and _EPOCH_RE.match(value):
        number = float(value)
    elif isinstance(value, str):
        return parse_datetime_text(value, tz_name)
    else:
        raise ValueError(f"Unsupported timestamp value: {value!r}")
    if abs(number) >= 1e11:
        number /= 1000.0
    return int(round(number))
