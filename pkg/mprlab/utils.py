import math
import re
from typing import List, Union

Number = Union[int, float]

_RANGE = re.compile(r"^\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*$")


def format_sig(value: float) -> str:
    """Throughput-style number: 6 significant digits."""
    return f"{value:.6g}"


def format_prob(value: float) -> str:
    """Probability-style number: 8 decimals."""
    return f"{value:.8f}"


def parse_number(text: str) -> Number:
    """Parse an int if possible, else a float (accepts 'inf')."""
    s = text.strip()
    try:
        return int(s)
    except ValueError:
        pass
    value = float(s)
    if math.isnan(value):
        raise ValueError(f"not a number: {text!r}")
    return value


def parse_bool(text: str) -> bool:
    s = text.strip().lower()
    if s in ("true", "yes", "on", "1"):
        return True
    if s in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_range(text: str) -> List[int]:
    """Inclusive integer range 'a..b'."""
    m = _RANGE.match(text)
    if not m:
        raise ValueError(f"not a range: {text!r}")
    lo, hi = int(m.group(1)), int(m.group(2))
    if hi < lo:
        raise ValueError(f"empty range: {text!r}")
    return list(range(lo, hi + 1))


def parse_list(text: str) -> List[Number]:
    """Comma list whose items may themselves be ranges: '1..3,8' -> [1, 2, 3, 8]."""
    out: List[Number] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            out.extend(parse_range(part))
        else:
            out.append(parse_number(part))
    if not out:
        raise ValueError(f"empty list: {text!r}")
    return out


def sanitize_id(name: str) -> str:
    """Safe lowercase id for file names: alphanumerics and single dashes."""
    if not name:
        return ''
    s = re.sub(r"[^a-zA-Z0-9_-]", "-", name)
    s = re.sub(r"[-_]+", "-", s).strip("-_")
    return s.lower()
