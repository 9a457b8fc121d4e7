from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence, Tuple

import yaml


def load_yaml(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        return {}
    return yaml.safe_load(p.read_text(encoding="utf-8")) or {}


def format_digits(word: Sequence[int]) -> str:
    """``(0, 1, 1)`` -> ``"011"``; comma-separated once any digit exceeds 9; root -> ``"()"``."""
    word = tuple(word)
    if not word:
        return "()"
    if all(0 <= d <= 9 for d in word):
        return "".join(str(d) for d in word)
    return ",".join(str(d) for d in word)


def parse_digits(text: str) -> Tuple[int, ...]:
    """Inverse of ``format_digits``; also accepts ``d*k`` for k repetitions of d."""
    text = text.strip()
    if text in ("", "()", "root"):
        return ()
    if "," not in text and "*" not in text:
        return tuple(int(ch) for ch in text)
    out = []
    for token in text.split(","):
        token = token.strip()
        if "*" in token:
            digit, times = token.split("*", 1)
            out.extend([int(digit)] * int(times))
        elif token:
            out.append(int(token))
    return tuple(out)


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def rational_to_json(value: Fraction) -> dict:
    value = Fraction(value)
    return {"num": str(value.numerator), "den": str(value.denominator)}


def json_dumps_pretty(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False)

