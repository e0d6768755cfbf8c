"""Perso-Arabic surface normalization.

One total, idempotent function applied before deduplication and wherever
two surface strings have to compare equal.
"""

from __future__ import annotations

ZWNJ = "‌"

# Arabic Yeh and Kaf fold into their Farsi/Sorani counterparts; Arabic-Indic
# digits fold into the Extended Arabic-Indic block used by Persian keyboards.
_CHAR_MAP = {
    0x064A: "ی",  # ي -> ی
    0x0643: "ک",  # ك -> ک
}
_CHAR_MAP.update({0x0660 + i: chr(0x06F0 + i) for i in range(10)})


def normalize(text: str) -> str:
    """Trim, collapse whitespace runs, strip ZWNJ at word edges, fold codepoints.

    ZWNJ between two non-space characters is meaningful and survives.
    """
    words = []
    for word in text.split():
        word = word.strip(ZWNJ)
        if word:
            words.append(word)
    return " ".join(words).translate(_CHAR_MAP)
