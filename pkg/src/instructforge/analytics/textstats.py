"""Word counting with a fixed, dependency-free tokenizer.

Rule: split on whitespace, then peel leading and trailing punctuation
characters off each chunk as their own tokens. "Hello, world!" counts 4
tokens (Hello / , / world / !); interior punctuation stays attached, so
"don't" is one token.
"""

from __future__ import annotations

import string

_PUNCT = frozenset(string.punctuation)


def word_count(text: str) -> int:
    total = 0
    for chunk in text.split():
        i = 0
        while i < len(chunk) and chunk[i] in _PUNCT:
            i += 1
        j = len(chunk)
        while j > i and chunk[j - 1] in _PUNCT:
            j -= 1
        total += i + (len(chunk) - j) + (1 if j > i else 0)
    return total


def length_bucket(count: int, width: int = 50) -> int:
    """Lower bound of the histogram bucket holding ``count``."""
    if width < 1:
        raise ValueError("bucket width must be positive")
    return (count // width) * width
