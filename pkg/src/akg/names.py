"""Canonical naming for attributes and query features.

Attribute names arriving from free text ("engine separation"), structured
fields ("Model_Boeing777-9X") and queries must all resolve to the same
identity.  Two layers handle this:

* ``canonical_name`` produces the display form: whitespace-separated words
  are joined CamelCase style, already-cased tokens are left alone.
* ``canonical_key`` produces the identity form used for equality and
  matching: lowercase alphanumerics only.
"""
from __future__ import annotations

import re

_WS = re.compile(r"\s+")
_NON_ALNUM = re.compile(r"[^0-9A-Za-z]+")
# boundaries inside a single word: fooBar, HTTPServer, engine2Start
_CAMEL = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Za-z])(?=[0-9])|(?<=[0-9])(?=[A-Za-z])")


def canonical_name(text: str) -> str:
    """Return the canonical display form of an attribute or feature name.

    Lowercase words get an initial capital and separators are dropped, so
    "engine separation" -> "EngineSeparation" while tokens that already
    carry case or digits ("Boeing777-9X", "HotStart") pass through intact.
    Idempotent: applying it twice changes nothing.
    """
    tokens = _WS.split(text.strip())
    parts = []
    for tok in tokens:
        if not tok:
            continue
        if tok.islower():
            tok = tok[0].upper() + tok[1:]
        parts.append(tok)
    return "".join(parts)


def canonical_key(text: str) -> str:
    """Identity form: lowercase alphanumerics only."""
    return _NON_ALNUM.sub("", text).lower()


def split_tokens(text: str) -> frozenset[str]:
    """Lowercase token set of a name, splitting camelCase and digit runs.

    Used by the token-overlap relatedness measure: "EngineSeparation" and
    "engine separation" both yield {"engine", "separation"}.
    """
    words = []
    for chunk in _NON_ALNUM.split(text):
        if not chunk:
            continue
        words.extend(w for w in _CAMEL.split(chunk) if w)
    return frozenset(w.lower() for w in words)
