"""Prompt templates as editable text assets.

The engine performs placeholder substitution only; edit the ``.txt``
files to change wording.  Placeholders look like ``{name}`` and are
replaced literally, so braces elsewhere in the text are safe.
"""

from __future__ import annotations

from importlib import resources

from ..domain import DomainError

_FILES = {
    ("judge", None): "judge.txt",
    ("strategy", "deep_search"): "strategy_deep_search.txt",
    ("strategy", "coding"): "strategy_coding.txt",
    ("strategy", "other"): "strategy_coding.txt",
    ("refine", "deep_search"): "refine_deep_search.txt",
    ("refine", "coding"): "refine_coding.txt",
    ("refine", "other"): "refine_coding.txt",
}


def load_template(kind: str, domain_tag: str | None) -> str:
    key = (kind, domain_tag if kind != "judge" else None)
    if key not in _FILES:
        raise DomainError(f"no prompt template for kind={kind!r}, domain={domain_tag!r}")
    return resources.files(__package__).joinpath(_FILES[key]).read_text(encoding="utf-8")


def render_template(kind: str, domain_tag: str | None, **placeholders: str) -> str:
    text = load_template(kind, domain_tag)
    for name, value in placeholders.items():
        text = text.replace("{" + name + "}", value)
    return text
