"""Goal Net modelling: documents, validation, guards and the reference interpreter."""

from ._goalnet import (
    Document,
    GoalNetError,
    GuardSyntaxError,
    eval_guard,
    interpret,
    normalize_guard,
)

__all__ = [
    "Document",
    "GoalNetError",
    "GuardSyntaxError",
    "eval_guard",
    "interpret",
    "normalize_guard",
    "load",
    "save",
]


def load(path):
    with open(path, "r", encoding="utf-8") as f:
        return Document.from_json(f.read())


def save(doc, path):
    # newline="" keeps the LF-only canonical bytes on every platform
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(doc.to_json())
