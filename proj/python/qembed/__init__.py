"""Bi-Lipschitz embeddings of quotient metric spaces.

JSON-valued results from the native core are returned as Python dicts.
"""

import json as _json

from . import _qembed
from ._qembed import Embedding, InputError, InvariantError, Space, embed, load_artifact

__all__ = [
    "Embedding",
    "InputError",
    "InvariantError",
    "Space",
    "audit",
    "canonical_decomposition",
    "embed",
    "estimate_doubling",
    "load_artifact",
    "short_basis",
    "space",
]


def space(spec):
    """Build a space from a spec dict (or JSON string)."""
    if not isinstance(spec, str):
        spec = _json.dumps(spec)
    return Space.from_spec(spec)


def audit(space, embedding, pairs=10000, seed=42, threads=0):
    return _json.loads(_qembed.audit(space, embedding, pairs, seed, threads))


def estimate_doubling(space, r, R):
    return _json.loads(_qembed.estimate_doubling(space, r, R))


def short_basis(basis_columns, c_n=0.0):
    return _json.loads(_qembed.short_basis(basis_columns, c_n))


def canonical_decomposition(matrices):
    return _json.loads(_qembed.canonical_decomposition(list(matrices)))
