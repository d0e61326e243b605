"""Versioned JSON model files.

The document is self-describing: a header with the format version, kind,
seeds, threshold, and preprocessing record, then a kind-specific body
(nested tree nodes or parameter arrays). Floats are written in Python's
shortest round-trip decimal form, so load(save(model)) is bit-exact.
"""
from __future__ import annotations

import json
from pathlib import Path

from ..errors import DataFormatError
from .bagging import BASE_KINDS, BaggingEnsemble

MODEL_FORMAT_VERSION = 1

_KIND_NAMES = {cls: name for name, cls in BASE_KINDS.items()}


def _member_to_dict(member) -> dict:
    return member.to_dict()


def _member_from_dict(kind: str, doc: dict):
    if kind not in BASE_KINDS:
        raise DataFormatError(f"unknown model kind {kind!r}")
    return BASE_KINDS[kind].from_dict(doc)


def model_to_dict(model) -> dict:
    if isinstance(model, BaggingEnsemble):
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "kind": "bagging",
            "base_kind": model.base_kind,
            "base_params": model.base_params,
            "seeds": model.member_seeds,
            "threshold": model.threshold,
            "preprocessing": model.preprocessing,
            "n_features": model.n_features,
            "members": [_member_to_dict(member) for member in model.members],
        }
    kind = _KIND_NAMES.get(type(model))
    if kind is None:
        raise DataFormatError(f"cannot serialize model of type {type(model).__name__}")
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": kind,
        "body": model.to_dict(),
    }


def model_from_dict(doc: dict):
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise DataFormatError(f"unsupported model format version {version!r}")
    kind = doc.get("kind")
    if kind == "bagging":
        members = [_member_from_dict(doc["base_kind"], md) for md in doc["members"]]
        return BaggingEnsemble(
            base_kind=doc["base_kind"],
            base_params=doc["base_params"],
            members=members,
            member_seeds=[int(s) for s in doc["seeds"]],
            threshold=float(doc["threshold"]),
            preprocessing=doc.get("preprocessing"),
            n_features=doc.get("n_features"),
        )
    return _member_from_dict(kind, doc["body"])


def save_model(model, path: str | Path) -> None:
    doc = model_to_dict(model)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, separators=(",", ":"))
        fh.write("\n")


def load_model(path: str | Path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path} is not a model file") from exc
    if not isinstance(doc, dict):
        raise DataFormatError(f"{path} is not a model file")
    return model_from_dict(doc)
