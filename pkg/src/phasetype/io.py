"""JSON model documents and CSV datasets.

Model documents look like::

    {"schema_version": 1, "kind": "iph",
     "alpha": [1.0, 0.0], "S": [[-2.0, 1.5], [0.0, -1.0]],
     "transform": {"name": "pareto", "params": [0.8]},
     "fit_meta": {"loglik": -123.4, "steps": 500, "seed": 1}}

Floats are written with Python's shortest round-trip representation, so
``load_model(save_model(m))`` reproduces every parameter bit for bit.

Datasets are UTF-8 CSV files with a header row and columns
``value[,weight][,censored]``; ``censored`` is 0 or 1 (1 = right-censored).
"""

import csv
import json
import math

import numpy as np

from .data import Sample
from .errors import ParseError, ValidationError
from .iph import InhomPhaseType, make_transform
from .ph import PhaseType

__all__ = [
    "SCHEMA_VERSION",
    "model_to_document",
    "model_from_document",
    "save_model",
    "load_model",
    "read_dataset",
    "write_dataset",
]

SCHEMA_VERSION = 1


def model_to_document(model, fit_meta=None):
    if isinstance(model, InhomPhaseType):
        base = model.base
        doc = {"schema_version": SCHEMA_VERSION, "kind": "iph"}
    elif isinstance(model, PhaseType):
        base = model
        doc = {"schema_version": SCHEMA_VERSION, "kind": "ph"}
    else:
        raise ValidationError(f"cannot serialize {type(model).__name__}")
    doc["alpha"] = [float(v) for v in base.alpha]
    doc["S"] = [[float(v) for v in row] for row in base.S]
    if isinstance(model, InhomPhaseType):
        doc["transform"] = {"name": model.transform.name, "params": [float(v) for v in model.transform.params]}
    if fit_meta:
        doc["fit_meta"] = dict(fit_meta)
    return doc


def model_from_document(doc):
    if not isinstance(doc, dict):
        raise ParseError("model document must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {version!r}")
    kind = doc.get("kind")
    if kind not in ("ph", "iph"):
        raise ParseError(f"kind must be 'ph' or 'iph', got {kind!r}")
    try:
        alpha = np.array(doc["alpha"], dtype=float)
        S = np.array(doc["S"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed alpha/S: {exc}") from exc
    base = PhaseType(alpha, S)
    if kind == "ph":
        return base
    tr = doc.get("transform")
    if not isinstance(tr, dict) or "name" not in tr:
        raise ParseError("iph document needs a transform object with a name")
    return InhomPhaseType(base, make_transform(tr["name"], tr.get("params")))


def save_model(path, model, fit_meta=None):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_document(model, fit_meta), fh, indent=2)
        fh.write("\n")


def load_model(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read model {path}: {exc}") from exc
    return model_from_document(doc)


def read_dataset(path):
    """Read a ``value[,weight][,censored]`` CSV into a :class:`Sample`."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ParseError(f"cannot read dataset {path}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: empty file, a header row is required")
    header = [h.strip().lower() for h in rows[0]]
    if "value" not in header or set(header) - {"value", "weight", "censored"}:
        raise ParseError(f"{path}: header must name columns value[,weight][,censored], got {rows[0]}")
    col = {name: header.index(name) for name in header}

    obs, obs_w, cens, cens_w = [], [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            value = float(row[col["value"]])
            weight = float(row[col["weight"]]) if "weight" in col else 1.0
            flag = int(row[col["censored"]]) if "censored" in col else 0
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
        if not math.isfinite(value) or not (math.isfinite(weight) and weight > 0) or flag not in (0, 1):
            raise ParseError(f"{path}:{lineno}: need finite value, positive weight and censored in {{0, 1}}")
        if flag:
            cens.append(value)
            cens_w.append(weight)
        else:
            obs.append(value)
            obs_w.append(weight)
    return Sample(obs, obs_w, cens, cens_w)


def write_dataset(path_or_file, values, weights=None):
    """Write ``value[,weight]`` rows with 17 significant digits."""
    own = isinstance(path_or_file, str)
    fh = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
    try:
        writer = csv.writer(fh, lineterminator="\n")
        if weights is None:
            writer.writerow(["value"])
            writer.writerows([f"{v:.17g}"] for v in values)
        else:
            writer.writerow(["value", "weight"])
            writer.writerows([f"{v:.17g}", f"{w:.17g}"] for v, w in zip(values, weights))
    finally:
        if own:
            fh.close()
