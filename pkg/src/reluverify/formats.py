"""On-disk formats: JSON networks/queries and the plain-text NNet reader.

JSON network files round-trip bit-exactly (floats are written with Python's
shortest-roundtrip repr).  NNet files are read-only; their normalization
header (input mins/maxes, means, ranges) is parsed for well-formedness but
otherwise ignored, since verification here works on raw network inputs.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .network import InputBox, Layer, Network, OutputProperty, Query, ValidationError


class FormatError(ValueError):
    """A file could not be parsed; the message carries line/field context."""


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise FormatError(f"{where}: missing required field '{key}'")
    return obj[key]


def network_to_dict(net: Network) -> dict:
    doc = {
        "input_size": net.input_size,
        "layers": [
            {
                "weights": layer.weights.tolist(),
                "biases": layer.biases.tolist(),
                "activation": "relu" if layer.relu else "none",
            }
            for layer in net.layers
        ],
    }
    if net.domain is not None:
        doc["domain"] = {"lower": net.domain[0].tolist(), "upper": net.domain[1].tolist()}
    return doc


def network_from_dict(doc: dict, where: str = "network") -> Network:
    input_size = _require(doc, "input_size", where)
    layer_docs = _require(doc, "layers", where)
    if not isinstance(layer_docs, list) or not layer_docs:
        raise FormatError(f"{where}: 'layers' must be a non-empty list")
    layers = []
    for i, ld in enumerate(layer_docs):
        ctx = f"{where}: layer {i}"
        if not isinstance(ld, dict):
            raise FormatError(f"{ctx}: expected an object")
        act = _require(ld, "activation", ctx)
        if act not in ("relu", "none"):
            raise FormatError(f"{ctx}: activation must be 'relu' or 'none', got {act!r}")
        try:
            layers.append(Layer(_require(ld, "weights", ctx), _require(ld, "biases", ctx), act == "relu"))
        except ValidationError as e:
            raise ValidationError(f"{ctx}: {e}") from e
    domain = None
    if "domain" in doc:
        dd = doc["domain"]
        domain = (_require(dd, "lower", f"{where}: domain"), _require(dd, "upper", f"{where}: domain"))
    return Network(layers, input_size, domain=domain)


def save_network(net: Network, path) -> None:
    with open(path, "w") as fh:
        json.dump(network_to_dict(net), fh)
        fh.write("\n")


def load_network(path) -> Network:
    """Load a network from a ``.nnet`` text file or a JSON file (by extension)."""
    if str(path).endswith(".nnet"):
        return load_nnet(path)
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise FormatError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: top-level value must be an object")
    return network_from_dict(doc, where=str(path))


def _nnet_values(line: str) -> list[float]:
    # NNet lines are comma separated and usually end with a trailing comma.
    return [float(tok) for tok in line.strip().split(",") if tok.strip() != ""]


def load_nnet(path) -> Network:
    """Read the ACAS-Xu style plain-text format (all hidden layers ReLU)."""
    with open(path) as fh:
        raw = [ln for ln in fh.readlines() if not ln.startswith("//")]
    lines = [ln for ln in (ln.strip() for ln in raw) if ln]
    try:
        header = _nnet_values(lines[0])
        n_layers, input_size, output_size = int(header[0]), int(header[1]), int(header[2])
        sizes = [int(v) for v in _nnet_values(lines[1])]
        # line 2: symmetric flag; lines 3-6: mins, maxes, means, ranges (ignored).
        for i in range(2, 7):
            _nnet_values(lines[i])
        pos = 7
    except (IndexError, ValueError) as e:
        raise FormatError(f"{path}: malformed NNet header: {e}") from e
    if len(sizes) != n_layers + 1 or sizes[0] != input_size or sizes[-1] != output_size:
        raise ValidationError(f"{path}: layer size list inconsistent with header counts")
    layers = []
    for k in range(n_layers):
        rows, n_out, n_in = [], sizes[k + 1], sizes[k]
        try:
            for j in range(n_out):
                row = _nnet_values(lines[pos])
                pos += 1
                if len(row) != n_in:
                    raise ValidationError(
                        f"{path}: layer {k} neuron {j}: expected {n_in} weights, got {len(row)}"
                    )
                rows.append(row)
            biases = []
            for j in range(n_out):
                vals = _nnet_values(lines[pos])
                pos += 1
                if len(vals) != 1:
                    raise ValidationError(f"{path}: layer {k} neuron {j}: expected 1 bias value")
                biases.append(vals[0])
        except IndexError as e:
            raise FormatError(f"{path}: truncated file in layer {k}") from e
        except ValueError as e:
            raise FormatError(f"{path}: layer {k}, line {pos + 1}: {e}") from e
        layers.append(Layer(rows, biases, relu=k < n_layers - 1))
    return Network(layers, input_size)


def query_to_dict(q: Query) -> dict:
    return {
        "input_lower": q.input.lower.tolist(),
        "input_upper": q.input.upper.tolist(),
        "output_threshold": q.output.threshold,
    }


def save_query(q: Query, path) -> None:
    with open(path, "w") as fh:
        json.dump(query_to_dict(q), fh)
        fh.write("\n")


def load_query(path, net: Network) -> Query:
    """Load box + threshold from JSON and bind them to ``net`` as a query."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise FormatError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: top-level value must be an object")
    box = InputBox(_require(doc, "input_lower", str(path)), _require(doc, "input_upper", str(path)))
    prop = OutputProperty(_require(doc, "output_threshold", str(path)))
    return Query(net, box, prop)


def load_query_pair(net_path, query_path) -> Query:
    return load_query(query_path, load_network(net_path))


def resolve_relative(base_file, path):
    """Resolve ``path`` relative to the directory containing ``base_file``."""
    if os.path.isabs(path):
        return path
    return os.path.join(os.path.dirname(os.path.abspath(base_file)), path)
