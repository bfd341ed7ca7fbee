"""
Model snapshot files.

Layout: an ASCII header of `key value` lines ending with
`end_header`, followed by the weights and then P as little-endian
float64, row-major:

    polysdf-snapshot
    version 1
    degree 3
    segments 4
    dim 3
    domain_lo 0.0 0.0 0.0
    domain_hi 1.0 1.0 1.0
    transform_scale 1.0          (optional)
    transform_origin 0.0 0.0 0.0 (optional)
    n_weights 1000
    end_header
    <w: n_weights doubles><P: n_weights^2 doubles>

Floats in the header are written with repr so they round-trip exactly,
and nothing time-dependent is stored, so identical models produce
identical files.
"""

import logging
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from polynomial_sdf.exceptions import SnapshotError
from polynomial_sdf.models.field_model import FieldModel
from polynomial_sdf.schemas.basis import BasisConfig
from polynomial_sdf.schemas.sample import DomainTransform

logger = logging.getLogger(__name__)

MAGIC = "polysdf-snapshot"
VERSION = 1
END_HEADER = "end_header"


def _floats(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def snapshot_bytes(model: FieldModel) -> bytes:
    """Serialized snapshot of a model."""
    config = model.config
    lines = [
        MAGIC,
        f"version {VERSION}",
        f"degree {config.degree}",
        f"segments {config.segments}",
        f"dim {config.dim}",
        f"domain_lo {_floats(config.lower)}",
        f"domain_hi {_floats(config.upper)}",
    ]
    if model.transform is not None:
        lines.append(f"transform_scale {model.transform.scale!r}")
        lines.append(f"transform_origin {_floats(model.transform.origin)}")
    lines.append(f"n_weights {model.n_weights}")
    lines.append(END_HEADER)
    header = ("\n".join(lines) + "\n").encode("ascii")
    payload = (
        np.asarray(model.w, dtype="<f8").tobytes()
        + np.asarray(model.P, dtype="<f8").tobytes(order="C")
    )
    return header + payload


def save_snapshot(model: FieldModel, path: str | Path) -> None:
    path = Path(path)
    path.write_bytes(snapshot_bytes(model))
    logger.info("Snapshot written to %s (%d weights)", path, model.n_weights)


def _split_header(data: bytes, path: Path) -> tuple[dict[str, str], bytes]:
    marker = f"\n{END_HEADER}\n".encode("ascii")
    end = data.find(marker)
    if end < 0:
        raise SnapshotError("missing end_header", path)
    try:
        text = data[:end].decode("ascii")
    except UnicodeDecodeError as e:
        raise SnapshotError(f"header is not ASCII: {e}", path) from e
    lines = text.split("\n")
    if lines[0] != MAGIC:
        raise SnapshotError("not a polysdf snapshot", path, 1)
    fields = {}
    for number, line in enumerate(lines[1:], start=2):
        key, _, value = line.partition(" ")
        if not value:
            raise SnapshotError(f"malformed header line {line!r}", path, number)
        fields[key] = value
    return fields, data[end + len(marker):]


def loads_snapshot(data: bytes, path: str | Path = "<bytes>") -> FieldModel:
    """Parse snapshot bytes into a model."""
    path = Path(path)
    fields, payload = _split_header(data, path)
    try:
        version = int(fields["version"])
        if version != VERSION:
            raise SnapshotError(f"unsupported snapshot version {version}", path)
        lo = [float(v) for v in fields["domain_lo"].split()]
        hi = [float(v) for v in fields["domain_hi"].split()]
        config = BasisConfig(
            degree=int(fields["degree"]),
            segments=int(fields["segments"]),
            dim=int(fields["dim"]),
            domain=tuple(zip(lo, hi)),
        )
        transform = None
        if "transform_scale" in fields:
            transform = DomainTransform(
                scale=float(fields["transform_scale"]),
                origin=tuple(float(v) for v in fields["transform_origin"].split()),
            )
        n = int(fields["n_weights"])
    except KeyError as e:
        raise SnapshotError(f"missing header field {e.args[0]}", path) from e
    except (ValueError, ValidationError) as e:
        if isinstance(e, SnapshotError):
            raise
        raise SnapshotError(f"invalid header: {e}", path) from e

    if n != config.n_weights:
        raise SnapshotError(
            f"n_weights {n} does not match basis ({config.n_weights})", path
        )
    expected = 8 * (n + n * n)
    if len(payload) != expected:
        raise SnapshotError(
            f"payload has {len(payload)} bytes, expected {expected}", path
        )
    values = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    return FieldModel(
        config=config,
        w=values[:n].copy(),
        P=values[n:].reshape(n, n).copy(),
        transform=transform,
    )


def load_snapshot(path: str | Path) -> FieldModel:
    path = Path(path)
    model = loads_snapshot(path.read_bytes(), path)
    logger.debug("Snapshot loaded from %s", path)
    return model
