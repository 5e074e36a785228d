"""Dataset file container: JSON header line plus little-endian float64
blocks for inputs and targets, checksummed. Writes are deterministic, so a
regenerated dataset with the same seed is byte-identical."""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .errors import ChecksumError, DataFormatError, UnsupportedVersionError
from .estimators import TrainingDataset

FORMAT_NAME = "qcorr-dataset"
FORMAT_VERSION = 1


def save_dataset(dataset: TrainingDataset, path) -> None:
    inputs = np.ascontiguousarray(dataset.inputs, dtype="<f8")
    targets = np.ascontiguousarray(dataset.targets, dtype="<f8")
    payload = inputs.tobytes() + targets.tobytes()
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "n_samples": int(inputs.shape[0]),
        "input_width": int(inputs.shape[1]),
        "target_width": int(targets.shape[1]),
        "meta": dataset.meta,
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8"))
        fh.write(b"\n")
        fh.write(payload)


def load_dataset(path) -> TrainingDataset:
    with open(path, "rb") as fh:
        header_line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"{path}: not a dataset file ({exc})") from None
    if header.get("format") != FORMAT_NAME:
        raise DataFormatError(f"{path}: unknown file format {header.get('format')!r}")
    if header.get("version") != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"{path}: dataset format version {header.get('version')!r} is not supported"
        )
    if hashlib.sha256(payload).hexdigest() != header.get("payload_sha256"):
        raise ChecksumError(f"{path}: payload checksum mismatch")
    n = int(header["n_samples"])
    w_in = int(header["input_width"])
    w_out = int(header["target_width"])
    if len(payload) != (n * w_in + n * w_out) * 8:
        raise DataFormatError(f"{path}: payload length does not match header")
    inputs = np.frombuffer(payload[: n * w_in * 8], dtype="<f8").reshape(n, w_in)
    targets = np.frombuffer(payload[n * w_in * 8 :], dtype="<f8").reshape(n, w_out)
    return TrainingDataset(
        inputs=inputs.astype(np.float64), targets=targets.astype(np.float64), meta=header["meta"]
    )
