"""Model file container: one JSON header line, then little-endian float64
payload blocks (parameters, optionally NAdam moments), guarded by a SHA-256
checksum. The writer is deterministic byte for byte."""

from __future__ import annotations

import hashlib
import json

import numpy as np

from ..errors import ChecksumError, DataFormatError, UnsupportedVersionError
from .network import NetworkModel, NetworkSpec
from .optimizer import NAdamHyper, NAdamState

FORMAT_NAME = "qcorr-model"
FORMAT_VERSION = 1


def save_model(model: NetworkModel, path, optimizer_state: NAdamState | None = None) -> None:
    """Write a model (and optionally its optimizer state, for resuming)."""
    payload = model.theta.astype("<f8").tobytes()
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "spec": model.spec.to_dict(),
        "seed": int(model.rng_seed),
        "meta": model.meta,
        "param_count": int(model.theta.size),
        "optimizer": None,
    }
    if optimizer_state is not None:
        header["optimizer"] = {"t": int(optimizer_state.t), "hyper": optimizer_state.hyper.to_dict()}
        payload += optimizer_state.m.astype("<f8").tobytes()
        payload += optimizer_state.n.astype("<f8").tobytes()
    header["payload_sha256"] = hashlib.sha256(payload).hexdigest()
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8"))
        fh.write(b"\n")
        fh.write(payload)


def load_model(path, with_optimizer: bool = False):
    """Read a model file; returns the model, or (model, NAdamState) when
    ``with_optimizer`` is set.

    Raises :class:`UnsupportedVersionError` for foreign versions and
    :class:`ChecksumError` when the payload does not match its digest.
    """
    with open(path, "rb") as fh:
        header_line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"{path}: not a model file ({exc})") from None
    if header.get("format") != FORMAT_NAME:
        raise DataFormatError(f"{path}: unknown file format {header.get('format')!r}")
    if header.get("version") != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"{path}: model format version {header.get('version')!r} is not supported "
            f"(this build reads version {FORMAT_VERSION})"
        )
    if hashlib.sha256(payload).hexdigest() != header.get("payload_sha256"):
        raise ChecksumError(f"{path}: payload checksum mismatch, file is corrupt or truncated")

    spec = NetworkSpec.from_dict(header["spec"])
    n_params = int(header["param_count"])
    expected_blocks = 1 + (2 if header.get("optimizer") else 0)
    if len(payload) != expected_blocks * n_params * 8:
        raise DataFormatError(f"{path}: payload length does not match parameter count")

    def block(i):
        return np.frombuffer(payload[i * n_params * 8 : (i + 1) * n_params * 8], dtype="<f8").astype(
            np.float64
        )

    model = NetworkModel(
        spec=spec, theta=block(0), rng_seed=int(header["seed"]), meta=dict(header.get("meta") or {})
    )
    if not with_optimizer:
        return model
    opt_header = header.get("optimizer")
    if opt_header is None:
        return model, None
    state = NAdamState(
        t=int(opt_header["t"]),
        m=block(1),
        n=block(2),
        hyper=NAdamHyper.from_dict(opt_header["hyper"]),
    )
    return model, state
