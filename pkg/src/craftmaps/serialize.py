"""Versioned binary container for feature maps and trained models.

Layout (documented in docs/FORMATS.md): a 4-byte magic ``CMAP``, a u32
little-endian container version, a u64 little-endian header length, a JSON
header, then raw little-endian array payloads in header order. Feature-map
models are stored as configuration only -- their weights are regenerable
from the seed -- while trained models additionally carry the learned weight
matrix and the codeword table.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .craftmap import CraftMapModel, DownProjector, build_down_projector
from .kernels import PolyKernelParams
from .learner import CodeBook, EcocModel, TrainedModel
from .rfm import RfmModel, SrhtRfmModel, build_rfm, build_srht_rfm

__all__ = ["MAGIC", "CONTAINER_VERSION", "ModelFormatError", "save_model", "load_model"]

MAGIC = b"CMAP"
CONTAINER_VERSION = 1


class ModelFormatError(ValueError):
    """The file is not a readable model container of this version."""


def _map_config(model) -> dict:
    if isinstance(model, RfmModel):
        return {"kind": "rfm", "d": model.d, "D": model.D, "q": model.params.q,
                "r": model.params.r, "p": model.sampler.p,
                "truncated": model.sampler.truncated, "seed": model.seed,
                "materialized": model.weights is not None}
    if isinstance(model, SrhtRfmModel):
        return {"kind": "rfm-srht", "d": model.d, "D": model.D, "q": model.params.q,
                "r": model.params.r, "p": model.sampler.p,
                "truncated": model.sampler.truncated, "seed": model.seed}
    if isinstance(model, CraftMapModel):
        down = model.down
        return {"kind": "craftmap", "up": _map_config(model.up),
                "down": {"projector_kind": down.kind, "D": down.D, "E": down.E,
                         "seed": down.seed, "materialized": down.matrix is not None}}
    raise TypeError(f"not a serializable feature map: {type(model).__name__}")


def _map_from_config(cfg: dict):
    kind = cfg.get("kind")
    if kind == "rfm":
        return build_rfm(cfg["d"], cfg["D"], PolyKernelParams(cfg["q"], cfg["r"]),
                         cfg["p"], cfg["seed"], cfg["truncated"], cfg["materialized"])
    if kind == "rfm-srht":
        return build_srht_rfm(cfg["d"], cfg["D"], PolyKernelParams(cfg["q"], cfg["r"]),
                              cfg["p"], cfg["seed"], cfg["truncated"])
    if kind == "craftmap":
        up = _map_from_config(cfg["up"])
        dcfg = cfg["down"]
        down = build_down_projector(dcfg["D"], dcfg["E"], dcfg["projector_kind"], dcfg["seed"])
        if dcfg["materialized"]:
            down = down.materialize()
        return CraftMapModel(up, down, up.params)
    raise ModelFormatError(f"unknown model kind {kind!r} in container")


def _payload(model):
    """(config, named arrays) for any serializable model."""
    if isinstance(model, TrainedModel):
        fm = None if model.feature_map is None else _map_config(model.feature_map)
        cb = model.ecoc.codebook
        config = {"kind": "trained", "feature_map": fm, "lam": model.ecoc.lam,
                  "k": cb.k, "c": cb.c}
        arrays = {"W": model.ecoc.W, "codes": cb.codes.astype(np.int8)}
        return config, arrays
    return _map_config(model), {}


def save_model(path, model) -> None:
    """Write a model container; byte-identical for identical models."""
    config, arrays = _payload(model)
    meta = []
    offset = 0
    blobs = []
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name])
        blob = arr.tobytes()
        meta.append({"name": name, "dtype": arr.dtype.str, "shape": list(arr.shape),
                     "offset": offset, "nbytes": len(blob)})
        blobs.append(blob)
        offset += len(blob)
    header = json.dumps({"model": config, "arrays": meta},
                        sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", CONTAINER_VERSION))
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def load_model(path):
    """Read a container back into a model object.

    Feature maps are rebuilt from their stored configuration (bit-identical
    by seed determinism); trained models restore their stored arrays.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 16 or raw[:4] != MAGIC:
        raise ModelFormatError(f"{path}: not a model container")
    (version,) = struct.unpack("<I", raw[4:8])
    if version != CONTAINER_VERSION:
        raise ModelFormatError(f"{path}: container version {version} is not supported "
                               f"(expected {CONTAINER_VERSION})")
    (hlen,) = struct.unpack("<Q", raw[8:16])
    if len(raw) < 16 + hlen:
        raise ModelFormatError(f"{path}: truncated header")
    try:
        header = json.loads(raw[16:16 + hlen].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"{path}: corrupt header: {exc}") from exc
    payload = raw[16 + hlen:]
    arrays = {}
    for meta in header.get("arrays", []):
        lo, hi = meta["offset"], meta["offset"] + meta["nbytes"]
        if hi > len(payload):
            raise ModelFormatError(f"{path}: truncated array payload {meta['name']!r}")
        arrays[meta["name"]] = np.frombuffer(
            payload[lo:hi], dtype=np.dtype(meta["dtype"])).reshape(meta["shape"]).copy()
    config = header.get("model", {})
    if config.get("kind") == "trained":
        fm = None if config["feature_map"] is None else _map_from_config(config["feature_map"])
        codebook = CodeBook(config["k"], config["c"], arrays["codes"].astype(np.float64))
        ecoc = EcocModel(codebook, arrays["W"], config["lam"])
        return TrainedModel(fm, ecoc)
    return _map_from_config(config)
