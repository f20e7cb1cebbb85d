"""Binary file formats: IQ captures and trained ECOC models.

Capture layout (little-endian)::

    magic    8 bytes  b"WVCLIQ1\\0"
    version  u16
    rate     f64      sample rate in Hz
    count    u64      number of complex samples
    payload  count * (f32 I, f32 Q)

Model layout (little-endian)::

    magic    8 bytes  b"WVCLMDL\\0"
    version  u16
    hlen     u32      length of the JSON header
    header   hlen bytes, UTF-8 JSON (array shapes, kernel, metadata)
    plen     u64      payload length in bytes
    payload  concatenated f64 arrays in header order
    crc32    u32      zlib.crc32 over header + payload
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import CorruptFileError, IncompatibleModelError, InvalidInputError
from .svm import BinarySvm, EcocModel, KernelSpec, Standardizer

CAPTURE_MAGIC = b"WVCLIQ1\x00"
CAPTURE_VERSION = 1
_CAPTURE_HEADER = struct.Struct("<8sHdQ")

MODEL_MAGIC = b"WVCLMDL\x00"
MODEL_VERSION = 1


def capture_bytes(samples, sample_rate_hz: float) -> bytes:
    x = np.asarray(samples).ravel()
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("capture samples must be finite")
    iq = np.empty(2 * x.size, dtype="<f4")
    iq[0::2] = x.real
    iq[1::2] = x.imag
    return _CAPTURE_HEADER.pack(CAPTURE_MAGIC, CAPTURE_VERSION, float(sample_rate_hz), x.size) + iq.tobytes()


def parse_capture(data: bytes) -> tuple[np.ndarray, float]:
    if len(data) < _CAPTURE_HEADER.size:
        raise CorruptFileError("capture shorter than its header")
    magic, version, rate, count = _CAPTURE_HEADER.unpack_from(data)
    if magic != CAPTURE_MAGIC:
        raise CorruptFileError(f"bad capture magic {magic!r}")
    if version != CAPTURE_VERSION:
        raise CorruptFileError(f"unsupported capture version {version}")
    payload = data[_CAPTURE_HEADER.size:]
    if len(payload) != 8 * count:
        raise CorruptFileError(f"payload holds {len(payload)} bytes, header promises {8 * count}")
    iq = np.frombuffer(payload, dtype="<f4")
    samples = iq[0::2].astype(np.complex64)
    samples.imag = iq[1::2]
    return samples, rate


def write_capture(path, samples, sample_rate_hz: float = 200e3) -> None:
    Path(path).write_bytes(capture_bytes(samples, sample_rate_hz))


def read_capture(path) -> tuple[np.ndarray, float]:
    """Samples (complex64) and sample rate of a capture file."""
    return parse_capture(Path(path).read_bytes())


def _f64(a) -> bytes:
    return np.ascontiguousarray(a, dtype="<f8").tobytes()


def model_bytes(model: EcocModel) -> bytes:
    arrays = [("std_mean", model.standardizer.mean), ("std_scale", model.standardizer.std),
              ("coding", model.coding), ("classes", model.classes)]
    learners = []
    for k, lr in enumerate(model.learners):
        arrays += [(f"sv{k}", lr.support_vectors.reshape(-1, model.n_features)),
                   (f"coef{k}", lr.dual_coef)]
        learners.append({"bias": lr.bias, "C": lr.C, "n_iter": lr.n_iter,
                         "kernel": {"kind": lr.spec.kind, "degree": lr.spec.degree,
                                    "gamma": lr.spec.gamma, "coef0": lr.spec.coef0}})
    header = {
        "arrays": [[name, list(np.shape(a))] for name, a in arrays],
        "learners": learners,
        "decoding": model.decoding,
        "kkt_residuals": list(model.kkt_residuals),
        "metadata": model.metadata,
    }
    hdr = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    payload = b"".join(_f64(a) for _, a in arrays)
    return (MODEL_MAGIC + struct.pack("<HI", MODEL_VERSION, len(hdr)) + hdr
            + struct.pack("<Q", len(payload)) + payload
            + struct.pack("<I", zlib.crc32(hdr + payload)))


def parse_model(data: bytes) -> EcocModel:
    if data[:8] != MODEL_MAGIC:
        raise CorruptFileError("not a model file (bad magic)")
    try:
        version, hlen = struct.unpack_from("<HI", data, 8)
        if version != MODEL_VERSION:
            raise IncompatibleModelError(f"model version {version}, expected {MODEL_VERSION}")
        pos = 14
        hdr = data[pos:pos + hlen]
        pos += hlen
        (plen,) = struct.unpack_from("<Q", data, pos)
        pos += 8
        payload = data[pos:pos + plen]
        pos += plen
        (crc,) = struct.unpack_from("<I", data, pos)
    except struct.error as exc:
        raise CorruptFileError(f"truncated model file: {exc}") from None
    if len(payload) != plen or pos + 4 != len(data):
        raise CorruptFileError("model file length does not match its header")
    if zlib.crc32(hdr + payload) != crc:
        raise CorruptFileError("model checksum mismatch")

    header = json.loads(hdr)
    arrays, off = {}, 0
    for name, shape in header["arrays"]:
        n = int(np.prod(shape)) if shape else 1
        arrays[name] = np.frombuffer(payload, dtype="<f8", count=n, offset=off).reshape(shape).astype(np.float64)
        off += 8 * n
    n_features = arrays["std_mean"].size
    learners = []
    for k, info in enumerate(header["learners"]):
        spec = KernelSpec(**info["kernel"])
        learners.append(BinarySvm(arrays[f"sv{k}"].reshape(-1, n_features), arrays[f"coef{k}"],
                                  float(info["bias"]), spec, float(info["C"]), int(info["n_iter"])))
    classes = arrays["classes"]
    if np.all(classes == np.round(classes)):
        classes = classes.astype(np.int64)
    return EcocModel(Standardizer(arrays["std_mean"], arrays["std_scale"]),
                     arrays["coding"].astype(np.int8), learners, classes, header["decoding"],
                     header["metadata"], header["kkt_residuals"])


def save_model(model: EcocModel, path) -> None:
    Path(path).write_bytes(model_bytes(model))


def load_model(path) -> EcocModel:
    return parse_model(Path(path).read_bytes())
