"""Protocol v1 request loop: stdin lines in, stdout lines out.

One model instance per process; requests are answered strictly in arrival
order. Malformed requests and per-clip model failures produce error
responses and the loop keeps running; only `bye` (or stdin EOF) ends it.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import json
import math
import sys

import numpy as np

from .binding import ModelBinding, ModelLoadError, instantiate

PROTOCOL_VERSION = 1


def _emit(stream, payload: dict) -> None:
    stream.write(json.dumps(payload, separators=(",", ":")) + "\n")
    stream.flush()


def _info_payload(binding: ModelBinding, model) -> dict:
    payload = {
        "type": "info",
        "name": getattr(model, "name", binding.class_name),
        "protocol_version": PROTOCOL_VERSION,
        "expected_sample_rate_hz": int(getattr(model, "expected_sample_rate_hz", 16000)),
    }
    length = getattr(model, "expected_length_samples", None)
    if length is not None:
        payload["expected_length_samples"] = int(length)
    return payload


def _decode_request(message: dict) -> tuple[str, np.ndarray, int, str]:
    entry_id = message["id"]
    raw = base64.b64decode(message["pcm_f32le_b64"], validate=True)
    if len(raw) % 4:
        raise ValueError("PCM payload length is not a multiple of 4")
    samples = np.frombuffer(raw, dtype="<f4")
    digest = hashlib.sha256(raw).hexdigest()
    return entry_id, samples, int(message["sample_rate_hz"]), digest


def _invoke(model, samples: np.ndarray, sample_rate_hz: int) -> float:
    if hasattr(model, "score"):
        return float(model.score(samples, sample_rate_hz))
    return float(model(samples, sample_rate_hz))


def serve(binding: ModelBinding, stdin=None, stdout=None) -> int:
    """Run the request loop; returns the process exit code."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    try:
        model = instantiate(binding)
    except ModelLoadError as exc:
        _emit(stdout, {"type": "error", "message": str(exc)})
        return 1

    for line in stdin:
        if not line.strip():
            continue
        try:
            message = json.loads(line)
        except json.JSONDecodeError as exc:
            _emit(stdout, {"type": "error", "id": None,
                           "message": f"request is not JSON: {exc}"})
            continue
        kind = message.get("type")
        if kind == "hello":
            if message.get("protocol_version") != PROTOCOL_VERSION:
                _emit(stdout, {"type": "error", "id": None,
                               "message": "unsupported protocol version"})
                continue
            _emit(stdout, _info_payload(binding, model))
        elif kind == "score":
            entry_id = message.get("id")
            try:
                entry_id, samples, rate, digest = _decode_request(message)
            except (KeyError, ValueError, TypeError, binascii.Error) as exc:
                _emit(stdout, {"type": "error", "id": entry_id,
                               "message": f"malformed score request: {exc}"})
                continue
            try:
                score = _invoke(model, samples, rate)
            except Exception as exc:
                _emit(stdout, {"type": "error", "id": entry_id,
                               "message": f"model raised: {exc}"})
                continue
            if binding.squash == "sigmoid":
                score = 1.0 / (1.0 + math.exp(-score)) if math.isfinite(score) else score
            if not math.isfinite(score) or not 0.0 <= score <= 1.0:
                _emit(stdout, {"type": "error", "id": entry_id,
                               "message": f"model output {score!r} outside [0, 1] "
                                          "and no squashing declared"})
                continue
            _emit(stdout, {"type": "result", "id": entry_id, "score": score,
                           "pcm_sha256": digest})
        elif kind == "bye":
            return 0
        else:
            _emit(stdout, {"type": "error", "id": message.get("id"),
                           "message": f"unknown message type {kind!r}"})
    return 0
