"""Scorer attachment: built-in reference scorers and the line-delimited
JSON protocol (version 1) spoken with external scorer processes over stdio.

Wire grammar, one JSON object per line:
  harness -> scorer   {"type":"hello","protocol_version":1}
  scorer  -> harness  {"type":"info","name":...,"protocol_version":1,
                       "expected_sample_rate_hz":16000,
                       "expected_length_samples":64000}
  harness -> scorer   {"type":"score","id":...,"sample_rate_hz":...,
                       "pcm_f32le_b64":...}
  scorer  -> harness  {"type":"result","id":...,"score":...}
                      (optional "pcm_sha256" echoes the payload checksum)
                      or {"type":"error","id":...,"message":...}
  harness -> scorer   {"type":"bye"}

Scores are probabilities of spoof in [0, 1]; the harness never clamps or
repairs out-of-range values.
"""

from __future__ import annotations

import base64
import hashlib
import json
import math
import queue
import subprocess
import threading
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .audio import AudioBuffer
from .errors import (
    ConfigError,
    ProtocolFormatError,
    ProtocolVersionError,
    ScoreRangeError,
    ScorerCrashedError,
    ScorerResponseError,
    ScorerStartError,
    ScorerTimeoutError,
)

PROTOCOL_VERSION = 1
HANDSHAKE_TIMEOUT_S = 30.0
REQUEST_TIMEOUT_S = 120.0


@dataclass(frozen=True)
class ScorerInfo:
    name: str
    protocol_version: int
    expected_sample_rate_hz: int
    expected_length_samples: Optional[int] = None

    def __post_init__(self):
        if self.expected_sample_rate_hz <= 0:
            raise ProtocolFormatError("expected_sample_rate_hz must be positive")


@dataclass(frozen=True)
class ScoreRecord:
    entry_id: str
    score: float

    def __post_init__(self):
        if not isinstance(self.score, (int, float)) or not math.isfinite(self.score):
            raise ScoreRangeError(f"{self.entry_id}: score {self.score!r} is not finite")
        if not 0.0 <= self.score <= 1.0:
            raise ScoreRangeError(f"{self.entry_id}: score {self.score} outside [0, 1]")


def _dumps(payload: dict) -> str:
    return json.dumps(payload, separators=(",", ":"))


def hello_line() -> str:
    return _dumps({"type": "hello", "protocol_version": PROTOCOL_VERSION})


def bye_line() -> str:
    return _dumps({"type": "bye"})


def encode_pcm(samples: np.ndarray) -> tuple[str, str]:
    """Pack samples as little-endian float32; returns (base64, sha256 hex)."""
    raw = np.asarray(samples, dtype="<f4").tobytes()
    return base64.b64encode(raw).decode("ascii"), hashlib.sha256(raw).hexdigest()


def score_request_line(entry_id: str, buf: AudioBuffer) -> tuple[str, str]:
    """Returns (request line, payload sha256) for one clip."""
    pcm_b64, digest = encode_pcm(buf.samples)
    line = _dumps(
        {
            "type": "score",
            "id": entry_id,
            "sample_rate_hz": buf.sample_rate_hz,
            "pcm_f32le_b64": pcm_b64,
        }
    )
    return line, digest


# --- built-in scorers ---------------------------------------------------------


class ConstantScorer:
    """Scores every clip with the same constant."""

    def __init__(self, c: float = 0.5):
        if not 0.0 <= c <= 1.0:
            raise ConfigError(f"constant scorer requires c in [0, 1], got {c}")
        self._c = float(c)

    def info(self) -> ScorerInfo:
        return ScorerInfo(f"constant[{self._c}]", PROTOCOL_VERSION, 16000)

    def score_batch(self, batch: Sequence[tuple[str, AudioBuffer]]) -> list[ScoreRecord]:
        return [ScoreRecord(entry_id, self._c) for entry_id, _ in batch]

    def close(self) -> None:
        pass


class SeededRandomScorer:
    """Deterministic pseudo-random scores keyed on (seed, entry id).

    Hashing instead of a stateful RNG keeps scores independent of batch
    order and worker count.
    """

    def __init__(self, seed: int):
        self._seed = int(seed)

    def info(self) -> ScorerInfo:
        return ScorerInfo(f"seeded_random[{self._seed}]", PROTOCOL_VERSION, 16000)

    def _score(self, entry_id: str) -> float:
        digest = hashlib.sha256(f"{self._seed}:{entry_id}".encode()).digest()
        return int.from_bytes(digest[:8], "big") / 2**64

    def score_batch(self, batch: Sequence[tuple[str, AudioBuffer]]) -> list[ScoreRecord]:
        return [ScoreRecord(entry_id, self._score(entry_id)) for entry_id, _ in batch]

    def close(self) -> None:
        pass


class EnergyScorer:
    """RMS squashed monotonically into [0, 1): score = rms / (1 + rms)."""

    def info(self) -> ScorerInfo:
        return ScorerInfo("energy", PROTOCOL_VERSION, 16000)

    def score_batch(self, batch: Sequence[tuple[str, AudioBuffer]]) -> list[ScoreRecord]:
        records = []
        for entry_id, buf in batch:
            rms = float(np.sqrt(np.mean(np.square(buf.samples)))) if buf.samples.size else 0.0
            records.append(ScoreRecord(entry_id, rms / (1.0 + rms)))
        return records

    def close(self) -> None:
        pass


BUILTIN_KINDS = ("constant", "seeded_random", "energy")


def builtin_scorer(kind: str, **params):
    """Instantiate a built-in scorer by kind name."""
    try:
        if kind == "constant":
            return ConstantScorer(**params)
        if kind == "seeded_random":
            if "seed" not in params:
                raise ConfigError("seeded_random scorer requires a seed")
            return SeededRandomScorer(**params)
        if kind == "energy":
            return EnergyScorer(**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for builtin scorer {kind!r}: {exc}") from exc
    raise ConfigError(f"unknown builtin scorer {kind!r}; known: {BUILTIN_KINDS}")


# --- external scorer process ----------------------------------------------------


class _LineReader:
    """Background reader so stdout reads can time out and detect process death."""

    _EOF = object()

    def __init__(self, stream):
        self._queue: queue.Queue = queue.Queue()
        self._thread = threading.Thread(target=self._pump, args=(stream,), daemon=True)
        self._thread.start()

    def _pump(self, stream):
        for line in stream:
            self._queue.put(line)
        self._queue.put(self._EOF)

    def next_line(self, timeout: float):
        try:
            item = self._queue.get(timeout=timeout)
        except queue.Empty:
            raise TimeoutError
        if item is self._EOF:
            raise EOFError
        return item


class ExternalScorer:
    """Client for a scorer process speaking protocol v1 on stdin/stdout."""

    def __init__(
        self,
        command: Sequence[str],
        handshake_timeout_s: float = HANDSHAKE_TIMEOUT_S,
        request_timeout_s: float = REQUEST_TIMEOUT_S,
    ):
        self._command = list(command)
        self._handshake_timeout = handshake_timeout_s
        self._request_timeout = request_timeout_s
        try:
            self._process = subprocess.Popen(
                self._command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise ScorerStartError(f"could not start scorer {self._command}: {exc}") from exc
        self._reader = _LineReader(self._process.stdout)
        self._info: Optional[ScorerInfo] = None

    def _send(self, line: str) -> None:
        try:
            self._process.stdin.write(line + "\n")
            self._process.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ScorerCrashedError(
                f"scorer exited (code {self._process.poll()}) while receiving"
            ) from exc

    def _receive(self, timeout: float, during: str) -> dict:
        try:
            line = self._reader.next_line(timeout)
        except TimeoutError:
            self.kill()
            raise ScorerTimeoutError(f"no response within {timeout} s during {during}")
        except EOFError:
            code = self._process.wait()
            raise ScorerCrashedError(f"scorer exited with code {code} during {during}")
        try:
            message = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolFormatError(f"scorer emitted a non-JSON line: {line!r}") from exc
        if not isinstance(message, dict) or "type" not in message:
            raise ProtocolFormatError(f"scorer message lacks a type: {line!r}")
        return message

    def handshake(self) -> ScorerInfo:
        self._send(hello_line())
        message = self._receive(self._handshake_timeout, "handshake")
        if message.get("type") != "info":
            raise ProtocolFormatError(f"expected info message, got {message.get('type')!r}")
        version = message.get("protocol_version")
        if version != PROTOCOL_VERSION:
            raise ProtocolVersionError(
                f"scorer speaks protocol {version!r}, harness speaks {PROTOCOL_VERSION}"
            )
        try:
            self._info = ScorerInfo(
                name=str(message["name"]),
                protocol_version=int(version),
                expected_sample_rate_hz=int(message["expected_sample_rate_hz"]),
                expected_length_samples=(
                    int(message["expected_length_samples"])
                    if message.get("expected_length_samples") is not None
                    else None
                ),
            )
        except KeyError as exc:
            raise ProtocolFormatError(f"info message missing field {exc}") from exc
        return self._info

    def info(self) -> ScorerInfo:
        if self._info is None:
            return self.handshake()
        return self._info

    def score_batch(self, batch: Sequence[tuple[str, AudioBuffer]]) -> list[ScoreRecord]:
        records = []
        for entry_id, buf in batch:
            line, digest = score_request_line(entry_id, buf)
            self._send(line)
            message = self._receive(self._request_timeout, f"scoring {entry_id!r}")
            kind = message.get("type")
            if kind == "error":
                raise ScorerResponseError(
                    f"{entry_id}: scorer error: {message.get('message', 'unspecified')}"
                )
            if kind != "result":
                raise ProtocolFormatError(f"expected result message, got {kind!r}")
            if message.get("id") != entry_id:
                raise ScorerResponseError(
                    f"response id {message.get('id')!r} does not match request {entry_id!r}"
                )
            echoed = message.get("pcm_sha256")
            if echoed is not None and echoed != digest:
                raise ScorerResponseError(f"{entry_id}: PCM checksum mismatch")
            score = message.get("score")
            if not isinstance(score, (int, float)):
                raise ScoreRangeError(f"{entry_id}: score {score!r} is not a number")
            records.append(ScoreRecord(entry_id, float(score)))
        return records

    def close(self) -> None:
        if self._process.poll() is None:
            try:
                self._send(bye_line())
                self._process.stdin.close()
            except ScorerCrashedError:
                pass
            try:
                self._process.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.kill()

    def kill(self) -> None:
        if self._process.poll() is None:
            self._process.kill()
            self._process.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
