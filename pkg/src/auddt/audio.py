"""Audio decoding and the preprocessing pipeline.

Inputs are WAV (PCM 16/24/32 and IEEE float32) or FLAC. Decoded audio flows
through resample -> peak-normalize -> fixed-duration fit before scoring.
Multichannel input is downmixed to mono by arithmetic mean at decode time.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.signal import upfirdn

from . import flacio
from .errors import DecodeError, UnsupportedFormatError

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

# resampler design knobs: Kaiser-windowed sinc, polyphase via upfirdn
_KAISER_BETA = 12.0
_TAPS_PER_PHASE = 64
_STOPBAND_FRACTION = 0.95  # stopband begins at this fraction of the lower Nyquist


@dataclass(frozen=True)
class AudioBuffer:
    """Mono waveform (float64) plus its sample rate."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("AudioBuffer holds mono (1-D) sample data")
        if samples.size and not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        if int(self.sample_rate_hz) <= 0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", int(self.sample_rate_hz))

    @property
    def duration_seconds(self) -> float:
        return self.samples.size / self.sample_rate_hz


def _parse_fmt_chunk(body: bytes) -> tuple[int, int, int, int]:
    if len(body) < 16:
        raise DecodeError("fmt chunk too short")
    fmt, channels, rate, _byte_rate, _block_align, bits = struct.unpack(
        "<HHIIHH", body[:16]
    )
    if fmt == WAVE_FORMAT_EXTENSIBLE:
        if len(body) < 40:
            raise DecodeError("extensible fmt chunk too short")
        # the sub-format GUID starts with the actual format code
        fmt = struct.unpack("<H", body[24:26])[0]
    if channels < 1:
        raise DecodeError("fmt chunk declares zero channels")
    if rate < 1:
        raise DecodeError("fmt chunk declares zero sample rate")
    return fmt, channels, rate, bits


def _pcm_to_float(payload: bytes, bits: int, channels: int) -> np.ndarray:
    if bits not in (16, 24, 32):
        raise UnsupportedFormatError(f"unsupported PCM bit depth {bits}")
    frame_bytes = (bits // 8) * channels
    if len(payload) % frame_bytes != 0:
        raise DecodeError("PCM payload is not a whole number of frames")
    if bits == 16:
        ints = np.frombuffer(payload, dtype="<i2").astype(np.float64)
        scale = 1 << 15
    elif bits == 32:
        ints = np.frombuffer(payload, dtype="<i4").astype(np.float64)
        scale = 1 << 31
    else:  # 24-bit: assemble little-endian triples and sign-extend
        raw = np.frombuffer(payload, dtype=np.uint8).reshape(-1, 3).astype(np.int64)
        ints = raw[:, 0] | (raw[:, 1] << 8) | (raw[:, 2] << 16)
        ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints).astype(np.float64)
        scale = 1 << 23
    return ints.reshape(-1, channels) / scale


def _decode_wav(data: bytes) -> AudioBuffer:
    if len(data) < 12 or data[8:12] != b"WAVE":
        raise DecodeError("mangled RIFF/WAVE header")
    pos = 12
    fmt_info = None
    payload = None
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack("<I", data[pos + 4:pos + 8])
        body = data[pos + 8:pos + 8 + size]
        if chunk_id == b"fmt ":
            fmt_info = _parse_fmt_chunk(body)
            if len(body) != size:
                raise DecodeError("truncated fmt chunk")
        elif chunk_id == b"data":
            if len(body) != size:
                raise DecodeError("truncated data payload")
            payload = body
        pos += 8 + size + (size & 1)
    if fmt_info is None:
        raise DecodeError("missing fmt chunk")
    if payload is None:
        raise DecodeError("missing data chunk")

    fmt, channels, rate, bits = fmt_info
    if fmt == WAVE_FORMAT_PCM:
        frames = _pcm_to_float(payload, bits, channels)
    elif fmt == WAVE_FORMAT_IEEE_FLOAT:
        if bits != 32:
            raise UnsupportedFormatError(f"unsupported float bit depth {bits}")
        if len(payload) % (4 * channels) != 0:
            raise DecodeError("float payload is not a whole number of frames")
        frames = np.frombuffer(payload, dtype="<f4").astype(np.float64)
        frames = frames.reshape(-1, channels)
        if frames.size and not np.all(np.isfinite(frames)):
            raise DecodeError("non-finite float samples")
    else:
        raise UnsupportedFormatError(f"unsupported WAVE format code 0x{fmt:04x}")
    mono = frames.mean(axis=1) if channels > 1 else frames[:, 0]
    return AudioBuffer(mono, rate)


def _decode_flac(data: bytes) -> AudioBuffer:
    ints, rate, bits = flacio.decode(data)
    frames = ints.astype(np.float64) / (1 << (bits - 1))
    mono = frames.mean(axis=1) if frames.shape[1] > 1 else frames[:, 0]
    return AudioBuffer(mono, rate)


def decode(data: bytes) -> AudioBuffer:
    """Decode WAV or FLAC bytes to a mono AudioBuffer.

    Integer PCM is scaled to [-1, 1) by 2^(bits-1); channels are averaged.
    """
    if data[:4] == b"RIFF":
        return _decode_wav(data)
    if data[:4] == b"fLaC":
        return _decode_flac(data)
    raise UnsupportedFormatError("input is neither RIFF/WAVE nor FLAC")


def write_wav(samples: np.ndarray, sample_rate_hz: int, fmt: str = "pcm16") -> bytes:
    """Encode samples ((n,) mono or (n, ch)) into WAV bytes.

    Float input is clipped to [-1, 1] and quantized for the PCM formats.
    """
    frames = np.asarray(samples, dtype=np.float64)
    if frames.ndim == 1:
        frames = frames[:, None]
    n, channels = frames.shape
    clipped = np.clip(frames, -1.0, 1.0)
    if fmt == "pcm16":
        payload = np.clip(np.rint(clipped * (1 << 15)), -(1 << 15), (1 << 15) - 1)
        payload = payload.astype("<i2").tobytes()
        bits, code = 16, WAVE_FORMAT_PCM
    elif fmt == "pcm24":
        ints = np.clip(np.rint(clipped * (1 << 23)), -(1 << 23), (1 << 23) - 1)
        ints = ints.astype(np.int64).reshape(-1)
        raw = np.empty((ints.size, 3), dtype=np.uint8)
        unsigned = np.where(ints < 0, ints + (1 << 24), ints)
        raw[:, 0] = unsigned & 0xFF
        raw[:, 1] = (unsigned >> 8) & 0xFF
        raw[:, 2] = (unsigned >> 16) & 0xFF
        payload = raw.tobytes()
        bits, code = 24, WAVE_FORMAT_PCM
    elif fmt == "pcm32":
        payload = np.clip(np.rint(clipped * (1 << 31)), -(1 << 31), (1 << 31) - 1)
        payload = payload.astype("<i4").tobytes()
        bits, code = 32, WAVE_FORMAT_PCM
    elif fmt == "float32":
        payload = frames.astype("<f4").tobytes()
        bits, code = 32, WAVE_FORMAT_IEEE_FLOAT
    else:
        raise ValueError(f"unknown WAV format {fmt!r}")

    byte_rate = sample_rate_hz * channels * bits // 8
    block_align = channels * bits // 8
    fmt_chunk = struct.pack(
        "<HHIIHH", code, channels, sample_rate_hz, byte_rate, block_align, bits
    )
    body = b"WAVE"
    body += b"fmt " + struct.pack("<I", len(fmt_chunk)) + fmt_chunk
    body += b"data" + struct.pack("<I", len(payload)) + payload
    if len(payload) & 1:
        body += b"\x00"
    return b"RIFF" + struct.pack("<I", len(body)) + body


@lru_cache(maxsize=64)
def _design_filter(source_rate: int, target_rate: int) -> tuple[np.ndarray, int, int]:
    """Kaiser-windowed sinc prototype for a source->target rational resample.

    The prototype runs at source_rate * L. Its stopband begins at
    _STOPBAND_FRACTION of the lower of the two Nyquist frequencies; the -6 dB
    cutoff sits half a transition band below that.
    """
    g = math.gcd(source_rate, target_rate)
    up = target_rate // g
    down = source_rate // g
    n_taps = _TAPS_PER_PHASE * max(up, down) + 1  # odd length, integer group delay
    attenuation_db = _KAISER_BETA / 0.1102 + 8.7
    transition = (attenuation_db - 7.95) / (2.285 * (n_taps - 1))  # rad/sample
    upsampled_rate = source_rate * up
    stop_edge_hz = _STOPBAND_FRACTION * min(source_rate, target_rate) / 2.0
    cutoff_hz = stop_edge_hz - transition * upsampled_rate / (2.0 * np.pi) / 2.0
    n = np.arange(n_taps, dtype=np.float64) - (n_taps - 1) / 2.0
    angular_cutoff = 2.0 * np.pi * cutoff_hz / upsampled_rate
    taps = (angular_cutoff / np.pi) * np.sinc(angular_cutoff * n / np.pi)
    taps *= np.kaiser(n_taps, _KAISER_BETA)
    taps *= up / taps.sum()
    return taps, up, down


def resample(buf: AudioBuffer, target_rate_hz: int) -> AudioBuffer:
    """Rational polyphase resample; identity when rates already match.

    Output length is round(input_length * target / source), aligned so the
    first output sample coincides with the first input sample.
    """
    if target_rate_hz <= 0:
        raise ValueError("target_rate_hz must be positive")
    if target_rate_hz == buf.sample_rate_hz:
        return AudioBuffer(buf.samples.copy(), target_rate_hz)
    n_in = buf.samples.size
    if n_in == 0:
        return AudioBuffer(np.zeros(0), target_rate_hz)
    taps, up, down = _design_filter(buf.sample_rate_hz, target_rate_hz)
    n_out = (2 * n_in * up + down) // (2 * down)  # round-half-up of n*up/down
    half = (taps.size - 1) // 2
    n_pre_pad = (down - half % down) % down
    n_pre_remove = (half + n_pre_pad) // down
    padded = np.concatenate((np.zeros(n_pre_pad), taps))
    needed = n_pre_remove + n_out
    produced = ((n_in - 1) * up + padded.size - 1) // down + 1
    x = buf.samples
    if produced < needed:
        extra = ((needed - produced) * down + up - 1) // up + 1
        x = np.concatenate((x, np.zeros(extra)))
    y = upfirdn(padded, x, up=up, down=down)
    return AudioBuffer(y[n_pre_remove:n_pre_remove + n_out], target_rate_hz)


def normalize_amplitude(buf: AudioBuffer) -> AudioBuffer:
    """Scale so peak |x| is exactly 1.0; all-zero input passes through."""
    if buf.samples.size == 0:
        return AudioBuffer(buf.samples.copy(), buf.sample_rate_hz)
    peak = float(np.max(np.abs(buf.samples)))
    if peak == 0.0:
        return AudioBuffer(buf.samples.copy(), buf.sample_rate_hz)
    return AudioBuffer(buf.samples / peak, buf.sample_rate_hz)


def fit_duration(buf: AudioBuffer, target_length_samples: int) -> AudioBuffer:
    """Truncate to the first target samples or right-pad with zeros."""
    if target_length_samples <= 0:
        raise ValueError("target_length_samples must be positive")
    n = buf.samples.size
    if n >= target_length_samples:
        fitted = buf.samples[:target_length_samples].copy()
    else:
        fitted = np.concatenate(
            (buf.samples, np.zeros(target_length_samples - n))
        )
    return AudioBuffer(fitted, buf.sample_rate_hz)


def preprocess(buf: AudioBuffer, target_rate_hz: int,
               target_length_samples: int) -> AudioBuffer:
    """decode-side pipeline: resample, peak-normalize, fit to fixed length."""
    out = resample(buf, target_rate_hz)
    out = normalize_amplitude(out)
    return fit_duration(out, target_length_samples)
