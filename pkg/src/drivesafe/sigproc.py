"""Sensor stream preprocessing and window feature extraction.

Physiological channels are band-limited with a low-order IIR (second-order
sections, zero phase) and optionally smoothed with a moving average before
features are taken over trailing windows.  Environmental channels get the
same six window features over 30-sample windows.

All functions are pure over their inputs and hold no shared state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy import signal

from .errors import DegenerateInputError, DomainError


class Channel(str, Enum):
    EMG = "EMG"
    ECG = "ECG"
    EDA = "EDA"
    EEG = "EEG"
    LIGHT = "Light"
    TEMPERATURE = "Temperature"
    HUMIDITY = "Humidity"


# Default sampling rates (samples/s).
DEFAULT_RATES = {
    Channel.EMG: 256.0,
    Channel.ECG: 256.0,
    Channel.EDA: 256.0,
    Channel.EEG: 8.0,
    Channel.LIGHT: 1.0,
    Channel.TEMPERATURE: 1.0,
    Channel.HUMIDITY: 1.0,
}

# Default pass bands per physiological channel, Hz.  None as the low edge
# means the channel is treated as a plain low-pass (EDA carries its signal
# near DC, so a high-pass edge would destroy it).
DEFAULT_BANDS: dict[Channel, tuple[float | None, float]] = {
    Channel.EMG: (20.0, 120.0),
    Channel.ECG: (0.5, 40.0),
    Channel.EDA: (None, 1.0),
    Channel.EEG: (0.5, 3.9),
}

ECG_SMOOTH_WINDOW = 15
ENV_WINDOW = 30

_FILTER_ORDER = 2  # order per edge; sections stay at or below 2 (order <= 4 overall)


@dataclass(frozen=True)
class SensorFrame:
    channel: Channel
    t0_ms: int
    rate: float
    samples: np.ndarray

    def __post_init__(self):
        if self.rate <= 0:
            raise DomainError(f"rate must be positive, got {self.rate}")
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise DomainError("samples must be a non-empty 1-d vector")
        object.__setattr__(self, "samples", samples)

    def with_samples(self, samples: np.ndarray) -> "SensorFrame":
        return replace(self, samples=np.asarray(samples, dtype=float))


@dataclass(frozen=True)
class WindowFeatures:
    mean: float
    min: float
    max: float
    std: float
    end_start_diff: float
    max_min_diff: float


@dataclass(frozen=True)
class EnvSnapshot:
    light: WindowFeatures
    temperature: WindowFeatures
    humidity: WindowFeatures
    window_len: int = ENV_WINDOW


def _sos_padlen(sos: np.ndarray) -> int:
    return 3 * (2 * sos.shape[0] + 1)


def bandpass_filter(frame: SensorFrame, low_hz: float, high_hz: float) -> SensorFrame:
    """Zero-phase Butterworth band-pass; same length and rate as the input.

    Attenuates DC by at least 40 dB and keeps interior pass-band tones
    within 3 dB.  Raises DomainError for an invalid band and
    DegenerateInputError when the frame is shorter than the filter warm-up.
    """
    nyq = frame.rate / 2.0
    if not (0.0 < low_hz < high_hz < nyq):
        raise DomainError(
            f"band [{low_hz}, {high_hz}] invalid for rate {frame.rate} (nyquist {nyq})"
        )
    sos = signal.butter(_FILTER_ORDER, [low_hz / nyq, high_hz / nyq], btype="band", output="sos")
    return _apply_sos(frame, sos)


def lowpass_filter(frame: SensorFrame, high_hz: float) -> SensorFrame:
    """Zero-phase Butterworth low-pass sibling of :func:`bandpass_filter`."""
    nyq = frame.rate / 2.0
    if not (0.0 < high_hz < nyq):
        raise DomainError(f"cutoff {high_hz} invalid for rate {frame.rate}")
    sos = signal.butter(_FILTER_ORDER, high_hz / nyq, btype="low", output="sos")
    return _apply_sos(frame, sos)


def _apply_sos(frame: SensorFrame, sos: np.ndarray) -> SensorFrame:
    padlen = _sos_padlen(sos)
    if frame.samples.size <= padlen:
        raise DegenerateInputError(
            f"frame of {frame.samples.size} samples shorter than filter warm-up ({padlen})"
        )
    return frame.with_samples(signal.sosfiltfilt(sos, frame.samples, padlen=padlen))


def band_limit(frame: SensorFrame) -> SensorFrame:
    """Apply the channel's default band (band-pass, or low-pass for EDA)."""
    if frame.channel not in DEFAULT_BANDS:
        return frame
    low, high = DEFAULT_BANDS[frame.channel]
    if low is None:
        return lowpass_filter(frame, high)
    return bandpass_filter(frame, low, high)


def moving_average(frame: SensorFrame, window: int = ECG_SMOOTH_WINDOW) -> SensorFrame:
    """Trailing moving average; output length is len(input) - window + 1."""
    if window < 1:
        raise DomainError(f"window must be >= 1, got {window}")
    n = frame.samples.size
    if window > n:
        raise DegenerateInputError(f"window {window} exceeds frame length {n}")
    kernel = np.full(window, 1.0 / window)
    return frame.with_samples(np.convolve(frame.samples, kernel, mode="valid"))


def window_features(samples: np.ndarray) -> WindowFeatures:
    """Six summary features over one window; std uses the population divisor."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise DegenerateInputError("window needs at least 2 samples")
    return WindowFeatures(
        mean=float(x.mean()),
        min=float(x.min()),
        max=float(x.max()),
        std=float(x.std(ddof=0)),
        end_start_diff=float(x[-1] - x[0]),
        max_min_diff=float(x.max() - x.min()),
    )


def derivative_features(samples: np.ndarray, rate: float = 1.0) -> tuple[float, float, float, float]:
    """(mean, variance, first-derivative mean, second-derivative mean).

    Derivatives are forward differences scaled by the sample period;
    variance uses the population divisor like the other window features.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size < 3:
        raise DegenerateInputError("derivative features need at least 3 samples")
    if rate <= 0:
        raise DomainError(f"rate must be positive, got {rate}")
    d1 = np.diff(x) * rate
    d2 = np.diff(x, n=2) * rate * rate
    return float(x.mean()), float(x.var(ddof=0)), float(d1.mean()), float(d2.mean())


def env_snapshot(
    light: SensorFrame,
    temperature: SensorFrame,
    humidity: SensorFrame,
    window_len: int = ENV_WINDOW,
) -> EnvSnapshot:
    """Window features over the trailing ``window_len`` samples per channel."""
    feats = []
    for frame in (light, temperature, humidity):
        if frame.samples.size < window_len:
            raise DegenerateInputError(
                f"{frame.channel.value} frame has {frame.samples.size} samples, needs {window_len}"
            )
        feats.append(window_features(frame.samples[-window_len:]))
    return EnvSnapshot(light=feats[0], temperature=feats[1], humidity=feats[2], window_len=window_len)


def preprocess_physiological(frame: SensorFrame) -> SensorFrame:
    """Channel-default band limiting, plus the 15-sample smoother for ECG."""
    out = band_limit(frame)
    if frame.channel is Channel.ECG and out.samples.size >= ECG_SMOOTH_WINDOW:
        out = moving_average(out, ECG_SMOOTH_WINDOW)
    return out
