"""WAV decoding: mono float32 at a fixed target rate.

Deliberately no trimming or silence removal; leading and trailing silence
stay in the signal and therefore in the pooled embedding.
"""

import math
import warnings

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from .errors import AudioDecodeError

# full-scale divisors per integer PCM width
_INT_SCALE = {
    np.dtype(np.int16): 32768.0,
    np.dtype(np.int32): 2147483648.0,
}


def to_float(data: np.ndarray) -> np.ndarray:
    """Map PCM samples to float64 in roughly [-1, 1]."""
    if data.dtype in _INT_SCALE:
        return data.astype(np.float64) / _INT_SCALE[data.dtype]
    if data.dtype == np.uint8:  # 8-bit WAV is unsigned with midpoint 128
        return (data.astype(np.float64) - 128.0) / 128.0
    if data.dtype in (np.dtype(np.float32), np.dtype(np.float64)):
        return data.astype(np.float64)
    raise AudioDecodeError(f"unsupported sample dtype {data.dtype}")


def to_mono(data: np.ndarray) -> np.ndarray:
    if data.ndim == 1:
        return data
    if data.ndim == 2:
        return data.mean(axis=1)
    raise AudioDecodeError(f"expected 1-D or 2-D sample array, got shape {data.shape}")


def resample(signal: np.ndarray, rate: int, target_rate: int) -> np.ndarray:
    if rate == target_rate:
        return signal
    g = math.gcd(target_rate, rate)
    return resample_poly(signal, target_rate // g, rate // g)


def load_audio(path, target_rate: int = 16000) -> np.ndarray:
    """Decode a WAV file to mono float32 at target_rate.

    Raises AudioDecodeError for anything unreadable so batch drivers can
    skip the file and keep going.
    """
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # non-data chunks are fine
            rate, data = wavfile.read(path)
    except AudioDecodeError:
        raise
    except (ValueError, OSError, EOFError) as exc:
        raise AudioDecodeError(f"{path}: {exc}") from None
    if data.size == 0:
        raise AudioDecodeError(f"{path}: no samples")
    signal = resample(to_mono(to_float(data)), int(rate), target_rate)
    return signal.astype(np.float32)
