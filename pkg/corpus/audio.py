"""
E/S de audio WAV PCM 16 bits mono y acceso cacheado a las grabaciones fuente.
"""
from __future__ import annotations
import logging
import math
import pathlib
import threading
from typing import Dict, Optional, Tuple, Union

import numpy as np
import soundfile as sf
from scipy.signal import resample_poly

from corpus.segments import SAMPLE_RATES, SegmentPool, SpeechSegment
from errors import ValidationError

logger = logging.getLogger(__name__)

PCM16_MAX = 32767
PCM16_SCALE = 32768.0


def read_wav(path: Union[str, pathlib.Path]) -> Tuple[np.ndarray, int]:
    """Devuelve las muestras en float64 (escala [-1, 1)) y la frecuencia de muestreo"""
    info = sf.info(str(path))
    if info.channels != 1:
        raise ValidationError(f"{path}: se requiere audio mono, tiene {info.channels} canales")
    if info.subtype != "PCM_16":
        raise ValidationError(f"{path}: se requiere PCM 16 bits, es {info.subtype}")
    if info.samplerate not in SAMPLE_RATES:
        raise ValidationError(f"{path}: frecuencia no soportada ({info.samplerate} Hz)")
    samples, sample_rate = sf.read(str(path), dtype="float64")
    return samples, sample_rate


def quantize_pcm16(samples: np.ndarray) -> Tuple[np.ndarray, int]:
    """Convierte a int16 recortando; devuelve también el número de muestras recortadas"""
    scaled = np.round(np.asarray(samples, dtype=np.float64) * PCM16_SCALE)
    clipped = int(np.count_nonzero((scaled > PCM16_MAX) | (scaled < -PCM16_SCALE)))
    return np.clip(scaled, -PCM16_SCALE, PCM16_MAX).astype(np.int16), clipped


def write_wav(path: Union[str, pathlib.Path], samples: np.ndarray, sample_rate: int) -> int:
    """Escribe PCM 16 bits mono; devuelve el número de muestras recortadas"""
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pcm, clipped = quantize_pcm16(samples)
    if clipped:
        logger.warning(f"{path.name}: {clipped} muestras recortadas al cuantizar")
    sf.write(str(path), pcm, sample_rate, subtype="PCM_16")
    return clipped


def frame_signal(samples: np.ndarray, frame_len: int, hop: int, pad: bool = True) -> np.ndarray:
    """Tramas (n_frames x frame_len); con pad la última trama parcial se rellena con ceros, sin él se descarta"""
    samples = np.asarray(samples, dtype=np.float64)
    if len(samples) == 0 or (not pad and len(samples) < frame_len):
        return np.zeros((0, frame_len))
    if not pad:
        return np.lib.stride_tricks.sliding_window_view(samples, frame_len)[::hop]
    n_frames = 1 + max(0, math.ceil((len(samples) - frame_len) / hop))
    needed = (n_frames - 1) * hop + frame_len
    padded = np.pad(samples, (0, needed - len(samples)))
    return np.lib.stride_tricks.sliding_window_view(padded, frame_len)[::hop]


def to_samples(seconds: float, sample_rate: int) -> int:
    return int(round(seconds * sample_rate))


def resample(samples: np.ndarray, source_rate: int, target_rate: int) -> np.ndarray:
    if source_rate == target_rate:
        return samples
    factor = math.gcd(source_rate, target_rate)
    return resample_poly(samples, target_rate // factor, source_rate // factor)


class AudioStore:
    """Acceso de solo lectura a las grabaciones fuente, con caché en memoria"""

    def __init__(self, sample_rate: int, audio_dir: Optional[Union[str, pathlib.Path]] = None,
                 resample: bool = False):
        self.sample_rate = sample_rate
        self.audio_dir = pathlib.Path(audio_dir) if audio_dir else None
        self.resample = resample
        self._cache: Dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    @classmethod
    def for_pool(cls, pool: SegmentPool, audio_dir: Optional[Union[str, pathlib.Path]] = None,
                 resample: bool = False) -> "AudioStore":
        return cls(pool.sample_rate, audio_dir or pool.audio_dir, resample=resample)

    def add(self, recording_id: str, samples: np.ndarray) -> None:
        """Registra audio ya cargado (p. ej. audio derivado o sintético)"""
        samples = np.asarray(samples, dtype=np.float64)
        samples.setflags(write=False)
        self._cache[recording_id] = samples

    def path_for(self, recording_id: str) -> pathlib.Path:
        if self.audio_dir is None:
            raise FileNotFoundError(f"sin directorio de audio para {recording_id}")
        return self.audio_dir / f"{recording_id}.wav"

    def load(self, recording_id: str) -> np.ndarray:
        with self._lock:
            cached = self._cache.get(recording_id)
        if cached is not None:
            return cached

        samples, sample_rate = read_wav(self.path_for(recording_id))
        if sample_rate != self.sample_rate and self.resample:
            samples = resample(samples, sample_rate, self.sample_rate)
        elif sample_rate != self.sample_rate:
            raise ValidationError(
                f"{recording_id}: {sample_rate} Hz, el pool trabaja a {self.sample_rate} Hz")
        samples.setflags(write=False)
        with self._lock:
            self._cache[recording_id] = samples
        return samples

    def segment(self, segment: SpeechSegment) -> np.ndarray:
        audio = self.load(segment.source_audio)
        start = to_samples(segment.onset, self.sample_rate)
        stop = start + to_samples(segment.duration, self.sample_rate)
        if stop == len(audio) + 1:
            # redondeo de onset y duración por separado
            stop = len(audio)
        if stop > len(audio):
            raise ValidationError(
                f"{segment.source_audio}: el segmento [{segment.onset}, {segment.end}] excede el audio")
        return audio[start:stop]
