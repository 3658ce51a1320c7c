"""
Aumentado con ruido de fondo (tipo MUSAN) a una SNR elegida de una lista.
"""
from __future__ import annotations
import logging
import pathlib
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from corpus.audio import read_wav, resample
from errors import SimulationError, ValidationError

logger = logging.getLogger(__name__)


class NoisePool:
    """Grabaciones de ruido cargadas en memoria, a la frecuencia de la mezcla"""

    def __init__(self, recordings: Dict[str, np.ndarray], sample_rate: int):
        if not recordings:
            raise ValidationError("el pool de ruido está vacío")
        self.sample_rate = sample_rate
        self.ids: List[str] = sorted(recordings)
        self._recordings = recordings
        for noise_id in self.ids:
            if not np.any(recordings[noise_id]):
                raise ValidationError(f"ruido {noise_id} completamente silencioso")

    @classmethod
    def from_directory(cls, noise_dir: Union[str, pathlib.Path], sample_rate: int) -> "NoisePool":
        recordings = {}
        for path in sorted(pathlib.Path(noise_dir).rglob("*.wav")):
            samples, rate = read_wav(path)
            recordings[path.stem] = resample(samples, rate, sample_rate)
        logger.info(f"Pool de ruido: {len(recordings)} grabaciones de {noise_dir}")
        return cls(recordings, sample_rate)

    def __len__(self) -> int:
        return len(self.ids)

    def get(self, noise_id: str) -> np.ndarray:
        return self._recordings[noise_id]


@dataclass(frozen=True)
class NoiseMix:
    samples: np.ndarray
    noise_id: str
    snr_db: float
    gain: float


def fit_length(noise: np.ndarray, length: int, rng: np.random.Generator) -> np.ndarray:
    """Recorta desde un offset aleatorio o repite el ruido hasta cubrir la longitud"""
    if len(noise) >= length:
        offset = int(rng.integers(len(noise) - length + 1))
        return noise[offset:offset + length]
    return np.resize(noise, length)


def mix_noise(audio: np.ndarray, noise_pool: NoisePool, snr_choices_db: Sequence[float],
              rng: np.random.Generator, speech_mask: Optional[np.ndarray] = None) -> NoiseMix:
    """
    Elige un ruido y una SNR de forma uniforme y escala el ruido para que
    10·log10(P_voz / P_ruido) sea exactamente la SNR elegida, con ambas potencias
    medidas sobre las muestras de voz de la mezcla limpia.
    """
    if not snr_choices_db:
        raise ValidationError("snr_choices_db vacío")
    audio = np.asarray(audio, dtype=np.float64)
    mask = speech_mask if speech_mask is not None else audio != 0
    if not np.any(mask) or not np.any(audio[mask]):
        raise SimulationError("mezcla limpia silenciosa: SNR indefinida")

    noise_id = noise_pool.ids[int(rng.integers(len(noise_pool)))]
    snr_db = float(snr_choices_db[int(rng.integers(len(snr_choices_db)))])
    noise = fit_length(noise_pool.get(noise_id), len(audio), rng)

    speech_power = float(np.mean(audio[mask] ** 2))
    noise_power = float(np.mean(noise[mask] ** 2))
    if noise_power == 0:
        raise SimulationError(f"el ruido {noise_id} es silencioso en el tramo de voz")
    gain = float(np.sqrt(speech_power / (noise_power * 10 ** (snr_db / 10))))
    return NoiseMix(audio + gain * noise, noise_id, snr_db, gain)


def measure_snr(clean: np.ndarray, mixed: np.ndarray, mask: np.ndarray) -> float:
    """SNR re-medida sobre la salida (ruido = salida - limpia)"""
    noise = mixed[mask] - clean[mask]
    return float(10 * np.log10(np.mean(clean[mask] ** 2) / np.mean(noise ** 2)))
