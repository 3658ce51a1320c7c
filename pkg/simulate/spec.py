"""
MixSpec: parámetros de generación SM/SC. Se carga como structured config de OmegaConf,
así que las claves desconocidas en el YAML son un error.
"""
import logging
import pathlib
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
from omegaconf import OmegaConf
from omegaconf.errors import OmegaConfBaseException

from errors import ConfigError

logger = logging.getLogger(__name__)


MODE_SM = "sm"
MODE_SC = "sc"
STOP_ON_UTTERANCES = "utterances"
STOP_ON_DURATION = "duration"


@dataclass
class MixSpec:
    mode: str = MODE_SC
    # número de hablantes por grabación y sus pesos (uniforme si no se dan)
    speakers_per_recording: List[int] = field(default_factory=lambda: [2])
    speakers_weights: Optional[List[float]] = None
    # SC: enunciados totales; SM: enunciados por hablante
    utterances: int = 20
    utterances_per_speaker: int = 10
    target_duration_s: Optional[float] = None
    stop_on: str = STOP_ON_UTTERANCES
    sm_pause_mean_s: float = 2.0
    sm_allow_replacement: bool = False
    statistics_path: Optional[str] = None
    noise_dir: Optional[str] = None
    snr_choices_db: List[float] = field(default_factory=lambda: [5.0, 10.0, 15.0, 20.0])
    normalize_peak: bool = False
    level_speakers_db: float = 0.0
    reverb: bool = False
    seed: int = 0

    def validate(self, has_statistics: bool = False, has_noise: bool = False) -> None:
        if self.mode not in (MODE_SM, MODE_SC):
            raise ConfigError(f"modo desconocido: {self.mode!r} (sm|sc)")
        if self.stop_on not in (STOP_ON_UTTERANCES, STOP_ON_DURATION):
            raise ConfigError(f"stop_on desconocido: {self.stop_on!r}")
        if not self.speakers_per_recording or min(self.speakers_per_recording) < 1:
            raise ConfigError("speakers_per_recording debe contener enteros >= 1")
        if self.speakers_weights is not None:
            if len(self.speakers_weights) != len(self.speakers_per_recording):
                raise ConfigError("speakers_weights debe tener la misma longitud que speakers_per_recording")
            if min(self.speakers_weights) < 0 or sum(self.speakers_weights) <= 0:
                raise ConfigError("speakers_weights debe ser no negativo y no nulo")
        if self.mode == MODE_SC and not (has_statistics or self.statistics_path):
            raise ConfigError("el modo SC requiere estadísticas (statistics_path)")
        if self.mode == MODE_SM and self.sm_pause_mean_s < 0:
            raise ConfigError("sm_pause_mean_s debe ser >= 0")
        if (has_noise or self.noise_dir) and not self.snr_choices_db:
            raise ConfigError("snr_choices_db no puede estar vacío si hay ruido")
        if self.stop_on == STOP_ON_DURATION and not self.target_duration_s:
            raise ConfigError("stop_on=duration requiere target_duration_s")
        if self.utterances < 1 or self.utterances_per_speaker < 1:
            raise ConfigError("el número de enunciados debe ser >= 1")
        if self.level_speakers_db < 0:
            raise ConfigError("level_speakers_db debe ser >= 0")
        if self.reverb:
            raise ConfigError("la reverberación (convolución con RIR) no está soportada")

    def choose_speaker_count(self, rng: np.random.Generator) -> int:
        counts = self.speakers_per_recording
        if len(counts) == 1:
            return int(counts[0])
        if self.speakers_weights is None:
            return int(counts[rng.integers(len(counts))])
        weights = np.asarray(self.speakers_weights, dtype=np.float64)
        return int(counts[rng.choice(len(counts), p=weights / weights.sum())])


def load_mix_spec(path: Optional[Union[str, pathlib.Path]] = None,
                  overrides: Sequence[str] = (), **values) -> MixSpec:
    """YAML opcional + overrides `clave=valor` + valores explícitos (ganan los últimos)"""
    try:
        config = OmegaConf.structured(MixSpec)
        if path is not None:
            config = OmegaConf.merge(config, OmegaConf.load(str(path)))
        if overrides:
            config = OmegaConf.merge(config, OmegaConf.from_dotlist(list(overrides)))
        explicit = {k: v for k, v in values.items() if v is not None}
        if explicit:
            config = OmegaConf.merge(config, explicit)
        return OmegaConf.to_object(config)
    except OmegaConfBaseException as e:
        raise ConfigError(f"configuración de mezcla inválida: {e}") from None
