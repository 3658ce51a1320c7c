# config.py - Configuración de ejecución: YAML + overrides `clave=valor` + flags (ganan los flags)
import logging
import os
import pathlib
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence, Union

from omegaconf import OmegaConf
from omegaconf.errors import OmegaConfBaseException

from corpus.vad import DEFAULT_MIN_GAP_S, DEFAULT_MIN_SPEECH_S, DEFAULT_THRESHOLD_DB
from errors import ConfigError
from simulate.spec import MixSpec

logger = logging.getLogger(__name__)

WORKERS_ENV = "SIMCONV_WORKERS"


def default_workers() -> int:
    value = os.environ.get(WORKERS_ENV)
    if not value:
        return 1
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} debe ser un entero, recibido {value!r}") from None


@dataclass
class IngestConfig:
    min_segment_s: float = 0.0
    snr_floor_db: Optional[float] = 15.0
    sample_rate: Optional[int] = None
    vad_threshold_db: float = DEFAULT_THRESHOLD_DB
    vad_min_speech_s: float = DEFAULT_MIN_SPEECH_S
    vad_min_gap_s: float = DEFAULT_MIN_GAP_S


@dataclass
class StatsConfig:
    bin_width_s: float = 0.01
    equalize: bool = False


@dataclass
class ScoreConfig:
    collar_s: float = 0.0
    median: str = "auto"
    score_overlap: bool = True
    window: int = 11
    frame_step: float = 0.1
    threshold: float = 0.5


@dataclass
class LossConfig:
    alpha: float = 0.2


@dataclass
class RunConfig:
    """Configuración completa de una ejecución; `seed` es la semilla global"""
    seed: int = 0
    workers: Optional[int] = None    # None → $SIMCONV_WORKERS o 1
    output_root: str = "out"
    mix: MixSpec = field(default_factory=MixSpec)
    ingest: IngestConfig = field(default_factory=IngestConfig)
    stats: StatsConfig = field(default_factory=StatsConfig)
    score: ScoreConfig = field(default_factory=ScoreConfig)
    losses: LossConfig = field(default_factory=LossConfig)

    def validate(self) -> None:
        if self.workers is None:
            self.workers = default_workers()
        if self.workers < 1:
            raise ConfigError(f"workers debe ser >= 1, recibido {self.workers}")
        if self.score.collar_s < 0:
            raise ConfigError("score.collar_s debe ser >= 0")
        if self.stats.bin_width_s <= 0:
            raise ConfigError("stats.bin_width_s debe ser > 0")
        if self.ingest.sample_rate not in (None, 8000, 16000):
            raise ConfigError(f"ingest.sample_rate no soportada: {self.ingest.sample_rate}")


def load_run_config(path: Optional[Union[str, pathlib.Path]] = None,
                    overrides: Sequence[str] = (),
                    flags: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """
    Orden de precedencia: valores por defecto < YAML < overrides `-o a.b=c` < flags explícitos.
    `flags` usa claves con puntos (p. ej. "score.collar_s"); los valores None se ignoran.
    La semilla global se copia a mix.seed.
    """
    try:
        config = OmegaConf.structured(RunConfig)
        if path is not None:
            config = OmegaConf.merge(config, OmegaConf.load(str(path)))
        if overrides:
            config = OmegaConf.merge(config, OmegaConf.from_dotlist(list(overrides)))
        for key, value in (flags or {}).items():
            if value is not None:
                OmegaConf.update(config, key, value, merge=True)
        config.mix.seed = config.seed
        run_config: RunConfig = OmegaConf.to_object(config)
    except OmegaConfBaseException as e:
        raise ConfigError(f"configuración inválida: {e}") from None
    run_config.validate()
    return run_config


def config_snapshot(config: RunConfig) -> dict:
    """Configuración resuelta sin la raíz de salida, para el registro de reproducibilidad"""
    snapshot = OmegaConf.to_container(OmegaConf.structured(config))
    snapshot.pop("output_root", None)
    return snapshot
