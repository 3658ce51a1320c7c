# main.py - Punto de entrada único: ingesta, estadísticas, simulación SM/SC, pares, pérdidas y DER
import argparse
import json
import logging
import pathlib
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from omegaconf import OmegaConf
from omegaconf.errors import OmegaConfBaseException

from config import RunConfig, config_snapshot, load_run_config
from corpus.audio import AudioStore, read_wav, write_wav
from corpus.pool import build_pool, load_pool, pool_from_vad, pool_statistics, read_speaker_map, save_pool
from corpus.rttm import load_annotations, save_annotations
from errors import ConfigError, SimConvError
from pitloss.bridge import evaluate_tensor_files, format_breakdown
from score.directory import format_records, format_table, score_directory
from simulate.batch import generate_batch
from simulate.noise import NoisePool
from simulate.pairs import derive_two_speaker_subset
from simulate.spec import MODE_SC, MODE_SM
from stats.io import load_statistics, save_statistics
from stats.turns import estimate_pooled_statistics, estimate_turn_statistics

# Configuración de logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

VERSION = "1.0.0"
RUN_RECORD = "run_record.json"
POOL_FILE = "pool.json"
STATS_FILE = "turn_stats.txt"
SCORE_FILE = "score.jsonl"
LOSSES_FILE = "losses.json"
REPLAYABLE = ('ingest', 'estimate-stats', 'simulate', 'derive-pairs', 'losses', 'score')


@dataclass
class RunRecord:
    """Registro de reproducibilidad: basta para regenerar cualquier artefacto"""
    command: str
    inputs: Dict[str, Any]
    config: Dict[str, Any]
    seed: int
    version: str = VERSION
    outputs: List[str] = field(default_factory=list)


class SimConvToolkit:
    """Ejecuta un subcomando con una configuración ya resuelta"""

    def __init__(self, config: RunConfig, as_json: bool = False):
        self.config = config
        self.as_json = as_json
        self.output_root = pathlib.Path(config.output_root)

    def write_run_record(self, command: str, inputs: Dict[str, Any], outputs: Sequence[str] = ()) -> pathlib.Path:
        record = RunRecord(command, inputs, config_snapshot(self.config), self.config.seed,
                           outputs=list(outputs))
        self.output_root.mkdir(parents=True, exist_ok=True)
        path = self.output_root / RUN_RECORD
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(record.__dict__, f, indent=2, ensure_ascii=False)
        return path

    # ------------------------------------------------------------------ ingest
    def ingest(self, audio_dir: str, annotations: Optional[str] = None,
               speaker_map: Optional[str] = None) -> pathlib.Path:
        """Pool de segmentos desde referencias RTTM/listas o, sin anotaciones, desde VAD"""
        cfg = self.config.ingest
        if annotations:
            pool = build_pool(load_annotations(annotations), audio_dir, cfg.min_segment_s,
                              cfg.snr_floor_db, cfg.sample_rate, self.config.workers)
        else:
            mapping = read_speaker_map(speaker_map) if speaker_map else None
            pool = pool_from_vad(audio_dir, mapping, cfg.min_segment_s, cfg.snr_floor_db,
                                 cfg.vad_threshold_db, cfg.vad_min_speech_s, cfg.vad_min_gap_s,
                                 self.config.workers)

        path = self.output_root / POOL_FILE
        save_pool(pool, path)
        for speaker, (count, seconds) in sorted(pool_statistics(pool).items()):
            logger.debug(f"  {speaker}: {count} segmentos, {seconds:.1f}s")
        print(f"✅ Pool: {len(pool.speakers)} hablantes, {pool.num_segments} segmentos → {path}")
        self.write_run_record('ingest', {'audio_dir': audio_dir, 'annotations': annotations,
                                         'speaker_map': speaker_map}, [POOL_FILE])
        return path

    # ----------------------------------------------------------- estimate-stats
    def estimate_stats(self, references: Sequence[str]) -> pathlib.Path:
        """`ruta` o `nombre=ruta`; con varias fuentes se agregan (opcionalmente igualadas)"""
        cfg = self.config.stats
        sources: Dict[str, List] = {}
        for item in references:
            name, _, path = item.rpartition('=')
            sources[name or path] = load_annotations(path)

        if len(sources) == 1 and not cfg.equalize:
            statistics = estimate_turn_statistics(next(iter(sources.values())), cfg.bin_width_s)
        else:
            statistics = estimate_pooled_statistics(sources, cfg.bin_width_s, cfg.equalize, self.config.seed)

        path = self.output_root / STATS_FILE
        save_statistics(statistics, path)
        print(f"✅ Estadísticas ({statistics.transitions} transiciones) → {path}")
        self.write_run_record('estimate-stats', {'references': list(references)}, [STATS_FILE])
        return path

    # ----------------------------------------------------------------- simulate
    def simulate(self, mode: str, pool_path: str, count: int) -> pathlib.Path:
        spec = self.config.mix
        spec.mode = mode
        statistics = None
        if mode == MODE_SC:
            if not spec.statistics_path:
                raise ConfigError("el modo SC requiere --statistics (o mix.statistics_path)")
            if not pathlib.Path(spec.statistics_path).is_file():
                raise FileNotFoundError(f"no existe el fichero de estadísticas: {spec.statistics_path}")
            statistics = load_statistics(spec.statistics_path)
        spec.validate(has_statistics=statistics is not None)

        pool = load_pool(pool_path)
        store = AudioStore.for_pool(pool, resample=True)
        noise_pool = NoisePool.from_directory(spec.noise_dir, pool.sample_rate) if spec.noise_dir else None

        output_dir = self.output_root / mode
        manifest = generate_batch(spec, pool, store, statistics, count, output_dir, noise_pool,
                                  self.config.workers)
        failed = [r.id for r in manifest if r.status != 'ok']
        print(f"✅ {len(manifest) - len(failed)}/{count} conversaciones {mode.upper()} → {output_dir}")
        if failed:
            print(f"⚠️ Con error: {', '.join(failed)}")
        self.write_run_record('simulate', {'mode': mode, 'pool': pool_path, 'count': count},
                              [f"{mode}/"])
        return output_dir

    # -------------------------------------------------------------- derive-pairs
    def derive_pairs(self, annotations: str, audio_dir: str) -> pathlib.Path:
        """Subconjuntos de 2 hablantes: se borra del audio toda la voz de los demás"""
        output_dir = self.output_root / 'pairs'
        total = 0
        for annotation in load_annotations(annotations):
            samples, sample_rate = read_wav(pathlib.Path(audio_dir) / f"{annotation.recording_id}.wav")
            for subset in derive_two_speaker_subset(annotation, samples, sample_rate):
                write_wav(output_dir / 'wav' / f"{subset.pair_id}.wav", subset.samples, sample_rate)
                save_annotations([subset.annotation.normalized()], output_dir / 'rttm' / f"{subset.pair_id}.rttm")
                total += 1
        print(f"✅ {total} pares de hablantes → {output_dir}")
        self.write_run_record('derive-pairs', {'annotations': annotations, 'audio_dir': audio_dir}, ['pairs/'])
        return output_dir

    # ------------------------------------------------------------------- losses
    def losses(self, posteriors: str, labels: str, existence: Optional[str] = None) -> str:
        result = evaluate_tensor_files(posteriors, labels, existence, self.config.losses.alpha)
        self.output_root.mkdir(parents=True, exist_ok=True)
        with open(self.output_root / LOSSES_FILE, 'w', encoding='utf-8') as f:
            json.dump(result.as_dict(), f, indent=2)
        text = format_breakdown(result, self.as_json)
        print(text)
        self.write_run_record('losses', {'posteriors': posteriors, 'labels': labels,
                                         'existence': existence}, [LOSSES_FILE])
        return text

    # -------------------------------------------------------------------- score
    def score(self, ref_dir: str, hyp_dir: str) -> float:
        cfg = self.config.score
        result = score_directory(ref_dir, hyp_dir, cfg.collar_s, cfg.median, cfg.score_overlap,
                                 cfg.window, cfg.frame_step, cfg.threshold, self.config.workers)
        records = format_records(result)
        self.output_root.mkdir(parents=True, exist_ok=True)
        with open(self.output_root / SCORE_FILE, 'w', encoding='utf-8') as f:
            f.write(records + '\n')

        if self.as_json:
            print(records)
        else:
            print(format_table(result))
            print(f"DER {result.total.der * 100:.2f}")
        self.write_run_record('score', {'ref': ref_dir, 'hyp': hyp_dir}, [SCORE_FILE])
        return result.total.der


def replay(record_path: str, output_root: Optional[str] = None, workers: Optional[int] = None) -> None:
    """Regenera las salidas de cualquier ejecución a partir de su run_record.json"""
    with open(record_path, 'r', encoding='utf-8') as f:
        record = json.load(f)
    command = record.get('command')
    if command not in REPLAYABLE:
        raise ConfigError(f"{record_path}: comando desconocido en el registro: {command!r}")
    if record.get('version') != VERSION:
        logger.warning(f"El registro es de la versión {record.get('version')}, ejecutando {VERSION}")

    try:
        base = OmegaConf.structured(RunConfig(output_root=output_root or 'out'))
        config: RunConfig = OmegaConf.to_object(OmegaConf.merge(base, record['config']))
    except OmegaConfBaseException as e:
        raise ConfigError(f"{record_path}: configuración inválida: {e}") from None
    if workers is not None:
        config.workers = workers
    config.validate()

    inputs = record['inputs']
    toolkit = SimConvToolkit(config)
    logger.info(f"🔁 Reproduciendo {command} desde {record_path}")
    if command == 'ingest':
        toolkit.ingest(inputs['audio_dir'], inputs.get('annotations'), inputs.get('speaker_map'))
    elif command == 'estimate-stats':
        toolkit.estimate_stats(inputs['references'])
    elif command == 'simulate':
        toolkit.simulate(inputs['mode'], inputs['pool'], inputs['count'])
    elif command == 'derive-pairs':
        toolkit.derive_pairs(inputs['annotations'], inputs['audio_dir'])
    elif command == 'losses':
        toolkit.losses(inputs['posteriors'], inputs['labels'], inputs.get('existence'))
    elif command == 'score':
        toolkit.score(inputs['ref'], inputs['hyp'])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='YAML de configuración')
    common.add_argument('-o', '--override', action='append', default=[], metavar='CLAVE=VALOR',
                        help='override con clave punteada, p. ej. -o mix.utterances=30')
    common.add_argument('--seed', type=int, help='semilla global')
    common.add_argument('--workers', type=int, help='número de workers (por defecto $SIMCONV_WORKERS o 1)')
    common.add_argument('--output-root', help='directorio raíz de salida')
    common.add_argument('--json', action='store_true', help='salida legible por máquina')
    common.add_argument('--verbose', action='store_true', help='logging DEBUG')

    parser = argparse.ArgumentParser(prog='simconv', description='Simulación de conversaciones y evaluación de diarización')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('ingest', parents=[common], help='construir el pool de segmentos')
    p.add_argument('--audio-dir', required=True)
    p.add_argument('--annotations', help='RTTM, lista de segmentos o directorio de *.rttm (sin él se usa VAD)')
    p.add_argument('--speaker-map', help='fichero `grabación hablante` para el modo VAD')
    p.add_argument('--snr-floor-db', type=float)
    p.add_argument('--min-segment-s', type=float)
    p.add_argument('--sample-rate', type=int, choices=(8000, 16000))

    p = sub.add_parser('estimate-stats', parents=[common], help='estimar estadísticas de turnos')
    p.add_argument('--rttm', action='append', required=True, metavar='[NOMBRE=]RUTA')
    p.add_argument('--bin-width-s', type=float)
    p.add_argument('--equalize', action='store_true', default=None)

    p = sub.add_parser('simulate', parents=[common], help='generar conversaciones SM o SC')
    p.add_argument('mode', choices=(MODE_SM, MODE_SC))
    p.add_argument('--pool', required=True)
    p.add_argument('--count', type=int, default=1)
    p.add_argument('--statistics')
    p.add_argument('--noise-dir')

    p = sub.add_parser('replay', parents=[common], help='regenerar las salidas de una ejecución desde su run_record.json')
    p.add_argument('record')

    p = sub.add_parser('derive-pairs', parents=[common], help='subconjuntos de 2 hablantes')
    p.add_argument('--annotations', required=True)
    p.add_argument('--audio-dir', required=True)

    p = sub.add_parser('losses', parents=[common], help='pérdidas desde ficheros tensoriales')
    p.add_argument('--posteriors', required=True)
    p.add_argument('--labels', required=True)
    p.add_argument('--existence')
    p.add_argument('--alpha', type=float)

    p = sub.add_parser('score', parents=[common], help='DER de un directorio de hipótesis')
    p.add_argument('--ref', required=True)
    p.add_argument('--hyp', required=True)
    p.add_argument('--collar', type=float)
    p.add_argument('--overlap', dest='score_overlap', action='store_true', default=None)
    p.add_argument('--no-overlap', dest='score_overlap', action='store_false')
    p.add_argument('--median', choices=('auto', 'on', 'off'))
    return parser


def _flags(args: argparse.Namespace) -> Dict[str, Any]:
    """Flags explícitos como claves punteadas de RunConfig"""
    get = lambda name: getattr(args, name, None)
    return {
        'seed': args.seed,
        'workers': args.workers,
        'output_root': args.output_root,
        'ingest.snr_floor_db': get('snr_floor_db'),
        'ingest.min_segment_s': get('min_segment_s'),
        'ingest.sample_rate': get('sample_rate'),
        'stats.bin_width_s': get('bin_width_s'),
        'stats.equalize': get('equalize'),
        'mix.statistics_path': get('statistics'),
        'mix.noise_dir': get('noise_dir'),
        'losses.alpha': get('alpha'),
        'score.collar_s': get('collar'),
        'score.score_overlap': get('score_overlap'),
        'score.median': get('median'),
    }


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Ejecuta la CLI y devuelve el código de salida (0 ok, 2 error de uso o validación, 1 inesperado)"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    logging.getLogger().setLevel(logging.DEBUG if args.verbose else logging.INFO)
    try:
        if args.command == 'replay':
            replay(args.record, args.output_root, args.workers)
            return 0

        config = load_run_config(args.config, args.override, _flags(args))
        toolkit = SimConvToolkit(config, as_json=args.json)
        if args.command == 'ingest':
            toolkit.ingest(args.audio_dir, args.annotations, args.speaker_map)
        elif args.command == 'estimate-stats':
            toolkit.estimate_stats(args.rttm)
        elif args.command == 'simulate':
            toolkit.simulate(args.mode, args.pool, args.count)
        elif args.command == 'derive-pairs':
            toolkit.derive_pairs(args.annotations, args.audio_dir)
        elif args.command == 'losses':
            toolkit.losses(args.posteriors, args.labels, args.existence)
        elif args.command == 'score':
            toolkit.score(args.ref, args.hyp)
        return 0
    except (SimConvError, FileNotFoundError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return 2
    except Exception as e:
        logger.exception(f"Error inesperado: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(run())
