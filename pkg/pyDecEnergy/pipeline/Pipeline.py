import json
import tomllib

from pathlib import Path
from typing import Any, Dict, List, Literal, NamedTuple, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from rich.console import Console
from rich import pretty

from ..bitdepth.FeatureGroup import resolve_groups
from ..bitdepth.PhiSearch import PhiSearchResult, resolve_phi, search_phi
from ..bitdepth.ZetaSweep import ZetaSweepResult, sweep_zeta, write_curve
from ..constants import (EXIT_CONVERGENCE, EXIT_DATA, EXIT_OK, EXIT_USAGE, OBJECTIVES, VARIANTS)
from ..dataset.DatasetFile import ENERGIES_FILE, FEATURES_FILE, MANIFEST_FILE, load_dataset, read_dataset
from ..dataset.EnergyDataset import EnergyDataset
from ..energy_helpers import bits_to_str, comment_lines, file_sha256, text_sha256
from ..Exceptions_custom import (AlignmentError, CatalogError, ConvergenceError, DatasetError,
                                 GroupPartitionError, OverlapError, PipelineError, SplitError)
from ..model.EnergyModel import EnergyModel
from ..report.EvaluationReport import EvaluationReport
from ..report.renderers import evaluate_zeta_columns, format_percent, render_curve, render_table3, render_table4
from ..trainer.Trainer import Trainer
from ..trainer.TrainingConfig import TrainingConfig
from ..version import __version__

pretty.install()
con = Console()

FAILED_MARKER = 'FAILED'
PROVENANCE_FILE = 'provenance.json'

DATA_ERRORS = (DatasetError, AlignmentError, SplitError, OverlapError, GroupPartitionError,
               CatalogError, ValueError, KeyError, OSError)


def exit_code_for(err: BaseException) -> int:
    """Exit status of an error raised by a stage or a subcommand"""

    if isinstance(err, PipelineError) and isinstance(err.errArgs, BaseException):
        err = err.errArgs
    if isinstance(err, ConvergenceError):
        return EXIT_CONVERGENCE
    if isinstance(err, DATA_ERRORS):
        return EXIT_DATA
    return EXIT_USAGE


class DatasetSource(BaseModel):
    """Where a dataset comes from: three CSV/TOML files or a written dataset"""

    model_config = ConfigDict(frozen=True, extra='forbid')

    features: Optional[str] = None
    energies: Optional[str] = None
    manifest: Optional[str] = None
    dataset: Optional[str] = None

    @model_validator(mode='after')
    def _check_files(self) -> 'DatasetSource':
        triple = [self.features, self.energies, self.manifest]
        if self.dataset is None:
            if any(ff is None for ff in triple):
                raise ValueError('features, energies and manifest are required unless dataset is given')
        elif any(ff is not None for ff in triple):
            raise ValueError('dataset excludes features, energies and manifest')
        return self

    def paths(self) -> List[str]:
        if self.dataset is not None:
            return [self.dataset]
        return [self.features, self.energies, self.manifest]   # type: ignore


class PipelineSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    output_dir: str = 'output'
    variants: List[str] = Field(default_factory=lambda: ['FU'], min_length=1)
    objective: Literal['absolute_lsq', 'relative_weighted_lsq'] = 'relative_weighted_lsq'
    solver: Literal['active_set', 'trf'] = 'active_set'
    seed: int = 0
    strict: bool = False

    @field_validator('objective', mode='before')
    @classmethod
    def _short_objective(cls, value):
        return OBJECTIVES.get(value, value)

    @field_validator('variants')
    @classmethod
    def _check_variants(cls, value: List[str]) -> List[str]:
        for vv in value:
            if vv not in VARIANTS:
                raise ValueError(f'variant {vv} must be one of {VARIANTS}')
        if len(set(value)) != len(value):
            raise ValueError('variants must not repeat')
        return value


class SweepSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    validation: Optional[str] = None
    phi: str = 'table1'
    grid: Union[str, List[float], None] = None
    table_zetas: List[float] = Field(default_factory=lambda: [0.0, 0.66], min_length=1)


class SearchSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    validation: Optional[str] = None
    groups: str = 'table1'
    grid: Union[str, List[float], None] = None


class PipelineConfig(BaseModel):
    """Declarative description of a pipeline run (TOML).

    Sections: [pipeline], [train], [[validate]], optional [sweep] and [search].
    Relative paths are resolved against the working directory of the run.
    """

    model_config = ConfigDict(frozen=True, extra='forbid')

    pipeline: PipelineSection = Field(default_factory=PipelineSection)
    train: DatasetSource
    validate_: List[DatasetSource] = Field(default_factory=list, alias='validate')
    sweep: Optional[SweepSection] = None
    search: Optional[SearchSection] = None

    @classmethod
    def read(cls, filename: Union[str, Path]) -> 'PipelineConfig':
        """Read a pipeline configuration file.

        :raises ValueError: if the file is not valid TOML or the settings are invalid
        """

        with open(filename, 'rb') as fh:
            data = tomllib.load(fh)
        return cls.model_validate(data)

    @property
    def validate_sets(self) -> List[DatasetSource]:
        return self.validate_

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form of the configuration"""
        return text_sha256(json.dumps(self.model_dump(mode='json', by_alias=True),
                                      sort_keys=True, separators=(',', ':')))


class PipelineResult(NamedTuple):
    exit_code: int
    output_dir: Optional[Path]
    failed_stage: Optional[str]
    message: str


class Pipeline(object):
    """Runs ingest, train, validate and the optional sweep and search stages.

    Artifacts written to the output directory:
        model.txt          model of the last variant (model_<variant>.txt for the others)
        model_scaled.txt   model with the best zeta and phi (sweep or search)
        report.txt         rendered tables
        report.csv         machine-readable report
        curve.csv          rendered zeta curve; curve_data.csv at full precision
        phi.txt            flags found by the search
        provenance.json    version, configuration hash, input and artifact hashes
        FAILED             stage name and diagnostic of a failed run
    """

    def __init__(self, config: PipelineConfig,
                 workdir: Union[str, Path, None] = None,
                 verbose: Optional[bool] = False):
        """Create a pipeline.

        :param config: Pipeline configuration
        :param workdir: Directory relative paths are resolved against (current directory if None)
        :param verbose: Output additional information
        """

        self.__config = config
        self.__workdir = Path('.') if workdir is None else Path(workdir)
        self.__verbose = verbose
        self.__output_dir = self.__workdir / config.pipeline.output_dir

        self.__inputs: Dict[str, str] = {}
        self.__artifacts: Dict[str, str] = {}
        self.__completed: List[str] = []

        self.__train_set: Optional[EnergyDataset] = None
        self.__validation_sets: List[EnergyDataset] = []
        self.__models: Dict[str, EnergyModel] = {}
        self.__report: Optional[EvaluationReport] = None
        self.__table4: Optional[EvaluationReport] = None
        self.__sweep: Optional[ZetaSweepResult] = None
        self.__search: Optional[PhiSearchResult] = None
        self.__summary: List[str] = []

    @property
    def config(self) -> PipelineConfig:
        return self.__config

    @property
    def output_dir(self) -> Path:
        return self.__output_dir

    @property
    def completed_stages(self) -> List[str]:
        return list(self.__completed)

    @property
    def models(self) -> Dict[str, EnergyModel]:
        return dict(self.__models)

    @property
    def report(self) -> Optional[EvaluationReport]:
        return self.__report

    @property
    def primary_variant(self) -> str:
        return self.__config.pipeline.variants[-1]

    def run(self) -> PipelineResult:
        """Run all configured stages.

        :returns: PipelineResult; exit_code is 0 on success, 2 for data errors and 3
            for non-convergence in strict mode
        """

        self.__output_dir.mkdir(parents=True, exist_ok=True)
        marker = self.__output_dir / FAILED_MARKER
        if marker.exists():
            marker.unlink()

        stages = [('ingest', self._ingest), ('train', self._train), ('validate', self._validate)]
        if self.__config.sweep is not None:
            stages.append(('sweep', self._sweep))
        if self.__config.search is not None:
            stages.append(('search', self._search))
        stages.append(('report', self._write_report))

        for name, func in stages:
            if self.__verbose:
                con.print(f'Stage [bold]{name}[/]')
            try:
                func()
            except Exception as err:
                failure = PipelineError(name, err)
                code = exit_code_for(err)
                self._write_failure(failure)
                con.print(f'[bold red]FAILED[/] in stage [bold]{name}[/]: {err}')
                if code == EXIT_USAGE:
                    raise
                return PipelineResult(code, self.__output_dir, name, str(err))
            self.__completed.append(name)

        return PipelineResult(EXIT_OK, self.__output_dir, None, '')

    # ------------------------------------------------------------------
    # Stages
    def _resolve(self, path: str) -> Path:
        return self.__workdir / path

    def _hash_inputs(self, source: DatasetSource):
        for pp in source.paths():
            fpath = self._resolve(pp)
            if fpath.is_dir():
                for fname in [FEATURES_FILE, ENERGIES_FILE, MANIFEST_FILE]:
                    self.__inputs[f'{pp}/{fname}'] = file_sha256(fpath / fname)
            else:
                self.__inputs[pp] = file_sha256(fpath)

    def _load(self, source: DatasetSource) -> EnergyDataset:
        if source.dataset is not None:
            if self.__verbose:
                con.print(f'Reading [bold]{source.dataset}[/]')
            dataset = read_dataset(self._resolve(source.dataset))
        else:
            dataset = load_dataset(self._resolve(source.features),   # type: ignore
                                   self._resolve(source.energies),   # type: ignore
                                   self._resolve(source.manifest),   # type: ignore
                                   verbose=self.__verbose)
        self._hash_inputs(source)
        return dataset

    def _ingest(self):
        self.__train_set = self._load(self.__config.train)
        self.__validation_sets = [self._load(src) for src in self.__config.validate_sets]

        names = [self.__train_set.name] + [vs.name for vs in self.__validation_sets]
        if len(set(names)) != len(names):
            raise DatasetError(f'Dataset names must be unique; got {names}')

    def _train(self):
        cfg = self.__config.pipeline
        tcfg = TrainingConfig(objective=cfg.objective, seed=cfg.seed, solver=cfg.solver)
        trainer = Trainer(tcfg, verbose=self.__verbose)
        report = trainer.train_validate(self.__train_set, self.__validation_sets,   # type: ignore
                                        variants=cfg.variants)
        self.__models = report.models
        self.__report = report

        for variant, model in self.__models.items():
            if not model.converged and cfg.strict:
                raise ConvergenceError(f'{variant} model did not converge (KKT residual {model.kkt_residual})')

            fname = 'model.txt' if variant == self.primary_variant else f'model_{variant}.txt'
            self._write_text(fname, model.to_text(self._provenance_lines()))

    def _validate(self):
        report = self.__report
        assert report is not None
        self._write_text('report.csv', report.to_csv(self._provenance_lines(with_version=True)))

    def _sweep_model(self) -> EnergyModel:
        return self.__models['FU'] if 'FU' in self.__models else self.__models[self.primary_variant]

    def _validation_set(self, name: Optional[str]) -> EnergyDataset:
        if name is None:
            for vset in self.__validation_sets:
                if vset.bit_depth == 10:
                    return vset
            raise DatasetError('No 10-bit validation dataset to sweep over')

        for vset in self.__validation_sets:
            if vset.name == name:
                return vset
        raise DatasetError(f'Unknown validation dataset {name}; '
                           f'have {[vs.name for vs in self.__validation_sets]}')

    def _sweep(self):
        scfg = self.__config.sweep
        assert scfg is not None
        model8 = self._sweep_model()
        catalog = model8.catalog

        phi = resolve_phi(scfg.phi if scfg.phi in ('table1', 'ones', 'zeros') else self._resolve(scfg.phi),
                          catalog)
        vset = self._validation_set(scfg.validation)
        sweep = sweep_zeta(model8, phi, vset.project(catalog), grid=scfg.grid, verbose=self.__verbose)
        self.__sweep = sweep

        self._write_text('curve.csv', comment_lines(self._provenance_lines(with_version=True)) + render_curve(sweep))
        write_curve(sweep, self.__output_dir / 'curve_data.csv',
                    provenance=self._provenance_lines(with_version=True))
        self.__artifacts['curve_data.csv'] = file_sha256(self.__output_dir / 'curve_data.csv')

        zmin, emin = sweep.argmin
        self.__summary.append(f'Zeta sweep on {vset.name} (phi={scfg.phi}): minimum {format_percent(emin)} '
                              f'at zeta={zmin:g}')

        sets10 = [vs for vs in self.__validation_sets if vs.bit_depth == 10] or [vset]
        self.__table4 = evaluate_zeta_columns(model8, phi, sets10, zetas=scfg.table_zetas)

        scaled = model8.with_extension(zmin, phi)
        self._write_text('model_scaled.txt', scaled.to_text(self._provenance_lines()))

    def _search(self):
        scfg = self.__config.search
        assert scfg is not None
        model8 = self._sweep_model()
        catalog = model8.catalog

        groups = resolve_groups(scfg.groups if scfg.groups in ('table1', 'leaves') else self._resolve(scfg.groups),
                                catalog)
        vset = self._validation_set(scfg.validation)
        result = search_phi(model8, groups, self.__train_set.project(catalog),   # type: ignore
                            vset.project(catalog), zeta_grid=scfg.grid, verbose=self.__verbose)
        self.__search = result

        self._write_text('phi.txt', comment_lines(self._provenance_lines(with_version=True) +
                                                  [f'groups: {" ".join(result.selected_groups)}']) +
                         f'phi={bits_to_str(result.phi)}\n')

        self.__summary.append(f'Bit-depth flag search on {vset.name}: {result.evaluated} subsets of '
                              f'{len(groups)} groups')
        self.__summary.append(f'    selected groups: {" ".join(result.selected_groups) or "(none)"}')
        self.__summary.append(f'    zeta={result.zeta:g}, validation error {format_percent(result.mean_error)}, '
                              f'training error {format_percent(result.train_error)}')

        if self.__config.sweep is None:
            scaled = model8.with_extension(result.zeta, result.phi)
            self._write_text('model_scaled.txt', scaled.to_text(self._provenance_lines()))

    def _write_report(self):
        report = self.__report
        assert report is not None

        outstr = render_table3(report)
        if self.__table4 is not None:
            outstr += '\n' + render_table4(self.__table4)
        if len(self.__summary) > 0:
            outstr += '\n' + '\n'.join(self.__summary) + '\n'
        self._write_text('report.txt', comment_lines(self._provenance_lines(with_version=True)) + outstr)

        self._write_provenance()

    # ------------------------------------------------------------------
    # Artifacts
    def _provenance_lines(self, with_version: Optional[bool] = False) -> List[str]:
        lines = [f'pyDecEnergy {__version__}'] if with_version else []
        lines.append(f'config sha256={self.__config.config_hash()}')
        lines.extend(f'input {name} sha256={digest}' for name, digest in sorted(self.__inputs.items()))
        return lines

    def _write_text(self, filename: str, text: str):
        if self.__verbose:
            con.print(f'Writing [bold]{filename}[/]')
        with open(self.__output_dir / filename, 'w') as fh:
            fh.write(text)
        self.__artifacts[filename] = text_sha256(text)

    def _provenance(self) -> Dict[str, Any]:
        cfg = self.__config
        return {'tool': 'pyDecEnergy',
                'version': __version__,
                'config': cfg.model_dump(mode='json', by_alias=True),
                'config_sha256': cfg.config_hash(),
                'inputs': dict(sorted(self.__inputs.items())),
                'seeds': {'pipeline': cfg.pipeline.seed},
                'stages': list(self.__completed),
                'artifacts': dict(sorted(self.__artifacts.items()))}

    def _write_provenance(self):
        with open(self.__output_dir / PROVENANCE_FILE, 'w') as fh:
            fh.write(json.dumps(self._provenance(), sort_keys=True, indent=2) + '\n')

    def _write_failure(self, failure: PipelineError):
        prov = self._provenance()
        prov['failed_stage'] = failure.stage
        with open(self.__output_dir / PROVENANCE_FILE, 'w') as fh:
            fh.write(json.dumps(prov, sort_keys=True, indent=2) + '\n')

        with open(self.__output_dir / FAILED_MARKER, 'w') as fh:
            fh.write(f'stage: {failure.stage}\n')
            fh.write(f'error: {type(failure.errArgs).__name__}: {failure.errArgs}\n')


def pipeline_run(config_file: Union[str, Path],
                 workdir: Union[str, Path, None] = None,
                 verbose: Optional[bool] = False) -> PipelineResult:
    """Run the pipeline described by a configuration file.

    :param config_file: Pipeline configuration (TOML)
    :param workdir: Directory relative paths are resolved against; defaults to the
        directory of the configuration file
    :param verbose: Output additional information

    :returns: PipelineResult with the exit status and the output directory
    """

    try:
        config = PipelineConfig.read(config_file)
    except (OSError, ValueError, ValidationError) as err:
        con.print(f'[bold red]ERROR[/]: invalid pipeline configuration {config_file}: {err}')
        return PipelineResult(EXIT_USAGE, None, None, str(err))

    if workdir is None:
        workdir = Path(config_file).parent

    return Pipeline(config, workdir=workdir, verbose=verbose).run()
