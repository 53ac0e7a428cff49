import math
import numpy as np
import numpy.typing as npt
import pandas as pd   # type: ignore

from pathlib import Path
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import Dict, List, NamedTuple, Optional, Tuple, Union

from .SimulatedDevice import MeasurementProtocolConfig, SimulatedDevice, simulate_measurement
from ..catalog.FeatureCatalog import FeatureCatalog
from ..constants import (BIT_DEPTHS, CATEGORIES, CODING_CONFIGS, ID_COLUMN, INIT_FEATURE, META_COLUMNS,
                         QP_VALUES, VARIANTS, VIDEO_FORMATS)
from ..dataset.EnergyDataset import EnergyDataset
from ..dataset.SetupManifest import SetupManifest
from ..energy_helpers import comment_lines, fsum_rows, get_file_iter
from ..model.EnergyModel import EnergyModel

# Bit streams per source sequence: every QP with every coding configuration
STREAMS_PER_SEQUENCE = len(QP_VALUES) * len(CODING_CONFIGS)

# Default name of the ground truth file written next to a synthetic corpus
GROUND_TRUTH_FILE = 'ground_truth.txt'

DEFAULT_COUNT_RANGES: Dict[str, Tuple[int, int]] = {'General': (1, 50),
                                                    'Intra': (10, 5000),
                                                    'Inter': (10, 50000),
                                                    'Residual': (100, 100000),
                                                    'InLoop': (10, 20000)}


class CorpusSpec(BaseModel):
    """Settings of a synthetic corpus.

    Counts are drawn uniformly from the range of each leaf's category. Without
    e_true, coefficients are drawn so that every leaf contributes about equally to
    the energy. With zeta and phi the energies follow the bit-depth scaled model.
    Energies carry multiplicative Gaussian noise, or, with measure, go through the
    simulated measurement protocol.
    """

    model_config = ConfigDict(frozen=True, extra='forbid')

    name: str = 'synthetic'
    records: int = Field(default=500, ge=1)
    sequences: Optional[int] = Field(default=None, ge=1)
    sequence_prefix: str = 'seq'
    id_prefix: Optional[str] = None
    count_ranges: Dict[str, Tuple[int, int]] = Field(default_factory=lambda: dict(DEFAULT_COUNT_RANGES))
    e_true: Optional[List[float]] = None
    zeta: Optional[float] = Field(default=None, ge=0.0)
    phi: Optional[List[int]] = None
    noise: float = Field(default=0.0, ge=0.0)
    seed: int = 0
    bit_depth: int = 8
    format: str = 'SDR'
    measure: bool = False
    protocol: Optional[MeasurementProtocolConfig] = None

    @field_validator('count_ranges')
    @classmethod
    def _check_ranges(cls, value: Dict[str, Tuple[int, int]]) -> Dict[str, Tuple[int, int]]:
        for cat, (low, high) in value.items():
            if cat not in CATEGORIES:
                raise ValueError(f'Unknown category {cat}; must be one of {CATEGORIES}')
            if low < 0 or high < low:
                raise ValueError(f'{cat}: invalid count range ({low}, {high})')
        return value

    @field_validator('bit_depth')
    @classmethod
    def _check_bit_depth(cls, value: int) -> int:
        if value not in BIT_DEPTHS:
            raise ValueError(f'bit_depth must be one of {BIT_DEPTHS}')
        return value

    @field_validator('format')
    @classmethod
    def _check_format(cls, value: str) -> str:
        if value not in VIDEO_FORMATS:
            raise ValueError(f'format must be one of {VIDEO_FORMATS}')
        return value

    @model_validator(mode='after')
    def _check_extension(self) -> 'CorpusSpec':
        if (self.zeta is None) != (self.phi is None):
            raise ValueError('zeta and phi must be given together')
        if self.e_true is not None and any(not ee >= 0 for ee in self.e_true):
            raise ValueError('e_true must be nonnegative')
        return self

    @property
    def streams_per_sequence(self) -> int:
        if self.sequences is None:
            return STREAMS_PER_SEQUENCE
        return math.ceil(self.records / self.sequences)


class GroundTruth(NamedTuple):
    """What a synthetic corpus was generated from"""

    model: EnergyModel
    noise: float
    seed: int
    true_energies: npt.NDArray[np.float64]

    @property
    def e_true(self) -> npt.NDArray[np.float64]:
        return self.model.coefficients

    @property
    def zeta(self) -> Optional[float]:
        return self.model.zeta

    @property
    def phi(self) -> Optional[npt.NDArray[np.int8]]:
        return self.model.phi

    def write(self, filename: Union[str, Path]):
        """Write the ground truth as a model file with noise and seed comment lines"""
        self.model.write(filename, provenance=['ground truth of a synthetic corpus',
                                               f'noise={self.noise!r}', f'seed={self.seed}'])

    @classmethod
    def read(cls, filename: Union[str, Path]) -> 'GroundTruth':
        """Read a ground truth file; the true (noiseless) energies are not stored"""

        info: Dict[str, str] = {}
        for line in get_file_iter(filename, skip_comments=False):
            body = line.lstrip('#').strip()
            if line.startswith('#') and '=' in body:
                key, val = body.split('=', 1)
                info[key] = val

        return cls(model=EnergyModel.read(filename), noise=float(info.get('noise', 0.0)),
                   seed=int(info.get('seed', 0)), true_energies=np.zeros(0))


def _draw_counts(catalog: FeatureCatalog, spec: CorpusSpec, rng: np.random.Generator) -> npt.NDArray[np.int64]:
    counts = np.zeros((spec.records, len(catalog)), dtype=np.int64)
    for pos, leaf in enumerate(catalog):
        low, high = spec.count_ranges.get(leaf.category, DEFAULT_COUNT_RANGES[leaf.category])
        counts[:, pos] = rng.integers(low, high, size=spec.records, endpoint=True)

    if INIT_FEATURE in catalog:
        counts[:, catalog.position(INIT_FEATURE)] = 1
    return counts


def _balanced_coefficients(counts: npt.NDArray[np.int64], rng: np.random.Generator) -> npt.NDArray[np.float64]:
    mean_counts = counts.mean(axis=0)
    weights = rng.uniform(0.5, 1.5, size=counts.shape[1])
    return np.where(mean_counts > 0, weights / np.where(mean_counts > 0, mean_counts, 1.0), weights)


def _meta(spec: CorpusSpec) -> pd.DataFrame:
    prefix = f'{spec.name}_' if spec.id_prefix is None else spec.id_prefix
    per_seq = spec.streams_per_sequence
    ndigits = max(5, len(str(spec.records)))

    records = []
    for idx in range(spec.records):
        pos = idx % per_seq
        records.append({ID_COLUMN: f'{prefix}{idx:0{ndigits}d}',
                        'setup': spec.name,
                        'sequence': f'{spec.sequence_prefix}{idx // per_seq:03d}',
                        'qp': QP_VALUES[pos % len(QP_VALUES)],
                        'config': CODING_CONFIGS[(pos // len(QP_VALUES)) % len(CODING_CONFIGS)],
                        'bit_depth': spec.bit_depth,
                        'format': spec.format,
                        'frames': None})
    return pd.DataFrame.from_records(records, columns=[ID_COLUMN] + META_COLUMNS).astype(object)


def generate_synthetic_corpus(catalog: FeatureCatalog, spec: CorpusSpec) -> Tuple[EnergyDataset, GroundTruth]:
    """Generate a synthetic corpus with known coefficients.

    Counts and coefficients come from one random stream seeded with spec.seed; the
    noise comes from a second stream seeded with (seed, bit_depth), so an 8-bit and a
    10-bit corpus with the same seed share counts but not noise.

    :param catalog: Catalog of the counts
    :param spec: Corpus settings

    :returns: (EnergyDataset, GroundTruth)

    :raises ValueError: if e_true or phi do not match the catalog
    """

    rng = np.random.default_rng(spec.seed)
    counts = _draw_counts(catalog, spec, rng)

    if spec.e_true is None:
        e_true = _balanced_coefficients(counts, rng)
    else:
        e_true = np.array(spec.e_true, dtype=np.float64)
        if e_true.shape != (len(catalog), ):
            raise ValueError(f'e_true must have {len(catalog)} entries; got {e_true.size}')

    model = EnergyModel(catalog, e_true, zeta=spec.zeta, phi=spec.phi, bit_depth=spec.bit_depth)

    coef = model.scaled_coefficients() if model.is_extended else model.coefficients
    true_energies = fsum_rows(counts, coef)

    noise_rng = np.random.default_rng([spec.seed, spec.bit_depth])
    if spec.measure:
        device = SimulatedDevice(sigma=spec.noise, seed=int(noise_rng.integers(2**31)))
        energies = np.array([simulate_measurement(device, float(ee), spec.protocol).measured_energy
                             for ee in true_energies])
    else:
        factor = np.maximum(1.0 + spec.noise * noise_rng.standard_normal(spec.records), 1e-3)
        energies = true_energies * factor

    manifest = None
    if catalog.variant in VARIANTS:
        manifest = SetupManifest(name=spec.name, records=spec.records, bit_depth=spec.bit_depth,
                                 source='synthetic', variant=catalog.variant, format=spec.format)

    dataset = EnergyDataset(name=spec.name, catalog=catalog, meta=_meta(spec), counts=counts, energies=energies,
                            manifest=manifest, record_count_matches=True if manifest else None)

    return dataset, GroundTruth(model=model, noise=spec.noise, seed=spec.seed, true_energies=true_energies)


def zeta_for_ratio(model: EnergyModel, counts: npt.NDArray, phi: npt.ArrayLike, target_ratio: float) -> float:
    """Zeta giving a mean 10-bit / 8-bit energy ratio of target_ratio on noiseless data.

    The ratio of record l is 1 + zeta * B_l / A_l with A_l the unscaled energy and
    B_l the energy of the flagged leaves.

    :raises ValueError: if target_ratio < 1 or no flagged leaf carries energy
    """

    if target_ratio < 1.0:
        raise ValueError(f'target_ratio must be at least 1; got {target_ratio}')

    base = fsum_rows(counts, model.coefficients)
    flagged = fsum_rows(counts, model.coefficients * np.asarray(phi, dtype=np.float64))
    share = math.fsum((flagged / base).tolist()) / base.size
    if share == 0.0:
        raise ValueError('No flagged leaf carries energy; the ratio cannot be reached')
    return (target_ratio - 1.0) / share


def generate_paired_corpora(catalog: FeatureCatalog,
                            spec: CorpusSpec,
                            target_ratio: float = 1.55,
                            phi: Optional[npt.ArrayLike] = None
                            ) -> Tuple[EnergyDataset, EnergyDataset, GroundTruth, GroundTruth]:
    """8-bit and 10-bit corpora of the same bit streams.

    The 10-bit energies follow the scaled model with the given phi (the reference
    flags for FU, all ones otherwise) and a zeta chosen so the mean ratio of the
    noiseless energies equals target_ratio.

    :param catalog: Catalog of the counts
    :param spec: Settings of the 8-bit corpus; its zeta and phi are ignored
    :param target_ratio: Mean 10-bit / 8-bit energy ratio
    :param phi: Bit-depth flags of the 10-bit corpus

    :returns: (dataset8, dataset10, truth8, truth10)
    """

    spec8 = spec.model_copy(update={'bit_depth': 8, 'zeta': None, 'phi': None})
    data8, truth8 = generate_synthetic_corpus(catalog, spec8)

    if phi is None:
        phi = catalog.phi_vector() if catalog.variant == 'FU' else np.ones(len(catalog), dtype=np.int8)
    phi_list = [int(xx) for xx in np.asarray(phi).tolist()]

    zeta = zeta_for_ratio(truth8.model, data8.counts, phi_list, target_ratio)

    spec10 = spec.model_copy(update={'bit_depth': 10, 'name': f'{spec.name}10',
                                     'id_prefix': f'{spec.name}10_',
                                     'e_true': truth8.e_true.tolist(), 'zeta': zeta, 'phi': phi_list})
    data10, truth10 = generate_synthetic_corpus(catalog, spec10)

    return data8, data10, truth8, truth10
