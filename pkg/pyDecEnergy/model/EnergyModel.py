import numpy as np
import numpy.typing as npt

from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union, TYPE_CHECKING

from ..catalog.FeatureCatalog import FeatureCatalog, build_catalog
from ..constants import MODEL_HDR, OBJECTIVES, VARIANTS
from ..energy_helpers import (bits_to_str, comment_lines, float_to_str, fsum_dot, fsum_rows,
                              get_file_iter, str_to_bits)
from ..Exceptions_custom import AlignmentError
from ..version import __version__

if TYPE_CHECKING:
    from ..dataset.EnergyDataset import EnergyDataset
    from ..dataset.FeatureVector import FeatureVector


class EnergyModel(object):
    """Linear decoding-energy model.

    The estimate is the sum of count times specific energy over all leaves. With a
    scaling factor zeta and a binary vector phi the coefficients of the flagged leaves
    are scaled by (1 + zeta) to estimate 10-bit decoding from an 8-bit model.
    """

    def __init__(self, catalog: FeatureCatalog,
                 coefficients: npt.ArrayLike,
                 zeta: Optional[float] = None,
                 phi: Optional[npt.ArrayLike] = None,
                 untrained: Optional[npt.ArrayLike] = None,
                 converged: bool = True,
                 kkt_residual: Optional[float] = None,
                 bit_depth: Optional[int] = None,
                 objective: Optional[str] = None,
                 training_setup: Optional[str] = None):
        """Create an energy model.

        :param catalog: Catalog the coefficients are aligned to
        :param coefficients: Specific energy per occurrence of each leaf (joules)
        :param zeta: Bit-depth scaling factor (requires phi)
        :param phi: Binary bit-depth flags aligned to the leaves (requires zeta)
        :param untrained: Flags of leaves that never occurred in the training data
        :param converged: Whether the training solver converged
        :param kkt_residual: Optimality residual reported by the solver
        :param bit_depth: Bit depth of the training data
        :param objective: Training objective
        :param training_setup: Name of the training dataset

        :raises AlignmentError: if a vector does not match the catalog
        :raises ValueError: if a coefficient or zeta is negative, or only one of zeta and phi is given
        """

        coef = np.array(coefficients, dtype=np.float64)
        if coef.shape != (len(catalog), ):
            raise AlignmentError(f'Expected {len(catalog)} coefficients for the {catalog.variant} catalog; '
                                 f'got shape {coef.shape}')
        if np.any(coef < 0) or np.any(np.isnan(coef)):
            raise ValueError('Energy coefficients must be nonnegative')

        if (zeta is None) != (phi is None):
            raise ValueError('zeta and phi must be given together')

        self.__catalog = catalog
        self.__coefficients = coef
        self.__coefficients.flags.writeable = False
        self.__zeta: Optional[float] = None
        self.__phi: Optional[npt.NDArray[np.int8]] = None

        if zeta is not None:
            self.__zeta = _check_zeta(zeta)
            self.__phi = self._check_phi(phi)

        if untrained is None:
            self.__untrained = np.zeros(len(catalog), dtype=bool)
        else:
            self.__untrained = np.array(untrained, dtype=bool)
            if self.__untrained.shape != (len(catalog), ):
                raise AlignmentError(f'untrained flags must have {len(catalog)} entries')

        if objective is not None and objective not in OBJECTIVES.values():
            raise ValueError(f'objective must be one of {list(OBJECTIVES.values())}; got {objective}')

        self.__converged = converged
        self.__kkt_residual = kkt_residual
        self.__bit_depth = bit_depth
        self.__objective = objective
        self.__training_setup = training_setup

    def __eq__(self, other) -> bool:
        if not isinstance(other, EnergyModel):
            return NotImplemented

        same_phi = (self.__phi is None and other.phi is None) or \
                   (self.__phi is not None and other.phi is not None and np.array_equal(self.__phi, other.phi))
        return (self.__catalog == other.catalog and
                np.array_equal(self.__coefficients, other.coefficients) and
                self.__zeta == other.zeta and same_phi and
                np.array_equal(self.__untrained, other.untrained))

    def __str__(self) -> str:
        ext = '' if self.__zeta is None else f', zeta={self.__zeta}'
        return f'EnergyModel({self.__catalog.variant}{ext})'

    @property
    def catalog(self) -> FeatureCatalog:
        return self.__catalog

    @property
    def variant(self) -> str:
        return self.__catalog.variant

    @property
    def coefficients(self) -> npt.NDArray[np.float64]:
        """Read-only coefficient vector"""
        return self.__coefficients

    @property
    def zeta(self) -> Optional[float]:
        return self.__zeta

    @property
    def phi(self) -> Optional[npt.NDArray[np.int8]]:
        return self.__phi

    @property
    def untrained(self) -> npt.NDArray[np.bool_]:
        return self.__untrained

    @property
    def converged(self) -> bool:
        return self.__converged

    @property
    def kkt_residual(self) -> Optional[float]:
        return self.__kkt_residual

    @property
    def bit_depth(self) -> Optional[int]:
        return self.__bit_depth

    @property
    def objective(self) -> Optional[str]:
        return self.__objective

    @property
    def training_setup(self) -> Optional[str]:
        return self.__training_setup

    @property
    def is_extended(self) -> bool:
        """True if the model carries zeta and phi"""
        return self.__zeta is not None

    def coefficient(self, name: str) -> float:
        """Coefficient of a leaf by name"""
        return float(self.__coefficients[self.__catalog.position(name)])

    def _check_phi(self, phi) -> npt.NDArray[np.int8]:
        phi_arr = np.array(phi)
        if phi_arr.shape != (len(self.__catalog), ):
            raise AlignmentError(f'phi must have {len(self.__catalog)} entries; got shape {phi_arr.shape}')
        if not np.all(np.isin(phi_arr, (0, 1))):
            raise ValueError('phi must be binary')
        return phi_arr.astype(np.int8)

    def _check_counts(self, counts: 'FeatureVector'):
        if counts.catalog != self.__catalog:
            raise AlignmentError(f'Counts are aligned to the {counts.catalog_variant} catalog; '
                                 f'the model uses {self.__catalog.variant}')

    def scaled_coefficients(self, zeta: Optional[float] = None,
                            phi: Optional[npt.ArrayLike] = None) -> npt.NDArray[np.float64]:
        """Coefficients (1 + zeta * phi_i) * e_i.

        :param zeta: Scaling factor; defaults to the model's
        :param phi: Binary flags; default to the model's

        :raises ValueError: if neither the model nor the arguments provide zeta and phi
        """

        zeta = self.__zeta if zeta is None else _check_zeta(zeta)
        phi_arr = self.__phi if phi is None else self._check_phi(phi)

        if zeta is None or phi_arr is None:
            raise ValueError('Scaled estimation needs zeta and phi')

        return (1.0 + zeta * phi_arr) * self.__coefficients

    def estimate(self, counts: 'FeatureVector') -> float:
        """Estimated decoding energy of one bit stream in joules.

        :param counts: Feature counts aligned to the model's catalog

        :raises AlignmentError: if the counts use another catalog
        """

        self._check_counts(counts)
        return fsum_dot(counts.counts, self.__coefficients)

    def estimate_scaled(self, counts: 'FeatureVector',
                        zeta: Optional[float] = None,
                        phi: Optional[npt.ArrayLike] = None) -> float:
        """Estimated 10-bit decoding energy using the bit-depth scaling.

        :param counts: Feature counts aligned to the model's catalog
        :param zeta: Override of the model's scaling factor
        :param phi: Override of the model's bit-depth flags

        :raises AlignmentError: if the counts use another catalog
        :raises ValueError: if zeta is negative or missing
        """

        self._check_counts(counts)
        return fsum_dot(counts.counts, self.scaled_coefficients(zeta, phi))

    def estimate_dataset(self, dataset: 'EnergyDataset',
                         scaled: bool = False,
                         zeta: Optional[float] = None,
                         phi: Optional[npt.ArrayLike] = None) -> npt.NDArray[np.float64]:
        """Estimates for every record of a dataset.

        :raises AlignmentError: if the dataset uses another catalog
        """

        if dataset.catalog != self.__catalog:
            raise AlignmentError(f'{dataset.name} is aligned to the {dataset.variant} catalog; '
                                 f'the model uses {self.__catalog.variant}')

        coef = self.scaled_coefficients(zeta, phi) if scaled else self.__coefficients
        return fsum_rows(dataset.counts, coef)

    def with_extension(self, zeta: float, phi: npt.ArrayLike) -> 'EnergyModel':
        """Copy of the model carrying the bit-depth extension"""

        return EnergyModel(self.__catalog, self.__coefficients, zeta=zeta, phi=phi,
                           untrained=self.__untrained, converged=self.__converged,
                           kkt_residual=self.__kkt_residual, bit_depth=self.__bit_depth,
                           objective=self.__objective, training_setup=self.__training_setup)

    def to_text(self, provenance: Optional[Sequence[str]] = None) -> str:
        """Model file contents.

        :param provenance: Extra lines written as comments after the version line
        """

        lines: List[str] = [f'pyDecEnergy {__version__}']
        if provenance is not None:
            lines.extend(provenance)

        outstr = comment_lines(lines)
        outstr += f'variant={self.__catalog.variant}\n'
        if self.__training_setup is not None:
            outstr += f'training_setup={self.__training_setup}\n'
        if self.__bit_depth is not None:
            outstr += f'bit_depth={self.__bit_depth}\n'
        if self.__objective is not None:
            outstr += f'objective={self.__objective}\n'
        outstr += f'converged={str(self.__converged).lower()}\n'
        if self.__kkt_residual is not None:
            outstr += f'kkt_residual={float_to_str(self.__kkt_residual)}\n'
        if self.__zeta is not None and self.__phi is not None:
            outstr += f'zeta={float_to_str(self.__zeta)}\n'
            outstr += f'phi={bits_to_str(self.__phi)}\n'
        if self.__untrained.any():
            outstr += f'untrained={bits_to_str(self.__untrained)}\n'

        outstr += f'{MODEL_HDR}\n'
        for name, coef in zip(self.__catalog.names, self.__coefficients.tolist()):
            outstr += f'{name},{float_to_str(coef)}\n'
        return outstr

    def write(self, filename: Union[str, Path], provenance: Optional[Sequence[str]] = None):
        """Write the model file.

        :param filename: Name of the model file
        :param provenance: Extra comment lines
        """

        with open(filename, 'w') as fh:
            fh.write(self.to_text(provenance))

    @classmethod
    def read(cls, filename: Union[str, Path]) -> 'EnergyModel':
        """Read a model file written by write().

        :raises AlignmentError: if the leaf list does not match the declared variant
        :raises ValueError: if the file is malformed
        """

        it = get_file_iter(filename)
        header: Dict[str, str] = {}

        for line in it:
            if line == MODEL_HDR:
                break
            if line.strip() == '':
                continue
            if '=' not in line:
                raise ValueError(f'{filename}: unexpected line before {MODEL_HDR}: {line}')
            key, val = line.split('=', 1)
            header[key.strip()] = val.strip()
        else:
            raise ValueError(f'{filename}: missing {MODEL_HDR} header')

        names: List[str] = []
        coefs: List[float] = []
        for line in it:
            if line.strip() == '':
                continue
            name, val = line.split(',')
            names.append(name.strip())
            coefs.append(float(val))

        phi = str_to_bits(header['phi']) if 'phi' in header else None
        variant = header.get('variant', 'FU')

        if variant in VARIANTS:
            catalog = build_catalog(variant)
            catalog.check_aligned(names, what=str(filename))
        else:
            catalog = FeatureCatalog.from_names(names, variant=variant, phi=phi)

        return cls(catalog, coefs,
                   zeta=float(header['zeta']) if 'zeta' in header else None,
                   phi=phi,
                   untrained=str_to_bits(header['untrained']) if 'untrained' in header else None,
                   converged=header.get('converged', 'true') == 'true',
                   kkt_residual=float(header['kkt_residual']) if 'kkt_residual' in header else None,
                   bit_depth=int(header['bit_depth']) if 'bit_depth' in header else None,
                   objective=header.get('objective'),
                   training_setup=header.get('training_setup'))


def _check_zeta(zeta: float) -> float:
    zeta = float(zeta)
    if not zeta >= 0:
        raise ValueError(f'zeta must be nonnegative; got {zeta}')
    return zeta
