import numpy as np

from typing import Dict, List, Optional, Sequence

from rich.console import Console
from rich import pretty

from .TrainingConfig import TrainingConfig
from .nnls import NNLSResult, active_set_nnls, trf_nnls
from ..catalog.FeatureCatalog import build_catalog
from ..constants import ID_COLUMN
from ..dataset.EnergyDataset import EnergyDataset
from ..Exceptions_custom import EmptyDatasetError, InvalidValueError, OverlapError
from ..model.EnergyModel import EnergyModel
from ..model.metrics import mean_estimation_error
from ..report.EvaluationReport import EvaluationReport, ReportRow

pretty.install()
con = Console()


def check_disjoint(train_set: EnergyDataset, validation_set: EnergyDataset):
    """Raise OverlapError if two datasets share bit streams.

    Datasets overlap if they share an id, or a source sequence encoded at the same
    bit depth and format.

    :raises OverlapError: naming the offending ids
    """

    shared_ids = sorted(set(train_set.ids) & set(validation_set.ids))
    if len(shared_ids) > 0:
        raise OverlapError(f'{train_set.name} and {validation_set.name} share ids {shared_ids[:10]}'
                           f'{" ..." if len(shared_ids) > 10 else ""}')

    def keyed(ds: EnergyDataset) -> Dict[tuple, str]:
        meta = ds.meta
        return {(ss, bd, ff): cid for cid, ss, bd, ff in zip(meta[ID_COLUMN], meta['sequence'],
                                                             meta['bit_depth'], meta['format'])}

    tkeys = keyed(train_set)
    vkeys = keyed(validation_set)
    shared = sorted(set(tkeys) & set(vkeys))
    if len(shared) > 0:
        pairs = [f'{tkeys[kk]}/{vkeys[kk]}' for kk in shared[:10]]
        raise OverlapError(f'{train_set.name} and {validation_set.name} share source sequences '
                           f'at the same bit depth and format (ids {pairs})')


class Trainer(object):
    """Fits nonnegative energy coefficients to measured datasets.
    """

    def __init__(self, config: Optional[TrainingConfig] = None,
                 verbose: Optional[bool] = False):
        """Create a trainer.

        :param config: Training configuration (defaults apply if None)
        :param verbose: Output additional information
        """

        self.__config = TrainingConfig() if config is None else config
        self.__verbose = verbose

    @property
    def config(self) -> TrainingConfig:
        return self.__config

    def _filtered(self, dataset: EnergyDataset) -> EnergyDataset:
        cfg = self.__config
        if cfg.config_filter is None and cfg.qp_filter is None:
            return dataset
        return dataset.filter(config=cfg.config_filter, qp=cfg.qp_filter, name=dataset.name)

    def train(self, dataset: EnergyDataset) -> EnergyModel:
        """Train an energy model.

        Minimizes sum_l w_l (n_l . e - E_l)^2 subject to e >= 0 with w_l = 1 (absolute_lsq)
        or w_l = 1 / E_l^2 (relative_weighted_lsq). Leaves that never occur in the
        training data get coefficient 0 and are flagged untrained.

        :param dataset: Training dataset

        :returns: EnergyModel; converged is False if the iteration cap was reached

        :raises EmptyDatasetError: if the (filtered) dataset has no records
        :raises InvalidValueError: if a measured energy is not positive
        """

        cfg = self.__config
        data = self._filtered(dataset)

        if data.size == 0:
            raise EmptyDatasetError(f'{dataset.name}: no records to train on')

        energies = data.energies
        if np.any(~(energies > 0)):
            raise InvalidValueError(f'{data.name}: measured energy must be positive')

        amat = data.count_matrix()
        if cfg.objective == 'relative_weighted_lsq':
            amat = amat / energies[:, np.newaxis]
            rhs = np.ones(data.size, dtype=np.float64)
        else:
            rhs = energies.copy()

        colnorm = np.linalg.norm(amat, axis=0)
        untrained = colnorm == 0.0
        active = ~untrained

        if self.__verbose:
            con.print(f'Training [bold]{cfg.objective}[/] on {data.name}: {data.size} records, '
                      f'{int(active.sum())} of {len(data.catalog)} leaves occur')

        max_iter = cfg.iterations_for(len(data.catalog))
        solver = active_set_nnls if cfg.solver == 'active_set' else trf_nnls
        res: NNLSResult = solver(amat[:, active] / colnorm[active], rhs, max_iter, cfg.convergence_tol,
                                 seed=cfg.seed)

        coef = np.zeros(len(data.catalog), dtype=np.float64)
        coef[active] = res.x / colnorm[active]

        if not res.converged:
            con.print(f'[gold3]WARNING[/]: {data.name}: solver stopped after {res.iterations} iterations '
                      f'without converging; returning the best iterate')
        elif res.kkt_residual > cfg.convergence_tol:
            con.print(f'[gold3]WARNING[/]: {data.name}: KKT residual {res.kkt_residual:.3e} exceeds '
                      f'{cfg.convergence_tol:.1e}')

        if self.__verbose:
            con.print(f'    iterations: {res.iterations}, KKT residual: {res.kkt_residual:.3e}, '
                      f'untrained leaves: {int(untrained.sum())}')

        return EnergyModel(data.catalog, coef, untrained=untrained,
                           converged=res.converged, kkt_residual=res.kkt_residual,
                           bit_depth=data.bit_depth, objective=cfg.objective,
                           training_setup=data.name)

    def train_validate(self, train_set: EnergyDataset,
                       validation_sets: Sequence[EnergyDataset],
                       variants: Optional[Sequence[str]] = None) -> EvaluationReport:
        """Train on one dataset and report the mean estimation error on others.

        With variants, an FU training set is projected onto each variant's catalog and
        one model per variant is trained; the report then has one column per variant.
        Validation sets on another bit depth than the training set are flagged as
        cross-bit-depth.

        :param train_set: Training dataset
        :param validation_sets: Validation datasets; rows follow this order
        :param variants: Model variants to train (defaults to the training set's variant)

        :returns: EvaluationReport holding the rows, residuals and trained models

        :raises OverlapError: if a validation set shares bit streams with the training set
        """

        if variants is None:
            variants = [train_set.variant]

        for vset in validation_sets:
            check_disjoint(train_set, vset)

        report = EvaluationReport(train_set.name,
                                  provenance={'training': self.__config.model_dump(),
                                              'training_setup': train_set.name,
                                              'training_records': train_set.size,
                                              'variants': list(variants),
                                              'validation_setups': [vs.name for vs in validation_sets]})

        models: Dict[str, EnergyModel] = {}
        for variant in variants:
            catalog = build_catalog(variant) if variant != train_set.variant else train_set.catalog
            models[variant] = self.train(train_set.project(catalog))
            report.add_model(variant, models[variant])

        for vset in validation_sets:
            for variant in variants:
                model = models[variant]
                vdata = vset.project(model.catalog)
                err = mean_estimation_error(model, vdata)

                cross = vset.bit_depth is not None and model.bit_depth is not None and \
                    vset.bit_depth != model.bit_depth

                if self.__verbose:
                    con.print(f'{vset.name:<16} {variant}: {err.percent:.2f}%{" (cross bit depth)" if cross else ""}')

                report.add_row(ReportRow(validation_setup=vset.name, column=variant,
                                         mean_error=err.mean_error, cross_bit_depth=cross),
                               residuals=err.residuals)

        return report


def train(dataset: EnergyDataset,
          config: Optional[TrainingConfig] = None,
          verbose: Optional[bool] = False) -> EnergyModel:
    """Train an energy model; see Trainer.train()"""
    return Trainer(config, verbose=verbose).train(dataset)


def train_validate(train_set: EnergyDataset,
                   validation_sets: Sequence[EnergyDataset],
                   config: Optional[TrainingConfig] = None,
                   variants: Optional[List[str]] = None,
                   verbose: Optional[bool] = False) -> EvaluationReport:
    """Train and validate; see Trainer.train_validate()"""
    return Trainer(config, verbose=verbose).train_validate(train_set, validation_sets, variants=variants)
