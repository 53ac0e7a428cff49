#!/usr/bin/env python

import argparse
import sys

from pathlib import Path
from typing import List, Optional, Sequence

from rich.console import Console

from pyDecEnergy.bitdepth.FeatureGroup import resolve_groups
from pyDecEnergy.bitdepth.PhiSearch import resolve_phi, search_phi
from pyDecEnergy.bitdepth.ZetaSweep import sweep_zeta, write_curve
from pyDecEnergy.catalog.FeatureCatalog import build_catalog
from pyDecEnergy.constants import CODING_CONFIGS, EXIT_OK, EXIT_USAGE, QP_VALUES, VARIANTS
from pyDecEnergy.dataset.DatasetFile import load_dataset, read_dataset, write_dataset
from pyDecEnergy.dataset.EnergyDataset import EnergyDataset
from pyDecEnergy.energy_helpers import bits_to_str, comment_lines, file_sha256
from pyDecEnergy.Exceptions_custom import ConvergenceError
from pyDecEnergy.measurement.SimulatedDevice import MeasurementProtocolConfig
from pyDecEnergy.measurement.SyntheticCorpus import (GROUND_TRUTH_FILE, CorpusSpec, generate_paired_corpora,
                                                     generate_synthetic_corpus)
from pyDecEnergy.model.EnergyModel import EnergyModel
from pyDecEnergy.model.metrics import energy_ratio_report, mean_estimation_error
from pyDecEnergy.pipeline.Pipeline import exit_code_for, pipeline_run
from pyDecEnergy.report.EvaluationReport import EvaluationReport, ReportRow
from pyDecEnergy.report.renderers import render_curve, render_table3
from pyDecEnergy.trainer.Trainer import Trainer, check_disjoint
from pyDecEnergy.trainer.TrainingConfig import TrainingConfig
from pyDecEnergy.version import __version__

err_con = Console(stderr=True)


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser that exits with status 1 on usage errors"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f'{self.prog}: error: {message}\n')


def _path(args, name: Optional[str]) -> Optional[Path]:
    if name is None:
        return None
    return Path(args.workdir) / name


def _add_dataset_args(parser: argparse.ArgumentParser, prefix: str = '', aliases: Sequence[str] = ()):
    """Dataset options: a directory or netCDF file, or the features/energies/manifest triple.

    The directory option is --dataset (alias --data) without a prefix and --<prefix> (alias
    --<prefix>-data) with one; aliases adds further spellings for it.
    """

    flags = [f'--{prefix.rstrip("-")}', f'--{prefix}data'] if prefix else ['--dataset', '--data']
    parser.add_argument(*flags, *aliases, dest=f'{prefix.replace("-", "_")}data',
                        help='Dataset directory or netCDF file')
    parser.add_argument(f'--{prefix}features', help='Feature count CSV')
    parser.add_argument(f'--{prefix}energies', help='Energy CSV')
    parser.add_argument(f'--{prefix}manifest', help='Setup manifest (TOML)')


def _dataset(args, prefix: str = '') -> EnergyDataset:
    key = prefix.replace('-', '_')
    data = getattr(args, f'{key}data')
    triple = [getattr(args, f'{key}{ff}') for ff in ['features', 'energies', 'manifest']]

    if data is not None:
        print(f'Reading dataset {data}')
        return read_dataset(_path(args, data), verbose=args.verbose)
    if any(ff is None for ff in triple):
        dflag = f'--{prefix.rstrip("-")}' if prefix else '--dataset'
        raise ValueError(f'Either {dflag} or --{prefix}features, --{prefix}energies and '
                         f'--{prefix}manifest are required')

    print(f'Reading {triple[0]} and {triple[1]}')
    return load_dataset(_path(args, triple[0]), _path(args, triple[1]), _path(args, triple[2]),
                        verbose=args.verbose)


def _training_config(args) -> TrainingConfig:
    return TrainingConfig(objective=args.objective, solver=args.solver, max_iterations=args.max_iterations,
                          convergence_tol=args.tol, seed=args.seed,
                          config_filter=args.config_filter, qp_filter=args.qp_filter)


def _phi_source(args, source: str):
    return source if source in ('table1', 'ones', 'zeros') else _path(args, source)


def cmd_ingest(args) -> int:
    dataset = _dataset(args)
    print(f'{dataset.name}: {dataset.size} records, {dataset.variant} catalog, '
          f'{len(dataset.sequences)} sequences')
    if dataset.record_count_matches is False:
        print(f'Manifest declares {dataset.manifest.records} records')   # type: ignore

    if args.out is not None:
        print(f'Writing dataset to {args.out}')
        write_dataset(dataset, _path(args, args.out))
    print('Done.')
    return EXIT_OK


def cmd_catalog(args) -> int:
    catalog = build_catalog(args.variant)

    if args.csv is not None:
        print(f'Writing catalog to {args.csv}')
        catalog.write_csv(str(_path(args, args.csv)), provenance=[f'pyDecEnergy {__version__}'])
    else:
        sys.stdout.write(catalog.to_text())

    subtotals = ', '.join(f'{cat} {num}' for cat, num in catalog.category_counts().items())
    print(f'{catalog.variant}: {len(catalog)} leaves ({subtotals})')
    return EXIT_OK


def cmd_train(args) -> int:
    dataset = _dataset(args)
    if args.variant is not None and args.variant != dataset.variant:
        dataset = dataset.project(build_catalog(args.variant))

    model = Trainer(_training_config(args), verbose=args.verbose).train(dataset)
    if not model.converged and args.strict:
        raise ConvergenceError(f'{dataset.name}: solver did not converge')

    print(f'Writing model to {args.out}')
    model.write(_path(args, args.out), provenance=_input_hashes(args))
    print('Done.')
    return EXIT_OK


def cmd_validate(args) -> int:
    vsets = [read_dataset(_path(args, vv), verbose=args.verbose) for vv in args.validate]

    if args.model is not None:
        print(f'Reading model {args.model}')
        model = EnergyModel.read(_path(args, args.model))
        report = _report_for_model(model, vsets)
    else:
        train_set = _dataset(args, prefix='train-')
        report = Trainer(_training_config(args), verbose=args.verbose).train_validate(
            train_set, vsets, variants=args.variants)
        if args.strict and not all(mm.converged for mm in report.models.values()):
            raise ConvergenceError(f'{train_set.name}: solver did not converge')

    sys.stdout.write(render_table3(report))

    if args.out is not None:
        print(f'Writing report to {args.out}')
        report.write_csv(_path(args, args.out), provenance=[f'pyDecEnergy {__version__}'] + _input_hashes(args))
    print('Done.')
    return EXIT_OK


def _report_for_model(model: EnergyModel, vsets: List[EnergyDataset]) -> EvaluationReport:
    report = EvaluationReport(model.training_setup or 'model')
    report.add_model(model.variant, model)
    for vset in vsets:
        err = mean_estimation_error(model, vset.project(model.catalog))
        cross = vset.bit_depth is not None and model.bit_depth is not None and vset.bit_depth != model.bit_depth
        report.add_row(ReportRow(validation_setup=vset.name, column=model.variant,
                                 mean_error=err.mean_error, cross_bit_depth=cross),
                       residuals=err.residuals)
    return report


def cmd_sweep_zeta(args) -> int:
    model = EnergyModel.read(_path(args, args.model))
    vset = _dataset(args).project(model.catalog)
    phi = resolve_phi(_phi_source(args, args.phi), model.catalog)

    sweep = sweep_zeta(model, phi, vset, grid=args.grid, verbose=args.verbose)
    curve = render_curve(sweep)

    if args.out is not None:
        print(f'Writing curve to {args.out}')
        with open(_path(args, args.out), 'w') as fh:
            fh.write(comment_lines([f'pyDecEnergy {__version__}'] + _input_hashes(args)))
            fh.write(curve)
    else:
        sys.stdout.write(curve)

    if args.data_out is not None:
        print(f'Writing curve data to {args.data_out}')
        write_curve(sweep, _path(args, args.data_out), provenance=[f'pyDecEnergy {__version__}'] + _input_hashes(args))
    print('Done.')
    return EXIT_OK


def cmd_search_phi(args) -> int:
    model = EnergyModel.read(_path(args, args.model))
    train8 = _dataset(args, prefix='train-').project(model.catalog)
    vset = _dataset(args).project(model.catalog)
    groups = resolve_groups(args.groups if args.groups in ('table1', 'leaves') else _path(args, args.groups),
                            model.catalog)
    check_disjoint(train8, vset)

    result = search_phi(model, groups, train8, vset, zeta_grid=args.grid, verbose=args.verbose)
    print(f'Selected groups: {" ".join(result.selected_groups) or "(none)"}')
    print(f'zeta={result.zeta:g}, validation error {100.0 * result.mean_error:.2f}%, '
          f'training error {100.0 * result.train_error:.2f}%')

    if args.out is not None:
        print(f'Writing flags to {args.out}')
        with open(_path(args, args.out), 'w') as fh:
            fh.write(comment_lines([f'pyDecEnergy {__version__}', f'groups: {" ".join(result.selected_groups)}',
                                    f'zeta={result.zeta!r}']))
            fh.write(f'phi={bits_to_str(result.phi)}\n')
    print('Done.')
    return EXIT_OK


def cmd_synth(args) -> int:
    catalog = build_catalog(args.variant)
    protocol = MeasurementProtocolConfig() if args.measure else None

    zeta = args.zeta
    phi = None
    if zeta is not None:
        phi = [int(xx) for xx in resolve_phi(_phi_source(args, args.phi), catalog).tolist()]

    spec = CorpusSpec(name=args.name, records=args.records, sequences=args.sequences, noise=args.noise,
                      seed=args.seed, bit_depth=args.bit_depth, format=args.format,
                      zeta=zeta, phi=phi, measure=args.measure, protocol=protocol)

    if args.out10 is not None:
        phi10 = None
        if args.phi != 'table1' or catalog.variant == 'FU':
            phi10 = resolve_phi(_phi_source(args, args.phi), catalog)
        data8, data10, truth8, truth10 = generate_paired_corpora(catalog, spec, target_ratio=args.ratio, phi=phi10)
        print(f'Writing 8-bit corpus to {args.out} and 10-bit corpus to {args.out10} '
              f'(zeta={truth10.zeta:g})')
        write_dataset(data8, _path(args, args.out))
        write_dataset(data10, _path(args, args.out10))
        if args.truth is not None:
            truth8.write(_path(args, args.truth))
            truth10.write(_path(args, f'{args.truth}.10bit'))
        else:
            truth8.write(_truth_path(args, args.out))
            truth10.write(_truth_path(args, args.out10))
    else:
        data, truth = generate_synthetic_corpus(catalog, spec)
        print(f'Writing corpus to {args.out}')
        write_dataset(data, _path(args, args.out))
        truth.write(_path(args, args.truth) if args.truth is not None else _truth_path(args, args.out))

    print('Done.')
    return EXIT_OK


def _truth_path(args, out: str) -> Path:
    """Default ground truth file: inside a dataset directory, or next to a netCDF file"""

    opath = _path(args, out)
    assert opath is not None
    if opath.suffix == '.nc':
        return opath.with_name(f'{opath.stem}_{GROUND_TRUTH_FILE}')
    return opath / GROUND_TRUTH_FILE


def cmd_ratio(args) -> int:
    data8 = read_dataset(_path(args, args.data8), verbose=args.verbose)
    data10 = read_dataset(_path(args, args.data10), verbose=args.verbose)

    report = energy_ratio_report(data8, data10)
    print(report.summary())

    if args.out is not None:
        print(f'Writing pairs to {args.out}')
        with open(_path(args, args.out), 'w') as fh:
            fh.write(comment_lines([f'pyDecEnergy {__version__}'] + _input_hashes(args)))
            report.pairs.to_csv(fh, index=False)
    print('Done.')
    return EXIT_OK


def cmd_pipeline(args) -> int:
    workdir = None if args.workdir_given is False else args.workdir
    result = pipeline_run(_path(args, args.config), workdir=workdir, verbose=args.verbose)
    if result.exit_code == EXIT_OK:
        print(f'Artifacts written to {result.output_dir}')
        print('Done.')
    return result.exit_code


def _input_hashes(args) -> List[str]:
    lines = []
    for attr in ['data', 'features', 'energies', 'manifest', 'train_data', 'train_features',
                 'train_energies', 'train_manifest', 'model', 'data8', 'data10']:
        fname = getattr(args, attr, None)
        if fname is None:
            continue
        fpath = _path(args, fname)
        if fpath is None:
            continue
        if fpath.is_file():
            lines.append(f'input {fname} sha256={file_sha256(fpath)}')
        elif fpath.is_dir():
            # Dataset directory: one line per file
            lines.extend(f'input {fname}/{ff.name} sha256={file_sha256(ff)}'
                         for ff in sorted(fpath.iterdir()) if ff.is_file())
    return lines


def _add_training_args(parser: argparse.ArgumentParser):
    parser.add_argument('--objective', help='Training objective', choices=['abs', 'rel'], default='rel')
    parser.add_argument('--solver', help='Least squares solver', choices=['active_set', 'trf'],
                        default='active_set')
    parser.add_argument('--max-iterations', help='Solver iteration cap (default 10 x leaves)', type=int)
    parser.add_argument('--tol', help='Convergence tolerance', type=float, default=1e-10)
    parser.add_argument('--seed', help='Random seed', type=int, default=0)
    parser.add_argument('--config-filter', help='Train on one coding configuration', choices=CODING_CONFIGS)
    parser.add_argument('--qp-filter', help='Train on one QP', type=int, choices=QP_VALUES)
    parser.add_argument('--strict', help='Exit with status 3 if the solver does not converge',
                        action='store_true')


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog='decenergy', description='Feature-based HEVC decoding energy models')
    parser.add_argument('--workdir', help='Directory all paths are relative to', default='.')
    parser.add_argument('--verbose', help='Output additional information', action='store_true')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')

    subparsers = parser.add_subparsers(dest='command', required=True)

    sp = subparsers.add_parser('ingest', help='Validate a dataset and optionally convert it')
    _add_dataset_args(sp)
    sp.add_argument('--out', help='Output dataset directory or netCDF file')
    sp.set_defaults(func=cmd_ingest)

    sp = subparsers.add_parser('catalog', help='Print or export the feature catalog')
    sp.add_argument('--variant', help='Catalog variant', type=str.upper, choices=VARIANTS, default='FU')
    sp.add_argument('--csv', help='Write the catalog to a CSV file')
    sp.set_defaults(func=cmd_catalog)

    sp = subparsers.add_parser('train', help='Train an energy model')
    _add_dataset_args(sp)
    _add_training_args(sp)
    sp.add_argument('--variant', help='Project the dataset onto this catalog', type=str.upper, choices=VARIANTS)
    sp.add_argument('--out', help='Output model file', required=True)
    sp.set_defaults(func=cmd_train)

    sp = subparsers.add_parser('validate', help='Mean estimation error on validation datasets')
    sp.add_argument('--model', help='Trained model file')
    _add_dataset_args(sp, prefix='train-')
    _add_training_args(sp)
    sp.add_argument('--variants', help='Model variants to train', nargs='+', choices=VARIANTS)
    sp.add_argument('--dataset', '--validate', dest='validate', help='Validation dataset (repeatable)',
                    action='append', required=True)
    sp.add_argument('--report', '--out', dest='out', help='Output report CSV')
    sp.set_defaults(func=cmd_validate)

    sp = subparsers.add_parser('sweep-zeta', help='Validation error over a zeta grid')
    sp.add_argument('--model', help='8-bit model file', required=True)
    _add_dataset_args(sp, aliases=('--validate', ))
    sp.add_argument('--phi', help="Bit-depth flags: 'table1', 'ones' or a file", default='table1')
    sp.add_argument('--grid', help='Zeta grid start:stop:step', default='0:1.5:0.01')
    sp.add_argument('--out', help='Output curve CSV (percent)')
    sp.add_argument('--curve-out', '--data-out', dest='data_out',
                    help='Output curve data CSV (zeta,mean_error as fractions at full precision)')
    sp.set_defaults(func=cmd_sweep_zeta)

    sp = subparsers.add_parser('search-phi', help='Brute-force search of the bit-depth flags')
    sp.add_argument('--model', help='8-bit model file', required=True)
    _add_dataset_args(sp, prefix='train-')
    _add_dataset_args(sp, aliases=('--validate', ))
    sp.add_argument('--groups', help="Feature groups: 'table1' (default; one group per catalog feature row, "
                                     "an assumed grouping), 'leaves' or a groups file", default='table1')
    sp.add_argument('--grid', help='Zeta grid start:stop:step', default='0:1.5:0.01')
    sp.add_argument('--out', help='Output flags file')
    sp.set_defaults(func=cmd_search_phi)

    sp = subparsers.add_parser('synth', help='Generate a synthetic corpus')
    sp.add_argument('--catalog', '--variant', dest='variant', help='Catalog variant', type=str.upper,
                    choices=VARIANTS, default='FU')
    sp.add_argument('--name', help='Setup name', default='synthetic')
    sp.add_argument('--records', help='Number of bit streams', type=int, default=500)
    sp.add_argument('--sequences', help='Number of sequences (default 16 bit streams each)', type=int)
    sp.add_argument('--noise', help='Relative noise level', type=float, default=0.0)
    sp.add_argument('--seed', help='Random seed', type=int, default=0)
    sp.add_argument('--bit-depth', help='Bit depth', type=int, choices=[8, 10], default=8)
    sp.add_argument('--format', help='Video format', default='SDR')
    sp.add_argument('--zeta', help='Bit-depth scaling of the energies', type=float)
    sp.add_argument('--phi', help="Bit-depth flags: 'table1', 'ones' or a file", default='table1')
    sp.add_argument('--measure', help='Measure energies with the simulated protocol', action='store_true')
    sp.add_argument('--out', help='Output dataset directory or netCDF file', required=True)
    sp.add_argument('--out10', help='Also write a paired 10-bit corpus here')
    sp.add_argument('--ratio', help='Mean 10-bit / 8-bit energy ratio of the paired corpus', type=float,
                    default=1.55)
    sp.add_argument('--truth', help=f'Ground truth model file (default {GROUND_TRUTH_FILE} in the output directory)')
    sp.set_defaults(func=cmd_synth)

    sp = subparsers.add_parser('ratio', help='Paired 10-bit / 8-bit energy ratios')
    sp.add_argument('--data8', help='8-bit dataset', required=True)
    sp.add_argument('--data10', help='10-bit dataset', required=True)
    sp.add_argument('--out', help='Output pairs CSV')
    sp.set_defaults(func=cmd_ratio)

    sp = subparsers.add_parser('pipeline', help='Run a pipeline configuration')
    sp.add_argument('config', help='Pipeline configuration (TOML)')
    sp.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    raw = sys.argv[1:] if argv is None else argv
    args.workdir_given = any(aa == '--workdir' or aa.startswith('--workdir=') for aa in raw)

    try:
        return args.func(args)
    except Exception as err:
        code = exit_code_for(err)
        if code == EXIT_USAGE:
            raise
        err_con.print(f'[bold red]ERROR[/]: {type(err).__name__}: {err}')
        return code


if __name__ == '__main__':
    sys.exit(main())
