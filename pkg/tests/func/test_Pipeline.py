import json
import pytest

from pydantic import ValidationError

from pyDecEnergy.bitdepth.FeatureGroup import FeatureGroup, write_groups
from pyDecEnergy.bitdepth.ZetaSweep import read_curve
from pyDecEnergy.constants import CATEGORIES
from pyDecEnergy.dataset.DatasetFile import write_dataset
from pyDecEnergy.energy_helpers import text_sha256
from pyDecEnergy.Exceptions_custom import (ConvergenceError, DatasetError, OverlapError, PipelineError)
from pyDecEnergy.measurement.SyntheticCorpus import CorpusSpec, generate_paired_corpora, generate_synthetic_corpus
from pyDecEnergy.model.EnergyModel import EnergyModel
from pyDecEnergy.pipeline.Pipeline import (FAILED_MARKER, PROVENANCE_FILE, DatasetSource, Pipeline, PipelineConfig,
                                           exit_code_for, pipeline_run)

PIPELINE_TOML = '''[pipeline]
output_dir = "out"
variants = ["FA", "FU"]
objective = "rel"

[train]
dataset = "conv8"

[[validate]]
dataset = "fisheye"

[[validate]]
features = "conv10/features.csv"
energies = "conv10/energies.csv"
manifest = "conv10/manifest.toml"
'''

SWEEP_TOML = '''
[sweep]
grid = "0:1:0.01"

[search]
groups = "groups.txt"
grid = "0:1:0.1"
'''


@pytest.fixture(scope='module')
def corpora(fu_catalog):
    data8, data10, truth8, truth10 = generate_paired_corpora(fu_catalog, CorpusSpec(name='Conventional',
                                                                                    records=150, seed=1))
    fisheye, _ = generate_synthetic_corpus(fu_catalog, CorpusSpec(name='Fisheye', records=48, seed=2, noise=0.01,
                                                                  format='Fisheye', sequence_prefix='fish',
                                                                  e_true=truth8.e_true.tolist()))
    return data8, data10, fisheye, truth10


@pytest.fixture
def workspace(tmp_path, corpora, fu_catalog):
    data8, data10, fisheye, _ = corpora
    write_dataset(data8, tmp_path / 'conv8')
    write_dataset(data10, tmp_path / 'conv10')
    write_dataset(fisheye, tmp_path / 'fisheye')

    groups = [FeatureGroup(cat, tuple(leaf.name for leaf in fu_catalog if leaf.category == cat))
              for cat in CATEGORIES]
    write_groups(groups, tmp_path / 'groups.txt')

    (tmp_path / 'pipeline.toml').write_text(PIPELINE_TOML + SWEEP_TOML)
    return tmp_path


def snapshot(outdir):
    return {ff.name: ff.read_bytes() for ff in sorted(outdir.iterdir())}


class TestPipeline:

    def test_end_to_end(self, workspace, corpora):
        _, _, _, truth10 = corpora
        result = pipeline_run(workspace / 'pipeline.toml')

        assert result.exit_code == 0
        assert result.failed_stage is None
        outdir = workspace / 'out'
        assert result.output_dir == outdir
        assert {ff.name for ff in outdir.iterdir()} == {'model.txt', 'model_FA.txt', 'model_scaled.txt',
                                                        'report.txt', 'report.csv', 'curve.csv',
                                                        'curve_data.csv', 'phi.txt', PROVENANCE_FILE}

        assert EnergyModel.read(outdir / 'model.txt').variant == 'FU'
        assert EnergyModel.read(outdir / 'model_FA.txt').variant == 'FA'

        report = (outdir / 'report.txt').read_text()
        assert 'Mean estimation error (training: Conventional)' in report
        assert 'Mean estimation error of the bit-depth scaled model' in report
        assert 'Bit-depth flag search on Conventional10: 32 subsets of 5 groups' in report

        # Noiseless training data: the curve has its minimum next to the planted zeta
        zmin, _ = read_curve(outdir / 'curve_data.csv').argmin
        assert abs(zmin - truth10.zeta) <= 0.0051
        scaled = EnergyModel.read(outdir / 'model_scaled.txt')
        assert scaled.zeta == zmin

        assert (outdir / 'phi.txt').read_text().splitlines()[-1].startswith('phi=')

    def test_provenance(self, workspace):
        pipeline_run(workspace / 'pipeline.toml')
        outdir = workspace / 'out'
        prov = json.loads((outdir / PROVENANCE_FILE).read_text())

        assert prov['tool'] == 'pyDecEnergy'
        assert prov['stages'] == ['ingest', 'train', 'validate', 'sweep', 'search', 'report']
        assert prov['config_sha256'] == PipelineConfig.read(workspace / 'pipeline.toml').config_hash()
        assert prov['seeds'] == {'pipeline': 0}
        assert set(prov['inputs']) == {'conv8/features.csv', 'conv8/energies.csv', 'conv8/manifest.toml',
                                       'fisheye/features.csv', 'fisheye/energies.csv', 'fisheye/manifest.toml',
                                       'conv10/features.csv', 'conv10/energies.csv', 'conv10/manifest.toml'}
        assert prov['artifacts']['report.txt'] == text_sha256((outdir / 'report.txt').read_text())
        assert 'failed_stage' not in prov

    def test_rerun_is_identical(self, workspace):
        pipeline_run(workspace / 'pipeline.toml')
        first = snapshot(workspace / 'out')

        pipeline_run(workspace / 'pipeline.toml')
        assert snapshot(workspace / 'out') == first

    def test_without_optional_stages(self, workspace):
        (workspace / 'pipeline.toml').write_text(PIPELINE_TOML)
        pipeline = Pipeline(PipelineConfig.read(workspace / 'pipeline.toml'), workdir=workspace)
        result = pipeline.run()

        assert result.exit_code == 0
        assert pipeline.completed_stages == ['ingest', 'train', 'validate', 'report']
        assert set(pipeline.models) == {'FA', 'FU'}
        assert pipeline.report.columns == ['FA', 'FU']
        assert not (workspace / 'out' / 'curve.csv').exists()

    def test_missing_input(self, workspace):
        (workspace / 'pipeline.toml').write_text(PIPELINE_TOML.replace('dataset = "conv8"', 'dataset = "nothing"'))
        result = pipeline_run(workspace / 'pipeline.toml')

        assert result.exit_code == 2
        assert result.failed_stage == 'ingest'

        marker = (workspace / 'out' / FAILED_MARKER).read_text().splitlines()
        assert marker[0] == 'stage: ingest'
        assert marker[1].startswith('error: FileNotFoundError')

        prov = json.loads((workspace / 'out' / PROVENANCE_FILE).read_text())
        assert prov['failed_stage'] == 'ingest'
        assert prov['stages'] == []

    def test_stale_marker_removed(self, workspace):
        (workspace / 'out').mkdir()
        (workspace / 'out' / FAILED_MARKER).write_text('stage: ingest\n')
        assert pipeline_run(workspace / 'pipeline.toml').exit_code == 0
        assert not (workspace / 'out' / FAILED_MARKER).exists()

    def test_sweep_without_10bit_set(self, workspace):
        toml = PIPELINE_TOML.split('[[validate]]')[0] + '[[validate]]\ndataset = "fisheye"\n\n[sweep]\n'
        (workspace / 'pipeline.toml').write_text(toml)
        pipeline = Pipeline(PipelineConfig.read(workspace / 'pipeline.toml'), workdir=workspace)
        result = pipeline.run()

        assert result.exit_code == 2
        assert result.failed_stage == 'sweep'
        assert pipeline.completed_stages == ['ingest', 'train', 'validate']
        assert (workspace / 'out' / 'report.csv').exists()

    def test_duplicate_dataset_names(self, workspace):
        toml = PIPELINE_TOML.replace('dataset = "fisheye"', 'dataset = "conv8"')
        (workspace / 'pipeline.toml').write_text(toml)
        result = pipeline_run(workspace / 'pipeline.toml')
        assert result.exit_code == 2
        assert result.failed_stage == 'ingest'

    @pytest.mark.parametrize('text', ['[pipeline]\noutput_dir = "out"\n',
                                      PIPELINE_TOML + '\n[extra]\nkey = 1\n',
                                      PIPELINE_TOML.replace('"FA", "FU"', '"FX"'),
                                      'not toml at all ['])
    def test_invalid_config(self, workspace, text):
        (workspace / 'pipeline.toml').write_text(text)
        result = pipeline_run(workspace / 'pipeline.toml')
        assert result.exit_code == 1
        assert result.output_dir is None
        assert not (workspace / 'out').exists()

    def test_missing_config(self, tmp_path):
        assert pipeline_run(tmp_path / 'nothing.toml').exit_code == 1


class TestPipelineConfig:

    def test_defaults(self):
        cfg = PipelineConfig.model_validate({'train': {'dataset': 'conv8'}})
        assert cfg.pipeline.variants == ['FU']
        assert cfg.pipeline.objective == 'relative_weighted_lsq'
        assert cfg.validate_sets == []
        assert cfg.sweep is None

    def test_objective_short_name(self):
        cfg = PipelineConfig.model_validate({'pipeline': {'objective': 'abs'}, 'train': {'dataset': 'conv8'}})
        assert cfg.pipeline.objective == 'absolute_lsq'

    def test_config_hash(self):
        cfg1 = PipelineConfig.model_validate({'train': {'dataset': 'conv8'}})
        cfg2 = PipelineConfig.model_validate({'train': {'dataset': 'conv8'}, 'pipeline': {'variants': ['FU']}})
        cfg3 = PipelineConfig.model_validate({'train': {'dataset': 'conv8'}, 'pipeline': {'seed': 1}})
        assert cfg1.config_hash() == cfg2.config_hash()
        assert cfg1.config_hash() != cfg3.config_hash()

    @pytest.mark.parametrize('kwargs', [{},
                                        {'features': 'f.csv', 'energies': 'e.csv'},
                                        {'dataset': 'd', 'features': 'f.csv'}])
    def test_dataset_source(self, kwargs):
        with pytest.raises(ValidationError):
            DatasetSource(**kwargs)

    def test_repeated_variant(self):
        with pytest.raises(ValidationError):
            PipelineConfig.model_validate({'train': {'dataset': 'conv8'}, 'pipeline': {'variants': ['FU', 'FU']}})


class TestExitCodes:

    @pytest.mark.parametrize('err, code', [(ConvergenceError('no'), 3),
                                           (DatasetError('bad'), 2),
                                           (OverlapError('shared'), 2),
                                           (FileNotFoundError('gone'), 2),
                                           (PipelineError('train', ConvergenceError('no')), 3),
                                           (PipelineError('ingest', DatasetError('bad')), 2),
                                           (RuntimeError('bug'), 1)])
    def test_exit_code_for(self, err, code):
        assert exit_code_for(err) == code
