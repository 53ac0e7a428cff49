import pytest
import numpy as np
import pandas as pd

from pyDecEnergy.bitdepth.PhiSearch import table1_phi
from pyDecEnergy.bitdepth.ZetaSweep import ZetaSweepResult, read_curve, sweep_zeta, write_curve
from pyDecEnergy.catalog.FeatureCatalog import FeatureCatalog
from pyDecEnergy.energy_helpers import parse_zeta_grid, zeta_grid
from pyDecEnergy.measurement.SyntheticCorpus import CorpusSpec, generate_synthetic_corpus
from pyDecEnergy.model.EnergyModel import EnergyModel
from pyDecEnergy.report.renderers import render_curve


@pytest.fixture(scope='class')
def planted(fu_catalog):
    """8-bit model and a noiseless 10-bit corpus scaled with zeta = 0.66 on the default flags"""
    phi = table1_phi(fu_catalog)
    data8, truth8 = generate_synthetic_corpus(fu_catalog, CorpusSpec(name='Conventional8', records=80, seed=13))
    data10, _ = generate_synthetic_corpus(fu_catalog,
                                          CorpusSpec(name='Conventional10', records=80, seed=14, bit_depth=10,
                                                     sequence_prefix='ten', e_true=truth8.e_true.tolist(),
                                                     zeta=0.66, phi=phi.tolist()))
    return truth8.model, phi, data10


@pytest.fixture
def reference_curves(datadir):
    # Mean estimation errors (percent) of the all-features and the subset scaling
    return pd.read_csv(datadir / 'reference_curves.csv')


class TestZetaGrid:

    def test_default_grid(self):
        grid = zeta_grid()
        assert grid.size == 151
        assert grid[0] == 0.0
        assert grid[-1] == 1.5
        assert grid[66] == 0.66
        assert grid[56] == 0.56

    @pytest.mark.parametrize('spec, expected', [('0:1:0.25', [0.0, 0.25, 0.5, 0.75, 1.0]),
                                                ('0.66', [0.66]),
                                                ([0.0, 0.66], [0.0, 0.66])])
    def test_parse_grid(self, spec, expected):
        np.testing.assert_array_equal(parse_zeta_grid(spec), expected)

    @pytest.mark.parametrize('spec', ['0:1', '1:0:0.1', '0:1:0', '-0.5', []])
    def test_bad_grid(self, spec):
        with pytest.raises(ValueError):
            parse_zeta_grid(spec)


class TestZetaSweep:

    def test_planted_zeta_recovered(self, planted):
        model8, phi, data10 = planted
        sweep = sweep_zeta(model8, phi, data10)

        assert len(sweep) == 151
        zmin, emin = sweep.argmin
        assert zmin == 0.66
        assert emin == 0.0

    def test_zero_zeta_is_unscaled_error(self, planted):
        model8, phi, data10 = planted
        sweep = sweep_zeta(model8, phi, data10, grid=[0.0, 0.66])

        unscaled = np.mean(np.abs(model8.estimate_dataset(data10) - data10.energies) / data10.energies)
        assert sweep.error_at(0.0) == pytest.approx(unscaled, rel=1e-12)
        assert sweep.error_at(0.0) > 0.0

        with pytest.raises(KeyError):
            sweep.error_at(0.5)

    def test_curve_is_unimodal_around_planted(self, planted):
        model8, phi, data10 = planted
        sweep = sweep_zeta(model8, phi, data10, grid='0.5:0.8:0.02')
        idx = sweep.argmin_index
        assert np.all(np.diff(sweep.errors[:idx + 1]) < 0)
        assert np.all(np.diff(sweep.errors[idx:]) > 0)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(606)
        grid = zeta_grid(0.0, 1.5, 0.05)
        for trial in range(50):
            nleaf = int(rng.integers(2, 8, endpoint=True))
            catalog = FeatureCatalog.from_names(['E_O'] + [f'l{ii}' for ii in range(nleaf - 1)])
            e_true = rng.uniform(0.01, 0.1, nleaf)
            phi = rng.integers(0, 1, nleaf, endpoint=True)
            zeta = float(rng.uniform(0.0, 1.5))
            data10, _ = generate_synthetic_corpus(catalog, CorpusSpec(name='val10', records=30, seed=trial,
                                                                      bit_depth=10, e_true=e_true.tolist(),
                                                                      zeta=zeta, phi=phi.tolist(), noise=0.02))
            model8 = EnergyModel(catalog, e_true)
            sweep = sweep_zeta(model8, phi, data10, grid=grid)

            counts = data10.counts.astype(np.float64)
            measured = data10.energies
            oracle = np.array([np.mean(np.abs(counts @ ((1.0 + zz * phi) * e_true) - measured) / measured)
                               for zz in grid])
            np.testing.assert_allclose(sweep.errors, oracle, rtol=1e-12)
            assert oracle[sweep.argmin_index] <= oracle.min() * (1.0 + 1e-12), f'trial {trial}'

    @pytest.mark.slow
    def test_noisy_planted_zeta(self, fu_catalog):
        phi = table1_phi(fu_catalog)
        _, truth8 = generate_synthetic_corpus(fu_catalog, CorpusSpec(name='Conventional8', records=10, seed=40))
        hits = 0
        for trial in range(100):
            data10, _ = generate_synthetic_corpus(fu_catalog,
                                                  CorpusSpec(name='Conventional10', records=60, seed=1000 + trial,
                                                             bit_depth=10, e_true=truth8.e_true.tolist(),
                                                             zeta=0.66, phi=phi.tolist(), noise=0.01))
            zmin, _ = sweep_zeta(truth8.model, phi, data10).argmin
            hits += abs(zmin - 0.66) <= 0.03 + 1e-12
        assert hits >= 95

    def test_ties_go_to_first(self):
        sweep = ZetaSweepResult([0.0, 0.1, 0.2], [0.3, 0.1, 0.1])
        assert sweep.argmin == (0.1, 0.1)

    def test_result_validation(self):
        with pytest.raises(ValueError):
            ZetaSweepResult([], [])
        with pytest.raises(ValueError):
            ZetaSweepResult([0.0, 0.1], [0.2])

    def test_reference_curve_minima(self, reference_curves):
        df = reference_curves
        all_features = ZetaSweepResult(df['zeta'], df['all_features_percent'] / 100.0)
        subset = ZetaSweepResult(df['zeta'], df['subset_percent'] / 100.0)

        assert all_features.argmin[0] == 0.56
        assert all_features.argmin[1] == pytest.approx(0.106167625880503, rel=1e-12)
        assert subset.argmin[0] == 0.66
        assert subset.argmin[1] == pytest.approx(0.0731110310258069, rel=1e-12)
        assert all_features.error_at(0.0) == subset.error_at(0.0) == pytest.approx(0.3595)


class TestCurveFile:

    def test_render_curve(self, reference_curves):
        df = reference_curves
        sweep = ZetaSweepResult(df['zeta'], df['subset_percent'] / 100.0)
        lines = render_curve(sweep).splitlines()

        assert lines[0] == 'zeta,mean_error_percent'
        assert lines[1] == '0.00,35.95'
        assert lines[67] == '0.66,7.31'
        assert lines[-1] == '# argmin zeta=0.66, error=7.31%'

    def test_write_read(self, planted, tmp_path):
        model8, phi, data10 = planted
        sweep = sweep_zeta(model8, phi, data10, grid='0:1:0.1')
        write_curve(sweep, tmp_path / 'curve.csv', provenance=['planted'])

        other = read_curve(tmp_path / 'curve.csv')
        np.testing.assert_array_equal(other.grid, sweep.grid)
        np.testing.assert_array_equal(other.errors, sweep.errors)

    def test_read_rendered(self, reference_curves):
        df = reference_curves
        sweep = ZetaSweepResult(df['zeta'], df['all_features_percent'] / 100.0)
        other = read_curve(render_curve(sweep))
        assert other.argmin[0] == 0.56
        assert other.argmin[1] == pytest.approx(0.1062, abs=1e-12)

    def test_read_bad_header(self, tmp_path):
        (tmp_path / 'curve.csv').write_text('z,e\n0,1\n')
        with pytest.raises(ValueError):
            read_curve(tmp_path / 'curve.csv')
