import pytest
import numpy as np
import pandas as pd

from scipy.optimize import nnls

from pyDecEnergy.catalog.FeatureCatalog import FeatureCatalog
from pyDecEnergy.dataset.EnergyDataset import EnergyDataset
from pyDecEnergy.Exceptions_custom import EmptyDatasetError, OverlapError
from pyDecEnergy.measurement.SyntheticCorpus import CorpusSpec, generate_synthetic_corpus
from pyDecEnergy.model.metrics import mean_estimation_error
from pyDecEnergy.trainer.nnls import active_set_nnls, kkt_residual, trf_nnls
from pyDecEnergy.trainer.Trainer import Trainer, check_disjoint, train, train_validate
from pyDecEnergy.trainer.TrainingConfig import TrainingConfig


@pytest.fixture(scope='class')
def noiseless(fu_catalog):
    return generate_synthetic_corpus(fu_catalog, CorpusSpec(name='Conventional8', records=320, seed=21))


def small_dataset(name, counts, energies, sequence_prefix='s', bit_depth=8, names=('E_O', 'a', 'b', 'c')):
    catalog = FeatureCatalog.from_names(list(names))
    ids = [f'{name}_{ii}' for ii in range(len(energies))]
    meta = pd.DataFrame({'id': ids,
                         'setup': name,
                         'sequence': [f'{sequence_prefix}{ii}' for ii in range(len(energies))],
                         'qp': 22,
                         'config': 'intra',
                         'bit_depth': bit_depth,
                         'format': 'SDR',
                         'frames': None}).astype(object)
    return EnergyDataset(name, catalog, meta, counts, energies)


def grid_min_objective(amat, rhs, upper, step):
    """Smallest ||Ax - b||^2 with the leading columns on a grid over [0, upper] and the last one optimal"""

    grid = np.arange(int(round(upper / step)) + 1) * step
    last = amat[:, -1]

    def exact_last(resid):
        tt = np.maximum(resid @ last / (last @ last), 0.0)
        return ((resid - tt[..., np.newaxis] * last) ** 2).sum(axis=-1)

    if amat.shape[1] == 1:
        return float(exact_last(rhs[np.newaxis, :]).min())
    if amat.shape[1] == 2:
        return float(exact_last(rhs - grid[:, np.newaxis] * amat[:, 0]).min())

    best = np.inf
    for x0 in grid:
        resid = rhs - x0 * amat[:, 0] - grid[:, np.newaxis] * amat[:, 1]
        best = min(best, float(exact_last(resid).min()))
    return best


class TestNNLS:

    @pytest.mark.parametrize('seed', range(6))
    def test_matches_scipy_nnls(self, seed):
        rng = np.random.default_rng(seed)
        amat = rng.uniform(0.0, 1.0, size=(12, 5))
        # Coefficients of both signs leave some variables at the bound
        rhs = amat @ rng.uniform(-1.0, 1.0, size=5) + rng.normal(0.0, 0.01, size=12)

        res = active_set_nnls(amat, rhs, 100, 1e-12)
        expected, rnorm = nnls(amat, rhs)

        assert res.converged
        np.testing.assert_allclose(res.x, expected, atol=1e-9)
        assert res.rnorm == pytest.approx(rnorm, rel=1e-9, abs=1e-12)
        assert np.all(res.x >= 0.0)

    def test_grid_oracle(self):
        # min (x1 + x2 - 1)^2 + (x1 - x2 - 3)^2 over x >= 0 has its minimum at (2, 0)
        amat = np.array([[1.0, 1.0], [1.0, -1.0]])
        rhs = np.array([1.0, 3.0])
        res = active_set_nnls(amat, rhs, 20, 1e-12)

        grid = np.linspace(0.0, 4.0, 401)
        xx, yy = np.meshgrid(grid, grid, indexing='ij')
        obj = (xx + yy - 1.0) ** 2 + (xx - yy - 3.0) ** 2
        imin = np.unravel_index(np.argmin(obj), obj.shape)

        np.testing.assert_allclose(res.x, [grid[imin[0]], grid[imin[1]]], atol=1e-12)
        assert res.x[1] == 0.0

    def test_all_at_bound(self):
        res = active_set_nnls(np.eye(3), np.array([-1.0, -2.0, -3.0]), 10, 1e-12)
        assert res.converged
        assert res.iterations == 0
        np.testing.assert_array_equal(res.x, [0.0, 0.0, 0.0])

    def test_iteration_cap(self):
        rng = np.random.default_rng(2)
        amat = rng.uniform(0.0, 1.0, size=(20, 8))
        res = active_set_nnls(amat, amat @ np.ones(8), 2, 1e-12)
        assert not res.converged
        assert res.iterations == 2
        assert np.all(res.x >= 0.0)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            active_set_nnls(np.ones((3, 2)), np.ones(4), 10, 1e-12)

    def test_trf_solver(self):
        rng = np.random.default_rng(8)
        amat = rng.uniform(0.0, 1.0, size=(30, 6))
        rhs = amat @ np.array([1.0, 0.2, 2.0, 0.5, 0.7, 3.0])
        res = trf_nnls(amat, rhs, 200, 1e-12)
        np.testing.assert_allclose(res.x, nnls(amat, rhs)[0], atol=1e-6)

    def test_kkt_residual(self):
        amat = np.eye(2)
        rhs = np.array([1.0, -1.0])
        assert kkt_residual(amat, rhs, np.array([1.0, 0.0])) == 0.0
        assert kkt_residual(amat, rhs, np.array([0.0, 0.0])) == pytest.approx(1.0 / np.sqrt(2.0))

    def test_tie_break_seed(self):
        # Identical columns tie on every gradient; the seed decides which one enters
        amat = np.ones((2, 2))
        rhs = np.ones(2)
        outcomes = set()
        for seed in range(40):
            res = active_set_nnls(amat, rhs, 10, 1e-12, seed=seed)
            assert res.converged
            assert sorted(res.x.tolist()) == [0.0, 1.0]
            np.testing.assert_array_equal(active_set_nnls(amat, rhs, 10, 1e-12, seed=seed).x, res.x)
            outcomes.add(tuple(res.x.tolist()))
        assert outcomes == {(1.0, 0.0), (0.0, 1.0)}

    @pytest.mark.slow
    def test_random_grid_oracle(self):
        rng = np.random.default_rng(77)
        step = 1e-3
        for trial in range(50):
            ncol = int(rng.integers(1, 3, endpoint=True))
            amat = rng.uniform(0.5, 1.5, size=(10, ncol))
            rhs = amat @ rng.uniform(-0.3, 1.0, size=ncol) + rng.normal(0.0, 0.05, size=10)

            res = active_set_nnls(amat, rhs, 100, 1e-12)
            assert res.converged
            fx = res.rnorm ** 2
            gmin = grid_min_objective(amat, rhs, float(np.ceil(res.x.max())) + 1.0, step)

            # No grid point beats the solution, and rounding the solution to the grid costs at most |A d|^2
            assert fx <= gmin + 1e-12, f'trial {trial}'
            rounding = float(np.sum((np.abs(amat[:, :-1]).sum(axis=1) * step / 2.0) ** 2))
            assert gmin <= fx + rounding + 1e-9, f'trial {trial}'


class TestTrainer:

    @pytest.mark.parametrize('objective', ['abs', 'rel'])
    def test_noiseless_recovery(self, noiseless, objective):
        data, truth = noiseless
        model = train(data, TrainingConfig(objective=objective))

        assert model.converged
        assert model.kkt_residual <= 1e-10
        np.testing.assert_allclose(model.coefficients, truth.e_true, rtol=1e-6)
        assert model.training_setup == 'Conventional8'
        assert model.bit_depth == 8
        assert not model.untrained.any()

    def test_objective_names(self):
        assert TrainingConfig(objective='abs').objective == 'absolute_lsq'
        assert TrainingConfig().objective == 'relative_weighted_lsq'

        with pytest.raises(ValueError):
            TrainingConfig(objective='huber')

    def test_iterations_default(self):
        assert TrainingConfig().iterations_for(100) == 1000
        assert TrainingConfig(max_iterations=7).iterations_for(100) == 7

    def test_untrained_leaf(self):
        # Leaf c never occurs; energies follow E_O = 1, a = 0.5, b = 0.25
        counts = [[1, 2, 4, 0], [1, 4, 0, 0], [1, 0, 8, 0], [1, 6, 2, 0], [1, 1, 1, 0]]
        energies = [1.0 + 0.5 * cc[1] + 0.25 * cc[2] for cc in counts]
        model = train(small_dataset('small', counts, energies))

        np.testing.assert_array_equal(model.untrained, [False, False, False, True])
        assert model.coefficient('c') == 0.0
        np.testing.assert_allclose(model.coefficients[:3], [1.0, 0.5, 0.25], rtol=1e-9)

    def test_coefficients_nonnegative(self):
        # The unconstrained fit would give b a negative coefficient
        counts = [[1, 2, 4, 1], [1, 4, 1, 3], [1, 0, 8, 2], [1, 6, 2, 5], [1, 1, 7, 1]]
        energies = [1.0 + 0.5 * cc[1] + 0.1 * cc[3] - 0.05 * cc[2] + 0.4 for cc in counts]
        model = train(small_dataset('small', counts, energies), TrainingConfig(objective='abs'))
        assert np.all(model.coefficients >= 0.0)
        assert model.converged

    def test_trf_matches_active_set(self, noiseless):
        data, _ = noiseless
        sub = data.subset(data.ids[:200])
        m1 = train(sub)
        m2 = train(sub, TrainingConfig(solver='trf'))
        np.testing.assert_allclose(m2.coefficients, m1.coefficients, rtol=1e-4)

    def test_iteration_cap_warns(self, noiseless, capsys):
        data, _ = noiseless
        model = train(data, TrainingConfig(max_iterations=3))
        assert not model.converged
        assert 'WARNING' in capsys.readouterr().out

    def test_config_filter(self, noiseless):
        data, _ = noiseless
        trainer = Trainer(TrainingConfig(config_filter='intra'))
        model = trainer.train(data)
        assert model.training_setup == 'Conventional8'

    def test_empty_after_filter(self):
        counts = [[1, 2, 4, 0], [1, 4, 0, 0]]
        with pytest.raises(EmptyDatasetError):
            train(small_dataset('small', counts, [2.0, 3.0]), TrainingConfig(config_filter='randomaccess'))

    @pytest.mark.parametrize('objective', ['abs', 'rel'])
    def test_single_leaf(self, objective):
        model = train(small_dataset('one', [[1]] * 6, [5.0] * 6, names=('E_O', )), TrainingConfig(objective=objective))
        assert model.coefficients.tolist() == pytest.approx([5.0], rel=1e-12)

    def test_scale_equivariance(self):
        catalog = FeatureCatalog.from_names(['E_O', 'a', 'b', 'c'])
        data, _ = generate_synthetic_corpus(catalog, CorpusSpec(name='small', records=60, seed=3, noise=0.05,
                                                                e_true=[0.5, 0.02, 0.01, 0.03]))
        scaled = EnergyDataset('small', catalog, data.meta, data.counts, 3.0 * data.energies)

        cfg = TrainingConfig(objective='abs')
        np.testing.assert_allclose(train(scaled, cfg).coefficients, 3.0 * train(data, cfg).coefficients, rtol=1e-9)

    def test_same_seed_identical(self, noiseless):
        data, _ = noiseless
        cfg = TrainingConfig(seed=17)
        np.testing.assert_array_equal(train(data, cfg).coefficients, train(data, cfg).coefficients)

    @pytest.mark.slow
    def test_noisy_held_out(self, fu_catalog):
        data, truth = generate_synthetic_corpus(fu_catalog, CorpusSpec(name='train', records=500, seed=31,
                                                                       noise=0.01))
        held, _ = generate_synthetic_corpus(fu_catalog, CorpusSpec(name='held', records=200, seed=32, noise=0.01,
                                                                   sequence_prefix='h',
                                                                   e_true=truth.e_true.tolist()))
        model = train(data)
        assert model.converged
        assert model.kkt_residual <= 1e-10
        assert mean_estimation_error(model, held).mean_error <= 0.03


class TestTrainValidate:

    def test_disjoint(self):
        counts = [[1, 2, 4, 0], [1, 4, 0, 0]]
        ds1 = small_dataset('one', counts, [2.0, 3.0], sequence_prefix='x')
        ds2 = small_dataset('two', counts, [2.0, 3.0], sequence_prefix='y')
        check_disjoint(ds1, ds2)

        # Same sequences at another bit depth do not overlap
        check_disjoint(ds1, small_dataset('ten', counts, [2.0, 3.0], sequence_prefix='x', bit_depth=10))

    def test_shared_ids(self, noiseless):
        data, _ = noiseless
        with pytest.raises(OverlapError):
            check_disjoint(data, data.subset(data.ids[:5]))

    def test_shared_sequences(self):
        counts = [[1, 2, 4, 0], [1, 4, 0, 0]]
        ds1 = small_dataset('one', counts, [2.0, 3.0], sequence_prefix='x')
        ds2 = small_dataset('two', counts, [2.0, 3.0], sequence_prefix='x')
        with pytest.raises(OverlapError) as err:
            check_disjoint(ds1, ds2)
        assert 'one_0/two_0' in str(err.value)

    def test_train_validate_variants(self, fu_catalog):
        spec = CorpusSpec(name='Conventional8', records=240, noise=0.02, seed=5)
        train_set, _ = generate_synthetic_corpus(fu_catalog, spec)
        val_set, _ = generate_synthetic_corpus(fu_catalog, spec.model_copy(update={'name': 'Fisheye',
                                                                                   'sequence_prefix': 'fish',
                                                                                   'format': 'Fisheye',
                                                                                   'seed': 6,
                                                                                   'records': 64}))

        report = train_validate(train_set, [val_set], variants=['FA', 'FU'])
        assert report.training_setup == 'Conventional8'
        assert report.columns == ['FA', 'FU']
        assert report.validation_setups == ['Fisheye']
        assert set(report.models) == {'FA', 'FU'}
        assert report.models['FA'].variant == 'FA'
        assert report.get_row('Fisheye', 'FU').cross_bit_depth is False

        # The two corpora use independently drawn coefficients
        assert report.cell('Fisheye', 'FU') > 0.0
        assert len(report.residuals[('Fisheye', 'FA')]) == 64

    def test_cross_bit_depth_flag(self, fu_catalog):
        spec = CorpusSpec(name='Conventional8', records=160, seed=9)
        train_set, truth = generate_synthetic_corpus(fu_catalog, spec)
        val_set, _ = generate_synthetic_corpus(fu_catalog, spec.model_copy(update={'name': 'Conventional10',
                                                                                   'bit_depth': 10,
                                                                                   'id_prefix': 'c10_',
                                                                                   'e_true': truth.e_true.tolist(),
                                                                                   'seed': 10}))
        report = Trainer().train_validate(train_set, [val_set])
        row = report.get_row('Conventional10', 'FU')
        assert row.cross_bit_depth
        # Same coefficients and no bit-depth scaling: the model fits the 10-bit data
        assert row.mean_error < 1e-6

    def test_overlap_rejected(self, noiseless):
        data, _ = noiseless
        with pytest.raises(OverlapError):
            train_validate(data, [data])
