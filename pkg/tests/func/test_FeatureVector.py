import pytest
import numpy as np

from pyDecEnergy.catalog.FeatureCatalog import FeatureCatalog
from pyDecEnergy.dataset.FeatureVector import FeatureVector
from pyDecEnergy.Exceptions_custom import AlignmentError, InvalidValueError, NegativeCountError


@pytest.fixture(scope='class')
def small_catalog():
    return FeatureCatalog.from_names(['E_O', 'a', 'b@0', 'b@1'])


class TestFeatureVector:

    def test_create(self, small_catalog):
        fvec = FeatureVector(small_catalog, [1, 5, 0, 3])
        assert len(fvec) == 4
        assert fvec['a'] == 5
        assert fvec['b@1'] == 3
        assert fvec.catalog_variant == 'custom'
        assert fvec.counts.dtype == np.int64

    def test_counts_read_only(self, small_catalog):
        fvec = FeatureVector(small_catalog, [1, 5, 0, 3])
        with pytest.raises(ValueError):
            fvec.counts[1] = 7

    @pytest.mark.parametrize('counts', [[1, 2, 3],
                                        [1, 2, 3, 4, 5],
                                        [[1, 2], [3, 4]]])
    def test_wrong_length(self, small_catalog, counts):
        with pytest.raises(AlignmentError):
            FeatureVector(small_catalog, counts)

    def test_negative_count(self, small_catalog):
        with pytest.raises(NegativeCountError) as err:
            FeatureVector(small_catalog, [1, 2, -1, 0])
        assert 'b@0' in str(err.value)

    def test_non_integer_count(self, small_catalog):
        with pytest.raises(InvalidValueError):
            FeatureVector(small_catalog, [1, 2.5, 0, 0])

    @pytest.mark.parametrize('init', [0, 2])
    def test_init_feature_counted_once(self, small_catalog, init):
        with pytest.raises(InvalidValueError):
            FeatureVector(small_catalog, [init, 1, 1, 1])

        # Non-strict vectors accept any initialization count
        assert FeatureVector(small_catalog, [init, 1, 1, 1], strict=False)['E_O'] == init

    def test_add(self, small_catalog):
        total = FeatureVector(small_catalog, [1, 2, 3, 4]) + FeatureVector(small_catalog, [1, 1, 1, 1])
        np.testing.assert_array_equal(total.counts, [2, 3, 4, 5])

    def test_add_different_catalogs(self, small_catalog, fu_catalog):
        fu_counts = np.zeros(len(fu_catalog), dtype=np.int64)
        fu_counts[0] = 1
        with pytest.raises(AlignmentError):
            FeatureVector(small_catalog, [1, 0, 0, 0]) + FeatureVector(fu_catalog, fu_counts)

    def test_equality(self, small_catalog):
        assert FeatureVector(small_catalog, [1, 2, 3, 4]) == FeatureVector(small_catalog, [1, 2, 3, 4])
        assert FeatureVector(small_catalog, [1, 2, 3, 4]) != FeatureVector(small_catalog, [1, 2, 3, 5])

    def test_dict_conversion(self, small_catalog):
        fvec = FeatureVector.from_dict(small_catalog, {'E_O': 1, 'b@1': 9})
        assert fvec.to_dict() == {'E_O': 1, 'a': 0, 'b@0': 0, 'b@1': 9}

    def test_from_dict_unknown_leaf(self, small_catalog):
        with pytest.raises(AlignmentError):
            FeatureVector.from_dict(small_catalog, {'E_O': 1, 'c': 2})

    def test_str_lists_nonzero(self, small_catalog):
        assert str(FeatureVector(small_catalog, [1, 0, 0, 2])) == \
            "FeatureVector(custom, nonzero={'E_O': 1, 'b@1': 2})"
