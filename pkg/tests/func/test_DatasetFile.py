import pytest
import numpy as np

from pyDecEnergy.dataset.DatasetFile import (ENERGIES_FILE, FEATURES_FILE, MANIFEST_FILE, load_dataset,
                                             read_dataset, write_dataset)
from pyDecEnergy.dataset.EnergyDataset import EnergyDataset
from pyDecEnergy.dataset.SetupManifest import SetupManifest
from pyDecEnergy.Exceptions_custom import (DatasetError, DuplicateIdError, EmptyDatasetError, InvalidValueError,
                                           MissingEnergyError, MissingFeatureError, NegativeCountError,
                                           OrphanEnergyError, UnknownFeatureError)
from pyDecEnergy.measurement.SyntheticCorpus import CorpusSpec, generate_synthetic_corpus


@pytest.fixture(scope='class')
def corpus(fu_catalog):
    data, _ = generate_synthetic_corpus(fu_catalog, CorpusSpec(name='Conventional8', records=20, noise=0.01,
                                                               seed=11))
    return data


@pytest.fixture
def written(corpus, tmp_path):
    """Directory with a valid dataset"""
    outdir = tmp_path / 'conv8'
    write_dataset(corpus, outdir)
    return outdir


def load_dir(path):
    return load_dataset(path / FEATURES_FILE, path / ENERGIES_FILE, path / MANIFEST_FILE)


def rewrite(filename, func):
    lines = filename.read_text().splitlines()
    filename.write_text('\n'.join(func(lines)) + '\n')


def set_cell(line, col, value):
    flds = line.split(',')
    flds[col] = value
    return ','.join(flds)


class TestDatasetFile:

    def test_directory_round_trip(self, corpus, written):
        data = load_dir(written)
        assert data.name == 'Conventional8'
        assert data.ids == corpus.ids
        np.testing.assert_array_equal(data.counts, corpus.counts)
        np.testing.assert_array_equal(data.energies, corpus.energies)
        assert data.record_count_matches
        assert list(data.meta['qp']) == list(corpus.meta['qp'])
        assert list(data.meta['sequence']) == list(corpus.meta['sequence'])

    def test_netcdf_round_trip(self, corpus, tmp_path):
        outfile = tmp_path / 'conv8.nc'
        write_dataset(corpus, outfile)
        data = read_dataset(outfile)

        assert data.name == corpus.name
        assert data.ids == corpus.ids
        np.testing.assert_array_equal(data.counts, corpus.counts)
        np.testing.assert_array_equal(data.energies, corpus.energies)
        assert list(data.meta['config']) == list(corpus.meta['config'])
        assert data.meta['frames'].isna().all()

    def test_read_dataset_missing(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_dataset(tmp_path / 'nothing')

    def test_record_count_mismatch(self, written, capsys):
        SetupManifest(name='Conventional8', records=21, bit_depth=8).write(written / MANIFEST_FILE)
        data = load_dir(written)
        assert data.record_count_matches is False
        assert 'WARNING' in capsys.readouterr().out

    def test_minimal_energies(self, written):
        # Metadata columns are optional
        rewrite(written / ENERGIES_FILE, lambda lines: [','.join(ll.split(',')[:2]) for ll in lines])
        data = load_dir(written)
        assert data.meta['qp'].isna().all()
        assert list(data.meta['sequence']) == data.ids
        assert data.bit_depth == 8

    def test_empty(self, written):
        rewrite(written / FEATURES_FILE, lambda lines: lines[:1])
        with pytest.raises(EmptyDatasetError):
            load_dir(written)

    def test_unknown_feature(self, written):
        rewrite(written / FEATURES_FILE, lambda lines: [set_cell(lines[0], 5, 'bogus')] + lines[1:])
        with pytest.raises(UnknownFeatureError) as err:
            load_dir(written)
        assert 'bogus' in str(err.value)

    def test_missing_feature(self, written):
        rewrite(written / FEATURES_FILE, lambda lines: [','.join(ll.split(',')[:-1]) for ll in lines])
        with pytest.raises(MissingFeatureError) as err:
            load_dir(written)
        assert 'SAO_allComps' in str(err.value)

    def test_out_of_order(self, written):
        def swap(lines):
            out = []
            for ll in lines:
                flds = ll.split(',')
                flds[2], flds[3] = flds[3], flds[2]
                out.append(','.join(flds))
            return out

        rewrite(written / FEATURES_FILE, swap)
        with pytest.raises(MissingFeatureError):
            load_dir(written)

    def test_negative_count(self, written):
        rewrite(written / FEATURES_FILE, lambda lines: lines[:3] + [set_cell(lines[3], 4, '-5')] + lines[4:])
        with pytest.raises(NegativeCountError) as err:
            load_dir(written)
        assert lines_id(written, 3) in str(err.value)

    @pytest.mark.parametrize('value', ['abc', '2.5', '9223372036854775808', '1e30', 'nan'])
    def test_invalid_count(self, written, value):
        rewrite(written / FEATURES_FILE, lambda lines: lines[:2] + [set_cell(lines[2], 4, value)] + lines[3:])
        with pytest.raises(InvalidValueError):
            load_dir(written)

    @pytest.mark.parametrize('value, expected', [('9007199254740993', 2 ** 53 + 1),
                                                 ('9223372036854775807', 2 ** 63 - 1),
                                                 ('12.0', 12)])
    def test_large_count(self, written, value, expected):
        leaf = (written / FEATURES_FILE).read_text().splitlines()[0].split(',')[4]
        rewrite(written / FEATURES_FILE, lambda lines: lines[:2] + [set_cell(lines[2], 4, value)] + lines[3:])
        data = load_dir(written)
        rr = data.ids.index(lines_id(written, 2))
        assert int(data.counts[rr, data.catalog.position(leaf)]) == expected

    def test_quoted_metadata(self, corpus, tmp_path):
        meta = corpus.meta
        meta.loc[0, 'sequence'] = 'Park,Scene'
        meta.loc[1, 'sequence'] = 'say "hi"'
        data = EnergyDataset(corpus.name, corpus.catalog, meta, corpus.counts, corpus.energies,
                             manifest=corpus.manifest)
        write_dataset(data, tmp_path / 'quoted')

        loaded = load_dir(tmp_path / 'quoted')
        assert loaded.ids == data.ids
        assert list(loaded.meta['sequence']) == list(data.meta['sequence'])
        assert 'Park,Scene' in list(loaded.meta['sequence'])

    def test_duplicate_id(self, written):
        rewrite(written / FEATURES_FILE, lambda lines: lines + [lines[1]])
        with pytest.raises(DuplicateIdError):
            load_dir(written)

    def test_missing_energy(self, written):
        rewrite(written / ENERGIES_FILE, lambda lines: lines[:-1])
        with pytest.raises(MissingEnergyError):
            load_dir(written)

    def test_orphan_energy(self, written):
        rewrite(written / ENERGIES_FILE, lambda lines: lines + [set_cell(lines[1], 0, 'orphan')])
        with pytest.raises(OrphanEnergyError):
            load_dir(written)

    @pytest.mark.parametrize('col, value', [(1, '0'),
                                            (1, '-1.5'),
                                            (1, 'x'),
                                            (4, '23'),
                                            (5, 'fast'),
                                            (6, '12')])
    def test_invalid_energy_row(self, written, col, value):
        rewrite(written / ENERGIES_FILE, lambda lines: lines[:1] + [set_cell(lines[1], col, value)] + lines[2:])
        with pytest.raises(InvalidValueError):
            load_dir(written)

    def test_bad_energy_header(self, written):
        rewrite(written / ENERGIES_FILE, lambda lines: [lines[0].replace('energy_joules', 'energy')] + lines[1:])
        with pytest.raises(DatasetError):
            load_dir(written)

    def test_bad_manifest(self, written):
        (written / MANIFEST_FILE).write_text('name = "x"\nrecords = 20\nbit_depth = 9\n')
        with pytest.raises(DatasetError):
            load_dir(written)


def lines_id(path, row):
    return (path / FEATURES_FILE).read_text().splitlines()[row].split(',')[0]


class TestSetupManifest:

    def test_from_setup(self):
        man = SetupManifest.from_setup('Fisheye')
        assert man.bit_depth == 8
        assert man.format == 'Fisheye'
        assert man.variant == 'FU'

    def test_from_unknown_setup(self):
        with pytest.raises(DatasetError):
            SetupManifest.from_setup('HDR12')

    def test_toml_round_trip(self, tmp_path):
        man = SetupManifest(name='HDR10', records=3, bit_depth=10, source='lab "B"', format='HDR')
        man.write(tmp_path / 'm.toml')
        assert SetupManifest.read(tmp_path / 'm.toml') == man

    def test_unknown_key(self, tmp_path):
        (tmp_path / 'm.toml').write_text('name = "x"\nrecords = 1\nbit_depth = 8\ncolour = "red"\n')
        with pytest.raises(DatasetError):
            SetupManifest.read(tmp_path / 'm.toml')

    def test_control_characters(self, tmp_path):
        man = SetupManifest(name='HDR10', records=3, bit_depth=10, source='lab\nbench\t2 \x01 "B" \\ end')
        man.write(tmp_path / 'm.toml')
        assert SetupManifest.read(tmp_path / 'm.toml') == man
