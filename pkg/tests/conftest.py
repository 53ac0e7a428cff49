import os
import shutil

import pytest

from pyDecEnergy.catalog.FeatureCatalog import build_catalog


@pytest.fixture
def datadir(tmp_path, request):
    """
    Fixture responsible for searching a folder with the same name of test
    module and, if available, copying all contents to a temporary directory so
    tests can use them freely.
    """
    filename = request.module.__file__
    test_dir, _ = os.path.splitext(filename)

    if os.path.isdir(test_dir):
        shutil.copytree(test_dir, tmp_path, dirs_exist_ok=True)

    return tmp_path


@pytest.fixture(scope='session')
def fu_catalog():
    return build_catalog('FU')


@pytest.fixture(scope='session')
def fa_catalog():
    return build_catalog('FA')
