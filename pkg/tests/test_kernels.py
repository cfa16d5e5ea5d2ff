import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import lcs, levenshtein

from felix import _kernels as K

ids = st.lists(st.integers(0, 4), max_size=10).map(lambda x: np.array(x, dtype=np.int64))
needs_numba = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba not installed")


@settings(max_examples=200, deadline=None)
@given(ids, ids)
def test_numpy_kernels_match_oracles(a, b):
    assert K.np_edit_distance(a, b) == levenshtein(a.tolist(), b.tolist())
    assert K.np_lcs_length(a, b) == lcs(a.tolist(), b.tolist())
    d, ins, dele, sub = K.np_edit_ops(a, b)
    assert d == ins + dele + sub
    assert len(a) - dele + ins == len(b)


@needs_numba
@settings(max_examples=200, deadline=None)
@given(ids, ids)
def test_numba_and_numpy_agree(a, b):
    assert K.nb_edit_distance(a, b) == K.np_edit_distance(a, b)
    assert np.array_equal(K.nb_edit_table(a, b), K.np_edit_table(a, b))
    assert K.nb_edit_ops(a, b) == K.np_edit_ops(a, b)
    assert np.array_equal(K.nb_lcs_table(a, b), K.np_lcs_table(a, b))
    assert K.nb_lcs_length(a, b) == K.np_lcs_length(a, b)
    assert tuple(K.nb_best_shift(a, b, 10)) == tuple(K.np_best_shift(a, b, 10))


def test_to_ids_shares_id_space():
    a, b = K.to_ids(["x", "y"], ["y", "z"])
    assert a[1] == b[0] and a.dtype == np.int64


def test_env_flag_selects_numpy_path():
    code = "from felix import _kernels as K; print(K.backend())"
    env = dict(os.environ, FELIX_NO_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
