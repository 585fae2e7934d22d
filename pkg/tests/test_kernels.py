"""The compiled kernels and their pure-Python twins must agree."""

import math
import os
import runpy
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pbts import _kernels
from pbts._kernels import _pykernels as py

try:
    from pbts._kernels import _ckernels as cy
except ImportError:  # extension not built
    cy = None

needs_ext = pytest.mark.skipif(cy is None, reason="compiled kernels not built")

finite = st.floats(-1e4, 1e4, allow_nan=False)
angles = st.floats(-720, 720, allow_nan=False)
pose6 = st.tuples(finite, finite, finite, angles, angles, angles)


def test_backend_selected():
    forced = os.environ.get("PBTS_PURE_PYTHON", "") not in ("", "0")
    expected = "python" if forced or cy is None else "cython"
    assert _kernels.BACKEND == expected


@needs_ext
@given(st.floats(-1e9, 1e9, allow_nan=False))
def test_wrap(a):
    assert cy.wrap_deg(a) == py.wrap_deg(a)
    assert -180.0 < py.wrap_deg(a) <= 180.0


@needs_ext
@given(angles, angles, angles)
def test_euler_round_trip_agrees(a, b, g):
    rc, rp = cy.euler_to_rot(a, b, g), py.euler_to_rot(a, b, g)
    np.testing.assert_allclose(rc, rp, atol=1e-15, rtol=0)
    ec, ep = cy.rot_to_euler(rc), py.rot_to_euler(rp)
    np.testing.assert_allclose(ec, ep, atol=1e-9, rtol=0)


@needs_ext
@given(pose6, pose6)
def test_group_ops_agree(p, q):
    for name in ("compose", "relative"):
        a = getattr(cy, name)(p, q)
        b = getattr(py, name)(p, q)
        np.testing.assert_allclose(a[:3], b[:3], atol=1e-9, rtol=1e-12)
        for u, v in zip(a[3:], b[3:]):
            assert abs(math.remainder(u - v, 360.0)) < 1e-8
    a, b = cy.inverse(p), py.inverse(p)
    np.testing.assert_allclose(a[:3], b[:3], atol=1e-9, rtol=1e-12)


@needs_ext
@pytest.mark.parametrize("kind,c0,c1", [(0, 120.0, 0.0), (1, 10.0, 80.0)])
def test_projection_agrees(kind, c0, c1):
    rng = np.random.default_rng(7)
    for p in rng.uniform((-60, -60, -20), (60, 60, 20), size=(200, 3)):
        a = cy.project_heightfield(kind, c0, c1, *p, 9, 1e-12, 100)
        b = py.project_heightfield(kind, c0, c1, *p, 9, 1e-12, 100)
        np.testing.assert_allclose(a[:2], b[:2], atol=1e-9)
        assert a[2] >= 0 and b[2] >= 0


@needs_ext
@given(st.floats(-100, 100), st.floats(-100, 100))
def test_height_agrees(u, v):
    for kind, c0, c1 in ((0, 120.0, 0.0), (1, 10.0, 80.0)):
        np.testing.assert_allclose(cy.height(kind, c0, c1, u, v), py.height(kind, c0, c1, u, v),
                                   atol=1e-12, rtol=1e-12)


def test_benchmark_smoke(capsys):
    path = Path(__file__).resolve().parent.parent / "benchmarks" / "bench_kernels.py"
    ns = runpy.run_path(str(path))
    ns["main"](["--repeat", "1", "--number", "20", "--servo-reps", "1"])
    out = capsys.readouterr().out
    assert "compose" in out and "servo run" in out
