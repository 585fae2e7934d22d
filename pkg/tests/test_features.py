import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pbts.features import (
    EDGE,
    SURFACE,
    ReferenceSpec,
    default_reference,
    feature_from_name,
    project_predictable,
    surface_step,
    validate_reference,
)
from pbts.perception import PoseRanges
from pbts.pose import IDENTITY, Pose

poses = st.builds(Pose, *[st.floats(-100, 100)] * 3, *[st.floats(-180, 180)] * 3)


def test_masks():
    assert SURFACE.predictable == ("z", "alpha", "beta")
    assert EDGE.predictable == ("x", "z", "alpha", "beta", "gamma")
    for f in (SURFACE, EDGE):
        assert all(a != b for a, b in zip(f.predictable_mask, f.invariant_mask))
        assert set(f.predictable) | set(f.invariant) == {"x", "y", "z", "alpha", "beta", "gamma"}
    assert feature_from_name("Edge") is EDGE
    with pytest.raises(ValueError):
        feature_from_name("corner")


def test_project_predictable_examples():
    p = Pose(1, 2, -3, 5, -5, 10)
    assert project_predictable(SURFACE, p) == Pose(0, 0, -3, 5, -5, 0)
    assert project_predictable(EDGE, p) == Pose(1, 0, -3, 5, -5, 10)
    assert project_predictable(SURFACE, IDENTITY) == IDENTITY
    assert project_predictable(EDGE, IDENTITY) == IDENTITY


@given(poses)
def test_projection_idempotent_and_zeroing(p):
    for f in (SURFACE, EDGE):
        q = project_predictable(f, p)
        assert project_predictable(f, q) == q
    s = project_predictable(SURFACE, p)
    assert s.x == s.y == s.gamma == 0.0
    assert project_predictable(EDGE, p).y == 0.0


def test_default_reference_examples():
    for phi in range(0, 360, 45):
        sx, sy = surface_step(phi)
        ref = default_reference(SURFACE, (sx, sy), -3.0)
        assert ref.pose.isclose(Pose(math.cos(math.radians(phi)), math.sin(math.radians(phi)), -3))
        assert ref.feature is SURFACE
    assert default_reference(EDGE, 1.0, -3.0).pose == Pose(0, 1, -3)
    assert default_reference(SURFACE, (0, 0), -3.0).pose == Pose(0, 0, -3)


def test_default_reference_rejects():
    with pytest.raises(ValueError, match="depth"):
        default_reference(SURFACE, 1.0, -8.0)
    with pytest.raises(ValueError, match="step"):
        default_reference(EDGE, 3.0, -3.0)
    with pytest.raises(ValueError):
        default_reference(EDGE, (1.0, 0.0), -3.0)


@given(st.floats(-5, -1))
def test_default_reference_is_valid(depth):
    for f in (SURFACE, EDGE):
        assert validate_reference(default_reference(f, 1.0, depth), PoseRanges()) == []


def test_validate_reference_examples():
    r = PoseRanges()
    assert validate_reference(ReferenceSpec(Pose(1, 0, -3), SURFACE), r) == []
    bad = validate_reference(ReferenceSpec(Pose(1, 0, -8), SURFACE), r)
    assert len(bad) == 1 and bad[0].startswith("z=")
    bad = validate_reference(ReferenceSpec(Pose(0, 1, -3, 0, 0, 50), EDGE), r)
    assert len(bad) == 1 and bad[0].startswith("gamma=")


def test_validate_reports_each_component():
    bad = validate_reference(ReferenceSpec(Pose(9, 0, 0, 20, -20, 60), EDGE), PoseRanges())
    assert [b.split("=")[0] for b in bad] == ["x", "z", "alpha", "beta", "gamma"]
