import math

import pytest

import parabest


def test_presets():
    names = parabest.preset_names()
    assert set(names) == {"1", "2", "3a", "3b", "4"}
    p = parabest.preset("2")
    assert p["problem"] == "fast"
    assert p["tau0"] == 0.01
    with pytest.raises(ValueError):
        parabest.preset("9")


def test_eoc():
    assert parabest.eoc([1.0, 0.25], [1.0, 0.5]) == pytest.approx([2.0])
    with pytest.raises(ValueError):
        parabest.eoc([1.0, 0.0], [1.0, 0.5])


def test_mesh_operations():
    m = parabest.macro_square(2)
    assert m.element_count == 8
    fine = m.refine(1)
    assert fine.element_count == 32
    assert fine.refines(m)
    assert max(fine.meshsize()) == pytest.approx(max(m.meshsize()) / 2)
    local = m.bisect([0])
    assert parabest.common_refinement(m, local) == local
    assert parabest.common_coarsening(m, local) == m
    assert len(local.elements()) == local.element_count
    other = parabest.macro_square(2)
    with pytest.raises(parabest.IncompatibleMeshes):
        parabest.common_refinement(m, other)


def test_short_study():
    out = parabest.run_preset("1", {"runs": 2}, rows=True)
    assert len(out["runs"]) == 2
    first = out["runs"][0]
    assert first["steps"] == 25
    assert first["max_pointwise_defect"] < 1e-10
    assert first["total_32"] > first["err_LinfL2"]
    assert math.isfinite(out["eoc"]["err_LinfL2"][0])
    rows = parabest.parse_rows(out["rows_csv"])
    assert len(rows["err_LinfL2"]) == 125
    with pytest.raises(ValueError):
        parabest.run_preset("1", {"colour": 1})


def test_checks():
    results = parabest.run_checks()
    assert results
    assert all(r["passed"] for r in results), [r for r in results if not r["passed"]]
