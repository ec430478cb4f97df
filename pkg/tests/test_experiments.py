import json
import math

import pytest
from hypothesis import given, strategies as st

from l2lab.config import ConfigError, config_from_mapping
from l2lab.experiments import (ConvergenceRow, Table, format_value, render_csv,
                               run_betti_convergence, run_euler, run_heat_convergence,
                               run_ids, run_nfb, run_ns_fit, run_validate, run_zeta,
                               write_result)


def cfg(**kw):
    return config_from_mapping(kw)


def rows(res, **match):
    return [r for r in res.table.rows if all(r[k] == v for k, v in match.items())]


finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(finite, finite)
def test_row_gap(normalized, oracle):
    row = ConvergenceRow(4, 16, "relative", 0, normalized, oracle)
    assert row.gap == abs(normalized - oracle)
    assert ConvergenceRow(4, 16, "relative", 0, normalized).gap is None


def test_csv_format():
    t = Table(["a", "b", "c"], [{"a": 1, "b": math.pi, "c": None}, {"a": True, "b": 1e-20}])
    text = render_csv(t, "heat", "abc123")
    lines = text.splitlines()
    assert lines[0] == "# l2lab-csv/1 experiment=heat config=abc123"
    assert lines[2] == "1,3.14159265359,"
    assert lines[3] == "1,1e-20,"
    assert format_value(0.1 + 0.2) == "0.3"


def test_betti_torus():
    res = run_betti_convergence(cfg(complex="torus2_Z2", ladder=[2, 4, 8]))
    assert res.ok
    for r in res.table.rows:
        assert r["normalized"] <= 4 / r["L"]
        assert r["oracle"] == 0.0
    b1 = [r["normalized"] for r in rows(res, condition="absolute", degree=0)]
    assert b1 == [1 / 4, 1 / 16, 1 / 64]


def test_betti_wedge_negative_control():
    res = run_betti_convergence(cfg(complex="wedge2_F2", ladder=[1, 2, 3, 4, 5]))
    assert res.ok
    names = [c.name for c in res.checks if c.hard]
    assert any("persistent gap" in n for n in names)
    assert any("Cheeger" in n for n in names)
    for r in rows(res, condition="absolute", degree=1):
        assert r["betti"] == 0 and r["gap"] == 1.0 and r["oracle_method"] == "euler"


def test_betti_surface_from_below():
    res = run_betti_convergence(cfg(complex="surface_genus(2)_Z4", ladder=[2, 3], degrees=[1]))
    ab = [r["normalized"] for r in rows(res, condition="absolute")]
    assert ab[0] < ab[1] < 2


def test_heat_small_t_and_envelope():
    res = run_heat_convergence(cfg(complex="torus2_Z2", ladder=[2, 4], t_grid=[1e-6, 1.0],
                                   conditions=["relative"]))
    assert res.ok
    for r in rows(res, t=1e-6):
        assert r["normalized"] == pytest.approx((1, 2, 1)[r["degree"]], abs=1e-5)
    env = res.extra["envelope"].rows
    assert {(e["degree"], e["t"]) for e in env} == {(j, t) for j in range(3) for t in (1e-6, 1.0)}
    assert any("cannot certify" in n for n in res.notes)


def test_heat_oracle_free_heisenberg():
    res = run_heat_convergence(cfg(complex="heisenberg_manifold", ladder=[2], t_grid=[1.0]))
    assert res.ok
    assert all(r["oracle"] is None for r in res.table.rows)
    assert any("oracle-free" in n for n in res.notes)


def test_ids_zero_row_is_betti():
    c = cfg(complex="torus2_Z2", ladder=[2, 4], lambda_grid=[0.0, 1.0])
    res = run_ids(c)
    betti = run_betti_convergence(c)
    for r in rows(res, **{"lambda": 0.0}):
        for cond in ("relative", "absolute"):
            b, = rows(betti, L=r["L"], condition=cond, degree=r["degree"])
            assert r[cond] == b["normalized"]
    assert res.ok


def test_ids_circle_half():
    res = run_ids(cfg(complex="circle_Z", ladder=[64], lambda_grid=[2.0], degrees=[0]))
    r, = res.table.rows
    assert r["oracle"] == pytest.approx(0.5)
    assert r["relative"] == pytest.approx(0.5, abs=0.02)
    assert r["absolute"] == pytest.approx(0.5, abs=0.02)


def test_nfb_circle():
    res = run_nfb(cfg(complex="circle_Z", ladder=[41], t_grid=[0.5, 1.0, 2.0]))
    assert res.ok
    fit = res.report["fits"]["L=41 relative"]
    assert fit["slope"] < 0 and fit["r2"] >= 0.9
    centre = [r for r in res.extra["centre"].rows if r["t"] == 1.0]
    assert all(r["centre_diff"] <= 1e-6 for r in centre)


def test_nfb_rejects_non_lattice():
    with pytest.raises(ConfigError):
        run_nfb(cfg(complex="heisenberg_manifold", ladder=[2]))
    with pytest.raises(ConfigError):
        run_nfb(cfg(complex="wedge2_F2", ladder=[3]))


def test_nfb_too_few_points_is_hard_failure():
    res = run_nfb(cfg(complex="circle_Z", ladder=[3], t_grid=[1.0], conditions=["relative"]))
    assert not res.ok
    assert "suggestion" in res.report["fits"]["L=3 relative"]


def test_zeta():
    res = run_zeta(cfg(complex="circle_Z", ladder=[16, 32], s_samples=[0.0, 2.0], degrees=[0]))
    assert any("s=0.0 excluded" in n for n in res.notes)
    assert {r["s"] for r in res.table.rows} == {2.0}
    assert all(r["oracle"] == pytest.approx(3 * 5 ** -1.5) for r in res.table.rows)
    assert len(res.extra["uniformity"].rows) == 4
    with pytest.raises(ConfigError):
        run_zeta(cfg(complex="heisenberg_manifold", ladder=[2]))


def test_euler():
    res = run_euler(cfg(complex="torus2_Z2", ladder=[2, 4], t_grid=[0.1, 1.0, 10.0]))
    assert res.ok
    for r in rows(res, condition="relative"):
        assert r["chi_section"] == 0 and r["normalized"] == 0.0
    res = run_euler(cfg(complex="surface_genus(2)_Z4", ladder=[2], t_grid=[1.0]))
    for r in res.table.rows:
        assert abs(r["normalized"] + 2) <= 8 / r["L"]


def test_nsfit():
    res = run_ns_fit(cfg(complex="circle_Z", ladder=[64], degrees=[0]))
    oracle, = rows(res, source="oracle")
    assert oracle["beta"] == pytest.approx(0.5, abs=0.15)
    res = run_ns_fit(cfg(complex="torus2_Z2", ladder=[8], degrees=[0], conditions=["relative"]))
    oracle, = rows(res, source="oracle")
    assert oracle["beta"] == pytest.approx(1.0, abs=0.15)
    assert any("widened" in n for n in res.notes)


def test_validate():
    res = run_validate(cfg(complex="heisenberg_manifold", ladder=[2]))
    assert res.ok and len(res.table.rows) == 2


def test_threads_and_reruns_are_byte_identical(tmp_path):
    c = cfg(complex="torus2_Z2", ladder=[2, 4, 6], t_grid=[0.5, 1.0])
    digest = c.digest
    paths1 = write_result(run_heat_convergence(c, threads=1), tmp_path / "a", digest)
    paths4 = write_result(run_heat_convergence(c, threads=4), tmp_path / "b", digest)
    for p, q in zip(paths1, paths4):
        assert p.read_bytes() == q.read_bytes()
    report = json.loads((tmp_path / "a" / "heat_report.json").read_text())
    assert report["config"] == digest and report["checks"]
