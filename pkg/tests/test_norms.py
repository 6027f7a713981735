import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import dblquad, quad

from radop.errors import NotAllowable, UndecidableFiniteness
from radop.geometry import WeightSpec, ball, custom_domain, disk, hartogs_triangle, poly_annulus, polydisc
from radop.lattice import IndexBox, IndexSet, enumerate_allowable
from radop.norms import (BergmanSpace, DirichletSpace, HardySpace, MonomialNormTable, NormCache, build_norm_table,
                         coordinate_norm_sq, monomial_norm_sq, space_from_json)
from radop.quadrature import integrate_shadow

PI = math.pi


def test_disk_examples():
    sp = BergmanSpace(disk())
    assert monomial_norm_sq(sp, (0,)) == pytest.approx(PI, rel=1e-15)
    assert monomial_norm_sq(sp, (5,)) == pytest.approx(PI / 6, rel=1e-15)
    assert coordinate_norm_sq(sp, (0,)) == pytest.approx(1 / PI)
    assert coordinate_norm_sq(sp, (3,)) == pytest.approx(4 / PI)
    with pytest.raises(NotAllowable):
        monomial_norm_sq(sp, (-1,))


def test_hartogs_and_ball_examples():
    # independent oracle: 4 pi^2 * int_0^1 int_0^{r2} r1 r2^-1 dr1 dr2 = pi^2
    inner, _ = dblquad(lambda r1, r2: r1 / r2, 0, 1, 0, lambda r2: r2, epsabs=1e-14)
    assert monomial_norm_sq(BergmanSpace(hartogs_triangle()), (0, -1)) == pytest.approx(4 * PI**2 * inner, rel=1e-12)
    assert monomial_norm_sq(BergmanSpace(hartogs_triangle()), (0, -1)) == pytest.approx(PI**2, rel=1e-14)
    sp = BergmanSpace(ball(2))
    oracle = integrate_shadow(lambda r: 4 * PI**2 * r[:, 0] ** 3 * r[:, 1], ball(2), rel_tol=1e-13).value
    assert monomial_norm_sq(sp, (1, 0)) == pytest.approx(oracle, rel=1e-12)
    assert oracle == pytest.approx(PI**2 / 6, rel=1e-12)


def test_hardy_and_dirichlet():
    assert monomial_norm_sq(HardySpace(), (7,)) == 1.0
    assert coordinate_norm_sq(HardySpace(), (3,)) == 1.0
    assert monomial_norm_sq(DirichletSpace(), (4,)) == 4.0
    assert monomial_norm_sq(DirichletSpace(), (0,)) == 1.0
    with pytest.raises(NotAllowable):
        monomial_norm_sq(HardySpace(), (-1,))


def test_annulus_closed_form_including_log_case():
    sp = BergmanSpace(poly_annulus(1, 0.5, 1.0))
    assert monomial_norm_sq(sp, (-1,)) == pytest.approx(2 * PI * math.log(2), rel=1e-14)
    for m in (-3, 0, 2):
        oracle = 2 * PI * (1 - 0.5 ** (2 * m + 2)) / (2 * m + 2)
        assert monomial_norm_sq(sp, (m,)) == pytest.approx(oracle, rel=1e-13)


def test_radial_power_weight_matches_beta():
    s = 0.5
    sp = BergmanSpace(disk(WeightSpec("radial-power", exponents=(s,))))
    for m in range(4):
        # (1 - r^2)^s = (1 - r)^s (1 + r)^s; the endpoint factor goes into quad's algebraic weight
        oracle = 2 * PI * quad(lambda r: r ** (2 * m + 1) * (1 + r) ** s, 0, 1, weight="alg", wvar=(0, s),
                               epsabs=0, epsrel=1e-13)[0]
        assert monomial_norm_sq(sp, (m,)) == pytest.approx(oracle, rel=1e-9)


def test_constant_weight_scales():
    sp = BergmanSpace(polydisc(2, WeightSpec("constant", value=3.0)))
    assert monomial_norm_sq(sp, (1, 2)) == pytest.approx(3 * PI**2 / 6, rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 6), st.integers(-7, 6))
def test_hartogs_closed_form_vs_quadrature(a1, a2):
    sp = BergmanSpace(hartogs_triangle())
    if a1 + a2 < -1:
        assert not sp.is_allowable((a1, a2))
        return
    value, err, _ = sp.quadrature_norm_sq((a1, a2))
    assert value == pytest.approx(monomial_norm_sq(sp, (a1, a2)), rel=1e-9)


def test_custom_weight_uses_quadrature():
    w = WeightSpec("custom", func=lambda r: 1 + r[:, 0] ** 2)
    sp = BergmanSpace(disk(w))
    assert not sp.has_closed_form()
    assert enumerate_allowable(sp, IndexBox(1, 3)).members == ((0,), (1,), (2,), (3,))
    for m in range(4):
        oracle = 2 * PI * (1 / (2 * m + 2) + 1 / (2 * m + 4))
        assert monomial_norm_sq(sp, (m,)) == pytest.approx(oracle, rel=1e-10)


def test_numeric_finiteness_detects_log_divergence():
    sp = BergmanSpace(disk(WeightSpec("custom", func=lambda r: np.ones(len(r)))))
    assert sp.numeric_finite((0,))
    assert not sp.numeric_finite((-1,))
    assert not sp.numeric_finite((-3,))


def test_numeric_finiteness_undecidable_for_vanishing_integrand():
    sp = BergmanSpace(disk(WeightSpec("custom", func=lambda r: np.zeros(len(r)))))
    with pytest.raises(UndecidableFiniteness):
        sp.numeric_finite((0,))


def test_custom_shadow_matches_ball():
    quarter = custom_domain("quarter", lambda r: r[:, 0] ** 2 + r[:, 1] ** 2 < 1, (0, 0), (1, 1))
    sp = BergmanSpace(quarter, rel_tol=1e-3)
    assert set(enumerate_allowable(sp, IndexBox(2, 1))) == {(0, 0), (0, 1), (1, 0), (1, 1)}
    assert monomial_norm_sq(sp, (0, 0)) == pytest.approx(PI**2 / 2, rel=2e-3)


def test_norm_table_and_warm_cache(tmp_path):
    w = WeightSpec("custom", func=lambda r: 1 + r[:, 0] ** 2)
    cache = NormCache(tmp_path)
    idx = IndexSet.range(4)
    table = build_norm_table(BergmanSpace(disk(w)), idx, cache)
    assert table.evaluations > 0
    assert all(table.provenance[a][0] == "quadrature" for a in idx)
    warm = build_norm_table(BergmanSpace(disk(w)), idx, cache)
    assert warm.evaluations == 0
    assert warm.entries == table.entries


def test_closed_form_table_examples():
    t = build_norm_table(BergmanSpace(disk()), IndexSet.range(4))
    assert [t[(m,)] for m in range(4)] == pytest.approx([PI, PI / 2, PI / 3, PI / 4])
    t2 = build_norm_table(BergmanSpace(polydisc(2)), enumerate_allowable(BergmanSpace(polydisc(2)), IndexBox(2, 1)))
    for a in t2.entries:
        assert t2[a] == pytest.approx(PI**2 / ((a[0] + 1) * (a[1] + 1)))
        assert t2[a] * t2.coordinate_norm_sq(a) == pytest.approx(1.0)


def test_corrupt_cache_is_discarded(tmp_path):
    sp = BergmanSpace(disk())
    cache = NormCache(tmp_path)
    cache.path(sp.fingerprint).parent.mkdir(parents=True, exist_ok=True)
    cache.path(sp.fingerprint).write_text("{not json")
    assert len(cache.load(sp.fingerprint)) == 0
    other = MonomialNormTable("different", {(0,): 1.0})
    cache.path(sp.fingerprint).write_text(json.dumps(other.to_json()))
    assert len(cache.load(sp.fingerprint)) == 0
    assert cache.clear() == 1


def test_cache_env_var(monkeypatch, tmp_path):
    monkeypatch.setenv("RADOP_CACHE_DIR", str(tmp_path / "x"))
    assert NormCache().directory == tmp_path / "x"


def test_fingerprint_and_json():
    a = BergmanSpace(ball(2))
    b = space_from_json(json.loads(json.dumps(a.to_json())))
    assert a.fingerprint == b.fingerprint
    assert BergmanSpace(ball(3)).fingerprint != a.fingerprint
    assert isinstance(space_from_json({"kind": "hardy-disk"}), HardySpace)
