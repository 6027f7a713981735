import json
import math

import numpy as np
import pytest

from radop.errors import NotAllowable, NotUnimodular, OutsideDomain, OutsideTildeDomain, PreconditionError
from radop.geometry import ball, disk, hartogs_triangle, poly_annulus, polydisc
from radop.lattice import IndexBox, IndexSet, enumerate_allowable
from radop.norms import BergmanSpace, HardySpace
from radop.operators import (LaurentPoly, RadialOperator, adjoint, adjoint_residual, analysis_transform,
                             apply_diagonal, apply_integral, convex_hull, feasibility_probe, gstar_eval,
                             hull_contains, inducing_function_eval, is_compact, is_finite_rank, normality_residual,
                             projection_laws_hold, radiality_residual, reducing_projection, rotation_apply,
                             spectrum_report, synthesis_transform)
from radop.symbols import (ClosedFormSymbol, FiniteSymbol, NO_DECAY, VANISHING, constant, geometric, indicator, one,
                           reciprocal_succ, scale)

PI = math.pi
DISK = BergmanSpace(disk())


def test_laurent_poly_basics():
    f = LaurentPoly.from_sequence([1, 2, 0, 3])
    assert f.support == ((0,), (1,), (3,))
    assert f.degree() == 3
    assert f.evaluate([0.5]) == pytest.approx(1 + 1 + 3 / 8)
    assert f.derivative().coeffs == {(0,): 2, (2,): 9}
    back = LaurentPoly.from_json(json.dumps(f.to_json()))
    assert back.max_abs_diff(f) == 0


def test_analysis_examples():
    box = IndexSet.range(4)
    beta = LaurentPoly.monomial((2,))
    seq = analysis_transform(DISK, beta, box)
    np.testing.assert_allclose(seq, [0, 0, math.sqrt(PI / 3), 0], rtol=1e-15)
    assert np.all(analysis_transform(DISK, LaurentPoly(1, {}), box) == 0)
    seq = analysis_transform(DISK, LaurentPoly.from_sequence([1, 2]), IndexSet.range(2))
    np.testing.assert_allclose(seq, [math.sqrt(PI), 2 * math.sqrt(PI / 2)], rtol=1e-15)


def test_analysis_quadrature_mode_matches_exact():
    f = LaurentPoly.from_sequence([1, 2 - 1j, 0.5j])
    box = IndexSet.range(4)
    np.testing.assert_allclose(analysis_transform(DISK, f, box, method="quadrature"),
                               analysis_transform(DISK, f, box), atol=1e-12)


def test_analysis_rejects_non_allowable():
    with pytest.raises(NotAllowable):
        analysis_transform(DISK, LaurentPoly.monomial((-1,)), IndexSet.range(3))


def test_synthesis_examples():
    f = LaurentPoly(1, {(0,): 3, (2,): -1j})
    box = IndexSet.range(3)
    assert synthesis_transform(DISK, analysis_transform(DISK, f, box), box).max_abs_diff(f) < 1e-15
    unit = synthesis_transform(DISK, [0, 1, 0], box)
    assert unit.coeff((1,)) == pytest.approx(1 / math.sqrt(PI / 2), rel=1e-15)
    assert synthesis_transform(DISK, [0, 0, 0], box).coeffs == {}


def test_apply_diagonal_examples():
    f = LaurentPoly.from_sequence([1, 1, 1])
    assert apply_diagonal(RadialOperator(DISK, one()), f).max_abs_diff(f) == 0
    assert apply_diagonal(RadialOperator(DISK, reciprocal_succ()), LaurentPoly.monomial((1,))).coeffs == {(1,): 0.5}
    assert apply_diagonal(RadialOperator(DISK, indicator([2])), f).coeffs == {(2,): 1}


def test_inducing_function_examples():
    assert inducing_function_eval(RadialOperator(DISK, one()), [0.0]) == pytest.approx(1 / PI, rel=1e-12)
    assert inducing_function_eval(RadialOperator(DISK, one()), [0.5]) == pytest.approx(4 / PI, rel=1e-12)
    assert inducing_function_eval(RadialOperator(HardySpace(), one()), [0.5]) == pytest.approx(2, rel=1e-12)


def test_inducing_function_matches_closed_kernels():
    # Bergman kernel of the ball in C^2 on the diagonal: 2 / (pi^2 (1 - <z,w>)^3)
    R = RadialOperator(BergmanSpace(ball(2)), one(2))
    zeta = np.array([0.3, 0.2j])
    s = zeta.sum()
    assert inducing_function_eval(R, zeta) == pytest.approx(2 / (PI**2 * (1 - s) ** 3), rel=1e-10)
    R = RadialOperator(BergmanSpace(polydisc(2)), one(2))
    assert inducing_function_eval(R, [0.3, -0.4]) == pytest.approx(1 / (PI**2 * 0.7**2 * 1.4**2), rel=1e-10)


def test_inducing_function_outside_tilde_domain():
    with pytest.raises(OutsideTildeDomain):
        inducing_function_eval(RadialOperator(DISK, one()), [1.2])


def test_apply_integral_examples():
    R = RadialOperator(DISK, one())
    assert apply_integral(R, LaurentPoly.monomial((2,)), [0.3]) == pytest.approx(0.09, abs=1e-6)
    R = RadialOperator(DISK, reciprocal_succ())
    assert apply_integral(R, LaurentPoly.monomial((1,)), [0.4]) == pytest.approx(0.2, abs=1e-6)
    R = RadialOperator(DISK, indicator([0]))
    f = LaurentPoly.from_sequence([2, 1])
    for z in (0.1, -0.5j, 0.7 + 0.2j):
        assert apply_integral(R, f, [z]) == pytest.approx(2, abs=1e-6)


def test_apply_integral_annulus_and_hartogs():
    for space, f, z in ((BergmanSpace(poly_annulus(1)), LaurentPoly(1, {(-2,): 1, (1,): 0.5j}), [0.7]),
                        (BergmanSpace(hartogs_triangle()), LaurentPoly(2, {(0, -1): 1, (1, 1): 2}), [0.2, 0.5])):
        R = RadialOperator(space, reciprocal_succ(space.dim))
        assert abs(apply_integral(R, f, z) - apply_diagonal(R, f).evaluate(z)) < 1e-5


def test_apply_integral_outside_domain():
    with pytest.raises(OutsideDomain):
        apply_integral(RadialOperator(DISK, one()), LaurentPoly.monomial((1,)), [1.1])


def test_rotation_examples():
    f = LaurentPoly(2, {(1, 0): 1, (2, 3): 2j})
    assert rotation_apply([1, 1], f).max_abs_diff(f) == 0
    assert rotation_apply([1j], LaurentPoly.monomial((2,))).coeff((2,)) == pytest.approx(-1)
    lam = np.exp(1j * np.array([0.3, 1.1]))
    g = rotation_apply(lam, LaurentPoly.monomial((2, -1)))
    assert g.coeff((2, -1)) == pytest.approx(lam[0] ** 2 / lam[1], rel=1e-15)
    with pytest.raises(NotUnimodular):
        rotation_apply([1.01], LaurentPoly.monomial((1,)))


def test_radiality_residual_examples():
    R = RadialOperator(DISK, reciprocal_succ())
    assert radiality_residual(R, 100, seed=3) < 1e-12

    def shift(f):
        # e_0 -> e_1, not radial
        return LaurentPoly(1, {(1,): f.coeff((0,))})

    assert radiality_residual(shift, 20, seed=0, support=IndexSet(1, [(0,)])) > 0.1
    with pytest.raises(PreconditionError):
        radiality_residual(R, 0)


def test_adjoint_examples():
    real = RadialOperator(DISK, reciprocal_succ())
    probe = IndexSet.range(20).array()
    np.testing.assert_array_equal(adjoint(real).symbol.values(probe), real.symbol.values(probe))
    assert adjoint(RadialOperator(DISK, constant(1j))).symbol(4) == -1j
    R = RadialOperator(DISK, scale(1j, reciprocal_succ()))
    assert abs(inducing_function_eval(adjoint(R), [0.3]) - gstar_eval(R, [0.3])) < 1e-8
    assert adjoint_residual(R, [[0.3], [0.2 + 0.5j]]) < 1e-8


def test_spectrum_reciprocal_succ():
    rep = spectrum_report(RadialOperator(DISK, reciprocal_succ()), IndexSet.range(101))
    np.testing.assert_array_equal(rep.values, 1 / (np.arange(101) + 1))
    assert rep.attained.all()
    assert any(abs(p) < 1e-6 for p in rep.limit_points)
    assert all(hull_contains(rep.hull, v) for v in rep.values)


def test_spectrum_constant_and_square():
    rep = spectrum_report(RadialOperator(DISK, constant(0.5 + 0.5j)), IndexSet.range(30))
    assert rep.hull == [0.5 + 0.5j]
    rep = spectrum_report(RadialOperator(DISK, geometric(1j)), IndexSet.range(40))
    assert len(rep.hull) == 4
    for v in (1, 1j, -1, -1j):
        assert min(abs(h - v) for h in rep.hull) < 1e-12
    assert all(hull_contains(rep.hull, v) for v in rep.values)


def test_spectrum_json_is_counterclockwise():
    rep = spectrum_report(RadialOperator(DISK, geometric(1j)), IndexSet.range(8))
    hull = [complex(*v) for v in rep.to_json()["hull"]]
    area = sum((a.conjugate() * b).imag for a, b in zip(hull, hull[1:] + hull[:1]))
    assert area > 0


def test_convex_hull_degenerate():
    assert convex_hull([1, 1, 1]) == [1]
    assert convex_hull([0, 0.5, 1]) == [0, 1]
    assert len(convex_hull([0, 1, 1j, 1 + 1j, 0.5 + 0.5j])) == 4


def test_compactness_examples():
    fin = RadialOperator(DISK, FiniteSymbol(1, {0: 1, 3: 2}))
    assert is_finite_rank(fin) is True and is_compact(fin) is True
    rs = RadialOperator(DISK, reciprocal_succ())
    assert is_compact(rs) is True and is_finite_rank(rs) is False
    assert is_compact(RadialOperator(DISK, one())) is False
    unk = RadialOperator(DISK, ClosedFormSymbol.from_scalar(1, lambda m: np.sin(m)))
    assert is_compact(unk) is None


def test_reducing_projection_examples():
    box = enumerate_allowable(DISK, IndexBox(1, 5))
    P = reducing_projection(DISK, box)
    f = LaurentPoly.from_sequence([1, 2j, 3, 0, -1])
    assert apply_diagonal(P, f).max_abs_diff(f) == 0
    P = reducing_projection(DISK, [(2,)])
    assert apply_diagonal(P, f).coeffs == {(2,): 3}
    assert projection_laws_hold(P, IndexSet.range(20))
    with pytest.raises(NotAllowable):
        reducing_projection(DISK, [(-1,)])


def test_normality_examples():
    box = IndexBox(1, 20)
    assert normality_residual(RadialOperator(DISK, reciprocal_succ()), box) < 1e-14
    assert normality_residual(RadialOperator(DISK, indicator([1, 4])), box) == 0
    mixed = RadialOperator(DISK, ClosedFormSymbol.from_scalar(1, lambda m: np.exp(1j * m) / (m + 1), decay=VANISHING))
    assert normality_residual(mixed, box) < 1e-14
    shift = np.diag(np.ones(3), 1)
    assert normality_residual(shift) > 0.5


def test_injectivity_symbol_difference_shows_in_action():
    a = reciprocal_succ()
    b = FiniteSymbol(1, {3: 0.5})
    for m in range(6):
        e = LaurentPoly.monomial((m,))
        diff = apply_diagonal(RadialOperator(DISK, a), e).coeff((m,)) - apply_diagonal(RadialOperator(DISK, b), e).coeff((m,))
        assert diff == a(m) - b(m)


def test_feasibility_examples():
    assert feasibility_probe(disk(), samples=10).verdict == "feasible-at-samples"
    assert feasibility_probe(hartogs_triangle(), samples=10).verdict == "feasible-at-samples"
    with pytest.raises(PreconditionError):
        feasibility_probe(disk(), samples=0)


def test_operator_norm_is_sup_norm():
    R = RadialOperator(DISK, reciprocal_succ())
    assert R.operator_norm(IndexSet.range(10)) == (1.0, True)
    assert R.symbol.decay == VANISHING
    assert RadialOperator(DISK, one()).symbol.decay == NO_DECAY
