import random
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mproots.analysis import measure_coc
from mproots.expr import ScalarFunction, builtin, from_expression
from mproots.numerics import Precision
from mproots.solvers import (
    DEFAULT_G,
    DEFAULT_H,
    DegenerateNodes,
    FamilyParams,
    FixedIterations,
    InvalidWeights,
    MethodKind,
    MethodSpec,
    SolveConfig,
    Status,
    Tolerance,
    WeightFamily,
    WeightPolynomial,
    divided_difference,
    parse_methods,
    solve,
    step_newton,
    step_om8,
    step_sm7,
    step_steffensen,
    validate_sm7_weights,
    validate_weights,
    weights_from_params,
)

P = Precision(1000)
CTX = P.context
W = WeightPolynomial.of
ALL_METHODS = [
    MethodSpec.newton(),
    MethodSpec.steffensen(),
    MethodSpec.sm7(),
    MethodSpec.om8(),
    MethodSpec.om8df(),
    MethodSpec.om8df(1),
    MethodSpec.om8df(2, "-1/2"),
]
rationals = st.fractions(min_value=-5, max_value=5, max_denominator=1000)


def affine(c1, r):
    c1, r = P.real(c1), P.real(r)
    return ScalarFunction("affine", lambda x: c1 * (x - r), lambda x: c1 + 0 * x)


# --------------------------------------------------------- weight polynomials


def test_weight_polynomial_horner_and_derivatives():
    w = W(1, 2, 3, 4)
    assert w(P.real(2)) == 1 + 4 + 12 + 32
    assert w(2.0) == 49.0
    assert [w.derivative_at_zero(k) for k in range(5)] == [1, 2, 6, 24, 0]


def test_weight_polynomial_trims_and_substitutes():
    assert W(1, 0, 0).coeffs == (1,)
    assert W(1, 2).with_coefficient(3, 5).coeffs == (1, 2, 0, 5)
    assert W(1, 2).coefficient(7) == 0
    assert all(isinstance(c, Fraction) for c in W(0.5, "1/3", 2).coeffs)


@settings(max_examples=50, deadline=None)
@given(st.lists(rationals, min_size=1, max_size=6), st.integers(min_value=0, max_value=8))
def test_kth_derivative_is_k_factorial_times_coefficient(cs, k):
    w = WeightPolynomial(tuple(cs))
    import math

    assert w.derivative_at_zero(k) == math.factorial(k) * w.coefficient(k)


def test_default_family():
    w = weights_from_params(FamilyParams(0, 3, 0, 1))
    assert w.A == W(1)
    assert w.B == W(1, 1, 3)
    assert w.P == W(0, 0, 1, 4)
    assert w.Q == W(0)
    assert w.R == W(1, 2, 1)
    assert validate_weights(w) == []


def test_beta_one_kills_cubic_term():
    assert weights_from_params(FamilyParams(0, 1, 0, 0)).P == W(0, 0, 1)


@settings(max_examples=100, deadline=None)
@given(rationals, rationals, rationals, rationals)
def test_every_parameter_quadruple_is_valid(a, b, g, d):
    assert validate_weights(weights_from_params(FamilyParams(a, b, g, d))) == []


MUTATIONS = [
    ("A", 0, 2, "A(0)=1"),
    ("A", 1, 1, "A'(0)=0"),
    ("A", 2, 1, "A''(0)=0"),
    ("B", 0, 0, "B(0)=1"),
    ("B", 1, 0, "B'(0)=1"),
    ("R", 0, 2, "R(0)=1-P(0)-Q(0)"),
    ("P", 1, 1, "P'(0)=0"),
    ("P", 2, 2, "P''(0)=2"),
    ("P", 3, 5, "P'''(0)=6B''(0)-12"),
    ("Q", 1, 1, "Q'(0)=0"),
    ("R", 1, 3, "R'(0)=2"),
]


@pytest.mark.parametrize("name,k,value,condition", MUTATIONS)
def test_single_mutation_flags_exactly_one_condition(name, k, value, condition):
    w = weights_from_params()
    bad = replace(w, **{name: getattr(w, name).with_coefficient(k, value)})
    assert [v.condition for v in validate_weights(bad)] == [condition]


def test_b_mutation_moves_p_cubic_condition():
    # B's c2 = 3 demands p3 = 2*3 - 2 = 4; p3 = 5 is flagged
    w = WeightFamily(W(1), W(1, 1, 3), W(0, 0, 1, 5), W(0), W(1, 2, 1))
    assert [v.condition for v in validate_weights(w)] == ["P'''(0)=6B''(0)-12"]


def test_sm7_weight_conditions():
    assert validate_sm7_weights(DEFAULT_G, DEFAULT_H) == []
    assert [v.condition for v in validate_sm7_weights(W(1, 2), W(1, 0, 1))] == ["G'(0)=1"]
    assert [v.condition for v in validate_sm7_weights(W(1, 1), W(1, 0, 3))] == ["H''(0)=2"]


def test_invalid_weights_rejected_unless_unchecked():
    bad = replace(weights_from_params(), R=W(1, 3, 1))
    spec = MethodSpec.om8(weights=bad)
    with pytest.raises(InvalidWeights) as info:
        spec.validate()
    assert [v.condition for v in info.value.violations] == ["R'(0)=2"]
    spec.unchecked().validate()
    with pytest.raises(InvalidWeights):
        solve(spec, builtin("f2"), "1.5")


@pytest.mark.parametrize("m,a", [(0, 1), (3, 0)])
def test_om8df_shift_validation(m, a):
    with pytest.raises(ValueError):
        MethodSpec.om8df(m, a).validate()


def test_method_labels_and_costs():
    assert [m.label for m in parse_methods(["newton", "Steffensen", "sm7", "OM8", "om8df"])] == [
        k.value for k in MethodKind
    ]
    assert [m.evals_per_iteration for m in parse_methods(["newton", "steffensen", "sm7", "om8", "om8df"])] == [
        2, 2, 4, 4, 4,
    ]  # fmt: skip
    with pytest.raises(ValueError):
        parse_methods(["halley"])


# ---------------------------------------------------------------- kernels


def test_divided_difference_examples():
    sq = lambda v: v * v  # noqa: E731
    one, three = P.real(1), P.real(3)
    assert divided_difference(one, sq(one), three, sq(three)) == 4
    assert divided_difference(one, P.real(7), three, P.real(7)) == 0
    with pytest.raises(DegenerateNodes):
        divided_difference(one, one, one, one)
    f2 = builtin("f2")
    a, b = P.real("1.5"), P.real("1.4")
    expected = (f2(a) - f2(b)) / (a - b)
    g = from_expression("x^5+x^4+4*x^2-15")
    assert abs(divided_difference(a, g(a), b, g(b)) - expected) <= abs(expected) * CTX.mpf(10) ** -1000


def test_newton_step_is_17_over_12():
    s = step_newton(from_expression("x^2-2"), P.real("1.5"))
    assert s.x_next == CTX.mpf(17) / 12


@pytest.mark.parametrize("step", [step_om8, step_sm7, step_steffensen, step_newton])
def test_affine_x_minus_5(step):
    f = from_expression("x-5")
    kwargs = {"w": weights_from_params()} if step is step_om8 else {}
    assert step(f, P.real("-3.25"), **kwargs).x_next == 5


@settings(max_examples=50, deadline=None)
@given(
    st.fractions(min_value=-100, max_value=100, max_denominator=97).filter(lambda c: c != 0),
    st.fractions(min_value=-100, max_value=100, max_denominator=97),
    st.sampled_from(ALL_METHODS),
)
def test_affine_exactness(c1, r, method):
    f = affine(c1, r)
    res = solve(method, f, P.real(r) + 1, SolveConfig(P, FixedIterations(1)))
    # one step is exact up to rounding of x0 = r + 1 and the update
    ctx = P.context
    assert abs(res.root - P.real(r)) <= 8 * ctx.eps * max(1, abs(P.real(r)))


def test_om8_two_steps_on_f2():
    res = solve(MethodSpec.om8(), builtin("f2"), "1.5", SolveConfig(P, FixedIterations(2)))
    assert res.residual < CTX.mpf(10) ** -50


def test_om8_three_steps_on_f1_band():
    res = solve(MethodSpec.om8(), builtin("f1"), "1.72", SolveConfig(P, FixedIterations(3)))
    assert -757 <= float(CTX.log10(res.residual)) <= -619


def test_f5_fixed_three_iterations_band():
    res = solve(MethodSpec.om8(), builtin("f5"), "0.1", SolveConfig(P, FixedIterations(3)))
    assert -400 <= float(CTX.log10(res.residual)) <= -328


def test_f7_from_1_8_takes_four_iterations():
    res = solve(MethodSpec.om8(), builtin("f7"), "1.8", SolveConfig(P))
    assert (res.status, res.iterations, res.tnfe) == (Status.CONVERGED, 4, 16)


@pytest.mark.parametrize("method", ALL_METHODS[:5], ids=lambda m: m.label)
@pytest.mark.parametrize("fid,x0", [("f2", "1.5"), ("f4", "1.5"), ("f6", "-0.9")])
def test_evaluation_accounting(method, fid, x0):
    f = builtin(fid)
    res = solve(method, f, x0, SolveConfig(P, FixedIterations(3)))
    assert res.status is not Status.DOMAIN_FAILURE
    k = res.iterations
    assert res.tnfe == method.evals_per_iteration * k
    # f(x_0) plus per-iteration work; the stopping-test value is reused
    assert f.evaluations == method.evals_per_iteration * k + 1


def test_solve_is_deterministic():
    a = solve(MethodSpec.om8(), builtin("f3"), "-1.3", SolveConfig(P))
    b = solve(MethodSpec.om8(), builtin("f3"), "-1.3", SolveConfig(P))
    assert [(r.n, r.x, r.abs_f) for r in a.trace] == [(r.n, r.x, r.abs_f) for r in b.trace]


@pytest.mark.parametrize("fid,x0", [("f1", "1.7"), ("f2", "1.5"), ("f7", "0.3")])
def test_t_ratio_identity(fid, x0):
    res = solve(MethodSpec.om8(), builtin(fid), x0, SolveConfig(P, FixedIterations(3)))
    tol = CTX.mpf(10) ** (-P.digits + 10)
    seen = 0
    for rec in res.trace:
        if rec.ratios is None:
            continue
        t = rec.ratios
        assert abs(t.t4 - t.t2 * t.t3) <= tol * abs(t.t4)
        seen += 1
    assert seen >= 2


def test_converged_implies_small_residual():
    for fid, x0 in [("f1", "1.5"), ("f3", "-1.0"), ("f6", "-1.5")]:
        res = solve(MethodSpec.om8(), builtin(fid), x0, SolveConfig(P, Tolerance("1e-50")))
        assert res.converged and res.residual < CTX.mpf(10) ** -50


# ------------------------------------------------------------- statuses


def test_exact_root_start():
    res = solve(MethodSpec.om8(), builtin("f5"), "0", SolveConfig(P))
    assert (res.status, res.iterations, res.tnfe) == (Status.CONVERGED, 0, 0)


def test_zero_derivative_is_domain_failure():
    res = solve(MethodSpec.newton(), from_expression("x^2+1"), "0", SolveConfig(P))
    assert res.status is Status.DOMAIN_FAILURE


def test_divergence_by_bound():
    # Newton on exp(-x) walks right by exactly one per step
    cfg = SolveConfig(Precision(60), divergence_bound="50")
    res = solve(MethodSpec.newton(), from_expression("exp(-x)"), "0", cfg)
    assert (res.status, res.iterations) == (Status.DIVERGED, 51)


def test_divergence_by_overflow():
    res = solve(MethodSpec.steffensen(), from_expression("exp(x^2)"), "30", SolveConfig(Precision(60)))
    assert res.status is Status.DIVERGED


def test_max_iterations():
    cfg = SolveConfig(Precision(60), Tolerance("1e-50"), max_iterations=3)
    res = solve(MethodSpec.newton(), from_expression("x^2-2"), "100", cfg)
    assert (res.status, res.iterations) == (Status.MAX_ITERATIONS, 3)


def test_f4_near_zero_is_domain_failure():
    res = solve(MethodSpec.om8(), builtin("f4"), "1e-400", SolveConfig(P))
    assert res.status is Status.DOMAIN_FAILURE


def test_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(max_iterations=0)
    with pytest.raises(ValueError):
        SolveConfig(mode=FixedIterations(-1))


# ---------------------------------------------------------------- orders


def test_om8_order_for_random_parameters():
    """Measured COC within [7.5, 8.5] for 40 seeded parameter draws in [-5, 5].

    A draw whose error sequence offers no measurable in-window triple at 1000
    digits (an error just above 1e-30 followed by one whose successor is below
    the precision floor) is remeasured at 2000 digits; the count of such draws
    is asserted to stay small so a systematic failure cannot hide here.
    """
    rng = random.Random(20240917)
    rescued = 0
    for _ in range(40):
        p = FamilyParams(*(Fraction(rng.randint(-500, 500), 100) for _ in range(4)))
        try:
            est = measure_coc(MethodSpec.om8(p), builtin("f2"), "1.5", P)
        except ValueError:
            rescued += 1
            est = measure_coc(MethodSpec.om8(p), builtin("f2"), "1.5", Precision(2000))
        assert 7.5 <= est.value <= 8.5, (p, est)
    assert rescued <= 4


@pytest.mark.parametrize("m,lo,hi", [(1, 4.7, 5.3), (2, 6.7, 7.3), (3, 7.7, 8.3), (4, 7.7, 8.3)])
def test_derivative_free_ladder_from_1_35(m, lo, hi):
    est = measure_coc(MethodSpec.om8df(m), builtin("f2"), "1.35", P)
    assert lo <= est.value <= hi
