import math

import pytest

from cascade_lab.exprlang import (
    Bin,
    Call,
    DomainError,
    Neg,
    Num,
    ParseError,
    UnboundVariableError,
    UnknownFunctionError,
    Var,
    differentiate,
    evaluate,
    parse,
    simplify,
    to_source,
    variables,
)


class TestParse:
    def test_precedence_pow_over_add(self):
        assert parse("t^2 + x") == Bin("+", Bin("^", Var("t"), Num(2.0)), Var("x"))

    def test_function_times_literal(self):
        assert parse("sin(t)*2") == Bin("*", Call("sin", Var("t")), Num(2.0))

    def test_incomplete_input_offset(self):
        with pytest.raises(ParseError) as err:
            parse("t +")
        assert err.value.offset == 3

    def test_empty_input(self):
        with pytest.raises(ParseError):
            parse("   ")

    def test_unknown_function(self):
        with pytest.raises(UnknownFunctionError) as err:
            parse("foo(2)")
        assert err.value.offset == 0

    def test_unexpected_character_offset(self):
        with pytest.raises(ParseError) as err:
            parse("t $ 2")
        assert err.value.offset == 2

    def test_trailing_garbage(self):
        with pytest.raises(ParseError) as err:
            parse("t 2")
        assert err.value.offset == 2

    def test_pow_right_associative(self):
        assert evaluate(parse("2^3^2"), {}) == 512.0

    def test_pow_binds_tighter_than_unary_minus(self):
        assert evaluate(parse("-2^2"), {}) == -4.0

    def test_unary_minus_in_exponent(self):
        assert evaluate(parse("2^-1"), {}) == 0.5

    def test_mul_div_before_add(self):
        assert evaluate(parse("2+3*4"), {}) == 14.0
        assert evaluate(parse("(1+2)*3"), {}) == 9.0

    def test_no_implicit_multiplication(self):
        with pytest.raises(ParseError):
            parse("2 t")

    def test_scientific_notation(self):
        assert evaluate(parse("1e-3 + 2.5E2"), {}) == 1e-3 + 2.5e2


class TestEvaluate:
    def test_arithmetic(self):
        assert evaluate(parse("t^2 + x"), {"t": 2, "x": 1}) == 5.0

    def test_sin_identity(self):
        assert evaluate(parse("sin(t)"), {"t": 0}) == 0.0

    def test_ln_domain_error(self):
        with pytest.raises(DomainError):
            evaluate(parse("ln(t)"), {"t": -1})

    def test_sqrt_domain_error(self):
        with pytest.raises(DomainError):
            evaluate(parse("sqrt(t)"), {"t": -4})

    def test_division_by_zero(self):
        with pytest.raises(DomainError):
            evaluate(parse("1/t"), {"t": 0})

    def test_unbound_variable(self):
        with pytest.raises(UnboundVariableError):
            evaluate(parse("t + y"), {"t": 1})

    def test_fractional_power_negative_base(self):
        with pytest.raises(DomainError):
            evaluate(parse("t^0.5"), {"t": -2})

    def test_integer_power_negative_base(self):
        assert evaluate(parse("t^3"), {"t": -2}) == -8.0

    def test_zero_to_negative_integer(self):
        with pytest.raises(DomainError):
            evaluate(parse("t^-2"), {"t": 0})


class TestDifferentiate:
    def test_power_rule(self):
        d = differentiate(parse("t^3"), "t")
        assert evaluate(d, {"t": 2}) == pytest.approx(12.0, abs=0)

    def test_sin_at_zero(self):
        d = differentiate(parse("sin(t)"), "t")
        assert evaluate(d, {"t": 0}) == 1.0

    def test_var_free_gives_zero_literal(self):
        assert differentiate(parse("x^2"), "t") == Num(0.0)

    def test_quotient_rule(self):
        d = differentiate(parse("t / (1 + t)"), "t")
        # d/dt t/(1+t) = 1/(1+t)^2
        assert evaluate(d, {"t": 3}) == pytest.approx(1 / 16, rel=1e-15)

    def test_chain_rule_composed(self):
        d = differentiate(parse("exp(sin(t))"), "t")
        t = 0.7
        assert evaluate(d, {"t": t}) == pytest.approx(
            math.exp(math.sin(t)) * math.cos(t), rel=1e-14
        )

    def test_variable_exponent(self):
        d = differentiate(parse("t^x"), "t")
        # d/dt t^x = x t^(x-1)
        assert evaluate(d, {"t": 2.0, "x": 3.5}) == pytest.approx(
            3.5 * 2.0**2.5, rel=1e-14
        )

    def test_exponent_in_var(self):
        d = differentiate(parse("2^t"), "t")
        assert evaluate(d, {"t": 1.5}) == pytest.approx(
            2**1.5 * math.log(2), rel=1e-14
        )


class TestSimplify:
    def test_additive_identity(self):
        assert simplify(Bin("+", Num(0.0), Var("t"))) == Var("t")

    def test_multiplicative_identity(self):
        e = Bin("*", Num(1.0), Bin("^", Var("t"), Num(1.0)))
        assert simplify(e) == Var("t")

    def test_annihilator(self):
        assert simplify(Bin("*", Num(0.0), Call("sin", Var("t")))) == Num(0.0)

    def test_constant_folding(self):
        assert simplify(parse("2 + 3*4")) == Num(14.0)

    def test_fold_preserves_bits(self):
        e = Bin("+", Num(0.1), Num(0.2))
        assert simplify(e) == Num(0.1 + 0.2)

    def test_division_by_zero_not_folded(self):
        e = Bin("/", Num(1.0), Num(0.0))
        assert simplify(e) == e

    def test_double_negation(self):
        assert simplify(Neg(Neg(Var("t")))) == Var("t")


def _random_expr(rng, depth, vars_pool):
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.5:
            return Num(round(rng.uniform(0.25, 3.0), 3))
        return Var(rng.choice(vars_pool))
    kind = rng.random()
    if kind < 0.15:
        return Neg(_random_expr(rng, depth - 1, vars_pool))
    if kind < 0.35:
        fn = rng.choice(["sin", "cos", "exp", "ln", "sqrt"])
        return Call(fn, _random_expr(rng, depth - 1, vars_pool))
    op = rng.choice(["+", "-", "*", "/", "^"])
    left = _random_expr(rng, depth - 1, vars_pool)
    if op == "^":
        # keep exponents constant and small so stencil points stay in-domain
        return Bin(op, left, Num(float(rng.randint(1, 3))))
    return Bin(op, left, _random_expr(rng, depth - 1, vars_pool))


def _defined_everywhere(e, envs):
    values = []
    for env in envs:
        try:
            v = evaluate(e, env)
        except Exception:
            return None
        if not math.isfinite(v) or abs(v) > 1e4:
            return None
        values.append(v)
    return values


class TestProperties:
    def test_print_parse_round_trip(self, rng):
        trees = 0
        attempts = 0
        while trees < 200 and attempts < 2000:
            attempts += 1
            e = _random_expr(rng, rng.randint(1, 5), ["t", "x"])
            trees += 1
            assert parse(to_source(e)) == e, to_source(e)
        assert trees == 200

    def test_derivative_matches_central_difference(self, rng):
        h = 1e-5
        checked = 0
        attempts = 0
        while checked < 100 and attempts < 5000:
            attempts += 1
            e = _random_expr(rng, rng.randint(1, 5), ["t"])
            d = differentiate(e, "t")
            t = rng.uniform(0.3, 2.5)
            envs = [{"t": t - h}, {"t": t}, {"t": t + h}]
            vals = _defined_everywhere(e, envs)
            if vals is None:
                continue
            try:
                exact = evaluate(d, {"t": t})
            except Exception:
                continue
            if not math.isfinite(exact) or abs(exact) > 1e4:
                continue
            fd = (vals[2] - vals[0]) / (2 * h)
            assert abs(exact - fd) <= 1e-5 * (1 + abs(exact)), to_source(e)
            checked += 1
        assert checked == 100

    def test_simplify_preserves_value_exactly(self, rng):
        checked = 0
        attempts = 0
        while checked < 100 and attempts < 2000:
            attempts += 1
            e = _random_expr(rng, rng.randint(1, 4), ["t", "x"])
            s = simplify(e)
            env = {"t": rng.uniform(0.3, 2.0), "x": rng.uniform(0.3, 2.0)}
            try:
                v1 = evaluate(e, env)
                v2 = evaluate(s, env)
            except Exception:
                continue
            assert v1 == v2, to_source(e)
            checked += 1
        assert checked == 100


def test_variables():
    assert variables(parse("t^2 + sin(x)*y")) == frozenset({"t", "x", "y"})
    assert variables(parse("1 + 2")) == frozenset()
