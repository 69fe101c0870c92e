import numpy as np
import pytest

from degenpde.expressions import compile_expression


def test_basic_arithmetic():
    f = compile_expression("x + 2*t - y2^2")
    assert f(1.0, 3.0, 0.5) == pytest.approx(1.0 + 1.0 - 9.0)


def test_functions_and_precedence():
    f = compile_expression("sqrt(x) + exp(0*t) * y2")
    assert f(4.0, 0.25, 7.0) == pytest.approx(2.25)
    g = compile_expression("2*x^2")
    assert g(3.0, 0.0, 0.0) == pytest.approx(18.0)


def test_broadcasting():
    f = compile_expression("x + y2*t")
    x = np.array([0.0, 1.0])
    out = f(x, 2.0, 3.0)
    assert np.allclose(out, [6.0, 7.0])


def test_time_dependence_flag():
    assert compile_expression("x + t").time_dependent
    assert not compile_expression("x + y2").time_dependent


def test_parse_errors():
    with pytest.raises(ValueError):
        compile_expression("x +")
    with pytest.raises(ValueError):
        compile_expression("foo(x)")
