from fractions import Fraction as F

import pytest

from quantalg.linalg import InconsistentSystem, LinearSystem, solve_components


def test_unique_solution():
    part, kernel, comps = solve_components(
        ["a", "b"], [({"a": 1, "b": 1}, 3), ({"a": 1, "b": -1}, 1)]
    )
    assert part == {"a": F(2), "b": F(1)}
    assert kernel == []
    assert comps == 1


def test_free_variable_gets_kernel_vector():
    part, kernel, _ = solve_components(["a", "b"], [({"a": 1, "b": 1}, 2)])
    # particular solution zeroes the free variable
    assert part == {"a": F(2)}
    assert kernel == [{"b": F(1), "a": F(-1)}]


def test_untouched_variables_are_free_zero():
    part, kernel, comps = solve_components(["a", "b", "c"], [({"a": 2}, 4)])
    assert part == {"a": F(2)}
    assert sorted(sorted(k) for k in kernel) == [["b"], ["c"]]
    assert comps == 3


def test_inconsistent_raises():
    with pytest.raises(InconsistentSystem):
        solve_components(["a"], [({"a": 1}, 1), ({"a": 1}, 2)])
    with pytest.raises(InconsistentSystem):
        solve_components(["a"], [({}, 5)])


def test_incremental_interface():
    sys_ = LinearSystem(["x", "y", "z"])
    sys_.add_row({"x": 1, "y": 2}, 5)
    sys_.add_row({"y": 1}, 1)
    assert sys_.pinned_value("x") == F(3)
    assert sys_.pinned_value("z") is None
    assert sys_.rank() == 2
    assert sys_.free_variables() == ["z"]
    assert not sys_.try_add_row({"x": 1}, 99)
    assert sys_.try_add_row({"z": 3}, 6)
    assert sys_.particular_solution() == {"x": F(3), "y": F(1), "z": F(2)}


def test_determinism():
    rows = [({"a": 1, "b": 2, "c": 1}, 1), ({"b": 1, "c": 3}, 0)]
    first = solve_components(["a", "b", "c"], rows)
    second = solve_components(["a", "b", "c"], rows)
    assert first == second
