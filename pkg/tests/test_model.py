import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairdiv.model import (
    Agent,
    Allocation,
    DimensionMismatch,
    DivisionProblem,
    Good,
    InfeasibleAllocation,
    evaluate,
    split_count,
    validate_problem,
)


def make_problem(u, weights=None):
    u = np.asarray(u, dtype=float)
    n, q = u.shape
    weights = weights or [1] * n
    return DivisionProblem(
        agents=tuple(Agent(id=f"a{i}", weight=weights[i]) for i in range(n)),
        goods=tuple(Good(id=f"g{a}") for a in range(q)),
        utilities=u,
    )


class TestEvaluate:
    def test_equal_split_point_of_rated_prints(self, warhol):
        problem = warhol.document.problem()
        x = 0.8415  # display-rounded reference split of the blue print
        alloc = Allocation(shares=np.array([[1, x, 0, 0], [0, 1 - x, 1, 1.0]]))
        profile = evaluate(problem, alloc)
        assert profile.values[0] == pytest.approx(222.8, abs=0.1)
        assert profile.values[1] == pytest.approx(222.8, abs=0.1)

    def test_everything_to_one_agent(self):
        problem = make_problem([[1, 2, 3], [4, 5, 6]])
        alloc = Allocation(shares=np.array([[1, 1, 1], [0, 0, 0.0]]))
        profile = evaluate(problem, alloc)
        assert profile.values[0] == pytest.approx(6.0)
        assert profile.values[1] == 0.0
        assert profile.normalized[0] == pytest.approx(1.0)

    def test_inheritance_bundle_value_of_agent_a(self, inheritance):
        problem = inheritance.document.problem()
        z = np.array(inheritance.expected["allocation"], dtype=float)
        profile = evaluate(problem, Allocation(shares=z))
        assert profile.values[0] == pytest.approx(225.0, abs=1e-9)

    def test_dimension_mismatch(self):
        problem = make_problem([[1, 2], [3, 4]])
        alloc = Allocation(shares=np.array([[1, 1, 1], [0, 0, 0.0]]))
        with pytest.raises(DimensionMismatch):
            evaluate(problem, alloc)

    def test_infeasible_column_names_good(self):
        problem = make_problem([[1, 2], [3, 4]])
        alloc = Allocation(shares=np.array([[0.5, 0.8], [0.5, 0.8]]), validate=False)
        with pytest.raises(InfeasibleAllocation, match="g1"):
            evaluate(problem, alloc)


class TestSplitCount:
    def test_reference_competitive_split(self, inheritance):
        z = np.array(inheritance.expected["allocation"], dtype=float)
        assert split_count(Allocation(shares=z)) == 1

    def test_integral_allocation(self):
        z = np.array([[1, 0, 1], [0, 1, 0.0]])
        assert split_count(Allocation(shares=z)) == 0

    def test_two_even_splits(self):
        # both middle goods halved between the agents
        z = np.array([[1, 0.5, 0.5, 0], [0, 0.5, 0.5, 1.0]])
        assert split_count(Allocation(shares=z)) == 2

    def test_tol_bounds(self):
        z = np.array([[1.0], [0.0]])
        with pytest.raises(ValueError):
            split_count(Allocation(shares=z), tol=0.5)

    @given(tol1=st.floats(1e-9, 0.4), tol2=st.floats(1e-9, 0.4))
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_tol(self, tol1, tol2):
        z = Allocation(shares=np.array([
            [0.9999, 0.6, 0.2, 1.0],
            [0.0001, 0.4, 0.8, 0.0],
        ]))
        lo, hi = sorted((tol1, tol2))
        assert split_count(z, hi) <= split_count(z, lo)


class TestValidateProblem:
    def test_inheritance_is_clean(self, inheritance):
        report = validate_problem(inheritance.document.problem())
        assert report.ok
        assert report.violations == ()

    def test_agent_with_nothing_valued(self):
        problem = make_problem([[0, 0], [1, 2]])
        report = validate_problem(problem)
        assert not report.ok
        assert any("no valued good" in m for m in report.messages())

    def test_negative_utility_rejected_at_construction(self):
        with pytest.raises(ValueError, match="non-negative"):
            make_problem([[1, -1], [1, 1]])


class TestAllocation:
    def test_clamps_dust(self):
        z = np.array([[1 + 5e-13, -5e-13], [-5e-13, 1 + 5e-13]])
        alloc = Allocation(shares=z)
        assert alloc.shares.min() == 0.0
        assert alloc.shares.max() == 1.0

    def test_rejects_bad_column(self):
        with pytest.raises(InfeasibleAllocation):
            Allocation(shares=np.array([[0.5, 0.5], [0.4, 0.5]]))

    def test_rejects_out_of_range_entry(self):
        with pytest.raises(InfeasibleAllocation):
            Allocation(shares=np.array([[1.5, 0.5], [-0.5, 0.5]]))

    def test_shares_are_readonly(self):
        alloc = Allocation(shares=np.array([[1.0], [0.0]]))
        with pytest.raises(ValueError):
            alloc.shares[0, 0] = 0.5


@given(
    alpha=st.floats(0.0, 1.0),
    seed=st.integers(0, 2**31 - 1),
)
@settings(max_examples=80, deadline=None)
def test_evaluate_is_linear_in_the_allocation(alpha, seed):
    rng = np.random.RandomState(seed)
    n, q = rng.randint(2, 4), rng.randint(2, 5)
    u = rng.uniform(0, 5, size=(n, q))
    problem = make_problem(u)

    def random_alloc():
        z = rng.uniform(size=(n, q))
        return z / z.sum(axis=0, keepdims=True)

    z1, z2 = random_alloc(), random_alloc()
    mix = Allocation(shares=alpha * z1 + (1 - alpha) * z2)
    p1 = evaluate(problem, Allocation(shares=z1))
    p2 = evaluate(problem, Allocation(shares=z2))
    pm = evaluate(problem, mix)
    expected = alpha * p1.values + (1 - alpha) * p2.values
    assert np.allclose(pm.values, expected, rtol=1e-9, atol=1e-9)


@given(seed=st.integers(0, 2**31 - 1))
@settings(max_examples=60, deadline=None)
def test_feasibility_tolerance_guard(seed):
    rng = np.random.RandomState(seed)
    n, q = rng.randint(2, 5), rng.randint(1, 6)
    z = rng.uniform(size=(n, q))
    z = z / z.sum(axis=0, keepdims=True)
    alloc = Allocation(shares=z)
    assert alloc.column_residual() <= 1e-9
