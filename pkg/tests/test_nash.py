from fractions import Fraction

import numpy as np
import pytest

from fairdiv.model import Agent, Allocation, DivisionProblem, Good, evaluate, split_count
from fairdiv.nash import (
    ConvergenceError,
    PriceVector,
    equilibrium_prices,
    purchase_explanation,
    solve_nash,
    verify_clearing,
)
from oracles import nash_log_oracle


def make_problem(u, weights=None):
    u = np.asarray(u, dtype=float)
    n, q = u.shape
    weights = weights or [1] * n
    return DivisionProblem(
        agents=tuple(Agent(id=f"a{i}", weight=weights[i]) for i in range(n)),
        goods=tuple(Good(id=f"g{a}") for a in range(q)),
        utilities=u,
    )


# The one split good is shared by agents B and C; equal bang per buck there
# pins the split fraction: 132/(156 + 132 x) = 129/(329 - 129 x).
EXACT_SPLIT = Fraction(23304, 34056)  # = 971/1419


class TestInheritanceCase:
    def test_allocation_support_and_split(self, inheritance):
        problem = inheritance.document.problem()
        solution = solve_nash(problem)
        z = solution.allocation.shares
        expected = np.array(inheritance.expected["allocation"], dtype=float)
        assert np.abs(z - expected).max() <= 0.005
        assert z[1, 1] == pytest.approx(float(EXACT_SPLIT), abs=1e-6)
        assert z[2, 1] == pytest.approx(1 - float(EXACT_SPLIT), abs=1e-6)
        assert split_count(solution.allocation) == 1

    def test_utilities_match_closed_form(self, inheritance):
        problem = inheritance.document.problem()
        solution = solve_nash(problem)
        x = float(EXACT_SPLIT)
        assert solution.utilities.values[0] == pytest.approx(225.0, abs=1e-6)
        assert solution.utilities.values[1] == pytest.approx(156 + 132 * x, abs=1e-5)
        assert solution.utilities.values[2] == pytest.approx(329 - 129 * x, abs=1e-5)

    def test_runs_fast(self, inheritance):
        import time

        problem = inheritance.document.problem()
        t0 = time.perf_counter()
        solve_nash(problem)
        assert time.perf_counter() - t0 < 1.0


class TestDegenerateShapes:
    def test_single_agent_takes_everything(self):
        problem = make_problem([[3, 1, 4]])
        solution = solve_nash(problem)
        assert np.array_equal(solution.allocation.shares, np.ones((1, 3)))

    def test_disjoint_demand(self):
        problem = make_problem([[5, 0], [0, 7]])
        solution = solve_nash(problem)
        assert np.allclose(solution.allocation.shares, np.eye(2), atol=1e-9)

    def test_agent_valuing_nothing_rejected(self):
        with pytest.raises(ValueError, match="no achievable utility"):
            solve_nash(make_problem([[1, 1], [0, 0]]))

    def test_tol_domain(self):
        problem = make_problem([[1.0]])
        with pytest.raises(ValueError):
            solve_nash(problem, tol=0.01)
        with pytest.raises(ValueError):
            solve_nash(problem, tol=0.0)

    def test_iteration_cap_raises_with_residual(self, inheritance):
        problem = inheritance.document.problem()
        with pytest.raises(ConvergenceError) as err:
            solve_nash(problem, max_iter=3)
        assert err.value.residual > 0
        assert err.value.iterations == 3

    def test_worthless_good_goes_whole_to_first_agent(self):
        problem = make_problem([[2, 0], [1, 0]])
        solution = solve_nash(problem)
        assert solution.allocation.shares[0, 1] == 1.0
        assert split_count(solution.allocation) <= 1


class TestOracleEquivalence:
    def test_random_two_agent_three_good(self):
        rng = np.random.RandomState(11)
        for _ in range(40):
            u = rng.uniform(0.2, 10.0, size=(2, 3))
            problem = make_problem(u)
            solution = solve_nash(problem)
            want = nash_log_oracle(u)
            assert solution.log_objective == pytest.approx(want, abs=1e-6)


class TestEquilibriumPrices:
    def test_inheritance_reference_prices(self, inheritance):
        problem = inheritance.document.problem()
        solution = solve_nash(problem)
        prices = equilibrium_prices(problem, solution, budget=630)
        reference = [174, 113, 133, 93.5, 74.5, 42]
        assert np.abs(prices.scaled_prices - reference).max() <= 0.5
        assert prices.scaled_prices.sum() == pytest.approx(630, abs=1e-3)
        assert prices.per_agent_budget == pytest.approx(210)
        x = float(EXACT_SPLIT)
        exact = [
            210 * 200 / (329 - 129 * x),
            210 * 132 / (156 + 132 * x),
            210 * 156 / (156 + 132 * x),
            210 * 100 / 225,
            210 * 80 / 225,
            210 * 45 / 225,
        ]
        assert prices.scaled_prices == pytest.approx(exact, abs=1e-4)

    def test_single_agent_prices_proportional_to_bids(self):
        problem = make_problem([[30, 10, 60]])
        solution = solve_nash(problem)
        prices = equilibrium_prices(problem, solution, budget=200)
        assert prices.scaled_prices == pytest.approx([60, 20, 120])

    def test_symmetric_two_by_two_halves_budget(self):
        problem = make_problem([[1, 1], [1, 1]])
        solution = solve_nash(problem)
        prices = equilibrium_prices(problem, solution, budget=100)
        assert prices.scaled_prices == pytest.approx([50, 50], abs=1e-6)

    def test_refuses_unconverged(self, inheritance):
        problem = inheritance.document.problem()
        solution = solve_nash(problem)
        broken = type(solution)(
            allocation=solution.allocation,
            utilities=solution.utilities,
            log_objective=solution.log_objective,
            iterations=solution.iterations,
            converged=False,
            residual=1.0,
        )
        with pytest.raises(ValueError, match="unconverged"):
            equilibrium_prices(problem, broken, budget=630)

    def test_price_conservation_random(self):
        rng = np.random.RandomState(3)
        for _ in range(25):
            n, q = rng.randint(2, 5), rng.randint(2, 7)
            u = rng.uniform(0.2, 10.0, size=(n, q))
            problem = make_problem(u)
            solution = solve_nash(problem)
            budget = float(rng.uniform(10, 1000))
            prices = equilibrium_prices(problem, solution, budget)
            assert prices.scaled_prices.sum() == pytest.approx(budget, rel=1e-6)


class TestVerifyClearing:
    def test_inheritance_passes_all_clauses(self, inheritance):
        problem = inheritance.document.problem()
        solution = solve_nash(problem)
        prices = equilibrium_prices(problem, solution, budget=630)
        cert = verify_clearing(problem, solution, prices)
        assert cert.ok
        assert [c.ok for c in cert.clauses] == [True, True, True]

    def test_perturbed_allocation_breaks_spending(self, inheritance):
        problem = inheritance.document.problem()
        solution = solve_nash(problem)
        prices = equilibrium_prices(problem, solution, budget=630)
        z = solution.allocation.shares.copy()
        z[1, 1] -= 0.1  # move a tenth of the split good from B to C
        z[2, 1] += 0.1
        perturbed = type(solution)(
            allocation=Allocation(shares=z),
            utilities=evaluate(problem, Allocation(shares=z)),
            log_objective=0.0,
            iterations=0,
            converged=True,
            residual=0.0,
        )
        cert = verify_clearing(problem, perturbed, prices)
        assert not cert.ok
        assert not cert.clauses[0].ok  # spending out of balance

    def test_doubled_prices_break_spending(self, inheritance):
        problem = inheritance.document.problem()
        solution = solve_nash(problem)
        prices = equilibrium_prices(problem, solution, budget=630)
        doubled = PriceVector(
            good_ids=prices.good_ids,
            unit_prices=prices.unit_prices * 2,
            scaled_prices=prices.scaled_prices * 2,
            per_agent_budget=prices.per_agent_budget,
            budget=prices.budget,
        )
        cert = verify_clearing(problem, solution, doubled)
        assert not cert.clauses[0].ok


def reference_price_vector(inheritance):
    """The published display-rounded prices, as stored in the fixture."""
    scaled = np.array([174, 113, 133, 93.5, 74.5, 42.0])
    return PriceVector(
        good_ids=tuple(g.id for g in inheritance.document.goods),
        unit_prices=scaled * 3 / 630.0,
        scaled_prices=scaled,
        per_agent_budget=210.0,
        budget=630.0,
    )


class TestPurchaseExplanation:
    def test_agent_a_reference_table(self, inheritance):
        problem = inheritance.document.problem()
        plan = purchase_explanation(problem, reference_price_vector(inheritance)).plan_for("A")
        ruled = [line.good_id for line in plan.lines if line.ruled_out]
        assert ruled == ["s_gf", "s_f1", "s_f2"]
        discounts = {line.good_id: line.discount * 100 for line in plan.lines if not line.ruled_out}
        assert discounts["c_gf"] == pytest.approx(6.5, abs=0.05)
        assert discounts["c_f1"] == pytest.approx(6.87, abs=0.05)
        assert discounts["c_f2"] == pytest.approx(6.67, abs=0.05)
        assert [s.good_id for s in plan.steps] == ["c_f1", "c_f2", "c_gf"]
        assert plan.remaining == pytest.approx(0, abs=0.5)

    def test_agent_b_reference_table(self, inheritance):
        problem = inheritance.document.problem()
        plan = purchase_explanation(problem, reference_price_vector(inheritance)).plan_for("B")
        discounts = {line.good_id: line.discount * 100 for line in plan.lines if not line.ruled_out}
        assert discounts["s_gf"] == pytest.approx(3.86, abs=0.05)
        assert discounts["s_f1"] == pytest.approx(14.39, abs=0.05)
        assert discounts["s_f2"] == pytest.approx(14.74, abs=0.05)
        assert [s.good_id for s in plan.steps] == ["s_f2", "s_f1"]
        assert plan.steps[1].fraction == pytest.approx(0.68, abs=0.005)
        assert plan.remaining == pytest.approx(0, abs=0.5)

    def test_agent_c_reference_table(self, inheritance):
        problem = inheritance.document.problem()
        plan = purchase_explanation(problem, reference_price_vector(inheritance)).plan_for("C")
        discounts = {line.good_id: line.discount * 100 for line in plan.lines if not line.ruled_out}
        assert discounts["s_gf"] == pytest.approx(13.0, abs=0.05)
        assert discounts["s_f1"] == pytest.approx(12.4, abs=0.05)
        assert discounts["s_f2"] == pytest.approx(5.0, abs=0.05)
        assert [s.good_id for s in plan.steps] == ["s_gf", "s_f1"]
        assert plan.steps[1].fraction == pytest.approx(0.32, abs=0.005)

    def test_universal_rule_out_leaves_budget(self):
        problem = make_problem([[10, 10], [90, 90]])
        prices = PriceVector(
            good_ids=("g0", "g1"),
            unit_prices=np.array([0.5, 0.5]),
            scaled_prices=np.array([50.0, 50.0]),
            per_agent_budget=50.0,
            budget=100.0,
        )
        plan = purchase_explanation(problem, prices).plan_for("a0")
        assert all(line.ruled_out for line in plan.lines)
        assert plan.steps == ()
        assert plan.remaining == pytest.approx(50.0)


class TestInvariants:
    def test_no_envy_and_fair_share_random(self):
        rng = np.random.RandomState(5)
        for _ in range(30):
            n, q = rng.randint(2, 5), rng.randint(2, 7)
            u = rng.uniform(0.2, 10.0, size=(n, q))
            problem = make_problem(u)
            solution = solve_nash(problem)
            z = solution.allocation.shares
            values = u @ z.T
            own = np.diag(values)
            assert np.all(values <= own[:, None] + 1e-7 * np.maximum(own[:, None], 1)), "envy"
            fair = u.sum(axis=1) / n
            assert np.all(own >= fair - 1e-7 * np.maximum(u.sum(axis=1), 1)), "fair share"

    def test_support_size_bound(self):
        rng = np.random.RandomState(17)
        for _ in range(30):
            n, q = rng.randint(2, 5), rng.randint(2, 7)
            u = rng.uniform(0.2, 10.0, size=(n, q))
            solution = solve_nash(make_problem(u))
            nonzero = int((solution.allocation.shares > 1e-9).sum())
            assert nonzero <= n + q - 1
            assert split_count(solution.allocation) <= n - 1

    def test_scale_invariance_is_exact_for_power_of_two(self):
        rng = np.random.RandomState(23)
        u = rng.uniform(0.2, 10.0, size=(3, 5))
        base = solve_nash(make_problem(u)).allocation.shares
        for lam, row in ((4.0, 0), (0.25, 1), (8.0, 2)):
            u2 = u.copy()
            u2[row] *= lam
            scaled = solve_nash(make_problem(u2)).allocation.shares
            assert np.array_equal(base, scaled)

    def test_log_objective_shifts_by_log_lambda(self):
        rng = np.random.RandomState(29)
        u = rng.uniform(0.2, 10.0, size=(2, 4))
        base = solve_nash(make_problem(u))
        u2 = u.copy()
        u2[0] *= 4.0
        scaled = solve_nash(make_problem(u2))
        assert scaled.log_objective - base.log_objective == pytest.approx(np.log(4.0), abs=1e-9)

    def test_weighted_solution_favours_heavier_agent(self):
        u = [[1, 1], [1, 1]]
        light = solve_nash(make_problem(u))
        heavy = solve_nash(make_problem(u, weights=[3, 1]))
        assert heavy.utilities.values[0] > light.utilities.values[0]
        # budgets proportional to weights: agent 0 ends with 3/4 of everything
        assert heavy.utilities.values[0] == pytest.approx(1.5, abs=1e-6)
