from django.test import SimpleTestCase

from core.services.engine import GameParams, LaunchExpedition, RequestKind, Side, advance, create_state, issue_order
from core.services.experiments import derive_seed
from core.services.invariants import (
    check_lanchester, check_oracle_equivalence, lanchester_ode, run_scripted, scripted_scenario,
)
from core.services.maps import line_map
from core.services.oracle import naive_advance


class OracleTests(SimpleTestCase):

    def test_single_launch_matches(self):
        for advance_fn in (advance, naive_advance):
            with self.subTest(advance_fn=advance_fn.__name__):
                state = create_state(line_map([4, 4]), GameParams(), 0, 2)
                state, _ = advance_fn(state)
                issue_order(state, Side.BLUE, LaunchExpedition(30.0, 0, 1))
                state, request = advance_fn(state)
                self.assertEqual((request.kind, request.side), (RequestKind.DECIDE, Side.RED))
                issue_order(state, Side.RED, LaunchExpedition(70.0, 2, 1))
                state, request = advance_fn(state)
                # both arrive at tick 4; the next decision is after the C2 delay
                self.assertEqual(request.tick, 10)
                self.assertEqual(state.owner[1], Side.RED)

    def test_scripted_scenarios_trace_identically(self):
        for i in range(25):
            seed = derive_seed(11, i)
            with self.subTest(seed=seed):
                state = scripted_scenario(seed)
                fast_rows, fast = run_scripted(state, advance, seed)
                slow_rows, slow = run_scripted(state, naive_advance, seed)
                self.assertEqual(fast_rows, slow_rows)
                self.assertEqual(fast.tick, slow.tick)
                self.assertEqual(fast.owner, slow.owner)

    def test_equivalence_check_passes(self):
        result = check_oracle_equivalence(scenarios=10, seed=3)
        self.assertTrue(result.passed, result.detail)


class LanchesterOracleTests(SimpleTestCase):

    def test_ode_agrees_with_closed_form(self):
        a_left, b_left = lanchester_ode(100.0, 50.0, 1.0, 1.0)
        self.assertAlmostEqual(a_left, 7500.0 ** 0.5, places=6)
        self.assertAlmostEqual(b_left, 0.0, places=6)

    def test_lanchester_check_passes(self):
        result = check_lanchester(trials=50, seed=1)
        self.assertTrue(result.passed, result.detail)
