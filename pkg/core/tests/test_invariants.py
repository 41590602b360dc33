from django.test import SimpleTestCase

from core.services.engine import Side
from core.services.invariants import (
    check_binomial_tails, check_conservation, decision_timings, dominant_attack_scenario, heuristic_timing,
)


class InvariantCheckTests(SimpleTestCase):

    def test_conservation_on_a_few_games(self):
        result = check_conservation(games=5, seed=2)
        self.assertTrue(result.passed, result.detail)
        self.assertEqual(result.name, 'conservation and determinism')

    def test_binomial_tails(self):
        result = check_binomial_tails(seed=1, cases=20)
        self.assertTrue(result.passed, result.detail)
        self.assertIn('[PASS]', str(result))

    def test_dominant_attack_scenario(self):
        state, red_force = dominant_attack_scenario(3)
        self.assertEqual(state.owner[0], Side.RED)
        self.assertEqual(state.garrison[0], red_force)
        self.assertTrue(5 <= red_force <= 10)
        self.assertTrue(all(state.owner[i] == Side.BLUE for i in range(1, 8)))

    def test_decision_timings_cover_every_setup(self):
        timings = decision_timings(decisions=2, seed=0)
        self.assertEqual(sorted(timings), ['MCTS', 'MCTS+H1', 'RHEA', 'RHEA+H1'])
        self.assertTrue(all(events > 0 for _, events in timings.values()))

    def test_mcts_decision_cost_tracks_rhea(self):
        # machine-independent guard; absolute targets are gated by selftest
        timings = decision_timings(decisions=9, seed=0)
        self.assertLessEqual(timings['MCTS'][0], 4 * timings['RHEA'][0])
        self.assertLessEqual(timings['MCTS'][0], 40.0)
        for planner in ('RHEA', 'MCTS'):
            self.assertLessEqual(timings[f'{planner}+H1'][1] / timings[planner][1], 2.2)

    def test_heuristic_timing(self):
        self.assertGreater(heuristic_timing(decisions=20, seed=0), 0.0)
