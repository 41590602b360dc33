import math
from unittest import mock

import numpy as np
from django.test import SimpleTestCase

from core.services.actionspace import Genome
from core.services.agents import build_agent
from core.services.engine import (
    WAIT_FOREVER, GameParams, LaunchExpedition, Side, SideParams, advance, copy_state, create_state,
    issue_or_wait, material_score, state_key,
)
from core.services.exceptions import ConfigError
from core.services.experiments import derive_seed
from core.services.invariants import dominant_attack_scenario, is_dominant_attack
from core.services.maps import generate_map, line_map
from core.services.opponents import DoNothingModel, MctsTreeModel
from core.services.search import (
    HIGHEST_SCORE, MctsConfig, MctsPlanner, RheaConfig, RheaPlanner, TreeNode, evaluate_plan, uct_value,
)


class UctTests(SimpleTestCase):

    def test_untried_actions_come_first(self):
        self.assertEqual(uct_value(5.0, 0, 10, 3.0), math.inf)

    def test_formula(self):
        self.assertAlmostEqual(uct_value(2.0, 4, 20, 3.0), 2.0 + 3.0 * math.sqrt(math.log(20) / 4))
        self.assertEqual(uct_value(2.0, 4, 20, 0.0), 2.0)

    def test_node_statistics(self):
        node = TreeNode('key', ['a', 'b'])
        rng = np.random.default_rng(0)
        first = node.select(3.0, rng)
        node.update(first, 10.0)
        self.assertEqual(node.select(3.0, rng), 1 - first)
        node.update(first, 20.0)
        self.assertEqual(node.values[first], 15.0)
        self.assertEqual((node.visits[first], node.total), (2, 2))


class ConfigTests(SimpleTestCase):

    def test_invalid_configs(self):
        for make in (
            lambda: MctsConfig(iterations=0),
            lambda: MctsConfig(discount=1.5),
            lambda: MctsConfig(final_selection='best'),
            lambda: RheaConfig(plan_length=0),
            lambda: RheaConfig(mutation_rate=0.0),
        ):
            with self.assertRaises(ConfigError):
                make()


class EvaluatePlanTests(SimpleTestCase):

    def test_waiting_plan_scores_the_discounted_position(self):
        state, _ = dominant_attack_scenario(seed=3)
        genome = Genome.from_string('0000' * 4, 4)
        config = RheaConfig(horizon_ticks=100)
        score = evaluate_plan(state, Side.BLUE, genome, DoNothingModel(), config)
        expected = material_score(state, Side.BLUE) * 0.999 ** 100
        self.assertAlmostEqual(score, expected)
        self.assertEqual(state.tick, 0)

    def test_horizon_is_capped_by_game_length(self):
        state, _ = dominant_attack_scenario(seed=3)
        state.params = GameParams(max_ticks=40)
        genome = Genome.from_string('0000', 1)
        score = evaluate_plan(state, Side.BLUE, genome, DoNothingModel(), RheaConfig(horizon_ticks=100))
        self.assertAlmostEqual(score, material_score(state, Side.BLUE) * 0.999 ** 40)


def blue_key_after(state, orders):
    """State key at Blue's next decision after playing `orders`, Red never acting."""
    sim = copy_state(state)
    pending = list(orders)
    while True:
        sim, request = advance(sim)
        if request.side == Side.BLUE:
            if not pending:
                return state_key(sim)
            issue_or_wait(sim, Side.BLUE, pending.pop(0))
        else:
            issue_or_wait(sim, request.side, WAIT_FOREVER)


class TranspositionTests(SimpleTestCase):

    def test_node_reached_by_two_orderings_is_shared(self):
        # 0 (Blue) -1- 1 (neutral) -50- 2 (Red); sending 30 then 20 or 20 then 30 ends in the same position
        params = GameParams(blue=SideParams(c2_min_delay=0), red=SideParams(c2_min_delay=0))
        state = create_state(line_map([1, 50]), params, 0, 2)
        thirty, twenty = LaunchExpedition(30.0, 0, 1), LaunchExpedition(20.0, 0, 1)
        merged = blue_key_after(state, [thirty, twenty])
        self.assertEqual(merged, blue_key_after(state, [twenty, thirty]))

        config = MctsConfig(iterations=60, exploration_c=1000.0, rollout_ticks=5)
        planner = MctsPlanner(Side.BLUE, config, DoNothingModel(), np.random.default_rng(0))
        with mock.patch('core.services.search.sample_distinct_actions', side_effect=lambda *a, **k: [thirty, twenty]):
            planner.decide(state)

        nodes = planner.tree.nodes
        via_thirty = nodes[blue_key_after(state, [thirty])].visits[1]
        via_twenty = nodes[blue_key_after(state, [twenty])].visits[0]
        self.assertGreater(nodes[merged].total, max(via_thirty, via_twenty))


class PlannerTests(SimpleTestCase):

    def setUp(self):
        graph = generate_map(np.random.default_rng(21), 10)
        self.state = create_state(graph, GameParams(), 0, 9)

    def test_mcts_is_reproducible(self):
        orders = [
            MctsPlanner(Side.BLUE, MctsConfig(iterations=20), None, np.random.default_rng(5)).decide(self.state)
            for _ in range(2)
        ]
        self.assertEqual(orders[0], orders[1])

    def test_rhea_is_reproducible(self):
        orders = [
            RheaPlanner(Side.RED, RheaConfig(iterations=20), None, np.random.default_rng(5)).decide(self.state)
            for _ in range(2)
        ]
        self.assertEqual(orders[0], orders[1])

    def test_planning_leaves_the_real_state_alone(self):
        before = (self.state.tick, list(self.state.garrison), list(self.state.expeditions))
        MctsPlanner(Side.BLUE, MctsConfig(iterations=10), None, np.random.default_rng(0)).decide(self.state)
        RheaPlanner(Side.BLUE, RheaConfig(iterations=10), None, np.random.default_rng(0)).decide(self.state)
        self.assertEqual(before, (self.state.tick, self.state.garrison, self.state.expeditions))

    def test_opponent_tree(self):
        planner = MctsPlanner(Side.BLUE, MctsConfig(iterations=30), MctsTreeModel(), np.random.default_rng(2))
        planner.decide(self.state)
        self.assertIsNotNone(planner.opponent_tree)
        self.assertEqual(len(planner.stats.tree_sizes), 2)
        self.assertGreater(len(planner.opponent_tree), 0)
        # each iteration adds at most one node per tree
        self.assertLessEqual(len(planner.tree), 31)

    def test_root_visits_match_iterations(self):
        planner = MctsPlanner(Side.BLUE, MctsConfig(iterations=40), None, np.random.default_rng(6))
        planner.decide(self.state)
        root = planner.tree.nodes[next(iter(planner.tree.nodes))]
        self.assertEqual(root.total, 40)
        self.assertEqual(sum(root.visits), 40)

    def test_highest_score_selection(self):
        config = MctsConfig(iterations=25, final_selection=HIGHEST_SCORE)
        planner = MctsPlanner(Side.BLUE, config, None, np.random.default_rng(1))
        planner.decide(self.state)
        root = planner.tree.nodes[next(iter(planner.tree.nodes))]
        self.assertEqual(planner.stats.best_value, max(q for q, n in zip(root.values, root.visits) if n))

    def test_rhea_never_gets_worse(self):
        planner = RheaPlanner(Side.BLUE, RheaConfig(iterations=30), None, np.random.default_rng(3))
        planner.decide(self.state)
        history = planner.best_history
        self.assertEqual(len(history), 30)
        self.assertTrue(all(b >= a for a, b in zip(history, history[1:])))

    def test_shift_buffer_reuses_the_plan(self):
        planner = RheaPlanner(Side.BLUE, RheaConfig(iterations=5, shift_buffer=True), None,
                              np.random.default_rng(3))
        planner.decide(self.state)
        previous = planner._previous
        planner.decide(self.state)
        self.assertEqual(len(planner._previous.digits), len(previous.digits))

    def test_time_budget_stops_early(self):
        config = MctsConfig(iterations=10 ** 6, time_budget_ms=5.0)
        planner = MctsPlanner(Side.BLUE, config, None, np.random.default_rng(0))
        planner.decide(self.state)
        self.assertLess(planner.stats.iterations, 10 ** 6)
        self.assertGreaterEqual(planner.stats.iterations, 1)


class DominantAttackTests(SimpleTestCase):
    """A weak enemy hub next to strong friendly leaves should be attacked at once."""

    def test_planners_find_the_winning_attack(self):
        for spec in ('RHEA', 'MCTS', 'MCTS+MCTS'):
            hits = 0
            for i in range(10):
                seed = derive_seed(0, i)
                state, red_force = dominant_attack_scenario(seed)
                agent = build_agent(spec, np.random.default_rng(seed))
                hits += is_dominant_attack(agent.decide(state, Side.BLUE), red_force)
            with self.subTest(spec):
                self.assertGreaterEqual(hits, 7)
