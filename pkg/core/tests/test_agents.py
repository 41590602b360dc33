from collections import Counter

import numpy as np
from django.test import SimpleTestCase
from scipy.stats import chisquare

from core.services.actionspace import action_identity
from core.services.agents import (
    DoNothingAgent, HeuristicAgent, MctsAgent, RandomAgent, RheaAgent, build_agent, parse_agent_spec,
)
from core.services.engine import (
    WAIT_FOREVER, GameParams, GameTrace, Side, SideParams, advance, create_state, issue_or_wait, validate_order,
)
from core.services.exceptions import AgentSpecError
from core.services.heuristics import HeuristicParams
from core.services.maps import generate_map, line_map
from core.services.opponents import DoNothingModel, HeuristicModel, MctsTreeModel, RandomModel, random_decide
from core.services.search import MctsConfig, RheaConfig


class ParseAgentSpecTests(SimpleTestCase):

    def test_canonical_names(self):
        cases = {
            'none': 'NONE',
            'rnd': 'RND',
            'h3': 'H3',
            'rhea': 'RHEA',
            'mcts+h3': 'MCTS+H3',
            'MCTS+mcts': 'MCTS+MCTS',
            'RHEA+rnd': 'RHEA+RND',
            'H(3,0.5,W|A)': 'H(3,0.5,W|A)',
            'MCTS+H(10,1.0,RD|W|A|RF)': 'MCTS+H(10,1,RD|W|A|RF)',
        }
        for text, name in cases.items():
            with self.subTest(text):
                self.assertEqual(parse_agent_spec(text).text, name)

    def test_planner_fields(self):
        spec = parse_agent_spec('RHEA+H2')
        self.assertTrue(spec.is_planner)
        self.assertEqual((spec.kind, spec.model), ('RHEA', 'H2'))
        self.assertEqual(spec.model_heuristic.offence, 10.0)

    def test_rejected_specs(self):
        for text in ('', 'RHEA+MCTS', 'H3+RND', 'XYZ', 'MCTS+H9', 'H(0.2,1,A)', 'H(3,1,Q)'):
            with self.subTest(text):
                with self.assertRaises(AgentSpecError):
                    parse_agent_spec(text)

    def test_custom_roster(self):
        roster = {'HX': HeuristicParams.from_values(2.0, 1.0, 'A,W')}
        self.assertEqual(parse_agent_spec('RHEA+HX', roster).model_heuristic, roster['HX'])
        with self.assertRaises(AgentSpecError):
            parse_agent_spec('H3', roster)

    def test_opponent_models(self):
        self.assertIsInstance(parse_agent_spec('RHEA').opponent_model(), DoNothingModel)
        self.assertIsInstance(parse_agent_spec('RHEA+NONE').opponent_model(), DoNothingModel)
        self.assertIsInstance(parse_agent_spec('MCTS+RND').opponent_model(), RandomModel)
        self.assertIsInstance(parse_agent_spec('MCTS+MCTS').opponent_model(), MctsTreeModel)
        model = parse_agent_spec('MCTS+H1').opponent_model()
        self.assertIsInstance(model, HeuristicModel)
        self.assertEqual(str(model), 'H1')


class BuildAgentTests(SimpleTestCase):

    def setUp(self):
        graph = generate_map(np.random.default_rng(2), 8)
        self.state = create_state(graph, GameParams(), 0, 7)

    def test_agent_classes(self):
        rng = np.random.default_rng(0)
        self.assertIsInstance(build_agent('NONE', rng), DoNothingAgent)
        self.assertIsInstance(build_agent('RND', rng), RandomAgent)
        self.assertIsInstance(build_agent('H4', rng), HeuristicAgent)
        self.assertIsInstance(build_agent('MCTS+H4', rng), MctsAgent)
        self.assertIsInstance(build_agent('RHEA', rng), RheaAgent)

    def test_do_nothing_waits_forever(self):
        agent = build_agent('NONE', np.random.default_rng(0))
        self.assertEqual(agent.decide(self.state, Side.RED), WAIT_FOREVER)

    def test_scripted_agents_issue_legal_orders(self):
        for spec in ('RND', 'H0', 'H1', 'H5'):
            with self.subTest(spec):
                agent = build_agent(spec, np.random.default_rng(1))
                validate_order(self.state, Side.BLUE, agent.decide(self.state, Side.BLUE))

    def test_planner_reports_search_stats(self):
        rng = np.random.default_rng(4)
        agent = build_agent('MCTS', rng, mcts=MctsConfig(iterations=12))
        order = agent.decide(self.state, Side.BLUE)
        validate_order(self.state, Side.BLUE, order)
        self.assertEqual(agent.last_stats.iterations, 12)
        self.assertGreater(agent.last_stats.events, 0)

        agent = build_agent('RHEA', rng, rhea=RheaConfig(iterations=7))
        agent.decide(self.state, Side.RED)
        self.assertEqual(agent.last_stats.iterations, 7)

    def test_planner_keeps_one_planner_per_side(self):
        agent = build_agent('RHEA', np.random.default_rng(0), rhea=RheaConfig(iterations=3))
        self.assertIs(agent.planner(Side.BLUE), agent.planner(Side.BLUE))
        self.assertIsNot(agent.planner(Side.BLUE), agent.planner(Side.RED))


class OpponentModelTests(SimpleTestCase):

    def test_random_choice_is_uniform_over_distinct_actions(self):
        # two nodes, one arc: ten launch sizes plus the Wait, all waits raised to 100 ticks
        params = GameParams(blue=SideParams(c2_min_delay=100))
        state = create_state(line_map([3]), params, 0, 1)
        rng = np.random.default_rng(21)
        counts = Counter(action_identity(random_decide(state, Side.BLUE, rng, k=11)) for _ in range(5500))
        self.assertEqual(len(counts), 11)
        self.assertGreater(chisquare(list(counts.values())).pvalue, 0.001)

    def test_do_nothing_model_never_launches(self):
        rng = np.random.default_rng(5)
        graph = generate_map(rng, 9)
        state = create_state(graph, GameParams(), 0, 8)
        state.trace = GameTrace()
        model = DoNothingModel()
        while True:
            state, request = advance(state)
            if not request.is_decision:
                break
            if request.side == Side.RED:
                issue_or_wait(state, Side.RED, model.decide(state, Side.RED, rng))
            else:
                issue_or_wait(state, Side.BLUE, random_decide(state, Side.BLUE, rng))
            self.assertFalse([e for e in state.expeditions if e.side == Side.RED])
        red_orders = state.trace.orders(Side.RED)
        self.assertTrue(red_orders)
        self.assertEqual({e.event_type for e in red_orders}, {'wait'})
