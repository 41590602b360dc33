import numpy as np
from django.test import SimpleTestCase

from core.services.actionspace import (
    Genome, action_identity, arc_width, block_length, decode_action, decode_genome, mutate_genome,
    random_genome, sample_distinct_actions, source_width,
)
from core.services.engine import (
    GameParams, LaunchExpedition, Side, SideParams, Wait, create_state, validate_order,
)
from core.services.maps import ArcSpec, MapGraph, NodeSpec, generate_map, line_map


def c2_five():
    return GameParams(blue=SideParams(c2_min_delay=5), red=SideParams(c2_min_delay=5))


def star_map(leaves):
    nodes = [NodeSpec(i, 0.05 * i, 0.5) for i in range(leaves + 1)]
    return MapGraph(nodes, [ArcSpec(0, i, 3) for i in range(1, leaves + 1)])


class BlockLayoutTests(SimpleTestCase):

    def test_small_map_uses_four_digits(self):
        graph = line_map([2] * 9)
        self.assertEqual(graph.node_count, 10)
        self.assertEqual((source_width(graph), arc_width(graph), block_length(graph)), (1, 1, 4))

    def test_large_star_uses_wide_fields(self):
        graph = star_map(12)
        self.assertEqual(source_width(graph), 2)
        self.assertEqual(arc_width(graph), 2)
        self.assertEqual(block_length(graph), 6)


class DecodeTests(SimpleTestCase):

    def setUp(self):
        # nodes 0-1-2-3 in a row, Blue on 2, Red on 0
        self.state = create_state(line_map([3, 3, 3]), c2_five(), 2, 0)

    def test_full_launch_with_squared_wait(self):
        decoded = decode_action([2, 0, 9, 3], 0, self.state, Side.BLUE)
        self.assertEqual(decoded.order, LaunchExpedition(100.0, 2, 1, 9))
        self.assertEqual((decoded.wait_after, decoded.consumed), (9, 4))

    def test_arc_digit_wraps(self):
        order = decode_action([2, 3, 9, 0], 0, self.state, Side.BLUE).order
        self.assertEqual(order.target, 3)

    def test_proportion_steps_of_ten_percent(self):
        order = decode_action([2, 0, 4, 0], 0, self.state, Side.BLUE).order
        self.assertAlmostEqual(order.size, 50.0)
        order = decode_action([2, 0, 0, 0], 0, self.state, Side.BLUE).order
        self.assertAlmostEqual(order.size, 10.0)

    def test_wait_raised_to_c2_minimum(self):
        order = decode_action([2, 0, 9, 1], 0, self.state, Side.BLUE).order
        self.assertEqual(order.wait_after, 5)

    def test_unowned_source_decodes_to_wait(self):
        decoded = decode_action([0, 0, 4, 1], 0, self.state, Side.BLUE)
        self.assertEqual(decoded.order, Wait(5))
        decoded = decode_action([7, 0, 4, 4], 0, self.state, Side.BLUE)
        self.assertEqual(decoded.order, Wait(16))

    def test_empty_source_decodes_to_wait(self):
        self.state.garrison[2] = 0.0
        self.assertIsInstance(decode_action([2, 0, 9, 0], 0, self.state, Side.BLUE).order, Wait)

    def test_static_decode_of_a_genome(self):
        genome = Genome.from_string('20930041', 2)
        plan = decode_genome(genome, self.state, Side.BLUE)
        self.assertEqual(len(plan), 2)
        self.assertEqual(plan.steps[0], (LaunchExpedition(100.0, 2, 1, 9), 9))
        self.assertEqual(plan.steps[1], (Wait(5), 5))


class GenomeTests(SimpleTestCase):

    def test_random_genome_length(self):
        graph = line_map([2, 2, 2])
        genome = random_genome(np.random.default_rng(0), 4, graph)
        self.assertEqual(len(genome.digits), 16)
        self.assertTrue(all(0 <= d <= 9 for d in genome.digits))

    def test_mutation_always_changes_something(self):
        genome = Genome.from_string('0' * 16, 4)
        child = mutate_genome(genome, 0.0, np.random.default_rng(3))
        self.assertEqual(sum(a != b for a, b in zip(genome.digits, child.digits)), 1)
        self.assertEqual(child.actions, 4)

    def test_mutation_rate_validated(self):
        with self.assertRaises(ValueError):
            mutate_genome(Genome.from_string('1234', 1), 1.5, np.random.default_rng(0))

    def test_shift_drops_first_action(self):
        genome = Genome.from_string('12345678', 2)
        shifted = genome.shifted(np.random.default_rng(1), 4)
        self.assertEqual(str(shifted)[:4], '5678')
        self.assertEqual(len(shifted.digits), 8)


class SampleActionsTests(SimpleTestCase):

    def test_sampled_actions_are_distinct_and_legal(self):
        rng = np.random.default_rng(8)
        graph = generate_map(rng, 9)
        state = create_state(graph, GameParams(), 0, 5)
        actions = sample_distinct_actions(state, Side.BLUE, 20, rng)
        self.assertLessEqual(len(actions), 20)
        identities = [action_identity(a) for a in actions]
        self.assertEqual(len(identities), len(set(identities)))
        for order in actions:
            validate_order(state, Side.BLUE, order)

    def test_side_without_force_only_waits(self):
        state = create_state(line_map([3, 3]), GameParams(), 0, 2)
        state.garrison[0] = 0.0
        actions = sample_distinct_actions(state, Side.BLUE, 20, np.random.default_rng(0))
        self.assertEqual(len(actions), 1)
        self.assertIsInstance(actions[0], Wait)

    def test_k_must_be_positive(self):
        state = create_state(line_map([3]), GameParams(), 0, 1)
        with self.assertRaises(ValueError):
            sample_distinct_actions(state, Side.BLUE, 0, np.random.default_rng(0))

    def test_stop_after_ends_the_draw_early(self):
        rng = np.random.default_rng(4)
        state = create_state(generate_map(rng, 10), GameParams(), 0, 9)
        for wanted in (1, 3, 7):
            actions = sample_distinct_actions(state, Side.BLUE, 20, rng, stop_after=wanted)
            self.assertEqual(len(actions), wanted)

    def test_unusable_sources_make_the_wait(self):
        # one Blue node among ten: most blocks decode to a Wait
        rng = np.random.default_rng(6)
        state = create_state(generate_map(rng, 10), GameParams(), 0, 9)
        actions = sample_distinct_actions(state, Side.BLUE, 20, rng)
        self.assertEqual(len(actions), 20)
        waits = [a for a in actions if isinstance(a, Wait)]
        self.assertEqual(len(waits), 1)
        self.assertIn(waits[0].ticks, [max(d * d, 10) for d in range(10)])
        self.assertTrue(all(a.source == 0 for a in actions if isinstance(a, LaunchExpedition)))


class MutationRateTests(SimpleTestCase):

    def test_half_rate_changes_about_seven_digits(self):
        # 16 digits x 0.5 redraw x 0.9 chance the redraw differs
        rng = np.random.default_rng(12)
        parent = random_genome(rng, 4, line_map([2, 2, 2]))
        changed = [
            sum(a != b for a, b in zip(parent.digits, mutate_genome(parent, 0.5, rng).digits))
            for _ in range(2000)
        ]
        self.assertAlmostEqual(np.mean(changed), 7.2, delta=0.2)
