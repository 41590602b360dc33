import math

import numpy as np
from django.test import SimpleTestCase

from core.services.engine import (
    WAIT_FOREVER, Expedition, GameParams, GameTrace, LaunchExpedition, RequestKind, Side, SideParams,
    Wait, Winner, advance, copy_state, create_state, issue_or_wait, issue_order, material_score,
    meeting_tick, resolve_lanchester, state_key, winner_of,
)
from core.services.exceptions import ConfigError, OrderError, StateError
from core.services.maps import generate_map, line_map
from core.services.opponents import random_decide


def two_sides(lengths, params=None, blue=0, red=None):
    map_graph = line_map(lengths)
    red = map_graph.node_count - 1 if red is None else red
    return create_state(map_graph, params or GameParams(), blue, red)


class CreateStateTests(SimpleTestCase):

    def test_opening_position(self):
        state = two_sides([3, 3])
        self.assertEqual(state.owner, [Side.BLUE, -1, Side.RED])
        self.assertEqual(state.garrison, [100.0, 0.0, 100.0])
        self.assertEqual(material_score(state, Side.BLUE), 0.0)

    def test_same_start_rejected(self):
        with self.assertRaises(StateError):
            create_state(line_map([3]), GameParams(), 0, 0)

    def test_unknown_start_rejected(self):
        with self.assertRaises(StateError):
            create_state(line_map([3]), GameParams(), 0, 5)

    def test_bad_params_rejected(self):
        with self.assertRaises(ConfigError):
            SideParams(speed=0)
        with self.assertRaises(ConfigError):
            GameParams(max_ticks=0)


class LanchesterTests(SimpleTestCase):

    def test_square_law_survivors(self):
        winner, survivors = resolve_lanchester(100.0, 50.0, 1.0, 1.0)
        self.assertEqual(winner, 'A')
        self.assertAlmostEqual(survivors, math.sqrt(7500.0))

    def test_coefficients_tip_the_balance(self):
        winner, survivors = resolve_lanchester(100.0, 80.0, 1.0, 2.0)
        self.assertEqual(winner, 'B')
        self.assertAlmostEqual(survivors, math.sqrt(6400.0 - 10000.0 / 2.0))

    def test_exact_draw(self):
        self.assertEqual(resolve_lanchester(60.0, 60.0, 1.0, 1.0), ('draw', 0.0))


class OrderTests(SimpleTestCase):

    def test_decisions_come_blue_first(self):
        state = two_sides([3, 3])
        state, request = advance(state)
        self.assertEqual(request.kind, RequestKind.DECIDE)
        self.assertEqual((request.tick, request.side), (0, Side.BLUE))

    def test_c2_delay_blocks_second_order(self):
        state = two_sides([3, 3])
        issue_order(state, Side.BLUE, LaunchExpedition(40.0, 0, 1))
        self.assertEqual(state.next_order_tick[Side.BLUE], 10)
        with self.assertRaises(OrderError) as ctx:
            issue_order(state, Side.BLUE, Wait(5))
        self.assertEqual(ctx.exception.code, OrderError.C2_VIOLATION)
        self.assertIsNone(issue_or_wait(state, Side.BLUE, Wait(5)))

    def test_rejection_codes(self):
        state = two_sides([3, 3])
        cases = [
            (LaunchExpedition(10.0, 2, 1), OrderError.UNOWNED_SOURCE),
            (LaunchExpedition(10.0, 0, 2), OrderError.NOT_ADJACENT),
            (LaunchExpedition(500.0, 0, 1), OrderError.INSUFFICIENT_FORCE),
            (Wait(0), OrderError.INVALID_ORDER),
        ]
        for order, code in cases:
            with self.subTest(order=str(order)):
                with self.assertRaises(OrderError) as ctx:
                    issue_order(state, Side.BLUE, order)
                self.assertEqual(ctx.exception.code, code)

    def test_invalid_order_becomes_wait(self):
        state = two_sides([3, 3])
        issued = issue_or_wait(state, Side.BLUE, LaunchExpedition(10.0, 2, 1))
        self.assertEqual(issued, Wait(1))
        self.assertEqual(state.wake_tick[Side.BLUE], 10)

    def test_launch_wakes_a_waiting_opponent(self):
        state = two_sides([3, 3], GameParams(blue=SideParams(c2_min_delay=0)))
        state, _ = advance(state)
        issue_order(state, Side.BLUE, Wait(50))
        state, request = advance(state)
        self.assertEqual(request.side, Side.RED)
        issue_order(state, Side.RED, LaunchExpedition(30.0, 2, 1))
        # Blue already decided at tick 0, so the earliest it can wake is tick 1
        self.assertEqual(state.wake_tick[Side.BLUE], 1)


class AdvanceTests(SimpleTestCase):

    def test_capture_of_neutral_node(self):
        state = two_sides([3, 3])
        state, _ = advance(state)
        issue_order(state, Side.BLUE, LaunchExpedition(40.0, 0, 1))
        state, request = advance(state)
        self.assertEqual(request.side, Side.RED)
        issue_order(state, Side.RED, WAIT_FOREVER)

        state, request = advance(state)
        self.assertEqual((request.kind, request.tick, request.side), (RequestKind.DECIDE, 10, Side.BLUE))
        self.assertEqual(state.owner[1], Side.BLUE)
        self.assertEqual(state.garrison[0], 60.0)
        self.assertEqual(state.garrison[1], 40.0)

    def test_node_battle_ends_the_game(self):
        state = two_sides([2])
        state.garrison[1] = 60.0
        state, _ = advance(state)
        issue_order(state, Side.BLUE, LaunchExpedition(100.0, 0, 1))
        state, _ = advance(state)
        issue_order(state, Side.RED, WAIT_FOREVER)

        state, request = advance(state)
        self.assertEqual((request.kind, request.tick), (RequestKind.TERMINAL, 2))
        self.assertEqual(state.owner[1], Side.BLUE)
        self.assertAlmostEqual(state.garrison[1], 80.0)
        self.assertEqual(winner_of(state), Winner.BLUE)
        self.assertAlmostEqual(material_score(state, Side.BLUE), 90.0)

    def test_forces_meet_on_the_arc(self):
        state = two_sides([10])
        state.trace = GameTrace()
        state, _ = advance(state)
        issue_order(state, Side.BLUE, LaunchExpedition(100.0, 0, 1))
        state, _ = advance(state)
        issue_order(state, Side.RED, LaunchExpedition(60.0, 1, 0))

        state, request = advance(state)
        self.assertEqual(request.kind, RequestKind.TERMINAL)
        types = [e.event_type for e in state.trace.events]
        self.assertEqual(types, ['launch', 'launch', 'battle_arc', 'battle_node'])
        arc_battle = state.trace.events[2]
        self.assertEqual(arc_battle.tick, 5)
        self.assertEqual(arc_battle.side, 'BLUE')
        self.assertAlmostEqual(arc_battle.survivors, 80.0)
        self.assertEqual(winner_of(state), Winner.BLUE)

    def test_meeting_tick(self):
        blue = Expedition(0, 10.0, 0, 1, depart=0, arrive=10, seq=0)
        red = Expedition(1, 10.0, 1, 0, depart=0, arrive=10, seq=1)
        self.assertEqual(meeting_tick(blue, red), 5)
        late = Expedition(1, 10.0, 1, 0, depart=8, arrive=18, seq=2)
        self.assertEqual(meeting_tick(blue, late), 9)
        same_way = Expedition(1, 10.0, 0, 1, depart=0, arrive=10, seq=3)
        self.assertIsNone(meeting_tick(blue, same_way))

    def test_forces_on_different_arcs_do_not_meet(self):
        state = two_sides([10, 10])
        state.trace = GameTrace()
        state, _ = advance(state)
        issue_order(state, Side.BLUE, LaunchExpedition(100.0, 0, 1))
        state, _ = advance(state)
        issue_order(state, Side.RED, LaunchExpedition(60.0, 2, 1))
        advance(state)
        self.assertNotIn('battle_arc', [e.event_type for e in state.trace.events])

    def test_no_arc_battles_when_disabled(self):
        state = two_sides([10], GameParams(arc_battles=False))
        state.trace = GameTrace()
        state, _ = advance(state)
        issue_order(state, Side.BLUE, LaunchExpedition(100.0, 0, 1))
        state, _ = advance(state)
        issue_order(state, Side.RED, LaunchExpedition(60.0, 1, 0))
        advance(state)
        self.assertNotIn('battle_arc', [e.event_type for e in state.trace.events])

    def test_horizon_stops_the_clock(self):
        state = two_sides([50])
        state, _ = advance(state)
        issue_order(state, Side.BLUE, LaunchExpedition(10.0, 0, 1))
        state, _ = advance(state)
        issue_order(state, Side.RED, WAIT_FOREVER)
        state, request = advance(state, limit=5)
        self.assertEqual((request.kind, request.tick), (RequestKind.HORIZON, 5))

    def test_game_ends_at_max_ticks(self):
        state = two_sides([5], GameParams(max_ticks=30))
        for _ in range(2):
            state, request = advance(state)
            issue_order(state, request.side, WAIT_FOREVER)
        state, request = advance(state)
        self.assertEqual((request.kind, request.tick), (RequestKind.TERMINAL, 30))
        self.assertEqual(winner_of(state), Winner.DRAW)

    def test_time_skips_to_events(self):
        state = two_sides([40])
        state, _ = advance(state)
        issue_order(state, Side.BLUE, LaunchExpedition(10.0, 0, 1))
        state, _ = advance(state)
        issue_order(state, Side.RED, WAIT_FOREVER)
        state, request = advance(state)
        self.assertEqual(request.tick, 10)
        self.assertEqual(state.events, 1)


class CopyStateTests(SimpleTestCase):

    def test_clone_is_independent(self):
        state = two_sides([3, 3])
        issue_order(state, Side.BLUE, LaunchExpedition(40.0, 0, 1))
        clone = copy_state(state)
        self.assertEqual(state_key(clone), state_key(state))

        clone.garrison[0] = 1.0
        issue_order(clone, Side.RED, LaunchExpedition(5.0, 2, 1))
        self.assertEqual(state.garrison[0], 60.0)
        self.assertEqual(len(state.expeditions), 1)
        self.assertNotEqual(state_key(clone), state_key(state))

    def test_key_ignores_absolute_time(self):
        a = two_sides([3, 3], GameParams(blue=SideParams(c2_min_delay=0), red=SideParams(c2_min_delay=0)))
        b = copy_state(a)
        b.tick = 7
        b.wake_tick = [7, 7]
        b.next_order_tick = [7, 7]
        self.assertEqual(state_key(a), state_key(b))

    def test_order_of_same_tick_launches_does_not_matter(self):
        params = GameParams(blue=SideParams(c2_min_delay=0), red=SideParams(c2_min_delay=0))
        keys = []
        for sizes in ((30.0, 20.0), (20.0, 30.0)):
            state = two_sides([3, 3], params)
            for size in sizes:
                issue_order(state, Side.BLUE, LaunchExpedition(size, 0, 1))
            keys.append(state_key(state))
        self.assertEqual(keys[0], keys[1])


class MaterialScoreTests(SimpleTestCase):

    def test_antisymmetric_in_random_mid_game_states(self):
        rng = np.random.default_rng(17)
        for game in range(5):
            state = create_state(generate_map(rng), GameParams(), 0, 7)
            for _ in range(40):
                state, request = advance(state)
                if not request.is_decision:
                    break
                issue_or_wait(state, request.side, random_decide(state, request.side, rng))
                self.assertAlmostEqual(material_score(state, Side.BLUE), -material_score(state, Side.RED))
