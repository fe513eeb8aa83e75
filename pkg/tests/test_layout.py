import math

import numpy as np
import pytest
from scipy.optimize import brentq

from concepteva.layout import (LayoutConfig, LayoutState, focus_on, focus_rank,
                               init_layout, relevance, run_layout)
from concepteva.ontology import CooccurrenceGraph


def graph_of(edges, extra_nodes=()):
    nodes = set(extra_nodes)
    for a, b in edges:
        nodes.update((a, b))
    return CooccurrenceGraph(nodes, edges)


def random_state(rng, ids):
    positions = {cid: (float(rng.uniform(0.05, 0.95)), float(rng.uniform(0.05, 0.95)))
                 for cid in ids}
    return LayoutState(positions=positions, anchors=dict(positions))


def unit(v):
    return v / np.linalg.norm(v)


class TestInitLayout:
    def test_single_concept_centered(self):
        state = init_layout({"a": (3.7, -1.2)})
        assert state.positions["a"] == (0.5, 0.5)

    def test_two_concepts_rescaled_to_margins(self):
        state = init_layout({"l": (-1.0, 0.3), "r": (1.0, 0.3)})
        assert state.positions["l"] == (0.05, 0.5)
        assert state.positions["r"] == (0.95, 0.5)

    def test_positions_equal_anchors(self):
        state = init_layout({"a": (0.0, 1.0), "b": (2.0, -1.0), "c": (1.0, 0.0)})
        assert state.positions == state.anchors
        assert state.iterations_run == 0

    def test_empty_projection_rejected(self):
        with pytest.raises(ValueError):
            init_layout({})

    def test_all_positions_inside_margin_box(self):
        rng = np.random.default_rng(4)
        coords = {f"c{i}": (float(rng.normal()), float(rng.normal())) for i in range(30)}
        state = init_layout(coords)
        for x, y in state.positions.values():
            assert 0.05 <= x <= 0.95
            assert 0.05 <= y <= 0.95


class TestRunLayout:
    def test_anchor_only_converges_to_anchors(self):
        anchors = {"a": (0.2, 0.3), "b": (0.7, 0.8)}
        start = {"a": (0.5, 0.5), "b": (0.5, 0.52)}
        cfg = LayoutConfig(attract_k=0.1, repulse_k=0.0, anchor_k=0.3,
                           step0=0.05, cooling=0.99, max_iters=3000, epsilon=1e-7)
        state = run_layout(LayoutState(positions=start, anchors=anchors),
                           graph_of({}), cfg)
        assert state.converged
        for cid, (x, y) in state.positions.items():
            assert x == pytest.approx(anchors[cid][0], abs=1e-5)
            assert y == pytest.approx(anchors[cid][1], abs=1e-5)

    def test_spring_only_equilibrium_at_rest_length(self):
        cfg = LayoutConfig(attract_k=0.5, repulse_k=0.0, anchor_k=0.0,
                           rest_length=0.2, step0=0.05, cooling=0.98,
                           max_iters=3000, epsilon=1e-7)
        start = {"a": (0.2, 0.5), "b": (0.8, 0.5)}
        state = run_layout(LayoutState(positions=start, anchors=start),
                           graph_of({("a", "b"): 1}), cfg)
        d = math.dist(state.positions["a"], state.positions["b"])
        assert state.converged
        assert abs(d - cfg.rest_length) <= 0.02 * cfg.rest_length

    def test_spring_plus_repulsion_matches_root_finding(self):
        cfg = LayoutConfig(attract_k=0.5, repulse_k=0.001, anchor_k=0.0,
                           rest_length=0.05, step0=0.05, cooling=0.98,
                           max_iters=5000, epsilon=1e-8)
        # equilibrium: attract_k*ln(2)*(d - L0) == repulse_k / d^2
        f = lambda d: cfg.attract_k * math.log(2) * (d - cfg.rest_length) - cfg.repulse_k / d**2
        root = brentq(f, cfg.rest_length + 1e-9, 1.4)
        start = {"a": (0.3, 0.5), "b": (0.7, 0.5)}
        state = run_layout(LayoutState(positions=start, anchors=start),
                           graph_of({("a", "b"): 1}), cfg)
        d = math.dist(state.positions["a"], state.positions["b"])
        assert state.converged
        assert abs(d - root) <= 0.02 * root

    def test_bitwise_determinism(self):
        rng = np.random.default_rng(11)
        ids = [f"c{i:02d}" for i in range(20)]
        init = random_state(rng, ids)
        edges = {(ids[i], ids[(i * 3 + 1) % 20]): (i % 4) + 1 for i in range(15)
                 if ids[i] != ids[(i * 3 + 1) % 20]}
        cfg = LayoutConfig(seed=5)
        a = run_layout(init, graph_of(edges), cfg)
        b = run_layout(init, graph_of(edges), cfg)
        assert a.positions == b.positions
        assert a.iterations_run == b.iterations_run

    def test_positions_stay_in_unit_square(self):
        rng = np.random.default_rng(3)
        ids = [f"c{i}" for i in range(12)]
        init = random_state(rng, ids)
        edges = {(ids[i], ids[j]): 2 for i in range(6) for j in (i + 6,)}
        state = run_layout(init, graph_of(edges), LayoutConfig(repulse_k=0.01))
        for x, y in state.positions.values():
            assert 0.0 <= x <= 1.0
            assert 0.0 <= y <= 1.0

    def test_coincident_points_are_separated(self):
        start = {"a": (0.5, 0.5), "b": (0.5, 0.5)}
        cfg = LayoutConfig(repulse_k=0.01, anchor_k=0.0)
        state = run_layout(LayoutState(positions=start, anchors=start),
                           graph_of({}, extra_nodes=("a", "b")), cfg)
        assert state.positions["a"] != state.positions["b"]

    def test_unknown_graph_node_rejected(self):
        start = {"a": (0.5, 0.5)}
        with pytest.raises(ValueError, match="ghost"):
            run_layout(LayoutState(positions=start, anchors=start),
                       graph_of({("a", "ghost"): 1}), LayoutConfig())

    def test_converged_flag_matches_epsilon(self):
        # One iteration only: displacement there is step-capped and large.
        start = {"a": (0.1, 0.5), "b": (0.9, 0.5)}
        cfg = LayoutConfig(attract_k=1.0, repulse_k=0.0, anchor_k=0.0,
                           rest_length=0.05, max_iters=1, epsilon=1e-9)
        state = run_layout(LayoutState(positions=start, anchors=start),
                           graph_of({("a", "b"): 3}), cfg)
        assert not state.converged
        assert state.iterations_run == 1


class TestRelevance:
    def test_focused_concept_is_one(self):
        assert relevance("a", {"a"}, {}, graph_of({}), 0.5) == 1.0

    def test_pure_semantic_perfect_match(self):
        e = unit(np.array([1.0, 2.0, 3.0]))
        emb = {"a": e, "b": e.copy()}
        assert relevance("a", {"b"}, emb, graph_of({}), 1.0) == pytest.approx(1.0)

    def test_blend_formula(self):
        # cosine(c, f) = 0.2 exactly; w(c,f)/w_max = 1/2
        emb = {"f": np.array([1.0, 0.0]),
               "c": np.array([0.2, math.sqrt(1 - 0.04)])}
        graph = graph_of({("c", "f"): 1, ("f", "g"): 2})
        value = relevance("c", {"f"}, emb, graph, 0.5)
        assert value == pytest.approx(0.5 * 0.6 + 0.5 * 0.5)

    def test_no_edges_drops_contextual_term(self):
        emb = {"c": np.array([1.0, 0.0]), "f": np.array([0.0, 1.0])}
        value = relevance("c", {"f"}, emb, graph_of({}), 0.5)
        assert value == pytest.approx(0.5 * 0.5)  # cos 0 -> 0.5 mapped

    def test_empty_focus_rejected(self):
        with pytest.raises(ValueError):
            relevance("a", set(), {}, graph_of({}), 0.5)

    def test_missing_embedding_rejected(self):
        with pytest.raises(ValueError, match="embedding"):
            relevance("c", {"f"}, {"f": np.array([1.0])}, graph_of({}), 0.5)

    def test_result_in_unit_interval(self):
        rng = np.random.default_rng(8)
        emb = {f"c{i}": unit(rng.normal(size=5)) for i in range(10)}
        graph = graph_of({(f"c{i}", f"c{i+1}"): i + 1 for i in range(9)})
        for i in range(10):
            value = relevance(f"c{i}", {"c0", "c5"}, emb, graph, 0.3)
            assert 0.0 <= value <= 1.0


class TestFocusOn:
    def _setup(self, seed=0, n=8):
        rng = np.random.default_rng(seed)
        ids = [f"c{i:02d}" for i in range(n)]
        state = random_state(rng, ids)
        emb = {cid: unit(rng.normal(size=6)) for cid in ids}
        edges = {}
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.3:
                    edges[(ids[i], ids[j])] = int(rng.integers(1, 5))
        return ids, state, emb, graph_of(edges, extra_nodes=ids)

    def test_single_focus_has_strictly_greatest_y(self):
        ids, state, emb, graph = self._setup()
        result = focus_on(state, {ids[2]}, emb, graph, LayoutConfig())
        focus_y = result.positions[ids[2]][1]
        for cid in ids:
            if cid != ids[2]:
                assert result.positions[cid][1] < focus_y

    def test_all_focused_all_on_top_x_unchanged(self):
        ids, state, emb, graph = self._setup(seed=2)
        result = focus_on(state, set(ids), emb, graph, LayoutConfig())
        for cid in ids:
            assert result.positions[cid][1] == 0.95
            assert result.positions[cid][0] == state.positions[cid][0]

    def test_x_exactly_preserved(self):
        ids, state, emb, graph = self._setup(seed=3)
        result = focus_on(state, {ids[0], ids[4]}, emb, graph, LayoutConfig())
        for cid in ids:
            assert result.positions[cid][0] == state.positions[cid][0]

    def test_non_focused_order_matches_brute_force_relevance(self):
        ids, state, emb, graph = self._setup(seed=4)
        cfg = LayoutConfig()
        focus = {ids[1], ids[6]}
        result = focus_on(state, focus, emb, graph, cfg)

        # independent relevance computation + documented tie-break
        scored = []
        w_max = graph.max_count()
        for cid in ids:
            if cid in focus:
                continue
            semantic = max((float(np.dot(emb[cid], emb[f])) + 1) / 2 for f in focus)
            contextual = (max(graph.count(cid, f) for f in focus) / w_max) if w_max else 0.0
            scored.append((cid, cfg.relevance_blend * semantic
                           + (1 - cfg.relevance_blend) * contextual))
        expected = [cid for cid, _ in sorted(scored, key=lambda t: (-t[1], t[0]))]

        got = sorted((cid for cid in ids if cid not in focus),
                     key=lambda cid: -result.positions[cid][1])
        assert got == expected

    def test_y_non_decreasing_in_relevance(self):
        ids, state, emb, graph = self._setup(seed=5)
        cfg = LayoutConfig()
        focus = {ids[0]}
        result = focus_on(state, focus, emb, graph, cfg)
        pairs = [(relevance(cid, focus, emb, graph, cfg.relevance_blend),
                  result.positions[cid][1])
                 for cid in ids if cid not in focus]
        pairs.sort()
        for (r1, y1), (r2, y2) in zip(pairs, pairs[1:]):
            if r2 > r1:
                assert y2 >= y1

    def test_mode_and_focus_set_recorded(self):
        ids, state, emb, graph = self._setup(seed=6)
        result = focus_on(state, {ids[3]}, emb, graph, LayoutConfig())
        assert result.mode == "focus"
        assert result.focus_set == frozenset({ids[3]})

    def test_empty_or_unknown_focus_rejected(self):
        ids, state, emb, graph = self._setup(seed=7)
        with pytest.raises(ValueError):
            focus_on(state, set(), emb, graph, LayoutConfig())
        with pytest.raises(ValueError, match="unknown"):
            focus_on(state, {"nope"}, emb, graph, LayoutConfig())

    def test_focus_rank_ties_break_by_id(self):
        ids = ["a", "b", "c", "f"]
        e = unit(np.array([1.0, 1.0]))
        emb = {cid: e.copy() for cid in ids}  # all identical -> identical relevance
        graph = graph_of({}, extra_nodes=ids)
        ranked = focus_rank(ids, {"f"}, emb, graph, 0.5)
        assert ranked == ["a", "b", "c"]
