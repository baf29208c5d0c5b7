import numpy as np
import pytest

from experiential.decision_policy import PolicyConfig, candidate_transitions, random_action, select_action
from experiential.exceptions import ContractViolation
from experiential.state_space import EncodingConfig, SequenceKey, StateVector, flatten
from experiential.transition_graph import TransitionGraph

from .conftest import brute_cosine, build_graph, random_key, random_state

KEY = [[1, 2, 0, 0, 0], [2, 2, 0, 0, 1]]
HISTORY = (StateVector((1, 2), (0, 0), 0), StateVector((2, 2), (0, 0), 1))


def graph_with(*transitions):
    return build_graph([(KEY, list(transitions))])


def test_highest_utility_wins():
    graph = graph_with(([3, 2, 0, 0, 3], 5, 5), ([3, 2, 0, 0, 2], 3, 10))
    action, trace = select_action(graph, HISTORY, PolicyConfig(), np.random.default_rng(0))
    assert action == 3
    assert trace.mode == "exact"
    assert trace.chosen.utility == 5
    assert len(trace.candidates) == 2


def test_combined_utility_weighs_in_evidence():
    graph = graph_with(([3, 2, 0, 0, 3], 5, 5), ([3, 2, 0, 0, 2], 3, 10))
    action, trace = select_action(graph, HISTORY, PolicyConfig(cu=True), np.random.default_rng(0))
    assert action == 2
    assert trace.chosen.score == 30


def test_transition_count_threshold_filters_candidates():
    graph = graph_with(([3, 2, 0, 0, 3], 5, 5), ([3, 2, 0, 0, 2], 3, 10))
    action, _ = select_action(graph, HISTORY, PolicyConfig(tc=6), np.random.default_rng(0))
    assert action == 2


def test_everything_filtered_falls_back_to_random_but_keeps_the_match():
    graph = graph_with(([3, 2, 0, 0, 3], 5, 5), ([3, 2, 0, 0, 2], 3, 10))
    action, trace = select_action(graph, HISTORY, PolicyConfig(tu=6), np.random.default_rng(0))
    assert trace.mode == "random"
    assert trace.matched_key == tuple(tuple(v) for v in KEY)
    assert trace.chosen is None
    assert 0 <= action < 4


def test_negative_utility_is_filtered_by_default():
    graph = graph_with(([3, 2, 0, 1, 3], -4, 4))
    _, trace = select_action(graph, HISTORY, PolicyConfig(), np.random.default_rng(0))
    assert trace.mode == "random"


def test_unset_utility_threshold_keeps_negative_transitions():
    graph = graph_with(([3, 2, 0, 1, 3], -4, 4), ([3, 2, 0, 1, 1], -1, 1))
    action, trace = select_action(graph, HISTORY, PolicyConfig(tu=None), np.random.default_rng(0))
    assert trace.mode == "exact"
    assert action == 1


def test_equal_utility_prefers_more_evidence():
    graph = graph_with(([3, 2, 0, 0, 3], 2, 2), ([3, 2, 0, 0, 2], 2, 6))
    action, _ = select_action(graph, HISTORY, PolicyConfig(), np.random.default_rng(0))
    assert action == 2


def test_full_tie_prefers_lower_action_id():
    graph = graph_with(([3, 2, 0, 0, 3], 2, 2), ([3, 2, 0, 0, 1], 2, 2))
    for seed in range(5):
        action, _ = select_action(graph, HISTORY, PolicyConfig(), np.random.default_rng(seed))
        assert action == 1


def test_similar_key_is_used_when_no_exact_match():
    graph = graph_with(([3, 2, 0, 0, 3], 5, 5))
    history = (StateVector((1, 2), (0, 0), 0), StateVector((3, 2), (0, 0), 1))
    action, trace = select_action(graph, history, PolicyConfig(ss=0.9), np.random.default_rng(0))
    assert trace.mode == "similar"
    assert action == 3
    assert 0.9 <= trace.similarity <= 1.0


def test_dissimilar_key_falls_back_to_random():
    graph = graph_with(([3, 2, 0, 0, 3], 5, 5))
    history = (StateVector((60, 2), (0, 1), 3), StateVector((0, 70), (1, 0), 2))
    _, trace = select_action(graph, history, PolicyConfig(ss=0.999), np.random.default_rng(0))
    assert trace.mode == "random"
    assert trace.matched_key is None


def test_inexperienced_key_is_not_used():
    graph = graph_with(([3, 2, 0, 0, 3], 1, 1))
    _, trace = select_action(graph, HISTORY, PolicyConfig(sc=2), np.random.default_rng(0))
    assert trace.mode == "random"


def test_short_history_falls_back_to_random(encoding):
    action, trace = select_action(TransitionGraph(encoding), HISTORY[:1], PolicyConfig(cs=2),
                                  np.random.default_rng(0))
    assert trace.mode == "random"
    assert 0 <= action < 4


def test_random_fallback_is_reproducible(encoding):
    graph = TransitionGraph(encoding)
    rng = np.random.default_rng(11)
    first = [select_action(graph, HISTORY, PolicyConfig(), rng)[0] for _ in range(50)]
    rng = np.random.default_rng(11)
    second = [select_action(graph, HISTORY, PolicyConfig(), rng)[0] for _ in range(50)]
    assert first == second
    assert set(first) <= {0, 1, 2, 3}


def test_random_action_covers_every_action():
    rng = np.random.default_rng(3)
    assert {random_action(rng) for _ in range(200)} == {0, 1, 2, 3}


def test_candidate_transitions_without_match(encoding):
    key = SequenceKey(HISTORY)
    assert candidate_transitions(TransitionGraph(encoding), key, PolicyConfig()) is None


def test_policy_rejects_zero_transition_count():
    with pytest.raises(ContractViolation):
        PolicyConfig(tc=0)


def test_trace_record_lists_every_candidate(encoding):
    graph = graph_with(([3, 2, 0, 0, 3], 5, 5), ([3, 2, 0, 0, 2], 3, 10))
    _, trace = select_action(graph, HISTORY, PolicyConfig(), np.random.default_rng(0))
    record = trace.to_record(7, encoding, game=4)
    assert (record.game, record.step, record.mode) == (4, 7, "exact")
    assert record.chosen == [3, 2, 0, 0, 3]
    assert record.matched_key == KEY
    assert [(c.U, c.C) for c in record.candidates] == [(5, 5), (3, 10)]


def test_trace_record_of_a_random_decision(encoding):
    _, trace = select_action(TransitionGraph(encoding), HISTORY, PolicyConfig(), np.random.default_rng(0))
    record = trace.to_record(0, encoding)
    assert record.mode == "random"
    assert (record.matched_key, record.similarity, record.chosen) == (None, None, None)
    assert record.candidates == []


def test_exact_key_below_state_count_defers_to_a_similar_key():
    encoding = EncodingConfig(sr=False, n_features=1)
    graph = build_graph([
        ([[1, 0]], [([3, 1], 1, 1)]),
        ([[5, 2]], [([4, 3], 2, 2)]),
    ], encoding)
    history = (StateVector((1,), (0, 0), 0),)
    action, trace = select_action(graph, history, PolicyConfig(cs=1, ss=0.9, sc=2), np.random.default_rng(0))
    assert trace.mode == "similar"
    assert action == 3
    assert trace.matched_key == ((5, 2),)
    assert trace.similarity == pytest.approx(5 / 29 ** 0.5, abs=1e-12)


@pytest.mark.parametrize("cu", [False, True])
def test_scaling_utilities_keeps_the_choice(rnd, cu):
    config = PolicyConfig(sc=1, tu=None, cu=cu)
    for _ in range(200):
        transitions = [([i, 2, 0, 0, rnd.randrange(4)], rnd.randrange(-5, 6), rnd.randrange(1, 7))
                       for i in range(rnd.randrange(1, 6))]
        _, base = select_action(build_graph([(KEY, transitions)]), HISTORY, config, np.random.default_rng(0))
        for k in (2, 3, 7):
            scaled = [(successor, utility * k, count) for successor, utility, count in transitions]
            _, trace = select_action(build_graph([(KEY, scaled)]), HISTORY, config, np.random.default_rng(0))
            assert trace.chosen.successor == base.chosen.successor


def expected_decision(graph, history, config):
    """Exhaustive re-derivation of (mode, action); None when a near-tie leaves it ambiguous"""
    query = SequenceKey(tuple(history[-config.cs:])).encoded(graph.encoding)
    entries = list(graph.entries())
    exact = [transitions for key, count, transitions in entries if key == query and count >= config.sc]
    if exact:
        mode, transitions = "exact", exact[0]
    else:
        scored = [(brute_cosine(flatten(query), flatten(key)), transitions)
                  for key, count, transitions in entries if count >= config.sc]
        if not scored:
            return "random", None
        best = max(s for s, _ in scored)
        if abs(best - config.ss) < 1e-9 or sum(abs(s - best) < 1e-9 for s, _ in scored) > 1:
            return None
        if best < config.ss:
            return "random", None
        mode, transitions = "similar", next(t for s, t in scored if s == best)

    kept = [(vector, u, c) for vector, u, c in transitions
            if (config.tu is None or u >= config.tu) and c >= config.tc]
    if not kept:
        return "random", None
    vector, _, _ = max(kept, key=lambda t: (t[1] * t[2] if config.cu else t[1], t[2], -t[0][-1]))
    return mode, vector[-1]


def test_select_action_agrees_with_exhaustive_search(rnd, encoding):
    modes = set()
    for _ in range(20):
        graph = TransitionGraph(encoding)
        keys = []
        for _ in range(rnd.randrange(0, 1001)):
            key = random_key(rnd, feature_range=3)
            keys.append(key)
            for _ in range(rnd.randrange(1, 4)):
                graph.record_transition(key, random_state(rnd, 3), rnd.choice([1, -1]))
        for _ in range(10):
            key = rnd.choice(keys) if keys and rnd.random() < 0.5 else random_key(rnd, feature_range=3)
            config = PolicyConfig(ss=rnd.choice([0.5, 0.9, 0.99]), sc=rnd.choice([1, 2, 3]),
                                  tu=rnd.choice([None, 0, 1]), tc=rnd.choice([1, 2]), cu=rnd.random() < 0.5)
            expected = expected_decision(graph, key.states, config)
            if expected is None:
                continue
            action, trace = select_action(graph, key.states, config, np.random.default_rng(0))
            assert trace.mode == expected[0]
            if expected[1] is not None:
                assert action == expected[1]
            modes.add(trace.mode)
    assert modes >= {"exact", "similar"}
