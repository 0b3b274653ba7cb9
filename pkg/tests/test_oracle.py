import math

import numpy as np
import pytest

from conftest import (
    pingpong_scenario,
    pingpong_sizes,
    random_scenario,
    random_sizes,
    random_structure,
    uniform_sizes,
)
from navstream.costs import Structure, all_i_structure
from navstream.errors import (
    InvalidInputError,
    OracleRefusalError,
    PolicyGapError,
)
from navstream.evaluate import Policy, eval_fixed, eval_flexible
from navstream.oracle import (
    enumerate_policies,
    simulate_sessions,
    unmemoized_eval,
)
from navstream.scenario import (
    MediaGraph,
    NavigationModel,
    Scenario,
    build_lifetime_tail,
)

ASYM = Structure(i_set=frozenset({0, 1}), p_edges=frozenset({(0, 1)}))
SYM = Structure(i_set=frozenset({0, 1}), p_edges=frozenset({(0, 1), (1, 0)}))


def _line3(t_max: int) -> tuple[Scenario, Structure]:
    graph = MediaGraph(n=3, neighbors=((1,), (0, 2), (1,)), start=1)
    nav = NavigationModel(
        p_start={0: 0.5, 2: 0.5},
        p_switch={
            (1, 0, 1): 1.0, (1, 2, 1): 1.0,
            (0, 1, 0): 0.5, (0, 1, 2): 0.5,
            (2, 1, 0): 0.5, (2, 1, 2): 0.5,
        },
    )
    sc = Scenario(graph=graph, nav=nav, lifetime=build_lifetime_tail(1.0, t_max))
    st = Structure(i_set=frozenset({1}), p_edges=frozenset({(1, 0), (1, 2)}))
    return sc, st


# --- unmemoized recursion ---------------------------------------------------

def test_unmemoized_matches_dp_random():
    rng = np.random.default_rng(61)
    for _ in range(15):
        n = int(rng.integers(2, 7))
        t_max = int(rng.integers(1, 4))
        sc = random_scenario(rng, n, t_max)
        sz = random_sizes(rng, n)
        st = random_structure(rng, n)
        for buffer, fn in (("fixed", eval_fixed), ("flex", eval_flexible)):
            for w1 in (False, True):
                dp = fn(sc, sz, st, weight_first_switch=w1).expected_cost
                ref = unmemoized_eval(sc, sz, st, buffer, weight_first_switch=w1)
                assert dp == pytest.approx(ref, rel=1e-12)


def test_unmemoized_refuses_large_instances():
    rng = np.random.default_rng(63)
    sc = random_scenario(rng, 9, 2)
    with pytest.raises(OracleRefusalError):
        unmemoized_eval(sc, random_sizes(rng, 9), all_i_structure(9), "flex")
    sc = random_scenario(rng, 4, 6)
    with pytest.raises(OracleRefusalError):
        unmemoized_eval(sc, random_sizes(rng, 4), all_i_structure(4), "fixed")


def test_unmemoized_rejects_unknown_buffer():
    sc, sz = pingpong_scenario(), pingpong_sizes()
    with pytest.raises(InvalidInputError):
        unmemoized_eval(sc, sz, ASYM, "elastic")


# --- exhaustive policy enumeration -----------------------------------------

def test_enumerate_matches_dp_pingpong():
    sc, sz = pingpong_scenario(), pingpong_sizes()
    for st in (ASYM, SYM):
        for w1 in (False, True):
            assert enumerate_policies(sc, sz, st, "fixed", w1) == eval_fixed(
                sc, sz, st, w1
            ).expected_cost
            assert enumerate_policies(sc, sz, st, "flex", w1) == eval_flexible(
                sc, sz, st, w1
            ).expected_cost


def test_enumerate_matches_dp_line3():
    sc, st = _line3(t_max=1)
    sz = uniform_sizes(3)
    assert enumerate_policies(sc, sz, st, "flex") == eval_flexible(
        sc, sz, st
    ).expected_cost
    assert enumerate_policies(sc, sz, st, "fixed") == eval_fixed(
        sc, sz, st
    ).expected_cost


def test_enumerate_refuses_size_guard():
    rng = np.random.default_rng(67)
    sc = random_scenario(rng, 4, 2)
    with pytest.raises(OracleRefusalError, match="refused"):
        enumerate_policies(sc, random_sizes(rng, 4), all_i_structure(4), "fixed")
    sc = random_scenario(rng, 3, 3)
    with pytest.raises(OracleRefusalError, match="refused"):
        enumerate_policies(sc, random_sizes(rng, 3), all_i_structure(3), "fixed")


def test_enumerate_refuses_policy_explosion():
    # N = 3, t_max = 2 passes the size guard but the flexible-buffer slot
    # product explodes past the policy budget.
    sc, st = _line3(t_max=2)
    with pytest.raises(OracleRefusalError, match="policies"):
        enumerate_policies(sc, uniform_sizes(3), st, "flex")


# --- Monte-Carlo simulation -------------------------------------------------

def test_simulate_deterministic_per_seed():
    sc, sz = pingpong_scenario(mu=2.0, t_max=4), pingpong_sizes()
    policy = eval_flexible(sc, sz, SYM).policy
    a = simulate_sessions(sc, sz, SYM, policy, 500, seed=9)
    b = simulate_sessions(sc, sz, SYM, policy, 500, seed=9)
    c = simulate_sessions(sc, sz, SYM, policy, 500, seed=10)
    assert a.mean == b.mean and a.stderr == b.stderr
    assert a.mean != c.mean


def test_simulate_single_mdu_has_zero_spread():
    graph = MediaGraph(n=1, neighbors=((),), start=0)
    nav = NavigationModel(p_start={}, p_switch={})
    sc = Scenario(graph=graph, nav=nav, lifetime=build_lifetime_tail(1.0, 2))
    sz = uniform_sizes(1)
    policy = eval_fixed(sc, sz, all_i_structure(1)).policy
    res = simulate_sessions(sc, sz, all_i_structure(1), policy, 200, seed=0)
    assert res.mean == 11.0
    assert res.stderr == 0.0


def test_simulate_consistency_matches_dp():
    sc, sz = pingpong_scenario(mu=2.0, t_max=4), pingpong_sizes()
    for w1 in (False, True):
        for buffer, fn in (("fixed", eval_fixed), ("flex", eval_flexible)):
            res = fn(sc, sz, SYM, weight_first_switch=w1)
            sim = simulate_sessions(
                sc, sz, SYM, res.policy, 40_000, seed=3, consistency_mode=True
            )
            z = abs(sim.mean - res.expected_cost) / max(sim.stderr, 1e-12)
            assert z < 5.0, (buffer, w1, sim.mean, res.expected_cost)


def test_simulate_default_mode_tracks_renormalized_lifetime():
    # same structure, default lifetime draw: mean must be within 5 sigma of
    # a direct expectation over the truncated lifetime distribution
    sc, sz = pingpong_scenario(mu=1.0, t_max=1), pingpong_sizes()
    res = eval_fixed(sc, sz, SYM)
    sim = simulate_sessions(sc, sz, SYM, res.policy, 40_000, seed=4)
    pmf = np.asarray(sc.lifetime.pmf)
    pmf = pmf / pmf.sum()
    # 0 switches -> 11 bits; 1 switch -> 11 + 4.5
    expect = pmf[0] * 11.0 + pmf[1] * 15.5
    z = abs(sim.mean - expect) / max(sim.stderr, 1e-12)
    assert z < 5.0


def test_simulate_traces_are_sampled():
    sc, sz = pingpong_scenario(mu=2.0, t_max=4), pingpong_sizes()
    policy = eval_flexible(sc, sz, SYM).policy
    res = simulate_sessions(sc, sz, SYM, policy, 50, seed=1)
    assert 0 < len(res.traces) <= 10
    for tr in res.traces:
        assert tr.path[0] == 0
        assert tr.lifetime == len(tr.actions)
        assert tr.bits >= 11.0


def test_simulate_policy_gap_raises():
    sc, sz = pingpong_scenario(), pingpong_sizes()
    empty = Policy(buffer="fixed", weight_first_switch=False)
    with pytest.raises(PolicyGapError):
        simulate_sessions(sc, sz, SYM, empty, 10, seed=0)


def test_simulate_rejects_bad_session_count():
    sc, sz = pingpong_scenario(), pingpong_sizes()
    policy = eval_fixed(sc, sz, SYM).policy
    with pytest.raises(InvalidInputError):
        simulate_sessions(sc, sz, SYM, policy, 0, seed=0)
