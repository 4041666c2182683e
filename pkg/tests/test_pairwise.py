"""Pair enumeration, matching, window shrinking, and the relaxed scheduler."""

import pytest

from platoonplan.errors import ShrinkInfeasible
from platoonplan.evaluate import check, total_cost
from platoonplan.formulations import FixedRoutes
from platoonplan.instance import Instance, Vehicle
from platoonplan.network import make_network
from platoonplan.pairwise import (
    PairCandidate,
    _common_runs,
    enumerate_pairs,
    schedule_with_pairwise,
    select_pairs,
    shrink_windows,
)

BOTTOM = {0: ((0, 1),), 1: ((0, 2),), 2: ((0, 2), (2, 3), (3, 5))}
TOP = {0: ((0, 1),), 1: ((0, 2),), 2: ((0, 1), (1, 4), (4, 5))}


def tiny_shared_arc(n_vehicles, q_limit):
    net = make_network(2, [(0, 1, 1.0, 1)])
    return Instance(
        network=net,
        vehicles=tuple(Vehicle(v, 0, 1, 0, 1) for v in range(n_vehicles)),
        eta=0.1,
        q_limit=q_limit,
        time_unit=1.0,
        horizon=1,
    )


# -- shared stretches ---------------------------------------------------------


def test_common_runs_keeps_maximal_stretches():
    u = ((0, 1), (1, 2), (2, 3), (3, 4), (4, 5))
    v = ((7, 0), (0, 1), (1, 2), (2, 9), (9, 3), (3, 4))
    assert _common_runs(u, v) == [((0, 1), (1, 2)), ((3, 4),)]


def test_common_runs_requires_consecutive_in_both():
    u = ((0, 1), (1, 2), (2, 3))
    # (0, 1) then (2, 3) is a jump in u even though adjacent in v
    v = ((0, 1), (2, 3))
    assert _common_runs(u, v) == [((0, 1),), ((2, 3),)]
    assert _common_runs(u, ()) == []


def test_enumerate_pairs_demo(demo):
    routes = FixedRoutes.build(demo, BOTTOM)
    cands = enumerate_pairs(demo, routes)
    assert len(cands) == 1
    c = cands[0]
    assert (c.u, c.v) == (1, 2)
    assert c.segment == ((0, 2),)
    assert c.merge_node == 0
    assert c.savings == pytest.approx(0.1, abs=1e-12)
    assert (c.lo_u, c.hi_u) == (500, 500)
    assert (c.lo_v, c.hi_v) == (500, 700)


def test_enumerate_pairs_needs_a_common_time(demo):
    # trucks 0 and 2 share (0, 1) but are 500 time units apart
    routes = FixedRoutes.build(demo, TOP)
    assert enumerate_pairs(demo, routes) == []


def test_enumerate_pairs_skips_zero_savings():
    net = make_network(2, [(0, 1, 0.0, 1)])
    instance = Instance(
        network=net,
        vehicles=(Vehicle(0, 0, 1, 0, 1), Vehicle(1, 0, 1, 0, 1)),
        eta=0.1,
        q_limit=None,
        time_unit=1.0,
        horizon=1,
    )
    routes = FixedRoutes.build(instance, {0: ((0, 1),), 1: ((0, 1),)})
    assert enumerate_pairs(instance, routes) == []


# -- pair selection -----------------------------------------------------------


def test_select_pairs_cardinality_budget(demo):
    routes = FixedRoutes.build(demo, BOTTOM)
    cands = enumerate_pairs(demo, routes)
    # floor(0.2 * 3) = 0 pairs allowed
    assert select_pairs(cands, gamma=0.2, n_vehicles=3) == []
    chosen = select_pairs(cands, gamma=0.5, n_vehicles=3)
    assert [(c.u, c.v) for c in chosen] == [(1, 2)]


def test_select_pairs_respects_degree():
    def cand(u, v, s):
        return PairCandidate(
            u=u, v=v, segment=((0, 1),), merge_node=0, savings=s,
            lo_u=0, hi_u=0, lo_v=0, hi_v=0,
        )

    cands = [cand(0, 1, 5.0), cand(1, 2, 4.0), cand(2, 3, 3.0)]
    chosen = select_pairs(cands, gamma=0.5, n_vehicles=4)
    assert {(c.u, c.v) for c in chosen} == {(0, 1), (2, 3)}


# -- window shrinking ---------------------------------------------------------


def test_shrink_windows_demo(demo):
    routes = FixedRoutes.build(demo, BOTTOM)
    chosen = select_pairs(enumerate_pairs(demo, routes), 0.5, 3)
    shrunk = shrink_windows(demo, chosen)
    # truck 1 had no slack and keeps its window
    assert shrunk.vehicles[1].earliest_departure == 500
    assert shrunk.vehicles[1].latest_arrival == 600
    # truck 2 gives up the slack that would let it dodge the meet
    assert shrunk.vehicles[2].earliest_departure == 500
    assert shrunk.vehicles[2].latest_arrival == 800
    assert shrunk.vehicles[0] == demo.vehicles[0]
    assert demo.vehicles[2].latest_arrival == 1000  # original untouched
    # on the narrowed instance the two entry windows coincide
    narrowed = FixedRoutes.build(shrunk, routes.paths)
    assert narrowed.entry_window(2, (0, 2)) == (500, 500)


def test_shrink_windows_no_pairs_returns_instance(demo):
    assert shrink_windows(demo, []) is demo


def test_shrink_windows_infeasible(demo):
    # a meet the vehicles' journey windows cannot absorb (synthetic: real
    # candidates always overlap, this guards the arithmetic)
    bogus = PairCandidate(
        u=1, v=2, segment=((0, 2),), merge_node=0, savings=0.1,
        lo_u=500, hi_u=500, lo_v=999, hi_v=1500,
    )
    with pytest.raises(ShrinkInfeasible, match="vehicle 1"):
        shrink_windows(demo, [bogus])


# -- full pipeline ------------------------------------------------------------


def test_pipeline_demo(demo):
    routes = FixedRoutes.build(demo, BOTTOM)
    sol = schedule_with_pairwise(demo, routes, gamma=0.5)
    assert check(demo, sol).ok
    assert total_cost(demo, sol) == pytest.approx(4.9, abs=1e-9)


def test_pipeline_without_candidates_is_canonical(demo):
    routes = FixedRoutes.build(demo, TOP)
    sol = schedule_with_pairwise(demo, routes, gamma=1.0)
    assert check(demo, sol).ok
    assert total_cost(demo, sol) == pytest.approx(4.99, abs=1e-9)


def test_oversized_meet_is_split_to_legal_convoys():
    """Three trucks coincide, the cap is two: the repair must split them."""
    instance = tiny_shared_arc(3, q_limit=2)
    routes = FixedRoutes.build(instance, {v: ((0, 1),) for v in range(3)})
    sol = schedule_with_pairwise(instance, routes, gamma=1.0)
    assert check(instance, sol).ok
    assert sol.groups[((0, 1), 0)] == ((0, 1), (2,))
    assert total_cost(instance, sol) == pytest.approx(2.9, abs=1e-9)
