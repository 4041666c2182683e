"""Independent reference implementations used to pin expected test values.

Everything here is deliberately written from scratch against the problem
statement, not against the package internals: exhaustive enumeration where
the instance is small enough and scipy's own integer solver for model
files.  Tests compare the package's fast paths to these slow certainties.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import csr_matrix

from platoonplan.mip import BINARY, CONTINUOUS, INTEGER, MipModel


# -- graph primitives -------------------------------------------------------


def bellman_ford(n_nodes, weights, source):
    """Shortest weights from ``source``; ``weights`` maps (i, j) to w >= 0."""
    dist = [math.inf] * n_nodes
    dist[source] = 0.0
    for _ in range(n_nodes - 1):
        changed = False
        for (i, j), w in weights.items():
            if dist[i] + w < dist[j] - 1e-15:
                dist[j] = dist[i] + w
                changed = True
        if not changed:
            break
    return dist


def simple_paths(arcs, origin, dest, max_arcs=None):
    """Every simple path from origin to dest as a tuple of arcs."""
    out_map = {}
    for i, j in arcs:
        out_map.setdefault(i, []).append((i, j))
    for outs in out_map.values():
        outs.sort()
    found = []

    def walk(node, seen, trail):
        if node == dest:
            found.append(tuple(trail))
            return
        if max_arcs is not None and len(trail) >= max_arcs:
            return
        for arc in out_map.get(node, ()):
            if arc[1] in seen:
                continue
            seen.add(arc[1])
            trail.append(arc)
            walk(arc[1], seen, trail)
            trail.pop()
            seen.remove(arc[1])

    walk(origin, {origin}, [])
    return found


# -- exhaustive platooning optima -------------------------------------------


def timed_trajectories(instance, v, paths=None):
    """All integer-time drives of one vehicle: tuples of (arc, entry time).

    Waiting is allowed before any arc, so entry times are any integer
    vectors that respect travel times, the departure bound, and the
    arrival deadline.
    """
    veh = instance.vehicles[v]
    tt = instance.network.travel_time
    if paths is None:
        paths = simple_paths(instance.network.arcs, veh.origin, veh.dest)
    out = []
    for path in paths:
        times = [tt[a] for a in path]
        tail = [0] * len(path)
        acc = 0
        for k in range(len(path) - 1, -1, -1):
            acc += times[k]
            tail[k] = acc
        if veh.earliest_departure + tail[0] > veh.latest_arrival:
            continue

        def assign(k, earliest, chosen):
            if k == len(path):
                out.append(tuple(zip(path, chosen)))
                return
            latest = veh.latest_arrival - tail[k]
            for t in range(earliest, latest + 1):
                chosen.append(t)
                assign(k + 1, t + times[k], chosen)
                chosen.pop()

        assign(0, veh.earliest_departure, [])
    return out


def combination_cost(instance, combo):
    """Cost of one trajectory per vehicle, platoons formed greedily.

    Vehicles on the same arc at the same time split into the fewest legal
    convoys; the cost of a slot with n vehicles does not depend on who
    rides with whom, only on the number of convoys.
    """
    eta = instance.eta
    q = instance.q_limit
    cost = instance.network.cost
    slots = Counter()
    for traj in combo:
        for arc, t in traj:
            slots[arc, t] += 1
    total = 0.0
    for (arc, _t), n in slots.items():
        groups = 1 if q is None else math.ceil(n / q)
        total += cost[arc] * (n - eta * (n - groups))
    return total


def brute_force_joint(instance, budget=200_000):
    """Exact joint optimum by full enumeration, or None when too large."""
    per_vehicle = []
    size = 1
    for v in range(len(instance.vehicles)):
        trajs = timed_trajectories(instance, v)
        if not trajs:
            return None
        size *= len(trajs)
        if size > budget:
            return None
        per_vehicle.append(trajs)
    best = math.inf
    for combo in itertools.product(*per_vehicle):
        c = combination_cost(instance, combo)
        if c < best:
            best = c
    return best


def brute_force_schedule(instance, paths, budget=200_000):
    """Exact best timetable for fixed paths, or None when too large."""
    per_vehicle = []
    size = 1
    for v in sorted(paths):
        trajs = timed_trajectories(instance, v, paths=[paths[v]])
        if not trajs:
            return None
        size *= len(trajs)
        if size > budget:
            return None
        per_vehicle.append(trajs)
    best = math.inf
    for combo in itertools.product(*per_vehicle):
        c = combination_cost(instance, combo)
        if c < best:
            best = c
    return best


# -- independent integer solving --------------------------------------------


def milp_oracle(model: MipModel):
    """Solve a model with scipy's own branch and cut.

    Returns (found, objective); found is False for infeasible models.
    """
    n = model.num_vars
    c = np.zeros(n)
    for idx, coef in model.objective.items():
        c[idx] = coef
    flip = model.sense == "max"
    if flip:
        c = -c
    lower = np.array([v.lower for v in model.variables])
    upper = np.array([v.upper for v in model.variables])
    integrality = np.array(
        [1 if v.kind in (BINARY, INTEGER) else 0 for v in model.variables]
    )
    constraints = []
    if model.constraints:
        rows, cols, vals, lo, hi = [], [], [], [], []
        for r, (idxs, coefs, sense, rhs, _name) in enumerate(model.constraints):
            for idx, coef in zip(idxs, coefs):
                rows.append(r)
                cols.append(idx)
                vals.append(coef)
            if sense == "<=":
                lo.append(-np.inf)
                hi.append(rhs)
            elif sense == ">=":
                lo.append(rhs)
                hi.append(np.inf)
            else:
                lo.append(rhs)
                hi.append(rhs)
        a = csr_matrix((vals, (rows, cols)), shape=(len(model.constraints), n))
        constraints = [LinearConstraint(a, lo, hi)]
    # presolve stays off: with it on, this scipy build returns provably
    # suboptimal points on some mixed binary/continuous models
    res = milp(
        c,
        constraints=constraints,
        integrality=integrality,
        bounds=Bounds(lower, upper),
        options={"presolve": False},
    )
    if res.status != 0:
        return False, None
    value = float(res.fun)
    if flip:
        value = -value
    return True, value + model.objective_constant


def enumerate_mip(model: MipModel):
    """Optimal objective of a small all-integer model by full enumeration."""
    ranges = []
    for v in model.variables:
        if v.kind == CONTINUOUS:
            raise ValueError("enumeration needs an all-integer model")
        if not (math.isfinite(v.lower) and math.isfinite(v.upper)):
            raise ValueError(f"variable {v.name} is unbounded")
        ranges.append(range(int(v.lower), int(v.upper) + 1))
    flip = -1.0 if model.sense == "max" else 1.0
    best = None
    for point in itertools.product(*ranges):
        ok = True
        for idxs, coefs, sense, rhs, _name in model.constraints:
            lhs = sum(point[i] * c for i, c in zip(idxs, coefs))
            if sense == "<=" and lhs > rhs + 1e-9:
                ok = False
            elif sense == ">=" and lhs < rhs - 1e-9:
                ok = False
            elif sense == "=" and abs(lhs - rhs) > 1e-9:
                ok = False
            if not ok:
                break
        if not ok:
            continue
        val = sum(point[i] * c for i, c in model.objective.items())
        if best is None or flip * val < flip * best:
            best = val
    if best is None:
        return False, None
    return True, best + model.objective_constant
