"""Timetable container, feasibility checking, costing, and MIP decoding.

A :class:`PlatoonSolution` is the common currency between all solution
methods: per-vehicle timed paths plus, for every (arc, entry time) slot, a
partition of the vehicles entering there into platoons.  ``check`` validates
one against an instance, ``total_cost`` prices it, and ``decode`` builds one
from a solver incumbent of any of the model families.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import DecodeInconsistent, InvalidSolution
from .formulations import FixedRoutes, _walk
from .instance import Instance

Arc = tuple[int, int]

_TIME_TOL = 1e-6


@dataclass(frozen=True)
class PlatoonSolution:
    """Timed paths and the platoon partition at every occupied slot.

    ``paths[v]`` is the ordered tuple of ``(arc, entry_time)`` legs of
    vehicle ``v``; ``groups[arc, time]`` partitions exactly the vehicles
    entering that arc at that time into platoons, each sorted ascending so
    the smallest id leads.
    """

    paths: Mapping[int, tuple[tuple[Arc, float], ...]]
    groups: Mapping[tuple[Arc, float], tuple[tuple[int, ...], ...]]

    def to_json_dict(self) -> dict:
        return {
            "vehicles": {
                str(v): [[arc[0], arc[1], t] for arc, t in legs]
                for v, legs in sorted(self.paths.items())
            },
            "platoons": [
                {
                    "arc": [arc[0], arc[1]],
                    "time": t,
                    "groups": [list(g) for g in gs],
                }
                for (arc, t), gs in sorted(self.groups.items())
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PlatoonSolution":
        paths = {
            int(v): tuple(((i, j), t) for i, j, t in legs)
            for v, legs in data.get("vehicles", {}).items()
        }
        groups = {
            ((rec["arc"][0], rec["arc"][1]), rec["time"]): tuple(
                tuple(g) for g in rec["groups"]
            )
            for rec in data.get("platoons", [])
        }
        return cls(paths=paths, groups=groups)


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str
    vehicle: int | None = None
    arc: Arc | None = None


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [
                {
                    "kind": v.kind,
                    "detail": v.detail,
                    "vehicle": v.vehicle,
                    "arc": list(v.arc) if v.arc else None,
                }
                for v in self.violations
            ],
        }


def check(instance: Instance, sol: PlatoonSolution) -> ValidationReport:
    """Validate paths, timing, and platoon structure against an instance.

    Times are compared with tolerance 1e-6 (continuous-time models report
    floats), except group membership, which requires the stored entry time
    and the group's slot key to agree exactly.
    """
    net = instance.network
    tt = net.travel_time
    bad: list[Violation] = []

    expected = set(range(len(instance.vehicles)))
    got = set(sol.paths)
    for v in sorted(expected - got):
        bad.append(Violation("missing-vehicle", f"vehicle {v} has no path", vehicle=v))
    for v in sorted(got - expected):
        bad.append(Violation("unknown-vehicle", f"vehicle {v} is not in the fleet", vehicle=v))

    traversals: dict[tuple[Arc, float], set[int]] = defaultdict(set)
    for v in sorted(got & expected):
        veh = instance.vehicles[v]
        legs = sol.paths[v]
        if not legs:
            bad.append(Violation("empty-path", f"vehicle {v} drives nowhere", vehicle=v))
            continue
        node = veh.origin
        seen = {node}
        ok_path = True
        for arc, _t in legs:
            if arc not in net.cost:
                bad.append(Violation("arc-missing", f"vehicle {v} uses unknown arc {arc}", v, arc))
                ok_path = False
                break
            if arc[0] != node:
                bad.append(Violation("path-broken", f"vehicle {v} jumps to arc {arc}", v, arc))
                ok_path = False
                break
            node = arc[1]
            if node in seen:
                bad.append(Violation("path-revisit", f"vehicle {v} revisits node {node}", v, arc))
                ok_path = False
                break
            seen.add(node)
        if ok_path and node != veh.dest:
            bad.append(
                Violation("wrong-destination", f"vehicle {v} ends at {node}, not {veh.dest}", v)
            )
            ok_path = False
        if not ok_path:
            continue

        if legs[0][1] < veh.earliest_departure - _TIME_TOL:
            bad.append(
                Violation(
                    "window-departure",
                    f"vehicle {v} departs at {legs[0][1]} before {veh.earliest_departure}",
                    v,
                )
            )
        for (arc_a, t_a), (arc_b, t_b) in zip(legs, legs[1:]):
            if t_b < t_a + tt[arc_a] - _TIME_TOL:
                bad.append(
                    Violation(
                        "travel-time",
                        f"vehicle {v} enters {arc_b} at {t_b}, needs {t_a} + {tt[arc_a]}",
                        v,
                        arc_b,
                    )
                )
        last_arc, last_t = legs[-1]
        if last_t + tt[last_arc] > veh.latest_arrival + _TIME_TOL:
            bad.append(
                Violation(
                    "window-arrival",
                    f"vehicle {v} arrives at {last_t + tt[last_arc]} after {veh.latest_arrival}",
                    v,
                )
            )
        for arc, t in legs:
            traversals[arc, t].add(v)

    q = instance.q_limit
    covered: dict[tuple[Arc, float], set[int]] = defaultdict(set)
    for (arc, t), groups in sorted(sol.groups.items()):
        here = traversals.get((arc, t), set())
        for g in groups:
            if not g:
                bad.append(Violation("empty-group", f"empty group at {arc} t={t}", arc=arc))
                continue
            if list(g) != sorted(g):
                bad.append(
                    Violation(
                        "leader",
                        f"group {g} at {arc} t={t} is not led by its smallest id",
                        arc=arc,
                    )
                )
            if q is not None and len(g) > q:
                bad.append(
                    Violation(
                        "group-size", f"group {g} at {arc} t={t} exceeds cap {q}", arc=arc
                    )
                )
            for v in g:
                if v in covered[arc, t]:
                    bad.append(
                        Violation(
                            "group-duplicate",
                            f"vehicle {v} appears twice at {arc} t={t}",
                            v,
                            arc,
                        )
                    )
                if v not in here:
                    bad.append(
                        Violation(
                            "group-membership",
                            f"vehicle {v} grouped at {arc} t={t} but not driving there then",
                            v,
                            arc,
                        )
                    )
                covered[arc, t].add(v)

    for (arc, t), here in sorted(traversals.items()):
        missing = here - covered.get((arc, t), set())
        for v in sorted(missing):
            bad.append(
                Violation(
                    "uncovered-traversal",
                    f"vehicle {v} at {arc} t={t} belongs to no group",
                    v,
                    arc,
                )
            )

    return ValidationReport(ok=not bad, violations=tuple(bad))


def total_cost(instance: Instance, sol: PlatoonSolution) -> float:
    """Fleet cost of a valid timetable: every follower saves the eta share."""
    report = check(instance, sol)
    if not report.ok:
        raise InvalidSolution(
            f"solution fails validation ({report.violations[0].kind})", report
        )
    eta = instance.eta
    cost = instance.network.cost
    total = 0.0
    for (arc, _t), groups in sol.groups.items():
        c = cost[arc]
        for g in groups:
            total += c * (len(g) - eta * (len(g) - 1))
    return total


def shortest_path_cost(instance: Instance) -> float:
    """Fleet cost if every vehicle drives its cheapest path alone."""
    sc = instance.shortest_costs
    return float(sum(sc[veh.origin, veh.dest] for veh in instance.vehicles))


def indicators(
    instance: Instance,
    objective: float,
    bound: float | None = None,
    optimum: float | None = None,
) -> dict:
    """Quality ratios; fields whose denominator is zero come back as None."""
    spc = shortest_path_cost(instance)
    out = {
        "objective": objective,
        "bound": bound,
        "spc": spc,
        "saving_ratio": None,
        "ub_saving_ratio": None,
        "relative_gap": None,
        "optimality_gap": None,
    }
    if spc != 0.0:
        out["saving_ratio"] = abs(spc - objective) / spc
        if bound is not None:
            out["ub_saving_ratio"] = abs(spc - bound) / spc
    if bound is not None and bound != 0.0:
        out["relative_gap"] = abs(objective - bound) / abs(bound)
    if optimum is not None and optimum != 0.0:
        out["optimality_gap"] = abs(objective - optimum) / abs(optimum)
    return out


# -- decoding ----------------------------------------------------------------


def split_groups(ids: Sequence[int], q: int | None, count: int | None = None) -> tuple[tuple[int, ...], ...]:
    """Partition co-located vehicles into platoons, ascending ids.

    ``count`` (a solver's group count for the slot) can only raise the number
    of groups above the minimum ``ceil(n / q)``; sizes stay within ``q``.
    """
    ids = sorted(ids)
    n = len(ids)
    need = 1 if q is None else math.ceil(n / q)
    k = max(need, count or 0)
    if k <= 1:
        return (tuple(ids),)
    if k == need and q is not None:
        return tuple(tuple(ids[p : p + q]) for p in range(0, n, q))
    base, rem = divmod(n, k)
    out = []
    pos = 0
    for g in range(k):
        size = base + (1 if g < rem else 0)
        out.append(tuple(ids[pos : pos + size]))
        pos += size
    return tuple(g for g in out if g)


def _union_find_groups(vehicles: set[int], links: list[tuple[int, int]]) -> list[tuple[int, ...]]:
    parent = {v: v for v in vehicles}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in links:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    classes: dict[int, list[int]] = defaultdict(list)
    for v in vehicles:
        classes[find(v)].append(v)
    return [tuple(sorted(vs)) for _r, vs in sorted(classes.items())]


def _ints(name: str) -> list[int]:
    return [int(p) for p in name.split("_")[1:]]


def _decode_cpf(instance: Instance, result) -> PlatoonSolution:
    used: dict[int, list[Arc]] = defaultdict(list)
    times: dict[tuple[int, int], float] = {}
    links: dict[Arc, list[tuple[int, int]]] = defaultdict(list)
    for name, val in result.values.items():
        if name.startswith("t_"):
            i, v = _ints(name)
            times[v, i] = val
        elif name.startswith("x_") and val > 0.5:
            i, j, v = _ints(name)
            used[v].append((i, j))
        elif name.startswith("y_") and val > 0.5:
            i, j, v, w = _ints(name)
            links[(i, j)].append((v, w))

    paths = {}
    for v, veh in enumerate(instance.vehicles):
        nxt: dict[int, list[Arc]] = defaultdict(list)
        for arc in used.get(v, ()):
            nxt[arc[0]].append(arc)
        for outs in nxt.values():
            outs.sort()
        path = _walk(veh.origin, veh.dest, nxt)
        if path is None:
            raise DecodeInconsistent(f"vehicle {v}: no usable path in the incumbent")
        paths[v] = path

    on_arc: dict[Arc, set[int]] = defaultdict(set)
    for v, path in paths.items():
        for arc in path:
            on_arc[arc].add(v)

    # platoons pin every member to the leader's (smallest id) entry time
    slot_time: dict[tuple[int, Arc], float] = {}
    groups: dict[tuple[Arc, float], list[tuple[int, ...]]] = defaultdict(list)
    for arc in sorted(on_arc):
        here = on_arc[arc]
        pair_links = [(v, w) for (v, w) in links.get(arc, ()) if v in here and w in here]
        for g in _union_find_groups(here, pair_links):
            t_g = times[g[0], arc[0]]
            for v in g:
                slot_time[v, arc] = t_g
            groups[arc, t_g].append(g)

    timed_paths = {
        v: tuple((arc, slot_time[v, arc]) for arc in path) for v, path in paths.items()
    }
    return PlatoonSolution(
        paths=timed_paths,
        groups={k: tuple(gs) for k, gs in groups.items()},
    )


def _decode_tsf(instance: Instance, result) -> PlatoonSolution:
    moves: dict[int, list[tuple[int, tuple]]] = defaultdict(list)
    counts: dict[tuple[Arc, int], int] = {}
    for name, val in result.values.items():
        if name.startswith("x_") and val > 0.5:
            i, tm, j, t2, v = _ints(name)
            if i != j:  # waiting legs carry no cost and join no platoon
                moves[v].append((tm, (i, j)))
        elif name.startswith("y_"):
            i, tm, j, _t2 = _ints(name)
            counts[(i, j), tm] = int(round(val))

    paths = {}
    slots: dict[tuple[Arc, int], list[int]] = defaultdict(list)
    for v, veh in enumerate(instance.vehicles):
        legs = sorted(moves.get(v, ()))
        node = veh.origin
        ordered = []
        for tm, arc in legs:
            if arc[0] != node:
                raise DecodeInconsistent(f"vehicle {v}: time-expanded legs do not chain")
            ordered.append((arc, tm))
            node = arc[1]
            slots[arc, tm].append(v)
        paths[v] = tuple(ordered)

    groups = {}
    for (arc, tm), vs in sorted(slots.items()):
        groups[arc, tm] = split_groups(vs, instance.q_limit, counts.get((arc, tm)))
    return PlatoonSolution(paths=paths, groups=groups)


def _decode_tif(instance: Instance, result, routes: FixedRoutes) -> PlatoonSolution:
    chosen: dict[tuple[int, Arc], int] = {}
    counts: dict[tuple[Arc, int], int] = {}
    for name, val in result.values.items():
        if name.startswith("x_") and val > 0.5:
            i, j, v, tm = _ints(name)
            chosen[v, (i, j)] = tm
        elif name.startswith("y_"):
            i, j, tm = _ints(name)
            counts[(i, j), tm] = int(round(val))

    tt = instance.network.travel_time
    paths = {}
    slots: dict[tuple[Arc, int], list[int]] = defaultdict(list)
    for v, path in sorted(routes.paths.items()):
        legs = []
        prev_end: int | None = None
        for arc in path:
            if (v, arc) in chosen:
                tm = chosen[v, arc]
            else:
                # loner legs ride as early as the chain allows
                tm = routes.entry_lo[v, arc]
                if prev_end is not None:
                    tm = max(tm, prev_end)
            legs.append((arc, tm))
            slots[arc, tm].append(v)
            prev_end = tm + tt[arc]
        paths[v] = tuple(legs)

    groups = {}
    for (arc, tm), vs in sorted(slots.items()):
        groups[arc, tm] = split_groups(vs, instance.q_limit, counts.get((arc, tm)))
    return PlatoonSolution(paths=paths, groups=groups)


def decode(instance: Instance, result, which: str, routes: FixedRoutes | None = None) -> PlatoonSolution:
    """Turn a solver incumbent into a validated :class:`PlatoonSolution`.

    ``which`` picks the variable-name dialect: ``"cpf"``, ``"tsf"``, or
    ``"tif"`` (the latter needs the fixed ``routes`` the model was built
    on).  A decoded timetable that fails :func:`check` raises
    :class:`DecodeInconsistent`: feasible models only produce feasible
    incumbents, so that signals a solver or builder bug.
    """
    if not result.values:
        raise InvalidSolution("result carries no incumbent to decode")
    if which == "cpf":
        sol = _decode_cpf(instance, result)
    elif which == "tsf":
        sol = _decode_tsf(instance, result)
    elif which == "tif":
        if routes is None:
            raise InvalidSolution("decoding a scheduling incumbent requires routes")
        sol = _decode_tif(instance, result, routes)
    else:
        raise InvalidSolution(f"unknown decode dialect {which!r}")
    report = check(instance, sol)
    if not report.ok:
        raise DecodeInconsistent(
            f"decoded timetable violates {report.violations[0].kind}", report
        )
    return sol


def canonical_schedule(instance: Instance, routes: FixedRoutes) -> PlatoonSolution:
    """Everyone departs as early as possible; platoons form only by accident."""
    paths = {}
    slots: dict[tuple[Arc, int], list[int]] = defaultdict(list)
    for v, path in sorted(routes.paths.items()):
        legs = []
        for arc in path:
            tm = routes.entry_lo[v, arc]
            legs.append((arc, tm))
            slots[arc, tm].append(v)
        paths[v] = tuple(legs)
    groups = {}
    for (arc, tm), vs in sorted(slots.items()):
        groups[arc, tm] = split_groups(vs, instance.q_limit)
    return PlatoonSolution(paths=paths, groups=groups)
