from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capdom.core import (
    InfeasibleAssignmentError,
    Instance,
    InstanceError,
    as_fraction,
    check_feasible,
    combine,
    cost_of,
    format_fraction,
    multiplicity_of,
    normalize,
    validate_instance,
)
from capdom.oracle import exact_opt, star_instance

from families import exhaustive_family

F = Fraction


def path3(w=(1, 1, 1), c=(1, 1, 1), d=(1, 1, 1)) -> Instance:
    return Instance.build(w, c, d, [(0, 1), (1, 2)], ["a", "b", "c"])


def test_validate_path_closed_degree():
    inst = validate_instance({
        "vertices": [{"id": x, "cost": 1, "capacity": 1, "demand": 1} for x in "abc"],
        "edges": [["a", "b"], ["b", "c"]],
    })
    assert inst.closed_degree(inst.index("b")) == 3
    assert inst.closed[0] == (0, 1)


@pytest.mark.parametrize(
    "raw, message",
    [
        ({"vertices": [{"id": "a", "cost": 1, "capacity": 0, "demand": 1}], "edges": []},
         "capacity must be strictly positive"),
        ({"vertices": [{"id": "a", "cost": 1, "capacity": 1, "demand": 1}], "edges": [["a", "a"]]},
         "self-loop"),
        ({"vertices": [{"id": x, "cost": 1, "capacity": 1, "demand": 1} for x in "ab"],
          "edges": [["a", "b"], ["b", "a"]]}, "duplicate edge"),
        ({"vertices": [{"id": "a", "cost": 1, "capacity": 1, "demand": 1}], "edges": [["a", "z"]]},
         "dangling endpoint"),
        ({"vertices": [{"id": "a", "cost": -1, "capacity": 1, "demand": 1}], "edges": []},
         "cost must be non-negative"),
    ],
)
def test_validation_errors_name_the_culprit(raw, message):
    with pytest.raises(InstanceError, match=message):
        validate_instance(raw)


def test_capacity_error_names_vertex():
    with pytest.raises(InstanceError, match="vertex q"):
        Instance.build([1], [0], [1], [], ["q"])


def test_as_fraction_is_exact_and_rejects_floats():
    assert as_fraction("0.1") == F(1, 10)
    assert as_fraction("3/4") == F(3, 4)
    with pytest.raises(TypeError):
        as_fraction(0.5)
    with pytest.raises(InstanceError):
        as_fraction("x")
    assert format_fraction(F(6, 3)) == "2"
    assert format_fraction(F(-1, 3)) == "-1/3"


def test_multiplicity_ceiling():
    inst = Instance.build([1, 1], [1, 2], [5, 0], [(0, 1)])
    assert multiplicity_of({(0, 1): F(5)}, inst) == (0, 3)
    assert multiplicity_of({}, inst) == (0, 0)


def test_multiplicity_rejects_support_outside_closed_neighbourhood():
    inst = path3()
    with pytest.raises(InstanceError):
        multiplicity_of({(0, 2): F(1)}, inst)
    with pytest.raises(InstanceError):
        multiplicity_of({(0, 1): F(-1)}, inst)


def test_star_center_takes_everything():
    inst = star_instance(10, 10)
    f = {(v, 0): F(1) for v in range(10)}
    x = multiplicity_of(f, inst)
    assert x[0] == 1 and sum(x) == 1


def test_check_feasible_path():
    inst = path3(w=(1, 4, 1), c=(1, 2, 1))
    rep = check_feasible({(v, 1): F(1) for v in range(3)}, inst)
    assert rep.feasible and rep.violations == {}
    assert rep.cost == 4 * 2  # ceil(3 / 2) copies of b

    rep = check_feasible({(0, 1): F(1, 2)}, inst)
    assert not rep.feasible
    assert rep.violations[0] == F(1, 2)
    assert set(rep.violations) == {0, 1, 2}


def test_zero_demand_instance_is_trivially_feasible():
    inst = Instance.build([3, 3], [1, 1], [0, 0], [(0, 1)])
    rep = check_feasible({}, inst)
    assert rep.feasible and rep.cost == 0


def test_normalize_clamps_and_is_idempotent():
    inst = path3()
    f = {(0, 1): F(5), (1, 1): F(1), (2, 1): F(1)}
    g = normalize(f, inst)
    assert g[0, 1] == 1
    assert normalize(g, inst) == g
    with pytest.raises(InfeasibleAssignmentError):
        normalize({(0, 1): F(1)}, inst)


def test_combine_disjoint_and_identity():
    f = {(0, 1): F(1)}
    g = {(2, 1): F(1, 2)}
    assert combine([f, g]) == {(0, 1): F(1), (2, 1): F(1, 2)}
    assert combine([f, {}]) == f
    assert combine([f, f]) == {(0, 1): F(2)}


def test_restrict_keeps_parent_order_and_overrides_demand():
    inst = path3(d=(1, 2, 3))
    sub, origin = inst.restrict([2, 1], demand={1: F(0)})
    assert origin == (1, 2)
    assert sub.demand == (F(0), F(3))
    assert sub.edges == ((0, 1),)
    assert sub.names == ("b", "c")


def test_components_sorted_by_smallest_member():
    inst = Instance.build([1] * 5, [1] * 5, [1] * 5, [(3, 4), (0, 2)])
    assert inst.components() == [[0, 2], [1], [3, 4]]


def _random_feasible(inst: Instance, rng: random.Random):
    """Spread each demand (with some surplus) over random closed neighbours."""
    f = {}
    for v in range(inst.n):
        amount = inst.demand[v] + F(rng.randint(0, 3), rng.randint(1, 3))
        nbrs = list(inst.closed[v])
        cut = sorted(F(rng.randint(0, 6), 6) for _ in range(len(nbrs) - 1))
        parts = [b - a for a, b in zip([F(0), *cut], [*cut, F(1)])]
        for u, p in zip(nbrs, parts):
            if p > 0:
                f[v, u] = f.get((v, u), F(0)) + p * amount
    return f


def test_normalize_never_costs_more_on_small_family():
    rng = random.Random(5)
    for inst, _ in exhaustive_family(6, seed=3, min_n=6):
        opt = exact_opt(inst)
        for f in (opt.assignment, _random_feasible(inst, rng)):
            g = normalize(f, inst)
            assert check_feasible(g, inst).feasible
            assert cost_of(multiplicity_of(g, inst), inst) <= cost_of(multiplicity_of(f, inst), inst)
            x = multiplicity_of(g, inst)
            for u in range(inst.n):
                for v in inst.closed[u]:
                    assert inst.demand[v] * x[u] >= g.get((v, u), 0)


rationals = st.fractions(min_value=0, max_value=20, max_denominator=6)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(rationals, rationals, rationals), min_size=1, max_size=6), st.data())
def test_pure_and_monotone(vals, data):
    n = len(vals)
    inst = Instance.build([v[0] for v in vals], [v[1] + 1 for v in vals], [v[2] for v in vals],
                          [(i, i + 1) for i in range(n - 1)])
    f = {}
    for v in range(n):
        for u in inst.closed[v]:
            f[v, u] = data.draw(rationals)
    assert multiplicity_of(f, inst) == multiplicity_of(dict(f), inst)
    assert check_feasible(f, inst) == check_feasible(f, inst)
    smaller = {k: a / 2 for k, a in f.items()}
    assert all(a <= b for a, b in zip(multiplicity_of(smaller, inst), multiplicity_of(f, inst)))
    if check_feasible(f, inst).feasible:
        g = normalize(f, inst)
        x = multiplicity_of(g, inst)
        assert all(inst.demand[v] * x[u] >= a for (v, u), a in g.items())
