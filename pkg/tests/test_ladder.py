from __future__ import annotations

import re

import networkx as nx
import pytest

from capdom.core import Instance
from capdom.embedding import VertexOrder, gen_outerplanar
from capdom.ladder import (
    GeneralLadder,
    LadderError,
    bfs_distances,
    extract_ladder,
    ladder_to_dot,
    verify_ladder,
)

from families import convex_embedding, exhaustive_family


def unit(n, edges, names=None):
    return Instance.build([1] * n, [1] * n, [1] * n, edges, names)


def hand_ladder(anchor, layers):
    seq = tuple(v for lay in layers for v in lay)
    return GeneralLadder(
        anchor,
        VertexOrder(seq, {v: i + 1 for i, v in enumerate(seq)}),
        {v: k for k, lay in enumerate(layers) for v in lay},
        tuple(tuple(lay) for lay in layers),
    )


def test_path_layers():
    inst = unit(3, [(0, 1), (1, 2)], list("abc"))
    lad = extract_ladder(inst, convex_embedding(inst), 0)
    assert lad.layers == ((0,), (1,), (2,))
    assert lad.height == 2


def test_fan_layers():
    edges = [(0, i) for i in range(1, 5)] + [(i, i + 1) for i in range(1, 4)]
    inst = unit(5, edges)
    lad = extract_ladder(inst, convex_embedding(inst), 0)
    assert lad.layers == ((0,), (1, 2, 3, 4))
    assert verify_ladder(lad, inst).ok


@pytest.mark.parametrize("anchor", range(6))
def test_six_cycle_layer_sizes(anchor):
    inst = unit(6, [(i, (i + 1) % 6) for i in range(6)])
    lad = extract_ladder(inst, convex_embedding(inst), anchor)
    assert [len(x) for x in lad.layers] == [1, 2, 2, 1]
    assert verify_ladder(lad, inst).ok


def test_disconnected_input_is_refused():
    inst = unit(3, [(0, 1)])
    from capdom.embedding import make_rotation_system
    rs = make_rotation_system(inst, [(1,), (0,), ()], [(0, 1), (2,)])
    with pytest.raises(LadderError, match="disconnected"):
        extract_ladder(inst, rs, 0)


def test_layers_match_networkx_bfs():
    for seed in range(150):
        inst, rs = gen_outerplanar(1 + seed % 80, seed, keep=(seed % 4) / 3)
        g = nx.Graph(list(inst.edges))
        g.add_nodes_from(range(inst.n))
        for anchor in {0, inst.n // 2, inst.n - 1}:
            lad = extract_ladder(inst, rs, anchor)
            assert lad.layer == nx.single_source_shortest_path_length(g, anchor)
            assert bfs_distances(inst, anchor) == lad.layer


def test_extracted_ladders_verify_on_all_small_graphs():
    for inst, rs in exhaustive_family(7):
        for anchor in range(inst.n):
            report = verify_ladder(extract_ladder(inst, rs, anchor), inst)
            assert report.ok, report.violations


def test_extracted_ladders_verify_on_random_graphs():
    for seed in range(200):
        inst, rs = gen_outerplanar(2 + seed % 150, seed, keep=(seed % 5) / 4)
        assert verify_ladder(extract_ladder(inst, rs, seed % inst.n), inst).ok


def test_crossing_violation_names_quadruple():
    inst = unit(5, [(0, 1), (0, 2), (1, 2), (1, 4), (2, 3), (3, 4)])
    report = verify_ladder(hand_ladder(0, [[0], [1, 2], [3, 4]]), inst)
    crossing = [v for v in report.violations if v.kind == "crossing"]
    assert crossing and crossing[0].witness == (1, 2, 4, 3)


def test_upward_degree_violation():
    inst = unit(5, [(0, 1), (0, 2), (0, 3), (1, 2), (2, 3), (1, 4), (2, 4), (3, 4)])
    report = verify_ladder(hand_ladder(0, [[0], [1, 2, 3], [4]]), inst)
    assert report.kinds() == {"upward-degree"}
    assert report.violations[0].witness == (4, 1, 2, 3)


def test_other_violation_kinds():
    inst = unit(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    assert "distance" in verify_ladder(hand_ladder(0, [[0], [1], [2, 3]]), inst).kinds()
    assert "anchor" in verify_ladder(hand_ladder(0, [[0, 1], [3], [2]]), inst).kinds()
    assert "coverage" in verify_ladder(hand_ladder(0, [[0], [1, 3]]), inst).kinds()
    # vertex 2 in a layer with a gap between adjacent members
    inst = unit(5, [(0, 1), (0, 2), (0, 3), (1, 3), (1, 4), (2, 4), (3, 4)])
    kinds = verify_ladder(hand_ladder(0, [[0], [1, 2, 3], [4]]), inst).kinds()
    assert "layer-path" in kinds
    lad = hand_ladder(0, [[0], [1, 2, 3], [4]])
    swapped = GeneralLadder(0, VertexOrder((0, 2, 1, 3, 4), {0: 1, 2: 2, 1: 3, 3: 4, 4: 5}),
                            lad.layer, lad.layers)
    assert "layer-order" in verify_ladder(swapped, inst).kinds()


def test_dot_six_cycle():
    inst = unit(6, [(i, (i + 1) % 6) for i in range(6)], [f"v{i}" for i in range(6)])
    lad = extract_ladder(inst, convex_embedding(inst), 0)
    dot = ladder_to_dot(lad, inst)
    groups = re.findall(r"\{ rank=same; /\* layer (\d+) \*/ ([^}]*)\}", dot)
    assert [int(k) for k, _ in groups] == [0, 1, 2, 3]
    members = [re.findall(r'"(v\d)"', body) for _, body in groups]
    assert members == [["v0"], ["v1", "v5"], ["v2", "v4"], ["v3"]]
    assert dot.startswith("graph ladder {") and "ordering=out;" in dot
    assert dot.count(" -- ") == 6 + 2  # real edges plus invisible layer links


def test_relabel():
    inst = unit(3, [(0, 1), (1, 2)])
    lad = extract_ladder(inst, convex_embedding(inst), 0).relabel((10, 20, 30))
    assert lad.anchor == 10 and lad.layers == ((10,), (20,), (30,))
    assert lad.rank == {10: 1, 20: 2, 30: 3}
