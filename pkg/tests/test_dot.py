from aftforge.io.dot import export_dot
from aftforge.io.tree_dsl import parse_tree_dsl


def test_attack_event_uses_house_shape(injury_ft):
    dot = export_dot(injury_ft)
    house_lines = [line for line in dot.splitlines() if "shape=house" in line]
    assert len(house_lines) == 2  # both attack events
    assert any("vrpn" in line for line in house_lines)


def test_leaf_has_no_outgoing_edges():
    tree = parse_tree_dsl('faulttree "t" { basic solo: "alone" }')
    dot = export_dot(tree)
    assert '"solo"' in dot
    assert "->" not in dot


def test_edges_follow_child_order():
    tree = parse_tree_dsl('aft "t" { SAND g: "s" { step a: "1" step b: "2" } }')
    dot = export_dot(tree)
    lines = dot.splitlines()
    assert lines.index('  "g" -> "a";') < lines.index('  "g" -> "b";')


def test_output_is_deterministic(injury_ft):
    again = export_dot(injury_ft)
    assert export_dot(injury_ft) == again


def test_gate_shapes_are_distinct():
    tree = parse_tree_dsl(
        'aft "t" { AND "a" { OR "o" { basic "x" } SAND "s" { basic "y" } PAND "p" { basic "z" } } }'
    )
    dot = export_dot(tree)
    shapes = {
        line.split("shape=")[1].split(",")[0]
        for line in dot.splitlines()
        if "shape=" in line and ("AND" in line or "OR" in line)
    }
    assert len(shapes) == 4


def test_quotes_in_labels_are_escaped():
    tree = parse_tree_dsl('faulttree "t" { basic "say \\"hi\\"" }')
    dot = export_dot(tree)
    assert 'say \\"hi\\"' in dot
