import json

import pytest

from crossdock.instance_io import (
    SchemaError,
    generate,
    parse_instance,
    parse_solution,
    serialize_instance,
    serialize_solution,
)
from crossdock.model import Solution, validation_issues


def test_instance_round_trip(nine_truck):
    again = parse_instance(serialize_instance(nine_truck))
    assert again == nine_truck


def test_generated_round_trip_preserves_numbers():
    inst = generate(3, n=4, m=2, capacity_ratio=0.5)
    again = parse_instance(serialize_instance(inst))
    assert again.arrival == inst.arrival
    assert again.capacity == inst.capacity
    assert again == inst


def test_solution_round_trip(s_star):
    assert parse_solution(serialize_solution(s_star)) == s_star


def test_empty_document_is_schema_error():
    with pytest.raises(SchemaError):
        parse_instance("{}")
    with pytest.raises(SchemaError):
        parse_solution("{}")


def test_unknown_keys_rejected(nine_truck):
    doc = json.loads(serialize_instance(nine_truck))
    doc["surprise"] = 1
    with pytest.raises(SchemaError, match="surprise"):
        parse_instance(doc)
    with pytest.raises(SchemaError, match="extra"):
        parse_solution({"dock": [0], "transfers": [], "extra": True})


def test_schema_errors_name_the_key():
    with pytest.raises(SchemaError, match="'arrival'"):
        parse_instance({
            "n": 1, "m": 1, "arrival": "nope", "departure": [1.0],
            "transfer_time": [[0.0]], "transfer_cost": [[0.0]],
            "flow": [[0.0]], "penalty": [[0.0]], "capacity": "unbounded",
        })
    with pytest.raises(SchemaError, match=r"transfer_time\[1\]"):
        parse_instance({
            "n": 1, "m": 1, "arrival": [0.0], "departure": [1.0],
            "transfer_time": [[0.0, 1.0]], "transfer_cost": [[0.0]],
            "flow": [[0.0]], "penalty": [[0.0]], "capacity": "unbounded",
        })


def test_capacity_unbounded_sentinel():
    doc = {
        "n": 1, "m": 1, "arrival": [0.0], "departure": [1.0],
        "transfer_time": [[0.0]], "transfer_cost": [[0.0]],
        "flow": [[0.0]], "penalty": [[0.0]], "capacity": "unbounded",
    }
    inst = parse_instance(doc)
    assert inst.capacity is None
    assert inst.unbounded_capacity
    doc["capacity"] = 12
    assert parse_instance(doc).capacity == 12.0
    doc["capacity"] = "lots"
    with pytest.raises(SchemaError, match="capacity"):
        parse_instance(doc)


def test_solution_range_checks(nine_truck):
    with pytest.raises(SchemaError, match="length"):
        parse_solution({"dock": [1, 2], "transfers": []}, n=9, m=6)
    with pytest.raises(SchemaError, match="out of range"):
        parse_solution({"dock": [7] + [0] * 8, "transfers": []}, n=9, m=6)
    with pytest.raises(SchemaError, match="out of range"):
        parse_solution(
            {"dock": [1] + [0] * 8, "transfers": [[1, 10, 1, 1]]}, n=9, m=6
        )


def test_solution_duplicate_pair_rejected():
    with pytest.raises(SchemaError, match="two transfers"):
        parse_solution(
            {"dock": [1, 1], "transfers": [[1, 2, 1, 1], [1, 2, 2, 2]]}
        )


def test_fixture_matches_printed_data(nine_truck):
    # spot checks against the printed matrices
    assert nine_truck.a(1) == 15.42 and nine_truck.d(7) == 18.05
    assert nine_truck.t(1, 2) == 1.0 and nine_truck.t(3, 4) == 5.0
    assert nine_truck.f(1, 3) == 190.0 and nine_truck.p(1, 3) == 190.0
    assert nine_truck.f(9, 9) == 200.0
    # the standing assumption zeroes flows toward already-departed trucks;
    # the penalty matrix stays as printed
    for (i, j) in ((3, 1), (3, 2), (4, 1), (4, 2), (7, 1), (7, 2)):
        assert nine_truck.f(i, j) == 0.0
        assert nine_truck.p(i, j) > 0.0
    assert nine_truck.capacity is None


def test_generator_determinism():
    a = generate(0, n=4, m=2, flow_density=1.0)
    b = generate(0, n=4, m=2, flow_density=1.0)
    assert a == b
    c = generate(1, n=4, m=2, flow_density=1.0)
    assert c != a


def test_generator_zero_density():
    inst = generate(5, n=4, m=2, flow_density=0.0)
    assert all(x == 0.0 for row in inst.flow for x in row)


def test_generator_always_valid():
    for seed in range(1000):
        inst = generate(seed, n=1 + seed % 4, m=1 + seed % 3,
                        flow_density=(seed % 5) / 4.0,
                        capacity_ratio=0.5 if seed % 2 else None)
        assert validation_issues(inst) == []


def test_generator_capacity_ratio():
    inst = generate(2, n=4, m=2, capacity_ratio=0.5)
    total = sum(
        inst.flow[i][j] for i in range(4) for j in range(4) if i != j
    )
    assert inst.capacity == max(1.0, round(0.5 * total))


def test_unassigned_marker_is_zero():
    sol = Solution.empty(3)
    assert sol.dock == (0, 0, 0)
    assert not sol.is_docked(1)
    assert sol.docked_trucks() == ()
