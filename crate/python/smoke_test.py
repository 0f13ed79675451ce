"""Smoke test of the Python bindings.

Build and install first:

    pip install --no-build-isolation -e crates/python
    python python/smoke_test.py
"""

import json
import math

import persistency as p


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    w4 = p.build_state("w:4")
    assert w4.dims == [2, 2, 2, 2] and w4.is_pure
    amps = w4.amplitudes()
    assert sum(1 for a in amps if abs(a) > 1e-12) == 4
    for i in (1, 2, 4, 8):
        close(amps[i].real, 0.5, 1e-12)

    again = p.State.from_json(w4.to_json())
    close(p.trace_distance(w4, again), 0.0, 1e-12)

    pair = w4.reduced([0, 1])
    assert not pair.is_pure and len(pair.density_matrix()) == 4
    status = pair.entanglement_status()
    assert status["verdict"] == "entangled", status["verdict"]
    noisy = p.build_state("ghz:3").reduced([0, 1])
    assert noisy.entanglement_status()["verdict"] == "separable"

    assert p.persistency_entanglement(p.build_state("w:3"), 0) == (2, 2)
    assert p.persistency_nonlocality(p.build_state("w:4"), 0) >= 2
    close(p.strength(p.build_state("ti:4:2"), 1, 0), 0.707, 0.01)

    report = p.analyze("w:3", 0, hidden=False)
    assert report["pe"]["lo"] == report["pe"]["hi"] == 2
    assert report["pnl"]["lb"] == 1
    assert report["elapsed_ms"] is None
    assert report == p.analyze("w:3", 0, hidden=False)

    assert p.cluster_bounds(6, "linear") == (2, 2)
    close(p.asymmetry_bound(3.0, 2.0, [[2, 0], [0, -1]]), 0.25, 1e-12)
    close(p.asymmetry_bound(3.0, 2.0, [[0, 1j], [-1j, 0]]), 0.5, 1e-12)

    head = p.headline(0)
    assert all(item["pass"] for item in head["items"]), json.dumps(head, indent=1)
    close(head["items"][0]["computed"], 4 * math.sqrt(2), 1e-4)

    rows = p.reference_table()
    assert len(rows) == 24 and rows[0]["label"] == "W3"

    try:
        p.build_state("bogus:3")
    except ValueError as e:
        assert "position 0" in str(e)
    else:
        raise AssertionError("bad spec accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
