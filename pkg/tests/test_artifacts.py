import numpy as np

from socnavmap import artifacts


def test_snapshot_values_and_precedence():
    static = np.array([[True, False, False]])
    explored = np.array([[True, True, False]])
    dynamic = np.array([[True, True, False]])
    assert artifacts.snapshot_image(static, explored, dynamic).tolist() == [[0, 200, 128]]
    assert artifacts.snapshot_image(static, explored).tolist() == [[0, 255, 128]]


def test_pgm_round_trip(tmp_path):
    img = np.arange(12, dtype=np.uint8).reshape(3, 4) * 20
    p = artifacts.write_pgm(tmp_path / "a.pgm", img)
    assert np.array_equal(artifacts.read_pgm(p), img)
    assert p.read_bytes().startswith(b"P5\n4 3\n255\n")


def test_snapshot_layers(tmp_path):
    z = np.zeros((5, 5), dtype=bool)
    paths = artifacts.write_snapshots(tmp_path, 2, 30, z, ~z, z)
    assert sorted(p.name for p in paths) == ["ep2_t30_combined.pgm", "ep2_t30_dynamic.pgm", "ep2_t30_static.pgm"]


def test_csv_formatting():
    rows = [
        {"id": "a", "success": True, "spl_term": 0.5, "psc": 1.0, "collided": False, "steps": 12, "status": "ok"},
        {"id": "b", "status": "error"},
    ]
    text = artifacts.episodes_csv(rows)
    assert text.splitlines() == [
        "id,success,spl_term,psc,collided,steps,status",
        "a,1,0.500000,1.000000,0,12,ok",
        "b,,,,,,error",
    ]
    table = [{"variant": "full", "SR": 50.0, "SPL": 40.0, "PSC": 90.0, "H-Coll": 10.0, "Final Score": 60.0}]
    assert artifacts.table_csv(table).splitlines()[1] == "full,50.00,40.00,90.00,10.00,60.00"
    assert "Final Score" in artifacts.format_table(table)
