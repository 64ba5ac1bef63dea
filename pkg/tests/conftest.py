import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


def empty_room(goal=(3.0, 0.0), humans=()):
    return {
        "name": "empty",
        "scene": {"bounds": [-2, -3, 5, 3], "walls": []},
        "robot": {"start": [0.0, 0.0, 0.0]},
        "goal": list(goal),
        "humans": list(humans),
        "seed": 0,
    }


def crossing_room():
    human = {"id": 0, "start": [2.0, 2.0, -90.0], "waypoints": [[2.0, -2.0], [2.0, 2.0]], "speed_factor": 1.0}
    return empty_room(goal=(4.0, 0.0), humans=[human])


@pytest.fixture
def scenario_file(tmp_path):
    def make(data, name="scenario"):
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(data))
        return p

    return make


@pytest.fixture
def small_suite(tmp_path):
    d = tmp_path / "suite"
    d.mkdir()
    (d / "a_empty.json").write_text(json.dumps(empty_room()))
    (d / "b_cross.json").write_text(json.dumps(crossing_room()))
    return d
