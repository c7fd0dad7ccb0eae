import json

import pytest
from click.testing import CliRunner

from roomforge.cli import main
from roomforge.geometry import Pose2
from roomforge.scene import (
    Scene,
    box_asset,
    place_on_surface,
    rectangular_room,
    scene_surfaces,
    serialize_scene,
)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def scene_file(tmp_path):
    scene = Scene(seed=1)
    scene.add_room(rectangular_room("room", 10, 10))
    scene.add_asset(box_asset("table", (1.2, 0.8, 0.75), 25.0))
    scene.add_asset(box_asset("chair", (0.45, 0.45, 0.9), 6.0))
    floor = scene_surfaces(scene)["room/floor"]
    place_on_surface(scene, "table", floor, Pose2(0, 0, 0))
    place_on_surface(scene, "chair", floor, Pose2(0, -1.3, 0))
    path = tmp_path / "scene.json"
    path.write_bytes(serialize_scene(scene))
    return str(path)


def test_layout_solve_cli(runner, tmp_path):
    specs = tmp_path / "specs.json"
    specs.write_text(json.dumps({"rooms": [{"name": "a", "width": 4, "length": 4}]}))
    out = tmp_path / "plan.json"
    result = runner.invoke(
        main, ["layout", "solve", "--specs", str(specs), "--seed", "3", "--out", str(out)]
    )
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert payload["rooms"][0]["origin"] == [0.0, 0.0]
    assert out.exists()


def test_tool_facing_cli(runner, scene_file):
    result = runner.invoke(main, ["tool", "facing", "--scene", scene_file, "--source", "chair_0", "--target", "table_0"])
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["faces_toward"] is True


def test_tool_reach_cli(runner, scene_file):
    result = runner.invoke(main, ["tool", "reach", "--scene", scene_file, "--hr", "0.35"])
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["fully_reachable"] is True


def test_tool_physics_cli(runner, scene_file):
    result = runner.invoke(main, ["tool", "physics", "--scene", scene_file, "--stage", "furniture"])
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["clean"] is True


def test_metrics_report_cli(runner, scene_file, tmp_path):
    out = tmp_path / "report.json"
    result = runner.invoke(
        main, ["metrics", "report", "--scene", scene_file, "--hr", "0.35", "--seed", "1", "--out", str(out)]
    )
    assert result.exit_code == 0, result.output
    payload = json.loads(out.read_text())
    assert payload["COL_percent"] == 0.0
    assert payload["object_count"] == 2


def test_script_run_exit_codes(runner, tmp_path):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"format_version": "1", "seed": 1, "steps": []}))
    bad_schema = tmp_path / "bad.json"
    bad_schema.write_text(json.dumps({"format_version": "1", "steps": [{"op": "nope"}]}))
    aborting = tmp_path / "abort.json"
    aborting.write_text(
        json.dumps(
            {
                "format_version": "1",
                "seed": 1,
                "steps": [{"op": "tool.snap", "args": {"source": "a", "target": "b"}}],
            }
        )
    )
    out = tmp_path / "out.json"
    assert runner.invoke(main, ["script", "run", str(good), "--out", str(out)]).exit_code == 0
    assert out.exists()
    assert runner.invoke(main, ["script", "run", str(bad_schema)]).exit_code == 2
    assert runner.invoke(main, ["script", "run", str(aborting)]).exit_code == 1


def test_snap_cli_writes_scene(runner, scene_file, tmp_path):
    out = tmp_path / "snapped.json"
    result = runner.invoke(
        main,
        ["tool", "snap", "--scene", scene_file, "--source", "chair_0", "--target", "table_0", "--mode", "toward", "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    assert out.exists()
    moved = json.loads(result.output)["moved_by"]
    assert moved > 0.1
