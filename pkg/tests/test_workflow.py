"""
End-to-end pipeline runs through the LangGraph workflow and the CLI
"""
import json

import pytest

from main import main
from src.config.scenario import ScenarioConfig
from src.core.exceptions import ValidationError
from src.processing.products import form_slc
from src.stages.analysis import noise_window
from src.stages.report import MANIFEST_NAME
from src.workflow import create_workflow, exit_code_of, run_pipeline


def _write(tmp_path, scenario, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(scenario))
    return str(path)


def _manifest(run_dir):
    return json.loads((run_dir / MANIFEST_NAME).read_text())


def test_stages_follow_pipeline_order(fast_scenario):
    orchestrator = create_workflow(ScenarioConfig.from_dict(fast_scenario), ["report", "focus", "simulate"])
    assert orchestrator.stages == ["simulate", "focus", "report"]


def test_unknown_stage_is_rejected(fast_scenario):
    with pytest.raises(ValueError):
        create_workflow(ScenarioConfig.from_dict(fast_scenario), ["simulate", "publish"])


def test_exit_code_of_failed_state():
    assert exit_code_of({}) == 0
    assert exit_code_of({"error": {"exit_code": 4}}) == 4


def test_invalid_scenario_file(tmp_path, fast_scenario):
    scenario = dict(fast_scenario, plan={"prf": 1000.0})
    with pytest.raises(ValidationError):
        run_pipeline(_write(tmp_path, scenario))
    assert main(["run", _write(tmp_path, scenario, "again.json"), "--output-dir", str(tmp_path / "run")]) == 2


def test_schema_command(capsys):
    assert main(["schema"]) == 0
    assert "geometry" in json.loads(capsys.readouterr().out)["properties"]


def test_beam_miss_fails_the_simulation(tmp_path, fast_scenario):
    scenario = dict(fast_scenario, targets=[{"name": "far", "range_offset": 60000.0}])
    run_dir = tmp_path / "run"
    code, state = run_pipeline(_write(tmp_path, scenario), output_dir=str(run_dir), threads=1)
    assert code == 3
    assert state["error"]["code"] == "beam_miss"
    manifest = _manifest(run_dir)
    assert manifest["status"] == "failed"
    assert manifest["exit_code"] == 3
    assert manifest["error_code"] == "beam_miss"
    assert "simulate" not in manifest["stages"]


@pytest.mark.slow
def test_processed_band_above_prf_fails_focusing(tmp_path, fast_scenario):
    scenario = dict(fast_scenario, focus={"processed_doppler_bandwidth": 4400.0})
    run_dir = tmp_path / "run"
    code, state = run_pipeline(_write(tmp_path, scenario), output_dir=str(run_dir), threads=2)
    assert code == 4
    assert state["error"]["code"] == "doppler_overflow"
    manifest = _manifest(run_dir)
    assert manifest["status"] == "failed"
    assert manifest["stages"] == ["simulate"]


@pytest.mark.slow
def test_full_run(tmp_path, fast_scenario):
    run_dir = tmp_path / "run"
    code, state = run_pipeline(_write(tmp_path, fast_scenario), output_dir=str(run_dir), threads=2)
    assert code == 0
    assert not state.get("error")

    manifest = _manifest(run_dir)
    assert manifest["status"] == "ok"
    assert manifest["seed"] == 3
    assert manifest["stages"] == ["simulate", "focus", "slc", "grd", "analyze"]
    paths = {entry["path"] for entry in manifest["outputs"]}
    for name in ("raw.bin", "slc.bin", "grd.bin", "irf_reports.json"):
        assert name in paths
    for entry in manifest["outputs"]:
        assert (run_dir / entry["path"]).exists()

    reports = json.loads((run_dir / "irf_reports.json").read_text())
    assert len(reports) == 1
    assert reports[0]["target"] == "CR1"


@pytest.mark.slow
def test_repeated_runs_are_identical(tmp_path, fast_scenario):
    config = _write(tmp_path, fast_scenario)
    digests = []
    for name in ("first", "second"):
        code, _ = run_pipeline(config, output_dir=str(tmp_path / name), threads=2)
        assert code == 0
        digests.append({
            e["path"]: e["sha256"] for e in _manifest(tmp_path / name)["outputs"] if e["kind"] != "plot"
        })
    assert digests[0] == digests[1]


class TestNoiseWindow:
    def test_targets_inside_the_slc_need_a_region(self, flat_image, center_target):
        with pytest.raises(ValidationError, match="noise_region"):
            noise_window(form_slc(flat_image), [center_target], None, guard=1)

    def test_region_clear_of_the_targets(self, flat_image, center_target):
        rows, cols = noise_window(form_slc(flat_image), [center_target], (0, 1, 0, 1), guard=0)
        assert (rows, cols) == (slice(0, 1), slice(0, 1))

    def test_region_too_close_to_a_target(self, flat_image, center_target):
        with pytest.raises(ValidationError, match="CR1"):
            noise_window(form_slc(flat_image), [center_target], (0, 1, 0, 1), guard=2)

    def test_no_targets_uses_the_whole_image(self, flat_image):
        rows, cols = noise_window(form_slc(flat_image), [], None, guard=4)
        assert (rows, cols) == (slice(0, 4), slice(0, 5))


@pytest.mark.slow
def test_nesz_with_targets_and_no_region(tmp_path, fast_scenario):
    scenario = dict(fast_scenario, noise={"enabled": True}, stages=["simulate", "focus", "slc", "nesz"])
    code, state = run_pipeline(_write(tmp_path, scenario), output_dir=str(tmp_path / "run"), threads=2)
    assert code == 6
    assert state["error"]["stage"] == "nesz"
    assert state["error"]["code"] == "validation"
    assert "noise_region" in state["error"]["message"]
