"""
Tests for scenario validation, plan building and runtime configuration
"""
import json
import re
from pathlib import Path

import pytest

from src.config import Config, get_config, load_config
from src.config.scenario import (
    ScenarioConfig,
    build_chirp,
    build_focus_config,
    build_plan,
    build_targets,
    scenario_schema,
)
from src.core.exceptions import ValidationError
from src.processing.rawsim import scene_reference
from src.processing.signal import WindowFamily


class TestScenario:
    def test_defaults_are_valid(self):
        scenario = ScenarioConfig.from_dict({})
        assert scenario.chirp.bandwidth == 300e6
        assert scenario.stages[0] == "simulate"

    def test_prf_below_range(self):
        with pytest.raises(ValidationError, match="prf"):
            ScenarioConfig.from_dict({"plan": {"prf": 1000.0}})

    def test_too_many_targets(self):
        targets = [{"name": f"T{i}"} for i in range(20)]
        with pytest.raises(ValidationError, match="25"):
            ScenarioConfig.from_dict({"targets": targets, "target_grid": {"rows": 3, "cols": 3}})

    def test_fixed_scale_needs_fixed_policy(self):
        with pytest.raises(ValidationError):
            ScenarioConfig.from_dict({"product": {"fixed_scale": 2.0}})
        ScenarioConfig.from_dict({"product": {"scale_policy": "FIXED", "fixed_scale": 2.0}})

    def test_duty_cycle_limit(self):
        with pytest.raises(ValidationError, match="duty"):
            ScenarioConfig.from_dict({"chirp": {"pulse_duration": 100e-6}, "plan": {"prf": 6000.0}})

    def test_spotlight_incidence_limits(self):
        with pytest.raises(ValidationError):
            ScenarioConfig.from_dict({"geometry": {"mode": "SPOTLIGHT", "center_incidence": 15.0}})

    def test_stages_are_put_in_pipeline_order(self):
        scenario = ScenarioConfig.from_dict({"stages": ["report", "focus", "simulate"]})
        assert scenario.stages == ["simulate", "focus", "report"]

    def test_unknown_stage(self):
        with pytest.raises(ValidationError, match="unknown stages"):
            ScenarioConfig.from_dict({"stages": ["simulate", "publish"]})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError, match="not found"):
            ScenarioConfig.from_file(str(tmp_path / "absent.json"))

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ValidationError, match="JSON"):
            ScenarioConfig.from_file(str(path))

    def test_schema_lists_sections(self):
        assert "geometry" in scenario_schema()["properties"]


class TestBuilders:
    def test_chirp_follows_the_oversampling(self, fast_scenario):
        chirp = build_chirp(ScenarioConfig.from_dict(fast_scenario))
        assert chirp.sample_rate == pytest.approx(120e6)

    def test_plan_and_targets(self, fast_scenario):
        scenario = ScenarioConfig.from_dict(fast_scenario)
        plan = build_plan(scenario)
        assert plan.prf == 4500.0
        assert plan.seed == 3
        targets = build_targets(scenario, plan)
        assert len(targets) == 1
        ref = scene_reference(plan)
        assert targets[0].position == pytest.approx(ref.center, abs=1e-3)

    def test_target_grid(self, fast_scenario):
        scenario = ScenarioConfig.from_dict({**fast_scenario, "target_grid": {"rows": 2, "cols": 3}})
        targets = build_targets(scenario, build_plan(scenario))
        assert len(targets) == 6
        assert len({t.name for t in targets}) == 6

    def test_focus_windows(self):
        scenario = ScenarioConfig.from_dict(
            {"focus": {"azimuth_window": {"family": "RAISED_COSINE", "target_pslr": -18.0}}}
        )
        cfg = build_focus_config(scenario)
        assert cfg.range_window.is_uniform
        assert cfg.azimuth_window.family == WindowFamily.RAISED_COSINE
        assert cfg.azimuth_window.target_pslr == -18.0


class TestRuntimeConfig:
    def test_threads_from_environment(self, monkeypatch):
        monkeypatch.setenv("SARKIT_THREADS", "6")
        assert get_config().threads == 6

    def test_bad_thread_count_falls_back(self, monkeypatch):
        monkeypatch.setenv("SARKIT_THREADS", "many")
        assert Config().threads == 1

    def test_load_from_file(self, tmp_path, monkeypatch):
        monkeypatch.delenv("SARKIT_THREADS", raising=False)
        path = tmp_path / "runtime.json"
        path.write_text(json.dumps({"threads": 3, "plots": False, "logging": {"level": "DEBUG"}}))
        config = load_config(str(path))
        assert config.threads == 3
        assert config.plots is False
        assert config.logging.level == "DEBUG"
        assert get_config() is config

    def test_config_path_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.delenv("SARKIT_THREADS", raising=False)
        path = tmp_path / "runtime.json"
        path.write_text(json.dumps({"output_root": "elsewhere"}))
        monkeypatch.setenv("SARKIT_CONFIG_PATH", str(path))
        assert load_config().output_root == "elsewhere"

    def test_round_trip_through_dict(self, monkeypatch):
        monkeypatch.delenv("SARKIT_THREADS", raising=False)
        config = Config(threads=2)
        assert Config.from_dict(config.to_dict()).to_dict() == config.to_dict()

    def test_unknown_key_is_rejected(self):
        with pytest.raises(ValidationError):
            Config.from_dict({"threds": 2})

    def test_bad_log_level(self):
        with pytest.raises(ValidationError):
            Config.from_dict({"logging": {"level": "chatty"}})

    def test_missing_runtime_file(self, tmp_path):
        with pytest.raises(ValidationError):
            load_config(str(tmp_path / "absent.json"))

    def test_cli_reports_bad_runtime_config(self, tmp_path):
        from main import main

        path = tmp_path / "runtime.json"
        path.write_text("{not json")
        assert main(["run", str(tmp_path / "scenario.json"), "--runtime-config", str(path)]) == 2


class TestDependencies:
    ROOT = Path(__file__).resolve().parents[1]
    MODULE_NAMES = {"python-dotenv": "dotenv"}

    def _runtime_requirements(self):
        text = (self.ROOT / "requirements.txt").read_text().split("# Development")[0]
        lines = [line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")]
        return [re.split(r"[<>=\[]", line)[0] for line in lines]

    def test_every_runtime_requirement_is_imported(self):
        sources = [p.read_text() for p in (self.ROOT / "src").rglob("*.py")]
        sources.append((self.ROOT / "main.py").read_text())
        code = "\n".join(sources)
        for name in self._runtime_requirements():
            module = self.MODULE_NAMES.get(name, name).replace("-", "_")
            assert re.search(rf"^\s*(import|from) {module}\b", code, re.MULTILINE), name

    def test_manifests_declare_the_same_runtime_stack(self):
        pyproject = (self.ROOT / "pyproject.toml").read_text()
        for name in self._runtime_requirements():
            assert f'"{name}' in pyproject, name
        assert "typing-extensions" not in pyproject
