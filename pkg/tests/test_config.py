import json
import tempfile
import unittest
from pathlib import Path

from pydantic import ValidationError

from src.config.loader import apply_override, dump_config, load_config
from src.config.schemas import Config, SolverParams, TetComponent, Weights, cm, ms
from src.errors import ConfigError


class DefaultsTest(unittest.TestCase):
    def test_weight_table(self):
        self.assertEqual(Weights().as_tuple(), (1e2, 1e1, 1e4, 1e4, 1e2, 1e2, 1e2))
        self.assertEqual(Weights().for_component(TetComponent.J), 1e4)
        self.assertEqual(Weights().for_component("S"), 1e1)

    def test_parameter_table(self):
        params = SolverParams()
        self.assertEqual(params.pd_iterations, 10)
        self.assertEqual(params.alpha, 0.01)
        self.assertEqual(params.l_min, 0.025)
        self.assertEqual(params.contact_margin, 0.005)
        self.assertEqual(params.cylinder_radius, 0.005)
        self.assertEqual(params.timestep, 0.05)
        self.assertEqual(params.delta_eps, 0.05)
        self.assertAlmostEqual(params.correspondence_distance, 0.05)
        self.assertEqual(params.max_correspondence_angle, 60.0)

    def test_unit_helpers(self):
        self.assertEqual(cm(2.5), 0.025)
        self.assertEqual(cm(0.5), 0.005)
        self.assertEqual(ms(50), 0.05)

    def test_explicit_correspondence_distance(self):
        self.assertEqual(SolverParams(max_correspondence_distance=0.2).correspondence_distance, 0.2)

    def test_models_are_frozen(self):
        with self.assertRaises(ValidationError):
            Weights().w_S = 3.0


class LoadConfigTest(unittest.TestCase):
    def test_no_file_gives_defaults(self):
        self.assertEqual(load_config(), Config())

    def test_overrides(self):
        config = load_config(None, ["params.pd_iterations=3", "weights.w_S=5", "paths.target=head.obj"])
        self.assertEqual(config.params.pd_iterations, 3)
        self.assertEqual(config.weights.w_S, 5.0)
        self.assertEqual(config.paths.target, Path("head.obj"))
        self.assertEqual(config.weights.w_J, 1e4)

    def test_file_then_overrides(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "config.json"
            path.write_text(json.dumps({"params": {"alpha": 0.1, "pd_iterations": 4}}))
            config = load_config(path, ["params.pd_iterations=7"])
        self.assertEqual(config.params.alpha, 0.1)
        self.assertEqual(config.params.pd_iterations, 7)

    def test_dump_round_trip(self):
        config = load_config(None, ["params.timestep=0.02", "weights.w_corr=50", "paths.output_dir=out"])
        self.assertEqual(Config.model_validate(json.loads(dump_config(config))), config)

    def test_unknown_key(self):
        with self.assertRaises(ConfigError):
            load_config(None, ["params.stiffness=1"])

    def test_invalid_value(self):
        with self.assertRaises(ConfigError):
            load_config(None, ["params.alpha=-1"])
        with self.assertRaises(ConfigError):
            load_config(None, ["params.timestep=0"])

    def test_malformed_override(self):
        with self.assertRaises(ConfigError):
            apply_override({}, "params.alpha")
        with self.assertRaises(ConfigError):
            apply_override({"params": 3}, "params.alpha=1")

    def test_bad_files(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ConfigError):
                load_config(Path(tmp) / "missing.json")
            broken = Path(tmp) / "broken.json"
            broken.write_text("{not json")
            with self.assertRaises(ConfigError):
                load_config(broken)
            listing = Path(tmp) / "list.json"
            listing.write_text("[1, 2]")
            with self.assertRaises(ConfigError):
                load_config(listing)


if __name__ == "__main__":
    unittest.main()
