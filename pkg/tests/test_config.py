import pytest
import yaml
from pydantic import ValidationError

from src.config.schemas import SuiteConfig, SuiteName
from src.config.settings import DEFAULT_M, DEFAULT_WINDOW
from src.utils.config_loader import ConfigLoader, get_config_loader


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "twf.yaml"
    path.write_text(yaml.safe_dump({"suite": {"M": 1, "max_weight": "3", "window": ["-4", "4"], "jobs": 2}}))
    return path


class TestSuiteConfig:
    def test_defaults(self):
        config = SuiteConfig()
        assert config.M == DEFAULT_M
        assert config.window == DEFAULT_WINDOW
        assert config.output is None

    def test_window_string(self):
        assert SuiteConfig(window="-5/2,3").window == ("-5/2", "3")
        assert SuiteConfig(window="-1:1").window == ("-1", "1")

    @pytest.mark.parametrize("window", ["-1/3,1", "2,1", "a,b"])
    def test_bad_windows(self, window):
        with pytest.raises(ValidationError):
            SuiteConfig(window=window)

    def test_max_weight(self):
        assert SuiteConfig(max_weight=3).max_weight == "3"
        with pytest.raises(ValidationError):
            SuiteConfig(max_weight="-1/2")
        with pytest.raises(ValidationError):
            SuiteConfig(max_weight="1/3")

    def test_positive_counts(self):
        with pytest.raises(ValidationError):
            SuiteConfig(M=0)
        with pytest.raises(ValidationError):
            SuiteConfig(jobs=0)

    def test_suite_expansion(self):
        assert SuiteName.expand(SuiteName.CRT) == [SuiteName.CRT]
        assert SuiteName.ALL not in SuiteName.expand(SuiteName.ALL)
        assert len(SuiteName.expand(SuiteName.ALL)) == 6


class TestConfigLoader:
    def test_yaml_values(self, config_file):
        config = ConfigLoader().build(config_file=str(config_file), environ={})
        assert config.M == 1
        assert config.window == ("-4", "4")
        assert config.jobs == 2

    def test_precedence(self, config_file):
        environ = {"TWF_M": "3", "TWF_WINDOW": "-6,6"}
        config = ConfigLoader().build({"M": 4, "window": None}, str(config_file), environ)
        assert config.M == 4
        assert config.window == ("-6", "6")
        assert config.max_weight == "3"

    def test_missing_explicit_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            ConfigLoader().build(config_file=str(tmp_path / "absent.yaml"), environ={})

    def test_default_file_is_optional(self, tmp_path):
        config = ConfigLoader(config_dir=str(tmp_path)).build(environ={})
        assert config == SuiteConfig()

    def test_non_mapping_rejected(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ValueError):
            ConfigLoader().load_yaml(str(path))

    def test_empty_env_values_ignored(self):
        assert ConfigLoader.load_env({"TWF_SEED": "", "TWF_JOBS": "3"}) == {"jobs": "3"}

    def test_global_loader(self):
        assert get_config_loader() is get_config_loader()
