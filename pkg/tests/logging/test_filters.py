"""Tests for logging/filters.py and logging/setup.py"""

import logging

import pytest

from dpu_sim.logging.filters import (
    ExperimentContextFilter,
    SuppressDegenerateWarningsFilter,
    experiment_context,
)
from dpu_sim.logging.setup import configure_logging, env_flag


@pytest.fixture
def make_log_record():
    """Factory to create log records."""

    def _create(msg: str, name: str = "test", level: int = logging.WARNING, args=()):
        return logging.LogRecord(
            name=name,
            level=level,
            pathname="test.py",
            lineno=1,
            msg=msg,
            args=args,
            exc_info=None,
        )

    return _create


@pytest.fixture
def restore_root():
    """Put the root logger's handlers and level back after the test."""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield root
    for handler in list(root.handlers):
        root.removeHandler(handler)
    for handler in handlers:
        root.addHandler(handler)
    root.setLevel(level)


class TestExperimentContextFilter:
    """Tests for ExperimentContextFilter and experiment_context()."""

    def test_outside_context(self, make_log_record):
        """Outside an experiment the cell prefix is empty."""
        record = make_log_record("hello")
        assert ExperimentContextFilter().filter(record) is True
        assert record.cell == ""
        assert record.method == "-"

    def test_inside_context(self, make_log_record):
        """Inside the block records carry method, seed and prefix."""
        record = make_log_record("hello")
        with experiment_context("dpu", 3):
            ExperimentContextFilter().filter(record)
        assert record.method == "dpu"
        assert record.seed == 3
        assert record.cell == "[dpu/seed 3] "

    def test_context_is_restored(self, make_log_record):
        """Nested blocks restore the outer cell on exit."""
        record = make_log_record("hello")
        with experiment_context("fu", 1):
            with experiment_context("rpu", 2):
                pass
            ExperimentContextFilter().filter(record)
        assert record.cell == "[fu/seed 1] "


class TestSuppressDegenerateWarningsFilter:
    """Tests for SuppressDegenerateWarningsFilter."""

    METRICS_LOGGER = "dpu_sim.contribution.metrics"

    @pytest.fixture
    def filter_instance(self):
        return SuppressDegenerateWarningsFilter()

    def test_suppresses_normalization_warning(self, filter_instance, make_log_record):
        """The signed-sum fallback warning is dropped."""
        record = make_log_record(
            "local contribution sums to -1e-12; normalizing by its L1 norm instead",
            self.METRICS_LOGGER,
        )
        assert filter_instance.filter(record) is False

    def test_suppresses_zero_warning(self, filter_instance, make_log_record):
        """The all-zero contribution warning is dropped."""
        record = make_log_record("local contribution is zero; ignoring it", self.METRICS_LOGGER)
        assert filter_instance.filter(record) is False

    def test_passes_other_metrics_messages(self, filter_instance, make_log_record):
        """Unrelated messages from the metrics module pass."""
        record = make_log_record("something else", self.METRICS_LOGGER)
        assert filter_instance.filter(record) is True

    def test_passes_other_loggers(self, filter_instance, make_log_record):
        """Matching text from another logger passes."""
        record = make_log_record("contribution is zero", "dpu_sim.rounds.experiment")
        assert filter_instance.filter(record) is True

    def test_handles_bad_format(self, filter_instance, make_log_record):
        """A record whose message cannot be formatted passes."""
        record = make_log_record("%s and %s", self.METRICS_LOGGER, args=("one",))
        assert filter_instance.filter(record) is True


class TestEnvFlag:
    """Tests for env_flag()."""

    @pytest.mark.parametrize("value", ["1", "true", "yes", "on"])
    def test_truthy(self, monkeypatch, value):
        """Non-empty values other than 0/false/no are on."""
        monkeypatch.setenv("DPU_TEST_FLAG", value)
        assert env_flag("DPU_TEST_FLAG") is True

    @pytest.mark.parametrize("value", ["", "0", "False", "no"])
    def test_falsy(self, monkeypatch, value):
        """Empty, 0, false and no are off."""
        monkeypatch.setenv("DPU_TEST_FLAG", value)
        assert env_flag("DPU_TEST_FLAG") is False

    def test_default(self, monkeypatch):
        """Unset variables use the default."""
        monkeypatch.delenv("DPU_TEST_FLAG", raising=False)
        assert env_flag("DPU_TEST_FLAG", "1") is True
        assert env_flag("DPU_TEST_FLAG") is False


class TestConfigureLogging:
    """Tests for configure_logging()."""

    def test_quiet_by_default(self, monkeypatch, restore_root):
        """Without DEBUG or QUIET only warnings are shown."""
        monkeypatch.delenv("DEBUG", raising=False)
        monkeypatch.delenv("QUIET", raising=False)
        configure_logging()
        assert restore_root.level == logging.WARNING
        assert len(restore_root.handlers) == 1

    def test_quiet_off(self, monkeypatch, restore_root):
        """QUIET=0 shows info messages."""
        monkeypatch.delenv("DEBUG", raising=False)
        monkeypatch.setenv("QUIET", "0")
        configure_logging()
        assert restore_root.level == logging.INFO

    def test_debug(self, monkeypatch, restore_root):
        """DEBUG wins over QUIET."""
        monkeypatch.setenv("DEBUG", "1")
        monkeypatch.setenv("QUIET", "1")
        configure_logging()
        assert restore_root.level == logging.DEBUG

    def test_explicit_level(self, restore_root):
        """An explicit level overrides the environment."""
        configure_logging(level=logging.ERROR)
        assert restore_root.level == logging.ERROR

    def test_handler_stamps_cell(self, restore_root):
        """The installed handler carries the context filter."""
        configure_logging(level=logging.INFO)
        (handler,) = restore_root.handlers
        assert any(isinstance(f, ExperimentContextFilter) for f in handler.filters)

    def test_dict_config_file(self, tmp_path, restore_root):
        """A YAML logging config goes to dictConfig."""
        path = tmp_path / "logging.yaml"
        path.write_text(
            "version: 1\n"
            "disable_existing_loggers: false\n"
            "filters:\n"
            "  cell:\n"
            "    (): dpu_sim.logging.ExperimentContextFilter\n"
            "handlers:\n"
            "  console:\n"
            "    class: logging.StreamHandler\n"
            "    filters: [cell]\n"
            "root:\n"
            "  level: ERROR\n"
            "  handlers: [console]\n"
        )
        configure_logging(path)
        assert restore_root.level == logging.ERROR

    def test_dict_config_not_mapping(self, tmp_path, restore_root):
        """A logging config that is not a mapping raises ValueError."""
        path = tmp_path / "logging.yaml"
        path.write_text("- a\n")
        with pytest.raises(ValueError, match="must be a mapping"):
            configure_logging(path)

    def test_missing_file(self, tmp_path, restore_root):
        """A missing logging config raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            configure_logging(tmp_path / "missing.yaml")
