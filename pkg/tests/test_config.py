import pytest

from gg.config import (
    PipelineConfig,
    ToolchainSpec,
    WORKDIR_ENV,
    dump_config,
    load_config,
    parse_config,
    save_config,
)
from gg.errors import ConfigError

SAMPLE = """
# toolchains
toolchain.x86_64.command = gcc
toolchain.x86_64.flags = -DMR_HOSTED
toolchain.armv8.command = clang
toolchain.armv8.flags = --target=aarch64-linux-gnu -nostdlib
runner.armv8 = emulate:gg-emu
expansion.armv8 = 1.25

filter.min_lines = 12
filter.max_lines = 9000
strip_boilerplate = true
corpus.isas = x86_64,armv8
corpus.opts = O0,O2

backend = mutant
mutant.rule = immediate_value
beam_width = 4
context_window = 16384
timeout_s = 5.5
pool.verify = 2
tests.dir = /tmp/tests
"""


class TestParse:
    def test_spec_keys(self):
        config = parse_config(SAMPLE)
        assert config.toolchains["x86_64"] == ToolchainSpec("gcc", "-DMR_HOSTED")
        assert config.toolchains["armv8"].command == "clang"
        assert config.runners["armv8"] == "emulate:gg-emu"
        assert config.expansion["armv8"] == 1.25
        assert config.min_lines == 12
        assert config.max_lines == 9000
        assert config.strip_boilerplate is True
        assert config.isas == ["x86_64", "armv8"]
        assert config.opts == ["O0", "O2"]
        assert config.backend == "mutant"
        assert config.mutant_rule == "immediate_value"
        assert config.beam_width == 4
        assert config.context_window == 16384
        assert config.timeout_s == 5.5
        assert config.pool_verify == 2
        assert config.tests_dir == "/tmp/tests"

    def test_defaults(self):
        config = PipelineConfig()
        assert config.min_lines == 10
        assert config.max_lines == 16000
        assert config.strip_boilerplate is False
        assert config.beam_width == 8
        assert config.context_window == 32768
        assert config.timeout_s == 10.0

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("bogus_key = value\n")

    def test_bad_boolean_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("strip_boilerplate = sideways\n")

    def test_missing_equals_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("just some words\n")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.cfg")

    def test_flag_list_split(self):
        spec = ToolchainSpec("clang", "--target=aarch64-linux-gnu -nostdlib")
        assert spec.flag_list() == ["--target=aarch64-linux-gnu", "-nostdlib"]


class TestRoundTrip:
    def test_parse_dump_parse_equality(self):
        config = parse_config(SAMPLE)
        assert parse_config(dump_config(config)) == config

    def test_save_load_equality(self, tmp_path):
        config = parse_config(SAMPLE)
        path = save_config(config, tmp_path / "gg.cfg")
        assert load_config(path) == config

    def test_default_config_round_trips(self):
        config = PipelineConfig()
        assert parse_config(dump_config(config)) == config


class TestWorkdir:
    def test_env_override(self, monkeypatch):
        config = PipelineConfig(workdir="from-config")
        monkeypatch.setenv(WORKDIR_ENV, "/tmp/from-env")
        assert str(config.effective_workdir()) == "/tmp/from-env"

    def test_config_value_without_env(self, monkeypatch):
        monkeypatch.delenv(WORKDIR_ENV, raising=False)
        config = PipelineConfig(workdir="from-config")
        assert str(config.effective_workdir()) == "from-config"

    def test_missing_toolchain_error(self):
        with pytest.raises(ConfigError):
            PipelineConfig().toolchain("armv8")
