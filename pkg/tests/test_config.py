"""Tests for the line-based run-configuration format."""

import dataclasses

import pytest

from ksmix.config import (
    ConfigError,
    RunConfig,
    override,
    parse_config,
    serialize_config,
)

MINIMAL = """
[scenario]
scenario = RUN
horizon = 0.5
amplitudes = 0.0, 2.0
"""


class TestParse:
    def test_defaults_fill_missing_sections(self):
        cfg = parse_config(MINIMAL)
        assert cfg.scenario.name == "RUN"
        assert cfg.scenario.horizon == 0.5
        assert cfg.scenario.amplitudes == (0.0, 2.0)
        assert cfg.grid.n == 128  # untouched default

    def test_comments_and_blank_lines_ignored(self):
        text = "# leading comment\n\n[grid]\nn = 64  # inline\n"
        cfg = parse_config(text)
        assert cfg.grid.n == 64

    def test_bool_and_int_types(self):
        text = "[stepper]\nenable_advection = false\n[grid]\ndim = 3\nn = 32\n"
        cfg = parse_config(text)
        assert cfg.stepper.enable_advection is False
        assert cfg.grid.dim == 3

    def test_unknown_key_names_the_line(self):
        text = "[grid]\nn = 64\nbogus = 1\n"
        with pytest.raises(ConfigError, match="line 3"):
            parse_config(text)

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="mystery"):
            parse_config("[mystery]\nx = 1\n")

    def test_duplicate_key_rejected(self):
        text = "[grid]\nn = 64\nn = 32\n"
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config(text)

    def test_key_outside_section_rejected(self):
        with pytest.raises(ConfigError, match="outside"):
            parse_config("n = 64\n")

    def test_bad_value_type_rejected(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config("[grid]\nn = sixty-four\n")

    def test_bad_bool_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("[stepper]\nenable_advection = yes\n")


class TestValidation:
    def test_unknown_scenario(self):
        with pytest.raises(ConfigError, match="scenario"):
            parse_config("[scenario]\nscenario = FROBNICATE\n")

    def test_unknown_initial_kind(self):
        with pytest.raises(ConfigError):
            parse_config("[initial]\nkind = vortex\n")

    def test_unknown_flow_kind(self):
        with pytest.raises(ConfigError):
            parse_config("[flow]\nkind = tornado\n")

    def test_amplitudes_must_be_sorted(self):
        with pytest.raises(ConfigError, match="sorted"):
            parse_config("[scenario]\namplitudes = 2.0, 1.0\n")

    def test_amplitudes_must_be_nonempty(self):
        with pytest.raises(ConfigError, match="nonempty"):
            parse_config("[scenario]\namplitudes = ,\n")


class TestRoundtrip:
    def test_serialize_then_parse_is_identity(self):
        cfg = parse_config(MINIMAL)
        assert parse_config(serialize_config(cfg)) == cfg

    def test_roundtrip_of_defaults(self):
        cfg = RunConfig()
        assert parse_config(serialize_config(cfg)) == cfg

    def test_roundtrip_preserves_every_section(self):
        text = """
[grid]
dim = 2
n = 64
[initial]
kind = bump
mass = 60.0
radius = 0.03
[flow]
kind = shear
m = 2
t_switch = 0.05
[stepper]
dt_max = 0.0005
[detector]
h1_cap = 100000.0
[scenario]
scenario = BLOWUP_BASELINE
horizon = 0.02
amplitudes = 0.0
"""
        cfg = parse_config(text)
        again = parse_config(serialize_config(cfg))
        assert again == cfg
        assert again.initial.kind == "bump"
        assert again.detector.h1_cap == 1e5


class TestOverride:
    def test_resolution_override(self):
        cfg = parse_config(MINIMAL)
        assert override(cfg, resolution=256).grid.n == 256
        assert cfg.grid.n == 128  # original untouched

    def test_seed_override(self):
        cfg = parse_config(MINIMAL)
        assert override(cfg, seed=7).scenario.seed == 7

    def test_no_override_is_identity(self):
        cfg = parse_config(MINIMAL)
        assert override(cfg) == cfg


class TestRepoConfigs:
    @pytest.mark.parametrize(
        "name",
        [
            "run.cfg",
            "blowup.cfg",
            "blowup_subcritical.cfg",
            "suppress.cfg",
            "relax.cfg",
            "approx.cfg",
            "mixbench.cfg",
            "ineq.cfg",
        ],
    )
    def test_shipped_configs_parse(self, name):
        from pathlib import Path

        root = Path(__file__).resolve().parent.parent
        cfg = parse_config((root / "configs" / name).read_text())
        assert isinstance(cfg, RunConfig)
