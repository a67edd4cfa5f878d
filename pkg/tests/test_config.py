import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import SCENARIOS
from omnicage.config import (
    TOMLDecodeError,
    config_digest,
    dump_config,
    load_config,
    parse_config,
)
from omnicage.errors import ConfigurationError, FormationSizeError
from omnicage.simulator import ScenarioConfig

MINIMAL = """
[scenario]
kind = "single_track"
duration = 5.0

[trajectory]
kind = "circle"
"""


@pytest.mark.parametrize("path", sorted(p for p in SCENARIOS.glob("*.toml") if "headings" not in p.name))
def test_shipped_scenarios_round_trip(path):
    cfg = load_config(path)
    text = dump_config(cfg)
    again = parse_config(text)
    assert again == cfg
    assert dump_config(again) == text


def test_defaults_filled():
    cfg = parse_config(MINIMAL)
    assert cfg.dt == 0.01
    assert cfg.command_delay == 0.02
    assert cfg.trajectory["radius"] == 0.25
    assert cfg.rng_seed == 0


def test_degree_keys():
    cfg = parse_config(
        MINIMAL.replace('kind = "circle"', 'kind = "circle"\nphase_deg = 90\nheading0_deg = 45')
    )
    assert cfg.trajectory["phase"] == pytest.approx(math.pi / 2)
    assert cfg.trajectory["heading0"] == pytest.approx(math.pi / 4)


def test_degree_and_radian_conflict():
    with pytest.raises(ConfigurationError):
        parse_config(MINIMAL.replace('kind = "circle"', 'kind = "circle"\nphase = 1.0\nphase_deg = 90'))


def test_headings_in_degrees():
    text = """
[scenario]
kind = "structure_track"
duration = 5.0
[formation]
shape = "triangle"
headings_deg = [0, 120, 240]
[trajectory]
kind = "line"
"""
    cfg = parse_config(text)
    np.testing.assert_allclose(cfg.headings.angles, np.radians([0, 120, 240]))
    assert cfg.formation.n == 3


def test_positions_recentred():
    text = """
[scenario]
kind = "structure_track"
duration = 5.0
[formation]
positions = [[1.0, 0.0], [1.1, 0.0], [1.05, 0.0866]]
[trajectory]
kind = "line"
"""
    cfg = parse_config(text)
    assert np.abs(cfg.formation.positions.mean(axis=0)).max() < 1e-12


def test_two_module_formation():
    text = """
[scenario]
kind = "structure_track"
duration = 5.0
[formation]
positions = [[0.0, 0.0], [0.1, 0.0]]
[trajectory]
kind = "line"
"""
    with pytest.raises(FormationSizeError):
        parse_config(text)


def test_malformed_toml_has_position():
    with pytest.raises(TOMLDecodeError) as info:
        parse_config("[scenario]\nkind = \n")
    assert "line 2" in str(info.value)


@pytest.mark.parametrize(
    "text",
    [
        MINIMAL + "\n[gains.structure]\nk_x9 = 1.0\n",
        MINIMAL + "\nbogus = 1\n",
        MINIMAL.replace('kind = "circle"', 'kind = "circle"\nradius_mm = 3'),
        MINIMAL.replace("duration = 5.0", "duration = 0.0"),
        MINIMAL.replace('kind = "single_track"', 'kind = "orbit"'),
        "[scenario]\nkind = \"single_track\"\n",
    ],
)
def test_semantic_errors(text):
    with pytest.raises(ConfigurationError):
        parse_config(text)


def test_digest_tracks_content():
    a = parse_config(MINIMAL)
    b = parse_config(MINIMAL.replace("duration = 5.0", "duration = 5.5"))
    assert config_digest(a) == config_digest(parse_config(MINIMAL))
    assert config_digest(a) != config_digest(b)


reals = st.floats(0.01, 10.0, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(reals, reals, st.floats(-3.0, 3.0), st.integers(0, 2**31), st.integers(1, 5))
def test_round_trip_property(radius, speed, phase, seed, k):
    cfg = ScenarioConfig(
        kind="single_track",
        trajectory={"kind": "circle", "radius": radius, "speed": speed, "phase": phase},
        duration=0.01 * k * 7,
        initial_offset=(phase / 10, -phase / 7, phase),
        command_delay=0.01 * k,
        rng_seed=seed,
    )
    assert parse_config(dump_config(cfg)) == cfg
