from pathlib import Path

import pytest

from nlfront.config import SCHEMA, parse_config, parse_text
from nlfront.errors import ParseError, ValidationError

GOLDEN = Path(__file__).parent / "data" / "golden.ini"


def test_minimal_config_fills_defaults():
    rc = parse_text("[model]\nd_rate = 1.5\n")
    assert rc["model"]["d_rate"] == 1.5
    assert rc["kernel"]["family"] == SCHEMA["kernel"]["family"][1]
    assert rc["numerics"]["dx_length"] == SCHEMA["numerics"]["dx_length"][1]
    assert rc.kernel is not None and rc.reaction is not None


def test_golden_round_trip_is_byte_stable():
    text = GOLDEN.read_text()
    once = parse_config(GOLDEN).to_ini()
    assert once == text
    assert parse_text(once).to_ini() == once


def test_every_violation_is_reported():
    text = "[model]\nd_rate = -1\nmu_rate = x\nbogus = 1\n[extra]\nk = 2\n[numerics]\nrecord_every = 0\n"
    with pytest.raises(ValidationError) as info:
        parse_text(text)
    v = info.value.violations
    joined = "\n".join(v)
    for fragment in ("unknown key model.bogus", "unknown section [extra]", "model.mu_rate", "d_rate must be > 0",
                     "record_every"):
        assert fragment in joined
    assert info.value.exit_status != 0


def test_alpha_constraint_is_named():
    text = "[kernel]\nfamily = power_tail\nalpha_exponent = 0.9\nlam_tail = 0.2\n"
    with pytest.raises(ValidationError, match="alpha must be > 1"):
        parse_text(text)


def test_simulation_preconditions_checked_up_front():
    with pytest.raises(ValidationError, match="resolve the kernel core"):
        parse_text("[numerics]\ndx_length = 0.9\n[model]\nh0_length = 2\n")
    with pytest.raises(ValidationError, match="monotone bound"):
        parse_text("[numerics]\ndt_time = 0.47\n")


@pytest.mark.parametrize(
    "text,line",
    [("d_rate = 1\n", 1), ("[model]\nd_rate = 1\n[model]\n", 3), ("[model]\nd_rate 1 2\n", 2), ("[model\n", 1)],
)
def test_parse_errors_carry_position(text, line):
    with pytest.raises(ParseError) as info:
        parse_text(text)
    assert info.value.line == line
    assert info.value.column == 1


def test_sim_echo_ignores_horizon():
    a = parse_text("[numerics]\nT_max_time = 10\n").sim_echo()
    b = parse_text("[numerics]\nT_max_time = 20\n").sim_echo()
    c = parse_text("[model]\nmu_rate = 2\n").sim_echo()
    assert a == b
    assert a != c


def test_missing_file():
    with pytest.raises(ParseError):
        parse_config("/nonexistent/config.ini")
