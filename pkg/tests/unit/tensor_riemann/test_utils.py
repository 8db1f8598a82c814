"""
Tests for tensor_riemann utilities.
"""

import pytest

from tensor_riemann.utils import (
    MASK64,
    flatten_dict,
    format_shape,
    parse_override_value,
    parse_overrides,
    replicate_seed,
    splitmix64,
)


pytestmark = [pytest.mark.tensor_riemann, pytest.mark.unit]


class TestSplitmix64:
    """Test cases for splitmix64."""

    def test_reference_values(self):
        """Test the first outputs of a zero-seeded splitmix64 stream."""
        assert splitmix64(0) == 0xE220A8397B1DCDAF
        assert splitmix64(0x9E3779B97F4A7C15) == 0x6E789E6AA1B965F4

    def test_stays_in_range(self):
        """Test outputs are unsigned 64-bit integers."""
        for x in (0, 1, MASK64, 1 << 63):
            assert 0 <= splitmix64(x) <= MASK64


class TestReplicateSeed:
    """Test cases for replicate_seed."""

    def test_deterministic(self):
        """Test equal inputs give equal seeds."""
        assert replicate_seed(7, (3, 200)) == replicate_seed(7, (3, 200))

    def test_coordinate_order_matters(self):
        """Test (i, j) and (j, i) give different seeds."""
        assert replicate_seed(0, (1, 2)) != replicate_seed(0, (2, 1))

    def test_xor_with_base(self):
        """Test the base seed enters by XOR only."""
        coords = (4, 500)
        assert replicate_seed(5, coords) ^ replicate_seed(0, coords) == 5

    def test_distinct_over_grid(self):
        """Test a replicate grid has no seed collisions."""
        seeds = {replicate_seed(0, (i, n)) for i in range(50) for n in (100, 200, 400)}
        assert len(seeds) == 150


class TestOverrides:
    """Test cases for command-line overrides."""

    def test_values(self):
        """Test JSON values are decoded and other text kept as strings."""
        overrides = parse_overrides(
            [
                "--grid.n=[100,200]",
                "--model.sigma=0.1",
                "--grid.n_rule=null",
                "--model.kind=general",
            ]
        )
        assert overrides == {
            "grid.n": [100, 200],
            "model.sigma": 0.1,
            "grid.n_rule": None,
            "model.kind": "general",
        }

    def test_value_with_equals(self):
        """Test only the first '=' splits key from value."""
        assert parse_overrides(["--output.path=a=b.csv"]) == {"output.path": "a=b.csv"}

    @pytest.mark.parametrize("arg", ["grid.n=1", "--grid.n", "--seeds=1"])
    def test_malformed(self, arg):
        """Test arguments that are not --section.key=value are refused."""
        with pytest.raises(ValueError):
            parse_overrides([arg])

    def test_parse_value(self):
        """Test scalar decoding."""
        assert parse_override_value("true") is True
        assert parse_override_value("3") == 3
        assert parse_override_value("rgd") == "rgd"


class TestFormatting:
    """Test cases for small formatting helpers."""

    def test_flatten_dict(self):
        """Test nested sections flatten into dotted keys."""
        data = {"grid": {"n": [1], "seeds": 2}, "experiment": "phase", "a": {"b": {"c": 1}}}
        assert flatten_dict(data) == {
            "grid.n": [1],
            "grid.seeds": 2,
            "experiment": "phase",
            "a.b.c": 1,
        }

    def test_format_shape(self):
        """Test shapes join with x."""
        assert format_shape((30, 30, 30)) == "30x30x30"
        assert format_shape([7]) == "7"
