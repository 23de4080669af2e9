"""Weight grammar, series literals and config files."""

import numpy as np
import pytest

from bergfrac.parsing import (
    ParseError,
    parse_config_text,
    parse_series_literal,
    parse_weight_spec,
    split_top_level,
)
from bergfrac.weights import (
    Logarithmic,
    Standard,
    Tabulated,
    ZeroAnnulus,
    alpha_shift,
    library,
    plus_transform,
    r2_multiply,
    star_transform,
    tilde_weight,
)


class TestWeightSpecs:
    def test_bases(self):
        assert parse_weight_spec("std:alpha=1.5") == Standard(1.5)
        assert parse_weight_spec("log:beta=2") == Logarithmic(2.0)
        assert parse_weight_spec("  std:alpha=0  ") == Standard(0.0)
        assert parse_weight_spec("tab:[0:1,0.5:2,0.9:1]") == Tabulated((0, 0.5, 0.9), (1, 2, 1))

    def test_suffixes_apply_left_to_right(self):
        w = parse_weight_spec("std:alpha=1+*~^r2^alpha=2")
        ref = plus_transform(Standard(1.0))
        ref = alpha_shift(r2_multiply(tilde_weight(star_transform(ref))), 2.0)
        assert w == ref

    def test_zero_base_binds_tighter_than_suffix(self):
        outer = parse_weight_spec("zero:[0.3,0.4]:std:alpha=1+")
        inner = parse_weight_spec("zero:[0.3,0.4]:(std:alpha=1+)")
        assert outer == plus_transform(ZeroAnnulus(Standard(1.0), 0.3, 0.4))
        assert inner == ZeroAnnulus(plus_transform(Standard(1.0)), 0.3, 0.4)
        assert outer != inner

    def test_parentheses_group(self):
        assert parse_weight_spec("(std:alpha=1^alpha=2)+") == plus_transform(
            alpha_shift(Standard(1.0), 2.0))

    @pytest.mark.parametrize("name", sorted(library()))
    def test_library_labels_round_trip(self, name):
        w = library()[name]
        assert parse_weight_spec(w.label) == w

    @pytest.mark.parametrize("text", [
        "std:alpha=1+*", "log:beta=2^r2", "zero:[0.3,0.4]:(std:alpha=1+)",
        "std:alpha=0^alpha=2.5~", "tab:[0:1,0.5:2,0.9:1]+",
    ])
    def test_composed_labels_round_trip(self, text):
        w = parse_weight_spec(text)
        assert parse_weight_spec(w.label) == w

    @pytest.mark.parametrize("text, pos", [
        ("std:alpha=", 10),
        ("foo", 0),
        ("std:alpha=1^alpha=-1", 18),
        ("std:alpha=1 x", 11),
        ("(std:alpha=1", 12),
        ("std:alpha=-2", 0),
        ("zero:[0.5,0.4]:std:alpha=1", 0),
        ("tab:[0:1,0.5:2,1:0]", 0),
    ])
    def test_error_positions(self, text, pos):
        with pytest.raises(ParseError) as info:
            parse_weight_spec(text)
        assert info.value.position == pos
        # caret line points at the offending offset
        assert str(info.value).splitlines()[-1] == "  " + " " * pos + "^"

    def test_negative_alpha_shift_rejected(self):
        with pytest.raises(ParseError, match="alpha >= 0"):
            parse_weight_spec("std:alpha=1^alpha=-0.5")


class TestSeriesLiterals:
    def test_poly(self):
        f = parse_series_literal("poly:[1, 2j, 3]")
        np.testing.assert_array_equal(f.coeffs, [1, 2j, 3])

    def test_named_with_degree(self):
        assert parse_series_literal("logfn@8").degree == 8
        assert parse_series_literal("geom").degree == 64
        assert parse_series_literal("geom", degree=5).degree == 5
        np.testing.assert_allclose(parse_series_literal("logfn@4").coeffs[1:],
                                   1 / np.arange(1, 5))

    @pytest.mark.parametrize("text, pos", [
        ("logfn@x", 6), ("poly:[1,a]", 8), ("sin", 0), ("poly:1,2", 5),
    ])
    def test_errors(self, text, pos):
        with pytest.raises(ParseError) as info:
            parse_series_literal(text)
        assert info.value.position == pos


class TestConfigText:
    def test_split_top_level(self):
        assert split_top_level("a, [b, c], (d,e), ") == ["a", "[b, c]", "(d,e)"]
        assert split_top_level("") == []
        assert split_top_level("zero:[0.3,0.4]:std:alpha=1, log:beta=2") == [
            "zero:[0.3,0.4]:std:alpha=1", "log:beta=2"]

    def test_comments_and_lists(self):
        cfg = parse_config_text(
            "experiment = x  # trailing\n"
            "# whole line\n"
            "\n"
            "weights = [std:alpha=1, zero:[0.3,0.4]:std:alpha=1]\n"
            "N = 12\n")
        assert cfg == {"experiment": "x",
                       "weights": ["std:alpha=1", "zero:[0.3,0.4]:std:alpha=1"],
                       "N": "12"}

    def test_duplicate_key(self):
        with pytest.raises(ParseError, match="duplicate key 'N'"):
            parse_config_text("N = 1\nN = 2\n")

    def test_missing_equals(self):
        with pytest.raises(ParseError, match="line 2"):
            parse_config_text("a = 1\njunk\n")

    def test_unterminated_list(self):
        with pytest.raises(ParseError, match="unterminated"):
            parse_config_text("weights = [std:alpha=1\n")
