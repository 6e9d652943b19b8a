from __future__ import annotations

import io

import numpy as np
import pytest

from halfmaps.errors import InvalidInputError, ParseError
from halfmaps.halfharmonic import BlaschkeSpec, blaschke_trace
from halfmaps.mapfile import MAGIC, parse_map, read_map, write_map
from halfmaps.spectral import Field, PeriodicGrid


class TestRoundTrip:
    def test_exact_roundtrip(self, tmp_path):
        u = blaschke_trace(BlaschkeSpec((0.3, -0.5j)), PeriodicGrid(64)).field
        path = tmp_path / "u.txt"
        write_map(path, u)
        back = read_map(path)
        assert np.array_equal(back.values, u.values)
        assert back.grid == u.grid

    def test_stream(self):
        f = Field(PeriodicGrid(8), np.arange(8.0))
        buf = io.StringIO()
        write_map(buf, f)
        assert buf.getvalue().startswith(f"{MAGIC} 8 1\n")
        assert np.array_equal(parse_map(buf.getvalue()).values, f.values)

    def test_complex_rejected(self):
        with pytest.raises(InvalidInputError):
            write_map(io.StringIO(), Field(PeriodicGrid(8), np.exp(1j * np.arange(8.0))))


class TestParseErrors:
    def body(self, n: int = 8) -> str:
        return "\n".join("1.0 0.0" for _ in range(n))

    def test_comments_and_blanks(self):
        text = f"# a map\n{MAGIC} 8 2\n\n" + self.body() + "  # trailing\n"
        assert parse_map(text).m == 2

    @pytest.mark.parametrize(
        "text,where",
        [
            ("", "src"),
            ("halfmap-v0 8 2\n", "src:1"),
            (f"{MAGIC} eight 2\n", "src:1"),
            (f"{MAGIC} 12 2\n", "src:1"),
            (f"{MAGIC} 8 0\n", "src:1"),
        ],
    )
    def test_header(self, text, where):
        with pytest.raises(ParseError) as info:
            parse_map(text, "src")
        assert info.value.location == where
        assert str(info.value).startswith(where + ":")

    def test_row_count(self):
        with pytest.raises(ParseError, match="expected 8 sample rows"):
            parse_map(f"{MAGIC} 8 2\n" + self.body(7), "src")

    def test_bad_row_location(self):
        rows = self.body().splitlines()
        rows[3] = "1.0 zero"
        with pytest.raises(ParseError) as info:
            parse_map(f"{MAGIC} 8 2\n" + "\n".join(rows), "src")
        assert info.value.location == "src:5"

    def test_wrong_width(self):
        rows = self.body().splitlines()
        rows[0] = "1.0"
        with pytest.raises(ParseError) as info:
            parse_map(f"{MAGIC} 8 2\n" + "\n".join(rows), "src")
        assert info.value.location == "src:2"

    def test_non_finite(self):
        rows = self.body().splitlines()
        rows[0] = "nan 0.0"
        with pytest.raises(ParseError, match="finite"):
            parse_map(f"{MAGIC} 8 2\n" + "\n".join(rows))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            read_map(tmp_path / "absent.txt")
