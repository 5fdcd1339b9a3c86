import datetime as dt
import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from record_edge.errors import ParseError, ParseWarning
from record_edge.ingest import (
    ExceedanceSample,
    RaceResult,
    bundled_national_records,
    format_time,
    lap_schedule,
    parse_time,
    read_national_records,
    read_results_csv,
    season_of,
    to_exceedance,
)

from conftest import DATA_DIR


class TestTimeCodec:
    @pytest.mark.parametrize("text,seconds", [
        ("6:01.56", 361.56),
        ("5:58.52", 358.52),
        ("6:10.00", 370.0),
        ("10:00.00", 600.0),
        ("0:33.50", 33.5),
        ("6:01.5", 361.5),
    ])
    def test_parse(self, text, seconds):
        assert parse_time(text) == seconds

    @pytest.mark.parametrize("bad", ["6:60.00", "abc", "6.01.56", "361.56", "6:1.56", ""])
    def test_parse_errors(self, bad):
        with pytest.raises(ParseError):
            parse_time(bad)

    def test_format(self):
        assert format_time(361.56) == "6:01.56"
        assert format_time(370.0 - 12.54) == "5:57.46"
        assert format_time(370.0 - 18.74) == "5:51.26"

    @given(m=st.integers(1, 59), ss=st.integers(0, 59), cc=st.integers(0, 99))
    def test_roundtrip_canonical(self, m, ss, cc):
        text = f"{m}:{ss:02d}.{cc:02d}"
        assert format_time(parse_time(text)) == text


class TestSeasonOf:
    @pytest.mark.parametrize("date,season", [
        (dt.date(2005, 11, 12), 2005),
        (dt.date(2026, 1, 24), 2025),
        (dt.date(2025, 6, 30), 2024),
        (dt.date(2025, 7, 1), 2025),
    ])
    def test_july_cutoff(self, date, season):
        assert season_of(date) == season


class TestLapSchedule:
    def test_ultimate_race(self):
        assert lap_schedule(351.26, 18.00, 12) == pytest.approx(27.77, abs=0.01)

    def test_record_race_average(self):
        # computed, never quoted: (358.52 - 19.03)/12
        assert lap_schedule(358.52, 19.03, 12) == pytest.approx(28.29, abs=0.01)

    def test_rejects_nonpositive_remainder(self):
        with pytest.raises(ValueError):
            lap_schedule(100.0, 100.0)
        with pytest.raises(ValueError):
            lap_schedule(100.0, 120.0)
        with pytest.raises(ValueError):
            lap_schedule(100.0, 10.0, laps=0)


def _race(time_s, date=dt.date(2024, 1, 1), skater="A B", nation="NOR"):
    return RaceResult(skater=skater, nation=nation, venue="SLC", date=date, time_s=time_s)


class TestToExceedance:
    def test_world_record_margin_exact(self):
        sample = to_exceedance([_race(361.56)], 370.0)
        assert sample.values[0] == 8.44

    def test_boundary_excluded(self):
        sample = to_exceedance([_race(370.0), _race(370.01), _race(358.52)], 370.0)
        assert len(sample) == 1
        assert sample.excluded == 2
        assert sample.values[0] == 11.48

    def test_roundtrip_to_centisecond(self):
        times = [361.56, 358.52, 369.99, 365.01]
        sample = to_exceedance([_race(t) for t in times], 370.0)
        back = 370.0 * 100 - np.round(sample.values * 100)
        np.testing.assert_array_equal(back / 100, times)

    def test_season_tags_preserved(self):
        races = [_race(360.0, dt.date(2020, 12, 1)), _race(361.0, dt.date(2022, 2, 1))]
        sample = to_exceedance(races, 370.0)
        assert sample.seasons == (2020, 2021)
        groups = sample.season_groups()
        assert [g[0] for g in groups] == [2020, 2021]

    def test_empty_qualifying_set(self):
        sample = to_exceedance([_race(380.0)], 370.0)
        assert len(sample) == 0 and sample.excluded == 1


class TestReadResultsCsv:
    def test_bundled_fixture_parses_cleanly(self):
        results = bundled_national_records()
        assert len(results) == 17
        eitrem = results[0]
        assert eitrem.time_s == 358.52
        assert eitrem.nation == "NOR"
        assert eitrem.season == 2025
        assert eitrem.pair_rank == 1

    def test_empty_file_with_header(self):
        assert read_results_csv(io.StringIO("skater,nation,venue,date,time\n")) == []

    def test_lenient_skips_with_warning(self):
        text = ("skater,nation,venue,date,time\n"
                "A B,NOR,SLC,2024-01-01,6:05.00\n"
                "C D,NOR,SLC,2024-01-02,abc\n")
        with pytest.warns(ParseWarning):
            results = read_results_csv(io.StringIO(text), strict=False)
        assert len(results) == 1

    def test_strict_reports_line_number(self):
        text = ("skater,nation,venue,date,time\n"
                "A B,NOR,SLC,2024-01-01,6:05.00\n"
                "C D,NOR,SLC,2024-01-02,abc\n")
        with pytest.raises(ParseError) as err:
            read_results_csv(io.StringIO(text), strict=True)
        assert err.value.line == 3

    def test_missing_column(self):
        with pytest.raises(ParseError):
            read_results_csv(io.StringIO("skater,venue,date,time\n"))


class TestNationalRecordsTable:
    def test_raw_table_matches_normalized_fixture(self):
        raw = (DATA_DIR / "national_records_raw.txt").read_text()
        from_table = read_national_records(raw)
        from_csv = bundled_national_records()
        assert len(from_table) == 17
        assert from_table == from_csv

    def test_nations_are_unique(self):
        nations = [r.nation for r in bundled_national_records()]
        assert len(set(nations)) == 17

    def test_bad_row_reports_line(self):
        with pytest.raises(ParseError) as err:
            read_national_records("  not a table row\n")
        assert err.value.line == 1


class TestRaceResultValidation:
    def test_bad_nation(self):
        with pytest.raises(ValueError):
            _race(360.0, nation="NO")
        with pytest.raises(ValueError):
            _race(360.0, nation="nor")

    def test_nation_optional(self):
        assert _race(360.0, nation=None).nation is None

    def test_bad_time(self):
        with pytest.raises(ValueError):
            _race(0.0)
