import pytest

from railmc.model import (
    ModelError,
    Resource,
    StationStop,
    Timetable,
    TrainService,
    format_clock,
    parse_clock,
    validate_timetable,
)

from conftest import make_two_train_timetable


class TestClock:
    def test_parse_basic(self):
        assert parse_clock("08:00:00") == 28800
        assert parse_clock("00:00:00") == 0

    def test_past_midnight_convention(self):
        # 24+h clock is valid up to 30:00:00
        assert parse_clock("25:00:00") == 25 * 3600
        assert parse_clock("30:00:00") == 30 * 3600

    def test_beyond_convention_rejected(self):
        with pytest.raises(ModelError):
            parse_clock("31:00:00")

    @pytest.mark.parametrize("bad", ["8:61:00", "08:00", "ab:cd:ef", "08:00:-1"])
    def test_malformed(self, bad):
        with pytest.raises(ModelError):
            parse_clock(bad)

    def test_round_trip(self):
        for t in [0, 28800, 29461, 30 * 3600]:
            assert parse_clock(format_clock(t)) == t


class TestValidateTimetable:
    def test_well_formed(self):
        assert validate_timetable(make_two_train_timetable()) == []

    def test_departure_before_arrival(self):
        tt = Timetable(
            trains=(TrainService("X", "c", stops=(
                StationStop("S1", sched_departure=100),
                StationStop("S2", sched_arrival=500, sched_departure=400),
            )),),
            resources=(),
        )
        violations = validate_timetable(tt)
        assert len(violations) == 1
        assert "stop 1" in violations[0]

    def test_dangling_segment_reference(self):
        tt = Timetable(
            trains=(TrainService("X", "c", stops=(
                StationStop("S1", sched_departure=100, outbound_segment="SEG_X"),
                StationStop("S2", sched_arrival=500, sched_departure=600),
            )),),
            resources=(),
        )
        violations = validate_timetable(tt)
        assert len(violations) == 1
        assert "SEG_X" in violations[0]

    def test_duplicate_train_id(self):
        t = TrainService("X", "c", stops=(
            StationStop("S1", sched_departure=100),
            StationStop("S2", sched_arrival=500, sched_departure=600),
        ))
        assert any("duplicate" in v for v in validate_timetable(
            Timetable(trains=(t, t), resources=())))

    def test_non_increasing_times(self):
        tt = Timetable(
            trains=(TrainService("X", "c", stops=(
                StationStop("S1", sched_departure=500),
                StationStop("S2", sched_arrival=500, sched_departure=600),
            )),),
            resources=(),
        )
        assert any("strictly increase" in v for v in validate_timetable(tt))

    def test_nonpositive_headway(self):
        tt = Timetable(trains=make_two_train_timetable().trains,
                       resources=(Resource("SEG1", "segment", 0),))
        assert any("min_headway" in v for v in validate_timetable(tt))
