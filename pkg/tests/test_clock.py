import pytest

from hybridbots.clock import DAY, HOUR, DailySchedule, normalize, parse_clock, subtract


def test_parse_clock():
    assert parse_clock("00:00") == 0
    assert parse_clock("18:30") == 18 * HOUR + 1800
    assert parse_clock("24:00") == DAY
    with pytest.raises(ValueError):
        parse_clock("25:00")


def test_normalize_wraps_and_merges():
    assert normalize([(22 * HOUR, 2 * HOUR)]) == [(0, 2 * HOUR), (22 * HOUR, DAY)]
    assert normalize([(0, 10), (5, 20), (30, 40)]) == [(0, 20), (30, 40)]


def test_subtract_holes():
    assert subtract([(0, 100)], [(10, 20), (50, 60)]) == [(0, 10), (20, 50), (60, 100)]


def test_schedule_next_active_and_advance():
    s = DailySchedule.fixed([(8 * HOUR, 22 * HOUR)])
    assert not s.is_active(3 * HOUR)
    assert s.next_active(3 * HOUR) == 8 * HOUR
    assert s.next_active(23 * HOUR) == DAY + 8 * HOUR
    assert s.is_active(8 * HOUR) and not s.is_active(22 * HOUR)
    # 14 active hours per day: 15 hours of active time crosses into the next day
    assert s.advance(8 * HOUR, 15 * HOUR) == DAY + 9 * HOUR


def test_empty_schedule_raises():
    s = DailySchedule.fixed([])
    with pytest.raises(ValueError):
        s.next_active(0, horizon_days=3)
