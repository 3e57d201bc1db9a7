import math

import pytest

from emoship.energy import (PowerProfile, UsageLedger, average_power_w,
                            battery_life_h, energy_wh,
                            record_everything_life_h)
from emoship.errors import DataError, InputError

MS_HOUR = 3_600_000


def ledger(on_ms, neye_ms, cap_ms):
    led = UsageLedger()
    led.t_always_on_ms = on_ms
    led.t_neye_ms = neye_ms
    led.t_captured_ms = cap_ms
    return led


class TestProfile:
    def test_paper_defaults(self):
        p = PowerProfile.paper_defaults()
        assert (p.p_eye_camera, p.p_eye_tracking, p.p_world_camera,
                p.p_neye, p.battery_wh) == (0.07, 0.1, 1.3, 1.1, 2.1)

    def test_negative_power_rejected(self):
        with pytest.raises(DataError):
            PowerProfile(-0.1, 0.1, 1.3, 1.1, 2.1)

    def test_file_round_trip(self, tmp_path):
        f = tmp_path / "profile.txt"
        f.write_text("p_eye_camera = 0.07\np_eye_tracking = 0.1\n"
                     "p_world_camera = 1.3\np_neye = 1.1\nbattery_wh = 2.1\n")
        assert PowerProfile.load(f) == PowerProfile.paper_defaults()

    def test_missing_key_rejected(self, tmp_path):
        f = tmp_path / "profile.txt"
        f.write_text("p_eye_camera = 0.07\n")
        with pytest.raises(InputError):
            PowerProfile.load(f)


class TestLedger:
    def test_accrual(self):
        led = UsageLedger()
        led.accrue(100, neye_active=False, capturing=False)
        led.accrue(50, neye_active=True, capturing=False)
        led.accrue(25, neye_active=True, capturing=True)
        assert (led.t_always_on_ms, led.t_neye_ms, led.t_captured_ms) == (175, 75, 25)

    def test_negative_time_rejected(self):
        with pytest.raises(DataError):
            UsageLedger().accrue(-1, neye_active=False, capturing=False)

    def test_bounds_invariant(self):
        bad = ledger(100, 200, 0)
        with pytest.raises(DataError):
            bad._check()

    def test_text_round_trip(self):
        led = ledger(MS_HOUR, MS_HOUR // 10, MS_HOUR // 20)
        again = UsageLedger.from_text(led.to_text())
        assert (again.t_always_on_ms, again.t_neye_ms, again.t_captured_ms) == (
            led.t_always_on_ms, led.t_neye_ms, led.t_captured_ms)
        assert again.to_text() == led.to_text()

    def test_malformed_text_rejected(self):
        with pytest.raises(InputError):
            UsageLedger.from_text("nothing here\n")


class TestEnergy:
    def test_one_hour_always_on_only(self):
        e = energy_wh(ledger(MS_HOUR, 0, 0), PowerProfile.paper_defaults())
        assert abs(e - 0.17) < 1e-12

    def test_paper_duty_mixture(self):
        led = ledger(MS_HOUR, int(0.132 * MS_HOUR), int(0.054 * MS_HOUR))
        e = energy_wh(led, PowerProfile.paper_defaults())
        assert abs(e - (0.17 + 0.132 * 1.1 + 0.054 * 1.3)) < 1e-6

    def test_zero_ledger_zero_energy(self):
        assert energy_wh(UsageLedger(), PowerProfile.paper_defaults()) == 0.0

    def test_linear_in_each_field(self):
        profile = PowerProfile.paper_defaults()
        a = energy_wh(ledger(MS_HOUR, 1000, 500), profile)
        b = energy_wh(ledger(2 * MS_HOUR, 2000, 1000), profile)
        assert abs(b - 2 * a) < 1e-9

    def test_duty_formula_matches_ledger_within_quantization(self):
        # f fraction of frames capturing at 33 ms frames: closed form vs ledger
        profile = PowerProfile.paper_defaults()
        n, dt, f = 1000, 33, 0.25
        led = UsageLedger()
        for i in range(n):
            cap = i < f * n
            led.accrue(dt, neye_active=cap, capturing=cap)
        hours = n * dt / MS_HOUR
        closed = hours * (profile.p_eye_camera + profile.p_eye_tracking
                          + f * (profile.p_neye + profile.p_world_camera))
        quantum = dt / MS_HOUR * (profile.p_neye + profile.p_world_camera)
        assert abs(energy_wh(led, profile) - closed) <= quantum


class TestBatteryLife:
    def test_paper_numbers(self):
        profile = PowerProfile.paper_defaults()
        life = battery_life_h(profile, 0.132, 0.054)
        assert abs(life - 5.45) < 0.01
        assert round(life, 1) == 5.4  # 5.449 h; within 0.1 h of the stated 5.5
        always = record_everything_life_h(profile)
        assert abs(always - 2.1 / 1.37) < 1e-9
        assert round(always, 1) == 1.5
        assert round(life / always, 1) == 3.6

    def test_zero_duties(self):
        life = battery_life_h(PowerProfile.paper_defaults(), 0.0, 0.0)
        assert abs(life - 2.1 / 0.17) < 1e-9  # 12.35 h

    def test_full_duties_still_well_formed(self):
        profile = PowerProfile.paper_defaults()
        life = battery_life_h(profile, 1.0, 1.0)
        assert 0 < life < record_everything_life_h(profile)

    def test_monotone_decreasing_in_duties(self):
        profile = PowerProfile.paper_defaults()
        last = math.inf
        for duty in (0.0, 0.25, 0.5, 0.75, 1.0):
            life = battery_life_h(profile, duty, duty)
            assert life < last
            last = life

    def test_zero_power_is_infinite(self):
        profile = PowerProfile(0.0, 0.0, 0.0, 0.0, 2.1)
        assert battery_life_h(profile, 0.0, 0.0) == math.inf
        assert record_everything_life_h(profile) == math.inf

    def test_duty_out_of_range_rejected(self):
        with pytest.raises(DataError):
            average_power_w(PowerProfile.paper_defaults(), 1.5, 0.0)
