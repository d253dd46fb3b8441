import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcqsim.qubit import ClusterParams, energy_table
from mcqsim.readout import (
    ReadoutParams,
    ReadoutState,
    bisect_crossing,
    charged_state,
    composite_energy,
    crossing_voltages,
    excited_state,
    ground_state,
    readout_trace,
    thermal_populations,
)
from oracles import KB_MEV_K

P = ClusterParams(10, 0.1, 0.06, 1.0, 0.05)
RP = ReadoutParams(P, j_lumo=0.01)


class TestEnergies:
    def test_empty_states_independent_of_voltage(self):
        for st_ in (ground_state(P.s), excited_state(P.s)):
            assert composite_energy(RP, st_, -3.0) == composite_energy(RP, st_, 5.0)

    @given(st.floats(-50, 50, allow_nan=False), st.floats(-50, 50, allow_nan=False))
    def test_charged_slope_one(self, a, b):
        ch = charged_state(P.s)
        d = composite_energy(RP, ch, a) - composite_energy(RP, ch, b)
        assert d == pytest.approx(a - b, abs=1e-9)

    def test_charged_spot_value(self):
        assert composite_energy(RP, charged_state(P.s), 0.0) == pytest.approx(-10.68, abs=1e-12)

    def test_invalid_state(self):
        with pytest.raises(ValueError):
            ReadoutState(2, 0.0, 10)


class TestCrossings:
    def test_v0_printed_form(self):
        c = crossing_voltages(RP)
        assert c.v0 == pytest.approx(0.5 * 0.06 + 0.5 * 0.01 * 10, abs=1e-12)
        assert c.v0 == pytest.approx(0.08, abs=1e-12)

    def test_v1_derived(self):
        c = crossing_voltages(RP)
        assert c.v1 == pytest.approx(2.04, abs=1e-12)
        assert c.paper_v1_discrepancy == pytest.approx(P.k_aniso, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(
        st.integers(2, 60),
        st.floats(0.01, 1.0),
        st.floats(-0.2, 0.2),
        st.floats(0, 3),
        st.floats(0, 0.1),
    )
    def test_bisection_agrees(self, twice_s, k, g, b0, j):
        rp = ReadoutParams(ClusterParams(twice_s / 2, k, g, b0), j_lumo=j)
        c = crossing_voltages(rp)
        assert abs(c.v0 - c.v0_bisect) < 1e-12
        assert abs(c.v1 - c.v1_bisect) < 1e-12
        assert c.paper_v1_discrepancy == pytest.approx(k, abs=1e-12)

    def test_bisect_requires_bracket(self):
        with pytest.raises(ValueError):
            bisect_crossing(lambda x: x * x + 1, -1, 1)


class TestTrace:
    def sweep(self, hi=3.0, lo=-1.0, n=401):
        return np.linspace(hi, lo, n)

    def test_excited_peaks_at_v1(self):
        tr = readout_trace(RP, 1, self.sweep())
        assert len(tr.peaks) == 1 and tr.peaks[0].script_v == crossing_voltages(RP).v1

    def test_ground_peaks_at_v0(self):
        tr = readout_trace(RP, 0, self.sweep())
        assert len(tr.peaks) == 1 and tr.peaks[0].script_v == crossing_voltages(RP).v0

    def test_truncated_sweep_has_no_peak(self):
        tr = readout_trace(RP, 0, self.sweep(3.0, 2.5))
        assert tr.peaks == () and tr.note == "no transition observed"

    def test_sweep_must_descend(self):
        with pytest.raises(ValueError):
            readout_trace(RP, 0, np.linspace(-1, 3, 10))

    def test_sweep_must_start_above_v1(self):
        with pytest.raises(ValueError):
            readout_trace(RP, 0, np.linspace(1.0, -1, 10))


class TestThermal:
    def test_ratio_spot_value(self):
        pops = thermal_populations(P, 4.0)
        assert pops[1] / pops[0] == pytest.approx(math.exp(-1.96 / (KB_MEV_K * 4.0)), rel=1e-12)
        assert pops[1] / pops[0] == pytest.approx(3.39e-3, abs=5e-6)

    @pytest.mark.parametrize("s", [0.5, 1, 3.5, 10, 25])
    @pytest.mark.parametrize("t", [0.5, 2.0, 4.0, 10.0, 50.0])
    def test_ratio_grid(self, s, t):
        p = P.with_(s=s)
        pops = thermal_populations(p, t)
        gap = energy_table(p, 2)[0].gap
        assert pops[1] / pops[0] == pytest.approx(math.exp(-gap / (KB_MEV_K * t)), rel=1e-12)

    def test_high_temperature_uniform(self):
        pops = thermal_populations(P, 1e7, 3)
        np.testing.assert_allclose(pops, 1 / 3, atol=1e-5)

    def test_cold_bound(self):
        gap = energy_table(P, 2)[0].gap
        t = gap / (20 * KB_MEV_K)
        assert thermal_populations(P, t, 3)[0] >= 1 - 3e-9

    @pytest.mark.parametrize("t", [0.5, 4.0, 40.0])
    def test_nonincreasing_with_energy(self, t):
        p = P.with_(s=3)
        pops = thermal_populations(p, t, 7)
        energies = [lv.energy for lv in energy_table(p, 7)]
        order = np.argsort(energies, kind="stable")
        assert all(pops[b] <= pops[a] for a, b in zip(order, order[1:]))

    def test_sums_to_one(self):
        assert math.fsum(thermal_populations(P, 7.0, 5)) == pytest.approx(1.0, abs=1e-15)

    def test_rejects_nonpositive_temperature(self):
        with pytest.raises(ValueError):
            thermal_populations(P, 0.0)
