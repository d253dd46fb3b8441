import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcqsim.constants import HBAR, HBAR_SI
from mcqsim.decoherence import (
    SWEEP_HEADER,
    DecoherenceQuery,
    LatticeParams,
    anisotropy_commutator_residual,
    decoherence_time,
    fig6_sweep,
    ops_budget,
    phonon_occupation,
    spin_matrix_element_sq,
    tau_factorization,
    transition_rate,
)
from mcqsim.qubit import ClusterParams, gate_time
from oracles import KB_MEV_K, bose, reduced_tau

P = ClusterParams(10, 0.1, 0.06, 1.0, 0.05)
LAT = LatticeParams(1.66e-25, 3e-10)
Q = DecoherenceQuery(P, LAT, 2.0)

# frozen before the build from the reduced-formula oracle (S=10, hw=2 meV, T=2 K)
TAU_SPOT = 5.85302e-06


class TestOccupation:
    def test_spot(self):
        assert phonon_occupation(2.0 / HBAR, 10.0) == pytest.approx(0.1089, abs=5e-5)
        assert phonon_occupation(2.0 / HBAR, 10.0) == pytest.approx(bose(2.0, 10.0), rel=1e-12)

    def test_ln2_gives_one(self):
        t = 1.0
        w = math.log(2) * KB_MEV_K * t / HBAR
        assert phonon_occupation(w, t) == pytest.approx(1.0, rel=1e-12)

    def test_cold_limit_monotone(self):
        values = [phonon_occupation(1.0, t) for t in (10.0, 1.0, 0.1, 0.05, 0.02)]
        assert all(0 < b < a for a, b in zip(values, values[1:]))
        assert phonon_occupation(1.0, 1e-3) == 0.0

    @given(st.floats(0.01, 50), st.floats(0.05, 100))
    def test_detailed_balance(self, w, t):
        n = phonon_occupation(w, t)
        if n > 0:
            assert n + 1 == pytest.approx(math.exp(HBAR * w / (KB_MEV_K * t)) * n, rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            phonon_occupation(0.0, 1.0)
        with pytest.raises(ValueError):
            phonon_occupation(1.0, 0.0)


class TestMatrixElement:
    def test_default_omega(self):
        assert HBAR * Q.omega == pytest.approx(2.0, rel=1e-14)

    def test_mode_scaling(self):
        w = 3.0
        q5 = Q.with_(cluster=P.with_(s=5), omega_fi=w)
        q20 = Q.with_(cluster=P.with_(s=20), omega_fi=w)
        assert spin_matrix_element_sq(q20, "exact") / spin_matrix_element_sq(q5, "exact") == pytest.approx(4.0)
        assert spin_matrix_element_sq(q20, "paper") / spin_matrix_element_sq(q5, "paper") == pytest.approx(16.0)

    @pytest.mark.parametrize("mode", ["exact", "paper"])
    def test_omega_squared(self, mode):
        a = spin_matrix_element_sq(Q.with_(omega_fi=1.0), mode)
        b = spin_matrix_element_sq(Q.with_(omega_fi=2.0), mode)
        assert b / a == pytest.approx(4.0, rel=1e-14)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            spin_matrix_element_sq(Q, "other")

    @pytest.mark.parametrize("twice_s", range(1, 51))
    def test_commutator_identity(self, twice_s):
        assert anisotropy_commutator_residual(P.with_(s=twice_s / 2)) < 1e-12


class TestRate:
    def test_spot_value(self):
        tau = decoherence_time(Q)
        assert tau == pytest.approx(TAU_SPOT, rel=1e-5)
        assert tau == pytest.approx(reduced_tau(10, 2.0, 2.0, 1.66e-25, 3e-10), rel=1e-8)
        assert 1e-6 < tau < 1e-5

    @settings(max_examples=40, deadline=None)
    @given(
        st.integers(1, 80),
        st.floats(0.3, 40),
        st.floats(0.01, 1.0),
        st.floats(1e-26, 1e-23),
        st.floats(1e-10, 1e-9),
    )
    def test_reduced_form(self, twice_s, t, k, m, lc):
        q = DecoherenceQuery(P.with_(s=twice_s / 2, k_aniso=k), LatticeParams(m, lc), t)
        s = twice_s / 2
        n = phonon_occupation(q.omega, t)
        reduced = HBAR_SI * s * s * n / (12 * math.pi * m * lc * lc)
        assert transition_rate(q) == pytest.approx(reduced, rel=1e-12, abs=1e-250)

    @pytest.mark.parametrize("t", [0.5, 2.0, 10.0])
    @pytest.mark.parametrize("mode", ["exact", "paper"])
    def test_tau_gamma_unity(self, t, mode):
        q = Q.with_(temperature=t)
        assert decoherence_time(q, mode) * transition_rate(q, mode) == pytest.approx(1.0, rel=1e-15)

    def test_zero_temperature_limit(self):
        assert transition_rate(Q.with_(temperature=1e-3)) == 0.0
        assert decoherence_time(Q.with_(temperature=1e-3)) == math.inf

    @pytest.mark.parametrize("t1,t2", [(1.0, 2.0), (2.0, 7.0), (0.5, 30.0)])
    def test_temperature_ratio(self, t1, t2):
        x = HBAR * Q.omega / KB_MEV_K
        ratio = decoherence_time(Q.with_(temperature=t1)) / decoherence_time(Q.with_(temperature=t2))
        assert ratio == pytest.approx(math.expm1(x / t1) / math.expm1(x / t2), rel=1e-9)

    def test_mass_linear(self):
        q2 = Q.with_(lattice=LatticeParams(2 * 1.66e-25, 3e-10))
        assert decoherence_time(q2) / decoherence_time(Q) == pytest.approx(2.0, rel=1e-13)

    def test_quadruple_spin(self):
        q = Q.with_(omega_fi=3.0)
        q4 = q.with_(cluster=P.with_(s=40))
        assert decoherence_time(q) / decoherence_time(q4) == pytest.approx(16.0, rel=1e-12)

    def test_factorization(self):
        f = tau_factorization(Q)
        assert f["prefactor"] == pytest.approx(12 * math.pi / HBAR_SI, rel=1e-12)
        assert f["prefactor"] * f["thermal"] * f["inertia"] == pytest.approx(decoherence_time(Q), rel=1e-12)

    def test_explicit_lattice_changes_rate(self):
        q = Q.with_(lattice=LatticeParams(1.66e-25, 3e-10, sound_speed=2000.0))
        assert transition_rate(q) != transition_rate(Q)


class TestBudget:
    def test_spot(self):
        assert 1e-6 / (154e-12) == pytest.approx(6.5e3, rel=0.01)
        assert ops_budget(Q) == pytest.approx(decoherence_time(Q) / (gate_time(P) * 1e-12), rel=1e-14)

    def test_decreasing_in_temperature(self):
        vals = [ops_budget(Q.with_(temperature=t)) for t in (1.0, 2.0, 4.0, 8.0)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_linear_in_b1(self):
        q2 = Q.with_(cluster=P.with_(b1=0.1))
        assert ops_budget(q2) / ops_budget(Q) == pytest.approx(2.0, rel=1e-13)


class TestSweep:
    S_LIST = (5, 10, 20, 40)
    T_GRID = (0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 30.0)

    def test_shape_and_header(self):
        rows = fig6_sweep(Q, self.S_LIST, self.T_GRID)
        assert len(rows) == len(self.S_LIST) * len(self.T_GRID)
        assert all(len(r) == len(SWEEP_HEADER) for r in rows)

    @pytest.mark.parametrize("mode", ["exact", "paper"])
    def test_monotone_in_t(self, mode):
        rows = fig6_sweep(Q, self.S_LIST, self.T_GRID, mode)
        for s in self.S_LIST:
            taus = [r[2] for r in rows if r[0] == s]
            assert all(b < a for a, b in zip(taus, taus[1:]))

    def test_high_temperature_ordering(self):
        rows = fig6_sweep(Q, self.S_LIST, self.T_GRID)
        for t in self.T_GRID:
            pts = sorted((r[0], r[2]) for r in rows if r[1] == t)
            hot = [(s, tau) for s, tau in pts if 2 * 0.1 * s / (KB_MEV_K * t) < 1]
            assert all(b[1] < a[1] for a, b in zip(hot, hot[1:]))

    def test_rejects_unsorted_grid(self):
        with pytest.raises(ValueError):
            fig6_sweep(Q, (10,), (2.0, 1.0))
