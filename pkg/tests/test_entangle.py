import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcqsim.constants import HBAR
from mcqsim.entangle import (
    ChainSpec,
    PulseInstruction,
    PulseProgram,
    compile_cnot,
    compose,
    expand_z,
    ideal_cnot,
    interaction_closed_form,
    interaction_crosscheck,
    interaction_unitary,
    inverse_program,
    route_blocks,
    route_cnot,
)
from mcqsim.qubit import ClusterParams
from mcqsim.spin import fidelity
from oracles import classical_cnot_chain

P = ClusterParams(10, 0.1, 0.06, 1.0, 0.05)
J = 0.01


def chain(n, s=10, j=J):
    return ChainSpec.uniform(P.with_(s=s), n, j)


class TestInteraction:
    def test_s10_diag(self):
        u = interaction_unitary(10, 10, J, math.pi * HBAR / J)
        np.testing.assert_allclose(u, np.diag([1, 1, 1, -1]), atol=1e-10)

    def test_s1_diag(self):
        u = interaction_unitary(1, 1, J, math.pi * HBAR / J)
        np.testing.assert_allclose(u, np.diag([-1, 1, 1, 1]), atol=1e-12)

    def test_zero_time(self):
        np.testing.assert_array_equal(interaction_unitary(3, 4, J, 0.0), np.eye(4))

    @pytest.mark.parametrize("a,b", list(itertools.product(range(1, 11), repeat=2)))
    def test_closed_form_integer(self, a, b):
        r = interaction_crosscheck(a, b)
        assert not r["half_integer"]
        assert r["max_abs_diff"] < 1e-10

    def test_closed_form_s10(self):
        np.testing.assert_allclose(interaction_closed_form(10, 10), np.diag([1, 1, 1, -1]), atol=1e-10)

    def test_half_integer_flagged(self):
        assert interaction_crosscheck(0.5, 1.5)["half_integer"]


class TestProgram:
    def test_cnot_shape(self):
        prog = compile_cnot(10, J)
        assert len(prog) == 5
        wait = [i for i in prog if i.kind == "ZZ_WAIT"]
        assert len(wait) == 1 and wait[0].duration == pytest.approx(206.8, abs=0.05)
        rx = [i for i in prog if i.kind == "RX"][0]
        assert rx.angle == pytest.approx(math.sqrt(1 / 20) * math.pi / 2, rel=1e-15)

    def test_text_roundtrip(self):
        prog = compile_cnot(7.5, 0.013)
        back = PulseProgram.from_text(prog.to_text())
        assert back == prog

    def test_from_text_error_has_line(self):
        with pytest.raises(ValueError, match="line 2"):
            PulseProgram.from_text("RX 0 1.0 0.0\nBOGUS 0 1 0\n")

    def test_instruction_validation(self):
        with pytest.raises(ValueError):
            PulseInstruction("ZZ_WAIT", 0, duration=0.0)
        with pytest.raises(ValueError):
            PulseInstruction("RX", -1, angle=1.0)

    def test_expand_z_removes_rz(self):
        hw = expand_z(compile_cnot(10, J), 10)
        assert {i.kind for i in hw} <= {"RX", "RY", "ZZ_WAIT"}
        assert len(hw) == 9


class TestCompose:
    def test_empty_is_identity(self):
        np.testing.assert_array_equal(compose(PulseProgram(), chain(3)), np.eye(8))

    @pytest.mark.parametrize("twice_s", range(1, 41))
    def test_cnot_all_spins(self, twice_s):
        s = twice_s / 2
        ch = chain(2, s)
        target = np.exp(-1j * math.pi / 4) * ideal_cnot(2, 0, 1)
        prog = compile_cnot(s, J)
        assert fidelity(compose(prog, ch), target) >= 1 - 1e-9
        assert fidelity(compose(expand_z(prog, s), ch), target) >= 1 - 1e-9

    def test_reverse_direction(self):
        prog = compile_cnot(10, J, control=1, target=0)
        assert fidelity(compose(prog, chain(2)), ideal_cnot(2, 1, 0)) >= 1 - 1e-9

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 20), st.floats(0.001, 0.1))
    def test_inverse_program(self, twice_s, j):
        s = twice_s / 2
        ch = chain(3, s, j)
        prog = route_cnot(ch, 0, 2) + expand_z(compile_cnot(s, j, 1, 2), s)
        u = compose(prog + inverse_program(prog, ch), ch)
        assert fidelity(u, np.eye(8)) >= 1 - 1e-9

    def test_uncoupled_wait_rejected(self):
        ch = ChainSpec((P, P, P), (J, 0.0))
        with pytest.raises(ValueError):
            compose(compile_cnot(10, J, 1, 2), ch)


class TestRouting:
    def test_block_counts(self):
        assert len(route_blocks(0, 1)) == 1
        assert len(route_blocks(0, 2)) == 4
        assert len(route_blocks(0, 3)) == 10

    @pytest.mark.parametrize("c,t", [(0, 2), (2, 0)])
    def test_three_qubit_truth_table(self, c, t):
        u = compose(route_cnot(chain(3), c, t), chain(3))
        for bits in itertools.product((0, 1), repeat=3):
            expect = list(bits)
            expect[t] ^= expect[c]
            # classical oracle on the block list must agree with the direct rule
            assert classical_cnot_chain(bits, route_blocks(c, t)) == tuple(expect)
            k_in = int("".join(map(str, bits)), 2)
            k_out = int("".join(map(str, expect)), 2)
            col = np.abs(u[:, k_in]) ** 2
            assert int(np.argmax(col)) == k_out
            assert col[k_out] == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("c,t", [(0, 3), (3, 0), (1, 3), (3, 1)])
    def test_four_qubit(self, c, t):
        u = compose(route_cnot(chain(4), c, t), chain(4))
        phase = np.trace(ideal_cnot(4, c, t).T @ u) / 16
        assert np.max(np.abs(u - phase * ideal_cnot(4, c, t))) < 1e-8

    @pytest.mark.parametrize("n,c,t", [(3, 0, 2), (4, 3, 0), (5, 1, 4)])
    def test_cnot_squared_is_identity(self, n, c, t):
        u = compose(route_cnot(chain(n), c, t), chain(n))
        assert fidelity(u @ u, np.eye(2**n)) >= 1 - 1e-8

    @pytest.mark.parametrize("n,c,t", [(3, 0, 2), (4, 1, 3), (4, 3, 0)])
    def test_control_zero_untouched(self, n, c, t):
        u = compose(route_cnot(chain(n), c, t), chain(n))
        phase = None
        for k in range(2**n):
            if (k >> (n - 1 - c)) & 1:
                continue
            # same global phase on every control-0 basis state
            phase = u[k, k] if phase is None else phase
            assert abs(u[k, k] - phase) < 1e-8 and abs(abs(u[k, k]) - 1) < 1e-8

    def test_disconnected(self):
        ch = ChainSpec((P, P, P), (J, 0.0))
        with pytest.raises(ValueError, match="disconnected"):
            route_cnot(ch, 0, 2)

    def test_unequal_spins(self):
        ch = ChainSpec((P, P.with_(s=5)), (J,))
        with pytest.raises(NotImplementedError):
            route_cnot(ch, 0, 1)


class TestChain:
    def test_coupling_count(self):
        with pytest.raises(ValueError):
            ChainSpec((P, P, P), (J,))

    def test_rwa_warning(self):
        assert len(chain(3).rwa_warnings()) == 2
        detuned = ChainSpec((P, P.with_(b0=5.0)), (J,))
        assert detuned.rwa_warnings() == []

    def test_compose_size_limit(self):
        with pytest.raises(ValueError):
            compose(PulseProgram(), chain(11))
