import pytest

from conftest import load_frame
from veltman.conditions import (
    BroadChain, b_holds, broad_condition, broad_witness_valuation, g_failure,
    g_holds, pm_condition, separation_certificate, slim_condition, slim_witness_valuation,
)
from veltman.formula import Var, variables
from veltman.frames import enumerate_frames, enumerate_upto, make_frame, parse_frame
from veltman.schemata import broad, slim_tilde
from veltman.semantics import force

ONE = make_frame(1, set())


def linear_minimal(n: int):
    """R-chain 0 < 1 < ... < n-1 with every S_x as small as allowed."""
    R = {(i, j) for i in range(n) for j in range(i + 1, n)}
    S = {x: {(y, z) for y in range(x + 1, n) for z in range(y, n)} for x in range(n)}
    return make_frame(n, R, S)


class TestSlim:
    def test_dead_end_z(self, slim_picture):
        # y1 (world 4) has no successors
        for n in range(4):
            assert g_holds(slim_picture, n, 0, 2, 4)

    def test_g0_fails_on_picture(self, slim_picture):
        assert g_failure(slim_picture, 0, 1, 2, 3) == [(4, None)]

    def test_f0_failure_on_picture(self, slim_picture):
        fail = slim_condition(slim_picture, 0)
        assert (fail.n, fail.w, fail.x, fail.y, fail.z) == (0, 0, 1, 2, 3)
        assert fail.trace == ((4, None),)
        assert fail.replays(slim_picture)
        assert fail.claim() == "F0 fails at w=0 x=1 y=2 z=3"

    def test_f1_picture_has_f0_but_not_f1(self):
        frame = load_frame("slim_f1_picture")
        assert slim_condition(frame, 0) is None
        fail = slim_condition(frame, 1)
        assert (fail.w, fail.x, fail.y, fail.z) == (0, 1, 2, 3)
        assert fail.trace == ((4, 5), (6, None))

    def test_monotone_on_small_frames(self):
        for frame in enumerate_upto(3):
            for x in range(frame.n):
                for y in range(frame.n):
                    for z in range(frame.n):
                        for n in range(3):
                            if g_holds(frame, n + 1, x, y, z):
                                assert g_holds(frame, n, x, y, z)

    @pytest.mark.parametrize("n", range(1, 5))
    def test_linear_minimal_frames_satisfy_everything(self, n):
        frame = linear_minimal(n)
        for k in range(4):
            assert slim_condition(frame, k) is None
            assert broad_condition(frame, k) is None

    def test_one_world_chain_holds(self):
        assert all(slim_condition(ONE, k) is None for k in range(5))

    def test_every_failure_replays(self):
        for frame in enumerate_upto(4):
            for n in range(3):
                fail = slim_condition(frame, n)
                if fail is not None:
                    assert fail.replays(frame)


class TestBroad:
    def test_b0_on_picture(self):
        frame = load_frame("broad_f0_picture")
        chain = b_holds(frame, 0, 0, 1, 2, 3)
        assert chain == BroadChain((0, 1), (2, 3))

    def test_no_edges(self):
        frame = make_frame(3, set())
        for n in range(3):
            assert broad_condition(frame, n) is None
            assert b_holds(frame, n, 0, 1, 2, 0) is None

    def test_picture_fails_with_u_z(self):
        fail = broad_condition(load_frame("broad_f0_picture"), 0)
        assert fail.chain == BroadChain((0, 1), (2, 3)) and fail.u == 4

    def test_second_picture(self):
        fail = broad_condition(load_frame("broad_f1_picture"), 1)
        assert fail.chain == BroadChain((0, 1, 2), (3, 4, 5)) and fail.u == 6

    def test_chains_are_inside_r(self):
        for frame in enumerate_upto(4):
            for n in range(3):
                for x0 in range(frame.n):
                    for y0 in range(frame.n):
                        for xh in range(frame.n):
                            for yh in range(frame.n):
                                ch = b_holds(frame, n, xh, x0, y0, yh)
                                if ch is not None:
                                    assert ch.valid_in(frame)
                                    assert frame.r(xh, yh)

    def test_holds_when_tops_are_dead_ends(self):
        # the only completing y_1 is world 3, which has no successors
        frame = parse_frame("worlds 4\nR 0>1 0>2 0>3 1>2\nS 0: 1~2 2~3 1~3\n")
        assert broad_condition(frame, 0) is None


class TestPM:
    def test_one_world(self):
        assert pm_condition(ONE, "P") is None and pm_condition(ONE, "M") is None

    def test_m_direct(self):
        # y=1 S_0 z=2, z R u=3, not y R u
        frame = parse_frame("worlds 4\nR 0>1 0>2 0>3 2>3\nS 0: 1~2 1~3 2~3\n")
        assert pm_condition(frame, "M") == (0, 1, 2, 3)

    def test_p_direct(self):
        # 0R1R2, 2 S_0 3 but not 2 S_1 3 (3 is not above 1)
        frame = parse_frame("worlds 4\nR 0>1 0>2 0>3 1>2\nS 0: 1~2 2~3 1~3\n")
        assert pm_condition(frame, "P") == (0, 1, 2, 3)

    def test_unknown(self):
        with pytest.raises(ValueError):
            pm_condition(ONE, "Q")


class TestWitnesses:
    def test_slim_k0_on_picture(self, slim_picture):
        fail = slim_condition(slim_picture, 0)
        wit = slim_witness_valuation(slim_picture, 0, fail)
        names = {v.name: m for v, m in wit.valuation.items()}
        assert names == {"a0": 1 << 2, "b0": 1 << 3, "c0": slim_picture.ssucc[1][2]}
        assert wit.world == 0 and wit.path == "proof"
        assert not force(slim_picture, wit.valuation, 0, slim_tilde(0))

    def test_slim_rejects_frame_satisfying_condition(self):
        frame = load_frame("slim_f1_picture")
        fail = slim_condition(load_frame("slim_f0_picture"), 0)
        with pytest.raises(ValueError, match="does not hold"):
            slim_witness_valuation(frame, 0, fail)

    def test_slim_rejects_wrong_level(self, slim_picture):
        with pytest.raises(ValueError, match="need a failure of F2"):
            slim_witness_valuation(slim_picture, 1, slim_condition(slim_picture, 0))

    def test_slim_k1_on_middle_picture(self):
        frame = load_frame("slim_f1_picture")
        wit = slim_witness_valuation(frame, 1, slim_condition(frame, 2))
        assert wit.path == "proof" and wit.verify(frame)

    def test_broad_n0_matches_slim_shape(self):
        frame = load_frame("broad_f0_picture")
        wit = broad_witness_valuation(frame, 0, broad_condition(frame, 0))
        names = {v.name: m for v, m in wit.valuation.items()}
        assert names == {"a": 1 << 2, "b": 1 << 3, "c": frame.ssucc[1][2]}
        assert wit.world == 0 and wit.verify(frame)

    def test_broad_n1_refutes_at_bottom(self):
        frame = load_frame("broad_f1_picture")
        wit = broad_witness_valuation(frame, 1, broad_condition(frame, 1))
        assert wit.world == 0 and wit.verify(frame)
        assert not force(frame, wit.valuation, 0, broad(1))

    def test_broad_uses_only_its_variables(self):
        for frame in enumerate_upto(4):
            for n in range(3):
                fail = broad_condition(frame, n)
                if fail is not None:
                    wit = broad_witness_valuation(frame, n, fail)
                    assert set(wit.valuation) <= variables(broad(n))

    def test_witnesses_refute_on_all_small_failures(self):
        for frame in enumerate_upto(4):
            fail = slim_condition(frame, 2)
            if fail is not None:
                assert slim_witness_valuation(frame, 1, fail).verify(frame)

    def test_witness_unpacks(self, slim_picture):
        v, w = slim_witness_valuation(slim_picture, 0, slim_condition(slim_picture, 0))
        assert w == 0 and Var("a0") in v


class TestSeparation:
    def test_same_frame_cannot_separate_from_itself(self, slim_picture):
        assert separation_certificate(slim_picture, 0, 0) is None

    def test_certificate_text_reverifies(self):
        from veltman.semantics import parse_countermodel
        frame = next(f for f in enumerate_frames(4) if separation_certificate(f, 1, 0))
        cert = separation_certificate(frame, 1, 0)
        assert cert.verify()
        back = parse_countermodel(cert.to_text())
        assert back.claim.startswith("F^1 holds; F^0 fails")
        assert not force(back.frame, back.valuation, back.world, back.formula)
