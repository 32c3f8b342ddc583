import os

import numpy as np
import pytest

import ghztp

BELL = [ghztp.BellOutcome.PhiPlus, ghztp.BellOutcome.PhiMinus,
        ghztp.BellOutcome.PsiPlus, ghztp.BellOutcome.PsiMinus]
CHARLIE = [ghztp.CharlieOutcome.Plus, ghztp.CharlieOutcome.Minus]


def overlap(signal, state):
    psi = np.array([signal.alpha, signal.beta])
    return abs(np.vdot(psi, np.array(state))) ** 2


def test_ghz_vector():
    want = np.zeros(8)
    want[0] = want[7] = 1 / np.sqrt(2)
    assert np.allclose(ghztp.prepare_ghz(), want, atol=1e-12)


@pytest.mark.parametrize("bell", BELL)
@pytest.mark.parametrize("charlie", CHARLIE)
def test_every_branch_delivers_the_signal(bell, charlie):
    for seed in range(10):
        s = ghztp.SignalState.random(seed)
        r = ghztp.run_protocol(s, bell=bell, charlie=charlie)
        assert overlap(s, r.bob_state) >= 1 - 1e-10
        assert r.fidelity >= 1 - 1e-10
        assert r.path_probability == pytest.approx(1 / 8, abs=1e-10)
        assert len(r.trace) == 11


def test_seeded_runs_are_reproducible():
    s = ghztp.SignalState(0.6, 0.8j)
    a = ghztp.run_protocol(s, seed=5)
    b = ghztp.run_protocol(s, seed=5)
    assert a.trace == b.trace
    assert a.bob_state == b.bob_state


def test_branch_table():
    branches = ghztp.enumerate_branches(ghztp.SignalState(2**-0.5, 2**-0.5 * 1j))
    assert len(branches) == 8
    assert sum(b.probability for b in branches) == pytest.approx(1, abs=1e-12)
    assert all(b.bob_fidelity >= 1 - 1e-10 for b in branches)


def test_bob_alone_sees_a_mixture():
    s = ghztp.SignalState(0.6, 0.8)
    for bell in BELL:
        rep = ghztp.bob_view_before_charlie(s, bell)
        assert np.allclose(rep.rho, np.diag([0.36, 0.64]), atol=1e-12)
        assert rep.raw_fidelity == pytest.approx(0.36**2 + 0.64**2, abs=1e-12)
        assert rep.unitary_bound == pytest.approx(0.64, abs=1e-12)
        # Charlie's qubit carries the same populations.
        assert ghztp.charlie_view_before_cooperation(s, bell).unitary_bound == pytest.approx(0.64)


def test_sweep():
    summary = ghztp.security_sweep(200, seed=3)
    assert summary.samples == 200
    assert summary.max_bound_deviation < 1e-10
    assert summary.max_offdiagonal < 1e-12
    with pytest.raises(ValueError):
        ghztp.security_sweep(0)


def test_invalid_input():
    with pytest.raises(ghztp.ValidationError):
        ghztp.SignalState(0, 0)
    with pytest.raises(ValueError):
        ghztp.SignalState(3, 4)
    with pytest.raises(ValueError):
        ghztp.run_protocol(ghztp.SignalState(1, 0), bell=ghztp.BellOutcome.PhiPlus)


@pytest.mark.skipif(not os.environ.get("GHZTP_CLI"), reason="GHZTP_CLI not set")
def test_orchestrate():
    exe = os.environ["GHZTP_CLI"]
    s = ghztp.SignalState(0.6, 0.8)
    ok = ghztp.orchestrate(exe, s, seed=7)
    assert ok.match, ok.detail
    assert ok.fidelity == ok.reference_fidelity
    dropped = ghztp.orchestrate(exe, s, seed=7, drop_charlie=True)
    assert not dropped.match
    assert dropped.stall == "stalled-at-CharlieMeasure"
