import numpy as np
import pytest

import oracles
from spinbus import ed


def uniform_k(N, g, register_field=None):
    K = np.zeros((N + 2, N + 2))
    bonds = np.full(N + 1, 1.0)
    bonds[0] = bonds[-1] = g
    idx = np.arange(N + 1)
    K[idx, idx + 1] = bonds
    K[idx + 1, idx] = bonds
    if register_field is not None:
        K[0, 0] = K[N + 1, N + 1] = register_field
    return K


def sector_to_dense(H: ed.SectorHamiltonian) -> np.ndarray:
    """Reassemble the full 2^n Hamiltonian from the sector blocks."""
    n = H.n
    out = np.zeros((1 << n, 1 << n))
    for idx, block in zip(H.basis.sectors, H.blocks):
        out[np.ix_(idx, idx)] = block
    return out


class TestSectorConstruction:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_blocks_match_dense_kron(self, seed):
        rng = np.random.default_rng(seed)
        n = 5
        J = rng.normal(size=(n, n))
        J = J + J.T
        np.fill_diagonal(J, 0.0)
        fields = rng.normal(size=n)
        H = ed.build_many_body(J, n, fields)
        dense = oracles.flip_flop_h(J, n, fields)
        assert np.allclose(sector_to_dense(H), dense.real, atol=1e-12)
        assert np.max(np.abs(dense.imag)) == 0.0

    def test_from_k_single_excitation_block(self):
        K = uniform_k(3, 0.4, register_field=0.2)
        H = ed.build_many_body_from_k(K)
        # sector of Hamming weight 1, ordered by bit position = site index
        block = H.blocks[1]
        assert np.allclose(block, K, atol=1e-12)

    def test_sector_dimensions(self):
        basis = ed.SectorBasis(6)
        import math

        assert basis.dims() == [math.comb(6, w) for w in range(7)]

    def test_resource_cap(self):
        with pytest.raises(ed.ResourceLimitError):
            ed.build_many_body(np.zeros((15, 15)), 15, cap=14)
        with pytest.raises(ed.ResourceLimitError):
            ed.build_many_body_from_k(np.zeros((9, 9)), cap=8)

    def test_asymmetric_couplings_rejected(self):
        J = np.zeros((3, 3))
        J[0, 1] = 1.0
        with pytest.raises(ValueError):
            ed.build_many_body(J, 3)

    def test_unitary_blocks(self):
        K = uniform_k(3, 0.4)
        H = ed.build_many_body_from_k(K)
        for U in ed.exact_unitary(H, 1.7):
            assert np.allclose(U @ U.conj().T, np.eye(U.shape[0]), atol=1e-10)


class TestChannelTracesAgainstDenseOracle:
    @pytest.mark.parametrize("kind", ["double_swap", "single_swap", "remote_z"])
    def test_plain_channels(self, kind):
        rng = np.random.default_rng(42)
        N = 3
        n = N + 2
        K = uniform_k(N, rng.uniform(0.1, 0.9))
        t = rng.uniform(1.0, 20.0)
        got = ed.transfer_channel_traces(K, t, kind)

        U1 = oracles.unitary(oracles.h_from_k(K), t)
        if kind == "remote_z":
            U = U1 @ oracles.op_on(oracles.SZ, n - 1, n) @ U1
            out_site = 0
        elif kind == "single_swap":
            U, out_site = U1, n - 1
        else:
            U, out_site = U1, 0
        env = oracles.env_diag(n, 0)
        want = oracles.channel_traces(U, n, 0, out_site, env)
        for key in ("x", "y", "z", "s"):
            assert got[key] == pytest.approx(want[key], abs=1e-10)

    def test_polarized_chain_bits(self):
        N = 4
        K = uniform_k(N, 0.5)
        bits = np.array([1, 0, 1, 1])
        got = ed.transfer_channel_traces(K, 3.3, "single_swap", chain_bits=bits)
        n = N + 2
        U = oracles.unitary(oracles.h_from_k(K), 3.3)
        env = oracles.env_diag(n, 0, fixed={1 + i: int(b) for i, b in enumerate(bits)})
        want = oracles.channel_traces(U, n, 0, n - 1, env)
        for key in ("x", "y", "z", "s"):
            assert got[key] == pytest.approx(want[key], abs=1e-10)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            ed.transfer_channel_traces(uniform_k(2, 0.2), 1.0, "teleport")


class TestEncodedProtocol:
    def _dense_protocol_traces(self, p: ed.ProtocolSpec):
        """The full encoded protocol rebuilt from dense kron primitives."""
        n = p.n_total
        N = p.n_chain
        site = p.site_index

        def leg_u(leg, t):
            J = np.zeros((n, n))
            J[2 : N + 2, 2 : N + 2] = p.chain_couplings
            left = site("0b") if leg == "b" else site("0a")
            right = site("(N+1)b") if leg == "b" else site("(N+1)a")
            J[left, 2] = J[2, left] = p.g
            J[right, N + 1] = J[N + 1, right] = p.g
            fields = np.zeros(n)
            if p.chain_fields is not None:
                fields[2 : N + 2] = p.chain_fields
            return oracles.unitary(oracles.flip_flop_h(J, n, fields), t)

        enc = oracles.cnot(n, site("0a"), site("0b"))
        if p.readout == "b":
            dec = oracles.cnot(n, site("(N+1)b"), site("(N+1)a"))
            out_site = site("(N+1)b")
        else:
            dec = oracles.cnot(n, site("(N+1)a"), site("(N+1)b"))
            out_site = site("(N+1)a")
        U = dec @ leg_u("b", p.t_b) @ leg_u("a", p.t_a) @ enc
        env = oracles.env_diag(
            n, site("0a"),
            fixed={site("0b"): 0},
            correlated_pairs=[(site("(N+1)b"), site("(N+1)a"))],
        )
        return oracles.channel_traces(U, n, site("0a"), out_site, env)

    @pytest.mark.parametrize("readout", ["b", "a"])
    def test_matches_dense_oracle(self, readout):
        N = 3
        J = np.diag(np.ones(N - 1), 1) + np.diag(np.ones(N - 1), -1)
        p = ed.ProtocolSpec(N, J, g=0.6, t_a=4.2, t_b=4.2, readout=readout)
        res = ed.exact_channel_fidelity(p)
        want = self._dense_protocol_traces(p)
        for key in ("x", "y", "z", "s"):
            assert res.traces[key] == pytest.approx(want[key], abs=1e-10)
        assert res.fidelity == pytest.approx(oracles.avg_fidelity(want), abs=1e-10)
        assert res.fidelity_phase_corrected == pytest.approx(
            oracles.phase_corrected_fidelity(want), abs=1e-10
        )

    def test_asymmetric_leg_times(self):
        N = 2
        J = np.array([[0.0, 1.0], [1.0, 0.0]])
        p = ed.ProtocolSpec(N, J, g=0.5, t_a=2.0, t_b=5.0)
        res = ed.exact_channel_fidelity(p)
        want = self._dense_protocol_traces(p)
        for key in ("x", "y", "z", "s"):
            assert res.traces[key] == pytest.approx(want[key], abs=1e-10)

    def test_engine_matches_one_shot(self):
        N = 3
        J = np.diag(np.ones(N - 1), 1) + np.diag(np.ones(N - 1), -1)
        engine = ed.EncodedProtocolEngine(N, J, 0.7)
        for t in (1.0, 6.5):
            a = engine.fidelity(t)
            b = ed.exact_channel_fidelity(ed.ProtocolSpec(N, J, 0.7, t, t))
            assert a.fidelity == pytest.approx(b.fidelity, abs=1e-12)
            assert a.fidelity_phase_corrected == pytest.approx(
                b.fidelity_phase_corrected, abs=1e-12
            )

    def test_zero_time_is_identity_legs(self):
        # with no evolution the receiving pair never correlates with the
        # input, so the channel is maximally forgetful: F = 1/2
        N = 2
        J = np.array([[0.0, 1.0], [1.0, 0.0]])
        res = ed.exact_channel_fidelity(ed.ProtocolSpec(N, J, 0.5, 0.0, 0.0))
        assert res.fidelity == pytest.approx(0.5, abs=1e-12)

    def test_fidelity_bounds(self):
        N = 3
        rng = np.random.default_rng(5)
        J = rng.normal(size=(N, N))
        J = np.abs(J + J.T)
        np.fill_diagonal(J, 0.0)
        res = ed.exact_channel_fidelity(ed.ProtocolSpec(N, J, 0.8, 3.0, 3.0))
        assert 0.0 <= res.fidelity <= 1.0
        assert res.fidelity <= res.fidelity_phase_corrected <= 1.0
        assert res.infidelity == pytest.approx(1.0 - res.fidelity)


class TestEnvironmentWeights:
    def test_weights_normalized_per_input_value(self):
        n = 5
        w = ed.mixed_environment(n, 1, fixed={0: 1}, correlated_pairs=[(3, 4)])
        idx = np.arange(1 << n)
        for val in (0, 1):
            sel = ((idx >> 1) & 1) == val
            assert np.sum(w[sel]) == pytest.approx(1.0)

    def test_matches_oracle(self):
        n = 6
        a = ed.mixed_environment(n, 2, fixed={0: 0}, correlated_pairs=[(4, 5)])
        b = oracles.env_diag(n, 2, fixed={0: 0}, correlated_pairs=[(4, 5)])
        assert np.allclose(a, b)
