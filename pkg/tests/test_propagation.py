import numpy as np
import pytest

from rmdlab import (ObservableTrace, ResourceCapError, SpinChainParams,
                    all_down_state, build_hamiltonian, build_unit_cells,
                    cell_matrix, energy_expectation, evolve_dtc, evolve_rmd,
                    evolve_tms, expm_hermitian, generate_rmd,
                    heating_trajectory, iter_unit_cells, make_propagators,
                    thue_morse_cell)
from tests.conftest import FIG2, FIG4, params


class TestExpmHermitian:
    def test_zero_time_is_identity(self, rng):
        A = rng.normal(size=(16, 16))
        H = A + A.T
        assert np.allclose(expm_hermitian(H, 0.0), np.eye(16), atol=1e-12)

    def test_diagonal_phase(self):
        H = np.diag([1.0, -2.0])
        U = expm_hermitian(H, 0.5)
        assert np.allclose(np.diag(U), [np.exp(-0.5j), np.exp(1.0j)], atol=1e-14)

    def test_unitary(self, rng):
        A = rng.normal(size=(32, 32))
        H = A + A.T
        U = expm_hermitian(H, 1.3)
        assert np.max(np.abs(U @ U.conj().T - np.eye(32))) < 1e-12

    def test_group_property(self, rng):
        A = rng.normal(size=(16, 16))
        H = A + A.T
        assert np.allclose(expm_hermitian(H, 0.7) @ expm_hermitian(H, 0.4),
                           expm_hermitian(H, 1.1), atol=1e-12)


class TestMakePropagators:
    def test_unitarity(self, fig2_pair_l8):
        for U in (fig2_pair_l8.U_plus, fig2_pair_l8.U_minus):
            assert np.max(np.abs(U @ U.conj().T - np.eye(256))) < 1e-12

    def test_h_f0_is_average(self, fig2_pair_l8):
        p = fig2_pair_l8.params
        expect = (build_hamiltonian(p, 1) + build_hamiltonian(p, -1)) / 2
        assert np.allclose(fig2_pair_l8.h_f0, expect, atol=1e-14)

    def test_dimension_cap(self):
        # sizes past the propagator cap are already rejected at the
        # parameter level
        with pytest.raises(ValueError):
            SpinChainParams(1, 0, 0, 0, 0, L=16, T=0.1)


class TestUnitCells:
    def test_level1_products(self, fig2_pair_l8):
        cells = build_unit_cells(fig2_pair_l8, 1)
        assert np.allclose(cells[0].U_n,
                           fig2_pair_l8.U_minus @ fig2_pair_l8.U_plus, atol=1e-14)
        assert np.allclose(cells[0].U_tilde_n,
                           fig2_pair_l8.U_plus @ fig2_pair_l8.U_minus, atol=1e-14)

    def test_matches_symbol_product(self, fig2_pair_l8):
        # U_n must equal the time-ordered product over the 2^n-symbol cell
        for n in range(1, 5):
            cells = build_unit_cells(fig2_pair_l8, n)
            direct = cell_matrix(fig2_pair_l8, thue_morse_cell(n).symbols)
            assert np.max(np.abs(cells[-1].U_n - direct)) < 1e-10

    def test_tilde_is_flipped_cell(self, fig2_pair_l8):
        cells = build_unit_cells(fig2_pair_l8, 3)
        direct = cell_matrix(fig2_pair_l8, -thue_morse_cell(3).symbols)
        assert np.max(np.abs(cells[-1].U_tilde_n - direct)) < 1e-10

    def test_generator_is_lazy(self, fig2_pair_l8):
        gen = iter_unit_cells(fig2_pair_l8, 10**6)
        first = next(gen)
        assert first.level == 1

    def test_rejects_zero_levels(self, fig2_pair_l8):
        with pytest.raises(ValueError):
            build_unit_cells(fig2_pair_l8, 0)


class TestEvolveRmd:
    def test_records_cell_boundaries(self, fig2_pair_l8):
        seq = generate_rmd(2, 5, seed=3)
        tr = evolve_rmd(all_down_state(8), seq, fig2_pair_l8)
        T = fig2_pair_l8.params.T
        assert np.allclose(tr.times, np.arange(6) * 4 * T)

    def test_norm_preserved(self, fig2_pair_l8):
        seq = generate_rmd(1, 200, seed=4)
        psi = all_down_state(8).astype(complex)
        for s in seq.symbols:
            psi = fig2_pair_l8.unitary(s) @ psi
        assert abs(np.linalg.norm(psi) - 1.0) < 1e-11

    def test_static_drive_conserves_energy(self):
        # with B_x = 0 both propagators coincide and <H_F^0> is constant
        p = SpinChainParams(J_z=1.0, J_x=0.243, B_x=0.0, B_z=0.357,
                            B_0=0.21, L=6, T=0.05)
        pair = make_propagators(p)
        tr = evolve_rmd(all_down_state(6), generate_rmd(0, 50, 1), pair)
        assert np.max(np.abs(tr.energy - tr.energy[0])) < 1e-10

    def test_dimension_mismatch(self, fig2_pair_l8):
        with pytest.raises(ValueError):
            evolve_rmd(all_down_state(6), generate_rmd(1, 2, 0), fig2_pair_l8)

    def test_each_step_sampling(self, fig2_pair_l8):
        seq = generate_rmd(1, 3, seed=9)
        tr = evolve_rmd(all_down_state(8), seq, fig2_pair_l8,
                        record_each_step=True)
        assert len(tr.times) == 7  # t=0 plus six elementary steps


class TestEvolveTms:
    def test_matches_brute_force(self, fig2_pair_l8):
        # doubling-trick states at 2^n T against direct symbol products
        psi0 = all_down_state(8)
        cells = build_unit_cells(fig2_pair_l8, 6)
        tr = evolve_tms(psi0, cells, fig2_pair_l8)
        for n in range(1, 7):
            seq = thue_morse_cell(n)
            ref = evolve_rmd(psi0, seq, fig2_pair_l8,
                             record_every=seq.num_blocks)
            i = tr.times.tolist().index(seq.cell_length * fig2_pair_l8.params.T)
            assert abs(tr.energy[i] - ref.energy[-1]) < 1e-8
            assert abs(tr.entropy[i] - ref.entropy[-1]) < 1e-8

    def test_record_cap(self, fig2_pair_l8):
        tr = evolve_tms(all_down_state(8), iter_unit_cells(fig2_pair_l8, 30),
                        fig2_pair_l8, n_record_max=12)
        assert tr.times[-1] == pytest.approx((1 << 12) * fig2_pair_l8.params.T)

    def test_rejects_wrong_start_level(self, fig2_pair_l8):
        cells = build_unit_cells(fig2_pair_l8, 3)
        with pytest.raises(ValueError):
            evolve_tms(all_down_state(8), cells[1:], fig2_pair_l8)


class TestEvolveDtc:
    def test_trivial_limit_alternates(self):
        # decoupled spins, perfect flip, no drive field: m_z flips sign at
        # every cell
        p = SpinChainParams(J_z=0.0, J_x=0.0, B_x=0.0, B_z=0.0, B_0=0.0,
                            L=4, T=0.1)
        pair = make_propagators(p)
        tr = evolve_dtc(all_down_state(4), generate_rmd(1, 10, 0), pair)
        assert np.allclose(tr.mz, [-1] + [1, -1] * 5, atol=1e-12)

    def test_rejects_high_order(self, fig2_pair_l8):
        with pytest.raises(ValueError):
            evolve_dtc(all_down_state(8), generate_rmd(2, 4, 0), fig2_pair_l8)

    def test_flip_interval_metadata(self):
        p = params(FIG4, 6, 50)
        pair = make_propagators(p)
        tr = evolve_dtc(all_down_state(6), generate_rmd(1, 12, 5), pair)
        assert tr.metadata["flip_interval"] == pytest.approx(2 * p.T)
        assert len(tr.times) == 13

    def test_flip_acts_before_cell(self):
        # one cell by hand: U_- U_+ X |down...down>
        p = params(FIG4, 6, 50)
        pair = make_propagators(p)
        seq = generate_rmd(1, 1, seed=2)
        tr = evolve_dtc(all_down_state(6), seq, pair, epsilon_flip=0.07)
        from rmdlab import global_flip
        psi = global_flip(6, 0.07) @ all_down_state(6).astype(complex)
        for s in seq.symbols:
            psi = pair.unitary(s) @ psi
        assert tr.energy[-1] == pytest.approx(energy_expectation(psi, pair.h_f0),
                                              abs=1e-12)


class TestHeatingTrajectory:
    def test_matches_evolve_rmd(self, fig2_pair_l8):
        n, cells, seed = 1, 40, 17
        fast = heating_trajectory(fig2_pair_l8, n, seed, max_cells=cells,
                                  record_factor=1.0)
        slow = evolve_rmd(all_down_state(8), generate_rmd(n, cells, seed),
                          fig2_pair_l8)
        assert np.allclose(fast.times, slow.times, atol=1e-12)
        assert np.max(np.abs(fast.energy - slow.energy)) < 1e-9
        assert np.max(np.abs(fast.entropy - slow.entropy)) < 1e-9

    def test_chunking_invariance(self, fig2_pair_l8):
        a = heating_trajectory(fig2_pair_l8, 2, 5, max_cells=30, block_chunk=7)
        b = heating_trajectory(fig2_pair_l8, 2, 5, max_cells=30, block_chunk=4096)
        assert np.array_equal(a.energy, b.energy)

    def test_early_stop(self):
        p = params(FIG2, 8, 2)  # strong drive at long period heats fast
        pair = make_propagators(p)
        tr = heating_trajectory(pair, 0, 1, max_cells=5000,
                                stop_energy_ratio=0.5)
        assert len(tr.times) < 5000
        assert tr.energy[-1] / tr.energy[0] < 0.5


class TestTraceSerialization:
    def test_csv_roundtrip(self, fig2_pair_l8):
        tr = evolve_rmd(all_down_state(8), generate_rmd(1, 6, 2), fig2_pair_l8)
        back = ObservableTrace.from_csv(tr.to_csv())
        assert np.array_equal(back.times, tr.times)
        assert np.array_equal(back.energy, tr.energy)
        assert np.array_equal(back.entropy, tr.entropy)
        assert np.array_equal(back.mz, tr.mz)

    def test_bad_header(self):
        with pytest.raises(ValueError):
            ObservableTrace.from_csv("a,b,c\n1,2,3\n")

    def test_sidecar_hash_stable(self, fig2_pair_l8):
        import json
        tr = evolve_rmd(all_down_state(8), generate_rmd(1, 4, 2), fig2_pair_l8)
        h1 = json.loads(tr.sidecar())["config_hash"]
        h2 = json.loads(tr.sidecar())["config_hash"]
        assert h1 == h2

    def test_non_monotonic_times_rejected(self):
        with pytest.raises(ValueError):
            ObservableTrace(times=[0.0, 2.0, 1.0], energy=[1, 1, 1],
                            entropy=[0, 0, 0], mz=[0, 0, 0])
