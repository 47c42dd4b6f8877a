import numpy as np
import pytest

from qcoarse import (
    DensityMatrix,
    EthAnsatzParams,
    EthEnsemble,
    RngStream,
    bipartition_from_shapes,
    energy_window_ensemble,
    haar_sector_ensemble,
    measure_eth_stats,
    microcanonical_density,
    pairwise_reduced_distances,
    partial_trace,
    reduced_states,
    rotated_pair,
    synthetic_eth_observable,
    trace_distance,
)

SZ = np.diag([1.0, -1.0]).astype(complex)


def _bp(d1, d2):
    return bipartition_from_shapes([(d1, d2)])


# ------------------------------------------------------------------ ensembles


def test_haar_ensemble_is_orthonormal_and_supported(g):
    bp = bipartition_from_shapes([(2, 2), (2, 8)], null_dim=1)
    ens = haar_sector_ensemble(bp, 1, 10, g)
    v = ens.state_matrix
    assert np.max(np.abs(v.conj().T @ v - np.eye(10))) < 1e-9
    proj = bp.sectors[1].projector.entries
    assert np.max(np.abs(v - proj @ v)) < 1e-10
    assert ens.entropy_S == pytest.approx(np.log(16))
    assert np.all(ens.energies == 0.0)


def test_haar_ensemble_full_basis(g):
    ens = haar_sector_ensemble(_bp(2, 4), 0, 8, g)
    assert ens.n_states == 8
    v = ens.state_matrix
    assert np.max(np.abs(v @ v.conj().T - np.eye(8))) < 1e-9


def test_haar_ensemble_too_many_states(g):
    with pytest.raises(ValueError):
        haar_sector_ensemble(_bp(2, 2), 0, 5, g)
    with pytest.raises(ValueError):
        haar_sector_ensemble(_bp(2, 2), 1, 2, g)


def test_ensemble_validation_catches_leaks(g):
    bp = bipartition_from_shapes([(2, 2)], null_dim=1)
    bad = np.zeros(5, dtype=complex)
    bad[4] = 1.0  # lives on the null block
    from qcoarse import PureState
    with pytest.raises(ValueError):
        EthEnsemble(bp=bp, sector=0, states=(PureState(bad),),
                    energies=np.zeros(1), entropy_S=np.log(4))
    with pytest.raises(ValueError):
        EthEnsemble(bp=bp, sector=0,
                    states=tuple(haar_sector_ensemble(bp, 0, 2, g).states),
                    energies=np.array([1.0, 0.0]),  # not sorted
                    entropy_S=np.log(4))


# ------------------------------------------------------------- reduced states


def test_reduced_states_match_partial_trace(g):
    bp = _bp(3, 4)
    ens = haar_sector_ensemble(bp, 0, 5, g)
    red = reduced_states(ens)
    for k, st in enumerate(ens.states):
        full = DensityMatrix.from_matrix(np.outer(st.amplitudes,
                                                  st.amplitudes.conj()))
        oracle = partial_trace(full, 3, 4, keep="first")
        assert np.max(np.abs(red[k] - oracle.mat)) < 1e-12


def test_pairwise_distances_match_direct_loop(g):
    ens = haar_sector_ensemble(_bp(2, 8), 0, 5, g)
    red = reduced_states(ens)
    condensed = pairwise_reduced_distances(ens)
    k = 0
    for i in range(5):
        for j in range(i + 1, 5):
            direct = trace_distance(DensityMatrix.from_matrix(red[i]),
                                    DensityMatrix.from_matrix(red[j]))
            assert condensed[k] == pytest.approx(direct, abs=1e-12)
            k += 1
    assert k == len(condensed) == 10


def test_pairwise_distances_need_two_states(g):
    with pytest.raises(ValueError):
        pairwise_reduced_distances(haar_sector_ensemble(_bp(2, 4), 0, 1, g))


def test_reduced_pair_distance_scale(g):
    # typical distance between two reduced states is ~ sqrt(2) e^{-S/2} for
    # qubit IR factors; check the mean over one large ensemble is in range
    ens = haar_sector_ensemble(_bp(2, 128), 0, 24, g)
    mean_d = float(np.mean(pairwise_reduced_distances(ens)))
    base = np.sqrt(2.0) * np.exp(-ens.entropy_S / 2.0)
    assert 0.5 * base < mean_d < 2.0 * base


def test_page_contraction_toward_maximally_mixed(g):
    # single random states: distance to I/2 stays under half sqrt(d1/d2)
    bound = 0.5 * np.sqrt(2.0 / 64.0)
    bp = _bp(2, 64)
    mixed = DensityMatrix.from_matrix(np.eye(2) / 2)
    dists = []
    for k in range(100):
        ens = haar_sector_ensemble(bp, 0, 1, RngStream(555, k))
        red = DensityMatrix.from_matrix(reduced_states(ens)[0])
        dists.append(trace_distance(red, mixed))
    assert np.mean(dists) <= bound


def test_microcanonical_density(g):
    ens = haar_sector_ensemble(_bp(2, 3), 0, 6, g)
    mc = microcanonical_density(ens)
    # full basis: equal mixture of an orthonormal basis of the sector
    proj = ens.bp.sectors[0].projector.entries
    assert np.max(np.abs(mc.mat - proj / 6)) < 1e-10
    single = haar_sector_ensemble(_bp(2, 3), 0, 1, g)
    amp = single.states[0].amplitudes
    assert np.max(np.abs(microcanonical_density(single).mat
                         - np.outer(amp, amp.conj()))) < 1e-12
    two = haar_sector_ensemble(_bp(2, 3), 0, 2, g)
    eigs = np.linalg.eigvalsh(microcanonical_density(two).mat)
    assert np.allclose(np.sort(eigs)[-2:], [0.5, 0.5], atol=1e-10)


def test_rotated_pair_properties(g):
    ens = haar_sector_ensemble(_bp(2, 4), 0, 4, g)
    plus = rotated_pair(ens, 0, 2, sign=1)
    minus = rotated_pair(ens, 0, 2, sign=-1)
    assert abs(np.linalg.norm(plus.amplitudes) - 1.0) < 1e-12
    assert abs(plus.overlap(minus)) < 1e-12
    # rho_+ - rho_- = |i><j| + |j><i| in the ensemble basis
    vi, vj = ens.states[0].amplitudes, ens.states[2].amplitudes
    diff = (np.outer(plus.amplitudes, plus.amplitudes.conj())
            - np.outer(minus.amplitudes, minus.amplitudes.conj()))
    expected = np.outer(vi, vj.conj()) + np.outer(vj, vi.conj())
    assert np.max(np.abs(diff - expected)) < 1e-12
    with pytest.raises(ValueError):
        rotated_pair(ens, 1, 1)
    with pytest.raises(ValueError):
        rotated_pair(ens, 0, 4)
    with pytest.raises(ValueError):
        rotated_pair(ens, 0, 1, sign=2.0)


# -------------------------------------------------------------- energy window


def test_energy_window_zero_width_falls_back(g):
    ens, params = energy_window_ensemble(_bp(2, 4), 0, 3, 0.0, 0.0, g)
    assert params.flat
    assert params.diag_slope == 0.0
    assert np.all(ens.energies == 0.0)


def test_energy_window_exact_ir_trend():
    bp = _bp(2, 16)
    ens, params = energy_window_ensemble(bp, 0, 8, 0.5, 1.2, RngStream(909))
    assert not params.flat
    red = reduced_states(ens)
    for k in range(8):
        measured = float(np.real(np.trace(red[k] @ SZ)))
        assert measured == pytest.approx(params.diag_slope * ens.energies[k],
                                         abs=1e-12)


def test_energy_window_pair_distance_floor():
    # the sigma_z trend alone forces D >= slope |E_i - E_j| / 2
    bp = _bp(2, 32)
    ens, params = energy_window_ensemble(bp, 0, 10, 0.5, 1.2, RngStream(910))
    d = pairwise_reduced_distances(ens)
    k = 0
    for i in range(10):
        for j in range(i + 1, 10):
            floor = 0.5 * abs(params.diag_slope) * abs(ens.energies[i]
                                                       - ens.energies[j])
            assert d[k] >= floor - 1e-12
            k += 1


def test_energy_window_validation(g):
    with pytest.raises(ValueError):
        energy_window_ensemble(_bp(2, 4), 0, 2, -1.0, 0.0, g)
    with pytest.raises(ValueError):
        energy_window_ensemble(_bp(1, 4), 0, 2, 0.5, 0.1, g)
    with pytest.raises(ValueError):
        energy_window_ensemble(_bp(2, 4), 0, 5, 0.5, 0.1, g)   # n > d2
    with pytest.raises(ValueError):
        energy_window_ensemble(_bp(2, 4), 0, 2, 2.0, 1.5, g)   # p leaves [0,1]


# ------------------------------------------------------- synthetic observables


def test_synthetic_observable_zero_envelope_is_smooth_diagonal(g):
    params = EthAnsatzParams(mean_diag=0.3, envelope=0.0, entropy_S=np.log(16),
                             flat=False, diag_slope=0.7)
    energies = np.linspace(-1, 1, 9)
    obs = synthetic_eth_observable(9, params, energies, g)
    assert np.max(np.abs(obs.entries - np.diag(0.3 + 0.7 * energies))) < 1e-12


def test_synthetic_observable_offdiagonal_scale():
    s = np.log(256.0)
    params = EthAnsatzParams(mean_diag=0.0, envelope=1.0, entropy_S=s)
    obs = synthetic_eth_observable(256, params, np.zeros(256), RngStream(77))
    m = obs.entries
    assert np.max(np.abs(m - m.conj().T)) < 1e-12
    iu = np.triu_indices(256, k=1)
    rms = np.sqrt(np.mean(np.abs(m[iu]) ** 2))
    assert rms == pytest.approx(np.exp(-s / 2.0), rel=0.05)


def test_synthetic_observable_energy_length_check(g):
    params = EthAnsatzParams(mean_diag=0.0, envelope=1.0, entropy_S=1.0)
    with pytest.raises(ValueError):
        synthetic_eth_observable(4, params, np.zeros(5), g)


def test_ansatz_params_validation():
    with pytest.raises(ValueError):
        EthAnsatzParams(mean_diag=0.0, envelope=-1.0, entropy_S=1.0)
    with pytest.raises(ValueError):
        EthAnsatzParams(mean_diag=0.0, envelope=1.0, entropy_S=0.0)
    with pytest.raises(ValueError):
        EthAnsatzParams(mean_diag=0.0, envelope=1.0, entropy_S=1.0,
                        flat=True, diag_slope=0.5)


# ------------------------------------------------------------ measured stats


def test_measure_eth_stats_on_identity(g):
    ens = haar_sector_ensemble(_bp(2, 4), 0, 6, g)
    stats = measure_eth_stats(np.eye(8, dtype=complex), ens)
    assert stats.diag_mean == pytest.approx(1.0, abs=1e-10)
    assert stats.diag_spread == pytest.approx(0.0, abs=1e-10)
    assert stats.offdiag_rms == pytest.approx(0.0, abs=1e-10)
    assert np.max(np.abs(stats.raw_A)) < 1e-6


def test_measure_eth_stats_round_trip():
    # the measured envelope of a synthetic draw should track the input
    s = np.log(256.0)
    vals = []
    for k in range(20):
        params = EthAnsatzParams(mean_diag=0.2, envelope=1.7, entropy_S=s)
        obs = synthetic_eth_observable(256, params, np.zeros(256),
                                       RngStream(4040, k))
        bp = _bp(2, 128)
        ens = haar_sector_ensemble(bp, 0, 256, RngStream(4041, k))
        # measure in the ensemble's own basis by conjugating the synthetic
        # matrix into the ambient frame
        v = ens.state_matrix
        ambient = v @ obs.entries @ v.conj().T
        stats = measure_eth_stats(ambient, ens)
        vals.append(stats.fitted_envelope)
    assert np.mean(vals) == pytest.approx(1.7, rel=0.2)


def test_measure_eth_stats_ir_observable_order_one(g):
    # a UV-blind probe has off-diagonals at the e^{-S/2} scale, so the
    # rescaled envelope is O(1)
    bp = _bp(2, 128)
    obs = np.kron(SZ, np.eye(128, dtype=complex))
    vals = []
    for k in range(20):
        ens = haar_sector_ensemble(bp, 0, 16, RngStream(606, k))
        vals.append(measure_eth_stats(obs, ens).fitted_envelope)
    assert 0.2 < np.mean(vals) < 5.0


def test_measure_eth_stats_dimension_mismatch(g):
    ens = haar_sector_ensemble(_bp(2, 4), 0, 3, g)
    with pytest.raises(ValueError):
        measure_eth_stats(np.eye(5, dtype=complex), ens)
