import itertools

import numpy as np
import pytest
from scipy.linalg import expm

from bornwalk.blockop import (
    BlockHamiltonian,
    Dims,
    JointState,
    assemble,
    check_invariance,
    evolve,
    hamiltonian_from_json,
    hamiltonian_to_json,
    operator_from_json,
    operator_to_json,
    product_state,
    reduced_particle_state,
    simplex_map,
    state_from_json,
    state_to_json,
    trajectory_csv,
    uniform_block,
    verify_form,
)
from bornwalk.errors import (
    ConfigInvalid,
    DegenerateState,
    DimensionMismatch,
    NotHermitian,
)
from conftest import rand_hermitian, rand_state

DIMS = Dims(m=4, d=(1, 2, 1))


def rand_block_h(rng, dims=DIMS):
    return assemble(dims, [rand_hermitian(dims.m, rng) for _ in range(dims.n)])


def rand_joint(rng, dims=DIMS):
    return JointState(dims, rand_state(dims.total, rng))


def test_dims_invariants():
    with pytest.raises(ConfigInvalid):
        Dims(m=0, d=(1, 1))
    with pytest.raises(ConfigInvalid):
        Dims(m=2, d=(1,))  # total particle dimension below 2
    with pytest.raises(ConfigInvalid):
        Dims(m=64, d=(64, 64))  # exceeds the joint-dimension cap


def test_assemble_zero_blocks_evolves_as_identity(rng):
    H = assemble(DIMS, [np.zeros((4, 4))] * 3)
    s = rand_joint(rng)
    out = evolve(H, s, 3.7)
    assert np.max(np.abs(out.v - s.v)) < 1e-12


def test_assemble_identical_blocks_equals_uniform_block(rng):
    hb = rand_hermitian(4, rng)
    a = assemble(DIMS, [hb, hb, hb])
    u = uniform_block(hb, DIMS)
    for ba, bu in zip(a.blocks, u.blocks):
        assert np.array_equal(ba, bu)


def test_assemble_rejects_non_hermitian_block(rng):
    bad = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    with pytest.raises(NotHermitian) as info:
        assemble(DIMS, [rand_hermitian(4, rng), bad, rand_hermitian(4, rng)])
    assert info.value.index == 2


def test_assembled_operator_is_hermitian_and_sector_preserving(rng):
    H = rand_block_h(rng)
    F = H.full_matrix()
    assert np.max(np.abs(F - F.conj().T)) < 1e-12
    assert verify_form(F, DIMS)


def test_check_invariance_all_subsets_for_assembled(rng):
    F = rand_block_h(rng).full_matrix()
    for r in range(DIMS.n + 1):
        for w in itertools.combinations(range(1, DIMS.n + 1), r):
            assert check_invariance(F, DIMS, w)


def test_check_invariance_detects_off_sector_coupling(rng):
    F = rand_block_h(rng).full_matrix()
    # couple sector 1 (rows 0..3) to sector 2 (cols 4..11)
    F[0, 5] += 1e-3
    F[5, 0] += 1e-3
    assert not check_invariance(F, DIMS, {1})
    assert not check_invariance(F, DIMS, {2})
    assert check_invariance(F, DIMS, {1, 2})


def test_check_invariance_full_set_is_trivially_true(rng):
    F = rand_hermitian(DIMS.total, rng)  # generic dense operator
    assert check_invariance(F, DIMS, {1, 2, 3})


def test_verify_form_rejects_non_product_sector_block(rng):
    F = rand_block_h(rng).full_matrix()
    sl = DIMS.sector_slices()[1]  # d_2 = 2, room for a non-product block
    F[sl, sl] = rand_hermitian(8, rng)
    for i in (1, 2, 3):
        assert check_invariance(F, DIMS, {i})  # still sector-preserving
    assert not verify_form(F, DIMS)


def test_verify_form_single_sector_is_pure_factorization(rng):
    dims = Dims(m=3, d=(2,))
    hb = rand_hermitian(3, rng)
    assert verify_form(uniform_block(hb, dims).full_matrix(), dims)
    assert not verify_form(rand_hermitian(6, rng), dims)


def test_evolve_at_zero_time_is_identity(rng):
    H = rand_block_h(rng)
    s = rand_joint(rng)
    assert np.array_equal(evolve(H, s, 0.0).v, s.v)


def test_evolve_is_unitary_and_matches_expm_oracle(rng):
    for _ in range(5):
        H = rand_block_h(rng)
        s = rand_joint(rng)
        t = float(rng.uniform(-3, 3))
        out = evolve(H, s, t)
        assert abs(np.linalg.norm(out.v) - 1.0) < 1e-10
        oracle = expm(-1j * H.full_matrix() * t) @ s.v
        assert np.max(np.abs(out.v - oracle)) < 1e-9


def test_evolve_group_law_and_reversal(rng):
    H = rand_block_h(rng)
    s = rand_joint(rng)
    ab = evolve(H, evolve(H, s, 1.3), 0.9)
    once = evolve(H, s, 2.2)
    assert np.max(np.abs(ab.v - once.v)) < 1e-9
    back = evolve(H, evolve(H, s, 1.7), -1.7)
    assert np.max(np.abs(back.v - s.v)) < 1e-9


def test_simplex_map_is_invariant_under_block_evolution(rng):
    H = rand_block_h(rng)
    s = rand_joint(rng)
    base = simplex_map(s).a
    for t in (0.1, 0.5, 1.0, 5.0):
        moved = simplex_map(evolve(H, s, t)).a
        assert np.max(np.abs(moved - base)) < 1e-10


def test_zero_sector_stays_exactly_zero_under_evolution(rng):
    H = rand_block_h(rng)
    v = np.zeros(DIMS.total, dtype=complex)
    v[: 4] = rand_state(4, rng)  # only sector 1 occupied
    s = JointState(DIMS, v)
    out = evolve(H, s, 2.4)
    assert np.all(out.v[4:] == 0.0)
    assert simplex_map(out).a.tolist() == [1.0, 0.0, 0.0]


def test_generic_dense_hamiltonian_moves_simplex_coordinates(rng):
    G = rand_hermitian(DIMS.total, rng)
    s = rand_joint(rng)
    moved = expm(-1j * G * 1.0) @ s.v
    drift = np.abs(
        simplex_map(JointState(DIMS, moved / np.linalg.norm(moved))).a - simplex_map(s).a
    )
    assert np.max(drift) > 1e-3


def test_product_state_simplex_weights():
    g = np.array([1.0, 0, 0, 0], dtype=complex)
    parts = [np.array([1.0]), np.array([0.0, 0.0]), np.array([0.0])]
    assert simplex_map(product_state(g, parts, DIMS)).a.tolist() == [1.0, 0.0, 0.0]

    parts = [np.array([0.5]), np.array([0.3, 0.0]), np.array([0.4])]
    w = np.array([0.25, 0.09, 0.16])
    got = simplex_map(product_state(g, parts, DIMS)).a
    assert np.max(np.abs(got - w / w.sum())) < 1e-14


def test_product_state_is_projectively_invariant(rng):
    g = rand_state(4, rng)
    parts = [rand_state(d, rng) for d in DIMS.d]
    s1 = product_state(g, parts, DIMS)
    s2 = product_state(2.0 * g, parts, DIMS)
    assert np.max(np.abs(s1.v - s2.v)) < 1e-15


def test_product_state_rejects_zero_inputs():
    with pytest.raises(DegenerateState):
        product_state(np.zeros(4), [np.ones(1), np.ones(2), np.ones(1)], DIMS)
    with pytest.raises(DegenerateState):
        product_state(np.ones(4), [np.zeros(1), np.zeros(2), np.zeros(1)], DIMS)


def test_simplex_map_equal_split_is_exact(rng):
    dims = Dims(m=1, d=(1, 1))
    v = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
    pt = simplex_map(JointState(dims, v))
    assert pt.a.tolist() == [0.5, 0.5]


def test_reduced_state_of_product_state_is_rank_one(rng):
    g = rand_state(4, rng)
    parts = [rand_state(d, rng) for d in DIMS.d]
    s = product_state(g, parts, DIMS)
    rho = reduced_particle_state(s)
    phi = np.concatenate(parts)
    phi = phi / np.linalg.norm(phi)
    outer = np.outer(phi, phi.conj())
    assert np.max(np.abs(rho - outer)) < 1e-12
    assert abs(np.trace(rho) - 1.0) < 1e-10
    assert np.max(np.abs(rho - rho.conj().T)) < 1e-10
    assert np.min(np.linalg.eigvalsh(rho)) > -1e-10


def test_reduced_state_invariant_under_uniform_block(rng):
    HU = uniform_block(rand_hermitian(4, rng), DIMS)
    s = rand_joint(rng)
    base = reduced_particle_state(s)
    for t in (0.1, 0.5, 1.0, 5.0):
        out = reduced_particle_state(evolve(HU, s, t))
        assert np.max(np.abs(out - base)) < 1e-10


def test_reduced_state_invariant_under_diagonal_uniform_block(rng):
    HU = uniform_block(np.diag(np.arange(1.0, 5.0)), DIMS)
    s = rand_joint(rng)
    out = reduced_particle_state(evolve(HU, s, 2.7))
    assert np.max(np.abs(out - reduced_particle_state(s))) < 1e-10


def test_reduced_state_changes_under_distinct_blocks(rng):
    H = rand_block_h(rng)
    s = product_state(rand_state(4, rng), [rand_state(d, rng) for d in DIMS.d], DIMS)
    out = reduced_particle_state(evolve(H, s, 1.0))
    assert np.max(np.abs(out - reduced_particle_state(s))) > 1e-3


def test_maximally_entangled_reduced_state_is_maximally_mixed():
    dims = Dims(m=4, d=(2, 2))
    v = np.zeros(dims.total, dtype=complex)
    # sum_r |r>_particle |r>_apparatus across both sectors: sector i holds
    # particle indices 2i..2i+1, pair each with a distinct apparatus basis vector
    for sector in range(2):
        for r in range(2):
            v[sector * 8 + r * 4 + (2 * sector + r)] = 0.5
    rho = reduced_particle_state(JointState(dims, v))
    assert np.max(np.abs(rho - np.eye(4) / 4.0)) < 1e-12


def test_dimension_mismatch_errors(rng):
    H = rand_block_h(rng)
    other = Dims(m=2, d=(1, 1))
    with pytest.raises(DimensionMismatch):
        evolve(H, JointState(other, rand_state(other.total, rng)), 1.0)
    with pytest.raises(DimensionMismatch):
        check_invariance(np.eye(5), DIMS, {1})
    with pytest.raises(DimensionMismatch):
        check_invariance(np.eye(DIMS.total), DIMS, {0, 1})
    with pytest.raises(DimensionMismatch):
        assemble(DIMS, [np.zeros((4, 4))] * 2)


def test_serialization_round_trips(rng):
    H = rand_block_h(rng)
    back = hamiltonian_from_json(hamiltonian_to_json(H))
    for a, b in zip(H.apparatus_blocks, back.apparatus_blocks):
        assert np.array_equal(a, b)
    s = rand_joint(rng)
    assert np.array_equal(state_from_json(state_to_json(s)).v, s.v)
    F = H.full_matrix()
    M, dims = operator_from_json(operator_to_json(F, DIMS))
    assert np.array_equal(M, F)
    assert dims == DIMS
    # block-form document loads as its full matrix too
    M2, _ = operator_from_json(hamiltonian_to_json(H))
    assert np.array_equal(M2, F)


def test_trajectory_csv_header_and_rows(rng):
    H = rand_block_h(rng)
    s = rand_joint(rng)
    lines = trajectory_csv(H, s, [0.0, 0.5]).strip().splitlines()
    assert lines[0] == "t,a_1,a_2,a_3"
    assert len(lines) == 3
    assert lines[1].startswith("0.0,")
