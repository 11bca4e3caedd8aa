import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from qcprog import models
from qcprog.generators import random_program
from qcprog.linalg import Subspace, orthonormalize, subspace_eq, subspace_leq, support
from qcprog.program import total_superop
from qcprog.reachability import (
    ReachCache,
    program_fingerprint,
    reach_algorithm1,
    reach_iterative,
    urr_algorithm2,
    urr_iterative,
)
from qcprog.superop import image

from conftest import const_program, e

seeds = st.integers(0, 2**32 - 1)
KINDS = st.sampled_from(["generic", "block", "chain", "fair_chain"])


def power_sum(p, rho, lo, hi):
    """sum_{lo <= i < hi} F^i(rho) with each power applied at Kraus level, and its scale."""
    f = total_superop(p)
    state, acc, scale = rho, np.zeros_like(rho), 0.0
    for i in range(hi):
        if i >= lo:
            acc = acc + state
        scale += p.m**i
        state = f(state)
    return acc, scale


def power_sum_support(p, rho, lo, hi):
    acc, scale = power_sum(p, rho, lo, hi)
    return support(acc, scale=scale)


def well_posed(p, rho, lo, hi):
    """No eigenvalue of the power sum sits within a few decades of the rank cutoff.

    Inside that band the weighted sum and the unweighted subspace chain can
    legitimately disagree about the dimension.
    """
    acc, _ = power_sum(p, rho, lo, hi)
    w = np.linalg.eigvalsh(acc)
    w = w / max(w[-1], 1e-300)
    return not np.any((w > 1e-15) & (w < 1e-6))


class TestTrivial:
    def test_identity_dynamics(self):
        p = const_program()
        rho = np.diag([1.0, 0.0])
        x = orthonormalize([e(2, 0)])
        assert subspace_eq(reach_algorithm1(p, rho).subspace, x)
        r = reach_iterative(p, rho)
        assert subspace_eq(r.subspace, x)
        assert r.iterations_used == 0
        assert subspace_eq(urr_algorithm2(p, rho).subspace, x)
        u = urr_iterative(p, rho)
        assert subspace_eq(u.subspace, x)
        assert u.iterations_used == 0

    def test_everything_terminates(self, walk):
        p0, rho = walk
        p = type(p0)(p0.processes, np.eye(3), np.zeros((3, 3)))
        assert subspace_eq(reach_algorithm1(p, rho).subspace, orthonormalize([e(3, 0)]))
        assert urr_algorithm2(p, rho).dim == 0
        assert urr_iterative(p, rho).dim == 0

    def test_flip_without_termination(self):
        x = np.array([[0, 1], [1, 0]])
        p = const_program(kraus=[x])
        r = reach_iterative(p, np.diag([1.0, 0.0]))
        assert r.dim == 2
        assert r.iterations_used == 1

    def test_absorbing_flip(self, flip):
        p, rho = flip
        assert reach_algorithm1(p, rho).dim == 2
        assert urr_algorithm2(p, rho).dim == 0
        assert urr_iterative(p, rho).dim == 0

    def test_full_rank_short_circuit(self, walk):
        p, _ = walk
        assert reach_algorithm1(p, np.eye(3) / 3).dim == 3


class TestWalk:
    def test_reach_full(self, walk):
        p, rho = walk
        assert reach_algorithm1(p, rho).dim == 3
        assert subspace_eq(reach_algorithm1(p, rho).subspace, power_sum_support(p, rho, 0, 3))

    def test_urr_full(self, walk):
        p, rho = walk
        assert urr_algorithm2(p, rho).dim == 3
        assert subspace_eq(urr_algorithm2(p, rho).subspace, power_sum_support(p, rho, 3, 6))


class TestCache:
    def test_cache_matches_solve(self, walk, tmp_path):
        p, rho = walk
        cache = ReachCache(p, tmp_path)
        assert (tmp_path / f"{cache.fingerprint}.npz").exists()
        again = ReachCache(p, tmp_path)
        assert np.array_equal(again.inverse, cache.inverse)
        for state in (rho, models.basis_state(3, 1)):
            assert subspace_eq(reach_algorithm1(p, state, cache=again).subspace, reach_algorithm1(p, state).subspace)
            assert subspace_eq(urr_algorithm2(p, state, cache=again).subspace, urr_algorithm2(p, state).subspace)

    def test_cache_rejects_other_program(self, walk, flip):
        with pytest.raises(ValueError):
            reach_algorithm1(flip[0], flip[1], cache=ReachCache(walk[0]))

    def test_fingerprint_distinguishes(self, walk, flip):
        assert program_fingerprint(walk[0]) != program_fingerprint(flip[0])
        assert program_fingerprint(walk[0]) == program_fingerprint(models.walk()[0])


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(1, 4), st.integers(1, 3), KINDS)
def test_closed_forms_match_power_sums(seed, d, m, kind):
    rng = np.random.default_rng(seed)
    p, rho = random_program(d, m, rng, kind)
    reach = reach_algorithm1(p, rho).subspace
    assert subspace_eq(reach, power_sum_support(p, rho, 0, d))
    assert subspace_eq(reach, reach_iterative(p, rho).subspace)
    urr = urr_iterative(p, rho).subspace
    assert subspace_leq(urr, reach)
    assume(well_posed(p, rho, d, 2 * d))
    assert subspace_eq(urr, power_sum_support(p, rho, d, 2 * d))
    assert subspace_eq(urr, urr_algorithm2(p, rho).subspace)


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(1, 4), st.integers(1, 3), KINDS)
def test_chain_shapes(seed, d, m, kind):
    rng = np.random.default_rng(seed)
    p, rho = random_program(d, m, rng, kind)
    y = reach_iterative(p, rho)
    assert list(y.chain_dims) == sorted(y.chain_dims)
    assert y.iterations_used <= d - 1
    z = urr_iterative(p, rho)
    assert list(z.chain_dims) == sorted(z.chain_dims, reverse=True)
    assert z.iterations_used <= d
    # the limit is invariant
    f = total_superop(p)
    assert subspace_leq(image(f, z.subspace), z.subspace)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 4), st.integers(1, 3), st.floats(0.01, 100.0))
def test_scale_invariance(seed, d, m, c):
    rng = np.random.default_rng(seed)
    p, rho = random_program(d, m, rng, "block")
    assert subspace_eq(reach_algorithm1(p, c * rho).subspace, reach_algorithm1(p, rho).subspace)
    assert subspace_eq(urr_algorithm2(p, c * rho).subspace, urr_algorithm2(p, rho).subspace)
    assert subspace_eq(reach_iterative(p, c * rho).subspace, reach_iterative(p, rho).subspace)


def test_block_family_gives_proper_subspaces():
    rng = np.random.default_rng(11)
    dims = [reach_algorithm1(*random_program(4, 2, rng, "block")).dim for _ in range(20)]
    assert min(dims) < 4


def test_mixed_state_reach_contains_initial_support():
    rng = np.random.default_rng(5)
    p, _ = random_program(4, 2, rng, "block")
    rho = np.diag([0.5, 0.5, 0, 0]).astype(complex)
    assert subspace_leq(support(rho), reach_algorithm1(p, rho).subspace)
    assert subspace_leq(Subspace.zero(4), reach_algorithm1(p, rho).subspace)


def test_ill_conditioned_urr_is_documented():
    # an eigenvalue ~1e-10 below the top of the URR power sum: the closed form
    # drops it under the relative rank cutoff, the projector chain keeps it
    p, rho = random_program(3, 1, np.random.default_rng(355), "generic")
    acc, _ = power_sum(p, rho, 3, 6)
    w = np.linalg.eigvalsh(acc)
    assert 1e-12 < w[0] / w[-1] < 1e-9
    assert not well_posed(p, rho, 3, 6)
    closed = urr_algorithm2(p, rho).subspace
    chain = urr_iterative(p, rho).subspace
    assert (closed.dim, chain.dim) == (2, 3)
    assert subspace_leq(closed, chain)
