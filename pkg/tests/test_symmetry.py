"""Block rotations, orbit geometry, finite groups, admissibility."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lyapcenter.symmetry import (
    AdmissibilityVerdict,
    BlockRotation,
    FinitePermGroup,
    check_admissible_finite,
    admissible_gamma_cross_s1,
    cyclic_group,
    dihedral_group,
    direct_product,
    orbit_distance,
    orbit_geometry,
    permutation_group,
    rotate,
    standard_blocks,
    tetrahedral_rotation_group,
)


PLANE = BlockRotation(n=2, blocks=((0, 1),))
TWO_BLOCKS = BlockRotation(n=4, blocks=standard_blocks(2))


class TestOrbitGeometry:
    def test_unit_circle_point(self):
        geo = orbit_geometry(PLANE, np.array([1.0, 0.0]))
        assert geo.orbit_dim == 1
        assert geo.isotropy_trivial
        assert np.allclose(geo.tangent_basis, [[0.0, 1.0]])
        assert np.allclose(geo.normal_basis, [[1.0, 0.0]])

    def test_origin_has_full_isotropy(self):
        geo = orbit_geometry(PLANE, np.zeros(2))
        assert geo.orbit_dim == 0
        assert not geo.isotropy_trivial
        assert geo.isotropy_label == "SO(2)"
        assert geo.normal_basis.shape == (2, 2)

    def test_one_active_block_of_two(self):
        geo = orbit_geometry(TWO_BLOCKS, np.array([1.0, 0.0, 0.0, 0.0]))
        assert geo.orbit_dim == 1
        assert geo.isotropy_trivial
        assert np.allclose(geo.tangent_basis, [[0.0, 1.0, 0.0, 0.0]])
        # normal directions: the radial one plus the whole second block
        assert geo.normal_basis.shape == (3, 4)

    def test_fixed_coordinates_join_normal_space(self):
        action = BlockRotation(n=3, blocks=((0, 1),))
        geo = orbit_geometry(action, np.array([0.0, 2.0, 5.0]))
        assert geo.orbit_dim == 1
        assert geo.normal_basis.shape == (2, 3)
        assert np.allclose(geo.normal_basis[-1], [0.0, 0.0, 1.0])

    def test_bases_are_orthonormal_and_complementary(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            q = rng.standard_normal(4)
            geo = orbit_geometry(TWO_BLOCKS, q)
            full = np.vstack([geo.tangent_basis, geo.normal_basis])
            assert full.shape == (4, 4)
            assert np.allclose(full @ full.T, np.eye(4), atol=1e-12)

    def test_rejects_wrong_dimension(self):
        with pytest.raises(ValueError):
            orbit_geometry(PLANE, np.zeros(3))

    def test_rejects_overlapping_blocks(self):
        with pytest.raises(ValueError):
            BlockRotation(n=4, blocks=((0, 1), (1, 2)))


@given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0), st.floats(0.0, 2 * np.pi))
@settings(max_examples=50, deadline=None)
def test_orbit_distance_vanishes_on_the_orbit(qx, qy, theta):
    q0 = np.array([qx, qy])
    x = rotate(PLANE, q0, theta)
    assert orbit_distance(PLANE, q0, x) <= 1e-7 * (1.0 + np.linalg.norm(q0))


def test_orbit_distance_matches_sampled_minimum():
    rng = np.random.default_rng(5)
    for _ in range(10):
        q0 = rng.standard_normal(4)
        x = rng.standard_normal(4)
        best = min(np.linalg.norm(x - rotate(TWO_BLOCKS, q0, th))
                   for th in np.linspace(0, 2 * np.pi, 4000, endpoint=False))
        assert abs(orbit_distance(TWO_BLOCKS, q0, x) - best) < 1e-5


def test_rotation_preserves_radial_potential_orbits():
    from lyapcenter.potentials import parse_potential
    spec = parse_potential("radial: -2*t^2 + 5/3*t^3 - 1/4*t^4")
    q = np.array([0.6, -0.8])
    for th in np.linspace(0, 2 * np.pi, 7):
        assert abs(spec.value(rotate(PLANE, q, th)) - spec.value(q)) < 1e-12


class TestFinitePermGroup:
    def test_cyclic_group_structure(self):
        g = cyclic_group(6)
        assert g.order == 6
        assert g.identity == 0
        assert g.inverse(1) == 5

    def test_tetrahedral_group_has_order_12(self):
        g = tetrahedral_rotation_group()
        assert g.order == 12

    def test_json_round_trip(self, tmp_path):
        g = dihedral_group(4)
        path = tmp_path / "d4.json"
        path.write_text(__import__("json").dumps(g.to_json()))
        again = FinitePermGroup.from_json(str(path))
        assert again == g

    def test_invalid_table_rejected(self):
        with pytest.raises(ValueError, match="associative"):
            FinitePermGroup(3, ((0, 1, 2), (1, 2, 0), (2, 1, 0)), ("a", "b", "c"))

    def test_missing_identity_rejected(self):
        with pytest.raises(ValueError, match="identity"):
            FinitePermGroup(2, ((0, 0), (0, 0)), ("a", "b"))

    def test_subgroup_enumeration_counts(self):
        # D4 has 10 subgroups, S3 has 6, Z12 has 6 (one per divisor)
        assert len(dihedral_group(4).subgroups_within(
            frozenset(range(8)))) == 10
        s3 = permutation_group([(1, 0, 2), (1, 2, 0)])
        assert len(s3.subgroups_within(frozenset(range(6)))) == 6
        z12 = cyclic_group(12)
        assert len(z12.subgroups_within(frozenset(range(12)))) == 6

    def test_closure_is_a_subgroup(self):
        g = dihedral_group(6)
        s = g.closure([3, 7])
        assert g.is_subgroup(s)


class TestAdmissibility:
    def test_tetrahedral_pair_fails_with_witness(self):
        g = tetrahedral_rotation_group()
        # V4 = identity plus the three double transpositions
        v4 = frozenset(i for i, name in enumerate(g.names)
                       if name == "e" or name.count("(") == 2)
        assert len(v4) == 4
        verdict = check_admissible_finite(g, v4)
        assert not verdict.admissible
        k1, k2 = verdict.witness
        assert len(k1) == 2 and len(k2) == 2 and k1 != k2
        # the named conjugator really fuses the witness pair in G ...
        conj = verdict.witness_conjugator
        assert g.conjugate_set(conj, k1) == k2
        # ... while no element of V4 does (V4 is abelian)
        assert all(g.conjugate_set(h, k1) == k1 for h in v4)

    def test_abelian_groups_are_always_admissible(self):
        g = direct_product(cyclic_group(4), cyclic_group(2))
        for sub in g.subgroups_within(frozenset(range(g.order))):
            assert check_admissible_finite(g, sub).admissible

    def test_full_group_pair_is_admissible(self):
        g = tetrahedral_rotation_group()
        verdict = check_admissible_finite(g, frozenset(range(12)))
        assert verdict.admissible

    def test_not_a_subgroup_raises(self):
        g = cyclic_group(6)
        with pytest.raises(ValueError, match="not a subgroup"):
            check_admissible_finite(g, frozenset({1}))

    def test_verdict_consistency_enforced(self):
        with pytest.raises(ValueError):
            AdmissibilityVerdict(admissible=True, witness=(frozenset(), frozenset()))

    def test_conjugation_invariance(self):
        g = tetrahedral_rotation_group()
        v4 = g.closure([i for i, name in enumerate(g.names) if name.count("(") == 2][:2])
        base = check_admissible_finite(g, v4).admissible
        for conj in range(g.order):
            assert check_admissible_finite(
                g, g.conjugate_set(conj, v4)).admissible == base

    def test_circle_factor_pair(self):
        verdict = admissible_gamma_cross_s1()
        assert verdict.admissible
        assert "cardinality" in verdict.reason

    def test_finite_surrogate_of_the_circle_pair_agrees(self):
        # stand-in for Gamma x S^1 with Gamma = Z_3 and the circle replaced
        # by a long coprime cycle; the subgroup is the cycle factor
        g = direct_product(cyclic_group(3), cyclic_group(8))
        h = frozenset(g.table[0][j] for j in range(8))  # {e} x Z8 indices 0..7
        assert check_admissible_finite(g, h).admissible == admissible_gamma_cross_s1().admissible
