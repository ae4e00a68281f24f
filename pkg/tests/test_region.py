"""Region construction, membership, boundary tracing, dominant-system rates."""

import math

import numpy as np
import pytest

import bcstab as b
from bcstab import (
    InfeasibleRateError,
    InvalidParameterError,
    Membership,
    RatePoint,
    SchemeMismatchError,
    SuccessProfile,
    SystemParams,
)

GENERAL = SuccessProfile(0.9, 0.8, 0.3, 0.5)
RECT = SuccessProfile(0.5, 0.5, 0.5, 0.5)


def random_profile(rng, floor=0.02):
    p1s = rng.uniform(floor, 1.0)
    p2s = rng.uniform(floor, 1.0)
    return SuccessProfile(p1s, p2s, rng.uniform(floor * p1s, p1s), rng.uniform(floor * p2s, p2s))


class TestRegionGeneral:
    def test_hand_worked_coefficients(self):
        reg = b.region_general(GENERAL)
        first, second = reg.parts
        assert first.a1 == pytest.approx(1 / 0.9)
        assert first.a2 == pytest.approx(0.6 / 0.45)
        assert (first.cap_axis, first.cap_value) == (1, 0.5)
        assert second.a2 == pytest.approx(1 / 0.8)
        assert second.a1 == pytest.approx(0.3 / (0.8 * 0.3))
        assert (second.cap_axis, second.cap_value) == (0, 0.3)

    def test_hand_worked_membership(self):
        reg = b.region_general(GENERAL)
        # 0.3/0.9 + (0.6/0.45)*0.2 = 0.6 < 1
        assert b.membership(reg, RatePoint(0.3, 0.2)) is Membership.INSIDE

    def test_equal_probabilities_give_rectangle(self):
        reg = b.region_general(RECT)
        for part in reg.parts:
            assert part.a1 * part.a2 == 0.0  # one coefficient vanishes
        assert b.membership(reg, RatePoint(0.2, 0.2)) is Membership.INSIDE
        assert b.membership(reg, RatePoint(0.2, 0.51)) is Membership.OUTSIDE

    def test_corner_on_both_lines(self):
        """Both boundary lines pass through (p1_both, p2_both)."""
        rng = np.random.default_rng(3)
        for _ in range(300):
            prof = random_profile(rng)
            reg = b.region_general(prof)
            corner = reg.corner
            for part in reg.parts:
                assert part.line_value(corner) == pytest.approx(1.0, abs=1e-9)

    def test_corner_classifies_boundary(self):
        reg = b.region_general(GENERAL)
        assert b.membership(reg, reg.corner) is Membership.BOUNDARY

    def test_degenerate_coupled_service(self):
        prof = SuccessProfile(0.6, 0.5, 0.3, 0.0)
        reg = b.region_general(prof)
        first = reg.parts[0]
        assert first.cap_value == 0.0
        # the lambda2 = 0 segment short of p1_solo is boundary, never inside
        assert b.membership(reg, RatePoint(0.55, 0.0)) is Membership.BOUNDARY
        assert b.membership(reg, RatePoint(0.55, 0.01)) is Membership.OUTSIDE
        # the non-degenerate second part still has area
        assert b.membership(reg, RatePoint(0.1, 0.2)) is Membership.INSIDE


class TestFixedScDecoupled:
    # profile with p1_both == p1_solo, as produced by the fixed layered
    # scheme when the peer layer carries enough power
    PROF = SuccessProfile(0.3679, 0.6065, 0.3679, 0.3679)

    def test_single_part_region(self):
        reg = b.region_fixed_sc_decoupled(self.PROF)
        (part,) = reg.parts
        assert (part.cap_axis, part.cap_value) == (0, 0.3679)
        assert part.a2 == pytest.approx(1 / 0.6065)
        assert part.a1 == pytest.approx((0.6065 - 0.3679) / (0.3679 * 0.6065))

    def test_rectangle_when_fully_decoupled(self):
        reg = b.region_fixed_sc_decoupled(SuccessProfile(0.5, 0.4, 0.5, 0.4))
        (part,) = reg.parts
        assert part.a1 == 0.0
        assert b.membership(reg, RatePoint(0.49, 0.39)) is Membership.INSIDE

    def test_single_user_corner(self):
        reg = b.region_fixed_sc_decoupled(self.PROF)
        assert b.membership(reg, RatePoint(0.0, 0.6064)) is Membership.INSIDE
        assert b.membership(reg, RatePoint(0.0, 0.6066)) is Membership.OUTSIDE

    def test_coupled_profile_rejected(self):
        with pytest.raises(SchemeMismatchError, match="region_general"):
            b.region_fixed_sc_decoupled(GENERAL)

    def test_matches_region_general(self):
        """On decoupled profiles the specialised region is the general one."""
        rng = np.random.default_rng(17)
        grid = np.linspace(0.0, 1.0, 100)
        for _ in range(10):
            p1s = rng.uniform(0.05, 1.0)
            p2s = rng.uniform(0.05, 1.0)
            prof = SuccessProfile(p1s, p2s, p1s, rng.uniform(0.0, p2s))
            a = b.membership_grid(b.region_general(prof), grid[:, None], grid[None, :])
            c = b.membership_grid(b.region_fixed_sc_decoupled(prof), grid[:, None], grid[None, :])
            assert np.array_equal(a, c)


class TestMembership:
    def test_negative_rates_rejected(self):
        with pytest.raises(InvalidParameterError):
            RatePoint(-0.1, 0.2)
        with pytest.raises(InvalidParameterError):
            b.membership_grid(b.region_general(RECT), np.array([-0.1]), np.array([0.0]))

    def test_grid_matches_scalar(self):
        rng = np.random.default_rng(29)
        reg = b.region_general(GENERAL)
        pts = rng.uniform(0.0, 1.0, size=(500, 2))
        codes = b.membership_grid(reg, pts[:, 0], pts[:, 1])
        lookup = {1: Membership.INSIDE, 0: Membership.BOUNDARY, -1: Membership.OUTSIDE}
        for (l1, l2), code in zip(pts, codes):
            assert b.membership(reg, RatePoint(l1, l2)) is lookup[int(code)]

    def test_nesting(self):
        """Entrywise-larger profiles can only enlarge the region."""
        rng = np.random.default_rng(41)
        for _ in range(20):
            big = random_profile(rng)
            small = SuccessProfile(
                big.p1_solo * rng.uniform(0.3, 1.0),
                big.p2_solo * rng.uniform(0.3, 1.0),
                min(big.p1_both * rng.uniform(0.3, 1.0), big.p1_solo * 0.3),
                min(big.p2_both * rng.uniform(0.3, 1.0), big.p2_solo * 0.3),
            )
            reg_big = b.region_general(big)
            reg_small = b.region_general(small)
            pts = rng.uniform(0.0, 1.0, size=(1000, 2))
            inside_small = b.membership_grid(reg_small, pts[:, 0], pts[:, 1]) == 1
            outside_big = b.membership_grid(reg_big, pts[:, 0], pts[:, 1]) == -1
            assert not np.any(inside_small & outside_big)


class TestTraceBoundary:
    def test_rectangle_outline(self):
        pts = b.trace_boundary(b.region_general(RECT), 3)
        assert [(p.lambda1, p.lambda2) for p in pts] == [
            (0.0, 0.5), (0.25, 0.5), (0.5, 0.5), (0.5, 0.0),
        ]

    def test_axis_intercepts(self):
        pts = b.trace_boundary(b.region_general(GENERAL), 33)
        assert pts[0].lambda1 == 0.0
        assert pts[0].lambda2 == pytest.approx(0.8)  # p2_solo
        assert pts[-1].lambda2 == 0.0
        assert pts[-1].lambda1 == pytest.approx(0.9)  # p1_solo

    def test_corner_sampled_exactly(self):
        pts = b.trace_boundary(b.region_general(GENERAL), 10)
        match = [p for p in pts if p.lambda1 == 0.3]
        assert match and match[0].lambda2 == pytest.approx(0.5, abs=1e-12)

    def test_frontier_nonincreasing(self):
        rng = np.random.default_rng(53)
        for _ in range(25):
            pts = b.trace_boundary(b.region_general(random_profile(rng)), 41)
            lam2 = [p.lambda2 for p in pts]
            assert all(y2 <= y1 + 1e-12 for y1, y2 in zip(lam2, lam2[1:]))

    def test_degenerate_region_axis_segment(self):
        prof = SuccessProfile(0.6, 0.5, 0.0, 0.0)
        pts = b.trace_boundary(b.region_general(prof), 5)
        assert pts[0] == RatePoint(0.0, 0.5)  # lambda2 axis cap at p2_solo
        assert all(p.lambda2 == 0.0 for p in pts[1:])  # then the lambda1 axis
        assert pts[-1].lambda1 == pytest.approx(0.6)

    def test_too_few_points_rejected(self):
        with pytest.raises(InvalidParameterError):
            b.trace_boundary(b.region_general(RECT), 1)


class TestDominantServiceRates:
    def test_hand_worked_first_system(self):
        mu1, mu2, empty = b.dominant_service_rates(GENERAL, "first", 0.25)
        assert empty == pytest.approx(0.5)
        assert mu1 == pytest.approx(0.6)
        assert mu2 == pytest.approx(0.5)

    def test_idle_other_queue(self):
        mu1, _, empty = b.dominant_service_rates(GENERAL, "first", 0.0)
        assert mu1 == pytest.approx(0.9)  # p1_solo
        assert empty == 1.0

    def test_saturation_limit(self):
        mu1, _, _ = b.dominant_service_rates(GENERAL, "first", 0.5 - 1e-9)
        assert mu1 == pytest.approx(0.3, abs=1e-6)  # p1_both

    def test_second_system(self):
        mu1, mu2, empty = b.dominant_service_rates(GENERAL, "second", 0.15)
        assert mu1 == pytest.approx(0.3)
        assert empty == pytest.approx(0.5)
        assert mu2 == pytest.approx(0.8 - (0.3 / 0.3) * 0.15)

    def test_infeasible_rate(self):
        with pytest.raises(InfeasibleRateError):
            b.dominant_service_rates(GENERAL, "first", 0.5)
        with pytest.raises(InvalidParameterError):
            b.dominant_service_rates(GENERAL, "third", 0.1)


class TestRegionAdaptive:
    PARAMS = SystemParams(0.5, 0.5, 1, 1, 2, 2.0, 0.5, 1.5, "sc", "adaptive")

    def test_corner_from_adaptive_sc_profile(self):
        reg = b.region_adaptive(self.PARAMS)
        assert reg.profile.as_tuple() == pytest.approx(
            (0.778801, 0.778801, 0.367879, 0.670320), abs=1e-6
        )
        assert (reg.corner.lambda1, reg.corner.lambda2) == pytest.approx(
            (0.367879, 0.670320), abs=1e-6
        )

    def test_requires_adaptive(self):
        with pytest.raises(InvalidParameterError):
            b.region_adaptive(SystemParams(0.5, 0.5, 1, 1, 2, 2.0, 0.5, 1.5, "sc", "fixed"))

    def test_single_user_power_split(self):
        # all power on queue 1: shared-slot service vanishes for both users,
        # solo service still uses the full budget
        params = SystemParams(0.5, 0.5, 1, 1, 2, 2.0, 2.0, 0.0, "sc", "adaptive")
        prof = b.build_profile(params)
        assert prof.p1_both == 0.0 and prof.p2_both == 0.0
        assert prof.p1_solo == pytest.approx(math.exp(-0.25))
        assert prof.p2_solo == pytest.approx(math.exp(-0.25))
        reg = b.region_adaptive(params)
        assert b.membership(reg, RatePoint(0.5, 0.0)) is Membership.BOUNDARY
        assert b.membership(reg, RatePoint(0.5, 0.1)) is Membership.OUTSIDE

    def test_contains_fixed_region(self):
        fixed = b.region_for_params(
            SystemParams(0.5, 0.5, 1, 1, 2, 2.0, 0.5, 1.5, "sc", "fixed")
        )
        adaptive = b.region_adaptive(self.PARAMS)
        grid = np.linspace(0.0, 1.0, 101)
        cf = b.membership_grid(fixed, grid[:, None], grid[None, :])
        ca = b.membership_grid(adaptive, grid[:, None], grid[None, :])
        assert not np.any((cf >= 0) & (ca == -1))
        assert np.any((ca == 1) & (cf == -1))  # strictly larger somewhere


class TestBoundaryScale:
    def test_rectangle_diagonal(self):
        reg = b.region_general(RECT)
        s = b.boundary_scale(reg, 45.0)
        assert s * math.cos(math.radians(45)) == pytest.approx(0.5, abs=1e-9)

    def test_axis_rays(self):
        reg = b.region_general(GENERAL)
        assert b.boundary_scale(reg, 0.0) == pytest.approx(0.9, abs=1e-9)
        assert b.boundary_scale(reg, 90.0) == pytest.approx(0.8, abs=1e-9)

    def test_scaled_points_classify_consistently(self):
        rng = np.random.default_rng(61)
        for _ in range(20):
            reg = b.region_general(random_profile(rng))
            ang = rng.uniform(1.0, 89.0)
            s = b.boundary_scale(reg, ang)
            c, sn = math.cos(math.radians(ang)), math.sin(math.radians(ang))
            assert b.membership(reg, RatePoint(0.95 * s * c, 0.95 * s * sn)) is Membership.INSIDE
            assert b.membership(reg, RatePoint(1.05 * s * c, 1.05 * s * sn)) is Membership.OUTSIDE

    def test_angle_range_enforced(self):
        with pytest.raises(InvalidParameterError):
            b.boundary_scale(b.region_general(RECT), -1.0)
