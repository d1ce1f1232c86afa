"""
Tests for planner.py: the interval cover, best ratio per k, advice bits and k-copy runs.
"""
import io
from decimal import Decimal
from fractions import Fraction

import pytest

from kcopy.adversary import generate
from kcopy.domain import DomainError, Instance
from kcopy.packers import PH3Config, run_ph3
from kcopy.planner import (
    PLAN_COLUMNS,
    CopySpec,
    CoverPlan,
    CoverProgressError,
    advice_bits,
    best_ratio,
    copies_for_bits,
    cover_step,
    one_copy_plan,
    plan_cover,
    redblue_bound,
    round_up,
    run_kcopy,
    verify_plan,
    widen_plan,
    write_plan_csv,
)
from kcopy.ratio import opt_bounds, theorem1_bound
from kcopy.report import published_disagreements
from kcopy.schemas import AdversaryParams

F = Fraction
R_SIX = F("1.5815")

PH3_TABLE = {
    4: "1.5305", 5: "1.5155", 6: "1.5078", 7: "1.5040", 8: "1.5020", 9: "1.5010",
    10: "1.5005", 11: "1.5003", 12: "1.5002", 13: "1.5001", 14: "1.5001",
    15: "1.5001", 16: "1.5001",
}
# best_ratio cells where the exact cover beats the published column
PH3_COMPUTED = {4: "1.5283", 5: "1.5144", 6: "1.5073", 7: "1.5037"}
REDBLUE_TABLE = {
    4: "3.3750", 5: "2.8258", 6: "2.4375", 7: "2.1629", 8: "1.9688", 9: "1.8315",
    10: "1.7344", 11: "1.6657", 12: "1.6172", 13: "1.5829", 14: "1.5586",
    15: "1.5414", 16: "1.5293",
}


@pytest.fixture(scope="module")
def six_copy_plan():
    return plan_cover(R_SIX)


@pytest.mark.unit
class TestCoverStep:
    """Tests for a single cover step."""

    def test_bound_equals_target_at_both_ends(self):
        """Test that the first copy meets R exactly at r_min and r_max."""
        spec = cover_step(F(0), R_SIX)
        assert spec.r_L == (R_SIX - F(3, 2)) * 2 / 9
        assert theorem1_bound(spec.r_L, spec.r_min).value == R_SIX
        assert theorem1_bound(spec.r_L, spec.r_max).value == R_SIX
        assert spec.r_min < spec.r_L < spec.r_max

    def test_upper_band_uses_linear_step(self):
        """Test r_L = r_min (1 + 4c/3) above 1/3."""
        spec = cover_step(F(1, 2), R_SIX)
        c = R_SIX - F(3, 2)
        assert spec.r_L == F(1, 2) * (1 + 4 * c / 3)
        assert theorem1_bound(spec.r_L, spec.r_max).value <= R_SIX

    def test_resolution_floors_onto_grid(self):
        """Test that a dyadic resolution puts r_L and r_max on the grid."""
        spec = cover_step(F(0), R_SIX, resolution=1 << 20)
        assert (spec.r_L * (1 << 20)).denominator == 1
        assert (spec.r_max * (1 << 20)).denominator == 1
        assert theorem1_bound(spec.r_L, spec.r_max).value <= R_SIX

    @pytest.mark.parametrize("R", [F(3, 2), F(33, 19), F(2)])
    def test_target_outside_open_range(self, R):
        """Test that R must lie strictly inside (3/2, 33/19)."""
        with pytest.raises(DomainError):
            cover_step(F(0), R)

    def test_r_min_range(self):
        """Test that r_min must lie in [0, 1)."""
        with pytest.raises(DomainError):
            cover_step(F(1), R_SIX)

    def test_no_progress(self):
        """Test that a coarse grid near 3/2 stalls."""
        with pytest.raises(CoverProgressError):
            cover_step(F(0), F("1.51"), resolution=4)


@pytest.mark.unit
class TestPlanCover:
    """Tests for chaining cover steps into a plan."""

    def test_six_copies_for_1_5815(self, six_copy_plan):
        """Test the copy count and contiguity of the 1.5815 plan."""
        plan = six_copy_plan
        assert plan.k == 6
        assert plan.copies[0].r_min == 0
        assert plan.copies[-1].r_max == 1
        for a, b in zip(plan.copies, plan.copies[1:]):
            assert a.r_max == b.r_min
        assert all(c.verified_max_bound <= R_SIX for c in plan.copies)

    def test_step_cap(self):
        """Test that exceeding max_steps raises CoverProgressError."""
        with pytest.raises(CoverProgressError):
            plan_cover(R_SIX, max_steps=3)

    def test_verify_plan_clean(self, six_copy_plan):
        """Test the plan on 10^4 + 1 grid points."""
        assert verify_plan(six_copy_plan, samples=10_000) == []

    def test_widened_plan_fails(self, six_copy_plan):
        """Test that stretching the intervals breaks the bound."""
        violations = verify_plan(widen_plan(six_copy_plan, F(1, 100)), samples=1000)
        assert violations
        assert all(v.copy_index is not None for v in violations)
        assert all(v.bound > R_SIX for v in violations)
        assert "copy" in violations[0].describe()

    def test_gap_is_reported(self):
        """Test that uncovered points are violations without a copy."""
        plan = CoverPlan(F(33, 19), [CopySpec(F(1, 19), F(0), F(1, 2))])
        violations = verify_plan(plan, samples=10)
        assert [v.r_L_star for v in violations] == [F(k, 10) for k in range(6, 11)]
        assert all(v.copy_index is None for v in violations)
        assert "not covered" in violations[0].describe()

    def test_empty_plan(self):
        """Test that a plan without copies covers nothing."""
        assert len(verify_plan(CoverPlan(R_SIX), samples=10)) == 1

    def test_plan_csv(self, six_copy_plan):
        """Test header and one row per copy."""
        out = io.StringIO()
        write_plan_csv(six_copy_plan, out)
        lines = out.getvalue().splitlines()
        assert lines[0] == ",".join(PLAN_COLUMNS)
        assert len(lines) == 7
        assert lines[1].startswith("0,")
        assert lines[1].split(",")[-1] == "1.581500"


@pytest.mark.unit
class TestBestRatio:
    """Tests for the best ratio reachable with k copies."""

    def test_one_copy(self):
        """Test that one copy gives the single-copy optimum."""
        R, plan = best_ratio(1)
        assert R == F(33, 19)
        assert plan == one_copy_plan()
        assert plan.copies[0].r_L == F(1, 19)

    def test_six_copies(self):
        """Test that six copies reach 1.5815."""
        R, plan = best_ratio(6)
        assert F(3, 2) < R <= R_SIX
        assert plan.k <= 6

    def test_twelve_copies(self):
        """Test that twelve copies reach 1.5402."""
        R, plan = best_ratio(12)
        assert R <= F("1.5402")
        assert plan.k <= 12

    def test_monotone_in_k(self):
        """Test that more copies never make the ratio worse."""
        tol = F(1, 10**7)
        ratios = [best_ratio(k, tol)[0] for k in range(1, 65)]
        assert all(b <= a for a, b in zip(ratios, ratios[1:]))
        assert all(r > F(3, 2) for r in ratios)
        assert ratios[-1] < ratios[1]

    def test_plan_respects_k(self):
        """Test that the returned plan uses at most k copies and verifies."""
        for k in (2, 3, 5, 8):
            R, plan = best_ratio(k)
            assert plan.k <= k
            assert verify_plan(plan, samples=500) == []

    @pytest.mark.parametrize("k,tol", [(0, None), (2, 0), (2, -1)])
    def test_invalid_arguments(self, k, tol):
        """Test that k < 1 and non-positive tolerances are rejected."""
        with pytest.raises(DomainError):
            best_ratio(k, tol)


@pytest.mark.unit
class TestAdviceBits:
    """Tests for advice-bit arithmetic and the comparison columns."""

    @pytest.mark.parametrize("k,bits", [(1, 0), (2, 1), (3, 2), (6, 3), (8, 3), (9, 4)])
    def test_advice_bits(self, k, bits):
        """Test ceil(log2 k)."""
        assert advice_bits(k) == bits

    def test_copies_for_bits(self):
        """Test 2^bits copies."""
        assert copies_for_bits(4) == 16
        assert copies_for_bits(0) == 1
        with pytest.raises(DomainError):
            copies_for_bits(-1)
        with pytest.raises(DomainError):
            advice_bits(0)

    @pytest.mark.parametrize("bits,expected", sorted(REDBLUE_TABLE.items()))
    def test_redblue_bound(self, bits, expected):
        """Test the RedBlue column at 4 decimals."""
        assert redblue_bound(bits) == Decimal(expected)

    def test_round_up(self):
        """Test exact ceiling at a fixed number of places."""
        assert round_up(F(1, 3)) == Decimal("0.3334")
        assert round_up(F(1, 2)) == Decimal("0.5")
        assert round_up(F(33, 19)) == Decimal("1.7369")
        assert round_up(F(3, 2), places=6) == Decimal("1.5")


@pytest.mark.unit
class TestRunKCopy:
    """Tests for running every copy of a plan."""

    def test_minimum_over_copies(self, six_copy_plan, mixed_instance):
        """Test that the k-copy count is the best copy's count."""
        counts = [run_ph3(PH3Config(r_L=c.r_L), mixed_instance).bins_used for c in six_copy_plan.copies]
        bins, winner = run_kcopy(six_copy_plan, mixed_instance, workers=1)
        assert bins == min(counts)
        assert winner == counts.index(bins)

    def test_empty_plan(self, mixed_instance):
        """Test that a plan without copies cannot run."""
        with pytest.raises(DomainError):
            run_kcopy(CoverPlan(R_SIX), mixed_instance)

    @pytest.mark.integration
    def test_worker_pool_matches_sequential(self, six_copy_plan):
        """Test that the process pool gives the sequential answer."""
        inst = Instance.from_sizes(["1/10", "3/5", "1/4", "2/5", "1/3", "3/5", "1/6"] * 20)
        assert run_kcopy(six_copy_plan, inst, workers=2) == run_kcopy(six_copy_plan, inst, workers=1)

    @pytest.mark.slow
    def test_dominates_adversaries(self, six_copy_plan):
        """Test that the best copy stays within 3% of R against attacks on each interval."""
        limit = six_copy_plan.target_R * F(103, 100)
        for spec in six_copy_plan.copies:
            lo, hi = spec.interval
            for r in (lo, (lo + hi) / 2, hi):
                inst = generate(AdversaryParams(N=500, r_L=spec.r_L, r_L_star=r))
                bins, _ = run_kcopy(six_copy_plan, inst, workers=1)
                assert F(bins, opt_bounds(inst).ub_ffd) <= limit, (spec.r_L, r)


@pytest.mark.slow
class TestTable:
    """The PH3 column for 4..16 advice bits against the published one."""

    @pytest.mark.parametrize("bits,published", sorted(PH3_TABLE.items()))
    def test_ph3_column(self, bits, published):
        """Test that best_ratio(2^bits) never exceeds the published cell and matches it from 8 bits on."""
        computed = round_up(best_ratio(copies_for_bits(bits), F(1, 10**7))[0], 4)
        assert computed <= Decimal(published)
        if bits >= 8:
            assert Decimal(published) - computed <= Decimal("0.0001")

    @pytest.mark.parametrize("bits,expected", sorted(PH3_COMPUTED.items()))
    def test_small_rows_improve_on_published(self, bits, expected):
        """Test the 4..7-bit cells, which come out below the published column."""
        computed = round_up(best_ratio(copies_for_bits(bits), F(1, 10**7))[0], 4)
        assert computed == Decimal(expected)
        assert computed < Decimal(PH3_TABLE[bits])

    def test_published_sixteen_copy_value_needs_fifteen(self):
        """Test that the cover at the published 4-bit ratio already closes with 15 copies."""
        assert plan_cover(F("1.5305"), samples=0).k == 15

    def test_quoted_best_ratios_agree(self):
        """Test that best_ratio reproduces the quoted figures for 6 and 11 copies."""
        rows = [(k, best_ratio(k, F(1, 10**7))[0]) for k in (6, 11)]
        assert published_disagreements(rows) == []
