import itertools
import logging
import math
from fractions import Fraction

import pytest

from safd import build_model, load_model
from safd.errors import BudgetExceeded, DimensionMismatch
from safd.ifs_core import format_word, induce_on_coords, level_maps, parse_word
from safd.types import CanonicalAffine1D
from safd.separation import (
    canonical_level,
    delta_n,
    kernel_consistency,
    pair_distance,
    s_n,
    separation_report,
    separation_table,
)
from tests.common import MODELS, load_data

SMALL_FIXTURES = ("cantor", "mcmullen", "example_ab", "swapped", "overlap", "homogeneous3")


def naive_delta_s(ifs, n):
    """Both quantities straight from their definitions, over all pairs of words."""
    maps = level_maps(ifs, n)
    if len(maps) == 1:
        return 0, 0
    delta = math.inf
    for a, b in itertools.combinations(maps, 2):
        if a.rates == b.rates:
            delta = min(delta, abs(a.offsets[0] - b.offsets[0]))
    distinct = {(m.rates, m.offsets) for m in maps}
    if len(distinct) <= 1:
        return delta, 0
    s = math.inf
    for a, b in itertools.combinations(distinct, 2):
        if a[0] == b[0]:
            s = min(s, abs(a[1][0] - b[1][0]))
    return delta, s


def test_matches_all_pairs():
    for name in SMALL_FIXTURES:
        ifs = MODELS[name].ifs
        max_n = 6 if ifs.size == 2 else 5
        for j in range(ifs.d):
            line = induce_on_coords(ifs, (j,))
            report = separation_report(ifs, max_n, coord=j)
            for level in report.levels:
                delta, s = naive_delta_s(line, level.n)
                assert level.delta == delta, (name, j, level.n)
                assert level.s_n == s, (name, j, level.n)


def test_separation_data():
    for name, rows in load_data("separation").items():
        ifs = MODELS[name].ifs
        report = separation_report(ifs, len(rows))
        for row, level in zip(rows, report.levels):
            assert level.n == row["n"]
            assert level.delta == Fraction(row["delta"]), (name, row)
            assert level.s_n == Fraction(row["s_n"]), (name, row)
            expected = tuple(parse_word(w) for w in row["witness"]) if row["witness"] else None
            assert level.witness == expected, (name, row)


def test_cantor_delta():
    cantor = MODELS["cantor"].ifs
    for n in range(1, 9):
        assert delta_n(cantor, n) == 2 * Fraction(1, 3) ** n
        assert s_n(cantor, n) == delta_n(cantor, n)


def test_cantor_rates():
    report = separation_report(MODELS["cantor"].ifs, 8)
    assert report.no_exact_overlaps
    assert report.first_overlap_level is None
    assert report.diophantine_evidence
    assert report.c_fit == pytest.approx(1 / 3)
    assert report.c_hat == pytest.approx(2 ** (1 / 8) / 3)
    assert not report.unreliable


def test_overlap_witness():
    report = separation_report(MODELS["overlap"].ifs, 4)
    assert report.first_overlap_level == 2
    assert not report.no_exact_overlaps
    assert report.levels[1].witness == ((0, 2), (1, 0))
    assert report.diophantine_evidence
    table = separation_table(report)
    assert table.columns == ("n", "delta_n", "s_n", "overlap_witness")
    assert table.rows[1][3] == f"{format_word((0, 2))}={format_word((1, 0))}"


def test_distinct_slopes_never_meet():
    swapped = MODELS["swapped"].ifs
    assert delta_n(induce_on_coords(swapped, (0,)), 1) == math.inf
    assert delta_n(induce_on_coords(swapped, (0,)), 2) < math.inf


def test_float_mode_is_indeterminate(caplog):
    overlap = load_model("overlap", exact=False)
    with caplog.at_level(logging.WARNING, logger="safd.separation"):
        report = separation_report(overlap.ifs, 2)
    level = report.levels[1]
    assert level.indeterminate
    assert level.witness is None
    assert not report.no_exact_overlaps
    assert any(getattr(r, "safd_event", None) == "indeterminate_overlap" for r in caplog.records)
    assert separation_table(report).rows[1][3] == "indeterminate"


def test_coordinate_required_in_the_plane():
    with pytest.raises(DimensionMismatch):
        canonical_level(MODELS["mcmullen"].ifs, 1)


def test_budget():
    with pytest.raises(BudgetExceeded):
        separation_report(MODELS["overlap"].ifs, 10, budget=3**9)


def test_kernel_consistency():
    for name in ("cantor", "mcmullen"):
        result = kernel_consistency(MODELS[name].ifs, 4)
        assert result.consistent, name
        assert result.violation is None
    # maps 0 and 2 agree in the first coordinate only
    assert kernel_consistency(MODELS["homogeneous3"].ifs, 1).violation == (1, 0, (0,), (2,))


def test_kernel_violation():
    model = build_model(
        {"maps": [{"r": ["1/2", "1/3"], "t": ["0", "0"]}, {"r": ["1/2", "1/3"], "t": ["0", "2/3"]}]}
    )
    result = kernel_consistency(model.ifs, 3)
    assert not result.consistent
    assert result.violation == (1, 0, (0,), (1,))


def test_pair_distance():
    a = CanonicalAffine1D(Fraction(1, 9), Fraction(2, 9))
    b = CanonicalAffine1D(Fraction(1, 9), Fraction(2, 3))
    assert pair_distance(a, b) == Fraction(4, 9)
    assert pair_distance(b, a) == Fraction(4, 9)
    assert pair_distance(a, CanonicalAffine1D(Fraction(-1, 9), Fraction(2, 9))) == math.inf
