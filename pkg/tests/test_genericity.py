# Copyright 2025 H2so4 Consulting LLC

import json
import logging
import math
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import pytest

from core import exporters
from core.agraphs import rank as graph_rank
from core.agraphs import reads_word
from core.genericity import (CRIT_IS_WHOLE, IN_P, IN_P_PRIME, PI_IS_R, PRIMITIVE, PROPER_POWER,
                             check_condition, checked_subwords, fit_decay, is_mu_L_readable,
                             is_mu_readable, max_piece_length, survey, theorem_cross_check,
                             validate_params, wilson_radius)
from core.models import (CheckMode, InputError, ParamSet, Readability, ResourceLimitError,
                         SurveyRow, Word)
from core.words import (cyclic_sphere_size, cyclic_word, enumerate_cyclic_classes, enumerate_words,
                        sample_word)
from oracles import direct_pirank, naive_max_piece, readable_by_enumeration, survey_counts

GOOD = ParamSet(lam=Fraction(1, 40), mu=Fraction(9, 10), L=2, r=2)
# the largest lambda the inequalities allow for mu = 1, L = r = 2
WIDE = ParamSet(lam=Fraction(1, 33), mu=Fraction(1), L=2, r=2)


def test_valid_parameters():
    assert validate_params(GOOD) == []
    assert validate_params(WIDE) == []


def test_lambda_one_sixth_is_rejected():
    violations = validate_params(ParamSet(lam=Fraction(1, 6), mu=Fraction(1), L=2, r=2))
    assert "lambda <= mu/(15L+3mu)" in violations


def test_L_below_rank_is_rejected():
    violations = validate_params(ParamSet(lam=Fraction(1, 100), mu=Fraction(1), L=2, r=3))
    assert any("L >= r" in v for v in violations)


def test_lambda_against_mu_over_3r():
    # lambda <= mu/(15L+3mu) already forces lambda < mu/(3r) once L >= r
    p = ParamSet(lam=Fraction(1, 40), mu=Fraction(9, 10), L=2, r=2)
    assert p.lam < p.mu / (3 * p.r)
    assert validate_params(replace(p, mu=Fraction(0))) == ["0 < mu <= 1"]
    assert validate_params(replace(p, lam=Fraction(1))) == ["0 < lambda < 1"]


def test_piece_examples(cword):
    assert max_piece_length(cword("abAB")) == 1
    assert max_piece_length(cword("a")) == 0
    for k in range(2, 7):
        assert max_piece_length(cword("a" * k)) == k - 1
    with pytest.raises(InputError):
        max_piece_length(cyclic_word(Word(())))


@pytest.mark.parametrize("n", range(1, 7))
def test_piece_matches_pairwise_scan(n):
    for w in enumerate_words(n, 2, cyclic=True):
        c = cyclic_word(w)
        assert max_piece_length(c) == naive_max_piece(c), str(w)


def test_piece_on_random_long_words(random_words):
    for c in random_words(40, [20, 33, 50], cyclic=True, seed=21):
        cw = cyclic_word(c)
        assert max_piece_length(cw) == naive_max_piece(cw)


@pytest.mark.slow
def test_piece_on_a_thousand_random_words(random_words):
    for c in random_words(1000, list(range(1, 31)), cyclic=True, seed=22):
        cw = cyclic_word(c)
        assert max_piece_length(cw) == naive_max_piece(cw), str(c)


def test_readability_examples(word):
    w = word("a" * 10)
    witness = is_mu_readable(w, Fraction(1, 5), 2)
    assert witness is not None
    assert witness.volume <= 2 and graph_rank(witness) <= 1
    assert reads_word(witness, w)
    assert is_mu_readable(word("abAB"), Fraction(1, 4), 2) is None

    witness = is_mu_L_readable(w, Fraction(1, 5), 2, 2)
    assert witness is not None
    assert any(witness.degree(v) < 4 for v in range(witness.num_vertices))


def test_readability_rejects_trivial_words():
    with pytest.raises(InputError):
        is_mu_readable(Word(()), Fraction(1, 2), 2)


def test_readability_respects_the_state_bound(word):
    with pytest.raises(ResourceLimitError):
        is_mu_readable(word("abAbaB"), Fraction(1, 3), 2, max_states=1)


def _agree_with_enumeration(w):
    n = len(w)
    for k in (1, 2, 3):
        mu = Fraction(k, n)
        found = is_mu_readable(w, mu, 2)
        assert (found is not None) == readable_by_enumeration(w, mu, 1, 2, False), (str(w), k)
        if found is not None:
            assert found.volume <= k and graph_rank(found) <= 1 and reads_word(found, w)
        found = is_mu_L_readable(w, mu, 2, 2)
        assert (found is not None) == readable_by_enumeration(w, mu, 2, 2, True), (str(w), k)
        if found is not None:
            assert any(found.degree(v) < 4 for v in range(found.num_vertices))


@pytest.mark.parametrize("n", range(1, 5))
def test_readability_matches_graph_enumeration(n):
    for w in enumerate_words(n, 2):
        _agree_with_enumeration(w)


@pytest.mark.slow
@pytest.mark.parametrize("n", range(5, 10))
def test_readability_matches_graph_enumeration_longer_words(n):
    for s in range(40):
        _agree_with_enumeration(sample_word(n, 2, seed=1000 * n + s))


def test_checked_subwords(cword):
    c = cword("abAB")
    assert checked_subwords(c, CheckMode.WORD_ONLY) == [c.rep]
    subwords = checked_subwords(c, CheckMode.FULL)
    assert subwords[0] == c.rep
    assert {len(u) for u in subwords} == {2, 3, 4}
    assert [len(u) for u in subwords] == sorted((len(u) for u in subwords), reverse=True)
    keys = {min(u.letters, u.inverse().letters) for u in subwords}
    assert len(keys) == len(subwords)


def test_check_condition_on_short_words(cword):
    report = check_condition(cword("abAB"), GOOD)
    assert report.mode == CheckMode.FULL
    assert report.max_piece_len == 1
    assert not report.c_prime_ok
    assert report.in_P is False
    assert report.in_P_prime is False
    assert not report.inconclusive
    assert report.cross_check is None

    report = check_condition(cword("aaaa"), GOOD, mode=CheckMode.WORD_ONLY)
    assert report.proper_power
    assert report.in_P is False


def test_check_condition_stops_at_the_first_readable_subword(cword):
    report = check_condition(cword("a" * 10), GOOD, mode=CheckMode.FULL)
    assert len(report.readability) == 1
    item = report.readability[0]
    assert Readability.READABLE in (item.mu_readable, item.mu_L_readable)
    body = exporters.genericity_to_dict(report)
    assert body["params"] == {"lambda": "1/40", "mu": "9/10", "L": 2, "r": 2}
    assert body["readability"][0]["subword"] == "a" * 10


def test_check_condition_rejects_bad_input(cword):
    with pytest.raises(InputError):
        check_condition(cword("ab"), replace(GOOD, lam=Fraction(1, 6)))
    with pytest.raises(InputError):
        check_condition(cword("abc", 3), GOOD)


def _long_word():
    # long enough that the longest piece is far below lambda|w|
    return cyclic_word(sample_word(800, 2, cyclic=True, seed=5))


def test_long_word_satisfies_the_piece_and_subword_clauses(monkeypatch):
    monkeypatch.setattr("core.genericity.is_mu_readable", lambda *a, **k: None)
    monkeypatch.setattr("core.genericity.is_mu_L_readable", lambda *a, **k: None)
    report = check_condition(_long_word(), WIDE, mode=CheckMode.WORD_ONLY)
    assert report.c_prime_ok
    assert not report.proper_power
    assert report.all_two_letter_subwords
    assert report.in_P is True
    assert report.in_P_prime is True


def test_unknown_readability_makes_the_report_inconclusive(monkeypatch):
    def over_budget(*args, **kwargs):
        raise ResourceLimitError("quotient search exceeded the state bound of 1", 1, 2)

    monkeypatch.setattr("core.genericity.is_mu_readable", over_budget)
    monkeypatch.setattr("core.genericity.is_mu_L_readable", over_budget)
    report = check_condition(_long_word(), WIDE, mode=CheckMode.WORD_ONLY)
    assert report.readability[0].mu_readable == Readability.UNKNOWN
    assert report.in_P is None
    assert report.in_P_prime is None
    assert report.inconclusive


def test_theorem_cross_check(cword, caplog):
    report = check_condition(cword("abAB"), GOOD)
    assert theorem_cross_check(report) is None
    assert theorem_cross_check(replace(report, in_P_prime=True)) is True

    square = check_condition(cword("aaaa"), GOOD)
    with caplog.at_level(logging.ERROR, logger="core.genericity"):
        assert theorem_cross_check(replace(square, in_P_prime=True)) is False
    assert "satisfies the condition" in caplog.text


def test_wilson_radius():
    assert wilson_radius(0, 0) == 0.0
    r = wilson_radius(5, 10)
    assert 0 < r < 0.5
    assert wilson_radius(50, 100) < r


def _row(n, f):
    return SurveyRow(n=n, population=0, samples="exhaustive", counts={}, total=1, errors=0,
                     fractions={CRIT_IS_WHOLE: f}, radii={CRIT_IS_WHOLE: 0.0})


def test_fit_decay_recovers_the_constants():
    rows = [_row(n, 1 - 0.8 * 0.5 ** n) for n in range(2, 9)]
    fit = fit_decay(rows)
    assert math.isclose(fit.C, 0.8, rel_tol=1e-9)
    assert math.isclose(fit.sigma, 0.5, rel_tol=1e-9)
    assert fit.r_squared > 0.999
    assert fit.points == 7
    assert fit_decay([_row(3, 0.2)]) is None
    assert fit_decay([_row(3, 1.0), _row(4, 1.0)]) is None


def test_short_words_never_have_full_rank():
    table = survey([1, 2, 3], None, 2, 0)
    for row in table.rows:
        assert row.fractions[CRIT_IS_WHOLE] == 0
        assert row.fractions[PI_IS_R] == 0
        assert row.samples == "exhaustive"
        assert all(r == 0 for r in row.radii.values())
        assert row.total == cyclic_sphere_size(row.n, 2)


def test_exhaustive_survey_matches_direct_enumeration():
    table = survey([4, 5], None, 2, 0)
    for row in table.rows:
        hits = 0
        for c, size in enumerate_cyclic_classes(row.n, 2):
            pi, _ = direct_pirank(c, 2)
            hits += size * (pi == 2)
        assert row.counts[PI_IS_R] == hits
        assert 0 < row.fractions[PI_IS_R] < 1
        assert row.counts[CRIT_IS_WHOLE] <= row.counts[PI_IS_R]
        assert row.errors == 0


def test_free_survey_counts_every_reduced_word():
    table = survey([3], None, 2, 0, cyclic=False)
    (row,) = table.rows
    assert row.total == 36
    assert row.counts[PRIMITIVE] + row.counts[PROPER_POWER] <= 36


def test_sampled_survey_is_reproducible():
    one = survey([5, 6], 30, 2, 99)
    again = survey([5, 6], 30, 2, 99)
    threaded = survey([5, 6], 30, 2, 99, threads=3)
    assert one == again == threaded
    for row in one.rows:
        assert row.samples == 30
        assert row.total + row.errors == 30
        for c, f in row.fractions.items():
            assert 0.0 <= f <= 1.0
            assert row.radii[c] > 0


def test_survey_with_parameters_adds_columns():
    table = survey([4], None, 2, 0, params=GOOD)
    (row,) = table.rows
    assert row.counts[IN_P] == 0
    assert row.counts[IN_P_PRIME] == 0
    assert exporters.survey_to_dict(table)["rows"][0]["counts"][IN_P] == 0


def test_survey_counts_words_over_the_bound_as_errors():
    table = survey([4], None, 2, 0, max_states=1)
    (row,) = table.rows
    assert row.errors > 0
    assert row.total + row.errors == cyclic_sphere_size(4, 2)


def test_survey_counts_inconclusive_conditions_as_errors(monkeypatch):
    real = check_condition

    def unknown(*args, **kwargs):
        return replace(real(*args, **kwargs), in_P=None, in_P_prime=None)

    monkeypatch.setattr("core.genericity.check_condition", unknown)
    table = survey([4], None, 2, 0, params=GOOD)
    (row,) = table.rows
    assert row.errors == cyclic_sphere_size(4, 2)
    assert row.total == 0
    assert row.counts[IN_P] == 0
    assert row.counts[IN_P_PRIME] == 0


def test_heuristic_survey_runs():
    table = survey([4, 5], 10, 2, 3, heuristic=True)
    assert len(table.rows) == 2


@pytest.mark.parametrize("kwargs", [
    dict(lengths=[0], samples=5),
    dict(lengths=[3], samples=0),
    dict(lengths=[3], samples=5, params=replace(GOOD, L=1)),
])
def test_survey_input_errors(kwargs):
    with pytest.raises(InputError):
        survey(rank=2, seed=0, **kwargs)


@pytest.mark.slow
def test_exhaustive_survey_up_to_length_7():
    table = survey(list(range(1, 8)), None, 2, 0)
    assert [row.n for row in table.rows] == list(range(1, 8))
    assert table.rows[-1].fractions[CRIT_IS_WHOLE] > 0


FIXTURE = Path(__file__).parent / "fixtures" / "survey_f2.json"


def _fixture_rows():
    body = json.loads(FIXTURE.read_text(encoding="utf-8"))
    assert (body["rank"], body["cyclic"]) == (2, True)
    return {row["n"]: row for row in body["rows"]}


def test_fixture_populations():
    rows = _fixture_rows()
    assert sorted(rows) == list(range(1, 11))
    for n, row in rows.items():
        assert row["population"] == cyclic_sphere_size(n, 2)
        assert row["counts"][CRIT_IS_WHOLE] <= row["counts"][PI_IS_R] <= row["population"]


@pytest.mark.parametrize("n", range(1, 7))
def test_fixture_matches_the_partition_oracle(n):
    assert survey_counts(n, 2) == _fixture_rows()[n]["counts"]


@pytest.mark.slow
def test_fixture_matches_the_partition_oracle_at_length_7():
    assert survey_counts(7, 2) == _fixture_rows()[7]["counts"]


@pytest.mark.slow
def test_exhaustive_survey_matches_the_fixture():
    rows = _fixture_rows()
    table = survey(list(range(1, 11)), None, 2, 0, threads=4)
    for row in table.rows:
        expected = rows[row.n]
        assert row.errors == 0
        assert row.total == expected["population"]
        assert row.counts[PI_IS_R] == expected["counts"][PI_IS_R], row.n
        assert row.counts[CRIT_IS_WHOLE] == expected["counts"][CRIT_IS_WHOLE], row.n


@pytest.mark.slow
def test_sampled_fractions_keep_up_with_the_exhaustive_ones():
    rows = _fixture_rows()
    exact = {n: rows[n]["counts"][CRIT_IS_WHOLE] / rows[n]["population"] for n in (8, 10)}
    assert exact[8] <= exact[10]
    table = survey([12, 14], 300, 2, 31, threads=4)
    sampled = {row.n: row for row in table.rows}
    for n, row in sampled.items():
        assert row.errors == 0
        assert row.total == 300
    # f_12 and f_14 against the even lengths below them, up to the 95% Wilson radius
    f12, f14 = sampled[12], sampled[14]
    assert f12.fractions[CRIT_IS_WHOLE] + f12.radii[CRIT_IS_WHOLE] >= exact[8]
    assert f14.fractions[CRIT_IS_WHOLE] + f14.radii[CRIT_IS_WHOLE] >= exact[10]
