# Copyright 2025 H2so4 Consulting LLC

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from app.config import RunConfig
from core import exporters  # JSON / DOT renderings
from core.agraphs import AGraph, fold, rank as graph_rank, stallings_from_generators
from core.genericity import check_condition, survey
from core.hash_utils import derive_seed
from core.models import CheckMode, InputError, ParamSet, Rank
from core.pirank import primitivity_rank
from core.text_utils import parse_rational, parse_word
from core.whitehead import is_primitive, minimize
from core.wordmeasure import compare, exact_estimate, mc_expected_fix
from core.words import (cyclic_sphere_size, cyclic_word, enumerate_cyclic_classes,
                        enumerate_words, sample_word, sphere_size)

log = logging.getLogger(__name__)


@dataclass
class Outcome:
    # Outcome: what a subcommand produced. `payload` is the JSON body, `summary` the
    # human-readable lines, `graphs` whatever a --dot export should draw.
    payload: Dict[str, Any]
    summary: List[str] = field(default_factory=list)
    graphs: List[AGraph] = field(default_factory=list)


def parse_pi(text: Optional[str]) -> Optional[Rank]:
    if text is None:
        return None
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        value = int(text)
    except ValueError:
        raise InputError(f"--pi must be a positive integer or 'inf', got {text!r}")
    if value < 1:
        raise InputError("--pi must be at least 1")
    return value


class AppController:
    # AppController: runs one subcommand from a RunConfig and returns an Outcome.
    # It owns argument interpretation (word text, rationals, modes); the numeric work
    # lives in core.

    def __init__(self, config: RunConfig):
        self.config = config
        # __init__  # AppController.__init__

    def _word(self):
        if self.config.word is None:
            raise InputError("a word argument is required")
        return parse_word(self.config.word, self.config.rank)

    def _nontrivial_word(self):
        w = self._word()
        if not w:
            raise InputError("the word must be nontrivial")
        return w

    def _params(self, required: bool) -> Optional[ParamSet]:
        # _params: the (lambda, mu, L) triple; all three or none
        c = self.config
        given = [c.lam is not None, c.mu is not None, c.L is not None]
        if not any(given):
            if required:
                raise InputError("--lambda, --mu and --L are required")
            return None
        if not all(given):
            raise InputError("--lambda, --mu and --L must be given together")
        return ParamSet(lam=parse_rational(c.lam), mu=parse_rational(c.mu), L=c.L, r=c.rank)
        # _params  # AppController._params

    # ------------------------------------------------------------------
    # GROUP THEORY
    # ------------------------------------------------------------------

    def pirank(self) -> Outcome:
        # pirank: pi(w), Crit(w) and search statistics.
        c = self.config
        w = self._nontrivial_word()
        report = primitivity_rank(w, c.rank, max_states=c.max_states, threads=c.threads,
                                  heuristic=c.heuristic)
        payload = exporters.pirank_to_dict(report)
        pi = payload["pi"]
        lines = [f"pi({w}) = {pi}", f"Crit: {len(report.crit)} subgroup(s)"]
        for h in report.crit:
            basis = ", ".join(str(b) for b in h.basis)
            lines.append(f"  rank {h.rank}, index {exporters.rank_to_json(h.index)}: <{basis}>")
        # end for  # crit loop
        lines.append(f"quotients explored: {report.quotients_explored}")
        return Outcome(payload, lines, [h.graph for h in report.crit])
        # pirank  # AppController.pirank

    def primitive(self) -> Outcome:
        # primitive: Whitehead primitivity test plus the minimizing chain.
        c = self.config
        w = self._nontrivial_word()
        prim = is_primitive(w, c.rank)
        core, chain = minimize(w, c.rank)
        payload = {
            "word": str(w),
            "primitive": prim,
            "minimized": str(core),
            "chain": exporters.moves_to_json(chain),
        }
        lines = [f"primitive: {'true' if prim else 'false'}",
                 f"minimal form: {core} after {len(chain)} move(s)"]
        return Outcome(payload, lines)
        # primitive  # AppController.primitive

    def stallings(self) -> Outcome:
        c = self.config
        if not c.generators:
            raise InputError("at least one generator is required")
        gens = [parse_word(text, c.rank) for text in c.generators]
        h = stallings_from_generators(gens, c.rank)
        payload = dict(exporters.subgroup_to_dict(h), generators=[str(g) for g in gens])
        lines = [f"rank {h.rank}, index {exporters.rank_to_json(h.index)}",
                 f"{h.graph.num_vertices} vertices, {h.graph.volume} edges",
                 "basis: " + ", ".join(str(b) for b in h.basis)]
        return Outcome(payload, lines, [h.graph])
        # stallings  # AppController.stallings

    def fold(self) -> Outcome:
        # fold: read a graph JSON file and fold it.
        c = self.config
        if c.graph_file is None:
            raise InputError("a graph file is required")
        try:
            with open(c.graph_file, "r", encoding="utf-8") as f:
                raw = json.load(f)
        except OSError as e:
            raise InputError(f"cannot read {c.graph_file}: {e}")
        except json.JSONDecodeError as e:
            raise InputError(f"{c.graph_file} is not valid JSON: {e}")
        g = exporters.graph_from_json(raw, c.rank)
        folded = fold(g)
        connected = folded.is_connected()
        payload = {
            "input_vertices": g.num_vertices,
            "graph": exporters.graph_to_json(folded),
            "connected": connected,
            "rank": graph_rank(folded) if connected else None,
        }
        lines = [f"{g.num_vertices} -> {folded.num_vertices} vertices, "
                 f"{folded.volume} edges"]
        return Outcome(payload, lines, [folded])
        # fold  # AppController.fold

    # ------------------------------------------------------------------
    # GENERICITY
    # ------------------------------------------------------------------

    def check(self) -> Outcome:
        # check: the (lambda, mu, L)-condition on the cyclic core of the word.
        c = self.config
        w = self._nontrivial_word()
        params = self._params(required=True)
        mode = CheckMode(c.mode) if c.mode else CheckMode.FULL
        report = check_condition(cyclic_word(w), params, mode=mode,
                                 cyclic_subwords=c.cyclic_subwords, max_states=c.max_states,
                                 verify=c.verify, threads=c.threads)
        payload = exporters.genericity_to_dict(report)
        lines = [
            f"word {report.word} ({report.mode.value})",
            f"max piece {report.max_piece_len}, C'(lambda): {report.c_prime_ok}",
            f"proper power: {report.proper_power}",
            f"subwords checked: {len(report.readability)}",
            f"all 2-letter subwords: {report.all_two_letter_subwords}",
            f"in P: {report.in_P}, in P': {report.in_P_prime}",
        ]
        if report.cross_check is not None:
            lines.append(f"pi = r and Crit = {{F_r}}: {report.cross_check}")
        return Outcome(payload, lines)
        # check  # AppController.check

    def survey(self, progress: bool = False) -> Outcome:
        c = self.config
        if not c.lengths:
            raise InputError("--lengths is required")
        if not c.exhaustive and c.samples is None:
            raise InputError("give --samples K or --exhaustive")
        samples = None if c.exhaustive else c.samples
        table = survey(c.lengths, samples, c.rank, c.seed, params=self._params(required=False),
                       cyclic=c.cyclic, threads=c.threads, max_states=c.max_states,
                       heuristic=c.heuristic, progress=progress)
        payload = exporters.survey_to_dict(table)
        lines = []
        for row in table.rows:
            parts = [f"{k}={v:.4f}" for k, v in sorted(row.fractions.items())]
            lines.append(f"n={row.n} [{row.samples}] " + " ".join(parts)
                         + (f" errors={row.errors}" if row.errors else ""))
        # end for  # rows loop
        if table.fit is not None:
            lines.append(f"fit: 1 - f_n ~ {table.fit.C:.4g} * {table.fit.sigma:.4g}^n "
                         f"(R^2 {table.fit.r_squared:.3f})")
        return Outcome(payload, lines)
        # survey  # AppController.survey

    # ------------------------------------------------------------------
    # WORDS
    # ------------------------------------------------------------------

    def sample(self) -> Outcome:
        # sample: seeded words of one length; word i uses derive_seed(seed, n, i).
        c = self.config
        if c.length is None or c.length < 1:
            raise InputError("sample length must be at least 1")
        count = c.samples or 1
        words = [sample_word(c.length, c.rank, cyclic=c.cyclic,
                             seed=derive_seed(c.seed, c.length, i)) for i in range(count)]
        payload = {"n": c.length, "words": [str(w) for w in words]}
        return Outcome(payload, [str(w) for w in words])
        # sample  # AppController.sample

    def enumerate(self) -> Outcome:
        c = self.config
        if c.length is None:
            raise InputError("a length is required")
        if c.classes:
            items = [{"word": str(cw), "class_size": size}
                     for cw, size in enumerate_cyclic_classes(c.length, c.rank)]
            lines = [f"{item['word']} x{item['class_size']}" for item in items]
            population = cyclic_sphere_size(c.length, c.rank)
            payload = {"n": c.length, "count": len(items), "population": population,
                       "classes": items}
            return Outcome(payload, lines)
        words = [str(w) for w in enumerate_words(c.length, c.rank, cyclic=c.cyclic)]
        payload = {"n": c.length, "count": len(words), "words": words}
        expected = cyclic_sphere_size(c.length, c.rank) if c.cyclic else sphere_size(c.length, c.rank)
        if len(words) != expected:
            raise RuntimeError(f"enumerated {len(words)} words, expected {expected}")
        return Outcome(payload, words)
        # enumerate  # AppController.enumerate

    # ------------------------------------------------------------------
    # WORD MEASURES
    # ------------------------------------------------------------------

    def wordmeasure(self) -> Outcome:
        # wordmeasure: E[#fix] at one degree, or the comparison table over --compare.
        c = self.config
        w = self._word()
        pi = parse_pi(c.pi)
        if (pi is None) != (c.crit_size is None):
            raise InputError("--pi and --crit-size must be given together")
        samples = c.samples or 10_000
        if c.compare:
            cmp = compare(w, c.compare, samples, c.seed, c.rank, pi=pi, crit_size=c.crit_size,
                          exact_when_feasible=c.exact, threads=c.threads,
                          max_states=c.max_states)
            payload = exporters.comparison_to_dict(cmp)
            lines = [f"pi = {exporters.rank_to_json(cmp.pi)}, |Crit| = {cmp.crit_size}"]
            for row in cmp.rows:
                stat = "-" if row.normalized_stat is None else f"{row.normalized_stat:.4f}"
                lines.append(f"N={row.N}: E={row.value:.6f} predicted={row.prediction:.6f} "
                             f"normalized={stat}")
            return Outcome(payload, lines)
        if c.N is None:
            raise InputError("give --N or --compare")
        if pi is None and w:
            report = primitivity_rank(w, c.rank, max_states=c.max_states, threads=c.threads)
            pi, crit_size = report.pi, len(report.crit)
        else:
            crit_size = c.crit_size
        if c.exact:
            est = exact_estimate(w, c.N, pi=pi, crit_size=crit_size)
        else:
            est = mc_expected_fix(w, c.N, samples, c.seed, threads=c.threads, pi=pi,
                                  crit_size=crit_size)
        payload = exporters.estimate_to_dict(est)
        payload["pi"] = None if pi is None else exporters.rank_to_json(pi)
        payload["crit_size"] = crit_size
        normalized = None
        if pi is not None and pi != math.inf:
            normalized = float(c.N) ** (pi - 1) * (est.mean_fix - 1.0)
        payload["normalized_stat"] = normalized
        lines = [f"E[#fix] at N={est.N}: {est.mean_fix:.6f} +- {est.stderr:.6f} ({est.mode})"]
        if est.prediction is not None:
            lines.append(f"predicted: {est.prediction:.6f}")
        return Outcome(payload, lines)
        # wordmeasure  # AppController.wordmeasure

# AppController
