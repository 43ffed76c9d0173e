# Copyright 2025 H2so4 Consulting LLC

import math
from typing import Any, Dict, List, Optional

from .agraphs import AGraph
from .models import (Comparison, GenericityReport, InputError, PiRankReport, Rank,
                     Subgroup, SubwordReadability, SurveyTable, WordMeasureEstimate)
from .pirank import long_arc_profile, maximal_critical_subgroups
from .text_utils import render_letters, render_rational
from .whitehead import WhiteheadMove


def rank_to_json(x: Rank):
    return "inf" if x == math.inf else int(x)


def to_dot(g: AGraph, name: str = "G") -> str:
    # to_dot: one node per vertex (base doubly circled), one labeled arrow per edge,
    # in stored edge order so repeated exports are byte-identical.
    lines = [f"digraph {name} {{", "  node [shape=circle];"]
    for v in range(g.num_vertices):
        shape = " [shape=doublecircle]" if v == g.base else ""
        lines.append(f"  {v}{shape};")
    for u, v, a in g.edges:
        lines.append(f'  {u} -> {v} [label="{render_letters((a,))}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_json(g: AGraph) -> Dict[str, Any]:
    return {
        "vertices": g.num_vertices,
        "base": g.base,
        "edges": [[u, v, render_letters((a,))] for u, v, a in g.edges],
    }


def graph_from_json(obj: Any, rank: int) -> AGraph:
    # graph_from_json: {vertices, base, edges: [[from, to, "a"], ...]}
    if not isinstance(obj, dict):
        raise InputError("graph JSON must be an object")
    try:
        n = int(obj["vertices"])
        base = int(obj.get("base", 0))
        raw = obj["edges"]
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"malformed graph JSON: {e}")
    edges = []
    for item in raw:
        if not isinstance(item, (list, tuple)) or len(item) != 3:
            raise InputError(f"edge entry must be [from, to, label], got {item!r}")
        u, v, label = item
        if not isinstance(label, str) or len(label) != 1 or not "a" <= label <= "z":
            raise InputError(f"edge label must be a lowercase generator, got {label!r}")
        edges.append((int(u), int(v), ord(label) - ord("a") + 1))
    return AGraph(n, edges, base, rank)


def subgroup_to_dict(h: Subgroup) -> Dict[str, Any]:
    return {
        "rank": h.rank,
        "index": rank_to_json(h.index),
        "basis": [str(b) for b in h.basis],
        "graph": graph_to_json(h.graph),
    }


def pirank_to_dict(report: PiRankReport, timings: bool = True) -> Dict[str, Any]:
    maximal = {h.key for h in maximal_critical_subgroups(report)}
    out = {
        "word": str(report.word),
        "cyclic_word": str(report.cyclic_word),
        "conjugator": str(report.conjugator),
        "pi": rank_to_json(report.pi),
        "crit": [dict(subgroup_to_dict(h), maximal=h.key in maximal) for h in report.crit],
        "crit_size": len(report.crit),
        "arc_profile": [
            {"longest_arc": p.longest_arc, "crossings": p.crossings, "arcs": p.arc_count}
            for p in long_arc_profile(report)
        ],
        "quotients_explored": report.quotients_explored,
        "primitivity_tests": report.primitivity_tests,
        "whitehead_certificate": report.certificate,
        "heuristic": report.heuristic,
    }
    if timings:
        out["elapsed_ms"] = round(report.elapsed * 1000.0, 3)
    return out


def moves_to_json(chain: List[WhiteheadMove]) -> List[str]:
    return [str(m) for m in chain]


def _readability_to_dict(item: SubwordReadability) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "subword": str(item.subword),
        "mu_readable": item.mu_readable.value,
        "mu_L_readable": item.mu_L_readable.value,
    }
    if item.mu_witness is not None:
        out["mu_witness"] = graph_to_json(item.mu_witness)
    if item.mu_L_witness is not None:
        out["mu_L_witness"] = graph_to_json(item.mu_L_witness)
    return out


def genericity_to_dict(report: GenericityReport) -> Dict[str, Any]:
    p = report.params
    return {
        "word": str(report.word),
        "params": {"lambda": render_rational(p.lam), "mu": render_rational(p.mu), "L": p.L,
                   "r": p.r},
        "mode": report.mode.value,
        "max_piece_len": report.max_piece_len,
        "c_prime_ok": report.c_prime_ok,
        "proper_power": report.proper_power,
        "readability": [_readability_to_dict(item) for item in report.readability],
        "all_two_letter_subwords": report.all_two_letter_subwords,
        "in_P": report.in_P,
        "in_P_prime": report.in_P_prime,
        "inconclusive": report.inconclusive,
        "cross_check": report.cross_check,
    }


def survey_to_dict(table: SurveyTable) -> Dict[str, Any]:
    fit: Optional[Dict[str, Any]] = None
    if table.fit is not None:
        fit = {"C": table.fit.C, "sigma": table.fit.sigma, "r_squared": table.fit.r_squared,
               "points": table.fit.points}
    return {
        "rank": table.rank,
        "cyclic": table.cyclic,
        "rows": [
            {"n": row.n, "population": row.population, "samples": row.samples,
             "counts": row.counts, "total": row.total, "errors": row.errors,
             "fractions": row.fractions, "radii": row.radii}
            for row in table.rows
        ],
        "fit": fit,
    }


def estimate_to_dict(est: WordMeasureEstimate) -> Dict[str, Any]:
    return {
        "word": str(est.word),
        "N": est.N,
        "samples": est.samples,
        "mean_fix": est.mean_fix,
        "stderr": est.stderr,
        "exact": None if est.exact is None else render_rational(est.exact),
        "prediction": est.prediction,
        "mode": est.mode,
    }


def comparison_to_dict(cmp: Comparison) -> Dict[str, Any]:
    return {
        "word": str(cmp.word),
        "pi": rank_to_json(cmp.pi),
        "crit_size": cmp.crit_size,
        "rows": [
            {"N": row.N, "estimate": estimate_to_dict(row.estimate), "value": row.value,
             "prediction": row.prediction, "residual": row.residual,
             "normalized_stat": row.normalized_stat}
            for row in cmp.rows
        ],
    }
