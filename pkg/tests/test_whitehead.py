# Copyright 2025 H2so4 Consulting LLC

import networkx as nx
import pytest

from core.agraphs import cycle_graph, rose, stallings_from_generators
from core.models import InputError, MembershipError, Word
from core.whitehead import (WhiteheadMove, apply_move, enumerate_moves, is_primitive,
                            is_primitive_loop, is_whitehead_nonprimitive_certificate, minimize,
                            whitehead_graph)
from core.words import (apply_letter_map, cyclic_length, cyclic_word, enumerate_words, free_reduce,
                        multiply, random_letter_map, sample_word)
from oracles import orbit_primitive

ALL_PAIRS_WORD = "aabbAABBaBAb"  # every reduced 2-letter subword, read cyclically


def test_move_enumeration_and_text():
    moves = enumerate_moves(2)
    assert len(moves) == 12
    assert moves == sorted(moves, key=WhiteheadMove.sort_key)
    assert str(WhiteheadMove(1, frozenset({1, 2, -2}))) == "(a; {a, b, B})"
    assert len(enumerate_moves(3)) == 6 * 15


def test_malformed_moves_are_rejected(word):
    for move in (WhiteheadMove(1, frozenset({1, -1})), WhiteheadMove(1, frozenset({2})),
                 WhiteheadMove(3, frozenset({3}))):
        with pytest.raises(InputError):
            apply_move(move, word("ab"), 2)


def test_single_letter_move_is_identity(random_words):
    move = WhiteheadMove(1, frozenset({1}))
    for w in random_words(20, [3, 7]):
        assert apply_move(move, w, 2) == w


def test_full_set_move_conjugates(random_words, word):
    move = WhiteheadMove(1, frozenset({1, 2, -2}))
    for w in random_words(30, [1, 4, 8], seed=3):
        assert apply_move(move, w, 2) == multiply(word("A"), w, word("a"))


def test_move_then_inverse_restores_the_word():
    moves = enumerate_moves(3)
    for s in range(600):
        w = sample_word(1 + s % 12, 3, seed=s)
        m = moves[s % len(moves)]
        assert apply_move(m.inverse(), apply_move(m, w, 3), 3) == w


@pytest.mark.slow
def test_move_then_inverse_many_trials():
    moves = enumerate_moves(2)
    for s in range(10_000):
        w = sample_word(1 + s % 15, 2, seed=s)
        m = moves[s % len(moves)]
        assert apply_move(m.inverse(), apply_move(m, w, 2), 2) == w


def test_whitehead_graph_examples(cword):
    assert whitehead_graph(cword("aa"), 2).edges == ((1, -1), (1, -1))
    g = whitehead_graph(cword("abAB"), 2)
    assert len(g.edges) == 4
    simple = nx.Graph(g.to_networkx())
    assert nx.is_connected(simple)
    assert all(d == 2 for _, d in simple.degree())


def test_whitehead_graph_of_all_pairs_word_is_complete(cword):
    g = nx.Graph(whitehead_graph(cword(ALL_PAIRS_WORD), 2).to_networkx())
    assert g.number_of_edges() == 6
    assert g.number_of_nodes() == 4


def test_whitehead_graph_edge_count(random_words):
    for c in random_words(20, [2, 9], cyclic=True, seed=5):
        g = whitehead_graph(c, 2)
        assert len(g.edges) == len(c)
        assert all(x != y for x, y in g.edges)


def test_certificate_examples(cword):
    assert is_whitehead_nonprimitive_certificate(cword(ALL_PAIRS_WORD), 2)
    assert not is_whitehead_nonprimitive_certificate(cword("a"), 2)
    assert is_whitehead_nonprimitive_certificate(cword("abAB"), 2)
    assert not is_primitive(cword("abAB").rep, 2)


@pytest.mark.parametrize("n", range(1, 7))
def test_certificate_is_sound(n):
    for w in enumerate_words(n, 2, cyclic=True):
        if is_whitehead_nonprimitive_certificate(cyclic_word(w), 2):
            assert not is_primitive(w, 2)


@pytest.mark.slow
@pytest.mark.parametrize("n", [7, 8])
def test_certificate_is_sound_longer_words(n):
    for w in enumerate_words(n, 2, cyclic=True):
        if is_whitehead_nonprimitive_certificate(cyclic_word(w), 2):
            assert not is_primitive(w, 2)


def test_minimize_examples(word):
    core, chain = minimize(word("a"), 2)
    assert (str(core), chain) == ("a", [])

    core, chain = minimize(word("baB"), 2)
    assert str(core) == "a"
    assert len(chain) == 1

    core, chain = minimize(word("aabb"), 2)
    assert len(core) == 4
    assert chain == []

    with pytest.raises(InputError):
        minimize(Word(()), 2)


def test_minimize_never_lengthens(random_words):
    for w in random_words(40, [4, 8, 12], seed=6):
        core, chain = minimize(w, 2)
        assert len(core) <= cyclic_length(w.letters)
        current = w
        for m in chain:
            nxt = apply_move(m, current, 2)
            assert cyclic_length(nxt.letters) <= cyclic_length(current.letters)
            current = nxt
        assert cyclic_word(current) == core


def test_primitivity_examples(word):
    assert is_primitive(word("a"), 2)
    assert is_primitive(word("ab"), 2)
    assert is_primitive(word("aab"), 2)
    assert not is_primitive(word("abAB"), 2)
    assert not is_primitive(word("aa"), 2)
    assert is_primitive(word("abc", 3), 3)
    with pytest.raises(InputError):
        is_primitive(Word(()), 2)


@pytest.mark.parametrize("n", range(1, 7))
def test_primitivity_matches_orbit_search(n):
    for w in enumerate_words(n, 2, cyclic=True):
        assert is_primitive(w, 2) == orbit_primitive(w, 2), str(w)


@pytest.mark.slow
@pytest.mark.parametrize("n", [7, 8])
def test_primitivity_matches_orbit_search_longer_words(n):
    for w in enumerate_words(n, 2, cyclic=True):
        assert is_primitive(w, 2) == orbit_primitive(w, 2), str(w)


def test_primitivity_is_invariant(random_words):
    for i, w in enumerate(random_words(300, [2, 3, 5, 6, 9], seed=7)):
        expected = is_primitive(w, 2)
        assert is_primitive(w.inverse(), 2) == expected
        k = i % len(w)
        rotated = free_reduce(w.letters[k:] + w.letters[:k])
        if rotated:
            assert is_primitive(rotated, 2) == expected
        assert is_primitive(apply_letter_map(w, random_letter_map(2, seed=i)), 2) == expected


def test_primitive_loops(word, cword):
    r = rose(2)
    for s in range(40):
        w = sample_word(5, 2, seed=s)
        assert is_primitive_loop(r, w) == is_primitive(w, 2)

    for text in ("aabAB", "abab", "aaa"):
        c = cword(text)
        assert is_primitive_loop(cycle_graph(c, 2), c.rep)

    h = stallings_from_generators([word("a"), word("baB")], 2)
    assert is_primitive_loop(h.graph, word("abaB"))
    assert not is_primitive_loop(h.graph, word("aa"))
    with pytest.raises(MembershipError):
        is_primitive_loop(h.graph, word("b"))


def test_primitive_loops_do_not_depend_on_the_spanning_tree(random_words):
    words = random_words(60, [3, 5], seed=8)
    for i in range(0, 60, 2):
        u, v = words[i], words[i + 1]
        h = stallings_from_generators([u, v], 2)
        for w in (multiply(u, v), multiply(u, u), multiply(u, v, u.inverse(), v.inverse())):
            if not w:
                continue
            assert (is_primitive_loop(h.graph, w)
                    == is_primitive_loop(h.graph, w, letter_order=(-2, 2, -1, 1)))
