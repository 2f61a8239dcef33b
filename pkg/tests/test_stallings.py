import itertools
import random

import pytest

from conftest import G, W
from oracles import (
    conjugate_into_cyclic,
    products,
    random_cover,
    random_reduced,
    schreier_generators,
)
from malnorm.stallings import (
    INFINITE,
    SubgroupGraph,
    basis,
    basis_decomposition,
    build_subgroup_graph,
    common_conjugate,
    conjugacy_disjoint,
    conjugate_into,
    conjugator_into,
    contains,
    graph_from_text,
    index,
    is_malnormal,
    parse_subgroup_text,
    power_conjugate_into,
    pullback,
    reads_path,
    read_subgroup_file,
    violating_double_cosets,
)
from malnorm.words import Word, WordError, free_reduce, invert, multiply, power, reduced_words


def edge_set(graph):
    return sorted(graph.edges())


class TestBuild:
    def test_cyclic(self):
        g = G("a")
        assert (g.num_vertices, edge_set(g)) == (1, [(0, 1, 0)])

    def test_a_bsquared(self):
        g = G("a", "bb")
        assert g.num_vertices == 2
        assert edge_set(g) == [(0, 1, 0), (0, 2, 1), (1, 2, 0)]

    def test_ab_ba(self):
        g = G("ab", "ba")
        assert g.num_edges - g.num_vertices + 1 == 2

    def test_trivial(self):
        g = G()
        assert g.is_trivial() and g.num_vertices == 1
        assert G("aA") == g

    def test_rank_mismatch(self):
        with pytest.raises(WordError):
            build_subgroup_graph([W("a", 2), W("a", 3)])

    def test_folding_identifies_redundant_generators(self):
        assert G("a", "b", "ab") == G("a", "b")
        assert G("aa", "aaa") == G("a")

    def test_confluence_under_permutation(self):
        rng = random.Random(3)
        for _ in range(60):
            gens = [free_reduce(random_reduced(rng, 2, rng.randint(1, 5)), 2) for _ in range(3)]
            graphs = {build_subgroup_graph(list(p), 2) for p in itertools.permutations(gens)}
            assert len(graphs) == 1

    def test_folded_and_core(self):
        rng = random.Random(4)
        for _ in range(100):
            g = build_subgroup_graph(
                [free_reduce(random_reduced(rng, 3, rng.randint(1, 6)), 3) for _ in range(3)], 3
            )
            for v in g.vertices:
                labels = g.labels_at(v)
                for x, w in labels.items():
                    assert g.step(w, -x) == v
                if v != g.basepoint:
                    assert g.degree(v) >= 2

    def test_from_edges_cover(self):
        # the 2-sheeted cover where a lifts to loops and b swaps the sheets
        g = SubgroupGraph.from_edges(2, [(0, 1, 0), (1, 1, 1), (0, 2, 1), (1, 2, 0)])
        assert g == G("a", "bb", "baB")

    def test_text_round_trip(self):
        g = G("a", "bb", "baB")
        text = g.to_text()
        assert text.splitlines()[0] == "basepoint 0"
        assert "0 --a--> 0" in text.splitlines()
        assert graph_from_text(text, 2) == g


class TestContains:
    def test_examples(self):
        h = G("a", "bb")
        assert not contains(h, W("b"))
        assert contains(h, W("bba"))
        assert not contains(h, W("bab"))
        assert contains(G("abA"), W(""))

    def test_matches_naive_products(self):
        rng = random.Random(11)
        for _ in range(50):
            gens = [random_reduced(rng, 2, rng.randint(1, 4)) for _ in range(rng.randint(1, 3))]
            h = build_subgroup_graph([Word(g, 2) for g in gens], 2)
            for w in products(gens, 4):
                assert contains(h, Word(w, 2))


class TestIndex:
    def test_examples(self):
        assert index(G("a", "b")) == 1
        assert index(G("a", "bb", "baB")) == 2
        assert index(G("a")) == INFINITE
        assert index(G()) == INFINITE

    def test_nielsen_schreier_for_covers(self):
        rng = random.Random(5)
        for _ in range(50):
            rank = rng.randint(2, 3)
            edges, comp = random_cover(rng, rank, rng.randint(1, 6))
            gens = schreier_generators(rank, edges)
            g = build_subgroup_graph([Word(x, rank) for x in gens], rank)
            assert index(g) == len(comp)
            assert len(basis(g)) - 1 == len(comp) * (rank - 1)


class TestBasis:
    def test_examples(self):
        assert basis(G("a")) == [W("a")]
        assert basis(G("a", "b")) == [W("a"), W("b")]
        assert basis(G("b", "a")) == [W("a"), W("b")]

    def test_round_trip(self):
        g = G("a", "bb", "baB")
        bs = basis(g)
        assert len(bs) == 3
        assert all(contains(g, w) for w in bs)
        assert build_subgroup_graph(bs, 2) == g

    def test_rank_formula_random(self):
        rng = random.Random(6)
        for _ in range(100):
            g = build_subgroup_graph(
                [free_reduce(random_reduced(rng, 2, rng.randint(0, 6)), 2) for _ in range(3)], 2
            )
            bs = basis(g)
            assert len(bs) == g.num_edges - g.num_vertices + 1
            assert build_subgroup_graph(bs, 2) == g

    def test_decomposition(self):
        g = G("a", "bb", "baB")
        bs = basis(g)
        for w in reduced_words(2, 6):
            dec = basis_decomposition(g, w)
            assert (dec is not None) == contains(g, w)
            if dec is not None:
                prod = Word.identity(2)
                for i, e in dec:
                    prod = multiply(prod, power(bs[i], e))
                assert prod == w


class TestReadsPath:
    def test_examples(self):
        assert not reads_path(G("a"), W("b"))
        assert reads_path(G("a"), W("aaa"))
        # core of gp(baB) is a b-edge into a vertex carrying an a-loop:
        # elements are b a^k B, so "aB" occurs but "ab" never does
        g = G("baB")
        assert not reads_path(g, W("ab"))
        assert reads_path(g, W("aB"))
        assert reads_path(g, W("baaB"))

    def test_unreadable_never_a_subword(self):
        rng = random.Random(8)
        for _ in range(40):
            gens = [random_reduced(rng, 2, rng.randint(1, 4)) for _ in range(2)]
            g = build_subgroup_graph([Word(x, 2) for x in gens], 2)
            elements = [Word(w, 2) for w in products(gens, 4)]
            for w in reduced_words(2, 3, 1):
                if not reads_path(g, w):
                    assert not any(_has_subword(e.letters, w.letters) for e in elements)


def _has_subword(big, small):
    n = len(small)
    return any(big[i : i + n] == small for i in range(len(big) - n + 1))


class TestConjugacy:
    def test_conjugate_into_examples(self):
        assert conjugate_into(G("abA"), W("b"))
        assert not conjugate_into(G("a"), W("b"))
        assert conjugate_into(G("aabb"), W("bbaa"))

    def test_conjugator_is_explicit(self):
        h = G("aabb")
        c = conjugator_into(h, W("bbaa"))
        assert contains(h, multiply(multiply(c, W("bbaa")), invert(c)))

    def test_trivial_word(self):
        with pytest.raises(WordError):
            conjugate_into(G("a"), W(""))
        with pytest.raises(WordError):
            power_conjugate_into(G("a"), W(""))

    def test_power_examples(self):
        assert power_conjugate_into(G("aa"), W("a")) == 2
        assert power_conjugate_into(G("a"), W("b")) is None
        assert power_conjugate_into(G("bbbbbb"), W("bbbb")) == 3

    def test_power_against_cyclic_oracle(self):
        for u in ["a", "aa", "ab", "abab", "aab", "bbbbbb", "abAB"]:
            h = G(u)
            for w in reduced_words(2, 4, 1):
                expected = next(
                    (p for p in range(1, 13) if conjugate_into_cyclic(W(u).letters, w.letters * p)), None
                )
                assert power_conjugate_into(h, w) == expected, (u, w)

    def test_cyclic_subgroups_exact(self):
        rng = random.Random(12)
        for _ in range(300):
            u = random_reduced(rng, 2, rng.randint(1, 4))
            w = random_reduced(rng, 2, rng.randint(1, 8))
            h = build_subgroup_graph([Word(u, 2)], 2)
            assert conjugate_into(h, Word(w, 2)) == conjugate_into_cyclic(u, w)

    def test_disjoint_examples(self):
        assert conjugacy_disjoint(G("a"), G("b"))
        assert not conjugacy_disjoint(G("abA"), G("bbb"))
        assert conjugacy_disjoint(G("yttty", "tyyyt", rank=25), G("y", rank=25))

    def test_disjoint_cross_check(self):
        # enumerate cyclic words of length <= 10 conjugate into both
        m, y = G("yttty", "tyyyt", rank=25), G("y", rank=25)
        letters = [25, -25, 20, -20]
        for n in range(1, 11):
            for t in itertools.product(letters, repeat=n):
                if n > 1 and any(t[i] == -t[(i + 1) % n] for i in range(n)):
                    continue  # not cyclically reduced
                w = Word(t, 25)
                assert not (conjugate_into(m, w) and conjugate_into(y, w))

    def test_common_conjugate_witness(self):
        rng = random.Random(13)
        for _ in range(200):
            g1 = build_subgroup_graph([Word(random_reduced(rng, 2, rng.randint(1, 4)), 2) for _ in range(2)], 2)
            g2 = build_subgroup_graph([Word(random_reduced(rng, 2, rng.randint(1, 4)), 2)], 2)
            w = common_conjugate(g1, g2)
            assert (w is None) == conjugacy_disjoint(g1, g2)
            if w is not None:
                assert w and conjugate_into(g1, w) and conjugate_into(g2, w)


class TestPullback:
    def test_disjoint_letters(self):
        assert pullback(G("a"), G("b")) == []

    def test_a2_a3(self):
        comps = pullback(G("aa"), G("aaa"))
        assert [c.intersection for c in comps] == [G("aaaaaa")]
        assert not comps[0].representative

    def test_self_pullback_a2(self):
        comps = pullback(G("aa"), G("aa"))
        assert len(comps) == 2
        diag, other = comps
        assert diag.is_diagonal and diag.intersection == G("aa")
        assert not other.is_diagonal
        assert other.representative == W("a")
        assert other.intersection == G("aa")

    def test_intersection_invariant(self):
        rng = random.Random(14)
        for _ in range(100):
            g1 = build_subgroup_graph([Word(random_reduced(rng, 2, rng.randint(1, 4)), 2) for _ in range(2)], 2)
            g2 = build_subgroup_graph([Word(random_reduced(rng, 2, rng.randint(1, 4)), 2) for _ in range(2)], 2)
            for c in pullback(g1, g2):
                z = c.representative
                for g in basis(c.intersection):
                    assert contains(g1, g)
                    assert contains(g2, multiply(multiply(invert(z), g), z))

    def test_diagonal_law(self):
        rng = random.Random(15)
        for _ in range(50):
            g = build_subgroup_graph([Word(random_reduced(rng, 2, rng.randint(1, 5)), 2) for _ in range(2)], 2)
            diag = [c for c in pullback(g, g) if c.is_diagonal]
            assert len(diag) == 1
            assert diag[0].intersection == g
            assert not diag[0].representative


class TestMalnormal:
    def test_positive_pair(self):
        g = G("yttty", "tyyyt", rank=25)
        report = is_malnormal(g)
        assert report.verdict and report.violations == ()

    def test_a_squared(self):
        report = is_malnormal(G("aa"))
        assert not report.verdict
        assert report.violations[0] == (W("a"), W("aa"), W("aa"))

    def test_square_exponent_instance(self):
        assert is_malnormal(G("aabbbaa", "baaaaaab")).verdict

    def test_whole_group_and_basis_letter(self):
        assert is_malnormal(G("a", "b")).verdict
        assert is_malnormal(G("a")).verdict
        assert violating_double_cosets(G("a")) == []

    def test_trivial_rejected(self):
        with pytest.raises(WordError):
            is_malnormal(G())
        with pytest.raises(WordError):
            violating_double_cosets(G())

    def test_double_cosets_a2_b2(self):
        entries = violating_double_cosets(G("aa", "bb"))
        found = {(str(z), tuple(str(b) for b in bs)) for z, bs in entries}
        assert ("a", ("aa",)) in found and ("b", ("bb",)) in found
        h = G("aa", "bb")
        for z, bs in entries:
            assert not contains(h, z)
            for g in bs:
                assert contains(h, multiply(multiply(invert(z), g), z))

    def test_double_cosets_positive_pair(self):
        assert violating_double_cosets(G("yttty", "tyyyt", rank=25)) == []

    @pytest.mark.parametrize("n, m", [(2, 2), (2, 3), (3, 2), (3, 3)])
    def test_intersections_conjugate_into_factor(self, n, m):
        L = G("a" * n, "b" * m)
        an, bm = G("a" * n), G("b" * m)
        entries = violating_double_cosets(L)
        assert entries
        for z, bs in entries:
            for g in bs:
                assert conjugate_into(an, g) or conjugate_into(bm, g)

    def test_brute_force_small(self):
        rng = random.Random(16)
        zs = [w for w in reduced_words(2, 4)]
        for _ in range(40):
            gens = [random_reduced(rng, 2, rng.randint(1, 3)) for _ in range(rng.randint(1, 2))]
            h = build_subgroup_graph([Word(g, 2) for g in gens], 2)
            if h.is_trivial():
                continue
            report = is_malnormal(h)
            for z, a, b in report.violations:
                assert not contains(h, z) and contains(h, a) and contains(h, b) and a
                assert multiply(multiply(z, a), invert(z)) == b
            elems = [Word(e, 2) for e in products(gens, 3) if e and len(e) <= 6]
            brute = any(
                contains(h, multiply(multiply(z, e), invert(z)))
                for z in zs
                if not contains(h, z)
                for e in elems
            )
            if report.verdict:
                assert not brute
            else:
                assert report.violations


class TestFiles:
    def test_parse(self):
        text = "# comment\nrank=3\n\na  # trailing\nb B b\n"
        words, rank = parse_subgroup_text(text)
        assert rank == 3 and words == [W("a", 3), W("b", 3)]

    def test_inferred_rank(self):
        words, rank = parse_subgroup_text("yttty\ntyyyt\n")
        assert rank == 25 and len(words) == 2

    def test_error_line_number(self):
        with pytest.raises(WordError, match="line 2"):
            parse_subgroup_text("a\na1!\n")

    def test_read_file(self, tmp_path):
        p = tmp_path / "h.txt"
        p.write_text("a\nbb\nbaB\n", encoding="utf-8")
        words, rank = read_subgroup_file(p)
        assert index(build_subgroup_graph(words, rank)) == 2
