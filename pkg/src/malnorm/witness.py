"""Rank-two malnormal subgroups avoiding given subgroups up to conjugacy.

Given finitely generated infinite-index subgroups ``H_1..H_k`` of F, pick
``y`` with no power conjugate into any ``H_i``, pick ``t`` with no power
conjugate to a power of ``y``, and certify

    D_n = gp(y^n t^3n y^n, t^n y^3n t^n)

malnormal in F and conjugacy-disjoint from every ``H_i``.  The explicit
thresholds that guarantee this for large ``n`` are implemented too; they
are far too large to certify directly, so the default mode searches small
``n`` and certifies each candidate with the Stallings machinery.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Sequence

from . import __version__
from .stallings import (
    INFINITE,
    MalnormalityReport,
    SubgroupGraph,
    basis,
    build_subgroup_graph,
    conjugacy_disjoint,
    index,
    is_malnormal,
    power_conjugate_into,
    reads_path,
)
from .words import (
    Word,
    WordError,
    ball_size,
    cyclic_reduce,
    cyclically_reduced_words,
    have_conjugate_powers,
    is_cyclically_reduced,
    lemma62_bound,
    multiply,
    parse_word,
    power,
    power_subword_bound,
    primitive_root,
)

log = logging.getLogger(__name__)

DEFAULT_CAP = 64
# longest generator we are willing to fold when certifying in paper-bound mode
PAPER_BOUND_LETTER_BUDGET = 20_000


class HypothesisViolation(WordError):
    """An input subgroup does not satisfy the hypotheses (e.g. finite index)."""


class SearchExhausted(RuntimeError):
    pass


def _ambient_rank(subgroups: Sequence[SubgroupGraph], rank: int | None) -> int:
    ranks = {g.rank for g in subgroups}
    if rank is not None:
        ranks.add(rank)
    if len(ranks) > 1:
        raise WordError(f"subgroups have different ranks {sorted(ranks)}")
    if not ranks:
        raise WordError("rank is required when no subgroups are given")
    (r,) = ranks
    if r < 2:
        raise HypothesisViolation("the free group must be non-abelian (rank >= 2)")
    return r


def _check_infinite_index(subgroups: Sequence[SubgroupGraph]) -> None:
    for i, g in enumerate(subgroups):
        idx = index(g)
        if idx != INFINITE:
            raise HypothesisViolation(f"subgroup {i} has finite index {idx}")


def find_y(
    subgroups: Sequence[SubgroupGraph], rank: int | None = None, max_length: int = 24
) -> Word:
    """Shortlex-least cyclically reduced word readable in none of the cores.

    Such a word is not a subword of any reduced element of any ``H_i``, so
    no nontrivial power of it is conjugate into them; this is re-checked
    directly before returning.
    """
    rank = _ambient_rank(subgroups, rank)
    _check_infinite_index(subgroups)
    for y in cyclically_reduced_words(rank, max_length):
        if any(reads_path(g, y) for g in subgroups):
            continue
        if any(power_conjugate_into(g, y) is not None for g in subgroups):
            raise AssertionError(f"{y} unreadable yet a power is conjugate in")
        return y
    raise SearchExhausted(f"no suitable y of length <= {max_length}")


def choose_t(y: Word, max_length: int = 24) -> Word:
    """Shortlex-least cyclically reduced ``t`` sharing no power with ``y`` up to conjugacy."""
    if not y or not is_cyclically_reduced(y):
        raise WordError("y must be nontrivial and cyclically reduced")
    gy = build_subgroup_graph([y])
    for t in cyclically_reduced_words(y.rank, max_length):
        if conjugacy_disjoint(gy, build_subgroup_graph([t])):
            return t
    raise SearchExhausted(f"no suitable t of length <= {max_length}")


def build_Dn(y: Word, t: Word, n: int) -> tuple[Word, Word]:
    if n < 1:
        raise ValueError("n must be positive")
    yn, tn = power(y, n), power(t, n)
    first = multiply(multiply(yn, power(t, 3 * n)), yn)
    second = multiply(multiply(tn, power(y, 3 * n)), tn)
    return first, second


@dataclass(frozen=True)
class Lemma63Constants:
    K1: int
    K2: int
    K: int
    m1: int
    N: int
    m: int


def lemma63_constants(y: Word, t: Word, subgroups: Sequence[SubgroupGraph]) -> Lemma63Constants:
    _check_yt(y, t)
    k1 = max(lemma62_bound(y, t), lemma62_bound(t, y), len(y) + len(t) + 1)
    k2 = max((len(w) for g in subgroups for w in basis(g)), default=0)
    k = max(k1, k2)
    m1 = k // min(len(y), len(t)) + 1
    n = ball_size(y.rank, k)
    return Lemma63Constants(k1, k2, k, m1, n, 3 * m1 + n + 1)


def lemma63_threshold(y: Word, t: Word, subgroups: Sequence[SubgroupGraph]) -> int:
    """``m = 3 m1 + N + 1``: beyond it no element of ``D_n`` is conjugate into any ``H_i``."""
    return lemma63_constants(y, t, subgroups).m


def _check_yt(y: Word, t: Word) -> None:
    for w in (y, t):
        if not w or not is_cyclically_reduced(w):
            raise HypothesisViolation(f"{w} must be nontrivial and cyclically reduced")
    if have_conjugate_powers(y, t):
        raise HypothesisViolation(f"powers of {y} and {t} are conjugate")


def prop613_threshold(a: Word) -> int:
    if not a or not is_cyclically_reduced(a):
        raise HypothesisViolation(f"{a} must be nontrivial and cyclically reduced")
    _, e = primitive_root(a)
    if e != 1:
        raise HypothesisViolation(f"{a} is not root-free")
    return 100 * (ball_size(a.rank, len(a)) + 1)


def prop614_K0(a: Word, b: Word) -> int:
    _check_yt(a, b)
    cancel = max(lemma62_bound(a, b), lemma62_bound(b, a))
    ratio = max(-(-len(b) // len(a)), -(-len(a) // len(b)))
    return max(cancel, ratio, power_subword_bound(a, b))


def prop614_threshold(a: Word, b: Word) -> int:
    """``N = 1000 K0 max(K_a, K_b) l(a) l(b)``."""
    k0 = prop614_K0(a, b)
    ka, kb = prop613_threshold(a), prop613_threshold(b)
    return 1000 * k0 * max(ka, kb) * len(a) * len(b)


def prop615_threshold(y: Word, t: Word) -> int:
    """Malnormality threshold for ``D_n``, computed on the primitive roots.

    With ``y = r^k`` the generators of ``D_n`` have the required shape in
    ``r`` with exponents ``kn >= n``, so the root's threshold suffices.
    """
    ry = cyclic_reduce(primitive_root(y)[0])[0].core
    rt = cyclic_reduce(primitive_root(t)[0])[0].core
    return prop614_threshold(ry, rt)


@dataclass(frozen=True)
class WitnessCertificate:
    y: Word
    t: Word
    n: int
    generators: tuple[Word, Word] | None
    malnormality: MalnormalityReport | None
    disjointness: tuple[bool, ...] | None
    paper_bounds: dict = field(default_factory=dict)
    mode: str = "certified-search"
    bound_trusted: bool = False

    @property
    def generator_formula(self) -> str:
        return f"({self.y})^{self.n} ({self.t})^{3 * self.n} ({self.y})^{self.n}, " \
            f"({self.t})^{self.n} ({self.y})^{3 * self.n} ({self.t})^{self.n}"

    def to_dict(self) -> dict:
        return {
            "format": 1,
            "tool_version": __version__,
            "mode": self.mode,
            "rank": self.y.rank,
            "y": str(self.y),
            "t": str(self.t),
            "n": self.n,
            "generators": None if self.generators is None else [str(g) for g in self.generators],
            "generator_formula": self.generator_formula,
            "bound_trusted": self.bound_trusted,
            "malnormal": None if self.malnormality is None else self.malnormality.verdict,
            "violations": None
            if self.malnormality is None
            else [[str(w) for w in v] for v in self.malnormality.violations],
            "disjointness": None if self.disjointness is None else list(self.disjointness),
            "paper_bounds": dict(self.paper_bounds),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> WitnessCertificate:
        rank = data["rank"]
        w = lambda s: parse_word(s, rank)  # noqa: E731
        mal = None
        if data["malnormal"] is not None:
            mal = MalnormalityReport(
                data["malnormal"], tuple(tuple(w(s) for s in v) for v in data["violations"])
            )
        gens = data["generators"]
        return cls(
            y=w(data["y"]),
            t=w(data["t"]),
            n=data["n"],
            generators=None if gens is None else (w(gens[0]), w(gens[1])),
            malnormality=mal,
            disjointness=None if data["disjointness"] is None else tuple(data["disjointness"]),
            paper_bounds=dict(data["paper_bounds"]),
            mode=data["mode"],
            bound_trusted=data["bound_trusted"],
        )


def paper_bounds(y: Word, t: Word, subgroups: Sequence[SubgroupGraph]) -> dict:
    c = lemma63_constants(y, t, subgroups)
    out = {"lemma63_m1": c.m1, "lemma63_N": c.N, "lemma63_m": c.m}
    try:
        out["prop615_N"] = prop615_threshold(y, t)
    except HypothesisViolation as exc:
        out["prop615_N"] = None
        log.warning("malnormality threshold unavailable: %s", exc)
    return out


def paper_bound_n(bounds: dict) -> int:
    return max(bounds["lemma63_m"], bounds["prop615_N"] or 0)


def certify(y: Word, t: Word, n: int, subgroups: Sequence[SubgroupGraph]):
    """Fold ``D_n`` and run both checks; returns ``(gens, graph, report, disjointness)``."""
    gens = build_Dn(y, t, n)
    graph = build_subgroup_graph(list(gens), y.rank)
    report = is_malnormal(graph)
    disjoint = tuple(conjugacy_disjoint(graph, h) for h in subgroups)
    return gens, graph, report, disjoint


def construct_witness(
    subgroups: Sequence[SubgroupGraph],
    mode: str = "certified-search",
    rank: int | None = None,
    cap: int = DEFAULT_CAP,
) -> WitnessCertificate:
    rank = _ambient_rank(subgroups, rank)
    _check_infinite_index(subgroups)
    if cap < 1:
        raise ValueError("cap must be positive")
    y = find_y(subgroups, rank)
    t = choose_t(y)
    bounds = paper_bounds(y, t, subgroups)
    log.info("y=%s t=%s bounds=%s", y, t, bounds)

    if mode == "certified-search":
        for n in range(1, cap + 1):
            gens, graph, report, disjoint = certify(y, t, n, subgroups)
            log.debug("n=%d malnormal=%s disjoint=%s", n, report.verdict, disjoint)
            if report.verdict and all(disjoint) and graph.subgroup_rank == 2:
                return WitnessCertificate(y, t, n, gens, report, disjoint, bounds, mode)
        raise SearchExhausted(f"no certified D_n with n <= {cap}")

    if mode == "paper-bound":
        if bounds["prop615_N"] is None:
            raise HypothesisViolation("threshold mode needs root-free y and t")
        n = paper_bound_n(bounds)
        if n * (2 * len(y) + 3 * len(t)) > PAPER_BOUND_LETTER_BUDGET:
            return WitnessCertificate(y, t, n, None, None, None, bounds, mode, bound_trusted=True)
        gens, graph, report, disjoint = certify(y, t, n, subgroups)
        if not (report.verdict and all(disjoint)):
            raise AssertionError("threshold n failed to certify")
        return WitnessCertificate(y, t, n, gens, report, disjoint, bounds, mode)

    raise ValueError(f"unknown mode {mode!r}")


def verify_certificate(cert: WitnessCertificate, subgroups: Sequence[SubgroupGraph]) -> bool:
    """Recheck every claim of a certificate from ``(y, t, n)`` alone."""
    if cert.bound_trusted:
        return False
    gens, graph, report, disjoint = certify(cert.y, cert.t, cert.n, subgroups)
    return (
        cert.generators == gens
        and graph.subgroup_rank == 2
        and report.verdict
        and not report.violations
        and all(disjoint)
        and cert.disjointness == disjoint
    )
