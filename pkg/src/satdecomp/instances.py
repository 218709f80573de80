"""Generators for small synthetic CNF instances used as fixtures and demos.

These build tiny structured families (pigeonhole, at-most/at-least
contradictions, odd xor rings) that are unsatisfiable by construction and
hard enough for a CDCL solver to exercise search, learning and restarts.
"""
from __future__ import annotations

import random

from .formula import Clause, CnfFormula


def pigeonhole(pigeons: int, holes: int) -> CnfFormula:
    """Pigeonhole principle: var (i-1)*holes + j means pigeon i sits in hole j.

    Each pigeon gets at least one hole; no hole holds two pigeons.
    Unsatisfiable whenever pigeons > holes.
    """
    if pigeons < 1 or holes < 1:
        raise ValueError("pigeons and holes must be positive")

    def var(i: int, j: int) -> int:
        return (i - 1) * holes + j

    clauses: list[Clause] = []
    for i in range(1, pigeons + 1):
        clauses.append(tuple(var(i, j) for j in range(1, holes + 1)))
    for j in range(1, holes + 1):
        for i1 in range(1, pigeons + 1):
            for i2 in range(i1 + 1, pigeons + 1):
                clauses.append((-var(i1, j), -var(i2, j)))
    return CnfFormula(pigeons * holes, tuple(clauses))


def complete_contradiction(k: int) -> CnfFormula:
    """All 2^k full-width clauses over k variables; unsatisfiable for k >= 1."""
    if k < 1:
        raise ValueError("k must be positive")
    clauses = []
    for bits in range(1 << k):
        clauses.append(
            tuple(-(i + 1) if (bits >> (k - 1 - i)) & 1 else (i + 1) for i in range(k))
        )
    return CnfFormula(k, tuple(clauses))


def xor_ring(n: int) -> CnfFormula:
    """Inequality ring x1 != x2 != ... != xn != x1; unsatisfiable for odd n."""
    if n < 3:
        raise ValueError("n must be at least 3")
    clauses: list[Clause] = []
    for i in range(1, n + 1):
        j = i % n + 1
        clauses.append((i, j))
        clauses.append((-i, -j))
    return CnfFormula(n, tuple(clauses))


def at_most_one(group: tuple[int, ...]) -> list[Clause]:
    return [
        (-group[a], -group[b])
        for a in range(len(group))
        for b in range(a + 1, len(group))
    ]


def sgen_style(k: int, seed: int = 0) -> CnfFormula:
    """Counting contradiction over 4k variables in the style of sgen.

    One partition into k groups of 4 carries at-most-one-true constraints,
    capping the count of true variables at k. A second, shuffled partition
    into k+1 near-equal groups carries at-least-one-true constraints,
    forcing at least k+1 true. The margin of exactly one makes these small
    instances genuinely laborious for CDCL while staying compact.
    """
    if k < 1:
        raise ValueError("k must be positive")
    n = 4 * k
    clauses: list[Clause] = []
    variables = list(range(1, n + 1))
    for g in range(k):
        clauses.extend(at_most_one(tuple(variables[4 * g : 4 * g + 4])))
    rng = random.Random(seed)
    shuffled = variables[:]
    rng.shuffle(shuffled)
    groups = k + 1
    base, extra = divmod(n, groups)
    start = 0
    for g in range(groups):
        size = base + (1 if g < extra else 0)
        clauses.append(tuple(sorted(shuffled[start : start + size])))
        start += size
    return CnfFormula(n, tuple(clauses))


def random_cnf(num_vars: int, num_clauses: int, width: int, seed: int) -> CnfFormula:
    """Random CNF with distinct clauses; no satisfiability guarantee."""
    if num_vars < 1 or width < 1 or width > num_vars:
        raise ValueError("bad dimensions")
    rng = random.Random(seed)
    seen: set[tuple[int, ...]] = set()
    clauses: list[Clause] = []
    guard = 0
    while len(clauses) < num_clauses:
        guard += 1
        if guard > 100 * num_clauses + 1000:
            raise ValueError("cannot draw enough distinct clauses")
        variables = rng.sample(range(1, num_vars + 1), width)
        cl = tuple(v if rng.random() < 0.5 else -v for v in sorted(variables))
        key = tuple(sorted(cl))
        if key in seen:
            continue
        seen.add(key)
        clauses.append(cl)
    return CnfFormula(num_vars, tuple(clauses))
