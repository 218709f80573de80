import pytest

from satdecomp.estimator import DecompositionSet
from satdecomp.formula import CnfFormula
from satdecomp.instances import (
    complete_contradiction,
    pigeonhole,
    random_cnf,
    sgen_style,
    xor_ring,
)

from oracles import disjoint_union


def unit_pair() -> CnfFormula:
    return CnfFormula(1, ((1,), (-1,)))


def implication_chain(n: int) -> CnfFormula:
    """x1, x1 -> x2 -> ... -> xn, and finally not xn. Pure-UP refutable."""
    clauses = [(1,)]
    clauses += [(-i, i + 1) for i in range(1, n)]
    clauses.append((-n,))
    return CnfFormula(n, tuple(clauses))


def double_xor() -> CnfFormula:
    """Two independent parity constraints; unit propagation never decides
    any single-variable branch. Satisfiable."""
    return CnfFormula(4, ((1, 2), (-1, -2), (3, 4), (-3, -4)))


def overloaded_holes() -> CnfFormula:
    """Four slots, at most one occupied, two forced occupants. Unsatisfiable."""
    clauses = [(1, 2, 3, 4)]
    clauses += [(-i, -j) for i in range(1, 5) for j in range(i + 1, 5)]
    clauses += [(1,), (2,)]
    return CnfFormula(4, tuple(clauses))


def rho_mix() -> CnfFormula:
    """Over B = {1..10} exactly 3/4 of the branches are decided by unit
    propagation: any branch with x1 or x2 true forces x11 and then x12,
    satisfying everything; branches with both false leave a 2-var parity
    constraint untouched."""
    return CnfFormula(12, ((-1, 11), (-2, 11), (11, 12), (-11, -12)))


def zero_variance_pad(num_vars: int = 14) -> CnfFormula:
    """A 2-var contradiction padded with inert variables: every branch over
    the pad costs the same, so the workload variance is exactly zero."""
    return CnfFormula(num_vars, complete_contradiction(2).clauses)


def unsat_corpus() -> list[tuple[str, CnfFormula]]:
    """Named UNSAT fixtures, all at most 12 variables."""
    fixtures = [
        ("unit_pair", unit_pair()),
        ("unit_pair_padded", CnfFormula(3, ((1,), (-1,)))),
        ("cc1", complete_contradiction(1)),
        ("cc2", complete_contradiction(2)),
        ("cc3", complete_contradiction(3)),
        ("php32", pigeonhole(3, 2)),
        ("php42", pigeonhole(4, 2)),
        ("php43", pigeonhole(4, 3)),
        ("xor3", xor_ring(3)),
        ("xor5", xor_ring(5)),
        ("xor7", xor_ring(7)),
        ("xor9", xor_ring(9)),
        ("xor11", xor_ring(11)),
        ("sgen1", sgen_style(1)),
        ("sgen2_s0", sgen_style(2, seed=0)),
        ("sgen2_s1", sgen_style(2, seed=1)),
        ("sgen3_s0", sgen_style(3, seed=0)),
        ("chain7", implication_chain(7)),
        ("overloaded_holes", overloaded_holes()),
        ("php32_plus_cc2", disjoint_union(pigeonhole(3, 2), complete_contradiction(2))),
        ("xor3_pair", disjoint_union(xor_ring(3), xor_ring(3))),
        ("zero_variance_12", zero_variance_pad(12)),
        ("rand8_s0", random_cnf(8, 60, 3, seed=0)),
        ("rand8_s1", random_cnf(8, 60, 3, seed=1)),
        ("rand8_s2", random_cnf(8, 60, 3, seed=2)),
    ]
    assert len(fixtures) >= 20
    assert all(f.num_vars <= 12 for _, f in fixtures)
    return fixtures


def sat_corpus() -> list[tuple[str, CnfFormula]]:
    fixtures = [
        ("single_clause", CnfFormula(2, ((1, 2),))),
        ("double_xor", double_xor()),
        ("rho_mix", rho_mix()),
        ("empty", CnfFormula(2, ())),
        ("chain_sat", CnfFormula(4, ((1,), (-1, 2), (-2, 3), (-3, 4)))),
        ("rand6_s0", random_cnf(6, 10, 3, seed=0)),
        ("rand6_s1", random_cnf(6, 10, 3, seed=1)),
    ]
    return fixtures


@pytest.fixture(scope="session")
def unsat_fixtures():
    return unsat_corpus()


@pytest.fixture(scope="session")
def sat_fixtures():
    return sat_corpus()


@pytest.fixture(scope="session")
def all_fixtures(unsat_fixtures, sat_fixtures):
    return unsat_fixtures + sat_fixtures


def dset(variables, num_vars) -> DecompositionSet:
    return DecompositionSet.from_vars(variables, num_vars)
