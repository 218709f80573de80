"""Solving through decomposition sets.

A decomposition set B splits a formula into 2^|B| branch formulas, each
first probed by unit propagation and escalated to a fresh CDCL solve only
when the probe leaves it undecided. Several sets combine through the
Cartesian product of their undecided branches. Branch workloads are
observed identically to the hardness estimator, so decomposed totals line
up with estimates to the last propagation.
"""

from __future__ import annotations

import csv
import heapq
import itertools
from dataclasses import dataclass

from .estimator import DecompositionSet, branch_assignment, branch_bits
from .formula import Assignment, CnfFormula, substitute
from .parallel import ordered_map
from .solver import (
    DECIDED_SAT,
    DECIDED_UNSAT,
    SAT,
    UNSAT,
    SolverConfig,
    propagate_only,
    solve,
)

__all__ = [
    "UP_DECIDED",
    "CDCL",
    "BranchResult",
    "HardSet",
    "DecomposedVerdict",
    "solve_with_backdoor",
    "solve_with_backdoors",
    "simulate_parallel",
    "write_branch_ledger",
    "LEDGER_HEADER",
]

UP_DECIDED = "up_decided"
CDCL = "cdcl"

LEDGER_HEADER = [
    "backdoor_id",
    "beta_bits",
    "tier",
    "verdict",
    "propagations",
    "conflicts",
    "elapsed_s",
]


@dataclass(frozen=True)
class BranchResult:
    """One solved branch: its assignment, tier, verdict, and workload."""

    backdoor_id: int
    beta_bits: str
    beta: Assignment
    tier: str
    verdict: str
    propagations: int
    conflicts: int
    elapsed_s: float
    model: Assignment | None = None


@dataclass(frozen=True)
class HardSet:
    """Branches of one decomposition set that unit propagation cannot decide."""

    backdoor: DecompositionSet
    hard: tuple[Assignment, ...]


@dataclass(frozen=True)
class DecomposedVerdict:
    verdict: str
    witness: Assignment | None
    branches: tuple[BranchResult, ...]
    propagations: int
    conflicts: int
    elapsed_s: float
    easy_count: int
    hard_count: int
    vacuous_count: int = 0
    hard_sets: tuple[HardSet, ...] = ()


def _total_witness(num_vars: int, *layers: Assignment) -> Assignment:
    # unconstrained variables default to false; later layers win
    witness: Assignment = {v: False for v in range(1, num_vars + 1)}
    for layer in layers:
        for v, val in layer.items():
            witness[v] = bool(val)
    return witness


def _observe_branch(args) -> tuple:
    """Probe-then-solve one branch, mirroring the estimator's accounting."""
    formula, beta, bits, backdoor_id, cfg = args
    residual = substitute(formula, beta)
    probe = propagate_only(residual)
    if probe.status == DECIDED_UNSAT:
        return BranchResult(
            backdoor_id,
            bits,
            beta,
            UP_DECIDED,
            UNSAT,
            probe.propagations,
            0,
            probe.elapsed,
        )
    if probe.status == DECIDED_SAT:
        return BranchResult(
            backdoor_id,
            bits,
            beta,
            UP_DECIDED,
            SAT,
            probe.propagations,
            0,
            probe.elapsed,
            model=dict(probe.assignment),
        )
    out = solve(residual, cfg=cfg)
    return BranchResult(
        backdoor_id,
        bits,
        beta,
        CDCL,
        out.verdict,
        out.propagations,
        out.conflicts,
        out.elapsed,
        model=dict(out.model) if out.model is not None else None,
    )


def _classify_branch(args) -> tuple:
    """UP-probe one branch for the multi-set classification pass."""
    formula, beta, bits, backdoor_id = args
    probe = propagate_only(substitute(formula, beta))
    return (beta, bits, backdoor_id, probe)


def _solve_merged(args) -> BranchResult:
    """Full CDCL solve of one merged product branch."""
    formula, gamma, bits, backdoor_id, cfg = args
    out = solve(substitute(formula, gamma), cfg=cfg)
    return BranchResult(
        backdoor_id,
        bits,
        gamma,
        CDCL,
        out.verdict,
        out.propagations,
        out.conflicts,
        out.elapsed,
        model=dict(out.model) if out.model is not None else None,
    )


def _finish(formula, branches, witness, vacuous=0, hard_sets=()):
    verdict = SAT if witness is not None else UNSAT
    return DecomposedVerdict(
        verdict=verdict,
        witness=witness,
        branches=tuple(branches),
        propagations=sum(b.propagations for b in branches),
        conflicts=sum(b.conflicts for b in branches),
        elapsed_s=sum(b.elapsed_s for b in branches),
        easy_count=sum(1 for b in branches if b.tier == UP_DECIDED),
        hard_count=sum(1 for b in branches if b.tier == CDCL),
        vacuous_count=vacuous,
        hard_sets=tuple(hard_sets),
    )


def solve_with_backdoor(
    formula: CnfFormula,
    B: DecompositionSet,
    cfg: SolverConfig | None = None,
    cap: int = 1 << 20,
    workers: int = 1,
) -> DecomposedVerdict:
    """Decide a formula by solving every branch of one decomposition set.

    Branches run in lexicographic order of the assignment bits. A
    satisfiable branch short-circuits the rest; unsatisfiability requires
    every branch refuted. The verdict always matches a direct solve.
    """
    if B.num_vars != formula.num_vars:
        raise ValueError("decomposition set and formula disagree on num_vars")
    count = 1 << len(B)
    if count > cap:
        raise ValueError(f"2^|B| = {count} exceeds the enumeration cap {cap}")
    jobs = []
    for idx in range(count):
        beta = branch_assignment(B, idx)
        jobs.append((formula, beta, branch_bits(B, beta), 0, cfg))
    branches: list[BranchResult] = []
    for br in ordered_map(_observe_branch, jobs, workers=workers):
        branches.append(br)
        if br.verdict == SAT:
            witness = _total_witness(formula.num_vars, br.model or {}, br.beta)
            return _finish(formula, branches, witness)
    return _finish(formula, branches, None)


def solve_with_backdoors(
    formula: CnfFormula,
    backdoors: list[DecompositionSet] | tuple[DecompositionSet, ...],
    cfg: SolverConfig | None = None,
    cap: int = 1 << 20,
    workers: int = 1,
) -> DecomposedVerdict:
    """Decide a formula through several decomposition sets at once.

    Every branch of every set is classified by unit propagation; the
    undecided ones form per-set hard lists whose Cartesian product is then
    solved branch by branch. Sets may overlap: a product element whose
    parts contradict each other covers no assignment and is skipped,
    counted as vacuous. Unsatisfiable iff every easy branch and every
    nonvacuous merged branch is.
    """
    if not backdoors:
        raise ValueError("need at least one decomposition set")
    for B in backdoors:
        if B.num_vars != formula.num_vars:
            raise ValueError("decomposition set and formula disagree on num_vars")
        if (1 << len(B)) > cap:
            raise ValueError(f"2^|B| exceeds the enumeration cap {cap}")

    branches: list[BranchResult] = []
    hard_sets: list[HardSet] = []
    for bid, B in enumerate(backdoors):
        hard: list[Assignment] = []
        jobs = []
        for idx in range(1 << len(B)):
            beta = branch_assignment(B, idx)
            jobs.append((formula, beta, branch_bits(B, beta), bid))
        for beta, bits, _bid, probe in ordered_map(
            _classify_branch, jobs, workers=workers
        ):
            if probe.status == DECIDED_UNSAT:
                branches.append(
                    BranchResult(
                        bid, bits, beta, UP_DECIDED, UNSAT,
                        probe.propagations, 0, probe.elapsed,
                    )
                )
            elif probe.status == DECIDED_SAT:
                branches.append(
                    BranchResult(
                        bid, bits, beta, UP_DECIDED, SAT,
                        probe.propagations, 0, probe.elapsed,
                        model=dict(probe.assignment),
                    )
                )
                witness = _total_witness(
                    formula.num_vars, dict(probe.assignment), beta
                )
                return _finish(formula, branches, witness, hard_sets=hard_sets)
            else:
                hard.append(beta)
        hard_sets.append(HardSet(B, tuple(hard)))

    product_total = 1
    for hs in hard_sets:
        product_total *= len(hs.hard)
    if product_total > cap:
        raise ValueError(f"|Gamma| = {product_total} exceeds the cap {cap}")

    union_mask = 0
    for B in backdoors:
        union_mask |= B.mask
    union_set = DecompositionSet(formula.num_vars, union_mask)

    vacuous = 0
    merged_jobs = []
    for parts in itertools.product(*(hs.hard for hs in hard_sets)):
        gamma: Assignment = {}
        conflict = False
        for part in parts:
            for v, val in part.items():
                if v in gamma and bool(gamma[v]) != bool(val):
                    conflict = True
                    break
                gamma[v] = val
            if conflict:
                break
        if conflict:
            vacuous += 1
            continue
        merged_jobs.append(
            (formula, gamma, branch_bits(union_set, gamma), -1, cfg)
        )
    for br in ordered_map(_solve_merged, merged_jobs, workers=workers):
        branches.append(br)
        if br.verdict == SAT:
            witness = _total_witness(formula.num_vars, br.model or {}, br.beta)
            return _finish(
                formula, branches, witness, vacuous=vacuous, hard_sets=hard_sets
            )
    return _finish(formula, branches, None, vacuous=vacuous, hard_sets=hard_sets)


def simulate_parallel(branch_costs, workers: int) -> float:
    """Makespan of greedy list scheduling over the given costs, in order.

    One worker reduces to the plain running sum; more workers hand each
    queued job to whichever worker frees up first.
    """
    if workers < 1:
        raise ValueError("workers must be positive")
    costs = list(branch_costs)
    if any(c < 0 for c in costs):
        raise ValueError("costs must be nonnegative")
    if not costs:
        return 0.0
    if workers == 1:
        acc = 0.0
        for c in costs:
            acc += c
        return acc
    free = [(0.0, i) for i in range(workers)]
    heapq.heapify(free)
    makespan = 0.0
    for c in costs:
        t, i = heapq.heappop(free)
        t += c
        makespan = max(makespan, t)
        heapq.heappush(free, (t, i))
    return makespan


def write_branch_ledger(result: DecomposedVerdict, out) -> None:
    """Write one CSV row per solved branch; `out` is a path or open file."""
    if hasattr(out, "write"):
        _write_ledger(result, out)
    else:
        with open(out, "w", newline="") as fh:
            _write_ledger(result, fh)


def _write_ledger(result: DecomposedVerdict, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(LEDGER_HEADER)
    for br in result.branches:
        writer.writerow(
            [
                br.backdoor_id,
                br.beta_bits,
                br.tier,
                br.verdict,
                br.propagations,
                br.conflicts,
                f"{br.elapsed_s:.6f}",
            ]
        )
