"""Deterministic CDCL SAT solver with workload counters and clause proofs.

The solver is bit-deterministic: identical (formula, assumptions, config)
inputs produce identical verdicts, models and counters on every run and
platform. Decisions use additive variable activities with ties broken by
lowest index, polarity defaults to false, and restarts follow a fixed Luby
schedule. No randomness anywhere.

Counters: `propagations` counts literals assigned by unit propagation
(assumptions and decisions are not counted); `conflicts` counts conflict
analyses, i.e. learned-clause events, so a refutation found by root-level
propagation alone reports zero conflicts.

Unsatisfiable runs can log every learned clause as a proof whose steps are
checkable by reverse unit propagation (RUP); assumptions are folded in as
unit clauses for proof purposes.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .formula import Assignment, Clause, CnfFormula, check_assignment

SAT = "SAT"
UNSAT = "UNSAT"
LIMIT = "LIMIT"

DECIDED_SAT = "decided_SAT"
DECIDED_UNSAT = "decided_UNSAT"
UNDECIDED = "undecided"

PROPAGATIONS = "propagations"
CONFLICTS = "conflicts"
TIME = "time"
MEASURES = (PROPAGATIONS, CONFLICTS, TIME)

_UNSET = -1


@dataclass
class SolverConfig:
    """Knobs for a solve call. Defaults are pinned for reproducibility."""

    proof_logging: bool = False
    conflict_limit: int | None = None
    workload_measure: str = PROPAGATIONS
    activity_decay: float = 0.95
    restart_base: int = 100

    def __post_init__(self) -> None:
        if self.workload_measure not in MEASURES:
            raise ValueError(f"unknown workload measure {self.workload_measure!r}")
        if self.conflict_limit is not None and self.conflict_limit < 1:
            raise ValueError("conflict_limit must be positive")
        if not (0.0 < self.activity_decay <= 1.0):
            raise ValueError("activity_decay must be in (0, 1]")
        if self.restart_base < 1:
            raise ValueError("restart_base must be positive")


@dataclass
class DratProof:
    """Clause addition/deletion steps; text form uses one step per line."""

    steps: tuple[tuple[str, Clause], ...]

    def to_text(self) -> str:
        lines = []
        for kind, cl in self.steps:
            body = " ".join(str(lit) for lit in cl + (0,))
            lines.append(body if kind == "add" else "d " + body)
        return "\n".join(lines) + "\n" if lines else ""

    @classmethod
    def from_text(cls, text: str) -> "DratProof":
        steps: list[tuple[str, Clause]] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            kind = "add"
            if line.startswith("d "):
                kind = "delete"
                line = line[2:]
            try:
                nums = [int(tok) for tok in line.split()]
            except ValueError:
                raise ValueError(f"proof line {lineno}: non-integer token") from None
            if not nums or nums[-1] != 0 or any(n == 0 for n in nums[:-1]):
                raise ValueError(f"proof line {lineno}: clause must end with a single 0")
            steps.append((kind, tuple(nums[:-1])))
        return cls(tuple(steps))


@dataclass
class SolveOutcome:
    verdict: str
    propagations: int
    conflicts: int
    elapsed: float
    model: Assignment | None = None
    proof: DratProof | None = None


@dataclass
class PropagateResult:
    """Outcome of a unit-propagation-only probe."""

    status: str
    propagations: int
    elapsed: float
    assignment: Assignment = field(default_factory=dict)


def workload(outcome: SolveOutcome, measure: str) -> int | float:
    """Read the configured workload counter from a solve outcome."""
    if measure == PROPAGATIONS:
        return outcome.propagations
    if measure == CONFLICTS:
        return outcome.conflicts
    if measure == TIME:
        return outcome.elapsed
    raise ValueError(f"unknown workload measure {measure!r}")


def _widx(lit: int) -> int:
    return 2 * lit if lit > 0 else -2 * lit + 1


def _luby(i: int) -> int:
    """i-th element (1-based) of the Luby restart sequence 1,1,2,1,1,2,4,..."""
    while True:
        k = i.bit_length()
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1
        # i was strictly between 2^(k-1)-1 and 2^k-1; recurse on the offset


class _Engine:
    """CDCL core shared by full solving and the propagate-only probe."""

    def __init__(self, formula: CnfFormula, cfg: SolverConfig) -> None:
        nv = formula.num_vars
        self.nv = nv
        self.clauses: list[list[int]] = []
        self.watches: list[list[int]] = [[] for _ in range(2 * nv + 2)]
        self.assigns: list[int] = [_UNSET] * (nv + 1)
        self.levels: list[int] = [0] * (nv + 1)
        self.reasons: list[int | None] = [None] * (nv + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.activity: list[float] = [0.0] * (nv + 1)
        self.var_inc = 1.0
        self.decay = cfg.activity_decay
        self.restart_base = cfg.restart_base
        self.propagations = 0
        self.conflicts = 0
        self.proof: list[tuple[str, Clause]] | None = [] if cfg.proof_logging else None
        self.ok = True
        self._init_units: list[tuple[int, int]] = []
        for cl in formula.clauses:
            ci = len(self.clauses)
            lits = list(cl)
            self.clauses.append(lits)
            if not lits:
                self.ok = False
            elif len(lits) == 1:
                self._init_units.append((lits[0], ci))
            else:
                self.watches[_widx(lits[0])].append(ci)
                self.watches[_widx(lits[1])].append(ci)
        self.n_original = len(self.clauses)

    def _enqueue(self, lit: int, reason: int | None) -> None:
        v = lit if lit > 0 else -lit
        self.assigns[v] = 1 if lit > 0 else 0
        self.levels[v] = len(self.trail_lim)
        self.reasons[v] = reason
        self.trail.append(lit)
        if reason is not None:
            self.propagations += 1

    def preload(self, assumptions: Assignment) -> bool:
        """Enqueue formula units then assumptions at level 0 and propagate.

        Returns False when a root-level conflict is already present.
        """
        if not self.ok:
            return False
        for lit, ci in self._init_units:
            v = abs(lit)
            want = 1 if lit > 0 else 0
            cur = self.assigns[v]
            if cur == _UNSET:
                self._enqueue(lit, ci)
            elif cur != want:
                return False
        for v in sorted(assumptions):
            want = assumptions[v]
            cur = self.assigns[v]
            if cur == _UNSET:
                self._enqueue(v if want else -v, None)
            elif cur != want:
                return False
        return self.propagate() == -1

    def propagate(self) -> int:
        """Unit propagation to fixpoint. Returns a conflict clause index or -1."""
        clauses = self.clauses
        watches = self.watches
        assigns = self.assigns
        trail = self.trail
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            wl = watches[_widx(-p)]
            i = j = 0
            n = len(wl)
            confl = -1
            while i < n:
                ci = wl[i]
                i += 1
                cl = clauses[ci]
                if cl[0] == -p:
                    cl[0] = cl[1]
                    cl[1] = -p
                first = cl[0]
                fv = first if first > 0 else -first
                a = assigns[fv]
                if a != _UNSET and (a == 1) == (first > 0):
                    wl[j] = ci
                    j += 1
                    continue
                found = False
                for k in range(2, len(cl)):
                    lk = cl[k]
                    kv = lk if lk > 0 else -lk
                    ak = assigns[kv]
                    if ak == _UNSET or (ak == 1) == (lk > 0):
                        cl[1] = lk
                        cl[k] = -p
                        watches[_widx(lk)].append(ci)
                        found = True
                        break
                if found:
                    continue
                wl[j] = ci
                j += 1
                if a != _UNSET:
                    confl = ci
                    while i < n:
                        wl[j] = wl[i]
                        j += 1
                        i += 1
                    break
                self._enqueue(first, ci)
            del wl[j:]
            if confl != -1:
                self.qhead = len(trail)
                return confl
        return -1

    def all_clauses_satisfied(self) -> bool:
        assigns = self.assigns
        for ci in range(self.n_original):
            for lit in self.clauses[ci]:
                v = lit if lit > 0 else -lit
                a = assigns[v]
                if a != _UNSET and (a == 1) == (lit > 0):
                    break
            else:
                return False
        return True

    def _bump(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            act = self.activity
            for u in range(1, self.nv + 1):
                act[u] *= 1e-100
            self.var_inc *= 1e-100

    def decide(self) -> None:
        assigns = self.assigns
        act = self.activity
        best = 0
        best_act = -1.0
        for v in range(1, self.nv + 1):
            if assigns[v] == _UNSET and act[v] > best_act:
                best = v
                best_act = act[v]
        self.trail_lim.append(len(self.trail))
        self._enqueue(-best, None)

    def analyze(self, confl: int) -> tuple[list[int], int]:
        """First-UIP conflict analysis. Returns (learned clause, backjump level)."""
        learnt: list[int] = []
        seen = bytearray(self.nv + 1)
        level = len(self.trail_lim)
        counter = 0
        p = 0
        idx = len(self.trail) - 1
        reason = confl
        while True:
            for q in self.clauses[reason]:
                if q == p:
                    continue
                v = q if q > 0 else -q
                if not seen[v] and self.levels[v] > 0:
                    seen[v] = 1
                    self._bump(v)
                    if self.levels[v] == level:
                        counter += 1
                    else:
                        learnt.append(q)
            while True:
                pl = self.trail[idx]
                idx -= 1
                if seen[pl if pl > 0 else -pl]:
                    break
            counter -= 1
            seen[pl if pl > 0 else -pl] = 0
            if counter == 0:
                learnt.insert(0, -pl)
                break
            p = pl
            reason = self.reasons[pl if pl > 0 else -pl]
        if len(learnt) == 1:
            bt = 0
        else:
            mi = 1
            ml = self.levels[abs(learnt[1])]
            for k in range(2, len(learnt)):
                lv = self.levels[abs(learnt[k])]
                if lv > ml:
                    ml = lv
                    mi = k
            learnt[1], learnt[mi] = learnt[mi], learnt[1]
            bt = ml
        self.var_inc /= self.decay
        return learnt, bt

    def cancel_until(self, level: int) -> None:
        if len(self.trail_lim) <= level:
            return
        bound = self.trail_lim[level]
        assigns = self.assigns
        reasons = self.reasons
        trail = self.trail
        for k in range(len(trail) - 1, bound - 1, -1):
            lit = trail[k]
            v = lit if lit > 0 else -lit
            assigns[v] = _UNSET
            reasons[v] = None
        del trail[bound:]
        del self.trail_lim[level:]
        self.qhead = bound

    def learn(self, learnt: list[int], bt: int) -> None:
        if self.proof is not None:
            self.proof.append(("add", tuple(learnt)))
        self.cancel_until(bt)
        ci = len(self.clauses)
        self.clauses.append(learnt)
        if len(learnt) > 1:
            self.watches[_widx(learnt[0])].append(ci)
            self.watches[_widx(learnt[1])].append(ci)
        self._enqueue(learnt[0], ci)

    def search(self, conflict_limit: int | None) -> str:
        restart_num = 1
        budget = self.restart_base * _luby(restart_num)
        since_restart = 0
        while True:
            confl = self.propagate()
            if confl >= 0:
                if not self.trail_lim:
                    if self.proof is not None:
                        self.proof.append(("add", ()))
                    return UNSAT
                self.conflicts += 1
                since_restart += 1
                learnt, bt = self.analyze(confl)
                self.learn(learnt, bt)
                if conflict_limit is not None and self.conflicts >= conflict_limit:
                    return LIMIT
                if since_restart >= budget:
                    since_restart = 0
                    restart_num += 1
                    budget = self.restart_base * _luby(restart_num)
                    self.cancel_until(0)
            else:
                if len(self.trail) == self.nv:
                    return SAT
                self.decide()


def solve(
    formula: CnfFormula,
    assumptions: Assignment | None = None,
    cfg: SolverConfig | None = None,
) -> SolveOutcome:
    """Complete CDCL solve of formula under optional level-0 assumptions.

    Every call starts from scratch. With proof logging enabled, an UNSAT
    outcome carries a RUP-checkable proof relative to the formula with the
    assumptions folded in as unit clauses.
    """
    if cfg is None:
        cfg = SolverConfig()
    asm = dict(assumptions) if assumptions else {}
    check_assignment(formula, asm)
    t0 = time.perf_counter()
    eng = _Engine(formula, cfg)
    if not eng.preload(asm):
        verdict = UNSAT
        if eng.proof is not None:
            eng.proof.append(("add", ()))
    else:
        verdict = eng.search(cfg.conflict_limit)
    elapsed = time.perf_counter() - t0
    model = None
    if verdict == SAT:
        model = {v: eng.assigns[v] for v in range(1, eng.nv + 1)}
    proof = None
    if verdict == UNSAT and eng.proof is not None:
        proof = DratProof(tuple(eng.proof))
    return SolveOutcome(
        verdict=verdict,
        propagations=eng.propagations,
        conflicts=eng.conflicts,
        elapsed=elapsed,
        model=model,
        proof=proof,
    )


def propagate_only(
    formula: CnfFormula, assumptions: Assignment | None = None
) -> PropagateResult:
    """Root-level unit propagation without any decisions.

    decided_UNSAT: propagation derives a conflict. decided_SAT: the UP
    closure satisfies every clause. Otherwise undecided. Shares the solve()
    engine, so its propagation count on a decided formula equals what a
    full solve would report.
    """
    asm = dict(assumptions) if assumptions else {}
    check_assignment(formula, asm)
    t0 = time.perf_counter()
    eng = _Engine(formula, SolverConfig())
    if not eng.preload(asm):
        status = DECIDED_UNSAT
    elif eng.all_clauses_satisfied():
        status = DECIDED_SAT
    else:
        status = UNDECIDED
    elapsed = time.perf_counter() - t0
    assignment = {
        v: eng.assigns[v] for v in range(1, eng.nv + 1) if eng.assigns[v] != _UNSET
    }
    return PropagateResult(status, eng.propagations, elapsed, assignment)


@dataclass
class DratCheck:
    ok: bool
    failed_step: int | None = None
    reason: str = ""


class _RupChecker:
    """Clause database answering RUP queries, with add/delete support."""

    def __init__(self, formula: CnfFormula, extra_vars: int = 0) -> None:
        nv = formula.num_vars + extra_vars
        self.nv = nv
        self.clauses: list[tuple[int, ...]] = []
        self.active: list[bool] = []
        self.watches: list[list[int]] = [[] for _ in range(2 * nv + 2)]
        self.unit_ids: list[int] = []
        self.empty_count = 0
        self.index: dict[tuple[int, ...], list[int]] = {}
        self.assigns: list[int] = [_UNSET] * (nv + 1)
        self.trail: list[int] = []
        for cl in formula.clauses:
            self.add(cl)

    def add(self, cl: Clause) -> None:
        ci = len(self.clauses)
        lits = tuple(cl)
        self.clauses.append(lits)
        self.active.append(True)
        self.index.setdefault(tuple(sorted(lits)), []).append(ci)
        if not lits:
            self.empty_count += 1
        elif len(lits) == 1:
            self.unit_ids.append(ci)
        else:
            self.watches[_widx(lits[0])].append(ci)
            self.watches[_widx(lits[1])].append(ci)

    def delete(self, cl: Clause) -> None:
        key = tuple(sorted(cl))
        ids = self.index.get(key)
        if not ids:
            return  # deleting a clause not in the database is a no-op
        ci = ids.pop()
        if not ids:
            del self.index[key]
        self.active[ci] = False
        if not self.clauses[ci]:
            self.empty_count -= 1

    def _value(self, lit: int) -> int:
        a = self.assigns[lit if lit > 0 else -lit]
        if a == _UNSET:
            return _UNSET
        return a if lit > 0 else 1 - a

    def _assume(self, lit: int) -> bool:
        """Assign lit true; returns False on clash with the current state."""
        val = self._value(lit)
        if val == 1:
            return True
        if val == 0:
            return False
        v = lit if lit > 0 else -lit
        self.assigns[v] = 1 if lit > 0 else 0
        self.trail.append(lit)
        return True

    def _rollback(self) -> None:
        for lit in self.trail:
            self.assigns[lit if lit > 0 else -lit] = _UNSET
        self.trail.clear()

    def rup(self, cl: Clause) -> bool:
        """True iff propagating the clause's negation yields a conflict."""
        if self.empty_count > 0:
            return True
        conflict = False
        for ci in self.unit_ids:
            if self.active[ci] and not self._assume(self.clauses[ci][0]):
                conflict = True
                break
        if not conflict:
            for lit in cl:
                if not self._assume(-lit):
                    conflict = True
                    break
        if not conflict:
            conflict = self._propagate_trail()
        self._rollback()
        return conflict

    def _propagate_trail(self) -> bool:
        qhead = 0
        trail = self.trail
        clauses = self.clauses
        active = self.active
        watches = self.watches
        while qhead < len(trail):
            p = trail[qhead]
            qhead += 1
            wl = watches[_widx(-p)]
            i = j = 0
            n = len(wl)
            conflict = False
            while i < n:
                ci = wl[i]
                i += 1
                if not active[ci]:
                    continue  # drop stale watch entries of deleted clauses
                cl = clauses[ci]
                if cl[0] == -p:
                    cl = (cl[1], cl[0]) + cl[2:]
                    clauses[ci] = cl
                first = cl[0]
                if self._value(first) == 1:
                    wl[j] = ci
                    j += 1
                    continue
                found = False
                for k in range(2, len(cl)):
                    if self._value(cl[k]) != 0:
                        clauses[ci] = (cl[0], cl[k]) + cl[2:k] + (cl[1],) + cl[k + 1:]
                        watches[_widx(cl[k])].append(ci)
                        found = True
                        break
                if found:
                    continue
                wl[j] = ci
                j += 1
                if self._value(first) == 0:
                    conflict = True
                    while i < n:
                        wl[j] = wl[i]
                        j += 1
                        i += 1
                    break
                self._assume(first)
            del wl[j:]
            if conflict:
                return True
        return False


def check_drat(formula: CnfFormula, proof: DratProof) -> DratCheck:
    """Verify a clause-addition proof by reverse unit propagation.

    Every added clause must be RUP with respect to the accumulated clause
    set (original clauses plus prior additions minus deletions), and the
    final step must add the empty clause.
    """
    extra = 0
    for _, cl in proof.steps:
        for lit in cl:
            extra = max(extra, abs(lit) - formula.num_vars)
    checker = _RupChecker(formula, extra_vars=extra)
    steps = proof.steps
    for si, (kind, cl) in enumerate(steps):
        if kind == "delete":
            checker.delete(cl)
        elif kind == "add":
            if not checker.rup(cl):
                return DratCheck(False, si, "clause is not RUP")
            if not cl:
                if si != len(steps) - 1:
                    return DratCheck(False, si, "empty clause is not the final step")
                return DratCheck(True)
            checker.add(cl)
        else:
            return DratCheck(False, si, f"unknown step kind {kind!r}")
    return DratCheck(False, len(steps) - 1 if steps else None, "no empty clause derived")
