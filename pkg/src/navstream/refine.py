"""Greedy structure refinement under the storage/transmission objective.

The objective is J = c + lam * b where c is the expected session
transmission cost of the current structure and b its stored bits.  Each
iteration tries every absent P-edge, prunes candidates whose quick lower
bound already exceeds the incumbent, exactly evaluates the survivors, and
commits the best strict improvement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .costs import SizeTable, Structure, storage_cost
from .errors import InfeasibleStructureError, InvalidInputError
from .evaluate import CostTables, eval_fixed, eval_flexible
from .scenario import Scenario


@dataclass
class RefinerParams:
    lam: float
    buffer: str = "flex"
    enable_pruning: bool = True

    def __post_init__(self):
        if self.lam < 0:
            raise InvalidInputError("lambda must be non-negative")
        if self.buffer not in ("fixed", "flex"):
            raise InvalidInputError(f"unknown buffer model {self.buffer!r}")


@dataclass
class RefineLog:
    steps: list = field(default_factory=list)  # (iteration, edge, J)
    candidates_total: int = 0
    candidates_pruned: int = 0
    candidates_skipped: int = 0  # edges provably outside every session plan

    @property
    def pruning_fraction(self) -> float:
        if self.candidates_total == 0:
            return 0.0
        return self.candidates_pruned / self.candidates_total


def _reachable_targets(scenario: Scenario) -> set[int]:
    """MDUs requestable within the charged switch horizon (t_max + 1)."""
    graph = scenario.graph
    frontier = {graph.start}
    targets: set[int] = set()
    for _ in range(scenario.lifetime.t_max + 1):
        frontier = {j for i in frontier for j in graph.neighbors[i]}
        new = frontier - targets
        targets |= frontier
        if not new:
            break
    return targets


class _EdgeFilter:
    """Exact test of whether an absent edge can enter any transmission plan.

    An edge that can't be used leaves the expected cost untouched and only
    adds storage, so it can never improve the objective and is skipped
    without an evaluation.  Usage cases for a new edge (i, j):
      1-hop             i can sit in the reference buffer
      2-hop second hop  i is reachable as an intermediate (some bufferable
                        predecessor has a stored edge into i)
      2-hop first hop   i bufferable and j already predicts some
                        requestable target
      0-hop combo       i has a stored I-MDU and the I+P+M combo beats the
                        current independent reconstruction of j
    Rebuild per committed edge: all sets depend on the incumbent.
    """

    def __init__(self, scenario: Scenario, sizes: SizeTable, structure: Structure):
        targets = _reachable_targets(scenario)
        hop_heads = {m for (m, j2) in structure.p_edges if j2 in targets}
        bufferable = {scenario.graph.start} | targets | hop_heads
        mid_ok = {
            m for (ref, m) in structure.p_edges if ref in bufferable
        }
        tables = CostTables(structure, sizes, scenario.graph.n)
        self.start = scenario.graph.start
        self.targets = targets
        self.hop_heads = hop_heads
        self.bufferable = bufferable
        self.mid_ok = mid_ok
        self.r_i = tables.r_i
        self.i_set = structure.i_set
        self.sizes = sizes

    def _improves_0hop(self, i: int, j: int) -> bool:
        if i not in self.i_set:
            return False
        sz = self.sizes
        return sz.i(i) + sz.p(i, j) + sz.m(j) < self.r_i[j]

    def relevant(self, i: int, j: int) -> bool:
        if j in self.targets:
            if i in self.bufferable or i in self.mid_ok:
                return True
            return self._improves_0hop(i, j)
        # the start MDU is always transmitted independently once
        if j == self.start and self._improves_0hop(i, j):
            return True
        return i in self.bufferable and j in self.hop_heads


def _objective_cost(scenario, sizes, structure, buffer: str) -> float:
    if buffer == "fixed":
        return eval_fixed(scenario, sizes, structure).expected_cost
    return eval_flexible(scenario, sizes, structure).expected_cost


def lower_bound_cost(
    scenario: Scenario,
    sizes: SizeTable,
    candidate: Structure,
    new_edge: tuple[int, int],
) -> float:
    """Quick optimistic transmission cost of `candidate` = incumbent + edge.

    Re-runs the flexible recursion, but any request routed over the new
    edge at depth t is charged sum_{tau=t}^{t_max} g(tau) * p_min instead
    of the bracketed min, where p_min is the smallest stored P size in the
    candidate (including the new edge).  The recursion below the
    substituted transition is skipped entirely, which is what makes the
    bound cheap.
    """
    if new_edge not in candidate.p_edges:
        raise InvalidInputError("new_edge must be part of the candidate")
    p_min = min(sizes.p(i, j) for (i, j) in candidate.p_edges)
    lt = scenario.lifetime
    bound_at = [p_min * lt.tail_sum(t) for t in range(lt.t_max + 1)]
    result = eval_flexible(
        scenario,
        sizes,
        candidate,
        bound_edges=frozenset([new_edge]),
        bound_value_at=bound_at,
    )
    return result.expected_cost


def _candidate_edges(structure: Structure, n: int):
    for i in range(n):
        for j in range(n):
            if i != j and (i, j) not in structure.p_edges:
                yield (i, j)


def greedy_refine(
    scenario: Scenario,
    sizes: SizeTable,
    initial: Structure,
    params: RefinerParams,
) -> tuple[Structure, RefineLog]:
    """Add one P-edge per iteration while the objective strictly improves.

    Candidates are scanned in ascending (i, j) order; on ties the earlier
    candidate is kept, so runs are deterministic.  Pruning only applies to
    the flexible buffer (the bound is a flexible-recursion construct).
    """
    n = scenario.graph.n
    problems = initial.validate(n)
    if problems:
        raise InvalidInputError("; ".join(problems))
    structure = initial
    log = RefineLog()
    lam = params.lam
    prune = params.enable_pruning and params.buffer == "flex"

    j_min = _objective_cost(scenario, sizes, structure, params.buffer)
    j_min += lam * storage_cost(structure, sizes)
    iteration = 0
    while True:
        iteration += 1
        best_edge = None
        usable = _EdgeFilter(scenario, sizes, structure)
        b_base = storage_cost(structure, sizes)
        for edge in _candidate_edges(structure, n):
            i, j = edge
            if not usable.relevant(i, j):
                log.candidates_skipped += 1
                continue
            cand = structure.with_edge(edge)
            log.candidates_total += 1
            b_cand = b_base + sizes.p(i, j)
            if prune:
                j_low = lower_bound_cost(scenario, sizes, cand, edge)
                j_low += lam * b_cand
                if j_low > j_min:
                    log.candidates_pruned += 1
                    continue
            j_cand = _objective_cost(scenario, sizes, cand, params.buffer)
            j_cand += lam * b_cand
            if j_cand < j_min:
                j_min = j_cand
                best_edge = edge
        if best_edge is None:
            break
        structure = structure.with_edge(best_edge)
        log.steps.append((iteration, best_edge, j_min))
    return structure, log


def greedy_subtract(
    scenario: Scenario,
    sizes: SizeTable,
    initial: Structure,
    params: RefinerParams,
) -> tuple[Structure, RefineLog]:
    """Remove one stored P-edge per iteration while the objective improves.

    Removals that leave some MDU without an independent reconstruction are
    skipped rather than evaluated.
    """
    structure = initial
    log = RefineLog()
    lam = params.lam
    j_min = _objective_cost(scenario, sizes, structure, params.buffer)
    j_min += lam * storage_cost(structure, sizes)
    iteration = 0
    while True:
        iteration += 1
        best_edge = None
        for edge in sorted(structure.p_edges):
            cand = structure.without_edge(edge)
            log.candidates_total += 1
            try:
                j_cand = _objective_cost(scenario, sizes, cand, params.buffer)
            except InfeasibleStructureError:
                log.candidates_pruned += 1
                continue
            j_cand += lam * storage_cost(cand, sizes)
            if j_cand < j_min:
                j_min = j_cand
                best_edge = edge
        if best_edge is None:
            break
        structure = structure.without_edge(best_edge)
        log.steps.append((iteration, best_edge, j_min))
    return structure, log


@dataclass
class TradeoffRow:
    lam: float
    storage_bits: float
    expected_bits: float
    landmarks: int
    p_edges: int


def sweep(
    scenario: Scenario,
    sizes: SizeTable,
    lambdas: list[float],
    params: RefinerParams,
) -> list[TradeoffRow]:
    """Plan + refine once per lambda; rows come back sorted by lambda."""
    from .landmarks import PlannerParams, build_initial_structure, tsvq
    from .scenario import aggregate_switch_probabilities

    if not lambdas:
        raise InvalidInputError("sweep needs at least one lambda")
    q = aggregate_switch_probabilities(
        scenario.graph, scenario.nav, scenario.lifetime
    )
    rows = []
    for lam in sorted(lambdas):
        try:
            planner = PlannerParams(w=lam / scenario.lifetime.mu, q=q)
            parts = tsvq(scenario.graph, sizes, planner)
            init = build_initial_structure(parts, sizes)
            run = RefinerParams(
                lam=lam,
                buffer=params.buffer,
                enable_pruning=params.enable_pruning,
            )
            final, _ = greedy_refine(scenario, sizes, init, run)
            rows.append(
                TradeoffRow(
                    lam=lam,
                    storage_bits=storage_cost(final, sizes),
                    expected_bits=_objective_cost(
                        scenario, sizes, final, params.buffer
                    ),
                    landmarks=len(final.landmarks or ()),
                    p_edges=len(final.p_edges),
                )
            )
        except Exception as exc:
            raise InvalidInputError(f"sweep failed at lambda={lam}: {exc}") from exc
    return rows
