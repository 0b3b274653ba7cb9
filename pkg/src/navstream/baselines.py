"""Reference optimizers and the infinite-buffer cost model.

Variants:
  flex-ga / fixed-ga  all-I start, greedy addition of single P-edges (plus
                      symmetric reverse pairs for the flexible buffer)
  flex-lm-i           all-I start plus the landmark P-edges, greedy add
                      then greedy subtract
  inf-lm              landmark structure costed under an infinite buffer
                      where every previously transmitted MDU is a free
                      predictor and revisits are free
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .costs import (
    SizeTable,
    Structure,
    all_i_structure,
    storage_cost,
    zero_hop_sources,
)
from .errors import InvalidInputError, OracleRefusalError
from .evaluate import CostTables
from .landmarks import PlannerParams, build_initial_structure, tsvq
from .refine import (
    RefinerParams,
    RefineLog,
    TradeoffRow,
    _EdgeFilter,
    _objective_cost,
    greedy_refine,
    greedy_subtract,
)
from .scenario import START, Scenario, aggregate_switch_probabilities

VARIANTS = ("flex-ga", "fixed-ga", "flex-lm-i", "inf-lm")

_INF_MAX_STATES = 200_000
_INF_ESTIMATE_SESSIONS = 20_000


@dataclass
class BaselineResult:
    variant: str
    structure: Structure
    expected_cost: float
    storage_bits: float
    log: RefineLog | None = None


def _greedy_add_ga(
    scenario: Scenario,
    sizes: SizeTable,
    initial: Structure,
    params: RefinerParams,
    allow_pairs: bool,
) -> tuple[Structure, RefineLog]:
    """Greedy exact-evaluation addition of single edges or reverse pairs."""
    n = scenario.graph.n
    structure = initial
    log = RefineLog()
    lam = params.lam

    j_min = _objective_cost(scenario, sizes, structure, params.buffer)
    j_min += lam * storage_cost(structure, sizes)
    iteration = 0
    while True:
        iteration += 1
        usable = _EdgeFilter(scenario, sizes, structure)
        relevant = usable.relevant
        b_base = storage_cost(structure, sizes)
        best_edges = None
        candidates = []
        for i in range(n):
            for j in range(n):
                if i != j and (i, j) not in structure.p_edges:
                    candidates.append(((i, j),))
        if allow_pairs:
            for i in range(n):
                for j in range(i + 1, n):
                    fwd, rev = (i, j), (j, i)
                    if fwd not in structure.p_edges and rev not in structure.p_edges:
                        candidates.append((fwd, rev))
        for edges in candidates:
            if not any(relevant(i, j) for (i, j) in edges):
                log.candidates_skipped += 1
                continue
            log.candidates_total += 1
            cand = structure.with_edges(edges)
            j_cand = _objective_cost(scenario, sizes, cand, params.buffer)
            j_cand += lam * (b_base + sum(sizes.p(i, j) for (i, j) in edges))
            if j_cand < j_min:
                j_min = j_cand
                best_edges = edges
        if best_edges is None:
            break
        structure = structure.with_edges(best_edges)
        log.steps.append((iteration, best_edges, j_min))
    return structure, log


def _landmark_structure(
    scenario: Scenario, sizes: SizeTable, lam: float
) -> Structure:
    q = aggregate_switch_probabilities(
        scenario.graph, scenario.nav, scenario.lifetime
    )
    planner = PlannerParams(w=lam / scenario.lifetime.mu, q=q)
    parts = tsvq(scenario.graph, sizes, planner)
    return build_initial_structure(parts, sizes)


def inf_buffer_cost(
    scenario: Scenario,
    sizes: SizeTable,
    structure: Structure,
    weight_first_switch: bool = False,
    max_states: int = _INF_MAX_STATES,
) -> float:
    """Exact expected cost with an unbounded reference buffer.

    Any MDU transmitted earlier in the session is a free predictor and a
    free revisit.  The state carries the transmitted set, so this is only
    viable on small instances; larger ones are refused.
    """
    graph, nav, lt = scenario.graph, scenario.nav, scenario.lifetime
    tables = CostTables(structure, sizes, graph.n)
    r_p, preds = tables.r_p, tables.preds
    sources = [zero_hop_sources(structure, sizes, j) for j in range(graph.n)]
    g = lt.g

    memo: dict[tuple, float] = {}

    def cost(t: int, k: int, i: int, avail: frozenset) -> float:
        key = (t, k, i, avail)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if len(memo) > max_states:
            raise OracleRefusalError(
                f"infinite-buffer recursion exceeds {max_states} states"
            )
        g_next = g(t + 1)
        total = 0.0
        for j in graph.neighbors[i]:
            p = nav.prob(k, i, j)
            if p <= 0.0:
                continue

            def cont(nxt: frozenset) -> float:
                if g_next <= 0.0:
                    return 0.0
                return g_next * cost(t + 1, i, j, nxt)

            if j in avail:
                best = cont(avail)
            else:
                best = math.inf
                for src_cost, src in sources[j]:
                    v = src_cost + cont(avail | src)
                    if v < best:
                        best = v
                for l in avail:
                    v1 = r_p.get((l, j))
                    if v1 is not None:
                        v = v1 + cont(avail | {j})
                        if v < best:
                            best = v
                for mid in preds[j]:
                    if mid == j or mid in avail:
                        continue  # mid in avail is covered by 1-hop above
                    hop1 = min(
                        (r_p[(l, mid)] for l in avail if (l, mid) in r_p),
                        default=math.inf,
                    )
                    if math.isinf(hop1):
                        continue
                    v = hop1 + r_p[(mid, j)] + cont(avail | {mid, j})
                    if v < best:
                        best = v
            total += p * best
        memo[key] = total
        return total

    s = graph.start
    w1 = g(1) if weight_first_switch else 1.0
    best = math.inf
    for src_cost, src in sources[s]:
        v = src_cost + w1 * cost(0, START, s, src)
        if v < best:
            best = v
    return best


def inf_buffer_estimate(
    scenario: Scenario,
    sizes: SizeTable,
    structure: Structure,
    n_sessions: int = _INF_ESTIMATE_SESSIONS,
    seed: int = 0,
) -> float:
    """Monte-Carlo myopic estimate of the infinite-buffer cost.

    Greedy per-request choices make this an upper bound on the exact
    infinite-buffer optimum; used where the exact recursion refuses.
    """
    graph, nav, lt = scenario.graph, scenario.nav, scenario.lifetime
    tables = CostTables(structure, sizes, graph.n)
    r_p, preds = tables.r_p, tables.preds
    sources = [zero_hop_sources(structure, sizes, j) for j in range(graph.n)]
    rng = np.random.default_rng(seed)
    pmf = np.asarray(lt.pmf)
    lifetime_cdf = np.cumsum(pmf / pmf.sum())

    start_targets = sorted(j for j, p in nav.p_start.items() if p > 0.0)
    start_cdf = np.cumsum([nav.p_start[j] for j in start_targets])

    total = 0.0
    s = graph.start
    for _ in range(n_sessions):
        src_cost, src = min(sources[s], key=lambda cs: cs[0])
        bits = src_cost
        avail = set(src)
        k, i = START, s
        t_total = int(np.searchsorted(lifetime_cdf, rng.random()))
        for t in range(t_total):
            if k == START:
                targets, cdf = start_targets, start_cdf
            else:
                targets = [j for j in graph.neighbors[i]]
                probs = [nav.p_switch.get((k, i, j), 0.0) for j in targets]
                if sum(probs) <= 0.0:
                    break
                cdf = np.cumsum(probs)
            if not targets:
                break
            j = targets[int(np.searchsorted(cdf, rng.random() * cdf[-1]))]
            if j not in avail:
                best, best_new = math.inf, frozenset()
                for c0, src0 in sources[j]:
                    if c0 < best:
                        best, best_new = c0, src0
                for l in avail:
                    v1 = r_p.get((l, j))
                    if v1 is not None and v1 < best:
                        best, best_new = v1, frozenset([j])
                for mid in preds[j]:
                    if mid == j or mid in avail:
                        continue
                    hop1 = min(
                        (r_p[(l, mid)] for l in avail if (l, mid) in r_p),
                        default=math.inf,
                    )
                    v = hop1 + r_p[(mid, j)]
                    if v < best:
                        best, best_new = v, frozenset([mid, j])
                bits += best
                avail |= best_new
            k, i = i, j
        total += bits
    return total / n_sessions


def run_baseline(
    scenario: Scenario,
    sizes: SizeTable,
    params: RefinerParams,
    variant: str,
) -> BaselineResult:
    if variant not in VARIANTS:
        raise InvalidInputError(
            f"unknown baseline variant {variant!r}; pick one of {VARIANTS}"
        )
    n = scenario.graph.n
    if variant in ("flex-ga", "fixed-ga"):
        buffer = "flex" if variant == "flex-ga" else "fixed"
        run = RefinerParams(lam=params.lam, buffer=buffer, enable_pruning=False)
        structure, log = _greedy_add_ga(
            scenario,
            sizes,
            all_i_structure(n),
            run,
            allow_pairs=(variant == "flex-ga"),
        )
        cost = _objective_cost(scenario, sizes, structure, buffer)
        return BaselineResult(
            variant=variant,
            structure=structure,
            expected_cost=cost,
            storage_bits=storage_cost(structure, sizes),
            log=log,
        )
    if variant == "flex-lm-i":
        lm = _landmark_structure(scenario, sizes, params.lam)
        init = Structure(
            i_set=frozenset(range(n)),
            p_edges=lm.p_edges,
            landmarks=lm.landmarks,
        )
        run = RefinerParams(
            lam=params.lam, buffer="flex", enable_pruning=params.enable_pruning
        )
        added, log_add = greedy_refine(scenario, sizes, init, run)
        final, log_sub = greedy_subtract(scenario, sizes, added, run)
        log = RefineLog(
            steps=log_add.steps + log_sub.steps,
            candidates_total=log_add.candidates_total + log_sub.candidates_total,
            candidates_pruned=log_add.candidates_pruned + log_sub.candidates_pruned,
            candidates_skipped=log_add.candidates_skipped
            + log_sub.candidates_skipped,
        )
        cost = _objective_cost(scenario, sizes, final, "flex")
        return BaselineResult(
            variant=variant,
            structure=final,
            expected_cost=cost,
            storage_bits=storage_cost(final, sizes),
            log=log,
        )
    # inf-lm
    lm = _landmark_structure(scenario, sizes, params.lam)
    try:
        cost = inf_buffer_cost(scenario, sizes, lm)
    except OracleRefusalError:
        cost = inf_buffer_estimate(scenario, sizes, lm)
    return BaselineResult(
        variant=variant,
        structure=lm,
        expected_cost=cost,
        storage_bits=storage_cost(lm, sizes),
    )


def emit_tradeoff_csv(rows: list[tuple[str, TradeoffRow]], path) -> None:
    """CSV of (method, lambda, storage, transmission, landmark/edge counts)."""
    if not rows:
        raise InvalidInputError("no tradeoff rows to write")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["method", "lambda", "storage_bits", "expected_bits",
             "landmarks", "p_edges"]
        )
        for method, row in rows:
            writer.writerow(
                [method, repr(float(row.lam)), repr(float(row.storage_bits)),
                 repr(float(row.expected_bits)), row.landmarks, row.p_edges]
            )
