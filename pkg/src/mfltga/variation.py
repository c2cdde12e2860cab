"""Variation: assortative mating, linkage-tree crossover, mutation.

The mating flow pairs the population at random.  Parents sharing a skill
factor recombine inside that task; mixed pairs flip a fair coin for the task,
and the parent whose task lost the coin is copied unchanged into the backup
pool.  Crossover walks the selected task's linkage tree top down, swapping
each cluster mask between the working pair and keeping the swap only when a
candidate strictly beats both current parents on the selected task.  Pairs
that survive a whole traversal unimproved accumulate punishment; past the
threshold the pair is replaced by fresh random individuals.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import ConfigurationError, InvalidStateError
from .linkage import LinkageTree
from .mfo import (
    EvalLedger,
    Individual,
    Population,
    TaskDefinition,
    random_genotype,
    unified_alphabet,
)


@dataclass
class PunishmentState:
    """No-improvement counter for one mating pair."""

    n_p: int
    max_p: int


@dataclass
class MatingOutcome:
    """Offspring (best of each pair) plus the unselected mixed-pair parents."""

    offspring_pop: list
    backup_pop: list

    @property
    def intermediate_pop(self) -> list:
        return self.offspring_pop + self.backup_pop


def _fresh_individual(ledger: EvalLedger, task_id: int, rng) -> Individual:
    k = len(ledger.tasks)
    ind = Individual(random_genotype(ledger.tasks, rng), [None] * k, [None] * k)
    ledger.evaluate(ind, task_id)
    return ind


def tree_crossover(
    parent_i: Individual,
    parent_j: Individual,
    tree: LinkageTree,
    task: TaskDefinition,
    state: PunishmentState,
    rng,
    ledger: EvalLedger,
):
    """Greedy mask-swap traversal of the linkage tree for one pair.

    Every visited mask produces two candidates (both evaluated on the task);
    the candidate pair replaces the working pair only when one candidate is
    strictly better than both current working parents.  If the whole
    traversal brings no replacement the pair counter grows, and past max_p
    the pair restarts from two fresh random individuals.
    """
    tid = task.task_id
    off_i = parent_i.working_copy()
    off_j = parent_j.working_copy()
    for off in (off_i, off_j):
        if off.factorial_costs[tid - 1] is None:
            ledger.evaluate(off, tid)
    improved = False
    k = len(ledger.tasks)
    for mask in tree.crossover_masks():
        cand_i = Individual(list(off_i.genotype), [None] * k, [None] * k)
        cand_j = Individual(list(off_j.genotype), [None] * k, [None] * k)
        for g in mask:
            cand_i.genotype[g] = off_j.genotype[g]
            cand_j.genotype[g] = off_i.genotype[g]
        cost_ci = ledger.evaluate(cand_i, tid)
        cost_cj = ledger.evaluate(cand_j, tid)
        best_current = min(off_i.factorial_costs[tid - 1], off_j.factorial_costs[tid - 1])
        if min(cost_ci, cost_cj) < best_current:
            off_i, off_j = cand_i, cand_j
            improved = True
    if improved:
        state.n_p = 0
    else:
        state.n_p += 1
        if state.n_p > state.max_p:
            off_i = _fresh_individual(ledger, tid, rng)
            off_j = _fresh_individual(ledger, tid, rng)
            state.n_p = 0
    off_i.punish = off_j.punish = state.n_p
    return off_i, off_j


def mutate(ind: Individual, rate: float, rng, alphabet_size: int) -> Individual:
    """Reset each gene to a uniform-random value with probability rate.

    Cached factorial costs are dropped only when the genotype actually
    changed, so a no-op mutation costs no re-evaluation.
    """
    if not 0.0 <= rate <= 1.0:
        raise ConfigurationError(f"mutation rate must lie in [0, 1], got {rate}")
    if rate == 0.0:
        return ind
    changed = False
    for g in range(len(ind.genotype)):
        if rng.random() < rate:
            value = rng.randrange(alphabet_size)
            if value != ind.genotype[g]:
                changed = True
            ind.genotype[g] = value
    if changed:
        ind.factorial_costs = [None] * len(ind.factorial_costs)
        ind.factorial_ranks = [None] * len(ind.factorial_ranks)
    return ind


def assortative_mating(
    pop: Population,
    trees: Sequence[LinkageTree],
    rng,
    *,
    max_p: int = 10,
    mutation_rate: float = 0.0,
) -> MatingOutcome:
    """One generation of pairing, task selection and tree crossover.

    Returns the best offspring of each pair (evaluated on the pair's selected
    task, skill factor imitating it) plus the backup pool of unmodified
    parents whose skill task lost the coin flip.
    """
    members = pop.members
    if len(members) % 2 != 0:
        raise InvalidStateError("population size must be even to form pairs")
    by_task = {tree.task_id: tree for tree in trees}
    task_by_id = {t.task_id: t for t in pop.tasks}
    alphabet = unified_alphabet(pop.tasks)
    order = list(range(len(members)))
    rng.shuffle(order)
    offspring = []
    backup = []
    for a, b in zip(order[::2], order[1::2]):
        pa, pb = members[a], members[b]
        if pa.skill_factor == pb.skill_factor:
            selected = pa.skill_factor
        else:
            selected = pa.skill_factor if rng.random() < 0.5 else pb.skill_factor
            backup.append(pb if selected == pa.skill_factor else pa)
        tree = by_task.get(selected)
        if tree is None:
            raise InvalidStateError(f"no linkage tree supplied for task {selected}")
        state = PunishmentState(n_p=max(pa.punish, pb.punish), max_p=max_p)
        off_i, off_j = tree_crossover(pa, pb, tree, task_by_id[selected], state, rng, pop.ledger)
        if mutation_rate > 0.0:
            for off in (off_i, off_j):
                mutate(off, mutation_rate, rng, alphabet)
                if off.factorial_costs[selected - 1] is None:
                    pop.ledger.evaluate(off, selected)
        off_i.skill_factor = selected
        off_j.skill_factor = selected
        if off_i.factorial_costs[selected - 1] <= off_j.factorial_costs[selected - 1]:
            offspring.append(off_i)
        else:
            offspring.append(off_j)
    return MatingOutcome(offspring_pop=offspring, backup_pop=backup)
