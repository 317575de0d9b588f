"""
Refinement of a live candidate against the rows seen so far
"""

from dataclasses import replace

import numpy as np

from lawmine.evaluation import SampleTable
from lawmine.language.semantics import Status, static_status
from lawmine.language.terms import Op, Provenance, Vocabulary

from .candidates import Candidate, CandidateStatus, Side


def _masks(candidate: Candidate, table: SampleTable):
    """(antecedent fires, some non-slot consequent holds) over rows where every variable is defined"""
    evaluable = table.defined_mask(sorted(candidate.variables))
    fires = evaluable.copy()
    for p in candidate.antecedent:
        fires &= table.predicate_mask(p)[0]
    holds = np.zeros(table.row_count, dtype=bool)
    for p in candidate.consequent:
        holds |= table.predicate_mask(p)[0]
    return fires, holds


def refine(candidate: Candidate, table: SampleTable, vocab: Vocabulary) -> Candidate:
    """
    Learned or eliminated form of a live candidate.

    Without a threshold slot the candidate is learned exactly when no row falsifies it. With a slot
    the bound walks its ladder from the current rung, never back, to the tightest rung under which
    every row satisfies the candidate; an exhausted ladder or a vacuous result eliminates it.
    """
    fires, holds = _masks(candidate, table)
    slot = candidate.slot
    if slot is None:
        violated = bool((fires & ~holds).any())
        return candidate.with_status(CandidateStatus.ELIMINATED if violated else CandidateStatus.LEARNED)

    values = table.column(slot.variable).values
    ladder = slot.extended(table.distinct(slot.variable))
    offending = fires & ~holds
    refined = ladder
    if offending.any():
        observed = values[offending].tolist()
        if slot.side is Side.CONSEQUENT:
            # rows the slot alone must cover
            if slot.op is Op.GE:
                bound = min(observed)
                refined = ladder.advance(lambda rung: rung <= bound)
            else:
                bound = max(observed)
                refined = ladder.advance(lambda rung: rung >= bound)
        else:
            # rows the slot must switch the antecedent off for
            if slot.op is Op.GE:
                bound = max(observed)
                refined = ladder.advance(lambda rung: rung > bound)
            else:
                bound = min(observed)
                refined = ladder.advance(lambda rung: rung < bound)

    if refined is None:
        return candidate.with_status(CandidateStatus.ELIMINATED)
    moved = refined.threshold != slot.threshold
    result = replace(
        candidate,
        slot=refined,
        provenance=Provenance.REFINED if moved else candidate.provenance,
    )
    if static_status(result.to_constraint(), vocab) is not Status.CONTINGENT:
        return result.with_status(CandidateStatus.ELIMINATED)
    return result.with_status(CandidateStatus.LEARNED)
