"""Compare the interaction structure of two polynomials."""

from __future__ import annotations

from .ptf_io import Terms, interaction_supports


def term_overlap(truth: Terms, learned: Terms) -> float:
    """Fraction of the truth's degree-two supports present in learned.

    A truth polynomial without any degree-two term makes the fraction
    vacuous; that case returns 1.0 so a structure-free model matches a
    structure-free truth.
    """
    t = interaction_supports(truth)
    if not t:
        return 1.0
    return len(t & interaction_supports(learned)) / len(t)
