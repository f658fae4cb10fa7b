"""Welfare-maximizing allocation: ad ordering, proportional prominence, words.

For the factorized CTR model with compression discount ``prominence**beta``
(beta in (0, 1)), the welfare-optimal prominence over the simplex is the
generalized proportional allocation ``prom_i = ecpm_i**alpha / sum_j
ecpm_j**alpha`` with ``alpha = 1/(1-beta)``, and the optimal welfare equals
the alpha-norm of the ecpm vector (Hoelder equality case). Slots are filled
by descending bid*ctr product, which maximizes that norm.
"""

from __future__ import annotations

import math

from .model import AdCandidate, EcpmVector, EvalParams, ProminenceVector


def rank_ads(ads: list[AdCandidate] | tuple[AdCandidate, ...], k: int) -> tuple[int, ...]:
    """Pick and order the shown ads by descending bid * base_ctr.

    Ties break toward the lower input index. Exactly ``min(n, k)`` indices
    are returned, slot 1 first.

    Raises:
        ValueError: on an empty candidate list.
    """
    if not ads:
        raise ValueError("no candidates")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    order = sorted(range(len(ads)), key=lambda i: (-ads[i].bid * ads[i].base_ctr, i))
    return tuple(order[: min(len(ads), k)])


def compute_ecpm(
    ads: list[AdCandidate] | tuple[AdCandidate, ...],
    ordering: tuple[int, ...],
    params: EvalParams,
) -> EcpmVector:
    """Per-ad ecpm under an ordering: bid * base_ctr * pos discount, 0 if unshown."""
    values = [0.0] * len(ads)
    for slot, i in enumerate(ordering, start=1):
        values[i] = ads[i].bid * ads[i].base_ctr * params.pos_norm(slot)
    return EcpmVector(tuple(values))


def gpa_allocate(ecpm: EcpmVector, alpha: float) -> ProminenceVector:
    """Generalized proportional allocation of prominence.

    For finite alpha, ``prom_i = ecpm_i**alpha / sum_j ecpm_j**alpha``; the
    entries are computed on ecpms normalized by their maximum, which keeps
    the allocation exactly invariant to rescaling all bids and avoids
    overflow for large alpha. For ``alpha == inf`` the whole weight goes to
    the maximum-ecpm ad, split equally among exact ties.

    Raises:
        ValueError: if every ecpm entry is zero, or alpha <= 1.
    """
    if not math.isinf(alpha) and alpha <= 1.0:
        raise ValueError(f"alpha must be > 1, got {alpha}")
    top = max(ecpm.values, default=0.0)
    if top == 0.0:
        raise ValueError("degenerate instance: all ecpm entries are zero")
    if math.isinf(alpha):
        ties = [v == top for v in ecpm]
        share = 1.0 / sum(ties)
        return ProminenceVector(tuple(share if t else 0.0 for t in ties))
    powered = [(v / top) ** alpha for v in ecpm]
    total = sum(powered)
    return ProminenceVector(tuple(p / total for p in powered))


def optimal_welfare(ecpm: EcpmVector, beta: float) -> float:
    """Optimal internal welfare over the simplex: the alpha-norm of ecpm.

    With compression exponent ``beta`` in (0, 1) and ``alpha = 1/(1-beta)``,
    returns ``(sum_i ecpm_i**alpha) ** (1/alpha)``. This equals the welfare
    ``sum_i ecpm_i * prom_i**beta`` attained at the proportional allocation.
    Callers working at beta == 1 should use ``max(ecpm)`` directly.

    Raises:
        ValueError: if beta is outside (0, 1) or all ecpm entries are zero.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must be in (0, 1), got {beta}")
    alpha = 1.0 / (1.0 - beta)
    top = max(ecpm.values, default=0.0)
    if top == 0.0:
        raise ValueError("degenerate instance: all ecpm entries are zero")
    return top * sum((v / top) ** alpha for v in ecpm) ** (1.0 / alpha)


def words_from_prominence(prom: ProminenceVector, word_limit: int) -> tuple[int, ...]:
    """Turn prominence weights into whole word budgets.

    Largest-remainder apportionment of ``round(word_limit * sum(prom))``
    words: each ad starts from the floor of its share and the leftover words
    go one each to the largest fractional parts (ties to the lower index).
    An ad whose share comes to less than one whole word cannot be rendered
    at all, so it is dropped and its share redistributed proportionally over
    the remaining ads (smallest share dropped first, ties to the higher
    index) before apportionment. The budgets never total more than
    ``word_limit`` when the weights sum to at most 1.
    """
    if word_limit < 0:
        raise ValueError(f"word_limit must be >= 0, got {word_limit}")
    n = len(prom)
    total_words = math.floor(word_limit * sum(prom.weights) + 0.5)
    budgets = [0] * n
    if total_words == 0:
        return tuple(budgets)

    active = [i for i in range(n) if prom[i] > 0.0]
    while active:
        mass = sum(prom[i] for i in active)
        shares = {i: prom[i] / mass * total_words for i in active}
        below = [i for i in active if shares[i] < 1.0]
        if not below or len(active) == 1:
            break
        victim = min(below, key=lambda i: (shares[i], -i))
        active.remove(victim)

    floors = {i: math.floor(shares[i]) for i in active}
    leftover = total_words - sum(floors.values())
    by_fraction = sorted(active, key=lambda i: (-(shares[i] - floors[i]), i))
    for i in active:
        budgets[i] = floors[i]
    for i in by_fraction[:leftover]:
        budgets[i] += 1
    return tuple(budgets)
