"""Myerson payments for the proportional-allocation auction.

The truthful payment for bidder i is ``b_i * q_i(b) - integral_0^{b_i}
q_i(y, b_-i) dy`` where ``q_i`` is the bidder's internal final CTR under the
full allocation recomputed at own bid y. The integrand is smooth between the
bid values where rankings cross, so the integral is evaluated piecewise:
exact summation for the piecewise-constant beta=1 case, adaptive Simpson per
piece otherwise. A uniform-grid trapezoid oracle over the same integrand is
provided for cross-validation in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .allocation import compute_ecpm, gpa_allocate, rank_ads
from .model import AdCandidate, EvalParams, internal_final_pctr

#: Maximum recursion depth of the per-piece adaptive Simpson refinement.
MAX_SIMPSON_DEPTH = 40

#: Samples along each piece used to detect a non-monotone integrand.
_MONOTONE_SAMPLES = 5
_MONOTONE_TOL = 1e-9


@dataclass(frozen=True)
class BidCurvePiece:
    """One bid interval over which bidder i's ranking stays constant.

    ``slot_rank`` is the 1-based slot bidder i occupies on the piece, or
    None when the bidder is not shown there. ``fixed_denominator_terms`` is
    the sum over the *other* shown ads of ``ecpm**alpha`` (constant on the
    piece); for ``alpha == inf`` it degenerates to the maximum of the other
    shown ads' ecpms instead.
    """

    lo: float
    hi: float
    slot_rank: int | None
    fixed_denominator_terms: float


def breakpoints(
    i: int, ads: list[AdCandidate] | tuple[AdCandidate, ...], params: EvalParams
) -> list[float]:
    """Own-bid values in [0, b_i] where bidder i's ranking can change.

    Returns 0, b_i, and every y where ``y * base_ctr_i`` equals another
    ad's bid * base_ctr product. Between consecutive values the ordering of
    all ads is constant. A zero base_ctr yields the single piece [0, b_i].
    """
    b_i = ads[i].bid
    ctr_i = ads[i].base_ctr
    points = {0.0, b_i}
    if ctr_i > 0.0:
        for j, ad in enumerate(ads):
            if j == i:
                continue
            y = ad.bid * ad.base_ctr / ctr_i
            if 0.0 < y < b_i:
                points.add(y)
    return sorted(points)


def bid_curve_pieces(
    i: int, ads: list[AdCandidate] | tuple[AdCandidate, ...], params: EvalParams
) -> list[BidCurvePiece]:
    """Partition [0, b_i] into constant-ranking pieces for bidder i."""
    ads = tuple(ads)
    alpha = params.alpha
    pieces = []
    cuts = breakpoints(i, ads, params)
    for lo, hi in zip(cuts, cuts[1:]):
        if hi <= lo:
            continue
        mid = 0.5 * (lo + hi)
        probe = _with_bid(ads, i, mid)
        ordering = rank_ads(probe, params.max_slots)
        ecpm = compute_ecpm(probe, ordering, params)
        if i in ordering:
            slot: int | None = ordering.index(i) + 1
        else:
            slot = None
        others = [ecpm[j] for j in ordering if j != i]
        if math.isinf(alpha):
            denom = max(others, default=0.0)
        else:
            denom = sum(v**alpha for v in others)
        pieces.append(BidCurvePiece(lo, hi, slot, denom))
    return pieces


def myerson_payment(
    i: int,
    ads: list[AdCandidate] | tuple[AdCandidate, ...],
    params: EvalParams,
    tol: float = 1e-8,
) -> float:
    """Expected truthful payment of bidder i.

    The own-bid integral of the internal final CTR is taken piecewise over
    the ranking breakpoints: each piece uses its own closed-form integrand
    (so values at a breakpoint come from the right-hand piece), integrated
    by adaptive Simpson to an absolute tolerance of ``tol / #pieces``. With
    beta == 1 the integrand is piecewise constant and summed exactly.

    Raises:
        ValueError: if ``tol <= 0``.
        RuntimeError: if the sampled integrand decreases by more than 1e-9
            anywhere ("monotonicity violation") -- the payment formula is
            only truthful for monotone allocations.
    """
    if tol <= 0.0:
        raise ValueError(f"tol must be > 0, got {tol}")
    ads = tuple(ads)
    b_i = ads[i].bid
    if b_i == 0.0 or ads[i].base_ctr == 0.0:
        return 0.0
    ordering_at_bid = rank_ads(ads, params.max_slots)
    if i not in ordering_at_bid:
        # Lowering the own bid can only lower the rank, so q is 0 on [0, b_i].
        return 0.0

    pieces = bid_curve_pieces(i, ads, params)
    if all(p.slot_rank == 1 and p.fixed_denominator_terms == 0.0 for p in pieces):
        # No competing ecpm anywhere on [0, b_i]: q is constant in the own
        # bid and the payment b*q - integral q is exactly zero.
        return 0.0
    q_fns = [_piece_q(piece, ads[i].base_ctr, params) for piece in pieces]
    _check_monotone(pieces, q_fns)

    integral = 0.0
    piece_tol = tol / len(pieces)
    for piece, q in zip(pieces, q_fns):
        if piece.slot_rank is None:
            continue
        if math.isinf(params.alpha):
            # Piecewise-constant integrand: midpoint value is exact.
            integral += q(0.5 * (piece.lo + piece.hi)) * (piece.hi - piece.lo)
        else:
            integral += _adaptive_simpson(q, piece.lo, piece.hi, piece_tol)

    q_at_bid = final_pctr_at_bid(i, ads, params)
    return max(b_i * q_at_bid - integral, 0.0)


def payment_oracle(
    i: int,
    ads: list[AdCandidate] | tuple[AdCandidate, ...],
    params: EvalParams,
    grid_points: int = 100_000,
    return_error_bound: bool = False,
):
    """Trapezoid-rule payment on a uniform own-bid grid; test oracle only.

    Recomputes the full allocation independently at every grid point with
    vectorized ranking, so it shares no code path with the piecewise
    quadrature above. With ``return_error_bound`` the result is a
    ``(payment, bound)`` pair where the bound is ``h/2`` times the sampled
    total variation of the integrand -- an upper estimate of the trapezoid
    discretization error that covers the jump cells at ranking crossings.
    """
    if grid_points < 1_000:
        raise ValueError(f"grid_points must be >= 1000, got {grid_points}")
    ads = tuple(ads)
    n = len(ads)
    b_i = ads[i].bid
    ctr_i = ads[i].base_ctr
    if b_i == 0.0 or ctr_i == 0.0:
        return (0.0, 0.0) if return_error_bound else 0.0

    ys = np.linspace(0.0, b_i, grid_points)
    products = np.array([ad.bid * ad.base_ctr for ad in ads])
    prod_grid = np.broadcast_to(products, (grid_points, n)).copy()
    prod_grid[:, i] = ys * ctr_i

    # Stable sort on descending product reproduces the lower-index tie-break.
    order = np.argsort(-prod_grid, axis=1, kind="stable")
    ranks = np.empty_like(order)
    np.put_along_axis(ranks, order, np.broadcast_to(np.arange(n), (grid_points, n)), axis=1)
    shown = ranks < min(n, params.max_slots)
    ecpm = np.where(shown, prod_grid * params.pos_base**ranks, 0.0)

    if math.isinf(params.alpha):
        top = ecpm.max(axis=1, keepdims=True)
        is_top = (ecpm == top) & (ecpm > 0.0)
        counts = is_top.sum(axis=1)
        prom_i = np.where(counts > 0, is_top[:, i] / np.maximum(counts, 1), 0.0)
    else:
        powered = ecpm**params.alpha
        denom = powered.sum(axis=1)
        prom_i = np.divide(
            powered[:, i], denom, out=np.zeros(grid_points), where=denom > 0.0
        )

    q = np.where(
        shown[:, i], ctr_i * params.pos_base ** ranks[:, i] * prom_i**params.beta, 0.0
    )
    integral = float(np.trapezoid(q, ys))
    payment = max(b_i * float(q[-1]) - integral, 0.0)
    if not return_error_bound:
        return payment
    step = b_i / (grid_points - 1)
    bound = 0.5 * step * float(np.abs(np.diff(q)).sum())
    return payment, bound


def final_pctr_at_bid(
    i: int, ads: tuple[AdCandidate, ...], params: EvalParams
) -> float:
    """Internal final CTR of bidder i under the allocation at the actual bids."""
    ordering = rank_ads(ads, params.max_slots)
    if i not in ordering:
        return 0.0
    ecpm = compute_ecpm(ads, ordering, params)
    prom = gpa_allocate(ecpm, params.alpha)
    return internal_final_pctr(ads[i].base_ctr, ordering.index(i) + 1, prom[i], params)


def _with_bid(ads: tuple[AdCandidate, ...], i: int, bid: float) -> tuple[AdCandidate, ...]:
    return ads[:i] + (replace(ads[i], bid=bid),) + ads[i + 1 :]


def _piece_q(piece: BidCurvePiece, ctr_i: float, params: EvalParams):
    """Closed-form integrand for one piece: y -> final CTR of bidder i."""
    if piece.slot_rank is None:
        return lambda y: 0.0
    pos = params.pos_norm(piece.slot_rank)
    scale = ctr_i * pos
    denom = piece.fixed_denominator_terms
    alpha, beta = params.alpha, params.beta

    if math.isinf(alpha):

        def q(y: float) -> float:
            e = y * ctr_i * pos
            if e > denom:
                return scale
            if e == denom and e > 0.0:
                return scale * 0.5
            return 0.0

        return q

    def q(y: float) -> float:
        e = y * ctr_i * pos
        if denom == 0.0:
            # Sole shown ad on the piece: full prominence in the limit.
            return scale
        if e == 0.0:
            return 0.0
        prom = e**alpha / (e**alpha + denom)
        return scale * prom**beta

    return q


def _check_monotone(pieces: list[BidCurvePiece], q_fns) -> None:
    last = -math.inf
    for piece, q in zip(pieces, q_fns):
        span = piece.hi - piece.lo
        for s in range(_MONOTONE_SAMPLES):
            y = piece.lo + span * s / (_MONOTONE_SAMPLES - 1)
            val = q(y)
            if val < last - _MONOTONE_TOL:
                raise RuntimeError(
                    f"monotonicity violation: integrand drops from {last} to {val} at bid {y}"
                )
            last = val


def _adaptive_simpson(f, lo: float, hi: float, tol: float) -> float:
    fl, fm, fh = f(lo), f(0.5 * (lo + hi)), f(hi)
    whole = (hi - lo) / 6.0 * (fl + 4.0 * fm + fh)
    return _simpson_step(f, lo, hi, fl, fm, fh, whole, tol, MAX_SIMPSON_DEPTH)


def _simpson_step(f, lo, hi, fl, fm, fh, whole, tol, depth):
    mid = 0.5 * (lo + hi)
    lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
    flm, frm = f(lm), f(rm)
    left = (mid - lo) / 6.0 * (fl + 4.0 * flm + fm)
    right = (hi - mid) / 6.0 * (fm + 4.0 * frm + fh)
    err = left + right - whole
    if depth <= 0 or abs(err) <= 15.0 * tol:
        return left + right + err / 15.0
    return _simpson_step(
        f, lo, mid, fl, flm, fm, left, tol / 2.0, depth - 1
    ) + _simpson_step(f, mid, hi, fm, frm, fh, right, tol / 2.0, depth - 1)
