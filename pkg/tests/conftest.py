"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import math
import random

import numpy as np
import pytest

from adsum.model import AdCandidate, EvalParams, QueryInstance


def ads_from_products(products, ctrs, text_words=40):
    """Ad tuple whose bid * base_ctr equals the given products."""
    return tuple(
        AdCandidate(
            ad_id=f"ad{i}",
            url=f"https://ads.example/fixture/{i}",
            text=" ".join(f"w{t:02d}" for t in range(text_words)),
            bid=p / c,
            base_ctr=c,
        )
        for i, (p, c) in enumerate(zip(products, ctrs))
    )


def random_query(rng: random.Random, n_ads: int | None = None, query_id="q"):
    """Small random auction instance with distinct-ish products."""
    n = n_ads if n_ads is not None else rng.randint(2, 4)
    ads = tuple(
        AdCandidate(
            ad_id=f"{query_id}-ad{j}",
            url=f"https://ads.example/{query_id}/{j}",
            text=" ".join(f"t{j}w{t:02d}" for t in range(rng.randint(20, 50))),
            bid=rng.lognormvariate(0.5, 1.0),
            base_ctr=rng.uniform(0.05, 1.0),
        )
        for j in range(n)
    )
    return QueryInstance(query_id=query_id, query="fixture query", ads=ads)


def grid_welfare_max(ecpm_values, beta: float, target_points: int = 100_000) -> float:
    """Brute-force max of sum_i ecpm_i * w_i**beta over a dense simplex grid.

    Enumerates every composition of G into len(ecpm) parts (the face where
    the weights sum to 1) with G chosen so the grid has at least
    ``target_points`` points. Independent oracle: no proportional-allocation
    math involved.
    """
    e = np.asarray(ecpm_values, dtype=float)
    n = len(e)
    if n == 1:
        return float(e[0])
    if n == 2:
        g = target_points
        a = np.arange(g + 1, dtype=float)
        weights = np.stack([a, g - a], axis=1) / g
    elif n == 3:
        g = math.isqrt(2 * target_points) + 1
        i, j = np.meshgrid(np.arange(g + 1), np.arange(g + 1), indexing="ij")
        keep = i + j <= g
        i, j = i[keep], j[keep]
        weights = np.stack([i, j, g - i - j], axis=1).astype(float) / g
    elif n == 4:
        g = int(round((6 * target_points) ** (1 / 3)))
        while (g + 1) * (g + 2) * (g + 3) // 6 < target_points:
            g += 1
        i, j, k = np.meshgrid(
            np.arange(g + 1), np.arange(g + 1), np.arange(g + 1), indexing="ij"
        )
        keep = i + j + k <= g
        i, j, k = i[keep], j[keep], k[keep]
        weights = np.stack([i, j, k, g - i - j - k], axis=1).astype(float) / g
    else:
        raise ValueError("grid oracle supports n <= 4")
    return float(((weights**beta) @ e).max())


WORKED_PRODUCTS_A = (0.645, 0.641, 0.617)
WORKED_PRODUCTS_B = (0.764, 0.710, 0.113)


@pytest.fixture
def params_half() -> EvalParams:
    return EvalParams(beta=0.5, word_limit=60, pos_base=0.9, max_slots=4)


@pytest.fixture
def query_a(params_half) -> QueryInstance:
    ads = ads_from_products(WORKED_PRODUCTS_A, ctrs=(0.86, 0.82, 0.80))
    return QueryInstance(query_id="qa", query="worked example A", ads=ads)


@pytest.fixture
def query_b(params_half) -> QueryInstance:
    ads = ads_from_products(WORKED_PRODUCTS_B, ctrs=(0.90, 0.85, 0.40))
    return QueryInstance(query_id="qb", query="worked example B", ads=ads)
