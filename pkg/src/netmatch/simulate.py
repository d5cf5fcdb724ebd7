"""Sampling of outcomes, covariates, and the random network.

One draw produces i.i.d. latent types w_i uniform on [0, 1], covariates
x_i = m(w_i) + Gaussian noise, outcomes y_i = x_i beta + influence(w_i) +
noise, and an adjacency matrix whose upper-triangle entries are independent
Bernoulli trials with success probability f(w_i, w_j).

Reproducibility: all randomness flows through one counter-based Philox
generator keyed by the seed (numpy's Philox4x32-10). Draw order is fixed:
types, covariate noise, outcome noise, then link uniforms in row blocks of
:data:`_ROW_BLOCK` rows. Identical seeds give bit-identical samples on a
given platform; the pinned algorithm makes results statistically
reproducible across languages that ship Philox.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import io
from .exceptions import InputDataError
from .graphon import GraphonSpec, QuadratureGrid, cell_index, default_grid, eval_graphon, peer_effect_influence
from .validation import as_vector, check_adjacency

RNG_ALGORITHM = "numpy-philox4x32-10"
_ROW_BLOCK = 1024


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator keyed by a 64-bit seed (negatives wrap)."""
    return np.random.Generator(np.random.Philox(key=np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)))


@dataclass(frozen=True, eq=False)
class CovariateMean:
    """Polynomial conditional mean of the covariates given the latent type.

    m(w) = intercept + slope * w + curvature * w^2, coordinatewise over the
    k covariates. Covers the built-in constant, linear, and quadratic shapes.
    """

    intercept: np.ndarray
    slope: np.ndarray
    curvature: np.ndarray

    def __post_init__(self):
        intercept = np.atleast_1d(np.asarray(self.intercept, dtype=float))
        slope = as_vector(self.slope, "slope", intercept.shape[0])
        curvature = as_vector(self.curvature, "curvature", intercept.shape[0])
        object.__setattr__(self, "intercept", intercept)
        object.__setattr__(self, "slope", slope)
        object.__setattr__(self, "curvature", curvature)

    @property
    def n_features(self) -> int:
        return self.intercept.shape[0]

    def __call__(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)[..., None]
        return self.intercept + self.slope * w + self.curvature * w**2

    @classmethod
    def constant(cls, values) -> "CovariateMean":
        values = np.atleast_1d(np.asarray(values, dtype=float))
        zero = np.zeros_like(values)
        return cls(values, zero, zero)

    @classmethod
    def linear(cls, intercept, slope) -> "CovariateMean":
        intercept = np.atleast_1d(np.asarray(intercept, dtype=float))
        return cls(intercept, slope, np.zeros_like(intercept))

    @classmethod
    def quadratic(cls, intercept, slope, curvature) -> "CovariateMean":
        return cls(intercept, slope, curvature)

    def to_json_dict(self) -> dict:
        return {
            "intercept": self.intercept.tolist(),
            "slope": self.slope.tolist(),
            "curvature": self.curvature.tolist(),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "CovariateMean":
        return cls(data["intercept"], data["slope"], data["curvature"])


@dataclass(frozen=True)
class ZeroInfluence:
    """No social influence."""

    kind = "zero"


@dataclass(frozen=True, eq=False)
class BlockLevelInfluence:
    """One influence level per blockmodel cell; requires a blockmodel graphon."""

    levels: np.ndarray
    kind = "block_levels"

    def __post_init__(self):
        object.__setattr__(self, "levels", as_vector(self.levels, "levels"))


@dataclass(frozen=True)
class LinearInfluence:
    """Influence linear in the latent type: slope * w."""

    slope: float
    kind = "linear_in_type"


@dataclass(frozen=True, eq=False)
class PeerInfluence:
    """Peer effects: contextual . E[x_j | link] + endogenous * E[y_j | link].

    The endogenous coefficient must satisfy |value| < 1 so the implied fixed
    point contracts.
    """

    contextual: np.ndarray
    endogenous: float
    kind = "peer_effects"

    def __post_init__(self):
        object.__setattr__(self, "contextual", as_vector(self.contextual, "contextual"))
        if abs(self.endogenous) >= 1.0:
            raise ValueError("endogenous peer coefficient must satisfy |value| < 1")


InfluenceSpec = Union[ZeroInfluence, BlockLevelInfluence, LinearInfluence, PeerInfluence]


def _influence_from_json(data: dict) -> InfluenceSpec:
    kind = data.get("kind", "zero")
    if kind == "zero":
        return ZeroInfluence()
    if kind == "block_levels":
        return BlockLevelInfluence(levels=data["levels"])
    if kind == "linear_in_type":
        return LinearInfluence(slope=float(data["slope"]))
    if kind == "peer_effects":
        return PeerInfluence(contextual=data["contextual"], endogenous=float(data["endogenous"]))
    raise ValueError(f"unknown influence kind {kind!r}")


def _influence_to_json(influence: InfluenceSpec) -> dict:
    if isinstance(influence, ZeroInfluence):
        return {"kind": "zero"}
    if isinstance(influence, BlockLevelInfluence):
        return {"kind": "block_levels", "levels": influence.levels.tolist()}
    if isinstance(influence, LinearInfluence):
        return {"kind": "linear_in_type", "slope": influence.slope}
    return {
        "kind": "peer_effects",
        "contextual": influence.contextual.tolist(),
        "endogenous": influence.endogenous,
    }


@dataclass(frozen=True, eq=False)
class OutcomeSpec:
    """Outcome model: y = x beta + influence(w) + noise.

    ``covariate_noise_sd`` must be strictly positive in every coordinate so
    the covariates retain variation not explained by the latent type, which
    the pairwise-difference estimator needs.
    """

    beta: np.ndarray
    influence: InfluenceSpec = field(default_factory=ZeroInfluence)
    covariate_mean: CovariateMean | None = None
    covariate_noise_sd: np.ndarray | None = None
    noise_sd: float = 0.0

    def __post_init__(self):
        beta = as_vector(self.beta, "beta")
        object.__setattr__(self, "beta", beta)
        k = beta.shape[0]
        mean = self.covariate_mean if self.covariate_mean is not None else CovariateMean.linear(np.zeros(k), np.ones(k))
        if mean.n_features != k:
            raise InputDataError(
                f"covariate_mean has {mean.n_features} coordinates but beta has {k}"
            )
        object.__setattr__(self, "covariate_mean", mean)
        sd = self.covariate_noise_sd if self.covariate_noise_sd is not None else np.ones(k)
        sd = as_vector(sd, "covariate_noise_sd", k)
        if np.any(sd <= 0.0):
            raise InputDataError("covariate_noise_sd must be strictly positive in every coordinate")
        object.__setattr__(self, "covariate_noise_sd", sd)
        if self.noise_sd < 0.0:
            raise InputDataError("noise_sd must be nonnegative")
        if isinstance(self.influence, PeerInfluence) and self.influence.contextual.shape[0] != k:
            raise InputDataError("peer-effect contextual coefficients must match beta's length")

    @property
    def n_features(self) -> int:
        return self.beta.shape[0]

    def to_json_dict(self) -> dict:
        return {
            "beta": self.beta.tolist(),
            "influence": _influence_to_json(self.influence),
            "covariate_mean": self.covariate_mean.to_json_dict(),
            "covariate_noise_sd": self.covariate_noise_sd.tolist(),
            "noise_sd": self.noise_sd,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "OutcomeSpec":
        return cls(
            beta=data["beta"],
            influence=_influence_from_json(data.get("influence", {"kind": "zero"})),
            covariate_mean=CovariateMean.from_json_dict(data["covariate_mean"])
            if "covariate_mean" in data
            else None,
            covariate_noise_sd=data.get("covariate_noise_sd"),
            noise_sd=float(data.get("noise_sd", 0.0)),
        )


@dataclass(frozen=True, eq=False)
class Sample:
    """One dataset: outcomes, covariates, adjacency, and optional hidden truth.

    ``latent_types`` and ``social_influence`` are present only for simulated
    samples; ingested real data carries None for both.
    """

    y: np.ndarray
    x: np.ndarray
    adjacency: np.ndarray
    latent_types: np.ndarray | None = None
    social_influence: np.ndarray | None = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        adjacency = check_adjacency(self.adjacency)
        n = y.shape[0]
        if x.shape[0] != n:
            raise InputDataError(f"covariate rows ({x.shape[0]}) do not match outcomes ({n})")
        if adjacency.shape[0] != n:
            raise InputDataError(
                f"adjacency dimension ({adjacency.shape[0]}) does not match outcomes ({n})"
            )
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "adjacency", adjacency)
        for name in ("latent_types", "social_influence"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, as_vector(value, name, n))

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def n_features(self) -> int:
        return self.x.shape[1]


def true_influence(
    graphon: GraphonSpec,
    outcome: OutcomeSpec,
    types,
    grid: QuadratureGrid | None = None,
) -> np.ndarray:
    """Social influence evaluated at the given latent types.

    Peer effects are solved on a quadrature grid and interpolated linearly;
    the fixed point is smooth in the type for smooth graphons, so the
    interpolation error is far below sampling noise.
    """
    w = as_vector(types, "types")
    influence = outcome.influence
    if isinstance(influence, ZeroInfluence):
        return np.zeros(w.shape[0])
    if isinstance(influence, LinearInfluence):
        return influence.slope * w
    if isinstance(influence, BlockLevelInfluence):
        if graphon.kind != "blockmodel":
            raise InputDataError("block-level influence requires a blockmodel graphon")
        if influence.levels.shape[0] != graphon.n_blocks:
            raise InputDataError(
                f"influence has {influence.levels.shape[0]} levels but the graphon has "
                f"{graphon.n_blocks} blocks"
            )
        return influence.levels[cell_index(w, graphon.n_blocks)]
    grid = grid if grid is not None else default_grid(graphon)
    nodes_influence = peer_effect_influence(
        graphon,
        outcome.beta,
        influence.contextual,
        influence.endogenous,
        outcome.covariate_mean,
        grid,
    )
    return np.interp(w, grid.nodes, nodes_influence)


def _draw_adjacency(graphon: GraphonSpec, w: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = w.shape[0]
    adjacency = np.zeros((n, n), dtype=np.int8)
    columns = np.arange(n)[None, :]
    for start in range(0, n, _ROW_BLOCK):
        stop = min(start + _ROW_BLOCK, n)
        link_uniforms = rng.random((stop - start, n))
        probs = eval_graphon(graphon, w[start:stop, None], w[None, :])
        upper = (link_uniforms <= probs) & (columns > np.arange(start, stop)[:, None])
        adjacency[start:stop] = upper
    return adjacency + adjacency.T


def draw_sample(
    graphon: GraphonSpec,
    outcome: OutcomeSpec,
    n: int,
    seed: int,
    influence_grid: QuadratureGrid | None = None,
) -> Sample:
    """Draw a sample of n agents from the outcome and network models.

    Parameters
    ----------
    graphon : GraphonSpec
        Link-probability model generating the adjacency matrix.
    outcome : OutcomeSpec
        Coefficients, influence shape, covariate law, and noise scales.
    n : int
        Number of agents; at least 2.
    seed : int
        64-bit seed for the Philox stream. Identical seeds give
        bit-identical samples.
    influence_grid : QuadratureGrid, optional
        Grid for the peer-effect fixed point; defaults to a grid aligned
        with the graphon's cells.

    Returns
    -------
    Sample
        With ``latent_types`` and ``social_influence`` populated.
    """
    if n < 2:
        raise InputDataError("sample size must be at least 2")
    rng = make_rng(seed)
    w = rng.random(n)
    x = outcome.covariate_mean(w) + rng.standard_normal((n, outcome.n_features)) * outcome.covariate_noise_sd
    noise = rng.standard_normal(n) * outcome.noise_sd
    influence = true_influence(graphon, outcome, w, grid=influence_grid)
    y = x @ outcome.beta + influence + noise
    adjacency = _draw_adjacency(graphon, w, rng)
    return Sample(y=y, x=x, adjacency=adjacency, latent_types=w, social_influence=influence)


def ingest_sample(outcome_path, adjacency_path) -> Sample:
    """Load a sample from an outcome CSV and an adjacency file.

    The outcome CSV must have header ``y,x1,...,xk`` with one row per agent.
    The adjacency file is either a dense CSV of 0/1 entries or an edge list
    with header ``i,j`` and 1-based indices. Hidden truth columns are never
    read: ingested data has no latent types.
    """
    y, x = io.read_outcome_csv(outcome_path)
    adjacency = io.read_adjacency(adjacency_path, n=y.shape[0])
    return Sample(y=y, x=x, adjacency=adjacency)
