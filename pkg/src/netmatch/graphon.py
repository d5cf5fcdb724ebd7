"""Graphon link models and their population-level geometry.

A graphon is a symmetric measurable function f: [0,1]^2 -> [0,1] giving the
probability that two agents with latent types u and v form a link. This
module evaluates the built-in graphon families and computes, by quadrature:

- an agent's link function f(u, .) and codegree function
  p(u, t) = integral of f(u, s) f(t, s) ds, the profile of shared-neighbor
  probabilities;
- the network distance d(u, v) = ||f(u,.) - f(v,.)||_2 and the codegree
  distance delta(u, v) = ||p(u,.) - p(v,.)||_2;
- population network statistics (degree, average peers' characteristics,
  clustering) and the fixed point of peer-effect social influence.

It also verifies, numerically, the two inequalities that make codegree
distance a usable stand-in for network distance:

- contraction: delta(u, v) <= d(u, v) for every pair;
- inversion: d(u, v) <= 2 C^{1/(2+4a)} delta(u, v)^{a/(1+2a)} whenever the
  link functions satisfy a Holder-type regularity with constants (a, C),
  which :func:`certify_holder_constants` certifies by grid search.

All distances here share one discrete quadrature measure. That matters: under
any common discrete measure the contraction inequality holds exactly (it is
Cauchy-Schwarz plus the fact that f is bounded by one), so bound checks are
not at the mercy of quadrature error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .quadrature import DEFAULT_NODES, QuadratureGrid
from .validation import check_unit_interval

GRAPHON_KINDS = ("blockmodel", "homophily", "additive_logistic", "grid")


def _check_probability_matrix(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValueError(f"{name} must be a nonempty square matrix")
    if not np.array_equal(arr, arr.T):
        raise ValueError(f"{name} must be symmetric")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError(f"{name} entries must lie in [0, 1]")
    return arr


@dataclass(frozen=True, eq=False)
class GraphonSpec:
    """A link-probability model on [0,1]^2.

    Supported kinds:

    - ``"blockmodel"``: piecewise constant on ``n_blocks`` equal-width cells,
      with symmetric link-probability matrix ``block_probs``;
    - ``"homophily"``: f(u, v) = 1 - (u - v)^2;
    - ``"additive_logistic"``: f(u, v) = 1 / (1 + exp(-(u + v)));
    - ``"grid"``: piecewise constant on equal-width cells with a symmetric
      matrix of ``values`` (row-major in the JSON form).

    ``sparsity_scale`` in (0, 1] multiplies the link probability pointwise,
    thinning the network without changing its shape.
    """

    kind: str
    block_probs: np.ndarray | None = None
    values: np.ndarray | None = None
    sparsity_scale: float = 1.0

    def __post_init__(self):
        if self.kind not in GRAPHON_KINDS:
            raise ValueError(f"unknown graphon kind {self.kind!r}; expected one of {GRAPHON_KINDS}")
        if not 0.0 < self.sparsity_scale <= 1.0:
            raise ValueError("sparsity_scale must lie in (0, 1]")
        if self.kind == "blockmodel":
            if self.block_probs is None:
                raise ValueError("blockmodel requires block_probs")
            object.__setattr__(
                self, "block_probs", _check_probability_matrix(self.block_probs, "block_probs")
            )
        elif self.kind == "grid":
            if self.values is None:
                raise ValueError("grid graphon requires values")
            object.__setattr__(self, "values", _check_probability_matrix(self.values, "values"))

    @classmethod
    def homophily(cls, sparsity_scale: float = 1.0) -> "GraphonSpec":
        return cls(kind="homophily", sparsity_scale=sparsity_scale)

    @classmethod
    def additive_logistic(cls, sparsity_scale: float = 1.0) -> "GraphonSpec":
        return cls(kind="additive_logistic", sparsity_scale=sparsity_scale)

    @classmethod
    def blockmodel(cls, block_probs, sparsity_scale: float = 1.0) -> "GraphonSpec":
        return cls(kind="blockmodel", block_probs=np.asarray(block_probs, dtype=float),
                   sparsity_scale=sparsity_scale)

    @classmethod
    def grid(cls, values, sparsity_scale: float = 1.0) -> "GraphonSpec":
        return cls(kind="grid", values=np.asarray(values, dtype=float),
                   sparsity_scale=sparsity_scale)

    @property
    def n_blocks(self) -> int | None:
        if self.kind == "blockmodel":
            return self.block_probs.shape[0]
        if self.kind == "grid":
            return self.values.shape[0]
        return None

    @property
    def piecewise_constant(self) -> bool:
        return self.kind in ("blockmodel", "grid")

    def cell_edges(self) -> np.ndarray | None:
        """Interior discontinuity locations, or None for smooth kinds."""
        cells = self.n_blocks
        if cells is None or cells == 1:
            return None
        return np.arange(1, cells) / cells

    def to_json_dict(self) -> dict:
        out: dict = {"kind": self.kind, "sparsity_scale": self.sparsity_scale}
        if self.kind == "blockmodel":
            out["block_probs"] = self.block_probs.tolist()
        elif self.kind == "grid":
            out["values"] = self.values.tolist()
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "GraphonSpec":
        if not isinstance(data, dict) or "kind" not in data:
            raise ValueError("graphon specification must be an object with a 'kind' field")
        kind = data["kind"]
        scale = float(data.get("sparsity_scale", 1.0))
        if kind == "blockmodel":
            return cls.blockmodel(data["block_probs"], sparsity_scale=scale)
        if kind == "grid":
            return cls.grid(data["values"], sparsity_scale=scale)
        return cls(kind=kind, sparsity_scale=scale)


def cell_index(u, n_cells: int) -> np.ndarray:
    """Zero-based equal-width cell index, mapping u=1 into the last cell."""
    idx = np.floor(np.asarray(u, dtype=float) * n_cells).astype(int)
    return np.minimum(idx, n_cells - 1)


def eval_graphon(spec: GraphonSpec, u, v):
    """Link probability f(u, v), scaled by the sparsity factor.

    Scalar inputs give a float; array inputs broadcast. Raises ValueError
    when an argument leaves [0, 1].
    """
    uu = check_unit_interval(u, "u")
    vv = check_unit_interval(v, "v")
    uu, vv = np.broadcast_arrays(uu, vv)
    if spec.kind == "homophily":
        out = 1.0 - (uu - vv) ** 2
    elif spec.kind == "additive_logistic":
        out = 1.0 / (1.0 + np.exp(-(uu + vv)))
    elif spec.kind == "blockmodel":
        probs = spec.block_probs
        out = probs[cell_index(uu, probs.shape[0]), cell_index(vv, probs.shape[0])]
    else:
        vals = spec.values
        out = vals[cell_index(uu, vals.shape[0]), cell_index(vv, vals.shape[0])]
    out = out * spec.sparsity_scale
    if np.ndim(u) == 0 and np.ndim(v) == 0:
        return float(out)
    return out


def default_grid(spec: GraphonSpec | None = None, n_nodes: int = DEFAULT_NODES) -> QuadratureGrid:
    """Quadrature grid suited to ``spec``: panel edges aligned with its cells."""
    breakpoints = spec.cell_edges() if spec is not None else None
    return QuadratureGrid.composite_gauss_legendre(n_nodes=n_nodes, breakpoints=breakpoints)


def link_function(spec: GraphonSpec, u, grid: QuadratureGrid) -> np.ndarray:
    """Link probabilities f(u, t) for every grid node t.

    For scalar u returns shape (m,); for a length-q array, shape (q, m).
    """
    uu = check_unit_interval(u, "u")
    return eval_graphon(spec, uu[..., None] if uu.ndim else uu, grid.nodes)


def node_link_matrix(spec: GraphonSpec, grid: QuadratureGrid) -> np.ndarray:
    """Matrix of f evaluated on the grid's node pairs, shape (m, m)."""
    return eval_graphon(spec, grid.nodes[:, None], grid.nodes[None, :])


def codegree_function(spec: GraphonSpec, u, grid: QuadratureGrid) -> np.ndarray:
    """Shared-neighbor probabilities p(u, t) at every grid node t.

    p(u, t) = integral of f(u, s) f(t, s) ds, evaluated as the grid's
    weighted sum. Shapes follow :func:`link_function`.
    """
    fu = link_function(spec, u, grid)
    fg = node_link_matrix(spec, grid)
    return (fu * grid.weights) @ fg


def network_distance(spec: GraphonSpec, u: float, v: float, grid: QuadratureGrid) -> float:
    """L2 distance between the link functions of types u and v."""
    du = link_function(spec, u, grid) - link_function(spec, v, grid)
    return float(np.sqrt(np.dot(du * du, grid.weights)))


def codegree_distance(spec: GraphonSpec, u: float, v: float, grid: QuadratureGrid) -> float:
    """L2 distance between the codegree functions of types u and v."""
    dp = codegree_function(spec, u, grid) - codegree_function(spec, v, grid)
    return float(np.sqrt(np.dot(dp * dp, grid.weights)))


def pair_distances(spec: GraphonSpec, us, vs, grid: QuadratureGrid):
    """Vectorized (codegree, network) distances for arrays of type pairs."""
    us = np.atleast_1d(check_unit_interval(us, "us"))
    vs = np.atleast_1d(check_unit_interval(vs, "vs"))
    if us.shape != vs.shape:
        raise ValueError("us and vs must have matching shapes")
    fu = link_function(spec, us, grid)
    fv = link_function(spec, vs, grid)
    d = np.sqrt(((fu - fv) ** 2) @ grid.weights)
    fg = node_link_matrix(spec, grid)
    dp = ((fu - fv) * grid.weights) @ fg
    delta = np.sqrt((dp * dp) @ grid.weights)
    return delta, d


def type_distance_matrix(spec: GraphonSpec, types, grid: QuadratureGrid) -> np.ndarray:
    """Codegree-distance matrix delta(w_i, w_j) for a vector of latent types.

    Used as the population oracle against which the empirical distance matrix
    is compared. Computed through the Gram matrix of weighted codegree
    profiles, so it costs O(n^2 m) rather than O(n^2 m^2).
    """
    w = np.atleast_1d(check_unit_interval(types, "types"))
    profile = codegree_function(spec, w, grid) * np.sqrt(grid.weights)
    gram = profile @ profile.T
    diag = np.diagonal(gram)
    sq = diag[:, None] - 2.0 * gram + diag[None, :]
    np.fill_diagonal(sq, 0.0)
    return np.sqrt(np.maximum(sq, 0.0))


@dataclass(frozen=True)
class PopulationStatistics:
    """Population analogues of agent-level network statistics.

    ``peer_mean`` and ``clustering`` are None when the degree is zero, in
    which case they are undefined rather than erroneous. ``peer_mean`` is a
    scalar for a single covariate and a vector otherwise.
    """

    degree: float
    peer_mean: np.ndarray | float | None
    clustering: float | None


def population_statistics(
    spec: GraphonSpec,
    u: float,
    covariate_mean: Callable[[np.ndarray], np.ndarray] | None,
    grid: QuadratureGrid,
) -> PopulationStatistics:
    """Degree, average peers' characteristics, and clustering for type u.

    degree = integral of f(u, t) dt;
    peer_mean = integral of m(t) f(u, t) dt / degree for the covariate mean
    function m (omitted when ``covariate_mean`` is None);
    clustering = double integral of f(u, t) f(u, s) f(t, s) dt ds / degree^2.
    """
    fu = link_function(spec, u, grid)
    wfu = fu * grid.weights
    degree = float(wfu.sum())
    if degree <= 0.0:
        return PopulationStatistics(degree=degree, peer_mean=None, clustering=None)
    peer_mean = None
    if covariate_mean is not None:
        m_values = np.asarray(covariate_mean(grid.nodes), dtype=float)
        peer_mean = (wfu @ m_values.reshape(grid.size, -1)) / degree
        if peer_mean.size == 1:
            peer_mean = float(peer_mean[0])
    fg = node_link_matrix(spec, grid)
    clustering = float(wfu @ fg @ wfu) / degree**2
    return PopulationStatistics(degree=degree, peer_mean=peer_mean, clustering=clustering)


def peer_effect_influence(
    spec: GraphonSpec,
    beta,
    contextual,
    endogenous: float,
    covariate_mean: Callable[[np.ndarray], np.ndarray],
    grid: QuadratureGrid,
    tol: float = 1e-10,
    max_iterations: int = 10_000,
) -> np.ndarray:
    """Social influence at the grid nodes under peer effects.

    Solves the fixed point in which an agent's influence is ``contextual``
    times the average covariate mean of its link partners plus ``endogenous``
    times their average expected outcome. Requires |endogenous| < 1 (the
    peer-averaging map is a sup-norm contraction) and positive degree at every
    node. Damped iteration halves the step if the sup-change ever grows.
    """
    if abs(endogenous) >= 1.0:
        raise ValueError("endogenous peer coefficient must satisfy |value| < 1 for contraction")
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    contextual = np.atleast_1d(np.asarray(contextual, dtype=float))
    fg = node_link_matrix(spec, grid)
    degree = fg @ grid.weights
    if degree.min() <= 0.0:
        raise ValueError("peer averaging is undefined at zero-degree types")
    averaging = fg * grid.weights[None, :] / degree[:, None]
    m_values = np.asarray(covariate_mean(grid.nodes), dtype=float).reshape(grid.size, -1)
    peer_m = averaging @ m_values
    base = peer_m @ contextual + endogenous * (peer_m @ beta)

    influence = np.zeros(grid.size)
    damping = 1.0
    previous_change = np.inf
    for _ in range(max_iterations):
        update = base + endogenous * (averaging @ influence)
        step = damping * (update - influence)
        change = float(np.abs(step).max())
        if change > previous_change:
            damping = 0.5
        previous_change = change
        influence = influence + step
        if change < tol:
            return influence
    raise RuntimeError("peer-effect fixed point did not converge")


# ---------------------------------------------------------------------------
# Distance-bound verification


@dataclass(frozen=True)
class HolderConstants:
    """Holder regularity constants (alpha, c) for a graphon's link functions.

    The certified property: for every type u and every eps in [0, 1], the set
    of types v whose link function stays uniformly within eps of u's has
    measure at least (eps / c) ** (1 / alpha).
    """

    alpha: float
    c: float

    def __post_init__(self):
        if self.alpha <= 0 or self.c <= 0:
            raise ValueError("alpha and c must be positive")

    def inversion_bound(self, delta) -> np.ndarray:
        """Upper bound on network distance implied by codegree distance."""
        exponent = self.alpha / (1.0 + 2.0 * self.alpha)
        scale = 2.0 * self.c ** (1.0 / (2.0 + 4.0 * self.alpha))
        return scale * np.asarray(delta, dtype=float) ** exponent


@dataclass(frozen=True, eq=False)
class BoundReport:
    """Per-pair results of a distance-bound sweep.

    ``certified`` is None for checks that need no regularity certificate and
    False when certification failed, in which case no pairs were evaluated
    and the report carries a warning rather than a verdict.
    """

    check: str
    u: np.ndarray
    v: np.ndarray
    delta: np.ndarray
    d: np.ndarray
    bound: np.ndarray
    passed: np.ndarray
    tol: float
    certified: bool | None = None
    holder: HolderConstants | None = None

    @property
    def n_pairs(self) -> int:
        return int(self.u.shape[0])

    @property
    def n_violations(self) -> int:
        return int(np.count_nonzero(~self.passed))

    @property
    def all_passed(self) -> bool:
        return self.n_violations == 0

    def violations(self) -> np.ndarray:
        return np.flatnonzero(~self.passed)

    def tightness_ratios(self) -> np.ndarray:
        """Ratio of each quantity to its bound, over pairs with a positive bound."""
        positive = self.bound > 0
        lhs = self.delta if self.check == "contraction" else self.d
        return lhs[positive] / self.bound[positive]


def _as_pair_arrays(pairs):
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("pairs must be an array of shape (n_pairs, 2)")
    return arr[:, 0], arr[:, 1]


def verify_contraction_bound(
    spec: GraphonSpec,
    pairs,
    grid: QuadratureGrid | None = None,
    tol: float = 1e-8,
) -> BoundReport:
    """Check codegree distance <= network distance over a list of type pairs.

    The tolerance absorbs floating-point noise only; under the shared
    quadrature measure the inequality is exact.
    """
    grid = grid if grid is not None else default_grid(spec)
    us, vs = _as_pair_arrays(pairs)
    delta, d = pair_distances(spec, us, vs, grid)
    return BoundReport(
        check="contraction",
        u=us, v=vs, delta=delta, d=d, bound=d,
        passed=delta <= d + tol,
        tol=tol,
    )


def verify_inversion_bound(
    spec: GraphonSpec,
    pairs,
    grid: QuadratureGrid | None = None,
    holder: HolderConstants | None = None,
    tol: float = 1e-8,
    search_grid_resolution: int = 2001,
) -> BoundReport:
    """Check d <= 2 c^{1/(2+4a)} delta^{a/(1+2a)} with certified (a, c).

    When ``holder`` is omitted the constants are certified by
    :func:`certify_holder_constants` first. If certification fails the report
    carries ``certified=False`` and no per-pair verdicts: the bound's
    hypothesis does not hold, so pass/fail would be meaningless.
    """
    if holder is None:
        holder = certify_holder_constants(spec, search_grid_resolution=search_grid_resolution)
    empty = np.empty(0)
    if holder is None:
        return BoundReport(
            check="inversion",
            u=empty, v=empty, delta=empty, d=empty, bound=empty,
            passed=np.empty(0, dtype=bool),
            tol=tol, certified=False, holder=None,
        )
    grid = grid if grid is not None else default_grid(spec)
    us, vs = _as_pair_arrays(pairs)
    delta, d = pair_distances(spec, us, vs, grid)
    bound = holder.inversion_bound(delta)
    return BoundReport(
        check="inversion",
        u=us, v=vs, delta=delta, d=d, bound=bound,
        passed=d <= bound + tol,
        tol=tol, certified=True, holder=holder,
    )


_HOLDER_ALPHAS = (1.0, 0.5)
_HOLDER_CS = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0)


def certify_holder_constants(
    spec: GraphonSpec,
    search_grid_resolution: int = 2001,
) -> HolderConstants | None:
    """Search for Holder constants (alpha, c) certified by brute-force grids.

    Returns the first pair on a fixed ladder for which every sampled type u
    and threshold eps satisfies: the fraction of grid types v with
    sup_t |f(u,t) - f(v,t)| <= eps is at least (eps/c)^(1/alpha), with a
    safety margin covering grid discretization. Returns None ("not
    certified") for multi-cell piecewise-constant graphons, whose link
    functions jump at cell boundaries, and raises for the grid kind whose
    interpolation offers nothing to certify.

    The certificate is numerical evidence at the search resolution, not a
    proof; downstream inversion-bound sweeps test its consequences directly.
    """
    if spec.kind == "grid":
        raise ValueError("holder certification is unsupported for grid graphons")
    if spec.kind == "blockmodel" and spec.n_blocks >= 2:
        return None
    if search_grid_resolution < 50:
        raise ValueError("search_grid_resolution must be at least 50")

    n_v = search_grid_resolution
    n_tau = max(201, search_grid_resolution // 5)
    n_u = max(51, search_grid_resolution // 20)
    v_grid = np.linspace(0.0, 1.0, n_v)
    tau_grid = np.linspace(0.0, 1.0, n_tau)
    u_grid = np.linspace(0.0, 1.0, n_u)
    f_v = eval_graphon(spec, v_grid[:, None], tau_grid[None, :])

    # sup-distance profile from each sampled u to every v on the search grid
    sup_profiles = np.empty((n_u, n_v))
    for i, u in enumerate(u_grid):
        f_u = eval_graphon(spec, np.full(n_tau, u), tau_grid)
        sup_profiles[i] = np.abs(f_v - f_u[None, :]).max(axis=1)

    # A candidate passes only with a 25% margin over the required measure, so
    # grid discretization cannot certify a constant that holds by a hair. The
    # eps floor keeps the required measure several grid cells wide.
    safety = 1.25
    for alpha in _HOLDER_ALPHAS:
        for c in _HOLDER_CS:
            # keep the required measure at least ~8 grid cells wide:
            # (eps/c)^(1/alpha) >= 8/n_v  <=>  eps >= c (8/n_v)^alpha
            eps_low = max(c * (8.0 / n_v) ** alpha, 1e-3)
            if eps_low >= 1.0:
                continue
            eps_grid = np.geomspace(eps_low, 1.0, 32)
            measures = (sup_profiles[:, :, None] <= eps_grid[None, None, :]).mean(axis=1)
            required = (eps_grid / c) ** (1.0 / alpha)
            if np.all(measures >= safety * required[None, :]):
                return HolderConstants(alpha=alpha, c=c)
    return None
