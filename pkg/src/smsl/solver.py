"""Alternating-direction augmented Lagrangian solver for the sketched
multi-view subspace model.

Per outer iteration the blocks are updated in order: the shared coefficient
matrix C, its low-rank auxiliary J, then per view the specific matrix D^s
(Gauss-Seidel: each view sees the freshest D^t of the others), the noise
matrix E^s and its column-sparse auxiliary W^s; finally all multipliers and
the penalty mu. Initialization is all-zero with mu0=1e-5, mu_max=1e5,
rho=1.1, 60 iterations, tolerance 1e-5.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .cube import ViewSet
from .prox import l21_shrink, svt
from .sketch import SketchedDictionary


class SolverError(RuntimeError):
    """Numerical failure (non-finite state) during a solve."""


@dataclass(frozen=True)
class SolverConfig:
    lambda1: float = 1.0
    lambda2: float = 10.0
    lambda3: float = 10.0
    mu0: float = 1e-5
    mu_max: float = 1e5
    rho: float = 1.1
    max_iter: int = 60
    epsilon: float = 1e-5

    def __post_init__(self):
        if min(self.lambda1, self.lambda2, self.lambda3) < 0:
            raise ValueError("lambda weights must be nonnegative")
        if not (0 < self.mu0 <= self.mu_max):
            raise ValueError("need 0 < mu0 <= mu_max")
        if self.rho < 1:
            raise ValueError("rho must be >= 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        # both the ridge and the penalty vanishing makes the D-system singular
        if self.lambda2 == 0 and self.mu0 == 0:
            raise ValueError("lambda2 and mu0 cannot both be zero")


@dataclass
class SolverState:
    """All primal blocks and multipliers; shapes fixed by (L, N, N_H, S)."""

    c: np.ndarray
    j: np.ndarray
    d: list
    e: list
    w: list
    y1: list
    y2: list  # one length-N row per view (column-sum constraint multiplier)
    y3: list
    y4: np.ndarray
    mu: float
    iteration: int = 0
    residual_history: list = field(default_factory=list)


@dataclass(frozen=True)
class SolveResult:
    state: SolverState
    converged: bool
    iterations_run: int
    residual_history: list
    trace: list  # per-iteration (iteration, r1, r2, r3, r4, mu)


def _as_matrices(views) -> list:
    if isinstance(views, ViewSet):
        return views.matrices()
    return [np.asarray(x, dtype=np.float64) for x in views]


def _as_h(h) -> np.ndarray:
    if isinstance(h, SketchedDictionary):
        return h.h
    return np.asarray(h, dtype=np.float64)


def init_state(n_views: int, n_bands: int, n_pixels: int, n_h: int,
               mu0: float) -> SolverState:
    """All-zero starting point."""
    zc = np.zeros((n_h, n_pixels))
    return SolverState(
        c=zc.copy(),
        j=zc.copy(),
        d=[zc.copy() for _ in range(n_views)],
        e=[np.zeros((n_bands, n_pixels)) for _ in range(n_views)],
        w=[np.zeros((n_bands, n_pixels)) for _ in range(n_views)],
        y1=[np.zeros((n_bands, n_pixels)) for _ in range(n_views)],
        y2=[np.zeros(n_pixels) for _ in range(n_views)],
        y3=[np.zeros((n_bands, n_pixels)) for _ in range(n_views)],
        y4=zc.copy(),
        mu=mu0,
    )


def _c_rhs(state: SolverState, xs: list, h: np.ndarray) -> np.ndarray:
    mu = state.mu
    n_h = h.shape[1]
    b = state.j - state.y4 / mu
    for s, x in enumerate(xs):
        b += h.T @ (x - h @ state.d[s] - state.e[s] + state.y1[s] / mu)
        row = state.d[s].sum(axis=0) - 1.0 + state.y2[s] / mu
        b -= np.broadcast_to(row, (n_h, len(row)))
    return b


def _c_system(h: np.ndarray, n_views: int) -> np.ndarray:
    n_h = h.shape[1]
    return n_views * (h.T @ h) + n_views * np.ones((n_h, n_h)) + np.eye(n_h)


def update_c(state: SolverState, views, h) -> np.ndarray:
    """Least-squares block for C: solve A C = B, A = S H'H + S 11' + I."""
    hmat = _as_h(h)
    xs = _as_matrices(views)
    a = _c_system(hmat, len(xs))
    return cho_solve(cho_factor(a), _c_rhs(state, xs, hmat))


def update_j(state: SolverState, cfg: SolverConfig) -> np.ndarray:
    """Low-rank auxiliary: SVT of C + Y4/mu at threshold lambda1/mu."""
    return svt(state.c + state.y4 / state.mu, cfg.lambda1 / state.mu)


def _d_rhs(state: SolverState, xs: list, h: np.ndarray, s: int,
           cfg: SolverConfig) -> np.ndarray:
    mu = state.mu
    n_h = h.shape[1]
    rhs = -cfg.lambda3 * sum(
        np.abs(state.d[t]) for t in range(len(xs)) if t != s
    )
    if np.isscalar(rhs):  # S == 1: empty sum
        rhs = np.zeros_like(state.c)
    rhs = rhs + mu * (h.T @ (xs[s] - h @ state.c - state.e[s] + state.y1[s] / mu))
    row = mu * (state.c.sum(axis=0) - 1.0) + state.y2[s]
    rhs -= np.broadcast_to(row, (n_h, len(row)))
    return rhs


def update_d(state: SolverState, views, h, s: int,
             cfg: SolverConfig) -> np.ndarray:
    """Ridge solve for view s's specific block, clipped to be nonnegative."""
    hmat = _as_h(h)
    xs = _as_matrices(views)
    n_h = hmat.shape[1]
    m = cfg.lambda2 * np.eye(n_h) + state.mu * (
        hmat.T @ hmat + np.ones((n_h, n_h))
    )
    sol = cho_solve(cho_factor(m), _d_rhs(state, xs, hmat, s, cfg))
    return np.maximum(sol, 0.0)


def update_e(state: SolverState, views, h, s: int) -> np.ndarray:
    """Stationary point of the two quadratic penalties tied to E^s."""
    hmat = _as_h(h)
    xs = _as_matrices(views)
    mu = state.mu
    return 0.5 * (
        xs[s] - hmat @ (state.c + state.d[s]) + state.y1[s] / mu
        + state.w[s] - state.y3[s] / mu
    )


def update_w(state: SolverState, s: int) -> np.ndarray:
    """Column-sparse auxiliary: l2,1 shrinkage of E^s + Y3^s/mu at 1/mu."""
    return l21_shrink(state.e[s] + state.y3[s] / state.mu, 1.0 / state.mu)


def update_multipliers(state: SolverState, views, h,
                       cfg: SolverConfig) -> SolverState:
    """Dual ascent on all multipliers, then grow mu (capped at mu_max)."""
    hmat = _as_h(h)
    xs = _as_matrices(views)
    mu = state.mu
    for s, x in enumerate(xs):
        hcd = hmat @ (state.c + state.d[s])
        state.y1[s] = state.y1[s] + mu * (x - hcd - state.e[s])
        state.y2[s] = state.y2[s] + mu * (
            (state.c + state.d[s]).sum(axis=0) - 1.0
        )
        state.y3[s] = state.y3[s] + mu * (state.e[s] - state.w[s])
    state.y4 = state.y4 + mu * (state.c - state.j)
    state.mu = min(cfg.rho * mu, cfg.mu_max)
    return state


def residuals(state: SolverState, views, h) -> tuple:
    """Max-abs feasibility gaps: (data fit, E-W, column sums, C-J)."""
    hmat = _as_h(h)
    xs = _as_matrices(views)
    r1 = r2 = r3 = 0.0
    for s, x in enumerate(xs):
        r1 = max(r1, float(np.abs(x - hmat @ (state.c + state.d[s])
                                  - state.e[s]).max()))
        r2 = max(r2, float(np.abs(state.e[s] - state.w[s]).max()))
        r3 = max(r3, float(np.abs((state.c + state.d[s]).sum(axis=0)
                                  - 1.0).max()))
    r4 = float(np.abs(state.c - state.j).max())
    return r1, r2, r3, r4


def _check_finite(state: SolverState, iteration: int) -> None:
    blocks = {"C": [state.c], "J": [state.j], "D": state.d, "E": state.e,
              "W": state.w, "Y1": state.y1, "Y2": state.y2, "Y3": state.y3,
              "Y4": [state.y4]}
    for name, arrs in blocks.items():
        for arr in arrs:
            if not np.all(np.isfinite(arr)):
                raise SolverError(
                    f"non-finite values in {name} at iteration {iteration}"
                )


def solve(views, h, cfg: SolverConfig = SolverConfig()) -> SolveResult:
    """Run the full alternating scheme from the all-zero starting point."""
    hmat = _as_h(h)
    xs = _as_matrices(views)
    n_views = len(xs)
    n_bands, n_pixels = xs[0].shape
    n_h = hmat.shape[1]
    if hmat.shape[0] != n_bands:
        raise ValueError(
            f"dictionary has {hmat.shape[0]} bands, views have {n_bands}"
        )

    state = init_state(n_views, n_bands, n_pixels, n_h, cfg.mu0)
    ht = hmat.T
    hth = ht @ hmat
    ones_nh = np.ones((n_h, n_h))
    cho_a = cho_factor(n_views * hth + n_views * ones_nh + np.eye(n_h))

    converged = False
    trace = []
    for it in range(1, cfg.max_iter + 1):
        state.iteration = it
        mu = state.mu
        state.c = cho_solve(cho_a, _c_rhs(state, xs, hmat))
        state.j = svt(state.c + state.y4 / mu, cfg.lambda1 / mu)

        # the D-system matrix depends only on mu: one factorization per iter
        cho_m = cho_factor(cfg.lambda2 * np.eye(n_h) + mu * (hth + ones_nh))
        for s in range(n_views):
            state.d[s] = np.maximum(
                cho_solve(cho_m, _d_rhs(state, xs, hmat, s, cfg)), 0.0
            )
            state.e[s] = update_e(state, xs, hmat, s)
            state.w[s] = update_w(state, s)

        r = residuals(state, xs, hmat)
        state = update_multipliers(state, xs, hmat, cfg)
        _check_finite(state, it)
        state.residual_history.append(max(r))
        trace.append((it, *r, mu))
        if max(r) < cfg.epsilon:
            converged = True
            break

    return SolveResult(
        state=state,
        converged=converged,
        iterations_run=state.iteration,
        residual_history=list(state.residual_history),
        trace=trace,
    )


def write_trace_csv(trace: list, path: str) -> None:
    """Residual log as CSV (iteration, r1..r4, mu) for convergence plots."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("iteration,r1,r2,r3,r4,mu\n")
        for row in trace:
            it, r1, r2, r3, r4, mu = row
            fh.write(f"{it},{r1!r},{r2!r},{r3!r},{r4!r},{mu!r}\n")
