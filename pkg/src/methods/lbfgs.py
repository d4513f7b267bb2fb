"""Limited-memory BFGS with two-loop recursion and a strong Wolfe line search."""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import line_search

logger = logging.getLogger(__name__)

FunAndGrad = Callable[[np.ndarray], tuple]


@dataclass(frozen=True)
class LbfgsResult:
    """Outcome of one minimization."""

    x: np.ndarray
    fun: float
    grad_norm: float
    iterations: int
    converged: bool
    message: str


class _Cache:
    """Remembers the last evaluation so f and f' share one call."""

    def __init__(self, fun_and_grad: FunAndGrad):
        self.fun_and_grad = fun_and_grad
        self.x = None
        self.value = None

    def __call__(self, x: np.ndarray) -> tuple:
        if self.x is None or not np.array_equal(x, self.x):
            f, g = self.fun_and_grad(x)
            self.x = np.array(x, copy=True)
            self.value = (float(f), np.asarray(g, dtype=float))
        return self.value

    def f(self, x: np.ndarray) -> float:
        return self(x)[0]

    def grad(self, x: np.ndarray) -> np.ndarray:
        return self(x)[1]


def two_loop_direction(grad: np.ndarray, pairs: deque) -> np.ndarray:
    """Return -H grad from the stored (s, y, rho) pairs, oldest first."""
    q = grad.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y

    if pairs:
        s, y, _ = pairs[-1]
        q *= (s @ y) / (y @ y)

    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return -q


class LbfgsOptimizer:
    """Quasi-Newton minimizer for smooth objectives returning (f, grad).

    Stops when ||grad|| <= gtol * (1 + |f|) or after ``max_iter`` iterations.
    """

    def __init__(
        self,
        memory: int = 10,
        max_iter: int = 500,
        gtol: float = 1e-6,
        c1: float = 1e-4,
        c2: float = 0.9,
    ):
        if memory < 1:
            raise ValueError("memory must be at least 1")
        if not 0 < c1 < c2 < 1:
            raise ValueError("line search constants need 0 < c1 < c2 < 1")
        self.memory = memory
        self.max_iter = max_iter
        self.gtol = gtol
        self.c1 = c1
        self.c2 = c2

    def _accepts(self, cache: _Cache, x, f, slope, direction, step) -> bool:
        """Strong Wolfe conditions at ``step``."""
        new_f, new_g = cache(x + step * direction)
        sufficient = new_f <= f + self.c1 * step * slope
        return sufficient and abs(new_g @ direction) <= self.c2 * abs(slope)

    def _secant_step(self, cache: _Cache, x, f, g, direction) -> Optional[float]:
        """Step from the secant on the directional derivative, else the unit step.

        Along a quadratic the secant step is the exact minimizer, which keeps
        the iterates conjugate.
        """
        slope = g @ direction
        _, trial_g = cache(x + direction)
        curvature = trial_g @ direction - slope
        if curvature > 0:
            step = -slope / curvature
            if np.isfinite(step) and self._accepts(cache, x, f, slope, direction, step):
                return step
        if self._accepts(cache, x, f, slope, direction, 1.0):
            return 1.0
        return None

    def _backtrack(self, cache: _Cache, x, f, g, direction) -> float:
        """Armijo backtracking, used when the Wolfe search fails."""
        slope = g @ direction
        step = 1.0
        for _ in range(50):
            if cache.f(x + step * direction) <= f + self.c1 * step * slope:
                return step
            step *= 0.5
        return 0.0

    def minimize(self, fun_and_grad: FunAndGrad, x0: np.ndarray) -> LbfgsResult:
        cache = _Cache(fun_and_grad)
        x = np.asarray(x0, dtype=float).copy()
        f, g = cache(x)
        pairs: deque = deque(maxlen=self.memory)
        gnorm = float(np.linalg.norm(g))

        for iteration in range(self.max_iter + 1):
            if gnorm <= self.gtol * (1.0 + abs(f)):
                return LbfgsResult(x, f, gnorm, iteration, True, "gradient tolerance reached")
            if iteration == self.max_iter:
                break

            direction = two_loop_direction(g, pairs)
            if g @ direction >= 0:
                # Lost descent; restart from steepest descent.
                pairs.clear()
                direction = -g
            if not pairs:
                direction = direction / max(gnorm, 1.0)

            step = self._secant_step(cache, x, f, g, direction)
            if step is None:
                step = line_search(
                    cache.f,
                    cache.grad,
                    x,
                    direction,
                    gfk=g,
                    old_fval=f,
                    c1=self.c1,
                    c2=self.c2,
                )[0]
            if step is None:
                step = self._backtrack(cache, x, f, g, direction)
                if step == 0.0:
                    return LbfgsResult(
                        x, f, gnorm, iteration, False, "line search failed"
                    )
            new_f, new_g = cache(x + step * direction)

            s = step * direction
            x_new = x + s
            y = new_g - g
            sy = s @ y
            if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
                pairs.append((s, y, 1.0 / sy))

            f = float(new_f)
            x, g = x_new, np.asarray(new_g, dtype=float)
            gnorm = float(np.linalg.norm(g))
            logger.debug("L-BFGS iteration %d: f=%.6g |g|=%.3g", iteration + 1, f, gnorm)

        return LbfgsResult(x, f, gnorm, self.max_iter, False, "iteration limit reached")


def minimize_lbfgs(fun_and_grad: FunAndGrad, x0: np.ndarray, **options) -> LbfgsResult:
    """Functional shortcut for ``LbfgsOptimizer(**options).minimize``."""
    return LbfgsOptimizer(**options).minimize(fun_and_grad, x0)
