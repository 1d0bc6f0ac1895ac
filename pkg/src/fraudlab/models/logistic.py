"""L2-regularized logistic regression fit with a limited-memory BFGS
optimizer and strong-Wolfe line search.

Objective: sum_i w_i * logloss_i + (1 / (2 * l2_c)) * ||coef||^2, with the
intercept left unpenalized. Iteration stops when the gradient infinity-norm
falls to tol or after max_iter updates, whichever comes first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from . import common

_LBFGS_MEMORY = 10
_WOLFE_C1 = 1e-4
_WOLFE_C2 = 0.9


@dataclass(frozen=True)
class LogisticParams:
    max_iter: int = 1000
    tol: float = 1e-6
    l2_c: float = 1.0
    fit_intercept: bool = True

    def __post_init__(self) -> None:
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.tol > 0.0:
            raise ConfigError(f"tol must be > 0, got {self.tol}")
        if not self.l2_c > 0.0:
            raise ConfigError(f"l2_c must be > 0, got {self.l2_c}")


@dataclass(frozen=True)
class LogisticModel:
    kind = "logistic"
    params: LogisticParams
    coef: np.ndarray
    intercept: float
    n_iter: int
    converged: bool
    grad_inf_norm: float
    feature_columns: tuple[str, ...] = field(default_factory=common.default_feature_columns)

    @property
    def n_features(self) -> int:
        return int(self.coef.size)

    def predict_proba(self, x) -> np.ndarray:
        x = common.check_predict_input(x, self.n_features)
        return common.sigmoid(x @ self.coef + self.intercept)


def objective_and_grad(theta, x, yf, w, l2_inv, fit_intercept):
    """Weighted penalized log-loss and its gradient at theta = [coef, b?]."""
    f = x.shape[1]
    coef = theta[:f]
    b = theta[f] if fit_intercept else 0.0
    z = x @ coef + b
    obj = float(w @ common.log_loss_terms(z, yf)) \
        + 0.5 * l2_inv * float(coef @ coef)
    r = w * (common.sigmoid(z) - yf)
    grad = np.empty_like(theta)
    grad[:f] = x.T @ r + l2_inv * coef
    if fit_intercept:
        grad[f] = float(r.sum())
    return obj, grad


def _two_loop(grad, s_hist, y_hist, rho_hist):
    """L-BFGS two-loop recursion; returns the approximate Newton direction."""
    q = grad.copy()
    alphas = []
    for s, yv, rho in zip(reversed(s_hist), reversed(y_hist), reversed(rho_hist)):
        a = rho * float(s @ q)
        alphas.append(a)
        q -= a * yv
    if s_hist:
        s, yv = s_hist[-1], y_hist[-1]
        q *= float(s @ yv) / float(yv @ yv)
    for (s, yv, rho), a in zip(zip(s_hist, y_hist, rho_hist), reversed(alphas)):
        b = rho * float(yv @ q)
        q += (a - b) * s
    return -q


def _wolfe_search(fg, theta, d, obj0, grad0, alpha_init):
    """Strong-Wolfe step search (bracket then zoom).

    fg maps alpha to (theta_a, obj_a, grad_a). Returns the accepted
    (alpha, theta, obj, grad) or None when no acceptable step is found.
    """
    dphi0 = float(grad0 @ d)
    if dphi0 >= 0.0:
        return None

    def eval_at(alpha):
        th, ob, gr = fg(alpha)
        return th, ob, gr, float(gr @ d)

    def zoom(lo, hi, data_lo):
        th_best = data_lo
        for _ in range(40):
            a = 0.5 * (lo + hi)
            th, ob, gr, dphi = eval_at(a)
            if ob > obj0 + _WOLFE_C1 * a * dphi0 or ob >= th_best[1]:
                hi = a
            else:
                if abs(dphi) <= -_WOLFE_C2 * dphi0:
                    return a, th, ob, gr
                if dphi * (hi - lo) >= 0.0:
                    hi = lo
                lo = a
                th_best = (th, ob, gr)
            if abs(hi - lo) < 1e-16 * max(1.0, abs(lo)):
                break
        th, ob, gr = th_best
        if ob < obj0:
            return lo, th, ob, gr
        return None

    alpha_prev = 0.0
    data_prev = (theta, obj0, grad0)
    dphi_prev = dphi0
    alpha = alpha_init
    for i in range(30):
        th, ob, gr, dphi = eval_at(alpha)
        if ob > obj0 + _WOLFE_C1 * alpha * dphi0 or (i > 0 and ob >= data_prev[1]):
            return zoom(alpha_prev, alpha, data_prev)
        if abs(dphi) <= -_WOLFE_C2 * dphi0:
            return alpha, th, ob, gr
        if dphi >= 0.0:
            return zoom(alpha, alpha_prev, (th, ob, gr))
        alpha_prev, data_prev, dphi_prev = alpha, (th, ob, gr), dphi
        alpha = min(alpha * 2.0, 1e12)
    return None


def fit_logistic(x, y, weights=None,
                 params: LogisticParams | None = None) -> LogisticModel:
    if params is None:
        params = LogisticParams()
    x, y = common.check_xy(x, y, require_both_classes=True)
    n, f = x.shape
    w = common.check_weights(weights, n)
    yf = y.astype(np.float64)
    l2_inv = 1.0 / params.l2_c
    dim = f + 1 if params.fit_intercept else f

    theta = np.zeros(dim, dtype=np.float64)
    obj, grad = objective_and_grad(theta, x, yf, w, l2_inv, params.fit_intercept)

    s_hist: list[np.ndarray] = []
    y_hist: list[np.ndarray] = []
    rho_hist: list[float] = []
    n_iter = 0

    for it in range(params.max_iter):
        gnorm = float(np.max(np.abs(grad)))
        if gnorm <= params.tol:
            break
        d = _two_loop(grad, s_hist, y_hist, rho_hist)
        if float(grad @ d) >= 0.0:
            # degenerate curvature memory; restart from steepest descent
            s_hist.clear()
            y_hist.clear()
            rho_hist.clear()
            d = -grad
        alpha_init = min(1.0, 1.0 / gnorm) if not s_hist else 1.0

        def fg(alpha, _d=d, _theta=theta):
            th = _theta + alpha * _d
            ob, gr = objective_and_grad(th, x, yf, w, l2_inv,
                                        params.fit_intercept)
            return th, ob, gr

        found = _wolfe_search(fg, theta, d, obj, grad, alpha_init)
        if found is None:
            break
        _, theta_new, obj_new, grad_new = found[0], found[1], found[2], found[3]
        s = theta_new - theta
        yv = grad_new - grad
        sy = float(s @ yv)
        if sy > 1e-12:
            s_hist.append(s)
            y_hist.append(yv)
            rho_hist.append(1.0 / sy)
            if len(s_hist) > _LBFGS_MEMORY:
                s_hist.pop(0)
                y_hist.pop(0)
                rho_hist.pop(0)
        theta, obj, grad = theta_new, obj_new, grad_new
        n_iter = it + 1

    grad_inf = float(np.max(np.abs(grad)))
    coef = theta[:f].copy()
    intercept = float(theta[f]) if params.fit_intercept else 0.0
    return LogisticModel(
        params=params,
        coef=coef,
        intercept=intercept,
        n_iter=n_iter,
        converged=grad_inf <= params.tol,
        grad_inf_norm=grad_inf,
    )
