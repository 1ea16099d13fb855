"""Logistic regression by iteratively reweighted least squares, with Wald inference."""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog

MAX_ITER = 100
GRAD_TOL = 1e-8
Z95 = 1.96
INTERCEPT = "(Intercept)"
TERMS = ("Tool", "Static", "Repetition")


class SeparationWarning(UserWarning):
    """The outcome is (quasi-)perfectly separated; no finite MLE exists."""


class SingularDesignError(ValueError):
    def __init__(self, columns: Sequence[str]):
        super().__init__(f"design matrix is singular; collinear column(s): {', '.join(columns)}")
        self.columns = tuple(columns)


@dataclass(frozen=True)
class RegressionFit:
    predictors: tuple[str, ...]
    coefficients: dict[str, float]
    std_errors: dict[str, float]
    p_values: dict[str, float]
    confidence_intervals: dict[str, tuple[float, float]]
    aic: float
    log_likelihood: float
    n_obs: int
    iterations: int
    converged: bool
    separation: bool = False

    def rows(self) -> list[tuple[str, float, float, float, tuple[float, float]]]:
        return [
            (p, self.coefficients[p], self.std_errors[p], self.p_values[p], self.confidence_intervals[p])
            for p in self.predictors
        ]


def _loglik(eta: np.ndarray, y: np.ndarray) -> float:
    # sum y*eta - log(1 + e^eta), overflow-safe
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def _sigmoid(eta: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -eta))


def collinear_columns(X: np.ndarray, names: Sequence[str]) -> list[str]:
    """Columns that add nothing to the rank of the columns before them."""
    bad = []
    kept: list[int] = []
    for j in range(X.shape[1]):
        trial = X[:, kept + [j]]
        if np.linalg.matrix_rank(trial) <= len(kept):
            bad.append(names[j])
        else:
            kept.append(j)
    return bad


def separated(X: np.ndarray, y: np.ndarray, tol: float = 1e-7) -> bool:
    """Whether the outcome is (quasi-)completely separated by the columns of ``X``.

    Separation holds iff some direction ``d`` puts every observation on its
    own outcome's side, ``s_i * x_i.d >= 0`` with ``s_i = +1`` for successes
    and ``-1`` for failures, with at least one strict inequality; then the
    likelihood keeps rising along ``d`` and no finite maximum exists.
    Decided by a linear program over the box ``-1 <= d <= 1``.
    """
    A = X * np.where(y > 0.5, 1.0, -1.0)[:, None]
    res = linprog(
        -A.sum(axis=0),
        A_ub=-A,
        b_ub=np.zeros(len(y)),
        bounds=[(-1.0, 1.0)] * X.shape[1],
        method="highs",
    )
    if res.status != 0:  # pragma: no cover - the box keeps the program bounded and feasible
        raise RuntimeError(f"separation check failed: {res.message}")
    scale = max(1.0, float(np.abs(A).sum()))
    return -res.fun > tol * scale


def fit_matrix(X: np.ndarray, y: np.ndarray, names: Sequence[str]) -> RegressionFit:
    """Maximum-likelihood logistic fit of ``y`` on the columns of ``X``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    if len(names) != k:
        raise ValueError("one name per column required")
    bad = collinear_columns(X, names)
    if bad:
        raise SingularDesignError(bad)

    separation = len(np.unique(y)) < 2 or separated(X, y)
    beta = np.zeros(k)
    converged = False
    it = 0
    if not separation:
        for it in range(1, MAX_ITER + 1):
            p = _sigmoid(X @ beta)
            grad = X.T @ (y - p)
            w = p * (1.0 - p)
            try:
                delta = np.linalg.solve(X.T @ (w[:, None] * X), grad)
            except np.linalg.LinAlgError:
                break
            # the step is taken even once the gradient is small: Newton converges
            # quadratically, so the last step costs nothing and buys full precision
            beta = beta + delta
            if np.linalg.norm(grad) < GRAD_TOL:
                converged = True
                break
        if not converged:
            warnings.warn(f"IRLS did not converge in {MAX_ITER} iterations", RuntimeWarning, stacklevel=2)

    if separation:
        warnings.warn(
            "perfect or quasi-perfect separation: estimates diverge, no finite fit",
            SeparationWarning,
            stacklevel=2,
        )
        nan = float("nan")
        names = tuple(names)
        return RegressionFit(
            names,
            {c: nan for c in names},
            {c: nan for c in names},
            {c: nan for c in names},
            {c: (nan, nan) for c in names},
            nan,
            nan,
            n,
            0,
            False,
            True,
        )

    eta = X @ beta
    p = _sigmoid(eta)
    w = p * (1.0 - p)
    cov = np.linalg.inv(X.T @ (w[:, None] * X))
    se = np.sqrt(np.diag(cov))
    ll = _loglik(eta, y)
    coefs, ses, pvals, cis = {}, {}, {}, {}
    for j, name in enumerate(names):
        b, s = float(beta[j]), float(se[j])
        coefs[name] = b
        ses[name] = s
        pvals[name] = math.erfc(abs(b / s) / math.sqrt(2.0))
        cis[name] = (b - Z95 * s, b + Z95 * s)
    return RegressionFit(tuple(names), coefs, ses, pvals, cis, 2 * k - 2 * ll, ll, n, it, converged, False)


_FORMULA = re.compile(r"^\s*(\w+)\s*~\s*(.+?)\s*$")


def parse_formula(formula: str) -> tuple[str, ...]:
    """Right-hand-side terms of ``Detected ~ A + B``; ``Detected ~ 1`` gives ()."""
    m = _FORMULA.match(formula)
    if not m or m.group(1) not in ("Detected", "Malware"):
        raise ValueError(f"bad formula {formula!r}; expected 'Detected ~ <terms>'")
    rhs = [t.strip() for t in m.group(2).split("+")]
    if rhs == ["1"]:
        return ()
    for t in rhs:
        if t not in TERMS:
            raise ValueError(f"unknown term {t!r}; known terms: {', '.join(TERMS)}")
    if len(set(rhs)) != len(rhs):
        raise ValueError(f"repeated term in {formula!r}")
    return tuple(rhs)


def design_matrix(observations: Iterable, terms: Sequence[str], *, cell_means: bool = False):
    """Encode observations as ``(X, y, names)``.

    Tools use indicator contrasts against the alphabetically first tool
    plus an intercept. With ``cell_means`` the intercept is dropped and every
    tool level gets its own column (requires ``Tool`` among the terms).
    """
    obs = list(observations)
    if not obs:
        raise ValueError("no observations")
    if "Repetition" in terms and any(o.repetition is None for o in obs):
        raise ValueError("Repetition needs per-repetition observations, not repetition unions")
    if cell_means and "Tool" not in terms:
        raise ValueError("cell-means encoding needs the Tool term")
    levels = sorted({o.tool for o in obs})
    names: list[str] = []
    cols: list[list[float]] = []
    if not cell_means:
        names.append(INTERCEPT)
        cols.append([1.0] * len(obs))
    for term in terms:
        if term == "Tool":
            for lvl in levels if cell_means else levels[1:]:
                names.append(f"Tool[{lvl}]")
                cols.append([1.0 if o.tool == lvl else 0.0 for o in obs])
        elif term == "Static":
            names.append("Static")
            cols.append([1.0 if o.static_enabled else 0.0 for o in obs])
        elif term == "Repetition":
            names.append("Repetition")
            cols.append([float(o.repetition) for o in obs])
    X = np.array(cols, dtype=float).T.reshape(len(obs), len(names))
    y = np.array([1.0 if o.detected else 0.0 for o in obs])
    return X, y, names


def fit_logistic(observations: Iterable, formula: str = "Detected ~ Tool + Static + Repetition", *, cell_means: bool = False) -> RegressionFit:
    terms = parse_formula(formula)
    X, y, names = design_matrix(observations, terms, cell_means=cell_means)
    return fit_matrix(X, y, names)
