"""Latent-factor extraction from the radio performance matrix.

The pipeline standardizes the performance columns, forms their Pearson
correlation matrix, and factors it by iterative principal-axis extraction:
communalities start at the squared multiple correlation, the reduced
correlation matrix (unit diagonal replaced by communalities) is
eigendecomposed, loadings are rebuilt from the retained eigenpairs, and
uniquenesses are re-estimated until they stabilize.  Factors are retained
while their eigenvalue exceeds a threshold (1.0 by default), re-evaluated
every iteration.  A principal-component variant (no uniqueness subtraction)
and a fixed-factor-count confirmatory fit are provided alongside, plus an
orthogonal varimax rotation and regression-based factor scores.

All operations are deterministic: identical inputs produce bit-identical
models.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

logger = logging.getLogger(__name__)

UNIQUENESS_FLOOR = 1e-4   # Heywood guard: uniquenesses are clamped here
DEFAULT_RETENTION = 1.0   # retain factors with eigenvalue strictly above this
CONVERGENCE_TOL = 1e-6    # max |uniqueness change| between iterations
MAX_ITERATIONS = 1000
RIDGE_CONDITION = 1e12    # add a small ridge to sigma beyond this condition


@dataclass
class CorrelationMatrix:
    """Pearson correlations of the standardized performance columns."""

    sigma: np.ndarray            # (P, P), exactly symmetric, unit diagonal
    labels: list[str]            # kept column labels
    means: np.ndarray            # per kept column
    stds: np.ndarray             # per kept column (ddof=1)
    dropped: list[str] = field(default_factory=list)  # constant columns


@dataclass
class FactorModel:
    """Loadings, uniquenesses, and spectrum of one extraction."""

    method: str                  # "fa" or "pca"
    loadings: np.ndarray         # (P, I)
    uniquenesses: np.ndarray     # (P,)
    eigenvalues: np.ndarray      # (P,) descending, of the final factored matrix
    eigenvectors: np.ndarray     # (P, P) matching columns
    retained: int
    converged: bool
    iterations: int
    residual: np.ndarray         # sigma - loadings @ loadings.T - diag(uniquenesses)
    rotation: str                # "none" or "varimax"
    labels: list[str]
    g_loadings: np.ndarray       # (P,) single-common-factor loading vector
    scores: np.ndarray | None = None    # (N, I), filled by the analyze pipeline
    g_scores: np.ndarray | None = None  # (N,)

    @property
    def communalities(self) -> np.ndarray:
        return (self.loadings ** 2).sum(axis=1)


def correlation(values: np.ndarray, labels: list[str] | None = None) -> CorrelationMatrix:
    """Correlation matrix of the data columns, dropping constant ones.

    Parameters
    ----------
    values : (N, P) array
        One row per radio, one column per (scenario, metric) pair.
    labels : list of str, optional
        Column labels; positional names are generated when omitted.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError("expected a 2-D data matrix")
    N, P = values.shape
    if N < 2:
        raise ValueError(f"need at least 2 rows to correlate, got {N}")
    if labels is None:
        labels = [f"col{j}" for j in range(P)]
    stds = values.std(axis=0, ddof=1)
    keep = stds > 0
    dropped = [labels[j] for j in range(P) if not keep[j]]
    if dropped:
        warnings.warn(f"dropping {len(dropped)} constant column(s): {dropped}",
                      stacklevel=2)
    kept = values[:, keep]
    sigma = np.corrcoef(kept, rowvar=False)
    sigma = np.atleast_2d(sigma)
    sigma = (sigma + sigma.T) / 2.0
    np.fill_diagonal(sigma, 1.0)
    sigma = np.clip(sigma, -1.0, 1.0)
    return CorrelationMatrix(
        sigma=sigma,
        labels=[l for l, k in zip(labels, keep) if k],
        means=kept.mean(axis=0),
        stds=stds[keep],
        dropped=dropped,
    )


def _as_sigma(sigma) -> np.ndarray:
    if isinstance(sigma, CorrelationMatrix):
        sigma = sigma.sigma
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ValueError("sigma must be a square matrix")
    return (sigma + sigma.T) / 2.0


def _check_psd(sigma: np.ndarray) -> None:
    evals = np.linalg.eigvalsh(sigma)
    floor = -1e-8 * max(1.0, float(evals[-1]))
    if evals[0] < floor:
        raise ValueError(
            f"matrix is not positive semidefinite (min eigenvalue {evals[0]:.3e})")


def _initial_uniqueness(sigma: np.ndarray) -> np.ndarray:
    """Residual variance of each variable given all others (1 - SMC on a
    correlation matrix), with a pseudo-inverse fallback near singularity."""
    try:
        inv_diag = np.diag(np.linalg.inv(sigma))
    except np.linalg.LinAlgError:
        inv_diag = np.diag(np.linalg.pinv(sigma, rcond=1e-10))
    with np.errstate(divide="ignore", invalid="ignore"):
        uniq = 1.0 / inv_diag
    uniq = np.where(np.isfinite(uniq) & (inv_diag > 0), uniq, UNIQUENESS_FLOOR)
    return np.clip(uniq, UNIQUENESS_FLOOR, np.diag(sigma))


def _eigen_descending(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    evals, evecs = np.linalg.eigh(matrix)
    order = np.argsort(evals)[::-1]
    return evals[order], evecs[:, order]


def _loadings_for_count(evals: np.ndarray, evecs: np.ndarray, count: int) -> np.ndarray:
    k = min(count, int((evals > 0).sum()))
    return evecs[:, :k] * np.sqrt(np.maximum(evals[:k], 0.0))


def _fix_column_signs(loadings: np.ndarray) -> np.ndarray:
    """Flip column signs so each column's largest-magnitude entry is positive."""
    if loadings.shape[1] == 0:
        return loadings
    idx = np.abs(loadings).argmax(axis=0)
    signs = np.sign(loadings[idx, np.arange(loadings.shape[1])])
    signs[signs == 0] = 1.0
    return loadings * signs


def extract(sigma, retention: float = DEFAULT_RETENTION,
            force_factors: int | None = None,
            max_iter: int = MAX_ITERATIONS,
            tol: float = CONVERGENCE_TOL,
            with_g: bool = True) -> FactorModel:
    """Iterative principal-factor extraction.

    Alternates eigendecomposition of the reduced matrix (sigma with its
    diagonal replaced by communalities) with uniqueness re-estimation until
    the maximum uniqueness change drops below ``tol``.  Negative eigenvalues
    are clamped to zero.  The retained count is the number of eigenvalues
    strictly above ``retention`` on the first reduced spectrum (initial
    communalities from squared multiple correlations) and is held fixed
    while the uniquenesses converge: re-thresholding inside the loop is
    self-defeating for borderline factors, since dropping one removes its
    own communality contribution and deflates the eigenvalue that justified
    it.  Uniquenesses are clamped into [1e-4, diag] with a warning on
    Heywood cases.  Non-convergence is reported via the model flag, not an
    error.

    Parameters
    ----------
    sigma : CorrelationMatrix or (P, P) array
        Symmetric positive-semidefinite matrix to factor.
    retention : float
        Eigenvalue threshold for keeping a factor (strict inequality).
    force_factors : int, optional
        Fix the retained count directly instead of thresholding (capped at
        the number of positive eigenvalues).
    with_g : bool
        Also run a rank-1 extraction of the same kind to populate the
        single-common-factor loading vector.
    """
    labels = sigma.labels if isinstance(sigma, CorrelationMatrix) else None
    sigma = _as_sigma(sigma)
    _check_psd(sigma)
    P = sigma.shape[0]
    if force_factors is not None and not 1 <= force_factors < P:
        raise ValueError(f"forced factor count must be in [1, {P}), got {force_factors}")
    diag_s = np.diag(sigma).copy()

    uniq = _initial_uniqueness(sigma)
    converged = False
    iterations = 0
    heywood_warned = False
    count = force_factors
    for iterations in range(1, max_iter + 1):
        reduced = sigma.copy()
        np.fill_diagonal(reduced, diag_s - uniq)
        evals, evecs = _eigen_descending(reduced)
        if count is None:
            count = int((evals > retention).sum())
        lam = _loadings_for_count(evals, evecs, count)
        comm = (lam ** 2).sum(axis=1)
        if not heywood_warned and np.any(comm > diag_s + 1e-12):
            logger.warning("Heywood case: %d communalities exceed total variance; "
                           "clamping uniquenesses to %.0e",
                           int((comm > diag_s).sum()), UNIQUENESS_FLOOR)
            heywood_warned = True
        new_uniq = np.clip(diag_s - comm, UNIQUENESS_FLOOR, diag_s)
        delta = float(np.max(np.abs(new_uniq - uniq)))
        uniq = new_uniq
        if delta < tol:
            converged = True
            break

    # final decomposition at the converged uniquenesses
    reduced = sigma.copy()
    np.fill_diagonal(reduced, diag_s - uniq)
    evals, evecs = _eigen_descending(reduced)
    lam = _fix_column_signs(_loadings_for_count(evals, evecs, count))
    residual = sigma - lam @ lam.T - np.diag(uniq)

    if with_g:
        if lam.shape[1] == 1:
            g = lam[:, 0].copy()
        else:
            g_model = extract(sigma, retention=retention, force_factors=1,
                              max_iter=max_iter, tol=tol, with_g=False)
            g = g_model.loadings[:, 0] if g_model.retained else np.zeros(P)
    else:
        g = np.zeros(P)

    return FactorModel(
        method="fa",
        loadings=lam,
        uniquenesses=uniq,
        eigenvalues=np.maximum(evals, 0.0),
        eigenvectors=evecs,
        retained=lam.shape[1],
        converged=converged,
        iterations=iterations,
        residual=residual,
        rotation="none",
        labels=labels if labels is not None else [f"var{j}" for j in range(P)],
        g_loadings=g,
    )


def pca(sigma, retention: float = DEFAULT_RETENTION) -> FactorModel:
    """Principal-component loadings of sigma itself (no uniqueness model)."""
    labels = sigma.labels if isinstance(sigma, CorrelationMatrix) else None
    sigma = _as_sigma(sigma)
    _check_psd(sigma)
    P = sigma.shape[0]
    evals, evecs = _eigen_descending(sigma)
    lam = _fix_column_signs(
        _loadings_for_count(evals, evecs, int((evals > retention).sum())))
    uniq = np.diag(sigma) - (lam ** 2).sum(axis=1)
    g = evecs[:, 0] * np.sqrt(max(evals[0], 0.0))
    if g[np.abs(g).argmax()] < 0:
        g = -g
    return FactorModel(
        method="pca",
        loadings=lam,
        uniquenesses=uniq,
        eigenvalues=np.maximum(evals, 0.0),
        eigenvectors=evecs,
        retained=lam.shape[1],
        converged=True,
        iterations=1,
        residual=sigma - lam @ lam.T - np.diag(uniq),
        rotation="none",
        labels=labels if labels is not None else [f"var{j}" for j in range(P)],
        g_loadings=g,
    )


def varimax_criterion(loadings: np.ndarray) -> float:
    """Raw varimax objective: summed column variance of squared loadings."""
    sq = loadings ** 2
    P = loadings.shape[0]
    return float((sq ** 2).sum(axis=0).sum() / P - ((sq.sum(axis=0) / P) ** 2).sum())


def varimax(loadings: np.ndarray, tol: float = 1e-8,
            max_sweeps: int = 200) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal varimax rotation by pairwise planar rotations.

    Sweeps all column pairs with the closed-form optimal angle until the
    criterion gain of a full sweep falls below ``tol``.  Column signs are
    fixed so each column's largest-magnitude loading is positive.  Returns
    the rotated loadings and the accumulated rotation matrix.
    """
    lam = np.asarray(loadings, dtype=float).copy()
    P, k = lam.shape
    rot = np.eye(k)
    if k < 2:
        return _fix_column_signs(lam), rot
    value = varimax_criterion(lam)
    for _ in range(max_sweeps):
        for p in range(k - 1):
            for q in range(p + 1, k):
                x, y = lam[:, p], lam[:, q]
                u = x ** 2 - y ** 2
                v = 2.0 * x * y
                num = 2.0 * (u * v).sum() - 2.0 * u.sum() * v.sum() / P
                den = (u ** 2 - v ** 2).sum() - (u.sum() ** 2 - v.sum() ** 2) / P
                phi = 0.25 * np.arctan2(num, den)
                if abs(phi) < 1e-12:
                    continue
                c, s = np.cos(phi), np.sin(phi)
                pair = np.array([[c, -s], [s, c]])
                lam[:, [p, q]] = lam[:, [p, q]] @ pair
                rot[:, [p, q]] = rot[:, [p, q]] @ pair
        new_value = varimax_criterion(lam)
        if new_value - value < tol:
            break
        value = new_value
    signs = np.ones(k)
    idx = np.abs(lam).argmax(axis=0)
    signs = np.sign(lam[idx, np.arange(k)])
    signs[signs == 0] = 1.0
    return lam * signs, rot * signs


def factor_scores(y_std: np.ndarray, sigma, loadings: np.ndarray) -> np.ndarray:
    """Regression-method factor scores: y_std @ sigma^-1 @ loadings.

    A 1e-8 ridge is added when sigma's condition number exceeds 1e12.
    """
    sigma = _as_sigma(sigma)
    y_std = np.atleast_2d(np.asarray(y_std, dtype=float))
    if y_std.shape[1] != sigma.shape[0] or loadings.shape[0] != sigma.shape[0]:
        raise ValueError(
            f"dimension mismatch: data {y_std.shape}, sigma {sigma.shape}, "
            f"loadings {loadings.shape}")
    if np.linalg.cond(sigma) > RIDGE_CONDITION:
        sigma = sigma + 1e-8 * np.eye(sigma.shape[0])
    return y_std @ np.linalg.solve(sigma, loadings)


@dataclass
class FitReport:
    """Confirmatory check of a hypothesized factor count."""

    n_factors: int
    rmsr: float                 # root mean square off-diagonal residual
    explained_variance: float   # top-n share of the initial spectrum
    converged: bool
    iterations: int


def offdiag_rmsr(residual: np.ndarray) -> float:
    P = residual.shape[0]
    if P < 2:
        return 0.0
    mask = ~np.eye(P, dtype=bool)
    return float(np.sqrt((residual[mask] ** 2).mean()))


def confirmatory_fit(sigma, n_factors: int) -> FitReport:
    """Fit with the retained count forced to ``n_factors`` and report the
    off-diagonal residual RMSR plus the share of total variance carried by
    the top ``n_factors`` eigenvalues of sigma itself."""
    sigma_m = _as_sigma(sigma)
    P = sigma_m.shape[0]
    if not 1 <= n_factors < P:
        raise ValueError(f"hypothesized factor count must be in [1, {P})")
    model = extract(sigma_m, force_factors=n_factors, with_g=False)
    evals = np.maximum(_eigen_descending(sigma_m)[0], 0.0)
    explained = float(evals[:n_factors].sum() / np.trace(sigma_m))
    return FitReport(
        n_factors=n_factors,
        rmsr=offdiag_rmsr(model.residual),
        explained_variance=explained,
        converged=model.converged,
        iterations=model.iterations,
    )


def congruence_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tucker congruence (cosine) between all column pairs of two loading
    matrices with matching row dimension."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    na = np.linalg.norm(a, axis=0)
    nb = np.linalg.norm(b, axis=0)
    na[na == 0] = 1.0
    nb[nb == 0] = 1.0
    return (a / na).T @ (b / nb)


def align_loadings(estimated: np.ndarray, reference: np.ndarray
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Permute and sign-flip estimated columns to best match the reference.

    Returns the aligned loadings and the per-factor congruences after
    alignment.  Requires equal column counts.
    """
    if estimated.shape != reference.shape:
        raise ValueError("aligned comparison needs equal shapes")
    cong = congruence_matrix(estimated, reference)
    rows, cols = linear_sum_assignment(-np.abs(cong))
    perm = np.empty_like(rows)
    perm[cols] = rows
    aligned = estimated[:, perm]
    signs = np.sign(np.diag(congruence_matrix(aligned, reference)))
    signs[signs == 0] = 1.0
    aligned = aligned * signs
    return aligned, np.diag(congruence_matrix(aligned, reference))
