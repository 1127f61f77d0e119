"""Training backends that produce a LearnedAdditiveModel from samples.

Two backends share the same contract: fit class labels on 0/1 feature
rows, keep main effects for every feature plus a fixed budget of feature
pairs, and hand back exact polynomial coefficients of the decision
function.

``ebm``
    The reference trainer, ExplainableBoostingClassifier from the
    ``interpret`` library.  Raises TrainingBackendUnavailable when that
    library is not installed.

``hgb``
    A substitute built on scikit-learn's HistGradientBoostingClassifier.
    Interaction constraints restrict every tree to a single feature
    (stage one) or to a single feature or allowed pair (stage two), so
    the boosted sum is multilinear of degree at most two on binary
    inputs.  Pairs are chosen by screening stage-one residuals: for each
    pair the four cell means of the residual form a second difference
    whose square, weighted by the effective cell count, ranks candidate
    interactions.

Both backends finish with the same corner-evaluation distillation and
reject any decision function that is not quadratic over the allowed
pairs.
"""

from __future__ import annotations

from typing import List, Sequence, Tuple

import numpy as np

from .errors import InputError, TrainingBackendUnavailable
from .model import LearnedAdditiveModel, Pair, distill_quadratic

STRAY_TOLERANCE = 1e-9


def _validate_xy(X: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] == 0:
        raise InputError("X must be a nonempty (rows, features) matrix")
    if y.shape != (X.shape[0],):
        raise InputError("y must hold one label per row")
    if not np.isin(X, (0, 1)).all():
        raise InputError("features must be binary 0/1")
    if not np.isin(y, (0, 1)).all():
        raise InputError("labels must be binary 0/1")
    return X.astype(np.float64), y.astype(np.int64)


def screen_pairs(
    X: np.ndarray, residual: np.ndarray, budget: int
) -> List[Pair]:
    """Rank all feature pairs by the squared residual second difference.

    The score for pair (i, j) is delta**2 * n_eff where delta is
    mean(r | 11) - mean(r | 10) - mean(r | 01) + mean(r | 00) and n_eff
    is the harmonic mean based effective count of the four cells.  Pairs
    with an empty cell score zero.  Ties break on the index pair, so the
    ranking is deterministic.
    """
    n = X.shape[1]
    if budget < 0 or budget > n * (n - 1) // 2:
        raise InputError(f"budget {budget} out of range for {n} features")
    scored = []
    for i in range(n):
        xi = X[:, i].astype(bool)
        for j in range(i + 1, n):
            xj = X[:, j].astype(bool)
            delta = 0.0
            inv = 0.0
            empty = False
            for bi, bj, sign in ((1, 1, 1.0), (1, 0, -1.0), (0, 1, -1.0), (0, 0, 1.0)):
                cell = (xi == bool(bi)) & (xj == bool(bj))
                cnt = int(cell.sum())
                if cnt == 0:
                    empty = True
                    break
                delta += sign * float(residual[cell].mean())
                inv += 1.0 / cnt
            score = 0.0 if empty else delta * delta / inv
            scored.append((-score, i, j))
    scored.sort()
    return [(i, j) for _, i, j in scored[:budget]]


def _distill(decision_function, n: int, chosen: Sequence[Pair]) -> LearnedAdditiveModel:
    c0, a, b = distill_quadratic(decision_function, n)
    allowed = {tuple(sorted(p)) for p in chosen}
    stray = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in allowed:
                stray = max(stray, abs(float(b[i, j])))
    if stray > STRAY_TOLERANCE:
        raise InputError(
            f"decision function carries weight {stray:.3g} on a pair outside "
            "the allowed set; the backend violated its interaction constraints"
        )
    pairs = {(i, j): float(b[i, j]) for i, j in sorted(allowed)}
    return LearnedAdditiveModel(n, c0, tuple(float(v) for v in a), pairs)


def _fit_hgb(X: np.ndarray, y: np.ndarray, interactions: int, seed: int) -> LearnedAdditiveModel:
    from sklearn.ensemble import HistGradientBoostingClassifier

    n = X.shape[1]
    singletons = [[i] for i in range(n)]
    mains = HistGradientBoostingClassifier(
        interaction_cst=singletons, random_state=seed
    )
    mains.fit(X, y)
    if interactions == 0:
        return _distill(mains.decision_function, n, [])
    margin = mains.decision_function(X)
    residual = y - 1.0 / (1.0 + np.exp(-margin))
    chosen = screen_pairs(X, residual, interactions)
    final = HistGradientBoostingClassifier(
        interaction_cst=singletons + [list(p) for p in chosen], random_state=seed
    )
    final.fit(X, y)
    return _distill(final.decision_function, n, chosen)


def _fit_ebm(X: np.ndarray, y: np.ndarray, interactions: int, seed: int) -> LearnedAdditiveModel:
    try:
        from interpret.glassbox import ExplainableBoostingClassifier
    except ImportError as exc:
        raise TrainingBackendUnavailable(
            "backend 'ebm' needs the 'interpret' library, which is not "
            "installed; pip install interpret, or use backend 'hgb'"
        ) from exc

    n = X.shape[1]
    ebm = ExplainableBoostingClassifier(interactions=interactions, random_state=seed)
    ebm.fit(X, y)

    def decision(rows: np.ndarray) -> np.ndarray:
        return np.asarray(ebm.decision_function(rows), dtype=float)

    chosen = [
        tuple(sorted(tf))
        for tf in getattr(ebm, "term_features_", [])
        if len(tf) == 2
    ]
    if not chosen:
        _, _, b = distill_quadratic(decision, n)
        chosen = [
            (i, j) for i in range(n) for j in range(i + 1, n) if b[i, j] != 0.0
        ]
    return _distill(decision, n, chosen)


def fit(
    X: np.ndarray,
    y: np.ndarray,
    interactions: int = 12,
    seed: int = 0,
    backend: str = "hgb",
) -> LearnedAdditiveModel:
    """Train on 0/1 rows and return the distilled additive model.

    The result carries exactly ``interactions`` pair weights (the ebm
    backend may select fewer when its own search stops early).
    """
    X, y = _validate_xy(X, y)
    if backend == "hgb":
        model = _fit_hgb(X, y, interactions, seed)
    elif backend == "ebm":
        model = _fit_ebm(X, y, interactions, seed)
    else:
        raise InputError(f"unknown backend {backend!r}; expected 'hgb' or 'ebm'")
    if backend == "hgb" and len(model.pairs) != interactions:
        raise InputError(
            f"expected {interactions} interaction pairs, got {len(model.pairs)}"
        )
    return model
