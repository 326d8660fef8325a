"""Pure numpy versions of the fitness hot loops (fallback when the extension is absent)."""

import numpy as np


def term_coefficients(S, TS, X):
    """Evaluate every chromosome row at every data point.

    S: (P, T, K) presence genes, TS: (P, T) selectors, X: (D, K) positive values.
    Returns (coef, mag), both (P, D): the signed row sums and the sums of
    absolute term values (used to tell structural zeros from cancellation).
    """
    P, T, K = S.shape
    D = X.shape[0]
    coef = np.zeros((P, D))
    mag = np.zeros((P, D))
    p_idx, t_idx = np.nonzero(TS)
    if p_idx.size == 0:
        return coef, mag
    vals = np.exp(S[p_idx, t_idx].astype(float) @ np.log(X).T)
    np.add.at(coef, p_idx, TS[p_idx, t_idx, None] * vals)
    np.add.at(mag, p_idx, vals)
    return coef, mag


def response_error_sum(num, den, s, exact_h, clamp):
    """Sum over (d, c) of |dB error| + |phase error|, singular points clamped.

    num: (M+1, D), den: (N+1, D) real coefficients; s: (C,) complex grid;
    exact_h: (D, C) exact responses.
    """
    num_s = num.T @ (s[None, :] ** np.arange(num.shape[0])[:, None])
    den_s = den.T @ (s[None, :] ** np.arange(den.shape[0])[:, None])
    with np.errstate(all="ignore"):
        ratio = num_s / (den_s * exact_h)
        err = np.abs(20.0 * np.log10(np.abs(ratio))) + np.abs(np.angle(ratio))
    bad = (np.abs(den_s) < 1e-300) | ~np.isfinite(err)
    err[bad] = clamp
    return float(err.sum())


def greedy_match(simp, exact, scale):
    """Greedy one-to-one matching by relative distance, per row.

    simp: (D, ns) complex, nan where a row has fewer roots; exact: (D, ne);
    scale: (D, ne) positive. Returns (D, ne) relative errors, 1.0 where an
    exact root is left unmatched. Ties go to the lowest (simplified, exact)
    index pair.
    """
    D, ne = exact.shape
    errs = np.ones((D, ne))
    if ne == 0 or simp.shape[1] == 0:
        return errs
    with np.errstate(invalid="ignore"):
        rel = np.abs(simp[:, :, None] - exact[:, None, :]) / scale[:, None, :]
    rel[~np.isfinite(simp)] = np.inf
    rows = np.arange(D)
    for _ in range(min(simp.shape[1], ne)):
        flat = rel.reshape(D, -1)
        k = np.argmin(flat, axis=1)
        best = flat[rows, k]
        i, j = np.divmod(k, ne)
        ok = np.isfinite(best)
        errs[rows[ok], j[ok]] = best[ok]
        rel[rows, i, :] = np.inf
        rel[rows, :, j] = np.inf
    return errs
