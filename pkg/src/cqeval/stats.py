"""Rank correlation, two-sample tests, and significance analysis.

Everything here is implemented directly on numpy arrays rather than routed
through scipy.stats, because the exact variants matter: Spearman as Pearson
over midranks, Kendall tau-b with tie corrections, and two-sample
Kolmogorov-Smirnov / Mann-Whitney p-values that are exact (tie-aware
permutation enumeration) for small samples, with asymptotic fallbacks for
large ones.
"""

from __future__ import annotations

import dataclasses
import itertools
import math

import numpy as np

#: two-sided critical z at alpha = 0.05
Z_CRITICAL = 1.959963984540054

#: exact two-sample p-values while the split count C(n+m, n) is at most this
EXACT_TAIL_LIMIT = 50000


@dataclasses.dataclass(frozen=True)
class CorrelationPair:
    """KROCC/SROCC of one metric against MOS on one database."""

    metric: str
    database: str
    krocc: float
    srocc: float
    n: int


@dataclasses.dataclass(frozen=True)
class BoxplotSummary:
    """Five-number box-plot summary with 1.5*IQR whiskers."""

    q1: float
    median: float
    q3: float
    iqr: float
    lower_whisker: float
    upper_whisker: float
    outliers: tuple[float, ...]


@dataclasses.dataclass(frozen=True)
class SignificanceCodeword:
    """Pairwise superiority symbols for (row metric, column metric).

    One symbol per database, in the order the databases were supplied:
    '1' row statistically better, '0' worse, '-' undecided.
    """

    row_metric: str
    col_metric: str
    symbols: str


def midranks(x) -> np.ndarray:
    """Ranks starting at 1, with tied values given their average rank."""
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(n, dtype=np.float64)
    sx = x[order]
    # boundaries of runs of equal values in the sorted array
    edges = np.flatnonzero(np.diff(sx) != 0) + 1
    starts = np.concatenate(([0], edges))
    stops = np.concatenate((edges, [n]))
    for lo, hi in zip(starts, stops):
        ranks[order[lo:hi]] = 0.5 * (lo + hi - 1) + 1.0
    return ranks


def _check_pair(x, y, min_n=3):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or len(x) != len(y):
        raise ValueError("inputs must be 1-D sequences of equal length")
    if len(x) < min_n:
        raise ValueError(f"need at least {min_n} observations, got {len(x)}")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ValueError("degenerate constant input")
    return x, y


def pearson(x, y) -> float:
    """Plain Pearson correlation coefficient."""
    x, y = _check_pair(x, y)
    dx = x - x.mean()
    dy = y - y.mean()
    denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
    return float(dx @ dy) / denom


def srocc(x, y) -> float:
    """Spearman rank-order correlation: Pearson over midranks."""
    x, y = _check_pair(x, y)
    return pearson(midranks(x), midranks(y))


def krocc(x, y) -> float:
    """Kendall rank-order correlation, tau-b (tie-corrected)."""
    x, y = _check_pair(x, y)
    n = len(x)
    dx = np.sign(x[:, None] - x[None, :])
    dy = np.sign(y[:, None] - y[None, :])
    s = float((dx * dy).sum()) / 2.0  # concordant minus discordant
    n0 = n * (n - 1) / 2.0
    n1 = sum(t * (t - 1) / 2.0 for t in np.unique(x, return_counts=True)[1])
    n2 = sum(t * (t - 1) / 2.0 for t in np.unique(y, return_counts=True)[1])
    return s / math.sqrt((n0 - n1) * (n0 - n2))


def _ecdf_walk(a: np.ndarray, b: np.ndarray) -> int:
    """Max of |i*m - j*n| over the pooled ECDF walk (integer-exact D * n * m)."""
    n, m = len(a), len(b)
    pooled = np.unique(np.concatenate([a, b]))
    i = np.searchsorted(np.sort(a), pooled, side="right")
    j = np.searchsorted(np.sort(b), pooled, side="right")
    return int(np.max(np.abs(i * m - j * n)))


def _split_pools(a: np.ndarray, b: np.ndarray):
    """Yield chunked (first-group, second-group) values over every split.

    Enumerates all C(n+m, n) ways of dealing the pooled observations into
    groups of sizes n and m, in chunks of value arrays shaped (chunk, n)
    and (chunk, m).  Conditioning on the pooled values keeps downstream
    tail probabilities exact in the presence of ties, which closed-form
    tie-free null distributions are not.
    """
    n, m = len(a), len(b)
    pooled = np.sort(np.concatenate([a, b]))
    splits = np.array(list(itertools.combinations(range(n + m), n)), dtype=np.intp)
    # chunked so the broadcast comparisons downstream stay small
    for lo in range(0, len(splits), 2048):
        chunk = splits[lo : lo + 2048]
        va = pooled[chunk]  # (C, n)
        mask = np.ones((len(chunk), n + m), dtype=bool)
        np.put_along_axis(mask, chunk, False, axis=1)
        vb = pooled[np.nonzero(mask)[1].reshape(len(chunk), m)]
        yield va, vb


def _ks_exact_pvalue(a: np.ndarray, b: np.ndarray, d_num: int) -> float:
    """P(D >= d_num/(n*m)) under the null, by exhausting every split."""
    if d_num <= 0:
        return 1.0
    n, m = len(a), len(b)
    thresholds = np.unique(np.concatenate([a, b]))
    hits = 0
    for va, vb in _split_pools(a, b):
        fa = (va[:, :, None] <= thresholds[None, None, :]).sum(axis=1) * m
        fb = (vb[:, :, None] <= thresholds[None, None, :]).sum(axis=1) * n
        d_all = np.abs(fa - fb).max(axis=1)
        hits += int(np.sum(d_all >= d_num))
    return hits / math.comb(n + m, n)


def _mwu_exact_pvalue(a: np.ndarray, b: np.ndarray) -> float:
    """P(|U - n*m/2| >= observed) under the null, by exhausting every split.

    Works on 2*U so every quantity stays integer-exact even with the half
    contribution that tied pairs make to U.
    """
    n, m = len(a), len(b)
    gt = int((a[:, None] > b[None, :]).sum())
    eq = int((a[:, None] == b[None, :]).sum())
    dev_obs = abs(2 * gt + eq - n * m)
    hits = 0
    for va, vb in _split_pools(a, b):
        gt_all = (va[:, :, None] > vb[:, None, :]).sum(axis=(1, 2))
        eq_all = (va[:, :, None] == vb[:, None, :]).sum(axis=(1, 2))
        hits += int(np.sum(np.abs(2 * gt_all + eq_all - n * m) >= dev_obs))
    return hits / math.comb(n + m, n)


def _kolmogorov_sf(lam: float) -> float:
    """Asymptotic Kolmogorov survival function Q(lambda)."""
    if lam <= 0.0:
        return 1.0
    total = 0.0
    for k in range(1, 101):
        term = (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam)
        total += term
        if abs(term) < 1e-16:
            break
    return min(1.0, max(0.0, 2.0 * total))


def ks_two_sample(a, b) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov test: (D statistic, two-sided p).

    D is the maximum ECDF gap, computed exactly.  The p-value is the exact
    tie-aware null tail probability (permutation enumeration) while the
    number of pooled splits C(n+m, n) is at most :data:`EXACT_TAIL_LIMIT`,
    and the asymptotic Kolmogorov distribution with effective sample size
    n*m/(n+m) beyond that.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) < 5 or len(b) < 5:
        raise ValueError("samples too small: need at least 5 observations each")
    n, m = len(a), len(b)
    d_num = _ecdf_walk(a, b)
    d = d_num / (n * m)
    if math.comb(n + m, n) <= EXACT_TAIL_LIMIT:
        p = _ks_exact_pvalue(a, b, d_num)
    else:
        en = n * m / (n + m)
        p = _kolmogorov_sf(math.sqrt(en) * d)
    return d, p


def mann_whitney_u(a, b) -> tuple[float, float]:
    """Two-sample Mann-Whitney test: (U for the first sample, two-sided p).

    U is derived from midrank sums.  The p-value is the exact tie-aware
    null tail probability P(|U - n*m/2| >= |u - n*m/2|) by permutation
    enumeration while the number of pooled splits C(n+m, n) is at most
    :data:`EXACT_TAIL_LIMIT`, and the tie-corrected normal approximation
    with continuity correction beyond that.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) < 5 or len(b) < 5:
        raise ValueError("samples too small: need at least 5 observations each")
    n, m = len(a), len(b)
    pooled = np.concatenate([a, b])
    ranks = midranks(pooled)
    r1 = float(ranks[:n].sum())
    u = r1 - n * (n + 1) / 2.0
    if math.comb(n + m, n) <= EXACT_TAIL_LIMIT:
        return u, _mwu_exact_pvalue(a, b)
    big_n = n + m
    counts = np.unique(pooled, return_counts=True)[1]
    tie_term = float(np.sum(counts**3 - counts))
    var = n * m / 12.0 * ((big_n + 1) - tie_term / (big_n * (big_n - 1)))
    if var <= 0.0:
        return u, 1.0
    z = max(0.0, abs(u - n * m / 2.0) - 0.5) / math.sqrt(var)
    p = 2.0 * (1.0 - 0.5 * (1.0 + math.erf(z / math.sqrt(2.0))))
    return u, min(1.0, p)


def boxplot_summary(values) -> BoxplotSummary:
    """Quartiles by linear interpolation plus 1.5*IQR whisker positions.

    Whiskers sit on the furthest data points within 1.5*IQR of the box;
    anything beyond is listed in ``outliers``.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or len(v) < 4:
        raise ValueError("need at least 4 values for a box plot summary")
    q1, med, q3 = (float(q) for q in np.percentile(v, [25.0, 50.0, 75.0]))
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    inside = v[(v >= lo_fence) & (v <= hi_fence)]
    lower = float(inside.min())
    upper = float(inside.max())
    outliers = tuple(float(x) for x in np.sort(v[(v < lo_fence) | (v > hi_fence)]))
    return BoxplotSummary(q1, med, q3, iqr, lower, upper, outliers)


def steiger_z(r1: float, r2: float, r12: float, n: int) -> float:
    """Z statistic comparing two dependent correlations sharing one variable.

    ``r1`` and ``r2`` correlate two competing predictors against the shared
    variable, ``r12`` correlates the predictors with each other, and ``n``
    is the sample count.
    """
    if n <= 3:
        raise ValueError("need more than 3 samples to compare correlations")
    if r1 == r2:
        return 0.0
    clip = 1.0 - 1e-10
    r1c = min(clip, max(-clip, r1))
    r2c = min(clip, max(-clip, r2))
    rm2 = 0.5 * (r1c * r1c + r2c * r2c)
    f = min(1.0, (1.0 - r12) / (2.0 * (1.0 - rm2)))
    h = (1.0 - f * rm2) / (1.0 - rm2)
    denom = 2.0 * (1.0 - r12) * h
    if denom <= 0.0:
        return math.inf if r1 > r2 else -math.inf
    return (math.atanh(r1c) - math.atanh(r2c)) * math.sqrt((n - 3) / denom)


def significance_codewords(metric_names, databases, coeff="srocc"):
    """Pairwise metric-superiority codewords across databases.

    ``databases`` is a sequence of ``(name, scores, mos)`` where ``scores``
    maps metric name to a score sequence aligned with ``mos``.  For every
    ordered metric pair a codeword is built with one symbol per database:
    '1' if the row metric correlates with MOS statistically better than the
    column metric (two-sided alpha = 0.05, dependent-correlation z sharing
    the MOS variable), '0' if worse, '-' otherwise.  Codewords are
    antisymmetric under 1 <-> 0 and self-pairs are all '-'.
    """
    corr = krocc if coeff == "krocc" else srocc
    # cache per-database correlations with MOS and between metric pairs
    words = []
    with_mos: list[dict[str, float]] = []
    for _, scores, mos in databases:
        with_mos.append({m: corr(scores[m], mos) for m in metric_names})
    for row in metric_names:
        for col in metric_names:
            symbols = []
            for (name, scores, mos), rho in zip(databases, with_mos):
                if row == col:
                    symbols.append("-")
                    continue
                r12 = corr(scores[row], scores[col])
                z = steiger_z(rho[row], rho[col], r12, len(mos))
                if z > Z_CRITICAL:
                    symbols.append("1")
                elif z < -Z_CRITICAL:
                    symbols.append("0")
                else:
                    symbols.append("-")
            words.append(SignificanceCodeword(row, col, "".join(symbols)))
    return words


def correlation_table(metric_names, databases):
    """KROCC/SROCC per (database, metric) plus per-metric averages.

    ``databases`` as in :func:`significance_codewords`.  Returns
    ``(pairs, averages)`` where averages maps metric name to the mean
    (krocc, srocc) across the supplied databases.
    """
    pairs = []
    for name, scores, mos in databases:
        for metric in metric_names:
            pairs.append(
                CorrelationPair(
                    metric=metric,
                    database=name,
                    krocc=krocc(scores[metric], mos),
                    srocc=srocc(scores[metric], mos),
                    n=len(mos),
                )
            )
    averages = {}
    for metric in metric_names:
        ks = [p.krocc for p in pairs if p.metric == metric]
        ss = [p.srocc for p in pairs if p.metric == metric]
        averages[metric] = (float(np.mean(ks)), float(np.mean(ss)))
    return pairs, averages


def rank_databases(metric_names, group_databases, values):
    """Order each metric's databases by decreasing correlation.

    ``values`` maps ``(metric, database)`` to a correlation value.  Ties are
    broken by the databases' position in ``group_databases`` (their listing
    order).  Returns ``{metric: [database, ...]}``.
    """
    ranking = {}
    for metric in metric_names:
        missing = [db for db in group_databases if (metric, db) not in values]
        if missing:
            raise ValueError(f"incomplete table: no {metric} value for {missing[0]}")
        order = sorted(
            range(len(group_databases)),
            key=lambda i: (-values[(metric, group_databases[i])], i),
        )
        ranking[metric] = [group_databases[i] for i in order]
    return ranking
