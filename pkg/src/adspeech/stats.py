"""Group-difference tests, MMSE correlations and the outlier rule.

The t-distribution tail comes from a continued-fraction regularized
incomplete beta function (modified Lentz), so no statistics package is
needed at run time.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "TTestResult",
    "CorrResult",
    "OutlierRule",
    "betainc_reg",
    "t_sf_two_sided",
    "welch_t_test",
    "pooled_t_test",
    "pearson",
    "significance_table",
    "format_significance",
    "significance_csv",
    "filter_outliers",
    "scatter_svg",
]

_EPS = 1e-15
_TINY = 1e-300


def _betacf(a, b, x, max_iter=500):
    """Continued fraction of the incomplete beta function (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = _TINY if abs(d) < _TINY else d
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge (a={a}, b={b}, x={x})")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    if t == 0:
        return 1.0
    if not math.isfinite(t):
        return 0.0
    x = df / (df + t * t)
    return float(min(1.0, max(0.0, betainc_reg(0.5 * df, 0.5, x))))


@dataclass(frozen=True)
class TTestResult:
    feature_name: str
    mean_a: float
    mean_b: float
    t: float
    df: float
    p: float


@dataclass(frozen=True)
class CorrResult:
    feature_name: str
    r: float
    n: int


def _two_samples(a, b):
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if a.size < 2 or b.size < 2:
        raise ValueError("each group needs at least 2 values")
    return a, b


def welch_t_test(a, b, name: str = "") -> TTestResult:
    """Two-sided Welch t-test of mean(a) against mean(b).

    Two constant groups with equal means give t = 0, p = 1; with different
    means t is infinite and p = 0.
    """
    a, b = _two_samples(a, b)
    ma, mb = a.mean(), b.mean()
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    se2 = va + vb
    if se2 == 0:
        if ma == mb:
            return TTestResult(name, float(ma), float(mb), 0.0, float(a.size + b.size - 2), 1.0)
        return TTestResult(name, float(ma), float(mb), math.copysign(math.inf, ma - mb),
                           float(a.size + b.size - 2), 0.0)
    t = (ma - mb) / math.sqrt(se2)
    df = se2 ** 2 / (va ** 2 / (a.size - 1) + vb ** 2 / (b.size - 1))
    return TTestResult(name, float(ma), float(mb), float(t), float(df), t_sf_two_sided(t, df))


def pooled_t_test(a, b, name: str = "") -> TTestResult:
    """Two-sided Student t-test with pooled variance."""
    a, b = _two_samples(a, b)
    ma, mb = a.mean(), b.mean()
    df = a.size + b.size - 2
    sp2 = ((a.size - 1) * a.var(ddof=1) + (b.size - 1) * b.var(ddof=1)) / df
    se2 = sp2 * (1.0 / a.size + 1.0 / b.size)
    if se2 == 0:
        t = 0.0 if ma == mb else math.copysign(math.inf, ma - mb)
        return TTestResult(name, float(ma), float(mb), t, float(df), 1.0 if t == 0 else 0.0)
    t = (ma - mb) / math.sqrt(se2)
    return TTestResult(name, float(ma), float(mb), float(t), float(df), t_sf_two_sided(t, df))


def pearson(x, y, name: str = "") -> CorrResult:
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if x.shape != y.shape:
        raise ValueError("x and y differ in length")
    if x.size < 3:
        raise ValueError("pearson needs at least 3 pairs")
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise ValueError("zero variance")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return CorrResult(name, max(-1.0, min(1.0, r)), int(x.size))


# ---------------------------------------------------------------- tables

@dataclass(frozen=True)
class TableRow:
    name: str
    mean_nonad: float
    mean_ad: float
    test: Optional[TTestResult]
    r_mmse: Optional[float]

    @property
    def p(self):
        return None if self.test is None else self.test.p


def significance_table(table, names=None, alpha: float = 0.05, full: bool = False,
                       method: str = "welch") -> list[TableRow]:
    """Per-feature nonAD vs AD tests in canonical feature order.

    Only rows with p < ``alpha`` are kept unless ``full`` is set; ``alpha``
    of 1 or more keeps every testable row, p = 1 included. Features
    that cannot be tested (constant in both groups) keep ``test=None`` and
    appear only in the full table.
    """
    test = {"welch": welch_t_test, "pooled": pooled_t_test}[method]
    names = list(table.names) if names is None else list(names)
    labels = np.array(table.labels)
    non, ad = labels == "nonAD", labels == "AD"
    mmse = None
    if all(m is not None for m in table.mmse):
        mmse = np.array(table.mmse, float)
    rows = []
    for n in names:
        col = table.column(n)
        a, b = col[non], col[ad]
        res = test(a, b, n)
        if res.t == 0.0 and a.var() == 0 and b.var() == 0:
            res = None
        r = None
        if mmse is not None:
            try:
                r = pearson(col, mmse, n).r
            except ValueError:
                r = None
        row = TableRow(n, float(a.mean()), float(b.mean()), res, r)
        if full or (row.p is not None and (row.p < alpha or alpha >= 1.0)):
            rows.append(row)
    return rows


def _num(v, fmt="{:.4g}"):
    return "-" if v is None else fmt.format(v)


def format_significance(rows, title: str = "") -> str:
    head = ["feature", "nonAD", "AD", "t", "df", "p", "r_mmse"]
    body = [[r.name, _num(r.mean_nonad), _num(r.mean_ad),
             _num(None if r.test is None else r.test.t, "{:.3f}"),
             _num(None if r.test is None else r.test.df, "{:.1f}"),
             _num(r.p, "{:.3g}"), _num(r.r_mmse, "{:.3f}")] for r in rows]
    widths = [max(len(x) for x in col) for col in zip(head, *body)] if body else [len(h) for h in head]
    out = io.StringIO()
    if title:
        out.write(title + "\n")
    for line in [head] + body:
        out.write("  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                            for i, (c, w) in enumerate(zip(line, widths))).rstrip() + "\n")
    return out.getvalue()


def significance_csv(rows) -> str:
    lines = ["feature,mean_nonAD,mean_AD,t,df,p,r_mmse"]
    for r in rows:
        t = r.test
        cells = [r.name, repr(r.mean_nonad), repr(r.mean_ad),
                 "" if t is None else repr(t.t), "" if t is None else repr(t.df),
                 "" if t is None else repr(t.p), "" if r.r_mmse is None else repr(r.r_mmse)]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- outliers

@dataclass(frozen=True)
class OutlierRule:
    """Drop AD sessions at MMSE 30 and the ``k`` weakest nonAD lexical scorers."""

    drop_ad_mmse_at_ceiling: bool = False
    drop_k_lowest_nonad_lexical: int = 0

    def __post_init__(self):
        if self.drop_k_lowest_nonad_lexical < 0:
            raise ValueError("k must be non-negative")

    @classmethod
    def parse(cls, text: str) -> "OutlierRule":
        """Parse ``ad30:1,lexlow:3`` style rules (``ad30`` takes 0 or 1)."""
        ad30, k = False, 0
        for part in filter(None, (p.strip() for p in text.split(","))):
            key, _, val = part.partition(":")
            try:
                n = int(val)
            except ValueError:
                raise ValueError(f"bad outlier rule item {part!r}") from None
            if key == "ad30":
                if n not in (0, 1):
                    raise ValueError("ad30 takes 0 or 1")
                ad30 = bool(n)
            elif key == "lexlow":
                k = n
            else:
                raise ValueError(f"unknown outlier rule key {key!r}")
        return cls(ad30, k)

    @property
    def is_noop(self):
        return not self.drop_ad_mmse_at_ceiling and self.drop_k_lowest_nonad_lexical == 0


def filter_outliers(ids, labels, mmse, lexical_mean, rule: OutlierRule):
    """Split row indices into (kept, dropped) under ``rule``.

    Returns index lists in input order; dropped ids are ``[ids[i] for i in
    dropped]``.
    """
    n = len(ids)
    dropped = set()
    if rule.drop_ad_mmse_at_ceiling:
        dropped |= {i for i in range(n) if labels[i] == "AD" and mmse[i] == 30}
    k = rule.drop_k_lowest_nonad_lexical
    if k:
        non = [i for i in range(n) if labels[i] == "nonAD"]
        if k >= len(non):
            raise ValueError(f"cannot drop {k} of {len(non)} nonAD sessions")
        non.sort(key=lambda i: (lexical_mean[i], ids[i]))
        dropped |= set(non[:k])
    kept = [i for i in range(n) if i not in dropped]
    return kept, sorted(dropped)


def scatter_svg(lexical_mean, mmse, labels, ids=None, dropped=(), width=480, height=360) -> str:
    """MMSE against mean word score: AD in black, nonAD in grey, dropped rows as 'x'.

    Each session is one ``<circle>`` or one ``<path class="outlier">``.
    """
    x = np.asarray(lexical_mean, float)
    y = np.asarray(mmse, float)
    dropped = set(dropped)
    pad = 40
    x0, x1 = (0.0, max(1e-9, float(x.max()) * 1.05)) if x.size else (0.0, 1.0)
    sx = lambda v: pad + (v - x0) / (x1 - x0) * (width - 2 * pad)
    sy = lambda v: height - pad - v / 30.0 * (height - 2 * pad)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
             f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
             f'<text x="{width / 2}" y="{height - 8}" text-anchor="middle" font-size="12">lexical words</text>',
             f'<text x="12" y="{height / 2}" font-size="12" transform="rotate(-90 12 {height / 2})" '
             'text-anchor="middle">MMSE</text>']
    for i in range(x.size):
        cx, cy = sx(x[i]), sy(y[i])
        colour = "grey" if labels[i] == "nonAD" else "black"
        title = f"<title>{ids[i]}</title>" if ids is not None else ""
        if i in dropped:
            d = f"M{cx - 4:.2f},{cy - 4:.2f}L{cx + 4:.2f},{cy + 4:.2f}M{cx - 4:.2f},{cy + 4:.2f}L{cx + 4:.2f},{cy - 4:.2f}"
            parts.append(f'<path class="outlier" d="{d}" stroke="{colour}" stroke-width="1.5">{title}</path>')
        else:
            parts.append(f'<circle class="session" cx="{cx:.2f}" cy="{cy:.2f}" r="3" fill="{colour}">{title}</circle>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
