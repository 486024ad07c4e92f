"""Descriptive statistics, one-way ANOVA and binomial confidence intervals.

The descriptive summary deliberately mixes divisors: the variance column
uses the sample divisor (n-1) while the standard deviation column uses the
population divisor (n).  That matches how the usability scores are
conventionally reported here; both divisors are exposed explicitly for
callers that care.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from scipy import special, stats

from .errors import DegenerateInputError, DomainError


@dataclass(frozen=True)
class GroupSample:
    label: str
    scores: tuple[float, ...]

    def __post_init__(self):
        if len(self.scores) == 0:
            raise DomainError(f"group {self.label!r} has no scores")
        object.__setattr__(self, "scores", tuple(float(x) for x in self.scores))


@dataclass(frozen=True)
class Description:
    mean: float
    var_sample: float      # divisor n-1
    var_population: float  # divisor n
    std_sample: float
    std_population: float

    @property
    def variance(self) -> float:
        return self.var_sample

    @property
    def std(self) -> float:
        return self.std_population


def describe(group: GroupSample) -> Description:
    """Mean plus variance/std under both divisors; needs n >= 2."""
    x = np.asarray(group.scores)
    if x.size < 2:
        raise DegenerateInputError("variance needs at least 2 scores")
    return Description(
        mean=float(x.mean()),
        var_sample=float(x.var(ddof=1)),
        var_population=float(x.var(ddof=0)),
        std_sample=float(x.std(ddof=1)),
        std_population=float(x.std(ddof=0)),
    )


@dataclass(frozen=True)
class AnovaResult:
    ss_model: float
    ss_residual: float
    df_model: int
    df_residual: int
    ms_model: float
    ms_residual: float
    f_value: float
    p_value: float
    infinite_f: bool = False


def anova_oneway(groups: list[GroupSample]) -> AnovaResult:
    """Standard between/within decomposition with an incomplete-beta p."""
    if len(groups) < 2:
        raise DomainError("ANOVA needs at least two groups")
    samples = [np.asarray(g.scores) for g in groups]
    n_total = sum(x.size for x in samples)
    k = len(groups)
    if n_total <= k:
        raise DomainError("ANOVA needs more scores than groups")
    grand = sum(x.sum() for x in samples) / n_total
    ss_model = float(sum(x.size * (x.mean() - grand) ** 2 for x in samples))
    ss_residual = float(sum(((x - x.mean()) ** 2).sum() for x in samples))
    df_model, df_residual = k - 1, n_total - k
    ms_model = ss_model / df_model
    ms_residual = ss_residual / df_residual
    if ms_residual == 0.0:
        f = math.inf if ms_model > 0 else 0.0
        return AnovaResult(
            ss_model, ss_residual, df_model, df_residual, ms_model, ms_residual,
            f, 0.0 if ms_model > 0 else 1.0, infinite_f=ms_model > 0,
        )
    f = ms_model / ms_residual
    p = f_sf(f, df_model, df_residual)
    return AnovaResult(
        ss_model, ss_residual, df_model, df_residual, ms_model, ms_residual, f, p
    )


def f_sf(f: float, df1: int, df2: int) -> float:
    """P(F > f) via the regularized incomplete beta function."""
    if f <= 0:
        return 1.0
    return float(special.betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f)))


class CIMethod(str, Enum):
    WALD = "Wald"
    CLOPPER_PEARSON = "ClopperPearson"
    WILSON = "Wilson"
    JEFFREYS = "Jeffreys"
    AGRESTI_COULL = "AgrestiCoull"


@dataclass(frozen=True)
class BinomialCI:
    method: CIMethod
    prevalence: float
    lower: float
    upper: float
    level: float


def binom_ci(x: int, n: int, level: float, method: CIMethod) -> BinomialCI:
    """Two-sided binomial interval for x successes out of n trials.

    Wald may exceed [0, 1]; Wilson and Agresti-Coull are clipped to it;
    the Beta-quantile methods use the usual one-sided conventions at
    x = 0 and x = n.
    """
    if not (0 <= x <= n) or n < 1:
        raise DomainError(f"need 0 <= x <= n with n >= 1, got x={x} n={n}")
    if not (0.0 < level < 1.0):
        raise DomainError(f"level {level} outside (0, 1)")
    alpha = 1.0 - level
    p = x / n
    z = float(stats.norm.ppf(1.0 - alpha / 2.0))

    if method is CIMethod.WALD:
        half = z * math.sqrt(p * (1.0 - p) / n)
        return BinomialCI(method, p, p - half, p + half, level)

    if method is CIMethod.WILSON:
        denom = 1.0 + z * z / n
        center = (p + z * z / (2.0 * n)) / denom
        half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom
        return BinomialCI(method, p, max(0.0, center - half), min(1.0, center + half), level)

    if method is CIMethod.AGRESTI_COULL:
        n_adj = n + z * z
        p_adj = (x + z * z / 2.0) / n_adj
        half = z * math.sqrt(p_adj * (1.0 - p_adj) / n_adj)
        return BinomialCI(method, p, max(0.0, p_adj - half), min(1.0, p_adj + half), level)

    if method is CIMethod.CLOPPER_PEARSON:
        lower = 0.0 if x == 0 else float(stats.beta.ppf(alpha / 2.0, x, n - x + 1))
        upper = 1.0 if x == n else float(stats.beta.ppf(1.0 - alpha / 2.0, x + 1, n - x))
        return BinomialCI(method, p, lower, upper, level)

    if method is CIMethod.JEFFREYS:
        dist = stats.beta(x + 0.5, n - x + 0.5)
        lower = 0.0 if x == 0 else float(dist.ppf(alpha / 2.0))
        upper = 1.0 if x == n else float(dist.ppf(1.0 - alpha / 2.0))
        return BinomialCI(method, p, lower, upper, level)

    raise DomainError(f"unknown method {method}")


def all_cis(x: int, n: int, level: float = 0.95) -> list[BinomialCI]:
    return [binom_ci(x, n, level, m) for m in CIMethod]


def load_responses(path: str | Path) -> list[GroupSample]:
    """Read (user, question, score) rows grouped per user, in user order."""
    by_user: dict[str, list[float]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh, delimiter="\t"):
            by_user.setdefault(row["user"], []).append(float(row["score"]))
    if not by_user:
        raise DomainError(f"no response rows in {path}")
    return [GroupSample(user, tuple(scores)) for user, scores in sorted(by_user.items())]


def load_binary(path: str | Path) -> tuple[int, int]:
    """Read (user, question, 0/1) rows; returns (successes, trials)."""
    x = n = 0
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh, delimiter="\t"):
            value = int(row["answer"])
            if value not in (0, 1):
                raise DomainError(f"binary answer must be 0 or 1, got {value}")
            x += value
            n += 1
    if n == 0:
        raise DomainError(f"no binary rows in {path}")
    return x, n


def format_descriptives(groups: list[GroupSample]) -> str:
    lines = ["user\tmean\tvariance\tstd"]
    for g in groups:
        d = describe(g)
        lines.append(f"{g.label}\t{d.mean:.2f}\t{d.var_sample:.2f}\t{d.std_population:.2f}")
    overall = GroupSample("Overall", tuple(s for g in groups for s in g.scores))
    d = describe(overall)
    lines.append(f"{overall.label}\t{d.mean:.2f}\t{d.var_sample:.2f}\t{d.std_population:.2f}")
    return "\n".join(lines)


def format_anova(result: AnovaResult) -> str:
    f_txt = "inf" if result.infinite_f else f"{result.f_value:.2f}"
    return "\n".join(
        [
            f"Sum of Squares Residual\t{result.ss_residual:.2f}",
            f"Sum of Squares Model\t{result.ss_model:.2f}",
            f"Mean Square Residual\t{result.ms_residual:.2f}",
            f"Mean Square Explained\t{result.ms_model:.2f}",
            f"F-value\t{f_txt}",
            f"P-value\t{result.p_value:.4f}",
        ]
    )


def format_cis(cis: list[BinomialCI]) -> str:
    lines = ["method\tprevalence\tlower\tupper"]
    for ci in cis:
        lines.append(f"{ci.method.value}\t{ci.prevalence:.4f}\t{ci.lower:.4f}\t{ci.upper:.4f}")
    return "\n".join(lines)
