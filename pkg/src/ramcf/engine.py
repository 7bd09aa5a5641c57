"""Continued-fraction evaluation and convergence diagnostics.

The fraction -a1/(1 - a2/(1 - a3/(1 - ...))) is evaluated through its
convergents tau_n by two independent routes: left-to-right composition
of the maps z -> -a_i/(z+1) (renormalized every step), and the classic
numerator/denominator three-term recurrence.  Convergence and periodic
divergence are decided from windowed diameters of the tail in the
boundary-circle metric; "not Cauchy yet" is never reported as
divergence, only detected sub-limit separation is.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

from mpmath import mpf

from .errors import NonPositiveCoefficient, OutOfRange
from .moebius import (
    INF,
    MoebiusMap,
    angle_distance,
    angles_diameter,
    cayley_angle,
    cf_map,
    is_inf,
)
from .precision import as_scalar, scalar_str


class CoefficientSource:
    """Deterministic stream of positive coefficients a_1, a_2, ...

    Subclasses implement coefficient(i) for i >= 1 as a pure function;
    repeated queries must return identical values.
    """

    kind = "abstract"

    def coefficient(self, i: int) -> mpf:
        raise NotImplementedError

    def limit(self):
        """Declared limit of the coefficients, or None."""
        return None

    def describe(self) -> dict:
        return {"kind": self.kind}

    def prefix(self, n: int):
        return [self.coefficient(i) for i in range(1, n + 1)]


class ConstantSource(CoefficientSource):
    kind = "constant"

    def __init__(self, a):
        self.a = as_scalar(a)
        if not self.a > 0:
            raise NonPositiveCoefficient(f"constant coefficient {self.a} <= 0")

    def coefficient(self, i: int) -> mpf:
        return self.a

    def limit(self):
        return self.a

    def describe(self):
        return {"kind": self.kind, "a": scalar_str(self.a)}


class ExplicitSource(CoefficientSource):
    kind = "explicit"

    def __init__(self, values):
        self.values = [as_scalar(v) for v in values]
        for k, v in enumerate(self.values):
            if not v > 0:
                raise NonPositiveCoefficient(f"value #{k + 1} = {v} <= 0")

    def coefficient(self, i: int) -> mpf:
        if not 1 <= i <= len(self.values):
            raise OutOfRange(f"index {i} beyond explicit list of {len(self.values)}")
        return self.values[i - 1]

    def describe(self):
        return {"kind": self.kind, "length": len(self.values)}


GILL_RULES = ("0", "2^-i", "1/i", "1/i^2")


def perturbation_rule(name: str):
    """Preset perturbation size rules delta(i) for Gill-type sources."""
    if name == "0":
        return lambda i: mpf(0)
    if name == "2^-i":
        return lambda i: mpf(2) ** (-i)
    if name == "1/i":
        return lambda i: mpf(1) / i
    if name == "1/i^2":
        return lambda i: mpf(1) / (mpf(i) * i)
    raise OutOfRange(f"unknown perturbation rule {name!r}; known: {GILL_RULES}")


class GillPerturbedSource(CoefficientSource):
    """a_i = a + delta(i) with a preset nonnegative perturbation rule."""

    kind = "gill"

    def __init__(self, a, rule="2^-i"):
        self.a = as_scalar(a)
        self.rule_name = rule
        self._delta = perturbation_rule(rule)
        if not self.a > 0:
            raise NonPositiveCoefficient(f"limit {self.a} <= 0")

    def coefficient(self, i: int) -> mpf:
        v = self.a + self._delta(i)
        if not v > 0:
            raise NonPositiveCoefficient(f"a_{i} = {v} <= 0")
        return v

    def limit(self):
        return self.a

    def describe(self):
        return {"kind": self.kind, "a": scalar_str(self.a), "rule": self.rule_name}


@dataclass
class ConvergentTrace:
    """Convergents tau_n for n in indices, plus cached circle angles."""

    indices: list
    values: list
    method: str
    _angles: list = field(default=None, repr=False)

    @property
    def angles(self):
        if self._angles is None:
            self._angles = [cayley_angle(v) for v in self.values]
        return self._angles

    def value_at(self, n: int):
        # indices are 1..N contiguous in practice
        return self.values[n - self.indices[0]]

    def angle_at(self, n: int):
        return self.angles[n - self.indices[0]]


def trace_by_composition(src: CoefficientSource, n: int) -> ConvergentTrace:
    """tau_k = (T_{a_1} o ... o T_{a_k})(0) for k = 1..n, accumulating
    the matrix product left to right with per-step renormalization."""
    if n < 1:
        raise OutOfRange("need n >= 1")
    values = []
    m = MoebiusMap.identity()
    for i in range(1, n + 1):
        m = m.compose(cf_map(src.coefficient(i)))
        values.append(m(mpf(0)))
    return ConvergentTrace(list(range(1, n + 1)), values, "composition")


def convergent_by_composition(src: CoefficientSource, n: int):
    return trace_by_composition(src, n).values[-1]


def trace_by_recurrence(src: CoefficientSource, n: int) -> ConvergentTrace:
    """Numerator/denominator recurrence with partial numerators -a_k and
    partial denominators 1:

        p_k = p_{k-1} - a_k p_{k-2},   q_k = q_{k-1} - a_k q_{k-2}

    seeded p_{-1} = 1, p_0 = 0, q_{-1} = 0, q_0 = 1; tau_k = p_k/q_k
    (infinity when q_k = 0).  The seed convention is validated by tests
    against tau_1 = -a_1 and the composition route.
    """
    if n < 1:
        raise OutOfRange("need n >= 1")
    p_prev, p_cur = mpf(1), mpf(0)
    q_prev, q_cur = mpf(0), mpf(1)
    values = []
    for i in range(1, n + 1):
        a = src.coefficient(i)
        if not a > 0:
            raise NonPositiveCoefficient(f"a_{i} = {a} <= 0")
        p_prev, p_cur = p_cur, p_cur - a * p_prev
        q_prev, q_cur = q_cur, q_cur - a * q_prev
        values.append(INF if q_cur == 0 else p_cur / q_cur)
        # keep exponents bounded on long runs; the ratio is unchanged
        scale = max(abs(p_cur), abs(q_cur), abs(p_prev), abs(q_prev))
        if scale > mpf(2) ** 4096 or (scale != 0 and scale < mpf(2) ** -4096):
            p_prev, p_cur, q_prev, q_cur = (
                p_prev / scale,
                p_cur / scale,
                q_prev / scale,
                q_cur / scale,
            )
    return ConvergentTrace(list(range(1, n + 1)), values, "recurrence")


def convergent_by_recurrence(src: CoefficientSource, n: int):
    return trace_by_recurrence(src, n).values[-1]


@dataclass
class ConvergenceReport:
    verdict: str  # 'converged' | 'diverged-periodic' | 'undecided'
    period: int = None
    limit_estimate: object = None
    sub_limits: list = None
    window_oscillation: list = None  # [(n_start, n_end, diameter)]
    cauchy_profile: list = None  # [(N, sup sampled distance)]
    threshold: mpf = None
    max_n: int = None

    @property
    def converged(self):
        return self.verdict == "converged"

    @property
    def diverged_periodic(self):
        return self.verdict == "diverged-periodic"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "period": self.period,
            "limit_estimate": None
            if self.limit_estimate is None
            else scalar_str(self.limit_estimate),
            "sub_limits": None
            if self.sub_limits is None
            else [scalar_str(v) for v in self.sub_limits],
            "window_oscillation": [
                {"n_start": a, "n_end": b, "diameter": scalar_str(d)}
                for (a, b, d) in (self.window_oscillation or [])
            ],
            "cauchy_profile": [
                {"from_n": n0, "sup_distance": scalar_str(d)}
                for (n0, d) in (self.cauchy_profile or [])
            ],
            "threshold": scalar_str(self.threshold),
            "max_n": self.max_n,
        }


def detect_periodicity(trace: ConvergentTrace, max_period: int = 24, threshold=None):
    """Smallest p <= max_period whose residue subsequences each settle
    (tail diameter < threshold); returns None when no p qualifies.
    p = 1 is degenerate and simply means plain convergence."""
    if threshold is None:
        threshold = mpf("1e-6")
    angles = trace.angles
    n = len(angles)
    if n < 4 * max_period:
        raise OutOfRange(f"trace length {n} < 4 * max_period = {4 * max_period}")
    tail = angles[n // 2 :]
    for p in range(1, max_period + 1):
        ok = True
        for j in range(p):
            cls = tail[j::p]
            quarter = cls[3 * len(cls) // 4 :]
            if len(quarter) < 2 or angles_diameter(quarter) >= threshold:
                ok = False
                break
        if ok:
            return p
    return None


def _sub_limit_values(trace: ConvergentTrace, p: int):
    n = len(trace.values)
    tail_vals = trace.values[n // 2 :]
    tail_angs = trace.angles[n // 2 :]
    limits = []
    limit_angles = []
    for j in range(p):
        cls_v = tail_vals[j::p]
        cls_a = tail_angs[j::p]
        limits.append(cls_v[-1])
        limit_angles.append(cls_a[-1])
    return limits, limit_angles


def evaluate(
    src: CoefficientSource,
    max_n: int,
    conv_threshold=None,
    windows: int = 5,
    max_period: int = 24,
) -> ConvergenceReport:
    """Compute tau_n up to max_n and classify the tail.

    Converged: the last of `windows` equal windows over the tail has
    chordal diameter below conv_threshold and diameters do not grow
    across the last three windows.  Diverged-periodic(p): the residue
    subsequences mod p each settle while at least two of their limits
    stay separated by > 10 * conv_threshold.  Anything else: undecided.
    """
    if max_n < 100 * windows:
        raise OutOfRange(f"max_n = {max_n} < 100 * windows = {100 * windows}")
    trace = trace_by_composition(src, max_n)
    return evaluate_trace(trace, conv_threshold, windows, max_period)


def evaluate_trace(
    trace: ConvergentTrace,
    conv_threshold=None,
    windows: int = 5,
    max_period: int = 24,
) -> ConvergenceReport:
    """Classification of an already-computed trace; see evaluate."""
    if conv_threshold is None:
        conv_threshold = mpf("1e-6")
    else:
        conv_threshold = as_scalar(conv_threshold)
    if windows < 3:
        raise OutOfRange("need at least 3 windows for the trend check")
    max_n = len(trace.values)
    angles = trace.angles
    tail_lo = max_n // 2  # 0-based offset of the diagnostic tail
    tail = angles[tail_lo:]
    w = len(tail) // windows
    window_osc = []
    for k in range(windows):
        lo = k * w
        hi = (k + 1) * w if k < windows - 1 else len(tail)
        diam = angles_diameter(tail[lo:hi])
        window_osc.append((tail_lo + lo + 1, tail_lo + hi, diam))

    # sampled Cauchy profile: sup distance among tau_m, tau_n with m,n >= N
    cauchy = []
    for frac in (0.5, 0.65, 0.8, 0.9, 0.97):
        n0 = int(max_n * frac)
        sample = angles[n0 - 1 :: max(1, (max_n - n0) // 64 + 1)]
        cauchy.append((n0, angles_diameter(sample)))

    diams = [d for (_, _, d) in window_osc]
    deep = diams[-1] < conv_threshold / 100
    trend = diams[-1] <= diams[-2] * mpf("1.05") and diams[-2] <= diams[-3] * mpf(
        "1.05"
    )
    if diams[-1] < conv_threshold and (trend or deep):
        return ConvergenceReport(
            "converged",
            period=None,
            limit_estimate=trace.values[-1],
            window_oscillation=window_osc,
            cauchy_profile=cauchy,
            threshold=conv_threshold,
            max_n=max_n,
        )

    period = detect_periodicity(trace, max_period=max_period, threshold=conv_threshold)
    if period is not None and period >= 2:
        limits, limit_angles = _sub_limit_values(trace, period)
        separated = all(
            angle_distance(limit_angles[i], limit_angles[j]) > 10 * conv_threshold
            for i in range(period)
            for j in range(i + 1, period)
        )
        if separated:
            return ConvergenceReport(
                "diverged-periodic",
                period=period,
                sub_limits=limits,
                window_oscillation=window_osc,
                cauchy_profile=cauchy,
                threshold=conv_threshold,
                max_n=max_n,
            )
    elif period == 1:
        # settles without meeting the window trend yet: still convergence
        limits, _ = _sub_limit_values(trace, 1)
        return ConvergenceReport(
            "converged",
            period=None,
            limit_estimate=limits[0],
            window_oscillation=window_osc,
            cauchy_profile=cauchy,
            threshold=conv_threshold,
            max_n=max_n,
        )
    return ConvergenceReport(
        "undecided",
        window_oscillation=window_osc,
        cauchy_profile=cauchy,
        threshold=conv_threshold,
        max_n=max_n,
    )


def gill_check(src: CoefficientSource, a=None, n: int = 10000):
    """Partial sums S_N = sum_{i<=N} |a_i - a| plus a summability
    heuristic: the last dyadic block contributes < 0.9 of the previous
    one (a convergent-tail pattern)."""
    if a is None:
        a = src.limit()
        if a is None:
            raise OutOfRange("source declares no limit; pass a explicitly")
    a = as_scalar(a)
    sums = []
    s = mpf(0)
    for i in range(1, n + 1):
        s += abs(src.coefficient(i) - a)
        sums.append(s)
    b_last = sums[-1] - sums[n // 2 - 1]
    b_prev = sums[n // 2 - 1] - sums[n // 4 - 1]
    if b_last == 0:
        summable = True
    elif b_prev == 0:
        summable = False
    else:
        summable = (b_last / b_prev) < mpf("0.9")
    return sums, summable


def write_trace_csv(trace: ConvergentTrace, path):
    """Columns: n, tau_real ('inf' sentinel), cayley_angle."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "tau_real", "cayley_angle"])
        for n, v, ang in zip(trace.indices, trace.values, trace.angles):
            writer.writerow(
                ["%d" % n, "inf" if is_inf(v) else scalar_str(v), scalar_str(ang)]
            )
