"""Convergent coefficient sequences at limits with rational rotation number.

For a > 1/4 with rotation number p/q the map T_a (z -> -a/(z+1))
satisfies T_a^q = Id.  Perturbing two slots per period,

    a_i = a  off residues 1, 2 (mod q),
    a_{qr+1} = a + c1 * t_r,   a_{qr+2} = a + c2 * t_r,

turns each period into the composed map
psi_r = T_{alpha_r} o T_{beta_r} o T_a^{q-2}.  The coefficients
(c1, c2) are chosen from the derivative fields of the two-parameter
family so that psi_r is hyperbolic with repeller pinned at a chosen
boundary point R away from the orbit of 0 and attractor at 0; a
divergent series sum t_r then drives the multiplier product to zero and
the continued fraction converges.  Everything here is certified
numerically: per-stage hyperbolicity, fixed-point locations, and the
accumulated -log multiplier mass.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from math import gcd

from mpmath import mp, mpf, log, pi

from .engine import CoefficientSource
from .errors import (
    DegenerateSlope,
    ExceptionalRepeller,
    NoAdmissibleRepeller,
    NonPositiveCoefficient,
    NotPeriodic,
    OutOfRange,
    RepellerInOrbit,
    StageNotHyperbolic,
)
from .moebius import (
    INF,
    MoebiusMap,
    boundary_diameter,
    boundary_from_angle,
    cf_map,
    chordal_distance,
    classify,
    derivative_at,
    inverse_rotation_number,
    is_inf,
)
from .precision import as_scalar, scalar_str


def orbit_of_zero(a, q: int, tol=None):
    """The q points T_a^l(0), l = 0..q-1, checked to close up and to be
    pairwise distinct."""
    a = as_scalar(a)
    if tol is None:
        tol = mpf(2) ** -(mp.prec // 2)
    t = cf_map(a)
    orbit = [mpf(0)]
    for _ in range(q - 1):
        orbit.append(t(orbit[-1]))
    if chordal_distance(t(orbit[-1]), mpf(0)) > tol:
        raise NotPeriodic(f"T_a^{q}(0) does not return to 0 within {tol}")
    for i in range(q):
        for j in range(i + 1, q):
            if chordal_distance(orbit[i], orbit[j]) <= tol:
                raise NotPeriodic(f"orbit points {i} and {j} coincide")
    return orbit


def alpha_field(a, x):
    """Derivative of T_{alpha,beta,q}(x) in alpha at (alpha, beta) = (a, a):
    the field x/a on the boundary (chart value -u^2*v(1/u) -> 0 at
    infinity)."""
    a = as_scalar(a)
    if is_inf(x):
        return mpf(0)
    return as_scalar(x) / a


def beta_field(a, x):
    """Derivative in beta at (a, a): -x(a + x)/a^2, the pushforward of
    the alpha field by T_a; chart value 1/a^2 at infinity.  Zeros at 0
    and -a."""
    a = as_scalar(a)
    if is_inf(x):
        return 1 / (a * a)
    x = as_scalar(x)
    return -x * (a + x) / (a * a)


def stage_map(a, q: int, alpha, beta) -> MoebiusMap:
    """T_alpha o T_beta o T_a^(q-2): the map one perturbed period
    contributes to the composition."""
    m = cf_map(alpha).compose(cf_map(beta))
    return m.compose(cf_map(a).power(q - 2))


def field_fd(a, q: int, x, which: str = "alpha", h=None):
    """Central finite difference of the composed family in one
    parameter, the independent oracle for the closed-form fields.  At
    infinity the difference is taken in the chart u = 1/x on both
    sides."""
    a = as_scalar(a)
    if h is None:
        h = mpf(10) ** -10
    else:
        h = as_scalar(h)
    if which == "alpha":
        m_plus = stage_map(a, q, a + h, a)
        m_minus = stage_map(a, q, a - h, a)
    elif which == "beta":
        m_plus = stage_map(a, q, a, a + h)
        m_minus = stage_map(a, q, a, a - h)
    else:
        raise OutOfRange(f"which must be 'alpha' or 'beta', got {which!r}")
    if is_inf(x):
        u_plus = m_plus.m21 / m_plus.m11
        u_minus = m_minus.m21 / m_minus.m11
        return (u_plus - u_minus) / (2 * h)
    x = as_scalar(x)
    return (m_plus(x) - m_minus(x)) / (2 * h)


@dataclass(frozen=True)
class FamilySolution:
    """Linear coefficient families alpha(t) = a + c1*t, beta(t) = a + c2*t
    whose combined derivative field vanishes at the chosen repeller R
    (with positive derivative there) and at the attractor 0."""

    a: object
    c1: object
    c2: object
    attractor: object
    repeller: object
    slope: object  # d mu / dt at t = 0+, measured; negative
    slope_stability: object  # relative Richardson spread of the estimate

    def alpha(self, t):
        return self.a + self.c1 * t

    def beta(self, t):
        return self.a + self.c2 * t


@dataclass(frozen=True)
class SlopeEstimate:
    value: object
    stability: object


def multiplier_slope(a, q: int, c1, c2, steps=("1e-3", "1e-4", "1e-5")) -> SlopeEstimate:
    """Slope s of mu(t) = 1 + s*t + O(t^2) by Richardson-extrapolated
    one-sided differences at the given steps.

    mu(t) is measured as the derivative of the stage map at 0, which is
    a fixed point of every stage map (the perturbed slots leave the
    pole chain -1 -> inf -> 0 intact); for a correctly signed family 0
    is the attractor, so this is the multiplier.  A sign-flipped family
    shows derivative > 1 there and is rejected.  Raises DegenerateSlope
    when |s| < 1e-6."""
    a, c1, c2 = as_scalar(a), as_scalar(c1), as_scalar(c2)

    def mu_at(t):
        m = stage_map(a, q, a + c1 * t, a + c2 * t)
        cls = classify(m)
        if not cls.is_hyperbolic:
            raise StageNotHyperbolic(
                None, f"probe map at t = {t} classified {cls.kind}"
            )
        return derivative_at(m, mpf(0))

    ts = [as_scalar(t) for t in steps]
    raw = [(mu_at(t) - 1) / t for t in ts]
    rich = []
    for k in range(len(ts) - 1):
        ratio = ts[k] / ts[k + 1]
        rich.append((ratio * raw[k + 1] - raw[k]) / (ratio - 1))
    value = rich[-1]
    stability = abs(rich[-1] - rich[0]) / abs(rich[-1]) if rich[-1] != 0 else mpf(1)
    if abs(value) < mpf("1e-6"):
        raise DegenerateSlope(f"multiplier slope {value} is numerically zero")
    if value >= 0:
        raise DegenerateSlope(
            f"slope {value} > 0: the derivative at 0 grows for t > 0, so 0 is "
            "the repeller for this sign of (c1, c2)"
        )
    return SlopeEstimate(value, stability)


def solve_families(a, q: int, repeller) -> FamilySolution:
    """Coefficients (c1, c2) with c1*alpha_field + c2*beta_field
    vanishing at the repeller target, signed so the field is expanding
    there; the second zero (the attractor) is 0 for this family.

    The closed form is validated on the spot against the
    finite-difference oracle, and the multiplier slope is measured and
    required to be nonzero.
    """
    a = as_scalar(a)
    if is_inf(repeller):
        raise ExceptionalRepeller("infinity is a common zero of the fields")
    r = as_scalar(repeller)
    if r == 0:
        raise ExceptionalRepeller("0 is a common zero of the fields")
    orbit = orbit_of_zero(a, q)
    tol = mpf(2) ** -(mp.prec // 4)
    for point in orbit:
        if chordal_distance(r, point) <= tol:
            raise RepellerInOrbit(f"target {r} lies on the orbit of 0")

    c1 = (a + r) / a
    c2 = mpf(1)
    if r > 0:
        c1, c2 = -c1, -c2

    # independent check: the combined FD field vanishes at R and the
    # closed forms match the FD oracle there
    fd_r = c1 * field_fd(a, q, r, "alpha") + c2 * field_fd(a, q, r, "beta")
    closed_scale = abs(c1 * alpha_field(a, r)) + abs(c2 * beta_field(a, r)) + abs(r / a)
    if abs(fd_r) > mpf("1e-6") * (1 + closed_scale):
        raise ExceptionalRepeller(
            f"field residual {fd_r} at target {r}; degenerate configuration"
        )

    slope = multiplier_slope(a, q, c1, c2)
    return FamilySolution(
        a=a,
        c1=c1,
        c2=c2,
        attractor=mpf(0),
        repeller=r,
        slope=slope.value,
        slope_stability=slope.stability,
    )


def choose_repeller(a, q: int, margin=0.05, seed: int = 0, avoid=(), max_tries=512):
    """Seeded deterministic pick of a repeller target at chordal
    distance >= margin from the orbit of 0, infinity, and any extra
    avoid points, such that the linear families exist."""
    a = as_scalar(a)
    margin = as_scalar(margin)
    if margin > pi:
        raise NoAdmissibleRepeller(f"margin {margin} exceeds the circle diameter {pi}")
    keep_away = list(orbit_of_zero(a, q)) + [INF, mpf(0)] + [as_scalar(x) if not is_inf(x) else INF for x in avoid]
    rng = random.Random(seed)
    for _ in range(max_tries):
        theta = mpf(rng.uniform(-3.14159265, 3.14159265))
        cand = boundary_from_angle(theta)
        if is_inf(cand):
            continue
        if min(chordal_distance(cand, p) for p in keep_away) < margin:
            continue
        try:
            solve_families(a, q, cand)
        except (ExceptionalRepeller, RepellerInOrbit, DegenerateSlope):
            continue
        return cand
    raise NoAdmissibleRepeller(
        f"no admissible target after {max_tries} seeded draws at margin {margin}"
    )


def _looks_divergent(base, upto: int = 4096) -> bool:
    """Dyadic-block heuristic: partial sums of a divergent positive
    series keep contributing comparable dyadic blocks."""
    b_prev = sum(base(r) for r in range(upto // 4, upto // 2))
    b_last = sum(base(r) for r in range(upto // 2, upto))
    if b_prev <= 0:
        return False
    return b_last / b_prev > mpf("0.5")


def _rule_function(name, r_values):
    if r_values is not None:
        vals = [as_scalar(v) for v in r_values]
        for v in vals:
            if v < 0:
                raise OutOfRange("custom t-rule values must be nonnegative")

        def base(r):
            if r >= len(vals):
                raise OutOfRange(
                    f"custom t-rule has {len(vals)} values; stage {r} requested"
                )
            return vals[r]

        return base, len(vals)
    if name == "harmonic":
        return (lambda r: mpf(1) / (r + 1)), None
    if name == "2^-r":
        return (lambda r: mpf(2) ** (-r)), None
    if callable(name):
        return (lambda r: as_scalar(name(r))), None
    raise OutOfRange(f"unknown t-rule {name!r}")


@dataclass
class RationalRotationParams:
    """Everything needed to emit and certify one constructed sequence."""

    p: int
    q: int
    a: object
    family: FamilySolution
    t_rule_name: str
    t_scale: object
    divergent_rule: bool
    margin: object
    seed: int
    _base: object = field(repr=False, default=None)
    _rule_length: object = field(repr=False, default=None)

    def t_value(self, r: int):
        return self.t_scale * self._base(r)

    def alpha(self, r: int):
        return self.a + self.family.c1 * self.t_value(r)

    def beta(self, r: int):
        return self.a + self.family.c2 * self.t_value(r)

    def stage(self, r: int) -> MoebiusMap:
        return stage_map(self.a, self.q, self.alpha(r), self.beta(r))

    def max_stages(self):
        return self._rule_length

    def describe(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "a": scalar_str(self.a),
            "repeller": scalar_str(self.family.repeller),
            "c1": scalar_str(self.family.c1),
            "c2": scalar_str(self.family.c2),
            "slope": scalar_str(self.family.slope),
            "t_rule": self.t_rule_name,
            "t_scale": scalar_str(self.t_scale),
            "divergent_rule": self.divergent_rule,
            "margin": scalar_str(self.margin),
            "seed": self.seed,
        }


def _scale_valid(a, q, family, base, rule_length, scale) -> bool:
    probes = [mpf(1), mpf("0.5"), mpf("0.1"), mpf("0.01")]
    horizon = rule_length if rule_length is not None else 64
    t_max = max(base(r) for r in range(min(horizon, 64))) * scale
    floor = a * mpf("1e-9")
    for frac in probes:
        t = t_max * frac
        alpha = a + family.c1 * t
        beta = a + family.c2 * t
        if not (alpha > floor and beta > floor):
            return False
        if not classify(stage_map(a, q, alpha, beta)).is_hyperbolic:
            return False
    return True


def _strength_estimate(a, q, family, base, scale, horizon: int = 1000, rule_length=None):
    """Estimated sum of -log mu over the first `horizon` stages: exact
    for the first 64, slope-extrapolated beyond."""
    if rule_length is not None:
        horizon = min(horizon, rule_length)
    total = mpf(0)
    head = min(64, horizon)
    for r in range(head):
        t = scale * base(r)
        cls = classify(stage_map(a, q, a + family.c1 * t, a + family.c2 * t))
        if not cls.is_hyperbolic:
            return mpf(0)
        total += -log(cls.multiplier)
    if horizon > head:
        t_head = scale * base(head - 1)
        cls = classify(stage_map(a, q, a + family.c1 * t_head, a + family.c2 * t_head))
        eff = -log(cls.multiplier) / t_head
        tail = sum(base(r) for r in range(head, horizon))
        total += eff * scale * tail
    return total


def _search_scale(a, q, family, base, rule_length, divergent, strength_target):
    """Halve from 1 to validity, then (for divergent rules) grow the
    scale while the estimated multiplier mass over 1000 stages is below
    target.  The upward search exists because plain halving can leave
    the construction too weak to certify at desk scale."""
    horizon = rule_length if rule_length is not None else 64
    if max(base(r) for r in range(min(horizon, 64))) == 0:
        return mpf(1)  # zero perturbation: degenerate constant sequence
    scale = mpf(1)
    while not _scale_valid(a, q, family, base, rule_length, scale):
        scale /= 2
        if scale < mpf(2) ** -40:
            raise StageNotHyperbolic(0, "no valid perturbation scale found")
    if divergent and strength_target is not None:
        target = as_scalar(strength_target)
        while (
            scale < 64
            and _strength_estimate(a, q, family, base, scale, rule_length=rule_length) < target
            and _scale_valid(a, q, family, base, rule_length, scale * 2)
        ):
            scale *= 2
        for bump in ("1.5", "1.25"):
            cand = scale * mpf(bump)
            if (
                _strength_estimate(a, q, family, base, scale, rule_length=rule_length) < target
                and cand <= 64
                and _scale_valid(a, q, family, base, rule_length, cand)
            ):
                scale = cand
    return scale


def build_params(
    p: int,
    q: int,
    t_rule="harmonic",
    r_values=None,
    repeller="auto",
    margin="0.05",
    seed: int = 0,
    strength_target="12",
) -> RationalRotationParams:
    """Resolve a full construction: a = rho^(-1)(p/q), a repeller target
    with the avoidance margin, the linear families, and the
    perturbation scale."""
    if q < 3:
        raise OutOfRange(f"q must be >= 3, got {q}")
    if gcd(p, q) != 1 or not 0 < p * 2 < q:
        raise OutOfRange(f"p/q = {p}/{q} must be a reduced fraction in (0, 1/2)")
    a = inverse_rotation_number(mpf(p) / q)
    if not cf_map(a).power(q).is_identity():
        raise NotPeriodic(f"T_a^{q} is not the identity for a = {a}")
    margin = as_scalar(margin)
    base, rule_length = _rule_function(t_rule, r_values)
    rule_name = t_rule if isinstance(t_rule, str) else "callable"
    if r_values is not None:
        rule_name = "custom"
    divergent = (
        True
        if rule_name == "harmonic"
        else False
        if rule_name == "2^-r"
        else _looks_divergent(base, min(rule_length or 4096, 4096))
    )

    target = as_scalar(strength_target) if strength_target is not None else None
    if repeller != "auto":
        family = solve_families(a, q, as_boundary_target(repeller))
        scale = _search_scale(a, q, family, base, rule_length, divergent, target)
        return RationalRotationParams(
            p, q, a, family, rule_name, scale, divergent, margin, seed,
            _base=base, _rule_length=rule_length,
        )

    keep_away = list(orbit_of_zero(a, q)) + [INF]
    rng = random.Random(seed)
    best = None
    for _ in range(512):
        theta = mpf(rng.uniform(-3.14159265, 3.14159265))
        cand = boundary_from_angle(theta)
        if is_inf(cand) or min(chordal_distance(cand, z) for z in keep_away) < margin:
            continue
        try:
            family = solve_families(a, q, cand)
            scale = _search_scale(a, q, family, base, rule_length, divergent, target)
        except (ExceptionalRepeller, RepellerInOrbit, DegenerateSlope, StageNotHyperbolic):
            continue
        if not divergent or target is None:
            return RationalRotationParams(
                p, q, a, family, rule_name, scale, divergent, margin, seed,
                _base=base, _rule_length=rule_length,
            )
        strength = _strength_estimate(a, q, family, base, scale, rule_length=rule_length)
        if best is None or strength > best[0]:
            best = (strength, family, scale)
        if strength >= target:
            break
    if best is None:
        raise NoAdmissibleRepeller("no admissible repeller target found")
    _, family, scale = best
    return RationalRotationParams(
        p, q, a, family, rule_name, scale, divergent, margin, seed,
        _base=base, _rule_length=rule_length,
    )


def as_boundary_target(x):
    if isinstance(x, str) and x.strip().lower() == "inf":
        return INF
    return as_scalar(x)


class RationalConstructionSource(CoefficientSource):
    """Coefficient stream of the rational-rotation construction."""

    kind = "rational"

    def __init__(self, params: RationalRotationParams):
        self.params = params
        self._cache = {}

    def _stage_pair(self, r: int):
        pair = self._cache.get(r)
        if pair is None:
            alpha, beta = self.params.alpha(r), self.params.beta(r)
            if not (alpha > 0 and beta > 0):
                raise NonPositiveCoefficient(
                    f"stage {r}: alpha = {alpha}, beta = {beta}; shrink the t-scale"
                )
            pair = (alpha, beta)
            self._cache[r] = pair
        return pair

    def coefficient(self, i: int) -> mpf:
        q = self.params.q
        m = i % q
        if m == 1:
            return self._stage_pair((i - 1) // q)[0]
        if m == 2:
            return self._stage_pair((i - 2) // q)[1]
        return self.params.a

    def limit(self):
        return self.params.a

    def describe(self):
        d = {"kind": self.kind}
        d.update(self.params.describe())
        return d


def build_sequence(params: RationalRotationParams) -> RationalConstructionSource:
    src = RationalConstructionSource(params)
    src.coefficient(1)  # fail fast on an over-aggressive rule
    src.coefficient(2)
    return src


@dataclass
class StageRecord:
    r: int
    alpha: object
    beta: object
    kind: str
    attractor: object
    repeller: object
    multiplier: object

    def to_dict(self):
        return {
            "r": self.r,
            "alpha": scalar_str(self.alpha),
            "beta": scalar_str(self.beta),
            "class": self.kind,
            "attractor": scalar_str(self.attractor),
            "repeller": scalar_str(self.repeller),
            "multiplier": scalar_str(self.multiplier),
        }


@dataclass
class ConstructionCertificate:
    """Numerical evidence for the three construction conditions: every
    stage hyperbolic, fixed points settling at the prescribed targets,
    and divergent -log multiplier mass."""

    stages: list
    attractor_limit: object
    repeller_limit: object
    tail_start: int
    max_attractor_dev: object
    max_repeller_dev: object
    neg_log_mu_sum: object
    neg_log_mu_profile: list  # [(r, partial sum)]
    slope: object
    slope_stability: object
    slope_fit_rel_err: object
    divergent_rule: bool
    conditions: dict
    mu_sum_min: object

    @property
    def passed(self) -> bool:
        return all(self.conditions.values())

    def to_dict(self, stage_cap: int = 1200) -> dict:
        if len(self.stages) <= stage_cap:
            rows = self.stages
            sampling = "all"
        else:
            stride = len(self.stages) // stage_cap + 1
            rows = self.stages[::stride]
            sampling = f"stride-{stride}"
        return {
            "stage_sampling": sampling,
            "num_stages": len(self.stages),
            "stages": [s.to_dict() for s in rows],
            "attractor_limit": scalar_str(self.attractor_limit),
            "repeller_limit": scalar_str(self.repeller_limit),
            "tail_start": self.tail_start,
            "max_attractor_dev_tail": scalar_str(self.max_attractor_dev),
            "max_repeller_dev_tail": scalar_str(self.max_repeller_dev),
            "neg_log_mu_sum": scalar_str(self.neg_log_mu_sum),
            "neg_log_mu_profile": [
                {"r": r, "sum": scalar_str(s)} for (r, s) in self.neg_log_mu_profile
            ],
            "slope": scalar_str(self.slope),
            "slope_stability": scalar_str(self.slope_stability),
            "slope_fit_rel_err": scalar_str(self.slope_fit_rel_err),
            "divergent_rule": self.divergent_rule,
            "conditions": dict(self.conditions),
            "mu_sum_min": scalar_str(self.mu_sum_min),
            "passed": self.passed,
        }


def certify(
    params: RationalRotationParams,
    num_stages: int,
    tail_tol="1e-2",
    mu_sum_min="5",
    slope_fit_tol="0.2",
) -> ConstructionCertificate:
    """Classify every stage map, record fixed points and multipliers,
    and evaluate the three conditions.  Raises StageNotHyperbolic as
    soon as any stage fails to classify hyperbolic."""
    if num_stages < 10:
        raise OutOfRange("need at least 10 stages to certify")
    if params.max_stages() is not None and num_stages > params.max_stages():
        raise OutOfRange(
            f"rule supplies {params.max_stages()} stages, {num_stages} requested"
        )
    tail_tol = as_scalar(tail_tol)
    mu_sum_min = as_scalar(mu_sum_min)
    slope_fit_tol = as_scalar(slope_fit_tol)

    a_lim = params.family.attractor
    r_lim = params.family.repeller
    slope_abs = abs(params.family.slope)

    stages = []
    mu_sum = mpf(0)
    profile = []
    checkpoints = sorted(
        {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, num_stages}
    )
    tail_start = min(50, num_stages // 2)
    max_a_dev = mpf(0)
    max_r_dev = mpf(0)
    fit_errs = []
    fit_lo = 3 * num_stages // 4
    for r in range(num_stages):
        alpha, beta = params.alpha(r), params.beta(r)
        if not (alpha > 0 and beta > 0):
            raise NonPositiveCoefficient(f"stage {r}: nonpositive coefficient")
        cls = classify(stage_map(params.a, params.q, alpha, beta))
        if not cls.is_hyperbolic:
            raise StageNotHyperbolic(r, f"stage {r} classified {cls.kind}")
        mu_sum += -log(cls.multiplier)
        if r + 1 in checkpoints:
            profile.append((r + 1, mu_sum))
        a_dev = chordal_distance(cls.attractor, a_lim)
        r_dev = chordal_distance(cls.repeller, r_lim)
        if r >= tail_start:
            max_a_dev = max(max_a_dev, a_dev)
            max_r_dev = max(max_r_dev, r_dev)
        if r >= fit_lo:
            predicted = slope_abs * params.t_value(r)
            fit_errs.append(abs(-log(cls.multiplier) - predicted) / predicted)
        stages.append(
            StageRecord(
                r, alpha, beta, cls.kind, cls.attractor, cls.repeller, cls.multiplier
            )
        )
    fit_errs.sort()
    fit_med = fit_errs[len(fit_errs) // 2] if fit_errs else mpf(0)
    conditions = {
        "stages_hyperbolic": True,
        "fixed_points_settle": bool(max_a_dev <= tail_tol and max_r_dev <= tail_tol),
        "multipliers_diverge": bool(params.divergent_rule and mu_sum > mu_sum_min),
        "slope_fit": bool(fit_med <= slope_fit_tol),
    }
    return ConstructionCertificate(
        stages=stages,
        attractor_limit=a_lim,
        repeller_limit=r_lim,
        tail_start=tail_start,
        max_attractor_dev=max_a_dev,
        max_repeller_dev=max_r_dev,
        neg_log_mu_sum=mu_sum,
        neg_log_mu_profile=profile,
        slope=params.family.slope,
        slope_stability=params.family.slope_stability,
        slope_fit_rel_err=fit_med,
        divergent_rule=params.divergent_rule,
        conditions=conditions,
        mu_sum_min=mu_sum_min,
    )


def boundary_sample(n_points: int, exclude=(), exclude_radius="0.1"):
    """Evenly spread boundary points, skipping the excluded
    neighborhoods."""
    exclude_radius = as_scalar(exclude_radius)
    grid = 4 * n_points
    pts = []
    for k in range(grid):
        theta = -pi + 2 * pi * (mpf(2 * k + 1) / (2 * grid))
        cand = boundary_from_angle(theta)
        if all(chordal_distance(cand, e) > exclude_radius for e in exclude):
            pts.append(cand)
            if len(pts) == n_points:
                break
    return pts


def composed_image_diameters(
    params: RationalRotationParams,
    checkpoints=(1, 10, 100, 1000),
    n_points: int = 20,
    exclude_radius="0.1",
):
    """Diameters of the image of a fixed boundary sample (avoiding the
    repeller neighborhood) under the running composition of stage maps;
    the uniform-contraction diagnostic."""
    sample = boundary_sample(
        n_points, exclude=(params.family.repeller,), exclude_radius=exclude_radius
    )
    out = []
    h = MoebiusMap.identity()
    top = max(checkpoints)
    marks = set(checkpoints)
    for r in range(top):
        h = h.compose(params.stage(r))
        if r + 1 in marks:
            out.append((r + 1, boundary_diameter([h(x) for x in sample])))
    return out
