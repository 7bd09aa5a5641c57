"""Nested block construction for limits with irrational rotation number.

The target rotation number rho is approximated by its continued-fraction
convergents p_n/q_n (q_n >= 3), each lifted to a coefficient value
a_n with rotation number exactly p_n/q_n.  Stage n reuses the
rational-rotation machinery at (a_n, q_n) to produce one hyperbolic
period map psi_n whose repeller avoids a finite avoidance set M_n built
from stage n+1 (attractor, its partial-map images, 0, and the forward
psi-orbit of the partial images of 0, truncated at the contraction
scale).  Block powers N_k are then chosen forward so the accumulated
composition theta_k = psi_1^N_1 o ... o psi_k^N_k squeezes M_k below
the diameter schedule 2^-k, which yields a sampled Cauchy certificate
for the convergents of the assembled coefficient stream.

Stages are built highest-index-first (M_n needs stage n+1): K blocks
are emitted and one auxiliary stage K+1 exists only to define M_K.
"""

from __future__ import annotations

import bisect
import random
from dataclasses import dataclass, field
from math import gcd

from mpmath import mp, mpf, log, pi, sqrt

from .engine import CoefficientSource, trace_by_composition
from .errors import (
    CauchyViolation,
    DegenerateSlope,
    ExceptionalRepeller,
    NoAdmissibleRepeller,
    NotEnoughConvergents,
    OutOfRange,
    PowerCapExceeded,
    RepellerInOrbit,
)
from .moebius import (
    INF,
    MoebiusMap,
    angles_diameter,
    boundary_from_angle,
    cayley_angle,
    cf_map,
    classify,
    inverse_rotation_number,
    is_inf,
)
from .precision import as_scalar, scalar_str
from .rational import FamilySolution, orbit_of_zero, solve_families, stage_map


@dataclass(frozen=True)
class QuadraticIrrational:
    """(p + sign*sqrt(d))/q with d a positive non-square integer."""

    p: int
    q: int
    d: int
    sign: int = 1

    def value(self) -> mpf:
        if self.q == 0:
            raise OutOfRange("denominator q must be nonzero")
        if self.d <= 0 or int(sqrt(self.d)) ** 2 == self.d:
            raise OutOfRange(f"d = {self.d} must be a positive non-square integer")
        return (mpf(self.p) + self.sign * sqrt(mpf(self.d))) / self.q

    def describe(self) -> dict:
        return {
            "form": "quadratic",
            "p": self.p,
            "q": self.q,
            "d": self.d,
            "sign": self.sign,
        }


def golden_rho() -> QuadraticIrrational:
    """(3 - sqrt 5)/2 ~ 0.3819660..., the golden-mean rotation target."""
    return QuadraticIrrational(3, 2, 5, -1)


def rho_value(rho) -> mpf:
    if isinstance(rho, QuadraticIrrational):
        return rho.value()
    if isinstance(rho, dict):
        form = rho.get("form")
        if form == "quadratic":
            return QuadraticIrrational(
                int(rho["p"]), int(rho["q"]), int(rho["d"]), int(rho.get("sign", 1))
            ).value()
        if form == "literal":
            return as_scalar(str(rho["digits"]))
        raise OutOfRange(f"unknown rho form {form!r}")
    return as_scalar(rho)


@dataclass(frozen=True)
class RotationApproximation:
    p: int
    q: int
    a: object  # inverse_rotation_number(p/q)


def rotation_convergents(rho, count: int):
    """First `count` continued-fraction convergents p_n/q_n of rho with
    q_n >= 3 and p_n/q_n in (0, 1/2), each lifted through the inverse
    rotation-number map.  The expansion runs at >= 512 bits regardless
    of the ambient precision so denominators are exact."""
    approxs = []
    with mp.workprec(max(mp.prec, 512 + 32 * count)):
        x = rho_value(rho)
        if not (0 < x < mpf(1) / 2):
            raise OutOfRange(f"rotation target must lie in (0, 1/2), got {x}")
        h_prev, h_cur = 0, 1  # numerator seeds h_{-2}, h_{-1}
        k_prev, k_cur = 1, 0  # denominator seeds k_{-2}, k_{-1}
        guard = mpf(2) ** (-(mp.prec // 2))
        rem = x
        for _ in range(8 * count + 64):
            a_i = int(mp.floor(rem))
            h_prev, h_cur = h_cur, a_i * h_cur + h_prev
            k_prev, k_cur = k_cur, a_i * k_cur + k_prev
            if k_cur >= 3 and 0 < 2 * h_cur < k_cur and gcd(h_cur, k_cur) == 1:
                approxs.append((h_cur, k_cur))
                if len(approxs) == count:
                    break
            frac = rem - a_i
            if frac < guard:
                break
            rem = 1 / frac
    if len(approxs) < count:
        raise NotEnoughConvergents(
            f"only {len(approxs)} admissible convergents found "
            f"(need {count}); is the target rational?"
        )
    return [
        RotationApproximation(p, q, inverse_rotation_number(mpf(p) / q))
        for (p, q) in approxs
    ]


def stage_partials(a, q: int, alpha, beta):
    """psi_{n,l} for l = 0..q-1: identity, T_alpha, T_alpha o T_beta,
    then right-composed with powers of T_a."""
    partials = [MoebiusMap.identity(), cf_map(alpha), cf_map(alpha).compose(cf_map(beta))]
    t_a = cf_map(a)
    for _ in range(3, q):
        partials.append(partials[-1].compose(t_a))
    return partials[:q]


@dataclass
class StageData:
    level: int
    p: int
    q: int
    a: object
    t: object
    alpha: object
    beta: object
    family: FamilySolution
    psi: MoebiusMap
    partials: list
    attractor: object
    repeller: object
    multiplier: object
    avoid_points: list = field(default_factory=list)
    r_max_used: int = 0
    min_avoid_distance: object = None
    power: int = None  # N_n, set for emitted blocks

    def describe(self) -> dict:
        return {
            "level": self.level,
            "p": self.p,
            "q": self.q,
            "a": scalar_str(self.a),
            "t": scalar_str(self.t),
            "alpha": scalar_str(self.alpha),
            "beta": scalar_str(self.beta),
            "attractor": scalar_str(self.attractor),
            "repeller": scalar_str(self.repeller),
            "multiplier": scalar_str(self.multiplier),
            "avoid_points": len(self.avoid_points),
            "r_max_used": self.r_max_used,
            "min_avoid_distance": None
            if self.min_avoid_distance is None
            else scalar_str(self.min_avoid_distance),
            "power": self.power,
        }


def _dedupe_boundary(points, tol=None):
    if tol is None:
        tol = mpf("1e-8")
    decorated = sorted((cayley_angle(pt), pt) for pt in points)
    kept = []
    last_angle = None
    for ang, pt in decorated:
        if last_angle is None or ang - last_angle > tol:
            kept.append(pt)
            last_angle = ang
    # wrap-around duplicate (angle pi vs -pi)
    if len(kept) > 1 and (2 * pi - (decorated[-1][0] - decorated[0][0])) <= tol:
        kept.pop()
    return kept


def _min_distance_to_sorted(sorted_angles, theta):
    """Min angular distance from theta to a sorted angle list."""
    if not sorted_angles:
        return pi
    pos = bisect.bisect_left(sorted_angles, theta)
    best = pi
    for idx in (pos - 1, pos, pos % len(sorted_angles)):
        a = sorted_angles[idx % len(sorted_angles)]
        best = min(best, abs_angle(a, theta))
    return best


def avoidance_set(next_stage: StageData, own_a=None, own_q: int = None, r_max="auto"):
    """Finite truncation of the avoidance set for the stage below
    `next_stage`: its attractor, the partial-map images of the
    attractor, 0, the forward psi-orbits of the partial images of 0 up
    to r_max, and the finite rotation orbits of the attractor (the
    accumulation points of the infinite set).

    r_max='auto' picks ceil(log(1e3)/(-log mu)) from the contraction
    rate, so the dropped tail lies within ~1e-3 of included points.
    """
    a_next = next_stage.attractor
    a_angle = cayley_angle(a_next)
    psi = next_stage.psi
    if r_max == "auto":
        rate = -log(next_stage.multiplier)
        r_max_used = int(mp.ceil(log(1000) / rate)) + 8
        r_max_used = max(10, min(r_max_used, 4000))
    else:
        r_max_used = int(r_max)
    pts = [a_next, mpf(0)]
    for partial in next_stage.partials:
        pts.append(partial(a_next))
    arrival = mpf("1e-3")  # matches the truncation accuracy budget
    for partial in next_stage.partials:
        y = partial(mpf(0))
        pts.append(y)
        for _ in range(r_max_used):
            y = psi(y)
            pts.append(y)
            if abs_angle(cayley_angle(y), a_angle) < arrival:
                break  # tail is covered by the attractor within budget
    # accumulation orbits: the rotations act with period q, so these are
    # finite; include the next stage's rotation orbit of the attractor
    # and (conservatively) the own-stage rotation orbit as well
    t_next = cf_map(next_stage.a)
    y = a_next
    for _ in range(next_stage.q):
        y = t_next(y)
        pts.append(y)
    if own_a is not None and own_q:
        t_own = cf_map(own_a)
        y = a_next
        for _ in range(own_q):
            y = t_own(y)
            pts.append(y)
    return _dedupe_boundary(pts), r_max_used


def _fit_perturbation(a, q: int, family: FamilySolution, t_init):
    """Largest working perturbation size from {8, 4, 2, 1, 1/2, ...} * t_init:
    coefficients positive and the period map hyperbolic.  The upward
    probes keep the per-stage contraction rate healthy, which bounds
    both the avoidance-set truncation length and the block powers."""
    t = as_scalar(t_init) * 8
    while t > mpf(2) ** -60:
        alpha, beta = family.alpha(t), family.beta(t)
        if alpha > 0 and beta > 0:
            cls = classify(stage_map(a, q, alpha, beta))
            if cls.is_hyperbolic:
                return t, alpha, beta, cls
        t /= 2
    return None


def _build_stage(
    level: int,
    approx: RotationApproximation,
    avoid_points,
    margin,
    seed: int,
    t_init,
    max_tries: int = 256,
    rate_floor="3e-2",
) -> StageData:
    """Pick a repeller target clear of the orbit, infinity and the
    avoidance set, solve the linear families, and fix the perturbation
    size.  Candidates are drawn until the per-stage contraction rate
    -log(mu) reaches rate_floor (best draw wins otherwise)."""
    a, q = approx.a, approx.q
    margin = as_scalar(margin)
    rate_floor = as_scalar(rate_floor)
    orbit_angles = sorted(
        cayley_angle(z) for z in orbit_of_zero(a, q) + [INF, mpf(0)]
    )
    avoid_angles = sorted(cayley_angle(z) for z in avoid_points)
    rng = random.Random(seed * 8191 + level)
    best = None
    for _ in range(max_tries):
        theta = mpf(rng.uniform(-3.14159265, 3.14159265))
        if (
            _min_distance_to_sorted(orbit_angles, theta) < margin
            or _min_distance_to_sorted(avoid_angles, theta) < margin
        ):
            continue
        cand = boundary_from_angle(theta)
        if is_inf(cand):
            continue
        try:
            family = solve_families(a, q, cand)
        except (ExceptionalRepeller, RepellerInOrbit, DegenerateSlope):
            continue
        chosen = _fit_perturbation(a, q, family, t_init)
        if chosen is None:
            continue
        t, alpha, beta, cls = chosen
        rate = -log(cls.multiplier)
        if best is None or rate > best[0]:
            best = (rate, family, t, alpha, beta, cls)
        if rate >= rate_floor:
            break
    if best is None:
        raise NoAdmissibleRepeller(
            f"stage {level}: no admissible repeller at margin {margin}"
        )
    _, family, t, alpha, beta, cls = best
    psi = stage_map(a, q, alpha, beta)
    min_dist = (
        _min_distance_to_sorted(avoid_angles, cayley_angle(cls.repeller))
        if avoid_points
        else None
    )
    return StageData(
        level=level,
        p=approx.p,
        q=approx.q,
        a=a,
        t=t,
        alpha=alpha,
        beta=beta,
        family=family,
        psi=psi,
        partials=stage_partials(a, q, alpha, beta),
        attractor=cls.attractor,
        repeller=cls.repeller,
        multiplier=cls.multiplier,
        avoid_points=list(avoid_points),
        min_avoid_distance=min_dist,
    )


def _set_diameter(m: MoebiusMap, points) -> mpf:
    return angles_diameter([cayley_angle(m(x)) for x in points])


def choose_power(
    theta_prefix: MoebiusMap,
    psi: MoebiusMap,
    points,
    bound,
    n_cap: int = 10**6,
    multiplier=None,
    min_power: int = 0,
):
    """Minimal (within a factor of two) N >= min_power with
    diam(theta_prefix(psi^N(points))) < bound, by doubling then
    bisection.  Raises PowerCapExceeded with a rate-based estimate when
    n_cap is insufficient."""
    bound = as_scalar(bound)
    d0 = _set_diameter(theta_prefix, points)
    if min_power == 0 and d0 < bound:
        return 0, d0
    start = max(1, min_power)
    d_start = _set_diameter(theta_prefix.compose(psi.power(start)), points)
    if d_start < bound:
        return start, d_start
    lo = start  # known failing
    n = 2 * start
    while True:
        if n > n_cap:
            if multiplier is not None and 0 < multiplier < 1:
                est = int(mp.ceil(log(d0 / bound) / (-log(multiplier))))
            else:
                est = n
            raise PowerCapExceeded(est, n_cap)
        d = _set_diameter(theta_prefix.compose(psi.power(n)), points)
        if d < bound:
            hi = n
            break
        lo = n
        n *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        d = _set_diameter(theta_prefix.compose(psi.power(mid)), points)
        if d < bound:
            hi = mid
        else:
            lo = mid
    d = _set_diameter(theta_prefix.compose(psi.power(hi)), points)
    return hi, d


@dataclass
class IrrationalParams:
    rho: object = None  # QuadraticIrrational | {'form': ...} | literal
    stages: int = 3
    r_max: object = "auto"
    n_cap: int = 10**6
    seed: int = 0
    margin: object = "0.02"
    t_init: object = "1e-2"

    def __post_init__(self):
        if self.rho is None:
            self.rho = golden_rho()
        if self.stages < 1:
            raise OutOfRange("need at least one stage")

    def describe(self) -> dict:
        rho = (
            self.rho.describe()
            if isinstance(self.rho, QuadraticIrrational)
            else self.rho
            if isinstance(self.rho, dict)
            else {"form": "literal", "digits": str(self.rho)}
        )
        return {
            "rho": rho,
            "stages": self.stages,
            "r_max": self.r_max,
            "N_cap": self.n_cap,
            "seed": self.seed,
            "margin": str(self.margin),
            "t_init": str(self.t_init),
        }


class IrrationalConstructionSource(CoefficientSource):
    """Block-laid-out coefficient stream: within block k (boundaries
    n_{k-1} < i <= n_k), slot residues 1 and 2 relative to the block
    start carry alpha_k and beta_k, the rest carry a_k."""

    kind = "irrational"

    def __init__(self, nested: "NestedSequence"):
        self.nested = nested

    def coefficient(self, i: int) -> mpf:
        bounds = self.nested.boundaries
        if i < 1 or i > bounds[-1]:
            raise OutOfRange(f"index {i} outside assembled range 1..{bounds[-1]}")
        k = bisect.bisect_left(bounds, i)
        stage = self.nested.stages[k]
        local = i - (bounds[k - 1] if k else 0)
        m = local % stage.q
        if m == 1:
            return stage.alpha
        if m == 2:
            return stage.beta
        return stage.a

    def limit(self):
        return self.nested.stages[-1].a  # closest block value available

    def describe(self):
        return {
            "kind": self.kind,
            "boundaries": list(self.nested.boundaries),
            "stages": [s.describe() for s in self.nested.stages],
        }


@dataclass
class NestedSequence:
    params: IrrationalParams
    stages: list  # StageData, levels 1..K with powers set
    aux_stage: StageData  # level K+1, defines M_K only
    boundaries: list  # n_k = sum_{i<=k} q_i N_i
    schedule: list  # [(k, N_k, bound, achieved diameter)]

    def source(self) -> IrrationalConstructionSource:
        return IrrationalConstructionSource(self)

    def theta(self, k: int) -> MoebiusMap:
        m = MoebiusMap.identity()
        for stage in self.stages[:k]:
            m = m.compose(stage.psi.power(stage.power))
        return m

    def with_powers(self, overrides: dict) -> "NestedSequence":
        """Copy with some block powers replaced (diagnostic tool; the
        schedule and boundaries are recomputed, certificates will fail
        if the replacement breaks the diameter schedule)."""
        import copy

        stages = [copy.copy(s) for s in self.stages]
        for k, n_val in overrides.items():
            stages[k - 1].power = int(n_val)
        boundaries = []
        total = 0
        for s in stages:
            total += s.q * s.power
            boundaries.append(total)
        schedule = []
        theta = MoebiusMap.identity()
        for k, s in enumerate(stages, start=1):
            theta = theta.compose(s.psi.power(s.power))
            schedule.append(
                (k, s.power, mpf(2) ** -k, _set_diameter(theta, s.avoid_points))
            )
        return NestedSequence(self.params, stages, self.aux_stage, boundaries, schedule)

    def describe(self) -> dict:
        return {
            "stages": [s.describe() for s in self.stages],
            "aux_stage": self.aux_stage.describe(),
            "boundaries": list(self.boundaries),
            "schedule": [
                {
                    "k": k,
                    "N": n,
                    "bound": scalar_str(bound),
                    "diameter": scalar_str(diam),
                }
                for (k, n, bound, diam) in self.schedule
            ],
        }


def build_nested(params: IrrationalParams) -> NestedSequence:
    """Run the whole pipeline: convergents, stages K+1 down to 1 (each
    avoiding the set induced by the stage above), then block powers
    forward against the diameter schedule."""
    k_blocks = params.stages
    approxs = rotation_convergents(params.rho, k_blocks + 1)
    stages_by_level = {}
    for level in range(k_blocks + 1, 0, -1):
        if level == k_blocks + 1:
            avoid, r_used = [], 0
        else:
            own = approxs[level - 1]
            avoid, r_used = avoidance_set(
                stages_by_level[level + 1],
                own_a=own.a,
                own_q=own.q,
                r_max=params.r_max,
            )
        stage = _build_stage(
            level,
            approxs[level - 1],
            avoid,
            params.margin,
            params.seed,
            params.t_init,
        )
        stage.r_max_used = r_used
        stages_by_level[level] = stage

    schedule = []
    boundaries = []
    theta = MoebiusMap.identity()
    total = 0
    for k in range(1, k_blocks + 1):
        stage = stages_by_level[k]
        bound = mpf(2) ** -k
        n_k, achieved = choose_power(
            theta,
            stage.psi,
            stage.avoid_points,
            bound,
            n_cap=params.n_cap,
            multiplier=stage.multiplier,
            min_power=1,
        )
        stage.power = n_k
        theta = theta.compose(stage.psi.power(n_k))
        achieved = _set_diameter(theta, stage.avoid_points)
        schedule.append((k, n_k, bound, achieved))
        total += stage.q * n_k
        boundaries.append(total)

    return NestedSequence(
        params=params,
        stages=[stages_by_level[k] for k in range(1, k_blocks + 1)],
        aux_stage=stages_by_level[k_blocks + 1],
        boundaries=boundaries,
        schedule=schedule,
    )


@dataclass
class CauchyCertificate:
    """Records of the three checked estimate families: the diameter
    schedule, the theta-pair estimates dist(theta_k(0), theta_s(0)) <
    2^(1-k), and sampled dist(tau_{n_k}, tau_m) < 2^(2-k)."""

    schedule_rows: list  # (k, N, bound, diam, ok)
    pair_rows: list  # (k, s, dist, bound, ok)
    sample_rows: list  # (k, worst_m, worst_dist, bound, ok, checked)
    trace_length: int

    @property
    def passed(self) -> bool:
        return (
            all(r[-1] for r in self.schedule_rows)
            and all(r[-1] for r in self.pair_rows)
            and all(r[-2] for r in self.sample_rows)
        )

    def to_dict(self) -> dict:
        return {
            "trace_length": self.trace_length,
            "schedule": [
                {
                    "k": k,
                    "N": n,
                    "bound": scalar_str(bound),
                    "diameter": scalar_str(diam),
                    "ok": ok,
                }
                for (k, n, bound, diam, ok) in self.schedule_rows
            ],
            "theta_pairs": [
                {
                    "k": k,
                    "s": s,
                    "distance": scalar_str(d),
                    "bound": scalar_str(bound),
                    "ok": ok,
                }
                for (k, s, d, bound, ok) in self.pair_rows
            ],
            "tau_samples": [
                {
                    "k": k,
                    "worst_m": m,
                    "worst_distance": scalar_str(d),
                    "bound": scalar_str(bound),
                    "ok": ok,
                    "checked": cnt,
                }
                for (k, m, d, bound, ok, cnt) in self.sample_rows
            ],
            "passed": self.passed,
        }


def verify_cauchy(
    nested: NestedSequence,
    max_k: int = None,
    samples_per_k: int = 64,
    strict: bool = True,
) -> CauchyCertificate:
    """Evaluate the assembled stream once and check the schedule, the
    theta-pair estimates, and sampled tau distances.  With strict=True
    the first failure raises CauchyViolation; otherwise all rows are
    collected and `passed` reports the outcome."""
    k_blocks = len(nested.stages)
    if max_k is None:
        max_k = k_blocks
    max_k = min(max_k, k_blocks)
    boundaries = nested.boundaries
    n_total = boundaries[-1]
    if n_total < 1:
        raise OutOfRange("assembled sequence is empty")
    trace = trace_by_composition(nested.source(), n_total)
    angles = trace.angles

    def angle_at_index(n):
        # tau_0 = 0 sits at angle pi (Cayley image of 0 is -1)
        return pi if n == 0 else angles[n - 1]

    schedule_rows = []
    theta = MoebiusMap.identity()
    for k in range(1, max_k + 1):
        stage = nested.stages[k - 1]
        theta = theta.compose(stage.psi.power(stage.power))
        bound = mpf(2) ** -k
        diam = _set_diameter(theta, stage.avoid_points)
        ok = bool(diam < bound)
        schedule_rows.append((k, stage.power, bound, diam, ok))
        if strict and not ok:
            raise CauchyViolation(k, None, f"diameter schedule fails at k={k}: "
                                  f"{diam} >= {bound}")

    pair_rows = []
    for k in range(1, max_k + 1):
        bound = mpf(2) ** (1 - k)
        for s in range(k + 1, k_blocks + 1):
            d = abs_angle(angle_at_index(boundaries[k - 1]), angle_at_index(boundaries[s - 1]))
            ok = bool(d < bound)
            pair_rows.append((k, s, d, bound, ok))
            if strict and not ok:
                raise CauchyViolation(k, boundaries[s - 1])

    sample_rows = []
    for k in range(1, max_k + 1):
        bound = mpf(2) ** (2 - k)
        n_k = boundaries[k - 1]
        base_angle = angle_at_index(n_k)
        worst = (None, mpf(0))
        count = 0
        candidates = set(boundaries)
        span = n_total - n_k
        if span > 0:
            step = max(1, span // samples_per_k)
            candidates.update(range(n_k + 1, n_total + 1, step))
            candidates.add(n_total)
        for m in sorted(candidates):
            if m <= n_k:
                continue
            d = abs_angle(base_angle, angle_at_index(m))
            count += 1
            if d > worst[1]:
                worst = (m, d)
            if strict and not d < bound:
                raise CauchyViolation(k, m)
        ok = bool(worst[1] < bound) if count else True
        sample_rows.append((k, worst[0], worst[1], bound, ok, count))

    return CauchyCertificate(schedule_rows, pair_rows, sample_rows, n_total)


def abs_angle(t1, t2):
    d = abs(t1 - t2) % (2 * pi)
    return d if d <= pi else 2 * pi - d
