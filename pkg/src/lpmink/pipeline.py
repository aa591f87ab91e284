"""End-to-end solves for general measures on the circle.

Routes by support classification: general position goes through the discrete
solver (after discretization when a density is present), measures on a
closed semicircle through the reflect-double-solve-halve reduction, and a
pair of antipodal atoms is the one nonexistence case.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AntipodalPairError,
    CannotAvoidAtomsError,
    ConcentratedError,
    NotSymmetricError,
)
from .geometry import (
    TWO_PI,
    Isometry2,
    Polygon,
    SymmetryGroup,
    canonical_angle,
    circular_distance,
    dilate,
    polygon_from_support,
    support_distance,
)
from .measure import (
    ANTIPODAL_PAIR,
    GENERAL_POSITION,
    SEMICIRCLE,
    SINGLE_DIRECTION,
    DiscreteMeasure,
    MeasureClass,
    MeasureSpec,
    PiecewiseLinearDensity,
    classify,
    lp_surface_measure,
    weak_distance,
)
from .solver import (
    SolveReport,
    SolverConfig,
    measure_residual,
    orbit_partition,
    solve_discrete,
)

log = logging.getLogger("lpmink.pipeline")

NO_CONVERGENCE_WARNING = "no-convergence: m_max reached before stabilization"


@dataclass
class PipelineConfig(SolverConfig):
    """Solver tolerances plus the discretization-refinement loop controls."""

    m0: int = 64
    m_max: int = 8192
    growth: int = 2
    tol_body: float = 1e-4
    tol_measure: float = 1e-4

    def __post_init__(self):
        super().__post_init__()
        if self.m0 < 3 or self.growth < 2:
            raise ValueError("need m0 >= 3 and growth >= 2")


def classify_spec(spec: MeasureSpec) -> MeasureClass:
    """Support classification of an atoms-plus-density measure."""
    if spec.is_purely_atomic():
        return classify(spec.atoms)
    intervals = []
    if spec.atoms is not None:
        for t in spec.atoms.thetas:
            intervals.append((float(t), float(t)))
    dens = spec.density
    knots = dens._t
    vals = dens._f
    for k in range(len(knots) - 1):
        if vals[k] > 0.0 or vals[k + 1] > 0.0:
            intervals.append((float(knots[k]), float(knots[k + 1])))
    intervals = [(canonical_angle(a), canonical_angle(a) + (b - a)) for a, b in intervals]
    intervals.sort()
    merged = []
    for a, b in intervals:
        if merged and a <= merged[-1][1] + 1e-12:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    if len(merged) >= 2 and merged[0][0] + TWO_PI <= merged[-1][1] + 1e-12:
        merged[0][0] = merged[-1][0] - TWO_PI
        merged[0][1] = max(merged[0][1], merged[-1][1] - TWO_PI)
        merged.pop()
    if len(merged) == 1 and merged[0][1] - merged[0][0] >= TWO_PI - 1e-12:
        return MeasureClass(GENERAL_POSITION, TWO_PI)
    gaps = []
    for k in range(len(merged)):
        nxt = merged[(k + 1) % len(merged)]
        start_next = nxt[0] + (TWO_PI if k == len(merged) - 1 else 0.0)
        gaps.append((start_next - merged[k][1], k))
    gmax, kmax = max(gaps)
    if gmax < math.pi - 1e-12:
        return MeasureClass(GENERAL_POSITION, TWO_PI - gmax)
    start = merged[(kmax + 1) % len(merged)][0]
    width = TWO_PI - gmax
    w = canonical_angle(start + width / 2.0)
    return MeasureClass(SEMICIRCLE, width, v=canonical_angle(w + math.pi / 2.0), w=w)


def discretize(spec: MeasureSpec, m: int) -> DiscreteMeasure:
    """Grid measure: atom at angle 2*pi*j/m carries 1/m^2 plus the input
    measure's mass on the half-open arc ((j-1)*2*pi/m, j*2*pi/m]."""
    if m < 3:
        raise ValueError("need m >= 3")
    step = TWO_PI / m
    masses = np.full(m, 1.0 / (m * m))
    if spec.atoms is not None:
        for t, mass in zip(spec.atoms.thetas, spec.atoms.masses):
            j = int(math.ceil(t / step - 1e-12))
            if j <= 0:
                j = m
            masses[j - 1] += mass
    if spec.density is not None:
        for j in range(1, m + 1):
            masses[j - 1] += spec.density.arc_mass((j - 1) * step, j * step)
    thetas = canonical_angle(0.0) + step * np.arange(1, m + 1)
    thetas[-1] = 0.0  # angle 2*pi is the same grid point as 0
    return DiscreteMeasure(thetas, masses)


def _symmetric_base_angles(G: SymmetryGroup, l: int, m: int, spec: MeasureSpec):
    """G_m-orbit of a base point avoiding every atom image, G_m being the
    symmetry group of the regular lm-gon aligned with G."""
    if l < 3 or m < 2:
        raise ValueError("need l >= 3 and m >= 2")
    if G.kind in ("cyclic", "dihedral") and l % max(G.order_k, 1) != 0:
        raise NotSymmetricError(f"group order {G.order_k} does not divide l = {l}")
    phi0 = G.axis if G.kind == "dihedral" else 0.0
    lm = l * m
    forbidden = np.array([])
    if spec.atoms is not None and spec.atoms.n:
        big = SymmetryGroup.dihedral(lm, phi0)
        images = [A.apply_angles(spec.atoms.thetas) for A in big.elements()]
        forbidden = np.sort(np.concatenate(images))
    base = phi0 + math.pi / (2.0 * lm)
    golden = (math.sqrt(5.0) - 1.0) / 2.0
    for trial in range(1000):
        beta = canonical_angle(base + trial * golden * math.pi / lm)
        pts = np.concatenate(
            [beta + TWO_PI * np.arange(lm) / lm,
             (2.0 * phi0 - beta) + TWO_PI * np.arange(lm) / lm]
        )
        pts = np.sort(pts % TWO_PI)
        pts = pts[np.concatenate([[True], np.diff(pts) > 1e-12])]
        if forbidden.size:
            d = np.abs(pts[:, None] - forbidden[None, :])
            d = np.minimum(d, TWO_PI - d)
            if d.min() <= 1e-9:
                continue
        return pts
    raise CannotAvoidAtomsError("no subdivision base point clears the atom orbit")


def discretize_symmetric(spec: MeasureSpec, G: SymmetryGroup, l: int, m: int) -> DiscreteMeasure:
    """Arc-midpoint discretization on a G-symmetric subdivision.

    The circle is cut at the orbit of a base point under the symmetry group
    of a regular lm-gon containing G; each arc's mass lands on its midpoint.
    Masses are averaged over G-orbits, so the output is exactly G-invariant.
    """
    pts = _symmetric_base_angles(G, l, m, spec)
    n = len(pts)
    mids = np.empty(n)
    masses = np.empty(n)
    for k in range(n):
        a = pts[k]
        b = pts[(k + 1) % n] + (TWO_PI if k == n - 1 else 0.0)
        mids[k] = canonical_angle(0.5 * (a + b))
        masses[k] = spec.arc_mass(a, b)
    keep = masses > 0.0
    mids, masses = mids[keep], masses[keep]
    if not G.is_trivial:
        try:
            orb = orbit_partition(mids, G, tol=1e-9)
        except Exception as exc:
            raise NotSymmetricError(
                f"measure is not invariant under {G.label()}: {exc}"
            ) from exc
        for o in orb.orbits:
            vals = masses[o]
            mean = float(np.mean(vals))
            if np.max(np.abs(vals - mean)) > 1e-8 * max(mean, 1e-300):
                raise NotSymmetricError(
                    f"arc masses differ across a {G.label()} orbit"
                )
            masses[o] = mean
    return DiscreteMeasure(mids, masses)


def _single_direction_body(w: float, mass: float, p: float) -> Polygon:
    """Dilated triangle solving a one-atom measure: normals w, w +- 2*pi/3."""
    normals = [w, canonical_angle(w + 2.0 * math.pi / 3.0),
               canonical_angle(w - 2.0 * math.pi / 3.0)]
    K0 = polygon_from_support(normals, [1.0, 0.0, 0.0])
    base = lp_surface_measure(K0, p).total_mass()  # single atom at w
    lam = mass / base
    lam0 = lam ** (1.0 / (2.0 - p))
    return dilate(K0, lam0)


def _combine_reflection(G: SymmetryGroup, v: float, w: float) -> SymmetryGroup:
    """Group generated by G and the reflection across lin(v), for the groups
    a semicircle-supported measure can actually admit."""
    refl_v = SymmetryGroup.dihedral(1, canonical_angle(v))
    if G.is_trivial:
        return refl_v
    if G.kind == "dihedral" and G.order_k == 1:
        axis = G.axis
        dv = min(circular_distance(axis, v), circular_distance(axis, v + math.pi))
        dw = min(circular_distance(axis, w), circular_distance(axis, w + math.pi))
        if dv <= 1e-9:
            return refl_v
        if dw <= 1e-9:
            return SymmetryGroup.dihedral(2, canonical_angle(v))
    raise NotSymmetricError(
        f"symmetry {G.label()} is incompatible with a semicircle-supported measure"
    )


def solve_semicircle(mu: DiscreteMeasure, cls: MeasureClass, p: float,
                     cfg: SolverConfig | None = None):
    """Solve an atomic measure concentrated on a closed semicircle.

    Single direction: a closed-form dilated triangle.  Proper semicircle:
    reflect-double across the arc's chord direction, solve with the
    reflection symmetry enforced, then keep the half-body on the support
    side.  An antipodal pair admits no solution.
    """
    cfg = cfg or SolverConfig()
    if cls.tag == ANTIPODAL_PAIR:
        raise AntipodalPairError(
            "no body exists: the support is a pair of antipodal directions"
        )
    if cls.tag == SINGLE_DIRECTION:
        w = cls.w
        P = _single_direction_body(w, mu.total_mass(), p)
        report = SolveReport(
            residual=measure_residual(P, mu, p),
            classification=SINGLE_DIRECTION,
            c=1.0,
        )
        return P, report
    if cls.tag != SEMICIRCLE:
        raise ConcentratedError("solve_semicircle needs a concentrated classification")

    v, w = cls.v, cls.w
    A = Isometry2("reflection", v)
    doubled = mu + mu.pushforward(A)
    if classify(doubled).tag != GENERAL_POSITION:
        raise ConcentratedError("doubled measure is still concentrated")
    G = SymmetryGroup.dihedral(1, canonical_angle(v))
    K2, rep = solve_discrete(doubled, p, G, cfg)

    cut_normal = canonical_angle(w + math.pi)
    K = polygon_from_support(
        np.append(K2.normals, cut_normal), np.append(K2.support, 0.0)
    )
    report = SolveReport(
        residual=measure_residual(K, mu, p),
        outer_iters=rep.outer_iters,
        newton_iters=rep.newton_iters,
        classification=SEMICIRCLE,
        c=rep.c,
        symmetry=rep.symmetry,
        warnings=list(rep.warnings),
    )
    return K, report


def _loop_groups(G: SymmetryGroup) -> int:
    """Base polygon size l for the symmetric subdivision: the smallest l >= 3
    divisible by the group's rotation order."""
    k = max(G.order_k, 1) if not G.is_trivial else 1
    if k >= 3:
        return k
    return {1: 3, 2: 4}[k]


def _refinement_loop(spec: MeasureSpec, p: float, G: SymmetryGroup,
                     cfg: PipelineConfig):
    """Solve discretizations of increasing resolution until the bodies and
    their boundary measures stabilize."""
    total = spec.total_mass()
    history = []
    warnings: list[str] = []
    prev_P = None
    prev_rep = None
    m = cfg.m0
    l = _loop_groups(G)
    converged = False
    last_mu = None
    while m <= cfg.m_max:
        if G.is_trivial:
            mu_m = discretize(spec, m)
        else:
            mu_m = discretize_symmetric(spec, G, l, max(2, m // l))
        h0 = prev_P.support_values(mu_m.thetas) if prev_P is not None else None
        P_m, rep_m = solve_discrete(mu_m, p, G, cfg, h0=h0)
        S_m = lp_surface_measure(P_m, p)
        wd = weak_distance(S_m, mu_m)
        diam = P_m.diameter()
        entry = {
            "m": int(m),
            "n_atoms": int(mu_m.n),
            "residual": rep_m.residual,
            "diameter": diam,
            "weak_delta": wd,
        }
        if prev_P is not None:
            sd = support_distance(P_m, prev_P)
            entry["support_delta"] = sd
            if sd <= cfg.tol_body * max(diam, 1e-300) and wd <= cfg.tol_measure * total:
                history.append(entry)
                prev_P, prev_rep, last_mu = P_m, rep_m, mu_m
                converged = True
                break
        history.append(entry)
        prev_P, prev_rep, last_mu = P_m, rep_m, mu_m
        m *= cfg.growth
    if not converged:
        warnings.append(NO_CONVERGENCE_WARNING)
    report = SolveReport(
        residual=measure_residual(prev_P, last_mu, p),
        outer_iters=prev_rep.outer_iters,
        newton_iters=prev_rep.newton_iters,
        classification=GENERAL_POSITION,
        c=prev_rep.c,
        symmetry=G.label(),
        warnings=warnings + list(prev_rep.warnings),
        m_final=history[-1]["m"],
        loop_history=history,
    )
    return prev_P, report


def _double_spec(spec: MeasureSpec, axis: float) -> MeasureSpec:
    A = Isometry2("reflection", axis)
    atoms = None
    if spec.atoms is not None:
        atoms = spec.atoms + spec.atoms.pushforward(A)
    density = None
    if spec.density is not None:
        d = spec.density
        refl = d.reflect(axis)
        knots = np.sort(np.unique(np.concatenate([d.knots, refl.knots])))
        density = PiecewiseLinearDensity(knots, d.eval(knots) + refl.eval(knots))
    return MeasureSpec(atoms, density)


def solve(spec: MeasureSpec, p: float, G: SymmetryGroup | None = None,
          cfg: PipelineConfig | None = None):
    """Construct a convex body whose Lp surface area measure is the input.

    Classification decides the route; density inputs go through the
    refinement loop with warm starts.  Raises AntipodalPairError for the one
    nonexistence case; a loop that hits m_max returns its best body with a
    no-convergence warning in the report.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    cfg = cfg or PipelineConfig()
    G = G or SymmetryGroup.trivial()
    cls = classify_spec(spec)
    if cls.tag == ANTIPODAL_PAIR:
        raise AntipodalPairError(
            "no body exists: the support is a pair of antipodal directions"
        )
    if spec.is_purely_atomic():
        if cls.tag in (SINGLE_DIRECTION, SEMICIRCLE):
            return solve_semicircle(spec.atoms, cls, p, cfg)
        P, rep = solve_discrete(spec.atoms, p, G, cfg)
        return P, rep

    if cls.tag == SEMICIRCLE:
        G_loop = _combine_reflection(G, cls.v, cls.w)
        spec_loop = _double_spec(spec, cls.v)
        K2, rep = _refinement_loop(spec_loop, p, G_loop, cfg)
        cut_normal = canonical_angle(cls.w + math.pi)
        K = polygon_from_support(
            np.append(K2.normals, cut_normal), np.append(K2.support, 0.0)
        )
        rep.classification = SEMICIRCLE
        return K, rep

    P, rep = _refinement_loop(spec, p, G, cfg)
    rep.classification = cls.tag
    return P, rep


def _spec_invariant_under(spec: MeasureSpec, A: Isometry2, tol: float = 1e-9) -> bool:
    if spec.atoms is not None:
        mu = spec.atoms
        img = mu.pushforward(A)
        if img.n != mu.n:
            return False
        if np.max(np.abs(img.thetas - mu.thetas)) > tol:
            return False
        if np.max(np.abs(img.masses - mu.masses)) > tol * max(1.0, mu.masses.max()):
            return False
    if spec.density is not None:
        d = spec.density
        probe = np.sort(np.unique(np.concatenate([d.knots, A.apply_angles(d.knots)])))
        back = A.inverse().apply_angles(probe)
        if np.max(np.abs(d.eval(probe) - d.eval(back))) > tol * max(1.0, d.values.max()):
            return False
    return True


def detect_symmetry(spec: MeasureSpec, max_order: int = 64) -> SymmetryGroup:
    """Largest cyclic/dihedral invariance group of the measure (brute probe
    over candidate rotation orders and reflection axes)."""
    best_k = 1
    for k in range(2, max_order + 1):
        if _spec_invariant_under(spec, Isometry2("rotation", TWO_PI / k)):
            best_k = max(best_k, k)
    axis = None
    candidates = set()
    if spec.atoms is not None:
        t = spec.atoms.thetas
        for i in range(len(t)):
            for j in range(i, len(t)):
                candidates.add(canonical_angle((t[i] + t[j]) / 2.0) % math.pi)
    if spec.density is not None:
        for a in spec.density.knots:
            candidates.add(canonical_angle(a) % math.pi)
            candidates.add(canonical_angle(a + math.pi / 2.0) % math.pi)
    for a in sorted(candidates):
        if _spec_invariant_under(spec, Isometry2("reflection", a)):
            axis = a
            break
    if axis is not None:
        return SymmetryGroup.dihedral(best_k, axis)
    if best_k > 1:
        return SymmetryGroup.cyclic(best_k)
    return SymmetryGroup.trivial()


def _second_differences(h: np.ndarray, step: float) -> np.ndarray:
    return (np.roll(h, -1) - 2.0 * h + np.roll(h, 1)) / (step * step)


def ma_residual_from_samples(h: np.ndarray, f: np.ndarray, p: float,
                             mask_factor: float = 10.0, mask_radius: int = 2):
    """max |h^(1-p) (h'' + h) - 2 f| / max(2 f, eps) on the periodic grid,
    excluding cells near second-difference spikes (support-function kinks)."""
    n = len(h)
    step = TWO_PI / n
    d2 = _second_differences(h, step)
    absd2 = np.abs(d2)
    med = float(np.median(absd2))
    spikes = absd2 > mask_factor * max(med, 1e-300)
    mask = np.zeros(n, dtype=bool)
    for off in range(-mask_radius, mask_radius + 1):
        mask |= np.roll(spikes, off)
    resid = np.abs(h ** (1.0 - p) * (d2 + h) - 2.0 * f) / np.maximum(2.0 * f, 1e-12)
    if mask.all():
        return float(resid.max()), mask
    return float(resid[~mask].max()), mask


def monge_ampere_residual(P: Polygon, spec: MeasureSpec, p: float,
                          grid: int | None = None) -> float | None:
    """Pointwise residual of the planar support ODE away from corners.

    The classical equation reads h^(1-p)(h'' + h) = 2f; since the boundary
    length element is (h'' + h) dtheta, the right side 2f equals the
    measure's arc-length density, so the spec's density is passed as 2f.
    Returns None (not applicable) unless at least 90% of the input mass is
    density: the classical equation is meaningless against atoms.
    """
    if spec.density_mass() < 0.9 * spec.total_mass():
        return None
    if grid is None:
        grid = max(64, P.n // 16)
    if grid < 64:
        raise ValueError("grid must have at least 64 points")
    t = TWO_PI * np.arange(grid) / grid
    h = P.support_values(t)
    f = spec.density.eval(t) / 2.0
    value, _ = ma_residual_from_samples(h, f, p)
    return value
