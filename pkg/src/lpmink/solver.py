"""Discrete planar Lp Minkowski solver, 0 < p < 1.

Given an atomic measure not concentrated on any closed semicircle, finds a
polygon whose Lp surface area measure matches it: a variational descent over
volume-one polygons with prescribed normals supplies the basin, a damped
Newton iteration on the first-order system polishes, and a final dilation
fixes the scale.  Finite symmetry constraints are enforced by orbit
averaging of the support numbers.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    AnchorOutsideError,
    ConcentratedError,
    MaxItersExceededError,
    NoConvergenceError,
    NoInteriorMaximizerError,
    NotSymmetricError,
    NotClosedUnderGroupError,
)
from .geometry import (
    Polygon,
    SymmetryGroup,
    circular_gaps,
    group_orbit_map,
    polygon_from_support,
    unit_vectors,
)
from .measure import (
    ATOM_MERGE_TOL,
    GENERAL_POSITION,
    DiscreteMeasure,
    classify,
    lp_surface_measure,
)

log = logging.getLogger("lpmink.solver")


@dataclass
class SolverConfig:
    """Tolerances and iteration limits for the discrete solve."""

    tol_residual: float = 1e-6
    tol_inner: float = 1e-10
    max_outer_iters: int = 10_000
    max_inner_iters: int = 200
    backtrack_ratio: float = 0.5
    step_init: float = 1.0
    edge_floor: float = 1e-12
    seed: int = 0
    multistarts: int = 1

    def __post_init__(self):
        if min(self.tol_residual, self.tol_inner, self.step_init) <= 0:
            raise ValueError("tolerances and steps must be positive")


@dataclass
class SolveReport:
    residual: float = math.inf
    outer_iters: int = 0
    newton_iters: int = 0
    classification: str = GENERAL_POSITION
    c: float = 1.0
    symmetry: str = "trivial"
    warnings: list = field(default_factory=list)
    m_final: int | None = None
    loop_history: list | None = None

    def to_dict(self) -> dict:
        d = {
            "residual": self.residual,
            "outer_iters": self.outer_iters,
            "newton_iters": self.newton_iters,
            "classification": self.classification,
            "c": self.c,
            "symmetry": self.symmetry,
            "warnings": list(self.warnings),
        }
        if self.m_final is not None:
            d["m_final"] = self.m_final
        if self.loop_history is not None:
            d["loop_history"] = self.loop_history
        return d


@dataclass
class OrbitStructure:
    """Partition of normal indices into orbits of a finite group action."""

    orbits: list
    representative: np.ndarray
    index_to_orbit: np.ndarray

    @property
    def n_orbits(self) -> int:
        return len(self.orbits)

    def average(self, values: np.ndarray) -> np.ndarray:
        out = np.empty_like(values, dtype=float)
        for orb in self.orbits:
            out[orb] = float(np.mean(values[orb]))
        return out


def orbit_partition(normals, G: SymmetryGroup, tol: float = ATOM_MERGE_TOL) -> OrbitStructure:
    """Orbits of the normal index set under the group action on angles."""
    theta = np.asarray(normals, dtype=float)
    n = len(theta)
    parent = np.arange(n)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for A in G.elements():
        if A.is_identity():
            continue
        perm = group_orbit_map(theta, A, tol)
        for i in range(n):
            ri, rj = find(i), find(perm[i])
            if ri != rj:
                parent[ri] = rj
    roots = {}
    index_to_orbit = np.empty(n, dtype=int)
    orbits = []
    for i in range(n):
        r = find(i)
        if r not in roots:
            roots[r] = len(orbits)
            orbits.append([])
        k = roots[r]
        orbits[k].append(i)
        index_to_orbit[i] = k
    orbits = [np.asarray(o, dtype=int) for o in orbits]
    reps = np.array([int(o.min()) for o in orbits])
    return OrbitStructure(orbits, reps, index_to_orbit)


class _Workspace:
    """Fixed normal-set quantities: directions, the cyclic tridiagonal edge
    form L (edge lengths = L h when all facets are active), and V = h.Lh/2."""

    def __init__(self, thetas: np.ndarray, alphas: np.ndarray, p: float):
        self.theta = thetas
        self.alpha = alphas
        self.p = p
        self.n = len(thetas)
        self.U = unit_vectors(thetas)
        gaps = circular_gaps(thetas)
        self.gaps = gaps
        inv_sin = 1.0 / np.sin(gaps)
        cot = np.cos(gaps) * inv_sin
        n = self.n
        diag = -(cot + np.roll(cot, 1))
        if n <= 400:
            L = np.zeros((n, n))
            idx = np.arange(n)
            L[idx, idx] = diag
            L[idx, (idx + 1) % n] = inv_sin
            L[idx, (idx - 1) % n] = np.roll(inv_sin, 1)
            self.L = L
            self.sparse = False
        else:
            idx = np.arange(n)
            rows = np.concatenate([idx, idx, idx])
            cols = np.concatenate([idx, (idx + 1) % n, (idx - 1) % n])
            vals = np.concatenate([diag, inv_sin, np.roll(inv_sin, 1)])
            self.L = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
            self.sparse = True

    def edge_form(self, h: np.ndarray) -> np.ndarray:
        return self.L @ h

    def volume(self, h: np.ndarray) -> float:
        return 0.5 * float(h @ (self.L @ h))

    def jacobian(self, h: np.ndarray, ell: np.ndarray):
        """d/dh of S(h) = h^(1-p) * (L h)."""
        p = self.p
        d0 = (1.0 - p) * h ** (-p) * ell
        w = h ** (1.0 - p)
        if not self.sparse:
            return self.L * w[:, None] + np.diag(d0)
        J = sp.diags(w) @ self.L + sp.diags(d0)
        return J.tocsc()

    def solve_linear(self, J, rhs: np.ndarray) -> np.ndarray:
        if self.sparse:
            return spla.spsolve(J, rhs)
        return np.linalg.solve(J, rhs)


def anchor_objective(P: Polygon, xi, mu: DiscreteMeasure, p: float) -> float:
    """Integral of (support of P - xi)^p against the measure's atoms."""
    xi = np.asarray(xi, dtype=float)
    slack = P.support_values(mu.thetas) - unit_vectors(mu.thetas) @ xi
    if np.any(slack < -1e-12):
        raise AnchorOutsideError("anchor point outside the body")
    return float(np.sum(mu.masses * np.clip(slack, 0.0, None) ** p))


def _anchor_newton(U, alpha, h, p, tol, max_iters, xi0=None, strict=False):
    """Interior maximizer of the strictly concave anchored objective.

    The gradient is a difference of large one-sided sums when masses are
    wildly unequal, so the stopping test floors the tolerance at the float
    noise level of that cancellation.
    """
    xi = np.zeros(2) if xi0 is None else np.asarray(xi0, dtype=float).copy()
    s = h - U @ xi
    if np.any(s <= 0):
        xi = np.zeros(2)
        s = h.copy()
        if np.any(s <= 0):
            raise AnchorOutsideError("no strictly feasible start for the anchor solve")

    def value(slack):
        return float(np.sum(alpha * slack ** p))

    f = value(s)
    for it in range(max_iters):
        w = alpha * p * s ** (p - 1.0)
        g = -(U.T @ w)
        gnorm = float(np.hypot(*g))
        tol_eff = max(tol, 64.0 * np.finfo(float).eps * float(np.sum(np.abs(w))))
        if gnorm <= tol_eff:
            return xi, it
        if s.min() < 1e-14:
            d = -g  # gradient fallback near the boundary
        else:
            wh = alpha * p * (p - 1.0) * s ** (p - 2.0)
            H = (U * wh[:, None]).T @ U
            try:
                d = -np.linalg.solve(H, g)
            except np.linalg.LinAlgError:
                d = -g
        du = U @ d
        pos = du > 0
        tmax = float(np.min(s[pos] / du[pos])) if pos.any() else math.inf
        t = min(1.0, 0.95 * tmax)
        ok = False
        for _ in range(60):
            s_try = s - t * du
            if s_try.min() > 0:
                f_try = value(s_try)
                if f_try >= f + 1e-4 * t * float(g @ d):
                    ok = True
                    break
            t *= 0.5
        if not ok or t * float(np.hypot(*d)) < 1e-17 * (1.0 + float(np.hypot(*xi))):
            if strict and gnorm > 1e3 * tol_eff and s.min() < 1e-12:
                raise NoInteriorMaximizerError(
                    "anchor maximizer escapes to the boundary"
                )
            return xi, it  # stagnated within a numerically flat basin
        xi = xi + t * d
        s = s - t * du
        f = value(s)
    if strict:
        raise MaxItersExceededError("anchor maximization did not converge")
    return xi, max_iters


def optimal_anchor(P: Polygon, mu: DiscreteMeasure, p: float,
                   cfg: SolverConfig | None = None) -> np.ndarray:
    """The unique interior point maximizing the anchored mass objective."""
    cfg = cfg or SolverConfig()
    if classify(mu).tag != GENERAL_POSITION:
        raise NoInteriorMaximizerError("measure concentrated on a closed semicircle")
    xi0 = P.vertices.mean(axis=0)
    xi, _ = _anchor_newton(
        unit_vectors(mu.thetas), mu.masses, P.support_values(mu.thetas), p,
        cfg.tol_inner, cfg.max_inner_iters, xi0=xi0, strict=True,
    )
    return xi


def measure_residual(P: Polygon, mu: DiscreteMeasure, p: float) -> float:
    """Relative per-atom mismatch of S_{P,p} against mu, plus any boundary
    mass sitting off the support of mu (relative to mu's total mass)."""
    nu = lp_surface_measure(P, p)
    total = mu.total_mass()
    matched = np.zeros(nu.n, dtype=bool)
    worst = 0.0
    for a, m in zip(mu.thetas, mu.masses):
        d = np.abs(nu.thetas - a)
        d = np.minimum(d, 2.0 * math.pi - d)
        j = int(np.argmin(d))
        got = 0.0
        if d[j] <= ATOM_MERGE_TOL:
            got = float(nu.masses[j])
            matched[j] = True
        worst = max(worst, abs(got - m) / max(m, 1e-30))
    off = float(np.sum(nu.masses[~matched]))
    return worst + off / max(total, 1e-30)


def _reactivate(ws: _Workspace, h: np.ndarray) -> np.ndarray:
    """Blend toward the (always all-active) constant-support body until the
    closed-form edge lengths are strictly positive."""
    target = float(np.mean(h)) * np.ones_like(h)
    lo, hi = 0.0, 1.0
    if (ws.edge_form(h)).min() > ws.n * 1e-15:
        return h
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        trial = (1 - mid) * h + mid * target
        if ws.edge_form(trial).min() > ws.n * 1e-15:
            hi = mid
        else:
            lo = mid
    s = min(1.0, hi * 1.25)
    return (1 - s) * h + s * target


def _newton_polish(ws: _Workspace, h: np.ndarray, target: np.ndarray,
                   tol: float, cfg: SolverConfig, average, max_iters: int = 80):
    """Damped Newton on h^(1-p) * (L h) = target inside the all-active cone."""
    p = ws.p
    h = average(_reactivate(ws, h.copy()))
    ell = ws.edge_form(h)
    if ell.min() <= 0 or h.min() <= 0:
        return h, math.inf, 0
    S = h ** (1.0 - p) * ell
    F = S - target
    err = float(np.max(np.abs(F) / target))
    iters = 0
    for it in range(max_iters):
        if err <= tol:
            break
        J = ws.jacobian(h, ell)
        try:
            step = ws.solve_linear(J, -F)
        except Exception:
            break
        fnorm = float(np.linalg.norm(F))
        t = 1.0
        improved = False
        for _ in range(50):
            h_try = average(h + t * step)
            if h_try.min() > 0:
                ell_try = ws.edge_form(h_try)
                if ell_try.min() > 0:
                    F_try = h_try ** (1.0 - p) * ell_try - target
                    if float(np.linalg.norm(F_try)) <= (1.0 - 0.25 * t) * fnorm:
                        h, ell, F = h_try, ell_try, F_try
                        improved = True
                        break
            t *= cfg.backtrack_ratio
        iters = it + 1
        if not improved:
            break
        err = float(np.max(np.abs(F) / target))
    return h, err, iters


def _radial_init(ws: _Workspace) -> np.ndarray:
    """Per-atom radial guess from S_i ~ h_i^(2-p) * (angular weight)."""
    w = 0.5 * (ws.gaps + np.roll(ws.gaps, 1))
    return (ws.alpha / w) ** (1.0 / (2.0 - ws.p))


def _continuation_newton(ws: _Workspace, h0: np.ndarray, cfg: SolverConfig, average):
    """Newton along a target homotopy: pad every mass by a multiple of the
    mean, then drive the pad to zero.  The padded targets keep all facets
    comfortably active (the role of a vanishing log-barrier) while warm
    starts track the solution branch; the pad step is bisected whenever a
    stage loses the branch."""
    alpha, p = ws.alpha, ws.p
    meanm = float(alpha.mean())
    stage_tol = min(1e-6, cfg.tol_residual)
    pad = max(1.0, 10.0 * float(alpha.max()) / meanm)
    target = alpha + pad * meanm
    S0 = np.clip(h0, 1e-300, None) ** (1.0 - p) * np.clip(ws.edge_form(h0), 1e-300, None)
    h = h0 * (float(target.sum()) / float(S0.sum())) ** (1.0 / (2.0 - p))
    h, err, iters = _newton_polish(ws, h, target, stage_tol, cfg, average)
    if err > 1e-5:
        return h0, math.inf, iters
    pad_good, h_good, total_good = pad, h, float(target.sum())
    pad_try = pad * 0.1
    for _ in range(120):
        target = alpha + pad_try * meanm
        h_start = h_good * (float(target.sum()) / total_good) ** (1.0 / (2.0 - p))
        h_new, err, it = _newton_polish(ws, h_start, target, stage_tol, cfg, average)
        iters += it
        if err <= 1e-5:
            pad_good, h_good, total_good = pad_try, h_new, float(target.sum())
            if pad_try < 1e-13:
                break
            pad_try *= 0.1
        else:
            ratio = pad_try / pad_good
            if ratio > 0.93:
                return h_good, math.inf, iters  # branch lost; step refinements exhausted
            pad_try = pad_good * math.sqrt(ratio)
    h_fin, err, it = _newton_polish(ws, h_good, alpha, cfg.tol_residual, cfg, average)
    return h_fin, err, iters + it


def _fit_scale(S: np.ndarray, alpha: np.ndarray) -> float:
    """S ~ c * alpha: total-mass ratio refined by least squares on logs."""
    c = float(np.sum(S) / np.sum(alpha))
    mask = S > 0
    if mask.any():
        logs = np.log(S[mask] / alpha[mask])
        c_ls = float(np.exp(np.average(logs, weights=alpha[mask])))
        if 0.0 < c_ls < math.inf:
            c = c_ls
    if not (0.0 < c < math.inf):
        c = 1.0
    return c


def _descent_then_newton(ws: _Workspace, h0: np.ndarray, cfg: SolverConfig, average):
    """One full solve attempt from a given start; returns (h, report_bits)."""
    p, alpha = ws.p, ws.alpha
    h = average(np.maximum(h0.copy(), 1e-8))
    h = h / math.sqrt(max(ws.volume(h), 1e-300))
    outer = 0
    newton_total = 0
    warnings = []

    def try_newton(h_in):
        nonlocal newton_total
        S = np.clip(h_in, 1e-300, None) ** (1.0 - p) * np.clip(ws.edge_form(h_in), 0.0, None)
        c = _fit_scale(S, alpha)
        h_scaled = h_in * c ** (-1.0 / (2.0 - p))
        h_out, err, iters = _newton_polish(ws, h_scaled, alpha, cfg.tol_residual, cfg, average)
        newton_total += iters
        return h_out, err, c

    # Cheap first shot: warm starts usually land inside Newton's basin.
    h_try, err, c = try_newton(h)
    if err <= cfg.tol_residual:
        return h_try, err, outer, newton_total, c, warnings
    best = (err, h_try, c)

    # Target continuation from a radially scaled guess handles wild mass
    # ratios that defeat a cold Newton start.
    h_cont, err_cont, it_cont = _continuation_newton(ws, average(_radial_init(ws)),
                                                     cfg, average)
    newton_total += it_cont
    if err_cont <= cfg.tol_residual:
        return h_cont, err_cont, outer, newton_total, _fit_scale(
            h_cont ** (1.0 - p) * ws.edge_form(h_cont), alpha), warnings
    if err_cont < best[0]:
        best = (err_cont, h_cont, 1.0)

    U = ws.U
    phi = None
    patience = 0
    best_spread = math.inf
    for outer in range(1, cfg.max_outer_iters + 1):
        try:
            P = polygon_from_support(ws.theta, h)
        except Exception:
            break  # iterate left the representable cone; keep the best so far
        xi, _ = _anchor_newton(U, alpha, h, p, cfg.tol_inner, cfg.max_inner_iters,
                               xi0=P.vertices.mean(axis=0))
        h = np.maximum(h - U @ xi, 1e-300)  # re-anchor at the maximizer
        ell = P.lengths
        phi_here = float(np.sum(alpha * h ** p))
        grad = alpha * p * h ** (p - 1.0)
        denom = float(ell @ ell)
        d = grad - (float(grad @ ell) / denom) * ell if denom > 0 else grad
        d = average(d)
        dnorm = float(np.linalg.norm(d))
        if dnorm < 1e-14:
            break
        t = cfg.step_init * float(np.linalg.norm(h)) / (dnorm * 10.0)
        accepted = False
        for _ in range(40):
            h_try2 = h - t * d
            if h_try2.min() > cfg.edge_floor:
                h_try2 = average(h_try2)
                vol = ws.volume(h_try2)
                if vol > 0:
                    h_try2 = h_try2 / math.sqrt(vol)
                    xi2, _ = _anchor_newton(U, alpha, h_try2, p, cfg.tol_inner,
                                            cfg.max_inner_iters)
                    phi_new = float(
                        np.sum(alpha * np.clip(h_try2 - U @ xi2, 1e-300, None) ** p)
                    )
                    if phi_new < phi_here - 1e-14 * abs(phi_here):
                        h = h_try2
                        accepted = True
                        break
            t *= cfg.backtrack_ratio
        stalled = not accepted or (phi is not None and phi - phi_here < 1e-13 * abs(phi))
        phi = phi_here

        S = np.clip(h, 1e-300, None) ** (1.0 - p) * np.clip(ws.edge_form(h), 0.0, None)
        c_now = _fit_scale(S, alpha)
        spread = float(np.max(np.abs(S - c_now * alpha) / (c_now * alpha)))
        patience = 0 if spread < 0.9 * best_spread else patience + 1
        best_spread = min(best_spread, spread)
        if spread < 0.5 or stalled or patience >= 30 or outer % 25 == 0:
            h_try, err, c = try_newton(h)
            if err <= cfg.tol_residual:
                return h_try, err, outer, newton_total, c, warnings
            if err < best[0]:
                best = (err, h_try, c)
            if stalled or patience >= 30:
                warnings.append("variational descent stalled before tolerance")
                break
    err, h_best, c = best
    return h_best, err, outer, newton_total, c, warnings


def solve_discrete(mu: DiscreteMeasure, p: float, G: SymmetryGroup | None = None,
                   cfg: SolverConfig | None = None, h0=None):
    """Polygon P with S_{P,p} = mu for an atomic measure in general position.

    Returns (Polygon, SolveReport).  Raises ConcentratedError when the
    measure sits in a closed semicircle (use the reduction pipeline),
    NotSymmetricError when mu is not invariant under the requested group,
    and NoConvergenceError carrying the best report otherwise.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    cfg = cfg or SolverConfig()
    G = G or SymmetryGroup.trivial()
    cls = classify(mu)
    if cls.tag != GENERAL_POSITION:
        raise ConcentratedError(
            f"measure is {cls.tag}; not in general position"
        )
    theta = mu.thetas
    alpha = mu.masses

    if not G.is_trivial:
        try:
            orb = orbit_partition(theta, G)
        except NotClosedUnderGroupError as exc:
            raise NotSymmetricError(str(exc)) from exc
        for o in orb.orbits:
            m = alpha[o]
            if np.max(np.abs(m - m.mean())) > 1e-8 * max(m.mean(), 1e-300):
                raise NotSymmetricError(
                    "atom masses are not constant on group orbits"
                )
        average = orb.average
    else:
        average = lambda x: x

    # Normalize the mass scale: solving mu/s and dilating by s^(1/(2-p))
    # keeps every internal tolerance scale-free.
    mass_scale = float(alpha.mean())
    ws = _Workspace(theta, alpha / mass_scale, p)
    body_scale = mass_scale ** (1.0 / (2.0 - p))
    rng = np.random.default_rng(cfg.seed)

    best_err, best_h, best_c = math.inf, None, 1.0
    outer = newton = 0
    warnings: list[str] = []
    if h0 is not None:
        h0 = np.asarray(h0, dtype=float)
        if h0.shape != theta.shape:
            raise ValueError("warm start h0 must provide one value per atom")
    for start in range(max(1, cfg.multistarts)):
        if h0 is not None and start == 0:
            h_init = h0.copy() / body_scale
        else:
            h_init = np.ones(ws.n)
            if start > 0:
                h_init *= np.exp(0.25 * rng.standard_normal(ws.n))
                warnings.append(f"multistart {start} from a perturbed seed")
        h, err, o, nw, c, warn = _descent_then_newton(ws, h_init, cfg, average)
        outer += o
        newton += nw
        warnings.extend(warn)
        if err < best_err:
            best_err, best_h, best_c = err, h, c
        if best_err <= cfg.tol_residual:
            break

    if best_h is None:
        raise NoConvergenceError("solver produced no candidate", SolveReport())
    P = polygon_from_support(theta, average(best_h) * body_scale)
    res = measure_residual(P, mu, p)
    report = SolveReport(
        residual=res,
        outer_iters=outer,
        newton_iters=newton,
        classification=cls.tag,
        c=best_c,
        symmetry=G.label(),
        warnings=warnings,
    )
    if res > cfg.tol_residual:
        raise NoConvergenceError(
            f"residual {res:.3e} above tolerance {cfg.tol_residual:.1e}", report
        )
    return P, report
