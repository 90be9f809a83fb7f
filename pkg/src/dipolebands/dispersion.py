"""Locating, classifying, and tracking band degeneracies.

A degeneracy of a band pair is located by a coarse gap scan over a k-region
followed by deterministic derivative-free refinement. Around a degeneracy
the two bands behave like

    omega_+-(q) = m0 + w . q +- sqrt(q . A q)   (+ higher order)

and the classification reads off the local model: both principal-axis gap
exponents ~1 gives a (possibly tilted) Dirac cone whose type follows from
the tilt ratio t = sqrt(w . A^-1 w) (t < 1 type I, t = 1 critical type III,
t > 1 type II); exponents {1, 2} a semi-Dirac point; {2, 2} a quadratic
touching. A is fitted from (gap/2)^2 ~ q . A q so that t = 1 coincides with
one band going locally flat along some direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .bloch import IN_PLANE, OUT_OF_PLANE, assemble, eigensolve
from .greens import K0
from .lattice import LatticeSpec, build_lattice, reciprocal, reduce_to_bz
from .latticesums import RayleighAnomaly

EPS_DEG = 1e-3  # detuning-units gap threshold for "degenerate"
TILT_TOL = 0.05  # tau_t band around t = 1 for type III
EXP_TOL_LINEAR = 0.15  # window half-width around p = 1
EXP_TOL_QUAD = 0.25  # window half-width around p = 2
FIT_RADIUS_FRAC = 0.05  # default fit radius in units of |b1|
FIT_INNER_FRAC = 0.1  # inner fit radius relative to the outer
N_DIRECTIONS = 16
N_RADII = 12
GRID_N = 48
REFINE_FRAC = 1e-6  # refinement scale in units of |b1|
DEDUP_FRAC = 1e-4  # merge radius in units of |b1|

KINDS = ("dirac_I", "dirac_II", "dirac_III", "semi_dirac", "quadratic",
         "gapped")


class NoClosure(ArithmeticError):
    """The gap never closed below threshold inside the given beta bracket."""


class FitDegenerate(ArithmeticError):
    """The local-fit design matrix is numerically degenerate."""


@dataclass(frozen=True)
class DegeneracyReport:
    """Location and local model of one band degeneracy.

    find_degeneracies fills location and gap only (kind None); classify
    fills the rest.

    Attributes:
        k_star: Degeneracy location (2,).
        band_pair: Indices of the two bands within their block, energy order.
        block: 'out_of_plane' or 'in_plane'.
        gap_min: Residual gap at k_star.
        kind: One of KINDS, or None before classification.
        tilt: Fitted tilt vector w (2,) of the band average.
        velocity_matrix: Fitted 2x2 symmetric A with (gap/2)^2 ~ q.Aq.
        tilt_ratio: t = sqrt(w . A^-1 w) (NaN when exponents are not both 1).
        exponents: Gap exponents along the principal axes of A.
        residuals: Dict of rms fit residuals.
        principal_axes: Columns are the principal directions of A.
        top_curvatures: Signed quadratic coefficients of the upper band
            along the two principal axes.
        beta, d0: Lattice parameters.
        mode: 'retarded' or 'quasistatic'.
    """

    k_star: np.ndarray
    band_pair: tuple
    block: str
    gap_min: float
    beta: float
    d0: float
    mode: str
    kind: str | None = None
    tilt: np.ndarray | None = None
    velocity_matrix: np.ndarray | None = None
    tilt_ratio: float = float("nan")
    exponents: tuple | None = None
    residuals: dict | None = None
    principal_axes: np.ndarray | None = None
    top_curvatures: tuple | None = None


@dataclass(frozen=True)
class ConeTrajectory:
    """A degeneracy tracked over an ordered beta sweep.

    Attributes:
        beta_values: Betas at which the cone was (or failed to be) located.
        reports: One DegeneracyReport per located beta.
        events: Dicts with keys 'event' ('classification_change', 'lost',
            'found', 'discontinuity'), 'beta_bracket', and details. A
            dirac_I <-> dirac_II change carries 'type_iii_bracket' narrowed
            to width 0.005.
    """

    beta_values: tuple
    reports: tuple
    events: tuple


def _block_pair_detunings(spec, k, mode, block, pair, splitting, tolerance,
                          recip_scale):
    """Detunings of one band pair, nudging off light-line singularities."""
    k = np.asarray(k, dtype=float)
    try:
        bs = eigensolve(assemble(spec, k, mode, splitting, tolerance))
    except RayleighAnomaly:
        kn = np.linalg.norm(k)
        direction = k / kn if kn > 0 else np.array([1.0, 0.0])
        bs = eigensolve(
            assemble(spec, k + 1e-7 * recip_scale * direction, mode,
                     splitting, tolerance))
    det = bs.detuning[[i for i in range(6) if bs.block[i] == block]]
    return det[pair[0]], det[pair[1]]


def make_gap_function(spec: LatticeSpec, block: str, band_pair,
                      mode: str = "retarded", splitting: float | None = None,
                      tolerance: float = 1e-10):
    """Return gap(k) for one band pair (energy-sorted within block)."""
    recip_scale = float(np.linalg.norm(reciprocal(spec).b1))
    pair = tuple(band_pair)

    def gap(k):
        lo, hi = _block_pair_detunings(spec, k, mode, block, pair,
                                       splitting, tolerance, recip_scale)
        return hi - lo

    return gap


def default_search_region(spec: LatticeSpec):
    """Half-zone rectangle (kx_min, kx_max, ky_min, ky_max)."""
    recip = reciprocal(spec)
    mx = abs(recip.M[0])
    ky = float(np.linalg.norm(recip.K))
    return (-mx, mx, 0.0, ky)


def _refine_minimum(gap, k0pt, scale, xatol):
    """Deterministic Nelder-Mead descent of gap from k0pt."""
    simplex = np.array([
        k0pt,
        k0pt + np.array([scale, 0.0]),
        k0pt + np.array([0.0, scale]),
    ])
    res = minimize(
        lambda k: gap(k), k0pt, method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "xatol": xatol,
            "fatol": 1e-14,
            "maxiter": 400,
            "maxfev": 800,
        },
    )
    return np.asarray(res.x, dtype=float), float(res.fun)


def find_degeneracies(spec: LatticeSpec, block: str, band_pair,
                      search_region=None, mode: str = "retarded",
                      eps_deg: float = EPS_DEG, grid_n: int = GRID_N,
                      splitting: float | None = None,
                      tolerance: float = 1e-10) -> list[DegeneracyReport]:
    """Locate gap closings of a band pair inside a k-region.

    Coarse grid scan (grid_n x grid_n), Nelder-Mead refinement of every
    coarse local minimum, filtering at eps_deg, duplicate merging modulo
    reciprocal vectors, and reconstruction of the ky -> -ky mirror images.

    With the default region in retarded mode, the radiative neighborhood
    |k| < 1.1 k0 is omitted: there the branch hugging the light line
    crosses the other bands, which would otherwise swamp the search with
    near-light-cone degeneracies. Pass an explicit search_region to probe
    that neighborhood.

    Returns:
        Location-and-gap reports sorted by (gap, kx, ky); empty if gapped.
    """
    exclude_radiative = search_region is None and mode == "retarded"
    region = default_search_region(spec) if search_region is None else \
        tuple(float(v) for v in search_region)
    recip = reciprocal(spec)
    b1n = float(np.linalg.norm(recip.b1))
    gap = make_gap_function(spec, block, band_pair, mode, splitting,
                            tolerance)

    def _excluded(k):
        return exclude_radiative and float(np.hypot(k[0], k[1])) < 1.1 * K0

    kxs = np.linspace(region[0], region[1], grid_n)
    kys = np.linspace(region[2], region[3], grid_n)
    vals = np.array([
        [np.inf if _excluded((x, y)) else gap(np.array([x, y]))
         for y in kys]
        for x in kxs
    ])

    spacing = max(
        (region[1] - region[0]) / (grid_n - 1),
        (region[3] - region[2]) / (grid_n - 1),
    )
    pad = np.pad(vals, 1, constant_values=np.inf)
    neigh = np.stack([
        pad[i0:i0 + grid_n, j0:j0 + grid_n]
        for i0 in (0, 1, 2) for j0 in (0, 1, 2)
        if not (i0 == 1 and j0 == 1)
    ])
    is_min = np.isfinite(vals) & (vals <= neigh.min(axis=0))
    seeds = [np.array([kxs[i], kys[j]]) for i, j in zip(*np.nonzero(is_min))]

    margin = 2.0 * spacing
    found = []
    for seed in seeds:
        k_star, g = _refine_minimum(gap, seed, 0.5 * spacing,
                                    REFINE_FRAC * b1n)
        if g >= eps_deg:
            continue
        if not (region[0] - margin <= k_star[0] <= region[1] + margin
                and region[2] - margin <= k_star[1] <= region[3] + margin):
            continue
        if _excluded(k_star):
            continue
        found.append((k_star, g))

    # Merge duplicates modulo the reciprocal lattice.
    merged = []
    for k_star, g in sorted(found, key=lambda t: (t[1], t[0][0], t[0][1])):
        red = reduce_to_bz(recip, k_star)
        dup = False
        for _, _, red_prev in merged:
            if np.linalg.norm(
                    reduce_to_bz(recip, red - red_prev)) < DEDUP_FRAC * b1n:
                dup = True
                break
        if not dup:
            merged.append((k_star, g, red))

    # Mirror images: the default search region covers the upper half
    # zone only, so the ky -> -ky partners are reconstructed. An explicit
    # region is honored literally and gets no mirrors added.
    reports = []
    for k_star, g, red in merged:
        reports.append((k_star, g))
    if search_region is None:
        for k_star, g, red in merged:
            mirror = np.array([k_star[0], -k_star[1]])
            red_m = reduce_to_bz(recip, mirror)
            if all(np.linalg.norm(reduce_to_bz(recip, red_m - r2)) >=
                   DEDUP_FRAC * b1n
                   for _, _, r2 in merged):
                reports.append((mirror, g))

    reports.sort(key=lambda t: (t[1], t[0][0], t[0][1]))
    return [
        DegeneracyReport(
            k_star=k_star, band_pair=tuple(band_pair), block=block,
            gap_min=g, beta=spec.beta, d0=spec.d0, mode=mode,
        )
        for k_star, g in reports
    ]


def _exponent_class(p: float) -> int | None:
    if abs(p - 1.0) <= EXP_TOL_LINEAR:
        return 1
    if abs(p - 2.0) <= EXP_TOL_QUAD:
        return 2
    return None


def classify(spec: LatticeSpec, location, block: str, band_pair,
             mode: str = "retarded", fit_radius: float | None = None,
             n_dirs: int = N_DIRECTIONS, n_radii: int = N_RADII,
             eps_deg: float = EPS_DEG, splitting: float | None = None,
             tolerance: float = 1e-10) -> DegeneracyReport:
    """Classify the band-pair behavior around a degeneracy location.

    Samples both bands on n_dirs rays with n_radii log-spaced radii, fits
    the tilt vector from the band average, the quadratic form A from
    (gap/2)^2, and the gap exponents along A's principal axes, then applies
    the taxonomy thresholds.

    Returns:
        Full DegeneracyReport. kind='gapped' when the gap at the location
        exceeds eps_deg (no fits attempted).

    Raises:
        FitDegenerate: ill-conditioned fit design (cond > 1e8).
    """
    k_star = np.asarray(location, dtype=float)
    recip = reciprocal(spec)
    b1n = float(np.linalg.norm(recip.b1))
    r_out = FIT_RADIUS_FRAC * b1n if fit_radius is None else float(fit_radius)
    recip_scale = b1n
    pair = tuple(band_pair)

    def both(k):
        return _block_pair_detunings(spec, k, mode, block, pair, splitting,
                                     tolerance, recip_scale)

    lo0, hi0 = both(k_star)
    gap0 = hi0 - lo0
    base = dict(k_star=k_star, band_pair=pair, block=block,
                gap_min=float(gap0), beta=spec.beta, d0=spec.d0, mode=mode)
    if gap0 >= eps_deg:
        return DegeneracyReport(kind="gapped", **base)

    m0 = 0.5 * (lo0 + hi0)
    radii = np.geomspace(FIT_INNER_FRAC * r_out, r_out, n_radii)
    thetas = 2.0 * np.pi * np.arange(n_dirs) / n_dirs
    qs, mids, halves = [], [], []
    for th in thetas:
        n = np.array([np.cos(th), np.sin(th)])
        for r in radii:
            lo, hi = both(k_star + r * n)
            qs.append(r * n)
            mids.append(0.5 * (lo + hi) - m0)
            halves.append(0.5 * (hi - lo))
    qs = np.array(qs)
    mids = np.array(mids)
    halves = np.array(halves)

    # Tilt: linear fit of the band average (even orders drop out on the
    # symmetric direction set).
    xt = qs
    if np.linalg.cond(xt.T @ xt) > 1e8:
        raise FitDegenerate("tilt design matrix ill-conditioned")
    w, *_ = np.linalg.lstsq(xt, mids, rcond=None)
    rms_t = float(np.sqrt(np.mean((xt @ w - mids) ** 2)))

    # Quadratic form of the half-gap squared.
    xa = np.stack([qs[:, 0] ** 2, 2.0 * qs[:, 0] * qs[:, 1],
                   qs[:, 1] ** 2], axis=1)
    if np.linalg.cond(xa.T @ xa) > 1e8:
        raise FitDegenerate("velocity design matrix ill-conditioned")
    coef, *_ = np.linalg.lstsq(xa, halves**2, rcond=None)
    a_mat = np.array([[coef[0], coef[1]], [coef[1], coef[2]]])
    rms_a = float(np.sqrt(np.mean((xa @ coef - halves**2) ** 2)))

    evals, evecs = np.linalg.eigh(a_mat)

    # Gap exponents and upper-band curvature along the principal axes.
    exps, rms_e, curvs = [], [], []
    for i in range(2):
        axis = evecs[:, i]
        gvals, upvals = [], []
        for r in radii:
            lo, hi = both(k_star + r * axis)
            gvals.append(max(hi - lo, 1e-300))
            upvals.append(hi - hi0)
        logr = np.log(radii)
        p, _b = np.polyfit(logr, np.log(gvals), 1)
        fit = np.polyval([p, _b], logr)
        exps.append(float(p))
        rms_e.append(float(np.sqrt(np.mean((fit - np.log(gvals)) ** 2))))
        cs = np.polyfit(radii, upvals, 2)  # curvature + tilt + offset drift
        curvs.append(float(cs[0]))

    p_classes = [_exponent_class(p) for p in exps]
    fallback = any(c is None for c in p_classes)
    p_classes = [
        c if c is not None else (1 if abs(p - 1.0) < abs(p - 2.0) else 2)
        for c, p in zip(p_classes, exps)
    ]

    tilt_ratio = float("nan")
    if sorted(p_classes) == [1, 2]:
        kind = "semi_dirac"
    elif p_classes == [2, 2]:
        kind = "quadratic"
    else:
        if np.all(evals > 0):
            tilt_ratio = float(np.sqrt(w @ np.linalg.solve(a_mat, w)))
            if tilt_ratio < 1.0 - TILT_TOL:
                kind = "dirac_I"
            elif tilt_ratio > 1.0 + TILT_TOL:
                kind = "dirac_II"
            else:
                kind = "dirac_III"
        else:
            # Indefinite fitted form: overtilted crossing.
            tilt_ratio = float(
                np.sqrt(abs(w @ np.linalg.pinv(a_mat) @ w)))
            kind = "dirac_II"

    residuals = {
        "tilt_rms": rms_t,
        "velocity_rms": rms_a,
        "exponent_rms": tuple(rms_e),
        "exponent_fallback": fallback,
    }
    return DegeneracyReport(
        kind=kind, tilt=w, velocity_matrix=a_mat, tilt_ratio=tilt_ratio,
        exponents=tuple(exps), residuals=residuals, principal_axes=evecs,
        top_curvatures=tuple(curvs), **base,
    )


def _track_once(spec, block, band_pair, mode, k_prev, eps_deg, splitting,
                tolerance):
    """Refine the cone location from a warm start; None when lost."""
    recip = reciprocal(spec)
    b1n = float(np.linalg.norm(recip.b1))
    gap = make_gap_function(spec, block, band_pair, mode, splitting,
                            tolerance)
    k_star, g = _refine_minimum(gap, np.asarray(k_prev, dtype=float),
                                0.01 * b1n, REFINE_FRAC * b1n)
    if g >= eps_deg:
        return None
    return k_star, g


def tilt_transition_scan(d0: float, beta_start: float, beta_stop: float,
                         block: str, band_pair, beta_step: float = 0.005,
                         mode: str = "retarded", search_region=None,
                         eps_deg: float = EPS_DEG,
                         splitting: float | None = None,
                         tolerance: float = 1e-10,
                         start_point=None) -> ConeTrajectory:
    """Track one degeneracy over a beta sweep and record its changes.

    The first beta locates the cone with a full region search (or from
    start_point); later betas warm-start from the previous location. A
    dirac_I <-> dirac_II classification change is bisected in beta until
    the bracket is narrower than 0.005, which brackets the type-III point.

    Returns:
        ConeTrajectory over the swept betas.
    """
    n_steps = int(round((beta_stop - beta_start) / beta_step))
    betas = [beta_start + i * beta_step for i in range(n_steps + 1)]
    b1n = float(np.linalg.norm(reciprocal(build_lattice(d0, betas[0])).b1))
    coarse_scale = b1n / GRID_N

    reports: list[DegeneracyReport] = []
    swept: list[float] = []
    events: list[dict] = []
    k_prev = None
    beta_prev = None

    def locate(beta, warm):
        spec = build_lattice(d0, beta)
        if warm is not None:
            hit = _track_once(spec, block, band_pair, mode, warm, eps_deg,
                              splitting, tolerance)
            if hit is not None:
                return spec, hit
            return spec, None
        if start_point is not None:
            hit = _track_once(spec, block, band_pair, mode, start_point,
                              eps_deg, splitting, tolerance)
            if hit is not None:
                return spec, hit
        cands = find_degeneracies(spec, block, band_pair, search_region,
                                  mode, eps_deg, splitting=splitting,
                                  tolerance=tolerance)
        if not cands:
            return spec, None
        return spec, (cands[0].k_star, cands[0].gap_min)

    for beta in betas:
        spec, hit = locate(beta, k_prev)
        if hit is None and k_prev is not None:
            # Adaptive halving before declaring the track lost.
            mid = 0.5 * (beta_prev + beta)
            spec_mid, hit_mid = locate(mid, k_prev)
            if hit_mid is not None:
                k_mid, _ = hit_mid
                spec, hit = locate(beta, k_mid)
            if hit is None:
                events.append({
                    "event": "lost",
                    "beta_bracket": (beta_prev, beta),
                })
                k_prev = None
                swept.append(beta)
                continue
        if hit is None:
            swept.append(beta)
            continue
        k_star, _g = hit
        rep = classify(spec, k_star, block, band_pair, mode,
                       eps_deg=eps_deg, splitting=splitting,
                       tolerance=tolerance)
        if reports:
            prev = reports[-1]
            if k_prev is None:
                events.append({
                    "event": "found",
                    "beta_bracket": (beta_prev, beta),
                })
            elif np.linalg.norm(rep.k_star - prev.k_star) > 3.0 * coarse_scale:
                events.append({
                    "event": "discontinuity",
                    "beta_bracket": (prev.beta, beta),
                    "jump": float(np.linalg.norm(rep.k_star - prev.k_star)),
                })
            if prev.kind != rep.kind:
                ev = {
                    "event": "classification_change",
                    "from": prev.kind,
                    "to": rep.kind,
                    "beta_bracket": (prev.beta, beta),
                }
                pair_set = {prev.kind, rep.kind}
                if pair_set == {"dirac_I", "dirac_II"}:
                    ev["type_iii_bracket"] = _bisect_type_iii(
                        d0, prev.beta, beta, prev.kind, prev.k_star, block,
                        band_pair, mode, eps_deg, splitting, tolerance)
                events.append(ev)
        reports.append(rep)
        swept.append(beta)
        k_prev = rep.k_star
        beta_prev = beta

    return ConeTrajectory(beta_values=tuple(swept), reports=tuple(reports),
                          events=tuple(events))


def _bisect_type_iii(d0, beta_lo, beta_hi, kind_lo, k_warm, block, band_pair,
                     mode, eps_deg, splitting, tolerance,
                     width: float = 0.005):
    """Narrow a dirac_I <-> dirac_II change to a type-III bracket."""
    lo, hi = float(beta_lo), float(beta_hi)
    k_here = np.asarray(k_warm, dtype=float)
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        spec = build_lattice(d0, mid)
        hit = _track_once(spec, block, band_pair, mode, k_here, eps_deg,
                          splitting, tolerance)
        if hit is None:
            break
        rep = classify(spec, hit[0], block, band_pair, mode,
                       eps_deg=eps_deg, splitting=splitting,
                       tolerance=tolerance)
        k_here = rep.k_star
        if rep.kind == "dirac_III":
            half = 0.5 * width
            return (mid - half, mid + half)
        if rep.kind == kind_lo:
            lo = mid
        else:
            hi = mid
    return (lo, hi)


def critical_beta(d0: float, block: str, band_pair, target_point,
                  beta_bracket, mode: str = "retarded",
                  eps_deg: float = EPS_DEG, bracket_tol: float = 1e-4,
                  splitting: float | None = None,
                  tolerance: float = 1e-10) -> float:
    """Beta at which a band pair closes its gap at a fixed k-point.

    Golden-section minimization of gap(beta) at target_point down to a
    beta bracket of width bracket_tol.

    Args:
        d0: Cell scale.
        block, band_pair: Which pair to watch.
        target_point: k-point (2,) or a high-symmetry label such as 'M'.
        beta_bracket: (beta_lo, beta_hi) search interval.
        mode: 'retarded' or 'quasistatic'.

    Returns:
        beta_c as a float.

    Raises:
        NoClosure: the minimized gap never fell below eps_deg.
    """
    lo, hi = (float(beta_bracket[0]), float(beta_bracket[1]))
    if isinstance(target_point, str):
        recip = reciprocal(build_lattice(d0, 0.5 * (lo + hi)))
        k_t = recip.point(target_point)
    else:
        k_t = np.asarray(target_point, dtype=float)

    def gap_at(beta):
        spec = build_lattice(d0, beta)
        gap = make_gap_function(spec, block, band_pair, mode, splitting,
                                tolerance)
        return gap(k_t)

    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = gap_at(c), gap_at(d)
    while (b - a) > bracket_tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = gap_at(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = gap_at(d)
    beta_c = 0.5 * (a + b)
    if min(fc, fd) >= eps_deg:
        raise NoClosure(
            f"gap at {np.asarray(k_t)} stayed above {eps_deg:g} over "
            f"beta in [{lo}, {hi}] (best {min(fc, fd):.3e})"
        )
    return float(beta_c)


def _bz_mask(recip, kxy):
    """True for points inside the first Brillouin zone (Wigner-Seitz)."""
    gs = []
    for i, j in ((1, 0), (0, 1), (1, 1), (-1, 0), (0, -1), (-1, -1)):
        gs.append(i * recip.b1 + j * recip.b2)
    gs = np.array(gs)
    d0sq = np.einsum("ni,ni->n", kxy, kxy)
    ok = np.ones(len(kxy), dtype=bool)
    for g in gs:
        ok &= d0sq <= np.einsum("ni,ni->n", kxy - g, kxy - g) + 1e-12
    return ok


def dos_histogram(spec: LatticeSpec, block: str, energy_window,
                  k_grid: int = 60, n_bins: int = 80,
                  mode: str = "retarded", splitting: float | None = None,
                  tolerance: float = 1e-10):
    """Normalized density-of-states histogram over the Brillouin zone.

    Equal-weight k sampling on a rectangular grid masked to the first zone.

    Args:
        spec: Lattice.
        block: Which polarization block to histogram.
        energy_window: (lo, hi) detuning window.
        k_grid: Grid points per axis before masking.
        n_bins: Histogram bins across the window.

    Returns:
        (bin_centers, density) arrays; empty arrays for an empty window.
    """
    lo, hi = float(energy_window[0]), float(energy_window[1])
    if not (hi > lo):
        return np.array([]), np.array([])
    recip = reciprocal(spec)
    mx = abs(recip.M[0])
    ky = float(np.linalg.norm(recip.K))
    kxs = np.linspace(-mx, mx, k_grid)
    kys = np.linspace(-ky, ky, k_grid)
    kxy = np.array([[x, y] for x in kxs for y in kys])
    kxy = kxy[_bz_mask(recip, kxy)]
    recip_scale = float(np.linalg.norm(recip.b1))

    pair_all = {OUT_OF_PLANE: (0, 1), IN_PLANE: (0, 1, 2, 3)}[block]
    energies = []
    for k in kxy:
        try:
            bs = eigensolve(assemble(spec, k, mode, splitting, tolerance))
        except RayleighAnomaly:
            kn = np.linalg.norm(k)
            direction = k / kn if kn > 0 else np.array([1.0, 0.0])
            bs = eigensolve(assemble(spec, k + 1e-7 * recip_scale * direction,
                                     mode, splitting, tolerance))
        det = bs.detuning[[i for i in range(6) if bs.block[i] == block]]
        energies.extend(det[list(pair_all)])
    energies = np.asarray(energies)
    energies = energies[(energies >= lo) & (energies <= hi)]
    hist, edges = np.histogram(energies, bins=n_bins, range=(lo, hi),
                               density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return centers, hist
