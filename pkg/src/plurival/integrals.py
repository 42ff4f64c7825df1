"""Sublevel-set integrals ``int_{Phi < -t} |f0|^2 e^{-2 phi0} (-psi)^k`` on the unit polydisc.

Everything is done in ``u_j = -log|z_j|``; the angular factor ``(2 pi)^n`` is
dropped from every reported mass and moment.  For diagonal ``Phi = s Phi_a`` the
region is the box ``u_j > t / (s a_j)`` and a single-piece reference factorizes
into truncated exponentials.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import PreconditionError, ValidationError
from .integrability import JumpingQuery, jumping_number
from .lattice import as_rational, format_rational
from .weights import DiagonalZhouWeight, ReferencePair, ToricWeight, relative_type

MIN_SAMPLES = 10_000
MIN_ESS = 100
_CHUNK = 1 << 17


@dataclass(frozen=True)
class ExactSublevel:
    """``mass = mass_coeff * exp(-2 mass_rate t)``; ``ratio = ratio_const + ratio_inv_t / t``.

    ``ratio_const``/``ratio_inv_t`` are None when the moment is not of that form.
    """

    mass_coeff: Fraction
    mass_rate: Fraction
    ratio_const: Fraction | None
    ratio_inv_t: Fraction | None

    def ratio_at(self, t) -> Fraction:
        if self.ratio_const is None:
            raise ValidationError("no rational ratio representation for this fixture")
        return self.ratio_const + self.ratio_inv_t / as_rational(t)


@dataclass(frozen=True)
class SublevelIntegral:
    t: float
    mass: float
    moment: float
    method: str
    stderr: float = 0.0  # of the ratio
    mass_stderr: float = 0.0
    ess: float = math.inf
    log_mass: float = 0.0
    exact: ExactSublevel | None = None

    @property
    def ratio(self) -> float:
        return self.moment / (self.t * self.mass)


def _box(Phi: DiagonalZhouWeight, t: Fraction):
    return tuple(t / (Phi.scale * a) for a in Phi.a)


def _single_generator(ref: ReferencePair):
    gens = ref.f0.generators
    if len(gens) != 1:
        raise PreconditionError("closed form needs a single monomial f0; use Monte Carlo")
    return gens[0]


def _rates(ref: ReferencePair):
    """Per-axis exponents ``c_j`` with ``|f0|^2 e^{-2 phi0} = exp(-2 <c, u>)`` (Jacobian included)."""
    if len(ref.phi0.pieces) != 1:
        raise PreconditionError("closed form needs a single-piece phi0; use Monte Carlo")
    g = _single_generator(ref)
    beta = ref.phi0.folded[0]
    c = tuple(Fraction(x) + 1 - b for x, b in zip(g, beta))
    if any(x <= 0 for x in c):
        raise PreconditionError(f"reference is not integrable on the polydisc (rates {c})")
    return c


def _psi_axes(psi: ToricWeight):
    """``-psi = min_j m_j u_j`` over the axes present, or None if psi is not of that shape."""
    out = {}
    for p in psi.folded:
        nz = [j for j, x in enumerate(p) if x != 0]
        if len(nz) != 1 or nz[0] in out:
            return None
        out[nz[0]] = p[nz[0]]
    return out


def _closed_form_exact(ref, Phi, psi, t):
    t = as_rational(t)
    if t <= 0:
        raise ValidationError("t must be positive")
    c = _rates(ref)
    box = _box(Phi, t)
    coeff = Fraction(1)
    for cj in c:
        coeff /= 2 * cj
    rate = sum(cj / (Phi.scale * a) for cj, a in zip(c, Phi.a))
    if psi is None or psi.is_zero:
        return ExactSublevel(coeff, rate, Fraction(0), Fraction(0)), Fraction(0)
    if len(psi.pieces) == 1:
        # E[u_j] = box_j + 1/(2 c_j) for a truncated exponential
        beta = psi.folded[0]
        const = sum(b / (Phi.scale * a) for b, a in zip(beta, Phi.a))
        inv_t = sum(b / (2 * cj) for b, cj in zip(beta, c))
        return ExactSublevel(coeff, rate, const, inv_t), None
    axes = _psi_axes(psi)
    if axes is None:
        raise PreconditionError("closed form needs psi with one piece or axis pieces; use Monte Carlo")
    # -psi = min_j (m_j box_j + X_j), X_j ~ Exp(2 c_j / m_j)
    shifts = {j: m * box[j] for j, m in axes.items()}
    mus = {j: 2 * c[j] / m for j, m in axes.items()}
    if len(set(shifts.values())) == 1:
        k = next(iter(shifts.values()))
        mu = sum(mus.values())
        return ExactSublevel(coeff, rate, k / t, 1 / mu), None
    return ExactSublevel(coeff, rate, None, None), _min_shifted_exponentials(shifts, mus)


def _min_shifted_exponentials(shifts, mus) -> float:
    """``E[min_j (k_j + X_j)]`` for independent ``X_j ~ Exp(mu_j)``."""
    order = sorted(shifts, key=lambda j: shifts[j])
    ks = [float(shifts[j]) for j in order] + [math.inf]
    total = ks[0]
    acc_mu = 0.0
    acc_mk = 0.0
    for i, j in enumerate(order):
        acc_mu += float(mus[j])
        acc_mk += float(mus[j]) * ks[i]
        lo, hi = ks[i], ks[i + 1]
        # int_lo^hi exp(-(acc_mu x - acc_mk)) dx
        head = math.exp(-(acc_mu * lo - acc_mk))
        tail = 0.0 if hi == math.inf else math.exp(-(acc_mu * hi - acc_mk))
        total += (head - tail) / acc_mu
    return total


def sublevel_closed_form(ref: ReferencePair, Phi: DiagonalZhouWeight, psi: ToricWeight | None, t) -> SublevelIntegral:
    exact, mean = _closed_form_exact(ref, Phi, psi, t)
    tf = float(as_rational(t))
    log_mass = math.log(exact.mass_coeff) - 2 * float(exact.mass_rate) * tf
    mass = math.exp(log_mass)
    if exact.ratio_const is not None:
        ratio = float(exact.ratio_at(t))
    else:
        ratio = mean / tf
    return SublevelIntegral(tf, mass, ratio * tf * mass, "closed_form", log_mass=log_mass, exact=exact)


# ---------------------------------------------------------------------------
# Monte Carlo


def _worker_cap() -> int:
    env = os.environ.get("PLURIVAL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError(f"PLURIVAL_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _proposal_piece(ref: ReferencePair, g):
    """Piece of phi0 whose monomial bound gives the slowest positive rates."""
    best = None
    for beta in ref.phi0.folded:
        lam = tuple(2 * (Fraction(x) + 1 - b) for x, b in zip(g, beta))
        if all(x > 0 for x in lam) and (best is None or min(lam) > min(best)):
            best = lam
    if best is None:
        raise PreconditionError("no phi0 piece yields a valid exponential proposal; re-tune the proposal")
    return best


def _sums(stream, n, box, lam, lin, phi0_pieces, phi0_scale, psi_pieces, psi_scale):
    """Compensated partial sums of w, w h, w^2, w^2 h, w^2 h^2 for one worker."""
    rng = np.random.Generator(np.random.Philox(stream))
    parts = [[] for _ in range(5)]
    done = 0
    while done < n:
        k = min(_CHUNK, n - done)
        e = rng.standard_exponential((k, len(box)))
        u = box + e / lam
        log_q = np.sum(np.log(lam) - lam * (u - box), axis=1)
        log_f = -2.0 * (u @ lin) + 2.0 * phi0_scale * np.min(u @ phi0_pieces.T, axis=1)
        w = np.exp(log_f - log_q)
        h = psi_scale * np.min(u @ psi_pieces.T, axis=1)
        for acc, arr in zip(parts, (w, w * h, w * w, w * w * h, w * w * h * h)):
            acc.append(math.fsum(arr))
        done += k
    return tuple(math.fsum(p) for p in parts)


def sublevel_monte_carlo(
    ref: ReferencePair,
    Phi: DiagonalZhouWeight,
    psi: ToricWeight | None,
    t,
    n_samples: int,
    seed: int,
    workers: int = 1,
) -> SublevelIntegral:
    """Importance-sampled estimate; bit-reproducible for fixed ``(seed, workers)``.

    The proposal is ``u = box + Exp(lam)`` per axis with ``lam`` taken from the
    reference dominated by one phi0 piece, so weights are constant when phi0
    has a single piece.
    """
    if n_samples < MIN_SAMPLES:
        raise ValidationError(f"n_samples must be >= {MIN_SAMPLES}")
    if seed is None:
        raise ValidationError("an explicit seed is required")
    if workers < 1:
        raise ValidationError("workers must be >= 1")
    t = as_rational(t)
    if t <= 0:
        raise ValidationError("t must be positive")
    n = ref.dim
    if Phi.dim != n or (psi is not None and psi.dim != n):
        raise ValidationError("dimension mismatch")
    g = _single_generator(ref)
    lam = np.array([float(x) for x in _proposal_piece(ref, g)])
    box = np.array([float(x) for x in _box(Phi, t)])
    lin = np.array([float(x) + 1 for x in g])
    phi0_pieces = np.array([[float(x) for x in p] for p in ref.phi0.pieces])
    psi = psi if psi is not None else ToricWeight.zero(n)
    psi_pieces = np.array([[float(x) for x in p] for p in psi.pieces])
    counts = [n_samples // workers + (1 if i < n_samples % workers else 0) for i in range(workers)]
    streams = np.random.SeedSequence(seed).spawn(workers)
    args = (box, lam, lin, phi0_pieces, float(ref.phi0.scale), psi_pieces, float(psi.scale))
    with ThreadPoolExecutor(max_workers=min(workers, _worker_cap())) as pool:
        results = list(pool.map(lambda sc: _sums(sc[0], sc[1], *args), zip(streams, counts)))
    sw, swh, sw2, sw2h, sw2h2 = (math.fsum(r[i] for r in results) for i in range(5))
    ess = sw * sw / sw2 if sw2 > 0 else 0.0
    if ess < MIN_ESS:
        raise PreconditionError(f"effective sample size {ess:.1f} < {MIN_ESS}; re-tune the proposal")
    N = n_samples
    mass = sw / N
    mass_var = max(sw2 / N - mass * mass, 0.0) / N
    mean_h = swh / sw
    # delta method for the self-normalized mean
    resid = sw2h2 - 2 * mean_h * sw2h + mean_h * mean_h * sw2
    tf = float(t)
    stderr = math.sqrt(max(resid, 0.0)) / sw / tf
    return SublevelIntegral(
        tf,
        mass,
        mean_h * mass,
        "monte_carlo",
        stderr=stderr,
        mass_stderr=math.sqrt(mass_var),
        ess=ess,
        log_mass=math.log(mass),
    )


# ---------------------------------------------------------------------------
# Convergence of the ratio and mass asymptotics


@dataclass
class RatioSeries:
    t_grid: tuple
    ratios: tuple
    stderrs: tuple
    limit: float  # fitted a in a + b/t
    inv_t_coeff: float
    residual: float
    sigma: Fraction
    tolerance: float
    exact_limit: Fraction | None = None
    exact_inv_t: Fraction | None = None
    sandwich: tuple = field(default=())  # (running min, running max) of the tail

    @property
    def ok(self) -> bool:
        if self.exact_limit is not None and self.exact_limit != self.sigma:
            return False
        return abs(self.limit - float(self.sigma)) <= self.tolerance


def fit_inverse_t(ts: Sequence[float], ys: Sequence[float]):
    """Least squares ``y = a + b/t``; returns (a, b, max residual)."""
    ts = np.asarray(ts, dtype=float)
    ys = np.asarray(ys, dtype=float)
    X = np.column_stack([np.ones_like(ts), 1.0 / ts])
    coef, *_ = np.linalg.lstsq(X, ys, rcond=None)
    res = float(np.max(np.abs(X @ coef - ys))) if len(ts) else 0.0
    return float(coef[0]), float(coef[1]), res


def _check_grid(t_grid):
    ts = [as_rational(t) for t in t_grid]
    if len(ts) < 2 or any(b <= a for a, b in zip(ts, ts[1:])) or ts[0] <= 0:
        raise ValidationError("t-grid must be positive, strictly increasing, with >= 2 nodes")
    return ts


def ratio_convergence(
    psi: ToricWeight,
    Phi: DiagonalZhouWeight,
    ref: ReferencePair | None = None,
    t_grid=(1, 2, 4, 8, 16, 32),
    method: str = "auto",
    n_samples: int = 100_000,
    seed: int = 0,
    workers: int = 1,
) -> RatioSeries:
    """``moment / (t mass)`` on a grid, fitted by ``a + b/t`` and compared with ``sigma(psi, Phi)``."""
    ref = ref or ReferencePair.trivial(Phi.dim)
    ts = _check_grid(t_grid)
    if method == "auto":
        try:
            _closed_form_exact(ref, Phi, psi, ts[0])
            method = "closed_form"
        except PreconditionError:
            method = "monte_carlo"
    if method == "closed_form":
        vals = [sublevel_closed_form(ref, Phi, psi, t) for t in ts]
    elif method == "monte_carlo":
        vals = [sublevel_monte_carlo(ref, Phi, psi, t, n_samples, seed, workers) for t in ts]
    else:
        raise ValidationError(f"unknown method {method!r}")
    ratios = tuple(v.ratio for v in vals)
    exact = vals[0].exact
    ex_a = exact.ratio_const if exact is not None else None
    ex_b = exact.ratio_inv_t if exact is not None else None
    half = len(ratios) // 2
    # non-rational closed forms carry exponentially small terms: fit the tail only
    lo = 0 if ex_a is not None or method == "monte_carlo" else max(half, len(ratios) - 3)
    a, b, res = fit_inverse_t([float(t) for t in ts[lo:]], ratios[lo:])
    sigma = relative_type(psi, Phi)
    stderrs = tuple(v.stderr for v in vals)
    if method == "closed_form":
        tol = 1e-9 if ex_a is not None else 1e-6
    else:
        tol = 3 * max(stderrs) * max(1.0, float(ts[-1]) / float(ts[-1] - ts[0]))
    tail = ratios[half:]
    return RatioSeries(
        tuple(ts), ratios, stderrs, a, b, res, sigma, tol, ex_a, ex_b, (min(tail), max(tail))
    )


@dataclass
class MassReport:
    t_grid: tuple
    masses: tuple
    scaled: tuple  # e^{2t} mass
    log_rates: tuple  # -log(mass)/(2t)
    threshold: Fraction
    normalized: bool
    limit: Fraction  # exact limit of -log(mass)/(2t)
    extrapolated: float  # two-node 1/t extrapolation of log_rates
    scaled_constant: Fraction | None  # exact e^{2t} mass when normalized
    notes: list

    @property
    def ok(self) -> bool:
        if not self.normalized:
            return True  # report-only
        return (
            self.limit == 1
            and self.scaled_constant is not None
            and min(self.scaled) > 0
            and abs(self.extrapolated - 1) <= 1e-6
        )


def mass_asymptotics(ref: ReferencePair, phi: DiagonalZhouWeight, t_grid=(1, 2, 4, 8, 16, 32)) -> MassReport:
    """Mass of ``{phi < -t}`` under the reference; asserts the limit 1 at threshold normalization."""
    ts = _check_grid(t_grid)
    thr = jumping_number(JumpingQuery(phi.toric, ref.f0, ref.phi0))
    normalized = thr == 1
    vals = [sublevel_closed_form(ref, phi, None, t) for t in ts]
    exact = vals[0].exact
    masses = tuple(v.mass for v in vals)
    scaled = tuple(math.exp(2 * float(t) + v.log_mass) for t, v in zip(ts, vals))
    rates = tuple(-v.log_mass / (2 * float(t)) for t, v in zip(ts, vals))
    t1, t2 = float(ts[-2]), float(ts[-1])
    extrap = (t2 * rates[-1] - t1 * rates[-2]) / (t2 - t1)
    notes = []
    const = None
    if normalized:
        const = exact.mass_coeff  # rate == 1, so e^{2t} mass is constant
    elif thr < 1:
        notes.append(f"jumping number {format_rational(thr)} < 1: e^(2t) mass grows without bound")
    else:
        notes.append(f"jumping number {format_rational(thr)} > 1: reference times e^(-2 phi) is integrable, e^(2t) mass tends to 0")
    return MassReport(tuple(ts), masses, scaled, rates, thr, normalized, exact.mass_rate, extrap, const, notes)
