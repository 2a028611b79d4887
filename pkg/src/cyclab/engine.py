"""Certificate optimizers and the cyclicity classification logic.

The two infimum solvers minimize the weighted coefficient norm of 1 - P*f
(two-sided polynomials P) and of f - z*Q*f (analytic polynomials Q).  Both
objectives are exact finite sums, since degrees add under multiplication.
At p = 2 they are weighted linear least squares, solved matrix-free with
LSMR on top of FFT convolutions; for 1 < p < 2 the smoothed objective

    sum_n w_n (|r_n|^2 + mu^2)^(p/2),    w_n = (1 + |n|)^(p*beta)

is driven to mu -> 0 by a geometric continuation schedule, each step running
iteratively reweighted least squares on the same fast path.  Solver output
is always an upper bound witnessed by the returned polynomial; reported
values are recomputed from that polynomial, never read off the iteration.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.signal import fftconvolve
from scipy.sparse.linalg import LinearOperator, lsmr

from .analytic import m_epsilon, outer_power_modulus
from .fourier import (
    FourierSeries,
    _space_params,
    circle_grid,
    eval_on_grid,
    norm_ap_beta,
    series_from_samples,
)
from .geometry import distance_to_set

TWO_PI = 2.0 * math.pi

SUPPORTS = ("all_integers", "nonneg", "positive")

# continuation schedule: mu_j = MU_SCALE*||r0||_inf * 2^-j over MU_STEPS steps
MU_STEPS = 8
MU_SCALE = 0.1
INNER_CAP = 200
INNER_RTOL = 1e-10
# total LSMR iterations one infimum call may spend across all IRLS sweeps;
# generous for well-conditioned problems, a hard wall for ill-conditioned
# ones, where the iteration creeps and the value is an upper bound anyway
LSMR_TOTAL_BUDGET = 40000


def _support_range(support, degree):
    if support == "all_integers":
        return -degree, degree
    if support == "nonneg":
        return 0, degree
    if support == "positive":
        if degree < 1:
            raise ValueError("positive support needs degree >= 1")
        return 1, degree
    raise ValueError(f"unknown support {support!r}; expected one of {SUPPORTS}")


def _dense(f):
    """Coefficients of a FourierSeries as (lo, contiguous complex array)."""
    sup = f.support()
    lo, hi = sup[0], sup[-1]
    return lo, f.dense(lo, hi)


class _ConvObjective:
    """Residual b - conv(f, x) over a fixed output index range."""

    def __init__(self, f_lo, f_arr, s_lo, s_hi, target_lo, target_arr, p, beta):
        self.f_arr = f_arr
        self.n_cols = s_hi - s_lo + 1
        conv_lo = f_lo + s_lo
        conv_hi = f_lo + len(f_arr) - 1 + s_hi
        out_lo = min(target_lo, conv_lo)
        out_hi = max(target_lo + len(target_arr) - 1, conv_hi)
        self.out_lo = out_lo
        self.n_rows = out_hi - out_lo + 1
        self.conv_off = conv_lo - out_lo
        self.b = np.zeros(self.n_rows, dtype=complex)
        self.b[target_lo - out_lo : target_lo - out_lo + len(target_arr)] = target_arr
        idx = np.arange(out_lo, out_hi + 1)
        self.base_w = (1.0 + np.abs(idx)) ** (p * beta)
        self.p = p

    def apply(self, x):
        y = np.zeros(self.n_rows, dtype=complex)
        conv = fftconvolve(self.f_arr, x)
        y[self.conv_off : self.conv_off + len(conv)] = conv
        return y

    def residual(self, x):
        return self.b - self.apply(x)

    def norm_p(self, x):
        r = self.residual(x)
        return float(np.sum(self.base_w * np.abs(r) ** self.p)) ** (1.0 / self.p)

    def solve_weighted(self, sqrt_w, x0=None, atol=1e-10, maxiter=None):
        """min_x || sqrt_w * (b - conv(f, x)) ||_2 via LSMR."""
        nf = len(self.f_arr)
        off = self.conv_off

        def matvec(x):
            y = np.zeros(self.n_rows, dtype=complex)
            conv = fftconvolve(self.f_arr, x)
            y[off : off + len(conv)] = conv
            return sqrt_w * y

        def rmatvec(y):
            yw = np.conj(sqrt_w) * y
            seg = yw[off : off + nf + self.n_cols - 1]
            full = fftconvolve(np.conj(self.f_arr[::-1]), seg)
            return full[nf - 1 : nf - 1 + self.n_cols]

        A = LinearOperator(
            (self.n_rows, self.n_cols), matvec=matvec, rmatvec=rmatvec, dtype=complex
        )
        if maxiter is None:
            maxiter = min(4 * (self.n_rows + self.n_cols), 3000)
        out = lsmr(A, sqrt_w * self.b, atol=atol, btol=atol, maxiter=maxiter, x0=x0)
        return out[0], int(out[2])

    def solve_unweighted_exact(self):
        """Exact unweighted least squares through the Toeplitz normal equations.

        Valid only when all base weights agree (beta = 0).  The normal matrix
        is the autocorrelation of f, solved by Levinson recursion; returns
        None when the recursion hits a degenerate principal minor.
        """
        nf = len(self.f_arr)
        rho = fftconvolve(np.conj(self.f_arr[::-1]), self.f_arr)
        mid = nf - 1
        n = self.n_cols
        col = np.zeros(n, dtype=complex)
        L = min(n - 1, nf - 1)
        col[: L + 1] = rho[mid : mid + L + 1]
        # rhs over column i: sum_n conj(f_{n - s_i}) b_n, a cross-correlation
        # of f with the stored target; index bookkeeping collapses to
        # nf - 1 + conv_off + i because b lives on the output range
        cross = fftconvolve(np.conj(self.f_arr[::-1]), self.b)
        rhs = np.zeros(n, dtype=complex)
        for i in range(n):
            k = (nf - 1) + self.conv_off + i
            if 0 <= k < len(cross):
                rhs[i] = cross[k]
        try:
            x = scipy.linalg.solve_toeplitz((col, np.conj(col)), rhs)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError):
            return None
        if not np.all(np.isfinite(x)):
            return None
        return x


@dataclass(frozen=True)
class InfimumResult:
    """Solver outcome: the achieved norm and the polynomial witnessing it."""

    value: float
    polynomial: FourierSeries
    converged: bool
    degree: int
    support: str

    def __iter__(self):
        yield self.value
        yield self.polynomial


def _minimize(f, space, beta, support, degree, target, warm=None):
    p, bval = _space_params(space, beta)
    if p <= 1.0:
        raise ValueError("the solver handles 1 < p <= 2 only")
    if p > 2.0:
        raise ValueError("p > 2 objectives are outside the solver's scope")
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    if len(f) == 0:
        raise ValueError("f must be nonzero")
    s_lo, s_hi = _support_range(support, degree)
    f_lo, f_arr = _dense(f)
    t_lo, t_arr = target
    prob = _ConvObjective(f_lo, f_arr, s_lo, s_hi, t_lo, t_arr, p, bval)

    x0 = None
    if warm is not None:
        x0 = np.zeros(prob.n_cols, dtype=complex)
        for n, c in warm.coeffs.items():
            if s_lo <= n <= s_hi:
                x0[n - s_lo] = c

    x_exact = prob.solve_unweighted_exact() if bval == 0.0 else None
    # large ill-conditioned problems get a bounded LSMR budget; the returned
    # value is an upper bound either way and the exact beta = 0 seed already
    # carries the heavy lifting
    big = prob.n_rows + prob.n_cols > 1500
    atol = 1e-7 if big else 1e-10
    maxiter = 800 if big else 3000

    converged = True
    if p == 2.0:
        if x_exact is not None:
            x = x_exact
        else:
            x, _ = prob.solve_weighted(np.sqrt(prob.base_w), x0=x0, atol=atol)
    else:
        # seed IRLS with the best available iterate and never return worse
        candidates = [np.zeros(prob.n_cols, dtype=complex)]
        if x0 is not None:
            candidates.append(x0)
        if x_exact is not None:
            candidates.append(x_exact)
        x = min(candidates, key=prob.norm_p)
        best_x, best_v = x, prob.norm_p(x)
        r = prob.residual(x)
        mu0 = MU_SCALE * float(np.max(np.abs(r)))
        if mu0 == 0.0:
            mu0 = 1e-12
        iters_left = LSMR_TOTAL_BUDGET
        for j in range(MU_STEPS):
            mu = mu0 * 2.0**-j
            prev = None
            for _ in range(INNER_CAP):
                if iters_left <= 0:
                    converged = False
                    break
                w = np.sqrt(prob.base_w) * (np.abs(r) ** 2 + mu**2) ** ((p - 2.0) / 4.0)
                # the exponent halves twice: once for smoothing, once for sqrt
                x, spent = prob.solve_weighted(
                    w, x0=x, atol=atol, maxiter=min(maxiter, iters_left)
                )
                iters_left -= max(spent, 1)
                r = prob.residual(x)
                v = prob.norm_p(x)
                if v < best_v:
                    best_x, best_v = x, v
                obj = float(np.sum(prob.base_w * (np.abs(r) ** 2 + mu**2) ** (p / 2)))
                if prev is not None and abs(prev - obj) <= INNER_RTOL * max(obj, 1.0):
                    break
                prev = obj
            else:
                converged = False
            if iters_left <= 0:
                break
        x = best_x

    poly = FourierSeries.from_dense(x, s_lo)
    # report the norm achieved by the polynomial actually returned
    value = prob.norm_p(poly.dense(s_lo, s_hi))
    return InfimumResult(
        value=value, polynomial=poly, converged=converged, degree=degree, support=support
    )


def bicyclicity_infimum(f, space, support="all_integers", degree=0, warm=None):
    """Minimize the weighted norm of 1 - P*f over P supported on the choice set.

    Returns the achieved norm (an upper bound on the true infimum at this
    degree, nonincreasing in `degree`) and the optimizing polynomial.
    """
    return _minimize(f, space, None, support, degree, (0, np.ones(1, dtype=complex)), warm)


def forward_shift_infimum(f, space, degree=0, warm=None):
    """Minimize the weighted norm of f - z*Q*f over Q supported on {0..degree}.

    Internally the variable is R = z*Q on {1..degree+1}; the returned
    polynomial is Q itself.
    """
    t_lo, t_arr = _dense(f)
    if warm is not None:
        # the internal variable is R = z*Q, so a warm Q moves up by one
        warm = FourierSeries({n + 1: c for n, c in warm.coeffs.items()})
    res = _minimize(f, space, None, "positive", degree + 1, (t_lo, t_arr), warm)
    shifted = FourierSeries({n - 1: c for n, c in res.polynomial.coeffs.items()})
    return InfimumResult(
        value=res.value,
        polynomial=shifted,
        converged=res.converged,
        degree=degree,
        support="nonneg",
    )


def szego_lower_bound(f, G=4096):
    """exp of the grid mean of log |f|, exact-zero samples excluded.

    At p = 2, beta = 0 the shift infimum cannot fall below this number, and
    for nonvanishing f it is the infimum's large-degree limit.
    """
    while G < 2 * f.degree + 1:
        G *= 2
    vals = np.abs(eval_on_grid(f, G))
    pos = vals > 0.0
    if not pos.any():
        return 0.0
    return float(np.exp(np.mean(np.log(vals[pos]))))


@dataclass(frozen=True)
class CertificateProblem:
    """Inputs for a cyclicity certificate search."""

    f: FourierSeries
    space: object
    support: str = "all_integers"
    degree_budget: int = 1024
    epsilon_target: float = 0.25
    truncation_tail: float = 0.0

    def __post_init__(self):
        p, beta = _space_params(self.space)
        q = p / (p - 1.0)
        if beta * q > 1.0:
            raise ValueError(
                "beta*q > 1: the space is an algebra and has no cyclic vectors"
            )
        if self.support not in SUPPORTS:
            raise ValueError(f"unknown support {self.support!r}")
        if self.degree_budget < 0:
            raise ValueError("degree_budget must be nonnegative")
        if not (self.epsilon_target > 0.0):
            raise ValueError("epsilon_target must be positive")
        if len(self.f) == 0:
            raise ValueError("f must be nonzero")


@dataclass
class CertificateReport:
    """Outcome of a certificate search with its degree-schedule trace."""

    achieved_bicyclic_norm: float
    achieved_shift_norm: float
    degrees_used: tuple
    verdict: str
    solver_trace: list
    szego_bound: float
    epsilon_target: float
    truncation_tail: float
    best_p: FourierSeries = field(repr=False, default=None)
    best_q: FourierSeries = field(repr=False, default=None)

    def to_json_obj(self):
        return {
            "achieved_bicyclic_norm": self.achieved_bicyclic_norm,
            "achieved_shift_norm": self.achieved_shift_norm,
            "degrees_used": list(self.degrees_used),
            "verdict": self.verdict,
            "solver_trace": self.solver_trace,
            "szego_bound": self.szego_bound,
            "epsilon_target": self.epsilon_target,
            "truncation_tail": self.truncation_tail,
            "best_p": self.best_p.to_json_obj() if self.best_p is not None else None,
            "best_q": self.best_q.to_json_obj() if self.best_q is not None else None,
        }


def _degree_schedule(budget):
    if budget <= 64:
        return [budget]
    degs = [64]
    while degs[-1] * 2 < budget:
        degs.append(degs[-1] * 2)
    degs.append(budget)
    return degs


def certify_cyclic(problem):
    """Search for polynomials P, Q with both certificate norms under the target.

    Degrees double up to the budget, each level warm-started from the last;
    carried-over polynomials stay feasible, so the recorded best norms are
    monotone along the schedule.  Verdicts: `certified` needs both norms
    strictly below the target, `bicyclic_only` the two-sided one alone,
    `failed` otherwise.  The Szego bound documents the p = 2 floor under the
    shift norm; a failed verdict is evidence, not proof, unless that floor
    itself exceeds the target.
    """
    eps = problem.epsilon_target
    best_b = math.inf
    best_s = math.inf
    best_p = None
    best_q = None
    deg_b = deg_s = 0
    trace = []
    for deg in _degree_schedule(problem.degree_budget):
        if best_b >= eps:
            rb = bicyclicity_infimum(
                problem.f, problem.space, problem.support, deg, warm=best_p
            )
            if rb.value < best_b:
                best_b, best_p, deg_b = rb.value, rb.polynomial, deg
        if best_s >= eps:
            rs = forward_shift_infimum(problem.f, problem.space, deg, warm=best_q)
            if rs.value < best_s:
                best_s, best_q, deg_s = rs.value, rs.polynomial, deg
        trace.append(
            {"degree": deg, "bicyclic_norm": best_b, "shift_norm": best_s}
        )
        if best_b < eps and best_s < eps:
            break
    if best_b < eps and best_s < eps:
        verdict = "certified"
    elif best_b < eps:
        verdict = "bicyclic_only"
    else:
        verdict = "failed"
    return CertificateReport(
        achieved_bicyclic_norm=best_b,
        achieved_shift_norm=best_s,
        degrees_used=(deg_b, deg_s),
        verdict=verdict,
        solver_trace=trace,
        szego_bound=szego_lower_bound(problem.f),
        epsilon_target=eps,
        truncation_tail=problem.truncation_tail,
        best_p=best_p,
        best_q=best_q,
    )


@dataclass
class DecayReport:
    """Norm decay of p_eps * f along an epsilon schedule."""

    schedule: list  # (eps, m_eps, norm) triples, m_eps in the normalized mean
    normalized_ratios: list
    verdict: str
    grid_size: int
    truncation: int
    gamma: float

    def to_json_obj(self):
        return {
            "schedule": [list(row) for row in self.schedule],
            "normalized_ratios": self.normalized_ratios,
            "verdict": self.verdict,
            "grid_size": self.grid_size,
            "truncation": self.truncation,
            "gamma": self.gamma,
        }


def p_epsilon_decay(f, E, gamma, space, eps_schedule, G=2**14, truncation=None):
    """Track the weighted norm of p_eps * f as eps decreases.

    For each eps the normalized outer factor p_eps is built on the grid, the
    product is transformed back, and the norm is taken at the configured
    truncation.  Recorded alongside: the normalized log-mean m (the same
    number that makes p_eps(0) = 1) and the envelope ratio
    norm^2 / ((1+m) e^(-2m)).  Verdict `decays` means strictly decreasing
    norms with the final below a tenth of the first; anything else `stalls`.
    """
    eps_schedule = [float(e) for e in eps_schedule]
    if len(eps_schedule) < 2:
        raise ValueError("need at least two epsilons")
    if any(b >= a for a, b in zip(eps_schedule, eps_schedule[1:])):
        raise ValueError("eps schedule must be strictly decreasing")
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    if truncation is None:
        truncation = G // 4
    f_grid = eval_on_grid(f, G)
    d = distance_to_set(circle_grid(G), E)
    on = d == 0.0
    # band-limiting f leaves ~1e-8 relative dust on the set; the gate only
    # needs to catch inputs that genuinely fail to vanish there
    scale = float(np.max(np.abs(f_grid)))
    if on.any() and float(np.max(np.abs(f_grid[on]))) > 1e-6 * max(scale, 1e-30):
        raise ValueError("f does not vanish on E at the grid resolution")

    rows = []
    ratios = []
    for eps in eps_schedule:
        outer = outer_power_modulus(E, gamma, eps, "p_eps", G)
        prod = outer.boundary * f_grid
        series = series_from_samples(prod, truncation)
        norm = norm_ap_beta(series, space)
        base = d**gamma + eps
        m = float(np.mean(0.5 * np.log(1.0 / base)))
        rows.append((eps, m, norm))
        ratios.append(norm**2 / ((1.0 + m) * math.exp(-2.0 * m)))
    norms = [r[2] for r in rows]
    decreasing = all(a > b for a, b in zip(norms, norms[1:]))
    verdict = "decays" if decreasing and norms[-1] < 0.1 * norms[0] else "stalls"
    return DecayReport(
        schedule=rows,
        normalized_ratios=ratios,
        verdict=verdict,
        grid_size=G,
        truncation=truncation,
        gamma=gamma,
    )


def lemma_kel_ratio(E, gamma, delta_prime, eps_schedule, G, exclusion=None):
    """Ratios of the weighted double smoothness integral of F_eps to M_eps.

    The left side is the arc-length double integral of
    d(zeta',E)^(2(delta'-gamma)) |F_eps(zeta)-F_eps(zeta')|^2 / |zeta-zeta'|^2
    with a chordal diagonal exclusion, evaluated by lag reduction (three
    FFT-sized correlations per eps).  M_eps is the unnormalized half
    log-integral, required positive.  Grid nodes lying exactly on E are
    dropped from the weighted sum when the weight exponent is negative.
    """
    if 2.0 * delta_prime - gamma - 1.0 < 0.0:
        raise ValueError("need 2*delta' - gamma - 1 >= 0")
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    G = int(G)
    if G < 16 or (G & (G - 1)) != 0:
        raise ValueError("G must be a power of two >= 16")
    if exclusion is None:
        exclusion = 10.0 / G
    expo = 2.0 * (delta_prime - gamma)
    d = distance_to_set(circle_grid(G), E)
    g = np.zeros(G)
    pos = d > 0.0
    g[pos] = d[pos] ** expo
    if expo >= 0.0:
        g[~pos] = 0.0 if expo > 0.0 else 1.0

    lags = np.arange(G)
    chord = 2.0 * np.sin(np.pi * lags / G)
    kept = np.zeros(G, dtype=bool)
    kept[1:] = chord[1:] >= exclusion
    kernel = np.zeros(G)
    kernel[kept] = chord[kept] ** -2.0
    cell = (TWO_PI / G) ** 2

    ratios = []
    for eps in eps_schedule:
        M = m_epsilon(E, gamma, eps, G)
        if M <= 0.0:
            raise ValueError(f"M_eps = {M:.4f} <= 0 at eps = {eps}; eps too large")
        F = outer_power_modulus(E, gamma, eps, "F_eps", G).boundary
        absF2 = np.abs(F) ** 2
        t1 = float(np.sum(g * absF2))
        spec_g = np.fft.fft(g)
        t2 = np.real(np.fft.ifft(np.conj(spec_g) * np.fft.fft(absF2)))
        a = g * F
        t3 = np.real(np.fft.ifft(np.conj(np.fft.fft(a)) * np.fft.fft(F)))
        lag_sums = t1 + t2 - 2.0 * t3
        lhs = cell * float(np.sum(kernel * lag_sums))
        ratios.append(lhs / M)
    return ratios


def classify_regime(dim_estimate, space, smoothness, log_nonintegrable,
                    log_dist_nonintegrable):
    """Cyclicity verdict from zero-set dimension and smoothness class.

    `smoothness` is either the string "c_infty" or a pair ("lip_delta", delta).
    Order of precedence: the algebra exclusion (beta*q > 1), then the
    dimension obstruction (dim > 1 - beta*q), then the sufficient branches
    below 2(1 - beta*q)/q, and `indeterminate` for the gap in between, where
    dimension alone cannot classify.
    """
    p, beta = _space_params(space)
    if not (1.0 < p <= 2.0):
        raise ValueError("classification needs 1 < p <= 2")
    if not (0.0 <= dim_estimate <= 1.0):
        raise ValueError("dim_estimate must lie in [0, 1]")
    q = p / (p - 1.0)
    bq = beta * q
    if bq > 1.0:
        return "no_cyclic_vectors"
    if dim_estimate > 1.0 - bq:
        return "not_cyclic"
    threshold = 2.0 * (1.0 - bq) / q
    if smoothness == "c_infty":
        if dim_estimate < threshold and log_nonintegrable:
            return "cyclic_sufficient"
        return "indeterminate"
    if isinstance(smoothness, (tuple, list)) and len(smoothness) == 2 and smoothness[0] == "lip_delta":
        delta = float(smoothness[1])
        if (
            delta > beta + 1.0 / p - 0.5
            and dim_estimate < threshold
            and log_dist_nonintegrable
        ):
            return "cyclic_sufficient"
        return "indeterminate"
    raise ValueError(f"unknown smoothness class {smoothness!r}")
