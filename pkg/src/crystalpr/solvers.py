"""Feasibility solvers for magnitude-constrained sparse recovery.

The problem is to find a point in the intersection of

    B = { x : |Fx| = y0 }    and    S = { x : x is K-sparse },

via the two projectors

    P_B(x) = F^{-1}( y0 . sign(Fx) )      (sign(0) = 0)
    P_S(x) = keep the K largest-|.| entries, lowest index wins ties,

iterated either as alternating projection x <- P_S(P_B(x)) or as the relaxed
reflect-reflect update

    x <- x + beta * ( P_B(2 P_S(x) - x) - P_S(x) ),    beta in (0, 2),

which coincides with Douglas-Rachford at beta = 1.  Success is declared from
the symmetry-aware error against a known planted signal when one is available;
otherwise from stagnation of the update (the iteration stalls only at points
whose sparse projection solves the problem) plus spectral feasibility of the
sparse estimate.  The energy-concentration index eta is reported as a
diagnostic; at a fixed point the iterate keeps an off-support displacement,
so eta saturates strictly below 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .fourier import FourierMagnitude, _fftn_flat, _ifftn_flat, fourier_magnitude
from .groups import AbelianGroup, Field, Signal
from .rng import rng_id, substream


class Variant(enum.Enum):
    ALTERNATING_PROJECTION = "ap"
    RRR = "rrr"


@dataclass(frozen=True)
class SolverConfig:
    beta: float = 0.5
    max_iter: int = 10_000_000
    success_tol: float = 1e-8
    seed: int = 0
    variant: Variant = Variant.RRR
    # practical success thresholds used when no ground truth is supplied;
    # non-normative defaults
    stagnation_tol: float = 1e-10
    feas_tol: float = 1e-6
    log_every: int = 0

    def __post_init__(self):
        if not 0.0 < self.beta < 2.0:
            raise ValueError(f"beta must lie in (0, 2), got {self.beta}")

    def to_json_dict(self) -> dict:
        return {
            "variant": self.variant.value,
            "beta": self.beta,
            "max_iter": self.max_iter,
            "success_tol": self.success_tol,
            "seed": self.seed,
        }


@dataclass
class SolveResult:
    estimate: Signal
    iterations: int
    converged: bool
    final_error: float
    final_eta: float
    trajectory: list[tuple[int, float, float]] | None = None

    def to_json_dict(self) -> dict:
        return {
            "estimate": self.estimate.to_json_dict(),
            "iterations": self.iterations,
            "converged": self.converged,
            "final_error": self.final_error,
            "final_eta": self.final_eta,
        }


def project_S(x: Signal, k: int) -> Signal:
    """K-sparse truncation keeping the largest-magnitude entries."""
    if not 0 <= k <= x.group.order:
        raise ValueError(f"K={k} out of range for order {x.group.order}")
    order = np.argsort(-np.abs(x.values), kind="stable")
    vals = np.zeros_like(x.values)
    keep = order[:k]
    vals[keep] = x.values[keep]
    return Signal(x.group, x.field, vals)


def project_B(x: Signal, y0: FourierMagnitude) -> Signal:
    """Replace spectral magnitudes with y0, keeping the current phases.

    Bins where the current spectrum is exactly zero stay zero (the measured
    magnitude there is dropped for this iterate).  For real signals the phase
    field is mirrored from a canonical spectral half before inversion so the
    output is real; y0 is read on that half (it is assumed
    reflection-symmetric).
    """
    g = x.group
    if y0.group != g:
        raise ValueError("signal and magnitudes live on different groups")
    xh = _fftn_flat(g, x.values.astype(np.complex128))
    if x.field is Field.COMPLEX:
        mags = np.abs(xh)
        with np.errstate(invalid="ignore", divide="ignore"):
            phases = np.where(mags > 0, xh / np.where(mags > 0, mags, 1.0), 0.0)
        return Signal(g, Field.COMPLEX, _ifftn_flat(g, y0.values * phases))
    neg = g.negation_perm
    idx = np.arange(g.order)
    canon = idx <= neg
    v = np.zeros(g.order, dtype=np.complex128)
    mags = np.abs(xh[canon])
    with np.errstate(invalid="ignore", divide="ignore"):
        v[canon] = np.where(mags > 0, y0.values[canon] * xh[canon] / np.where(mags > 0, mags, 1.0), 0.0)
    v[neg[canon]] = np.conj(v[canon])
    return Signal(g, Field.REAL, _ifftn_flat(g, v).real)


def rrr_step(x: Signal, y0: FourierMagnitude, k: int, beta: float) -> Signal:
    """One relaxed reflect-reflect update."""
    if not 0.0 < beta < 2.0:
        raise ValueError(f"beta must lie in (0, 2), got {beta}")
    xs = project_S(x, k)
    refl = Signal(x.group, x.field, 2.0 * xs.values - x.values)
    pb = project_B(refl, y0)
    return Signal(x.group, x.field, x.values + beta * (pb.values - xs.values))


def ap_step(x: Signal, y0: FourierMagnitude, k: int) -> Signal:
    """One alternating-projection (error-reduction) update."""
    return project_S(project_B(x, y0), k)


def eta_index(x: Signal, k: int) -> float:
    """Fraction of energy carried by the K dominant entries."""
    nsq = float(np.vdot(x.values, x.values).real)
    if nsq == 0.0:
        raise ValueError("eta index of the zero signal is undefined")
    xs = project_S(x, k)
    return float(np.vdot(xs.values, xs.values).real) / nsq


def _symmetry_perms(group: AbelianGroup) -> tuple[np.ndarray, np.ndarray]:
    """Index tables for the dihedral action: rows map output position to source."""
    order = group.order
    no_reflect = np.empty((order, order), dtype=np.int64)
    with_reflect = np.empty((order, order), dtype=np.int64)
    neg = group.negation_perm
    for li in range(order):
        src = group.shift_perm(group.negate(group.element_of(li)))
        no_reflect[li] = src
        with_reflect[li] = neg[src]
    return no_reflect, with_reflect


def _relative_error_sq(xs_vals: np.ndarray, xt_vals: np.ndarray, perms_nr: np.ndarray,
                       perms_r: np.ndarray, is_real: bool, nxt_sq: float) -> float:
    """min_g ||g.xs - xt||^2 / ||xt||^2 over the full symmetry group (fast path)."""
    nxs_sq = float(np.vdot(xs_vals, xs_vals).real)
    conj_t = np.conj(xt_vals)
    dots_nr = xs_vals[perms_nr] @ conj_t
    dots_r = np.conj(xs_vals)[perms_r] @ conj_t
    if is_real:
        m = max(np.max(np.abs(dots_nr.real)), np.max(np.abs(dots_r.real)))
    else:
        m = max(np.max(np.abs(dots_nr)), np.max(np.abs(dots_r)))
    return max(nxs_sq + nxt_sq - 2.0 * m, 0.0) / nxt_sq


def _spectral_feasibility(xs: Signal, y0: FourierMagnitude) -> float:
    r = fourier_magnitude(xs).values - y0.values
    denom = np.linalg.norm(y0.values)
    return float(np.linalg.norm(r) / denom) if denom > 0 else float(np.linalg.norm(r))


def solve(
    y0: FourierMagnitude,
    k: int,
    config: SolverConfig,
    x_true: Signal | None = None,
    field: Field = Field.REAL,
    use_kernel: str = "auto",
    x_init: Signal | None = None,
) -> SolveResult:
    """Run the configured variant from a seeded i.i.d. standard normal start.

    With x_true given, success means the symmetry-aware squared relative error
    of the sparse estimate P_S(x) drops to success_tol; without it, success
    means the update norm fell below stagnation_tol * ||x|| with the relative
    spectral feasibility of P_S(x) below feas_tol.  Reaching max_iter is
    reported as converged=False, not an error.  The returned estimate is the
    sparse iterate P_S(x).

    use_kernel: "auto" selects the compiled path for real 1-D problems without
    trajectory logging; "never" forces the numpy reference loop.  x_init
    overrides the random start (warm restarts, oracle checks).
    """
    group = y0.group
    if x_true is not None and (x_true.group != group):
        raise ValueError("x_true group does not match y0")
    if x_true is not None:
        field = x_true.field
    if x_init is not None:
        if x_init.group != group:
            raise ValueError("x_init group does not match y0")
        x0 = x_init.values.copy()
    elif field is Field.REAL:
        x0 = substream(config.seed).standard_normal(group.order)
    else:
        rng = substream(config.seed)
        x0 = rng.standard_normal(group.order) + 1j * rng.standard_normal(group.order)

    kernel_ok = (
        use_kernel in ("auto", "always")
        and group.rank == 1
        and field is Field.REAL
        and config.log_every == 0
    )
    if kernel_ok:
        return _solve_kernel_single(group, x0, y0, k, config, x_true)
    return _solve_reference(group, field, x0, y0, k, config, x_true)


def _solve_reference(group, field, x0, y0, k, config, x_true) -> SolveResult:
    x = Signal(group, field, x0)
    is_real = field is Field.REAL
    if x_true is not None:
        perms_nr, perms_r = _symmetry_perms(group)
        xt = x_true.values
        nxt_sq = float(np.vdot(xt, xt).real)
    trajectory: list[tuple[int, float, float]] = []
    err = math.inf
    eta = 0.0
    last_update = math.inf
    it = 0
    while True:
        xs = project_S(x, k)
        nx_sq = float(np.vdot(x.values, x.values).real)
        eta = float(np.vdot(xs.values, xs.values).real) / nx_sq if nx_sq > 0 else 0.0
        converged = False
        if x_true is not None:
            err = _relative_error_sq(xs.values, xt, perms_nr, perms_r, is_real, nxt_sq)
            converged = err <= config.success_tol
        elif last_update <= config.stagnation_tol * math.sqrt(nx_sq):
            converged = _spectral_feasibility(xs, y0) <= config.feas_tol
        if config.log_every and it % config.log_every == 0:
            trajectory.append((it, err, eta))
        if converged:
            return SolveResult(xs, it, True, err, eta, trajectory or None)
        if it >= config.max_iter:
            return SolveResult(xs, it, False, err, eta, trajectory or None)
        if config.variant is Variant.RRR:
            new_x = rrr_step(x, y0, k, config.beta)
        else:
            new_x = ap_step(x, y0, k)
        last_update = float(np.linalg.norm(new_x.values - x.values))
        x = new_x
        it += 1


def _kernel_inputs(group: AbelianGroup, y0_values: np.ndarray, x_true: Signal | None):
    from . import _kernels

    n = group.order
    nh = n // 2 + 1
    cosmat, sinmat, wk = _kernels.trig_tables(n)
    y0h = y0_values[:nh].copy()
    if x_true is not None:
        perm = _kernels.symmetry_perm_table(n)
        supp = np.nonzero(x_true.values)[0]
        if supp.size == 0:
            raise ValueError("x_true is identically zero")
        dot_table = perm[:, supp].copy()
        xt_vals = x_true.values[supp].copy()
        nxt_sq = float(np.dot(xt_vals, xt_vals))
        has_truth = True
    else:
        dot_table = np.zeros((1, 1), dtype=np.int64)
        xt_vals = np.zeros(1)
        nxt_sq = 1.0
        has_truth = False
    return cosmat, sinmat, wk, y0h, dot_table, xt_vals, nxt_sq, has_truth


def _solve_kernel_single(group, x0, y0, k, config, x_true) -> SolveResult:
    from . import _kernels

    cosmat, sinmat, wk, y0h, dot_table, xt_vals, nxt_sq, has_truth = _kernel_inputs(
        group, y0.values, x_true
    )
    n = group.order
    xmat = x0.reshape(1, n).astype(np.float64)
    xsmat = np.zeros_like(xmat)
    iters = np.zeros(1, dtype=np.int64)
    conv = np.zeros(1, dtype=np.bool_)
    err = np.zeros(1)
    eta = np.zeros(1)
    variant = _kernels.RRR if config.variant is Variant.RRR else _kernels.ALTERNATING_PROJECTION
    _kernels.solve_batch(
        xmat, xsmat, y0h.reshape(1, -1), k, config.beta, variant, config.max_iter,
        config.success_tol, dot_table.reshape((1,) + dot_table.shape),
        xt_vals.reshape(1, -1), np.array([nxt_sq]), has_truth,
        config.stagnation_tol, config.feas_tol, cosmat, sinmat, wk, iters, conv, err, eta,
    )
    estimate = Signal(group, Field.REAL, xsmat[0])
    return SolveResult(estimate, int(iters[0]), bool(conv[0]), float(err[0]), float(eta[0]))


@dataclass
class KStatistics:
    K: int
    trials: int
    success_count: int
    median_iterations: float
    p10_iterations: float
    p90_iterations: float
    iteration_counts: list[int] = field(default_factory=list)
    converged: list[bool] = field(default_factory=list)

    @property
    def success_rate(self) -> float:
        return self.success_count / self.trials if self.trials else 0.0


@dataclass
class IterationStudy:
    N: int
    trials: int
    seed: int
    rng: str
    config: SolverConfig
    per_k: list[KStatistics] = field(default_factory=list)

    def metadata(self) -> dict:
        return {
            "N": self.N,
            "K": [s.K for s in self.per_k],
            "trials": self.trials,
            "seed": self.seed,
            "rng": self.rng,
            "beta": self.config.beta,
            "max_iter": self.config.max_iter,
            "variant": self.config.variant.value,
        }


def _diffset_size_1d(n: int, idx: np.ndarray) -> int:
    d = (idx[:, None] - idx[None, :]) % n
    return len(np.unique(np.minimum(d, n - d)))


def iteration_study(
    n: int,
    k_values: list[int],
    trials: int,
    config: SolverConfig,
    require_diffset_gt_k: bool = False,
    threads: int | None = None,
) -> IterationStudy:
    """Seeded batch of planted solves per sparsity level on Z_n (real field).

    Each trial plants a uniform random K-support (optionally rejected until
    |S-S| > K), draws the nonzero values i.i.d. uniform on [0,1], measures
    exact magnitudes, and runs the configured variant from an i.i.d. standard
    normal start.  Trials derive independent RNG substreams from
    (seed, K, trial), so results do not depend on the thread count.
    """
    from . import _kernels

    if threads is not None:
        import numba

        numba.set_num_threads(max(1, min(threads, numba.config.NUMBA_NUM_THREADS)))

    group = AbelianGroup(n)
    nh = n // 2 + 1
    cosmat, sinmat, wk = _kernels.trig_tables(n)
    perm = _kernels.symmetry_perm_table(n)
    study = IterationStudy(n, trials, config.seed, rng_id(config.seed), config)
    variant = _kernels.RRR if config.variant is Variant.RRR else _kernels.ALTERNATING_PROJECTION
    for k in k_values:
        xmat = np.empty((trials, n))
        xsmat = np.zeros((trials, n))
        y0h = np.empty((trials, nh))
        dot_tables = np.empty((trials, 2 * n, k), dtype=np.int64)
        xt_vals_mat = np.empty((trials, k))
        nxt_sqs = np.empty(trials)
        for t in range(trials):
            rng = substream(config.seed, k, t)
            while True:
                supp = np.sort(rng.choice(n, size=k, replace=False))
                if not require_diffset_gt_k or _diffset_size_1d(n, supp) > k:
                    break
            vals = rng.uniform(0.0, 1.0, size=k)
            xt = np.zeros(n)
            xt[supp] = vals
            spectrum = np.abs(np.fft.fft(xt))
            y0h[t] = spectrum[:nh]
            dot_tables[t] = perm[:, supp]
            xt_vals_mat[t] = vals
            nxt_sqs[t] = float(np.dot(vals, vals))
            xmat[t] = rng.standard_normal(n)
        iters = np.zeros(trials, dtype=np.int64)
        conv = np.zeros(trials, dtype=np.bool_)
        err = np.zeros(trials)
        eta = np.zeros(trials)
        _kernels.solve_batch(
            xmat, xsmat, y0h, k, config.beta, variant, config.max_iter,
            config.success_tol, dot_tables, xt_vals_mat, nxt_sqs, True,
            config.stagnation_tol, config.feas_tol, cosmat, sinmat, wk,
            iters, conv, err, eta,
        )
        counts = iters.astype(int)
        study.per_k.append(
            KStatistics(
                K=k,
                trials=trials,
                success_count=int(np.sum(conv)),
                median_iterations=float(np.median(counts)),
                p10_iterations=float(np.percentile(counts, 10)),
                p90_iterations=float(np.percentile(counts, 90)),
                iteration_counts=[int(c) for c in counts],
                converged=[bool(c) for c in conv],
            )
        )
    return study
