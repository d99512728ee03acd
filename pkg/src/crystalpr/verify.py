"""Computational uniqueness checks: transversality ranks and fiber censuses.

Three numerical instruments probe whether the magnitude measurement determines
sparse signals up to their symmetries:

* rank tests of the 2K x N matrix stacking a basis of L_{S'} over a
  torus-translated basis of L_S (full rank certifies trivial intersection of
  the translated support subspace with every sparse subspace);
* analytic Jacobians of the class-restricted autocorrelation map on a support
  subspace (full rank certifies local injectivity modulo the finite stabilizer);
* multi-start damped Gauss-Newton searches of the fiber {x' : a(x') = a(x)}
  over a prescribed support, with every located solution re-verified against
  the O(N^2) reference autocorrelation and classified as intrinsic or extra.

Fiber verdicts are evidence, not proof: reports carry start counts, residuals,
and convergence diagnostics so coverage can be raised.
"""

from __future__ import annotations

import cmath
import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .diffsets import difference_set
from .fourier import periodic_autocorrelation
from .groups import AbelianGroup, Field, Signal, SupportSet
from .rng import substream
from .symmetry import SymmetryElement, apply, dihedral_elements


# --- the torus of spectral phase rotations -------------------------------

@dataclass(frozen=True)
class TorusElement:
    """Per-frequency phase rotations acting as x -> F^{-1}(e^{i theta} Fx).

    For the real field the phases satisfy theta_n + theta_{N-n} = 0 (mod 2pi),
    which forces theta_0 (and theta_{N/2} for even N) into {0, pi}; the sign
    pattern at those bins tags the connected component.
    """

    phases: np.ndarray
    field: Field
    component: int = 0

    def __post_init__(self):
        ph = np.asarray(self.phases, dtype=np.float64) % (2.0 * np.pi)
        ph.flags.writeable = False
        object.__setattr__(self, "phases", ph)
        if self.field is Field.REAL:
            n = len(ph)
            mismatch = np.abs((ph + ph[(-np.arange(n)) % n] + np.pi) % (2 * np.pi) - np.pi)
            if np.max(mismatch) > 1e-9:
                raise ValueError("real-field torus element violates theta_n + theta_{N-n} = 0")

    @property
    def n(self) -> int:
        return len(self.phases)


def num_components(n: int, field: Field) -> int:
    if field is Field.COMPLEX:
        return 1
    return 4 if n % 2 == 0 else 2


def random_torus_element(
    n: int, field: Field, component: int, rng: np.random.Generator
) -> TorusElement:
    """Uniform draw within one connected component of the symmetry torus."""
    ncomp = num_components(n, field)
    if not 0 <= component < ncomp:
        raise ValueError(f"component {component} invalid; {ncomp} component(s) exist")
    if field is Field.COMPLEX:
        return TorusElement(rng.uniform(0.0, 2.0 * np.pi, size=n), field, 0)
    phases = np.zeros(n)
    phases[0] = np.pi if component & 1 else 0.0
    if n % 2 == 0:
        phases[n // 2] = np.pi if component & 2 else 0.0
    half = (n - 1) // 2 if n % 2 else n // 2 - 1
    free = rng.uniform(0.0, 2.0 * np.pi, size=half)
    for j, theta in enumerate(free, start=1):
        phases[j] = theta
        phases[n - j] = (-theta) % (2.0 * np.pi)
    return TorusElement(phases, field, component)


def torus_apply(g: TorusElement, x: Signal) -> Signal:
    """Phase-modulate the spectrum; preserves the Fourier magnitude exactly."""
    if x.group.rank != 1 or x.group.order != g.n:
        raise ValueError("torus element size does not match the signal group")
    if g.field is not x.field:
        raise ValueError("torus element and signal field disagree")
    out = np.fft.ifft(np.exp(1j * g.phases) * np.fft.fft(x.values))
    if x.field is Field.REAL:
        return Signal(x.group, Field.REAL, out.real)
    return Signal(x.group, Field.COMPLEX, out)


def shift_torus_element(n: int, shift: int, field: Field) -> TorusElement:
    """The torus element realizing the circular shift x[n] -> x[n - shift]."""
    phases = (-2.0 * np.pi * shift * np.arange(n) / n) % (2 * np.pi)
    comp = 0
    if field is Field.REAL and n % 2 == 0 and shift % 2 == 1:
        comp = 2  # theta_{N/2} = pi
    return TorusElement(phases, field, comp)


# --- transversality of translated sparse subspaces ------------------------

def transversality_matrix(s: SupportSet, s_prime: SupportSet, g: TorusElement) -> np.ndarray:
    """2K x N matrix [e_j (j in S'); g.e_i (i in S)] as rows."""
    if s.group.rank != 1 or s.group != s_prime.group:
        raise ValueError("supports must share a cyclic group")
    n = s.group.order
    if s.K != s_prime.K:
        raise ValueError("supports must have equal cardinality")
    base = np.fft.ifft(np.exp(1j * g.phases))
    dtype = np.float64 if g.field is Field.REAL else np.complex128
    m = np.zeros((2 * s.K, n), dtype=dtype)
    for r, (j,) in enumerate(s_prime.elements):
        m[r, j] = 1.0
    for r, (i,) in enumerate(s.elements):
        row = np.roll(base, i)
        m[s.K + r] = row.real if g.field is Field.REAL else row
    return m


def numerical_rank(matrix: np.ndarray, tol: float = 1e-9) -> int:
    """Count of singular values above tol times the largest."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    sv = np.linalg.svd(matrix, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > tol * sv[0]))


@dataclass
class SubsetRank:
    s_prime: tuple[int, ...]
    rank: int
    full: bool
    margin: float  # smallest kept singular value over the largest
    draws_used: int


@dataclass
class ComponentReport:
    component: int
    witness_phases: np.ndarray
    per_s_prime: list[SubsetRank] = field(default_factory=list)


@dataclass
class TransversalityReport:
    support: tuple[int, ...]
    field: Field
    components: list[ComponentReport]
    verdict: bool

    def to_json_dict(self) -> dict:
        return {
            "S": list(self.support),
            "field": self.field.value,
            "components": [
                {
                    "component": c.component,
                    "witness_phases": [float(t) for t in c.witness_phases],
                    "per_Sprime": [
                        {"Sprime": list(r.s_prime), "rank": r.rank, "full": r.full,
                         "margin": r.margin, "draws": r.draws_used}
                        for r in c.per_s_prime
                    ],
                }
                for c in self.components
            ],
            "verdict": self.verdict,
        }


def _rank_with_margin(m: np.ndarray, target: int, tol: float = 1e-9) -> tuple[int, float]:
    sv = np.linalg.svd(m, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0, 0.0
    rank = int(np.sum(sv > tol * sv[0]))
    margin = float(sv[min(target, len(sv)) - 1] / sv[0])
    return rank, margin


def check_transversality(
    s: SupportSet,
    field_: Field,
    seed: int,
    draws_per_component: int = 3,
) -> TransversalityReport:
    """Test rank(A_{S,S'}(g)) = 2K for every K-subset S' and every component.

    One full-rank witness per (S', component) suffices; up to
    draws_per_component fresh draws guard against unlucky draws near the
    measure-zero failure set.  Requires 2K <= N.
    """
    group = s.group
    n, k = group.order, s.K
    if 2 * k > n:
        raise ValueError(f"2K = {2*k} exceeds N = {n}; full rank is impossible")
    verdict = True
    components = []
    for comp in range(num_components(n, field_)):
        primary = random_torus_element(n, field_, comp, substream(seed, comp, 0))
        report = ComponentReport(comp, primary.phases)
        for s_idx in itertools.combinations(range(n), k):
            sp = SupportSet.from_indices(group, s_idx)
            best_rank, best_margin, used = -1, 0.0, 0
            for draw in range(draws_per_component):
                g = primary if draw == 0 else random_torus_element(
                    n, field_, comp, substream(seed, comp, 1 + draw)
                )
                rank, margin = _rank_with_margin(transversality_matrix(s, sp, g), 2 * k)
                used = draw + 1
                if rank > best_rank:
                    best_rank, best_margin = rank, margin
                if rank == 2 * k:
                    break
            full = best_rank == 2 * k
            verdict = verdict and full
            report.per_s_prime.append(SubsetRank(s_idx, best_rank, full, best_margin, used))
        components.append(report)
    return TransversalityReport(tuple(i for (i,) in s.elements), field_, components, verdict)


# --- autocorrelation Jacobians on a support subspace ----------------------

def _class_reps(group: AbelianGroup) -> list[tuple[int, ...]]:
    return [c.representative for c in group.reflection_classes]


def restricted_autocorrelation(x: Signal) -> np.ndarray:
    """Autocorrelation values at one representative lag per reflection class.

    Real signals give a real vector; complex signals give a real vector
    stacking Re over all classes then Im over the non-self-paired classes.
    """
    a = periodic_autocorrelation(x, method="direct").values
    g = x.group
    reps = _class_reps(g)
    vals = np.array([a[g.index_of(r)] for r in reps])
    if x.field is Field.REAL:
        return vals.real
    ims = [vals[i].imag for i, r in enumerate(reps) if g.negate(r) != r]
    return np.concatenate([vals.real, np.array(ims)])


def autocorrelation_jacobian(s: SupportSet, x: Signal) -> np.ndarray:
    """Jacobian of the class-restricted autocorrelation w.r.t. the S-coordinates.

    Real field: rows are the reflection classes, columns the K support
    coordinates, entries x[m + l] + x[m - l] at representative lag l.  Complex
    field: real parametrization with 2K columns (Re then Im per coordinate)
    and the row layout of restricted_autocorrelation.
    """
    g = s.group
    if not set(x.support(0.0).elements) <= set(s.elements):
        raise ValueError("x is not supported inside S")
    reps = _class_reps(g)
    xv = x.values
    if x.field is Field.REAL:
        jac = np.zeros((len(reps), s.K))
        for r_i, lag in enumerate(reps):
            for c_i, m in enumerate(s.elements):
                jac[r_i, c_i] = xv[g.index_of(g.add(m, lag))] + xv[g.index_of(g.sub(m, lag))]
        return jac
    rows_c = np.zeros((len(reps), 2 * s.K), dtype=np.complex128)
    for r_i, lag in enumerate(reps):
        for c_i, m in enumerate(s.elements):
            d_re = np.conj(xv[g.index_of(g.add(m, lag))]) + xv[g.index_of(g.sub(m, lag))]
            d_im = 1j * np.conj(xv[g.index_of(g.add(m, lag))]) - 1j * xv[g.index_of(g.sub(m, lag))]
            rows_c[r_i, c_i] = d_re
            rows_c[r_i, s.K + c_i] = d_im
    im_rows = [rows_c[i].imag for i, r in enumerate(reps) if g.negate(r) != r]
    return np.concatenate([rows_c.real, np.array(im_rows).reshape(-1, 2 * s.K)])


def local_uniqueness_check(s: SupportSet, field_: Field, trials: int, seed: int) -> bool:
    """Local injectivity of the restricted autocorrelation modulo the stabilizer.

    Real field: requires rank K at every sampled point.  Complex field: the
    global S^1 phase always contributes one null direction, so corank exactly
    1 is required.  Returns False immediately when |S-S| < K (dimension count).
    """
    k = s.K
    if difference_set(s).cardinality < k:
        return False
    nparams = k if field_ is Field.REAL else 2 * k
    expected = nparams if field_ is Field.REAL else nparams - 1
    for t in range(trials):
        rng = substream(seed, t)
        x = _random_supported_signal(s, field_, rng)
        if numerical_rank(autocorrelation_jacobian(s, x)) != expected:
            return False
    return True


def _random_supported_signal(s: SupportSet, field_: Field, rng: np.random.Generator) -> Signal:
    vals = np.zeros(s.group.order, dtype=field_.dtype)
    idx = list(s.indices())
    if field_ is Field.REAL:
        vals[idx] = rng.standard_normal(s.K)
    else:
        vals[idx] = rng.standard_normal(s.K) + 1j * rng.standard_normal(s.K)
    return Signal(s.group, field_, vals)


# --- multi-start fiber search ---------------------------------------------

class FiberVerdict(enum.Enum):
    ONLY_INTRINSIC = "OnlyIntrinsic"
    EXTRA_SOLUTION_FOUND = "ExtraSolutionFound"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class FiberSolution:
    x_prime: Signal
    residual: float
    classification: str  # "intrinsic" | "extra"
    witness: SymmetryElement | None
    hits: int
    gn_iterations: int


@dataclass
class FiberSearchReport:
    support: SupportSet
    support_prime: SupportSet
    x: Signal
    solutions: list[FiberSolution]
    verdict: FiberVerdict
    starts: int
    converged_starts: int

    @property
    def extra_solutions(self) -> list[FiberSolution]:
        return [s for s in self.solutions if s.classification == "extra"]

    def to_json_dict(self) -> dict:
        return {
            "S": self.support.to_index_list(),
            "Sprime": self.support_prime.to_index_list(),
            "x": self.x.to_json_dict(),
            "solutions": [
                {
                    "xprime": s.x_prime.to_json_dict(),
                    "residual": s.residual,
                    "class": s.classification,
                    "witness": s.witness.describe() if s.witness else None,
                    "hits": s.hits,
                    "gn_iterations": s.gn_iterations,
                }
                for s in self.solutions
            ],
            "verdict": self.verdict.value,
            "starts": self.starts,
            "converged_starts": self.converged_starts,
        }


def _embed(s: SupportSet, params: np.ndarray, field_: Field) -> Signal:
    vals = np.zeros(s.group.order, dtype=field_.dtype)
    idx = list(s.indices())
    if field_ is Field.REAL:
        vals[idx] = params
    else:
        k = s.K
        vals[idx] = params[:k] + 1j * params[k:]
    return Signal(s.group, field_, vals)


class _RestrictedMap:
    """Pair-table evaluator of the class-restricted autocorrelation on L_S.

    Precomputes, per reflection-class lag l, the index pairs (p, q) of support
    coordinates with elem_q = elem_p + l; values and Jacobians then reduce to
    segment sums.  Agrees with restricted_autocorrelation /
    autocorrelation_jacobian (unit-tested) but is ~100x faster inside the
    Gauss-Newton loop.
    """

    def __init__(self, s: SupportSet, field_: Field):
        g = s.group
        self.s = s
        self.field = field_
        self.k = s.K
        reps = _class_reps(g)
        pos = {a: i for i, a in enumerate(s.elements)}
        rows, ps, qs = [], [], []
        for r_i, lag in enumerate(reps):
            for a in s.elements:
                b = g.add(a, lag)
                if b in pos:
                    rows.append(r_i)
                    ps.append(pos[a])
                    qs.append(pos[b])
        self.rows = np.array(rows, dtype=np.intp)
        self.ps = np.array(ps, dtype=np.intp)
        self.qs = np.array(qs, dtype=np.intp)
        self.n_classes = len(reps)
        self.self_paired = np.array([g.negate(r) == r for r in reps])

    def value(self, params: np.ndarray) -> np.ndarray:
        if self.field is Field.REAL:
            prods = params[self.ps] * params[self.qs]
            return np.bincount(self.rows, weights=prods, minlength=self.n_classes)
        x = params[: self.k] + 1j * params[self.k:]
        prods = x[self.ps] * np.conj(x[self.qs])
        a = (np.bincount(self.rows, weights=prods.real, minlength=self.n_classes)
             + 1j * np.bincount(self.rows, weights=prods.imag, minlength=self.n_classes))
        return np.concatenate([a.real, a.imag[~self.self_paired]])

    def jacobian(self, params: np.ndarray) -> np.ndarray:
        if self.field is Field.REAL:
            jac = np.zeros((self.n_classes, self.k))
            np.add.at(jac, (self.rows, self.ps), params[self.qs])
            np.add.at(jac, (self.rows, self.qs), params[self.ps])
            return jac
        x = params[: self.k] + 1j * params[self.k:]
        jc = np.zeros((self.n_classes, 2 * self.k), dtype=np.complex128)
        np.add.at(jc, (self.rows, self.ps), np.conj(x[self.qs]))
        np.add.at(jc, (self.rows, self.qs), x[self.ps])
        np.add.at(jc, (self.rows, self.k + self.ps), 1j * np.conj(x[self.qs]))
        np.add.at(jc, (self.rows, self.k + self.qs), -1j * x[self.ps])
        return np.concatenate([jc.real, jc.imag[~self.self_paired]])


def _gauss_newton(rmap: _RestrictedMap, target: np.ndarray, start: np.ndarray,
                  scale: float, tol: float, max_iter: int = 200) -> tuple[np.ndarray, float, bool, int]:
    """Damped Gauss-Newton on ||restricted_a(x') - target||; returns params."""
    params = start.copy()
    r = rmap.value(params) - target
    cost = float(r @ r)
    for it in range(1, max_iter + 1):
        rel = math.sqrt(cost) / scale
        if rel < tol:
            return params, rel, True, it - 1
        jac = rmap.jacobian(params)
        delta, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        alpha = 1.0
        for _ in range(40):
            trial = params + alpha * delta
            rt = rmap.value(trial) - target
            ct = float(rt @ rt)
            if ct < cost:
                break
            alpha *= 0.5
        else:
            return params, math.sqrt(cost) / scale, False, it
        if np.linalg.norm(alpha * delta) < 1e-12:
            params, r, cost = trial, rt, ct
            rel = math.sqrt(cost) / scale
            return params, rel, rel < tol, it
        params, r, cost = trial, rt, ct
    rel = math.sqrt(cost) / scale
    return params, rel, rel < tol, max_iter


def intrinsic_match(x: Signal, x_prime: Signal, tol: float = 1e-8) -> SymmetryElement | None:
    """Witness g with g.x = x_prime (to tol, scaled by ||x||), or None."""
    scale = max(1.0, x.norm())
    best: tuple[float, SymmetryElement] | None = None
    for g in dihedral_elements(x.group):
        moved = apply(g, x).values
        if x.field is Field.REAL:
            for sign in (1.0, -1.0):
                d = float(np.linalg.norm(sign * moved - x_prime.values))
                if best is None or d < best[0]:
                    best = (d, SymmetryElement(sign, g.shift, g.reflect))
        else:
            inner = complex(np.vdot(moved, x_prime.values))
            phase = 1.0 if inner == 0 else cmath.exp(1j * cmath.phase(inner))
            d = float(np.linalg.norm(phase * moved - x_prime.values))
            if best is None or d < best[0]:
                best = (d, SymmetryElement(phase, g.shift, g.reflect))
    if best is not None and best[0] <= tol * scale:
        return best[1]
    return None


def fiber_search(
    s: SupportSet,
    s_prime: SupportSet,
    x: Signal,
    starts: int,
    seed: int,
    tol: float = 1e-10,
) -> FiberSearchReport:
    """Census of {x' in L_{S'} : a(x') = a(x)} by multi-start Gauss-Newton.

    Requires difference_set(S) = difference_set(S') (otherwise the supports
    are distinguishable outright).  Solutions are deduplicated within 1e-6,
    re-verified against the direct-sum autocorrelation, and classified as
    intrinsic (some symmetry maps x onto them) or extra.
    """
    if difference_set(s) != difference_set(s_prime):
        raise ValueError("fiber search requires equal difference sets")
    if not set(x.support(0.0).elements) <= set(s.elements):
        raise ValueError("x is not supported inside S")
    field_ = x.field
    target = restricted_autocorrelation(x)
    scale = float(np.linalg.norm(target))
    nparams = s_prime.K if field_ is Field.REAL else 2 * s_prime.K
    rmap = _RestrictedMap(s_prime, field_)
    clusters: list[FiberSolution] = []
    converged = 0
    for start_i in range(starts):
        rng = substream(seed, start_i)
        start = rng.standard_normal(nparams)
        params, rel, ok, gn_iters = _gauss_newton(rmap, target, start, scale, tol)
        if not ok:
            continue
        converged += 1
        cand = _embed(s_prime, params, field_)
        matched = False
        for c in clusters:
            if np.linalg.norm(cand.values - c.x_prime.values) < 1e-6:
                c.hits += 1
                matched = True
                break
        if matched:
            continue
        a_ref = periodic_autocorrelation(cand, method="direct").values
        a_x = periodic_autocorrelation(x, method="direct").values
        residual = float(np.linalg.norm(a_ref - a_x) / np.linalg.norm(a_x))
        if residual >= tol:
            converged -= 1
            continue
        witness = intrinsic_match(x, cand)
        clusters.append(
            FiberSolution(
                cand, residual,
                "intrinsic" if witness is not None else "extra",
                witness, 1, gn_iters,
            )
        )
    if any(c.classification == "extra" for c in clusters):
        verdict = FiberVerdict.EXTRA_SOLUTION_FOUND
    elif converged == starts and clusters:
        verdict = FiberVerdict.ONLY_INTRINSIC
    else:
        verdict = FiberVerdict.INCONCLUSIVE
    return FiberSearchReport(s, s_prime, x, clusters, verdict, starts, converged)


# --- sweep over support-class pairs ----------------------------------------

@dataclass
class SweepRow:
    s: SupportSet
    s_prime: SupportSet
    diffset_size: int
    informational: bool  # |S-S| = K rows are outside the conjecture hypothesis
    verdict: FiberVerdict
    n_solutions: int
    n_extra: int
    n_signals: int = 1


@dataclass
class SweepResult:
    group: AbelianGroup
    K: int
    starts: int
    seed: int
    rows: list[SweepRow] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "moduli": list(self.group.moduli),
            "K": self.K,
            "starts": self.starts,
            "seed": self.seed,
            "rows": [
                {
                    "S": r.s.to_index_list(),
                    "Sprime": r.s_prime.to_index_list(),
                    "diffset_size": r.diffset_size,
                    "informational": r.informational,
                    "verdict": r.verdict.value,
                    "solutions": r.n_solutions,
                    "extra": r.n_extra,
                    "signals": r.n_signals,
                }
                for r in self.rows
            ],
        }


def support_recovery_sweep(
    group: AbelianGroup,
    k: int,
    starts: int = 200,
    seed: int = 0,
    field_: Field = Field.REAL,
    include_informational: bool = True,
    signals_per_pair: int = 3,
) -> SweepResult:
    """Fiber-search every unordered pair of non-equivalent support classes
    sharing a difference set.

    Pairs with |S-S| > K carry the recovery conjecture's hypothesis; pairs
    with |S-S| = K are reported as informational.  Each pair is probed with
    signals_per_pair independent generic signals (over the reals, whether the
    fiber over x is populated can depend on the region x falls in, so a single
    draw under-reports extra solutions).  A pair's verdict aggregates the
    draws: any extra solution wins, otherwise OnlyIntrinsic only if every draw
    concluded OnlyIntrinsic.
    """
    from .symmetry import enumerate_support_classes

    classes = enumerate_support_classes(group, k)
    by_diffset: dict = {}
    for c in classes:
        by_diffset.setdefault(difference_set(c), []).append(c)
    result = SweepResult(group, k, starts, seed)
    pair_idx = 0
    for ds, members in sorted(by_diffset.items(), key=lambda kv: kv[0].representatives()):
        size = ds.cardinality
        if size < k:
            continue
        informational = size == k
        if informational and not include_informational:
            continue
        for s_a, s_b in itertools.combinations(members, 2):
            verdicts = []
            n_solutions = 0
            n_extra = 0
            for draw in range(signals_per_pair):
                x = _random_supported_signal(
                    s_a, field_, substream(seed, 1000 + pair_idx, draw)
                )
                report = fiber_search(s_a, s_b, x, starts,
                                      seed * 100003 + 17 * pair_idx + draw)
                verdicts.append(report.verdict)
                n_solutions += len(report.solutions)
                n_extra += len(report.extra_solutions)
            if FiberVerdict.EXTRA_SOLUTION_FOUND in verdicts:
                verdict = FiberVerdict.EXTRA_SOLUTION_FOUND
            elif all(v is FiberVerdict.ONLY_INTRINSIC for v in verdicts):
                verdict = FiberVerdict.ONLY_INTRINSIC
            else:
                verdict = FiberVerdict.INCONCLUSIVE
            result.rows.append(
                SweepRow(s_a, s_b, size, informational, verdict,
                         n_solutions, n_extra, signals_per_pair)
            )
            pair_idx += 1
    return result
