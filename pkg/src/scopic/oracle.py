"""Brute-force verification: the criteria must never fire on restricted mixtures.

Three independent audits back the certification machinery:

* ``fuzz_restricted_mixtures`` builds random mixtures of pure states whose
  position support has diameter below a cap S and checks that none of the
  implemented inequalities fires at that S. Any firing would be a soundness
  bug in the criteria, never an expected outcome.

* ``appendix_a_decompose`` realizes the constructive equivalence between a
  vanishing off-diagonal element <x_i|rho|x_j> and a two-term mixture whose
  parts assign zero probability to x_j and x_i respectively, via the
  canonical purification (eigendecomposition) and an ancilla partial trace.

* ``appendix_b_audit`` checks concavity of the average conditional variance
  under mixing of joint records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .criteria import theorem1_product, theorem1_sum
from .errors import (
    CoherencePresentError,
    DegenerateInputError,
    SoundnessViolationError,
)
from .gridspace import (
    DEFAULT_HALF_SPAN,
    DEFAULT_POINTS,
    GridWavefunction,
    momentum_law,
    position_law,
)
from .stats import GridLaw, JointSamples, bin_stats, conditional_inference_detail

__all__ = [
    "DensityMatrix",
    "offdiagonal_coherence",
    "appendix_a_decompose",
    "Decomposition",
    "random_restricted_wavefunction",
    "random_zeroed_density",
    "RestrictedMixture",
    "random_restricted_mixture",
    "fuzz_restricted_mixtures",
    "FuzzReport",
    "appendix_b_audit",
    "AppendixBReport",
]


# ---------------------------------------------------------------------------
# Density matrices in a discrete x-basis
# ---------------------------------------------------------------------------


class DensityMatrix:
    """Hermitian, positive, unit-trace matrix in a labeled x-basis."""

    def __init__(self, matrix, labels=None):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DegenerateInputError("density matrix must be square")
        if np.abs(m - m.conj().T).max() > 1e-12:
            raise DegenerateInputError("density matrix must be Hermitian within 1e-12")
        eigs = np.linalg.eigvalsh(m)
        if eigs.min() < -1e-10:
            raise DegenerateInputError(
                f"density matrix not PSD: min eigenvalue {eigs.min():.3e}"
            )
        if abs(np.trace(m).real - 1.0) > 1e-12:
            raise DegenerateInputError("density matrix trace must be 1 within 1e-12")
        self.matrix = m
        self.labels = (
            np.arange(m.shape[0], dtype=float) if labels is None else np.asarray(labels, float)
        )
        if self.labels.size != m.shape[0]:
            raise DegenerateInputError("label count must match dimension")

    @property
    def d(self) -> int:
        return self.matrix.shape[0]


def offdiagonal_coherence(rho: DensityMatrix, i: int, j: int, tol: float = 1e-10) -> bool:
    """True iff the element <x_i|rho|x_j> is nonzero beyond ``tol``."""
    d = rho.d
    if not (0 <= i < d and 0 <= j < d):
        raise DegenerateInputError("index out of range")
    if i == j:
        raise DegenerateInputError("coherence is defined between distinct outcomes")
    return bool(abs(rho.matrix[i, j]) > tol)


@dataclass(frozen=True)
class Decomposition:
    w1: float
    rho1: DensityMatrix | None
    w2: float
    rho2: DensityMatrix | None


def appendix_a_decompose(rho: DensityMatrix, i: int, j: int) -> Decomposition:
    """Split rho with rho_ij = 0 into w1*rho1 + w2*rho2 with
    <x_j|rho1|x_j> = 0 and <x_i|rho2|x_i> = 0.

    Construction: purify rho through its eigendecomposition, collect the
    ancilla vector attached to row i, complete it to an orthonormal ancilla
    basis (the vector attached to row j is orthogonal to it because
    rho_ij = 0), and partial-trace term by term. The first term is the pure
    state built from column i of rho; the remainder is automatically
    positive. Degenerate weights collapse to (0, None, 1, rho) or
    (1, rho, 0, None).
    """
    d = rho.d
    if not (0 <= i < d and 0 <= j < d) or i == j:
        raise DegenerateInputError("need two distinct in-range indices")
    if abs(rho.matrix[i, j]) > 1e-10:
        raise CoherencePresentError(
            f"<x_{i}|rho|x_{j}> = {rho.matrix[i, j]:.3e} is nonzero: "
            "no such decomposition exists"
        )

    eta, vecs = np.linalg.eigh(rho.matrix)
    eta = np.clip(eta, 0.0, None)
    m_fac = vecs * np.sqrt(eta)[None, :]  # purification amplitudes: rho = M M^dagger

    t1 = m_fac[i, :].copy()  # ancilla vector attached to |x_i>
    t2 = m_fac[j, :].copy()  # ... attached to |x_j>; <t1|t2> = conj(rho_ij) ~ 0
    w1_row = float(np.vdot(t1, t1).real)
    if w1_row <= 1e-14:
        return Decomposition(0.0, None, 1.0, rho)

    # Orthonormal ancilla basis led by t1 (and t2, already orthogonal to it).
    seed_cols = [t1, t2] if float(np.vdot(t2, t2).real) > 1e-14 else [t1]
    basis, _ = np.linalg.qr(np.column_stack(seed_cols + [np.eye(d, dtype=complex)]))

    # Partial trace: each ancilla basis vector b contributes the pure piece
    # v v^dagger with v = M conj(b).
    v1 = m_fac @ basis[:, 0].conj()
    w1 = float(np.vdot(v1, v1).real)
    rho1_mat = np.outer(v1, v1.conj()) / w1

    rest = np.zeros((d, d), dtype=complex)
    for k in range(1, basis.shape[1]):
        v = m_fac @ basis[:, k].conj()
        rest += np.outer(v, v.conj())
    # The weights are exact complements; tr(rest) can drift by the clipped
    # eigenvalue mass (~1e-12), which rho2's normalization absorbs.
    w2 = 1.0 - w1
    if w2 <= 1e-12 or float(np.trace(rest).real) <= 1e-14:
        return Decomposition(1.0, DensityMatrix(_hermitize(rho1_mat), rho.labels), 0.0, None)

    rho1 = DensityMatrix(_hermitize(rho1_mat), rho.labels)
    rho2 = DensityMatrix(_hermitize(rest / w2), rho.labels)
    return Decomposition(w1, rho1, w2, rho2)


def _hermitize(m: np.ndarray) -> np.ndarray:
    out = 0.5 * (m + m.conj().T)
    # scrub rounding residue so the DensityMatrix validators see clean input
    np.fill_diagonal(out, np.clip(out.diagonal().real, 0.0, None))
    return out / np.trace(out).real


def random_zeroed_density(
    rng: np.random.Generator,
    d: int = 6,
    rank: int = 3,
    i: int = 0,
    j: int = 1,
) -> DensityMatrix:
    """Random rank-``rank`` density matrix with the (i, j) element forced to zero.

    Zeroing an off-diagonal entry can break positivity, so the fixture
    alternates zeroing with an eigenvalue clip and renormalization until both
    hold to 1e-12 jointly.
    """
    a = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = a @ a.conj().T
    m /= np.trace(m).real
    for _ in range(64):
        m[i, j] = 0.0
        m[j, i] = 0.0
        m = 0.5 * (m + m.conj().T)
        eigs, vecs = np.linalg.eigh(m)
        if eigs.min() >= -1e-12:
            m /= np.trace(m).real
            m[i, j] = 0.0
            m[j, i] = 0.0
            return DensityMatrix(m)
        m = (vecs * np.clip(eigs, 0.0, None)) @ vecs.conj().T
        m /= np.trace(m).real
    raise DegenerateInputError("PSD repair did not converge")


# ---------------------------------------------------------------------------
# Restricted-support fuzzing
# ---------------------------------------------------------------------------


def random_restricted_wavefunction(
    rng: np.random.Generator,
    s_cap: float,
    half_span: float = DEFAULT_HALF_SPAN,
    points: int = DEFAULT_POINTS,
) -> GridWavefunction:
    """Random smooth pure state whose x-support diameter is strictly below s_cap.

    A low-order random trigonometric series under a sin^2 window (zero value
    and slope at the support edges, so the momentum content decays fast and
    does not alias on the default grid).
    """
    if s_cap <= 0.0:
        raise DegenerateInputError("s_cap must be positive")
    dx = 2.0 * half_span / points
    x = -half_span + dx * np.arange(points)

    diameter = s_cap * (0.35 + 0.6 * rng.random())
    c_max = max(half_span - diameter / 2.0 - 1.0, 0.0)
    center = rng.uniform(-min(c_max, 6.0), min(c_max, 6.0))
    lo = center - diameter / 2.0

    t = (x - lo) / diameter
    inside = (t > 0.0) & (t < 1.0)
    # narrow windows cannot carry high modes without momentum content
    # reaching the grid edge
    max_order = min(4, max(1, int(4.0 * diameter)))
    order = int(rng.integers(0, max_order + 1))
    modes = np.arange(order + 1)
    coeff = (rng.standard_normal((2, order + 1)) + 1j * rng.standard_normal((2, order + 1)))
    coeff /= (1.0 + modes) ** 2

    ti = t[inside]
    series = (
        coeff[0] @ np.cos(2.0 * math.pi * np.outer(modes, ti))
        + coeff[1] @ np.sin(2.0 * math.pi * np.outer(modes, ti))
    )
    psi = np.zeros(points, dtype=complex)
    # sin^4 window: value through third derivative vanish at the edges, so
    # the momentum law decays like p^-10 and cannot alias
    psi[inside] = np.sin(math.pi * ti) ** 4 * series
    if float(np.sum(np.abs(psi) ** 2)) * dx < 1e-12:
        return random_restricted_wavefunction(rng, s_cap, half_span, points)
    return GridWavefunction.from_amplitudes(-half_span, dx, psi)


@dataclass(frozen=True)
class RestrictedMixture:
    """Weighted pure states whose position supports all fit inside s_cap.

    Such a mixture satisfies both the binned-mixture hypothesis at S = s_cap
    (every component is entirely left of +s_cap/2 or right of -s_cap/2) and
    the restricted-superposition hypothesis, so no criterion may fire on it.
    """

    weights: tuple[float, ...]
    components: tuple[GridWavefunction, ...]
    s_cap: float

    def __post_init__(self):
        if len(self.weights) != len(self.components) or not self.components:
            raise DegenerateInputError("weights/components mismatch")
        if any(w < 0.0 for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-12:
            raise DegenerateInputError("mixture weights must be >= 0 and sum to 1")
        for psi in self.components:
            occupied = psi.x[np.abs(psi.psi) > 0.0]
            if occupied.size and float(occupied.max() - occupied.min()) >= self.s_cap:
                raise DegenerateInputError("component support diameter reaches s_cap")

    def position_law(self) -> GridLaw:
        pts, mix = None, None
        for w, psi in zip(self.weights, self.components):
            law = position_law(psi)
            pts = law.points if pts is None else pts
            mix = w * law.weights if mix is None else mix + w * law.weights
        return GridLaw(pts, mix)

    def momentum_law(self) -> GridLaw:
        pts, mix = None, None
        for w, psi in zip(self.weights, self.components):
            law = momentum_law(psi)
            pts = law.points if pts is None else pts
            mix = w * law.weights if mix is None else mix + w * law.weights
        return GridLaw(pts, mix)

    def component_momentum_variances(self) -> list[float]:
        return [momentum_law(psi).moments()[1] for psi in self.components]


def random_restricted_mixture(rng: np.random.Generator, s_cap: float) -> RestrictedMixture:
    k = int(rng.integers(1, 5))
    weights = rng.dirichlet(np.ones(k))
    components = tuple(random_restricted_wavefunction(rng, s_cap) for _ in range(k))
    return RestrictedMixture(tuple(float(w) for w in weights), components, s_cap)


@dataclass
class FuzzReport:
    """Outcome of a restricted-mixture soundness run (all margins should be >= 0)."""

    s_cap: float
    trials: int
    assertions: int = 0
    violations: list = field(default_factory=list)
    min_delta_p: float = math.inf
    delta_p_bound: float = 0.0
    worst_product_margin: float = math.inf   # min over trials of lhs - 1
    worst_sum_margin: float = math.inf       # min of lhs - (2 - p0*delta)
    worst_dominance_gap: float = math.inf    # min of var_p(mix) - sum w*var_p_i
    max_support_variance_ratio: float = 0.0  # max var_x_i / (s_cap^2/4), must stay < 1

    @property
    def sound(self) -> bool:
        return not self.violations


def fuzz_restricted_mixtures(
    s_cap: float,
    trials: int,
    seed: int,
    grid_tol: float = 1e-3,
    raise_on_violation: bool = False,
) -> FuzzReport:
    """Generate random restricted mixtures and audit every implemented bound.

    Per trial: components' support diameters stay below ``s_cap``, so the
    mixture satisfies the binned-mixture hypothesis at S = s_cap and the
    restricted-superposition hypothesis. Checks, per trial:

    1. Delta p(mixture) > 2/s_cap (within grid tolerance);
    2/3. the binned product and sum criteria at S = s_cap do not fire;
    4. var_p(mixture) >= sum_i w_i var_p_i within 1e-9 (exact identity);
    plus per-component support variance var_x < s_cap^2/4.
    """
    if trials < 1:
        raise DegenerateInputError("need at least one trial")
    report = FuzzReport(s_cap=s_cap, trials=trials)
    root = np.random.SeedSequence(seed)
    quarter_cap = s_cap * s_cap / 4.0
    dp_bound = 2.0 / s_cap
    report.delta_p_bound = dp_bound

    for trial, child in enumerate(root.spawn(trials)):
        rng = np.random.Generator(np.random.PCG64(child))
        mixture = random_restricted_mixture(rng, s_cap)
        for psi in mixture.components:
            ratio = position_law(psi).moments()[1] / quarter_cap
            report.max_support_variance_ratio = max(report.max_support_variance_ratio, ratio)
            report.assertions += 1
            if ratio >= 1.0:
                report.violations.append(
                    {"trial": trial, "check": "support-variance", "value": ratio}
                )

        x_law = mixture.position_law()
        p_law = mixture.momentum_law()
        comp_pvars = mixture.component_momentum_variances()
        weights = np.asarray(mixture.weights)
        var_p = p_law.moments()[1]
        delta_p = math.sqrt(var_p)
        report.min_delta_p = min(report.min_delta_p, delta_p)
        report.assertions += 1
        if delta_p <= dp_bound - grid_tol * dp_bound:
            report.violations.append(
                {"trial": trial, "check": "theorem4", "delta_p": delta_p}
            )

        b = bin_stats(x_law, s_cap)
        prod = theorem1_product(b, var_p)
        report.worst_product_margin = min(report.worst_product_margin, prod.lhs - prod.bound)
        report.assertions += 1
        if prod.lhs < prod.bound - 1e-6:
            report.violations.append(
                {"trial": trial, "check": "theorem1-product", "lhs": prod.lhs}
            )

        summ = theorem1_sum(b, var_p)
        report.worst_sum_margin = min(report.worst_sum_margin, summ.lhs - summ.bound)
        report.assertions += 1
        if summ.lhs < summ.bound - 1e-6:
            report.violations.append(
                {"trial": trial, "check": "theorem1-sum", "lhs": summ.lhs, "bound": summ.bound}
            )

        dominance = var_p - float(np.dot(weights, comp_pvars))
        report.worst_dominance_gap = min(report.worst_dominance_gap, dominance)
        report.assertions += 1
        if dominance < -1e-9:
            report.violations.append(
                {"trial": trial, "check": "mixture-dominance", "gap": dominance}
            )

    if raise_on_violation and report.violations:
        raise SoundnessViolationError(
            f"{len(report.violations)} soundness violations at s_cap={s_cap}"
        )
    return report


# ---------------------------------------------------------------------------
# Appendix-B concavity of the inference variance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AppendixBReport:
    civ_merged: float
    civ_left: float
    civ_right: float
    w_left: float
    gap: float          # civ_merged - (w*civ_left + (1-w)*civ_right)
    se: float
    satisfied: bool


def appendix_b_audit(
    joint_left: JointSamples,
    joint_right: JointSamples,
    w_left: float,
    bin_width: float | None = None,
    bootstrap: int = 100,
    seed: int = 0,
) -> AppendixBReport:
    """Check civ(merge) >= w*civ(L) + (1-w)*civ(R) on a shared partition.

    All three estimates share the merged-range bin edges (the inequality is
    a per-partition statement). The tolerance is 3 bootstrap standard errors
    of the gap; exact merges (w in {0, 1}) are compared at 1e-9.
    """
    if not 0.0 <= w_left <= 1.0:
        raise DegenerateInputError("w_left must lie in [0, 1]")
    merged = joint_left.merge(joint_right, w_left)
    if bin_width is None:
        spread = float(merged.pb.max() - merged.pb.min())
        bin_width = spread / 16.0 if spread > 0.0 else 1.0

    def civ_triple(jl: JointSamples, jr: JointSamples) -> tuple[float, float, float]:
        m = jl.merge(jr, w_left)
        detail = conditional_inference_detail(m, bin_width)
        edges = detail.bin_edges
        left = conditional_inference_detail(jl, bin_width, bin_edges=edges).value
        right = conditional_inference_detail(jr, bin_width, bin_edges=edges).value
        return detail.value, left, right

    civ_m, civ_l, civ_r = civ_triple(joint_left, joint_right)
    gap = civ_m - (w_left * civ_l + (1.0 - w_left) * civ_r)

    if w_left in (0.0, 1.0):
        return AppendixBReport(civ_m, civ_l, civ_r, w_left, gap, 0.0, gap >= -1e-9)

    rng = np.random.Generator(np.random.PCG64(seed))
    gaps = []
    for _ in range(bootstrap):
        il = rng.integers(0, joint_left.n, joint_left.n)
        ir = rng.integers(0, joint_right.n, joint_right.n)
        jl = JointSamples(joint_left.pa[il], joint_left.pb[il])
        jr = JointSamples(joint_right.pa[ir], joint_right.pb[ir])
        try:
            m, l, r = civ_triple(jl, jr)
        except Exception:
            continue  # starved replica; skip rather than bias
        gaps.append(m - (w_left * l + (1.0 - w_left) * r))
    se = float(np.std(gaps, ddof=1)) if len(gaps) > 1 else 0.0
    return AppendixBReport(civ_m, civ_l, civ_r, w_left, gap, se, gap >= -3.0 * se - 1e-9)
