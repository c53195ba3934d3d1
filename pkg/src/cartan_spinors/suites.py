"""Verification suites shared by the CLI and the acceptance tests.

Each suite returns a :class:`SuiteReport`, a list of named checks with a
measured value, a threshold and the comparison used.  All randomness goes
through one seeded ``numpy.random.Generator`` per suite so reports are
reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import poly, sparse_ops
from .bundle import (
    BundleSelector,
    context,
    coordinate_fields,
    curvature_array,
    equivariance_defect,
    involution_defect,
    leibniz_defect,
    metric_defect,
    mu,
    project_section,
    project_tangent,
    section_check,
    splitting_behavior,
    splitting_operator,
    tangent_frame,
)
from .clifford import (
    CARTAN,
    DIRAC,
    PAULI,
    build_algebra,
    build_rep,
    expected_span_dimension,
    anticommutator_defect,
    involution_alpha,
    monomial_indices,
    multiply,
    represent,
    span_dimension,
    volume_element,
)
from .dirac import (
    curvature_consistency_pointwise,
    dirac_apply,
    dirac_at_point,
    killing_field,
    killing_verify,
    lichnerowicz_array,
)
from .polyspinor import PolySpinorField, SpherePoint, basis_array, evaluate, sphere_norm
from .scalars import EXACT, FLOAT, GaussQ, check_mode, max_abs

SUITES = ("clifford", "bundle", "curvature", "lichnerowicz", "killing", "splitting")

# float thresholds; exact mode demands 0 for every identity
TOL_ALGEBRAIC = 1e-12
TOL_METRIC = 1e-11
TOL_CURVATURE = 1e-10
TOL_LICHNEROWICZ = 1e-9

LE, GE, GT = "<=", ">=", ">"


def _sig(v: float) -> float:
    """Round to 6 significant digits so serialized reports do not carry rounding noise."""
    v = float(v)
    return float(f"{v:.6e}") if v else 0.0


@dataclass
class Check:
    check_name: str
    n: int
    samples: int
    max_residual: float
    threshold: float
    relation: str = LE

    @property
    def passed(self) -> bool:
        r, t = self.max_residual, self.threshold
        if self.relation == LE:
            return r <= t
        if self.relation == GE:
            return r >= t
        return r > t

    def to_json(self) -> dict:
        return {
            "check_name": self.check_name,
            "n": self.n,
            "samples": self.samples,
            "max_residual": _sig(self.max_residual),
            "threshold": self.threshold,
            "relation": self.relation,
            "pass": self.passed,
        }


@dataclass
class SuiteReport:
    suite: str
    n: int
    mode: str
    seed: int
    checks: list[Check] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, *args, **kw) -> Check:
        c = Check(*args, **kw)
        self.checks.append(c)
        return c

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "n": self.n,
            "mode": self.mode,
            "seed": self.seed,
            "pass": self.passed,
            "checks": [c.to_json() for c in self.checks],
            "details": self.details,
        }


def _tol(mode: str, t: float) -> float:
    return 0.0 if mode == EXACT else t


# ---------------------------------------------------------------------------
# random data


def random_spinor(dim: int, rng: np.random.Generator, mode: str = FLOAT) -> np.ndarray:
    """Non-zero spinor; Gaussian integers in [-3, 3] for exact mode."""
    while True:
        if mode == EXACT:
            re = rng.integers(-3, 4, dim)
            im = rng.integers(-3, 4, dim)
            out = np.empty(dim, dtype=object)
            out[:] = [GaussQ(int(a), int(b)) for a, b in zip(re, im)]
            if any(bool(v) for v in out):
                return out
        else:
            out = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            return out / np.linalg.norm(out)


def random_field(n: int, degree: int, rng: np.random.Generator, mode: str = FLOAT) -> PolySpinorField:
    """Random combination of the canonical basis fields of degree <= ``degree``."""
    B = basis_array(n, degree, mode)
    w = random_spinor(B.shape[2], rng, mode)
    return PolySpinorField(n, np.tensordot(B, w, axes=([2], [0])))


# ---------------------------------------------------------------------------
# clifford


def suite_clifford(n: int, mode: str = FLOAT, samples: int = 20, seed: int = 0) -> SuiteReport:
    """Algebra relations, the involution and the representation isomorphisms for ``n`` generators."""
    rng = np.random.default_rng(seed)
    rep = SuiteReport("clifford", n, mode, seed)
    alg = build_algebra(n)
    gens = [alg.gen(i) for i in range(1, n + 1)]
    worst = 0
    for i, j in itertools.product(range(n), repeat=2):
        anti = multiply(gens[i], gens[j]) + multiply(gens[j], gens[i])
        target = alg.one() * (-2 if i == j else 0)
        diff = anti - target
        worst = max([worst] + [abs(complex(v)) for v in diff.coeffs.values()])
    rep.add("generator_relations", n, n * n, worst, 0.0)

    size = alg.dim
    exhaustive = n <= 6
    table = alg.sign_table
    if exhaustive:
        a, b, c = np.meshgrid(*(np.arange(size),) * 3, indexing="ij")
        a, b, c = a.ravel(), b.ravel(), c.ravel()
    else:
        a, b, c = (rng.integers(0, size, 50 * samples) for _ in range(3))
    left = table[a, b] * table[a ^ b, c]
    right = table[b, c] * table[a, b ^ c]
    rep.add("associativity", n, len(a), int(np.count_nonzero(left != right)), 0)

    masks = range(size)
    pairs = itertools.product(masks, repeat=2) if exhaustive else zip(rng.integers(0, size, samples), rng.integers(0, size, samples))
    bad = count = 0
    for p, q in pairs:
        x, y = alg.monomial(monomial_indices(int(p))), alg.monomial(monomial_indices(int(q)))
        bad += involution_alpha(multiply(x, y)) != multiply(involution_alpha(x), involution_alpha(y))
        count += 1
    rep.add("alpha_homomorphism", n, count, bad, 0)
    bad = sum(involution_alpha(involution_alpha(alg.monomial(monomial_indices(p)))) != alg.monomial(monomial_indices(p)) for p in masks)
    rep.add("alpha_involution", n, size, bad, 0)

    vol = alg.volume()
    if n % 2 == 1:
        d = involution_alpha(vol) + vol
        rep.add("alpha_volume_odd", n, 1, max([0.0] + [abs(complex(v)) for v in d.coeffs.values()]), 0.0)

    kinds = [DIRAC] if n % 2 == 0 else [PAULI, CARTAN]
    for kind in kinds:
        r = build_rep(n, kind)
        rep.add(f"anticommutator[{kind}]", n, n * n, anticommutator_defect(r), 0.0)
        worst = 0.0
        for _ in range(samples):
            p, q = (alg.monomial(monomial_indices(int(v))) for v in rng.integers(0, size, 2))
            lhs = represent(r, multiply(p, q), mode)
            rhs = represent(r, p, mode).dot(represent(r, q, mode))
            worst = max(worst, float(max_abs(lhs - rhs)))
        rep.add(f"homomorphism[{kind}]", n, samples, worst, 0.0)
        rep.add(f"span_dimension[{kind}]", n, size, abs(span_dimension(r) - expected_span_dimension(r)), 0)
        if n % 2 == 1:
            V = volume_element(r)
            comm = max(float(np.max(np.abs(V @ g - g @ V))) for g in r.gammas)
            rep.add(f"volume_central[{kind}]", n, n, comm, 0.0)
        if kind == CARTAN:
            rep.add("volume_splitting[cartan]", n, 1, _cartan_split_defect(r), _tol(FLOAT, TOL_ALGEBRAIC))
    return rep


def _cartan_split_defect(r) -> float:
    """Both volume eigenspaces have dimension dim/2 and are invariant under every gamma."""
    V = volume_element(r)
    evals = np.linalg.eigvals(V)
    c = evals[0]
    half = r.dim // 2
    worst = float(abs(np.sum(np.abs(evals - c) < 1e-9) - half))
    for ev in (c, -c):
        P = (np.eye(r.dim) + V / ev) / 2
        worst = max(worst, float(np.max(np.abs(P @ P - P))))
        for g in r.gammas:
            worst = max(worst, float(np.max(np.abs(P @ g @ P - g @ P))))
    return worst


# ---------------------------------------------------------------------------
# bundle


def suite_bundle(n: int, mode: str = FLOAT, samples: int = 100, seed: int = 0) -> SuiteReport:
    """Antipodal lifts (involution, equivariance) and the section projectors."""
    rng = np.random.default_rng(seed)
    rep = SuiteReport("bundle", n, mode, seed)
    ctx = context(n)
    inv = {1: 0.0, -1: 0.0}
    eq = {1: 0.0, -1: 0.0}
    sq = 0.0
    for _ in range(samples):
        x = SpherePoint.random(n, rng).x
        v = project_tangent(x, rng.standard_normal(n + 1))
        phi = random_spinor(ctx.dim, rng)
        for sign in (1, -1):
            inv[sign] = max(inv[sign], involution_defect(ctx, sign, x, phi))
            eq[sign] = max(eq[sign], equivariance_defect(ctx, sign, v, phi))
        sq = max(sq, float(np.max(np.abs(mu(ctx, v, mu(ctx, v, phi)) + (v.t @ v.t) * phi))))
    for sign, label in ((1, "+"), (-1, "-")):
        rep.add(f"lift_involution[{label}]", n, samples, inv[sign], TOL_ALGEBRAIC)
        rep.add(f"lift_equivariance[{label}]", n, samples, eq[sign], TOL_ALGEBRAIC)
    rep.add("clifford_square", n, samples, sq, TOL_ALGEBRAIC)

    trials = max(1, min(samples, 3))
    idem = total = 0.0
    for _ in range(trials):
        phi = random_field(n, 2, rng, mode)
        plus = project_section(BundleSelector.RP_PLUS, phi)
        minus = project_section(BundleSelector.RP_MINUS, phi)
        total = max(total, sphere_norm(plus + minus - phi))
        idem = max(idem, sphere_norm(project_section(BundleSelector.RP_PLUS, plus) - plus))
        idem = max(idem, sphere_norm(project_section(BundleSelector.RP_MINUS, minus) - minus))
        idem = max(idem, section_check(BundleSelector.RP_PLUS, plus), section_check(BundleSelector.RP_MINUS, minus))
    rep.add("projector_sum", n, trials, total, _tol(mode, TOL_ALGEBRAIC))
    rep.add("projector_idempotent", n, trials, idem, _tol(mode, TOL_ALGEBRAIC))
    return rep


# ---------------------------------------------------------------------------
# curvature and connection


def default_degree(mode: str) -> int:
    """Basis degree for the identity suites: 3 in float mode, 2 in exact mode (object arithmetic is slow)."""
    return 2 if mode == EXACT else 3


def suite_curvature(n: int, mode: str = FLOAT, samples: int = 20, seed: int = 0, degree: int | None = None) -> SuiteReport:
    """Curvature identity on a full field basis for every coordinate pair, plus Leibniz and metric rules."""
    rng = np.random.default_rng(seed)
    rep = SuiteReport("curvature", n, mode, seed)
    degree = default_degree(mode) if degree is None else degree
    B = basis_array(n, degree, mode)
    F = coordinate_fields(n, mode)
    worst = 0.0
    pairs = list(itertools.combinations(range(n + 1), 2))
    for i, j in pairs:
        if mode == FLOAT:
            worst = max(worst, sparse_ops.curvature_op(F[i], F[j], degree).max_abs_on(B))
        else:
            worst = max(worst, float(max_abs(curvature_array(F[i], F[j], B, n))))
    rep.add("curvature_identity", n, B.shape[2] * len(pairs), worst, _tol(mode, TOL_CURVATURE))
    rep.details["basis_size"] = int(B.shape[2])
    rep.details["degree"] = degree

    trials = max(1, min(samples, 3))
    lb = met = 0.0
    for _ in range(trials):
        i, j = (int(v) for v in rng.integers(0, n + 1, 2))
        phi = random_field(n, 2, rng, mode)
        psi = random_field(n, 2, rng, mode)
        lb = max(lb, leibniz_defect(F[i], F[j], phi))
        pts = np.array([SpherePoint.random(n, rng).x for _ in range(samples)])
        met = max(met, metric_defect(F[i].as_mode(FLOAT), phi.as_mode(FLOAT), psi.as_mode(FLOAT), pts))
    rep.add("leibniz", n, trials, lb, _tol(mode, TOL_CURVATURE))
    rep.add("metric_compatibility", n, trials * samples, met, TOL_METRIC)
    return rep


# ---------------------------------------------------------------------------
# lichnerowicz


def suite_lichnerowicz(n: int, mode: str = FLOAT, samples: int = 20, seed: int = 0, degree: int | None = None) -> SuiteReport:
    """``D^2 = Lap + n(n-1)/4`` on a full basis, and D against a pointwise frame oracle."""
    rng = np.random.default_rng(seed)
    rep = SuiteReport("lichnerowicz", n, mode, seed)
    degree = default_degree(mode) if degree is None else degree
    B = basis_array(n, degree, mode)
    if mode == FLOAT:
        worst = sparse_ops.lichnerowicz_op(n, degree).max_abs_on(B)
    else:
        worst = float(max_abs(lichnerowicz_array(B, n)))
    rep.add("lichnerowicz_identity", n, B.shape[2], worst, _tol(mode, TOL_LICHNEROWICZ))
    rep.details["basis_size"] = int(B.shape[2])
    rep.details["degree"] = degree
    ctx = context(n)
    phi = random_field(n, min(degree, 2), rng, FLOAT)
    Dphi = dirac_apply(ctx, phi)
    worst = 0.0
    for _ in range(samples):
        x = SpherePoint.random(n, rng).x
        worst = max(worst, float(np.max(np.abs(evaluate(Dphi, x) - dirac_at_point(ctx, phi, x)))))
    rep.add("dirac_vs_local_frame", n, samples, worst, TOL_CURVATURE)
    return rep


# ---------------------------------------------------------------------------
# killing spinors


def suite_killing(n: int, mode: str = FLOAT, samples: int = 20, seed: int = 0) -> SuiteReport:
    """The two Killing families, their bundles, their Dirac eigenvalues and the curvature test.

    The polynomial identities are cheap for degree-1 fields, so they are
    always checked in exact arithmetic with a Gaussian-integer ``phi0`` and
    must vanish identically; ``mode`` only labels the report.
    """
    rng = np.random.default_rng(seed)
    rep = SuiteReport("killing", n, mode, seed)
    ctx = context(n)
    phi0 = random_spinor(ctx.dim, rng, EXACT)
    tol = 0.0
    mode = EXACT
    reports = {}
    for sign, lam, bundle, label in ((-1, -0.5, "rp_plus", "minus"), (1, 0.5, "rp_minus", "plus")):
        phi = killing_field(ctx, phi0, sign, mode)
        r = killing_verify(ctx, phi, lam)
        reports[label] = r.to_json()
        rep.add(f"killing_residual[{label}]", n, n + 1, r.residual, tol)
        rep.add(f"section_membership[{label}->{bundle}]", n, 1, r.section_residual[bundle], tol)
        rep.add(f"dirac_eigenvalue[{label}]", n, 1, abs(r.dirac_eigenvalue - (-sign) * n / 2), tol)
        rep.add(f"dirac_eigen_residual[{label}]", n, 1, r.dirac_residual, tol)
    # a positive residual is all this needs, so floating point suffices
    wrong = killing_verify(ctx, killing_field(ctx, phi0, -1, FLOAT), 0.5)
    rep.add("wrong_number_rejected", n, 1, wrong.residual, 0.0, relation=GT)

    rep.details["killing_reports"] = reports
    rep.details["arithmetic"] = EXACT
    if n < 2:
        # S^1 has no tangent 2-planes, so the curvature gives no constraint on lambda
        rep.details["curvature_checks"] = "skipped for n = 1"
        return rep
    # every lambda other than +-1/2 must fail the curvature test with the full margin
    phi = killing_field(ctx, phi0, -1, mode).as_mode(FLOAT)
    pts = np.array([SpherePoint.random(n, rng).x for _ in range(samples)])
    lams = np.concatenate([[0.0, 1.0, -1.0, 0.25], rng.uniform(-2.0, 2.0, samples)])
    ratio = np.inf
    for lam in lams:
        factor = abs(2 * lam**2 - 0.5)
        if factor < 1e-6:
            continue
        defect, norm = curvature_consistency_pointwise(ctx, phi, float(lam), pts)
        ratio = min(ratio, defect / (factor * norm))
    rep.add("curvature_rejects_other_numbers", n, len(lams), float(ratio), 1 - 1e-12, relation=GE)
    ok = max(curvature_consistency_pointwise(ctx, phi, lam, pts)[0] for lam in (-0.5, 0.5))
    rep.add("curvature_accepts_half", n, samples, ok, TOL_ALGEBRAIC)
    return rep


# ---------------------------------------------------------------------------
# splitting


def suite_splitting(n: int, mode: str = FLOAT, samples: int = 20, seed: int = 0) -> SuiteReport:
    """Swap (even n) versus preserve (odd n) of the volume-form splitting under the lift."""
    rng = np.random.default_rng(seed)
    rep = SuiteReport("splitting", n, mode, seed)
    ctx = context(n)
    sb = splitting_behavior(ctx, samples, rng)
    rep.details["behavior"] = sb.to_json()
    rep.add("parity_contract_violations", n, samples, sb.violations, 0)
    k = (n - 1) // 2
    sq = comm = anti = 0.0
    for _ in range(samples):
        x = SpherePoint.random(n, rng).x
        f = splitting_operator(ctx, x).matrix
        target = np.eye(ctx.dim) * (1 if n % 2 == 0 else (-1) ** (k + 1))
        sq = max(sq, float(np.max(np.abs(f @ f - target))))
        gx = ctx.gamma(x)
        if n % 2 == 1:
            anti = max(anti, float(np.max(np.abs(f @ gx + gx @ f))))
            t = tangent_frame(x).T @ rng.standard_normal(n)
            gt = ctx.gamma(t)
            comm = max(comm, float(np.max(np.abs(f @ gt - gt @ f))))
    rep.add("f_square", n, samples, sq, TOL_ALGEBRAIC)
    if n % 2 == 1:
        rep.add("f_anticommutes_position", n, samples, anti, TOL_ALGEBRAIC)
        rep.add("f_commutes_tangent", n, samples, comm, TOL_ALGEBRAIC)
    return rep


_RUNNERS = {
    "clifford": suite_clifford,
    "bundle": suite_bundle,
    "curvature": suite_curvature,
    "lichnerowicz": suite_lichnerowicz,
    "killing": suite_killing,
    "splitting": suite_splitting,
}


def run_suite(name: str, n: int, mode: str = FLOAT, samples: int = 20, seed: int = 0) -> SuiteReport:
    check_mode(mode)
    if name not in _RUNNERS:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or 'all'")
    return _RUNNERS[name](n, mode=mode, samples=samples, seed=seed)


def run_suites(names, n: int, mode: str = FLOAT, samples: int = 20, seed: int = 0) -> list[SuiteReport]:
    names = list(SUITES) if "all" in names else list(names)
    return [run_suite(s, n, mode, samples, seed) for s in names]
