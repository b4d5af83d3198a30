"""Cross-validation suites.

Every suite pits an implementation against an independent oracle (cofactor
expansion, full enumeration, finite differences, brute-force lattice sums)
or against an identity that holds exactly. Suites return CheckResult rows;
nothing is asserted here so the harness can report all failures at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from . import moments
from .abelian import elements, make_group, subgroups
from .divergence import (
    Distribution,
    detect_subgroup,
    fourier,
    kl,
    pair_convolution,
    pinsker_gap,
    refinement_bound,
    uniformity_certificate,
)
from .errors import OutOfRange, ZeroMu
from .hypertree import boundary_matrix, hypertree_gram_det, kalai_check
from .laplace import (
    SimplexPoint,
    analytic_gradient,
    analytic_hessian,
    f_value,
    fd_gradient,
    fd_hessian,
    gaussian_riemann_sum,
    q_matrix,
)
from .linalg_exact import IntMatrix, det_exact, smith_normal_form
from .moments import (
    TypeVector,
    cauchy_binet_prob,
    exact_sur_moment,
    kl_form_contribution,
    moment_matrix,
    prob_kernel_vector,
    type_contribution,
)
from .seeds import derive_seed, make_rng
from .structured_ensemble import (
    exact_law,
    sample_subset,
    structured_gram_det,
)

DEFAULT_TRIALS = 2000


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str = ""


@dataclass
class DiagnosticsReport:
    results: list[CheckResult] = field(default_factory=list)

    @property
    def failures(self) -> list[CheckResult]:
        return [r for r in self.results if not r.passed]

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        lines = []
        for r in self.results:
            tag = "ok" if r.passed else "FAIL"
            detail = f"  ({r.detail})" if r.detail and not r.passed else ""
            lines.append(f"  [{tag}] {r.suite}: {r.name}{detail}")
        lines.append(
            f"diagnostics: {len(self.results) - len(self.failures)}/{len(self.results)} checks passed"
        )
        return "\n".join(lines)


def _random_int_matrix(rng, rows, cols, lo=-9, hi=9) -> IntMatrix:
    vals = rng.integers(lo, hi + 1, size=(rows, cols))
    return IntMatrix.from_rows([[int(v) for v in row] for row in vals])


def _cofactor_det(m: IntMatrix) -> int:
    if m.rows == 1:
        return m[0, 0]
    total = 0
    for j in range(m.cols):
        if m[0, j] == 0:
            continue
        minor = IntMatrix.from_rows(
            [
                [m[i, k] for k in range(m.cols) if k != j]
                for i in range(1, m.rows)
            ]
        )
        total += (-1) ** j * m[0, j] * _cofactor_det(minor)
    return total


# ---------------------------------------------------------------------------
# Suites


def suite_exact_det(seed: int, trials: int) -> list[CheckResult]:
    rng = make_rng(derive_seed(seed, 1))
    bad = 0
    rounds = max(50, trials // 20)
    for _ in range(rounds):
        k = int(rng.integers(1, 6))
        m = _random_int_matrix(rng, k, k)
        if det_exact(m) != _cofactor_det(m):
            bad += 1
    return [
        CheckResult(
            "exact-det",
            f"bareiss vs cofactor expansion on {rounds} random matrices",
            bad == 0,
            f"{bad} mismatches",
        )
    ]


def suite_snf(seed: int, trials: int) -> list[CheckResult]:
    rng = make_rng(derive_seed(seed, 2))
    rounds = max(50, trials // 10)
    recon = unimod = chain = detprod = True
    for _ in range(rounds):
        r = int(rng.integers(1, 7))
        c = int(rng.integers(1, 7))
        a = _random_int_matrix(rng, r, c)
        res = smith_normal_form(a)
        if res.U @ a @ res.V != res.S:
            recon = False
        if abs(det_exact(res.U)) != 1 or abs(det_exact(res.V)) != 1:
            unimod = False
        diag = [res.S[i, i] for i in range(min(r, c))]
        for i in range(len(diag) - 1):
            if diag[i + 1] and diag[i] == 0:
                chain = False
            if diag[i] and diag[i + 1] % diag[i] != 0:
                chain = False
        if any(d < 0 for d in diag):
            chain = False
        if r == c:
            d = det_exact(a)
            if d != 0 and abs(d) != math.prod(x for x in diag if x):
                detprod = False
    return [
        CheckResult("snf", f"U*A*V reconstruction on {rounds} matrices", recon),
        CheckResult("snf", "transforms unimodular", unimod),
        CheckResult("snf", "diagonal nonnegative divisibility chain", chain),
        CheckResult("snf", "square case: product of factors = |det|", detprod),
    ]


def suite_structured_law(seed: int, trials: int) -> list[CheckResult]:
    out = []
    for n in (2, 3, 4, 5):
        try:
            structured_gram_det(n)
            out.append(CheckResult("structured-law", f"gram determinant closed form n={n}", True))
        except ArithmeticError as exc:
            out.append(CheckResult("structured-law", f"gram determinant closed form n={n}", False, str(exc)))
    law = exact_law(2)
    total = sum(law.values())
    out.append(
        CheckResult(
            "structured-law",
            "exact law sums to 1 at n=2",
            total == Fraction(1),
            f"sum={total}",
        )
    )
    draws = max(2000, trials)
    counts: dict[tuple, int] = {}
    for r in range(draws):
        sub = sample_subset(2, derive_seed(seed, 3, r))
        counts[sub.triples] = counts.get(sub.triples, 0) + 1
    tv = 0.5 * sum(
        abs(counts.get(key, 0) / draws - float(p)) for key, p in law.items()
    )
    tv += 0.5 * sum(c / draws for key, c in counts.items() if key not in law)
    out.append(
        CheckResult(
            "structured-law",
            f"sampler matches enumerated law at n=2 ({draws} draws)",
            tv < 0.06,
            f"tv={tv:.4f}",
        )
    )
    return out


def suite_kernel_prob(seed: int, trials: int) -> list[CheckResult]:
    cases = [
        (make_group([2]), 2),
        (make_group([2]), 3),
        (make_group([2]), 4),
        (make_group([3]), 2),
        (make_group([3]), 3),
        (make_group([4]), 3),
        (make_group([5]), 3),
        (make_group([2, 2]), 3),
    ]
    exact_ok = True
    float_ok = True
    worst = 0.0
    detail = ""
    for group, n in cases:
        elems = elements(group)
        for q in product(range(group.order), repeat=n):
            vec = [elems[i] for i in q]
            lemma = prob_kernel_vector(group, vec, exact=True)
            oracle = cauchy_binet_prob(group, vec)
            if lemma != oracle:
                exact_ok = False
                detail = f"group={group} n={n} q={q}: {lemma} vs {oracle}"
            approx = prob_kernel_vector(group, vec, exact=False)
            err = abs(approx - float(oracle))
            worst = max(worst, err)
            if err > 1e-9 * max(1.0, float(oracle)):
                float_ok = False
    out = [
        CheckResult("kernel-prob", "closed form equals minor-expansion oracle (exact)", exact_ok, detail),
        CheckResult(
            "kernel-prob",
            "floating route matches exact route",
            float_ok,
            f"worst abs err {worst:.3e}",
        ),
    ]
    mom_ok = True
    mom_detail = ""
    for group, n in [(make_group([2]), 3), (make_group([3]), 3), (make_group([2]), 4)]:
        direct = Fraction(0)
        elems = elements(group)
        for q in product(range(group.order), repeat=n):
            vec = [elems[i] for i in q]
            if moments.type_of(group, vec).generates():
                direct += cauchy_binet_prob(group, vec)
        via_types = exact_sur_moment(group, n, exact=True)
        if direct != via_types:
            mom_ok = False
            mom_detail = f"group={group} n={n}: {direct} vs {via_types}"
    out.append(
        CheckResult(
            "kernel-prob",
            "surjection moment: type sum equals direct vector sum",
            mom_ok,
            mom_detail,
        )
    )
    return out


def suite_moment_identities(seed: int, trials: int) -> list[CheckResult]:
    rng = make_rng(derive_seed(seed, 4))
    groups = [make_group([5]), make_group([7]), make_group([2, 4])]
    kl_ok = psd_ok = bound_ok = True
    detail = ""
    rounds = max(100, trials // 10)
    for _ in range(rounds):
        group = groups[int(rng.integers(len(groups)))]
        n = int(rng.integers(group.order, 40))
        raw = rng.multinomial(n, np.full(group.order, 1.0 / group.order))
        tv = TypeVector(group, tuple(int(c) for c in raw))
        contrib = type_contribution(tv)
        try:
            alt = kl_form_contribution(tv)
        except ZeroMu:
            alt = None
        if alt is not None and contrib > 1e-300:
            rel = abs(alt - contrib) / contrib
            if rel > 1e-8:
                kl_ok = False
                detail = f"{tv.counts}: rel={rel:.2e}"
        mm = moment_matrix(tv)
        if mm.matrix.size:
            eigs = np.linalg.eigvalsh(mm.matrix)
            if eigs.min() < -1e-8 * max(1.0, abs(eigs).max()):
                psd_ok = False
        if contrib > moments.moment_upper_bound(tv) * (1 + 1e-9) + 1e-300:
            bound_ok = False
    out = [
        CheckResult("moment-identities", "divergence form equals direct contribution", kl_ok, detail),
        CheckResult("moment-identities", "moment matrix positive semidefinite", psd_ok),
        CheckResult("moment-identities", "envelope bound dominates contribution", bound_ok),
    ]
    g5 = make_group([5])
    ex = exact_sur_moment(g5, 10, exact=True)
    fl = exact_sur_moment(g5, 10, exact=False)
    rel = abs(fl - float(ex)) / float(ex)
    out.append(
        CheckResult(
            "moment-identities",
            "float scan matches rational sum (Z/5, n=10)",
            rel < 1e-9,
            f"rel={rel:.2e}",
        )
    )
    return out


def suite_divergence(seed: int, trials: int, group_factors=None) -> list[CheckResult]:
    rng = make_rng(derive_seed(seed, 5))
    if group_factors is not None:
        groups = [make_group(group_factors)]
    else:
        groups = [
            make_group([2]),
            make_group([4]),
            make_group([5]),
            make_group([2, 4]),
            make_group([25]),
            make_group([5, 5]),
        ]
    gibbs = pinsker = refine = four = conv_ok = True
    detail = ""
    for _ in range(max(200, trials)):
        group = groups[int(rng.integers(len(groups)))]
        k = group.order
        probs = rng.gamma(1.0, size=k)
        if rng.random() < 0.25:
            mask = rng.random(k) < 0.4
            if mask.all():
                mask[int(rng.integers(k))] = False
            probs = np.where(mask, 0.0, probs)
        if probs.sum() == 0:
            probs[0] = 1.0
        nu = Distribution(group, probs / probs.sum())
        other = rng.gamma(1.0, size=k)
        mu = Distribution(group, other / other.sum())
        d = kl(nu, mu)
        if d < -1e-12:
            gibbs = False
        if kl(nu, nu) != 0.0:
            gibbs = False
        l1, bound = pinsker_gap(nu, mu)
        if math.isfinite(bound) and l1 > bound + 1e-9:
            pinsker = False
            detail = f"l1={l1:.6f} bound={bound:.6f}"
        for sub in subgroups(group):
            rb = refinement_bound(nu, mu, sub.members)
            if math.isfinite(d) and rb > d + 1e-9:
                refine = False
        hat = fourier(nu)
        if abs(hat[0] - 1.0) > 1e-12 or np.abs(hat).max() > 1 + 1e-12:
            four = False
        conv = pair_convolution(nu)
        chat = fourier(conv)
        if np.abs(chat - np.conj(hat) ** 2).max() > 1e-10:
            conv_ok = False
        if abs(conv.probs.sum() - 1.0) > 1e-12 or conv.probs.min() < 0:
            conv_ok = False
    return [
        CheckResult("divergence", "divergence nonnegative, zero on identical pairs", gibbs),
        CheckResult("divergence", "total variation below divergence bound", pinsker, detail),
        CheckResult("divergence", "event refinement bound below full divergence", refine),
        CheckResult("divergence", "transform bounded, trivial character equals 1", four),
        CheckResult("divergence", "pair convolution transform is squared conjugate", conv_ok),
    ]


def suite_detection(seed: int, trials: int) -> list[CheckResult]:
    rng = make_rng(derive_seed(seed, 6))
    exact_ok = noisy_ok = cert_ok = guard_ok = True
    detail = ""
    for factors in ([2], [4], [5], [2, 2], [2, 4], [8], [5, 5]):
        group = make_group(factors)
        for sub in subgroups(group):
            nu = Distribution.uniform_on(group, sub.members)
            hit = detect_subgroup(nu)
            if set(hit.members) != set(sub.members):
                exact_ok = False
                detail = f"{group} sub order {len(sub.members)}"
            eps = 1e-3
            mixed = Distribution(
                group,
                (1 - eps) * nu.probs + eps * np.full(group.order, 1.0 / group.order),
            )
            hit2 = detect_subgroup(mixed)
            if set(hit2.members) != set(sub.members):
                noisy_ok = False
            if group.order % 3 != 0:
                cert = uniformity_certificate(nu)
                if set(cert.subgroup.members) != set(sub.members):
                    cert_ok = False
                if cert.sup_dist > 1e-9 or cert.kl_to_conv > 1e-9:
                    cert_ok = False
    try:
        uniformity_certificate(Distribution.uniform(make_group([3])))
        guard_ok = False
    except OutOfRange:
        pass
    return [
        CheckResult("detection", "uniform-on-subgroup recovered exactly", exact_ok, detail),
        CheckResult("detection", "recovery stable under 1e-3 mixture noise", noisy_ok),
        CheckResult("detection", "certificate clean on exact subgroup uniformity", cert_ok),
        CheckResult("detection", "orders divisible by 3 rejected", guard_ok),
    ]


def suite_laplace(seed: int, trials: int) -> list[CheckResult]:
    rng = make_rng(derive_seed(seed, 7))
    grad_ok = hess_ok = True
    worst_g = worst_h = 0.0
    groups = [make_group([2]), make_group([3]), make_group([5]), make_group([7]), make_group([2, 2])]
    rounds = max(20, trials // 100)
    for _ in range(rounds):
        group = groups[int(rng.integers(len(groups)))]
        raw = rng.gamma(4.0, size=group.order) + 0.5
        pt = SimplexPoint(group, tuple((raw / raw.sum())[1:]))
        ag, fg = analytic_gradient(pt), fd_gradient(pt)
        err = float(np.abs(ag - fg).max())
        worst_g = max(worst_g, err)
        if err > 1e-6:
            grad_ok = False
        ah, fh = analytic_hessian(pt), fd_hessian(pt)
        herr = float(np.abs(ah - fh).max() / max(1.0, np.abs(ah).max()))
        worst_h = max(worst_h, herr)
        if herr > 1e-4:
            hess_ok = False
    out = [
        CheckResult("laplace", f"gradient matches finite differences ({rounds} points)", grad_ok, f"worst {worst_g:.2e}"),
        CheckResult("laplace", "hessian matches finite differences", hess_ok, f"worst rel {worst_h:.2e}"),
    ]
    uni_ok = True
    for group in groups:
        g = group.order
        pt = SimplexPoint.uniform(group)
        if abs(f_value(pt)) > 1e-12:
            uni_ok = False
        if np.abs(analytic_gradient(pt)).max() > 1e-12:
            uni_ok = False
        q = q_matrix(g)
        expected = np.array(
            [[q[i, j] for j in range(g - 1)] for i in range(g - 1)], dtype=float
        )
        if np.abs(analytic_hessian(pt) - expected).max() > 1e-9:
            uni_ok = False
        if det_exact(q) != g**g:
            uni_ok = False
    out.append(CheckResult("laplace", "uniform point: f=0, grad=0, hessian=Q, det Q = g^g", uni_ok))
    return out


def _brute_riemann(order: int, n: int, radius: float) -> float:
    g = order
    dim = g - 1
    kmax = int(math.floor(radius * math.sqrt(n)))
    axis = np.arange(-kmax, kmax + 1)
    total = 0.0
    for ks in product(axis, repeat=dim):
        s = sum(ks)
        q = sum(k * k for k in ks) + s * s
        total += math.exp(-g * q / (2.0 * n))
    return total * g ** (g / 2.0) / (2.0 * math.pi * n) ** (dim / 2.0)


def suite_riemann(seed: int, trials: int) -> list[CheckResult]:
    out = []
    for order, n, radius in [(2, 400, 6.0), (3, 144, 6.0)]:
        fast = gaussian_riemann_sum(order, n, radius)
        slow = _brute_riemann(order, n, radius)
        rel = abs(fast - slow) / slow
        out.append(
            CheckResult(
                "riemann",
                f"factorized sum equals direct lattice sum (order {order})",
                rel < 1e-12,
                f"rel={rel:.2e}",
            )
        )
    val = gaussian_riemann_sum(2, 10**6, 10.0)
    out.append(
        CheckResult(
            "riemann",
            "order-2 sum approaches gaussian normalization",
            abs(val - 1.0) < 1e-3,
            f"value={val:.6f}",
        )
    )
    return out


def suite_hypertree(seed: int, trials: int) -> list[CheckResult]:
    out = []
    for n in range(3, 8):
        try:
            hypertree_gram_det(n)
            out.append(CheckResult("hypertree", f"gram determinant identity n={n}", True))
        except ArithmeticError as exc:
            out.append(CheckResult("hypertree", f"gram determinant identity n={n}", False, str(exc)))
    b3 = boundary_matrix(3)
    out.append(
        CheckResult(
            "hypertree",
            "smallest boundary matrix is the 1x1 unit",
            (b3.rows, b3.cols) == (1, 1) and abs(b3[0, 0]) == 1,
        )
    )
    for n in (4, 5):
        chk = kalai_check(n)
        out.append(
            CheckResult(
                "hypertree",
                f"squared-determinant total matches weighted count n={n}",
                chk.matches,
                f"total={chk.total} expected={chk.expected}",
            )
        )
    return out


SUITES = {
    "exact-det": suite_exact_det,
    "snf": suite_snf,
    "structured-law": suite_structured_law,
    "kernel-prob": suite_kernel_prob,
    "moment-identities": suite_moment_identities,
    "divergence": suite_divergence,
    "detection": suite_detection,
    "laplace": suite_laplace,
    "riemann": suite_riemann,
    "hypertree": suite_hypertree,
}


def run_diagnostics(
    suites: list[str] | None = None,
    seed: int = 0,
    trials: int = DEFAULT_TRIALS,
) -> DiagnosticsReport:
    names = list(SUITES) if suites is None else suites
    report = DiagnosticsReport()
    for name in names:
        if name not in SUITES:
            raise OutOfRange(f"unknown suite {name!r}; have {sorted(SUITES)}")
        report.results.extend(SUITES[name](seed, trials))
    return report
