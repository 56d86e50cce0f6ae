"""One test per acceptance criterion; each prints a single pass/fail line."""

import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from toric_dlocc import ed
from toric_dlocc.cc_model import (
    construct_cc_state,
    renyi_cc,
    renyi_derivative_cc,
    small_lambda_coeffs,
)
from toric_dlocc.convertibility import (
    DEFAULT_ALPHAS,
    RenyiSurface,
    alpha_c_profile,
    is_dlocc_region,
    sign_map,
)
from toric_dlocc.freefermion import (
    PauliString,
    nn_xx_correlator_thermo,
    pauli_string_expectation,
    pauli_string_expectation_thermo,
    solve_chain,
    pfaffian,
)
from toric_dlocc.gauge import subgroup_spec
from toric_dlocc.lattice import TorusLattice, classify_bipartition, random_bipartition, two_star_subsystem
from toric_dlocc.rowfield import (
    GaugeStateExpectation,
    plaquette_correlator,
    plaquette_rdm_diagonal,
    plaquette_renyi,
    purity_gauge_formula,
    renyi_n_gauge_formula,
    two_star_renyi2,
    two_star_spectrum,
)
from toric_dlocc.scan import ScanConfig, run_scan
from toric_dlocc.spectra import SUPPORT_THRESHOLD, renyi_from_spectrum
from toric_dlocc.validation import run_suite

ALPHAS_1 = (0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
CC_ALPHAS = (0.1, 0.5, 2.0, 5.0)
CC_LAMBDAS = (0.1, 0.3, 0.6)


def flat_value(lat, bip):
    spec = subgroup_spec(lat, bip)
    return math.log(spec.order_g / (spec.order_ga * spec.order_gb))


def twenty_bipartitions():
    lat = TorusLattice(2)
    rng = np.random.default_rng(2024)
    return lat, [random_bipartition(lat, rng) for _ in range(20)]


def test_criterion_1_flat_spectrum_baseline(verdict):
    worst = 0.0
    L2 = TorusLattice(2)
    for k in range(1, L2.num_edges):
        for edges in combinations(range(L2.num_edges), k):
            bip = classify_bipartition(L2, edges)
            f = flat_value(L2, bip)
            worst = max(worst, max(abs(renyi_cc(L2, bip, 0.0, a) - f) for a in ALPHAS_1))
    L3 = TorusLattice(3)
    rng = np.random.default_rng(1)
    toric = ed.GaugeState(L3, construct_cc_state(L3, 0.0))
    for _ in range(60):
        bip = random_bipartition(L3, rng)
        f = flat_value(L3, bip)
        sp = ed.entanglement_spectrum(toric, bip).values
        worst = max(worst, max(abs(renyi_cc(L3, bip, 0.0, a) - f) for a in ALPHAS_1))
        worst = max(worst, max(abs(renyi_from_spectrum(sp, a) - f) for a in ALPHAS_1))
    # two stars need L >= 4; on L = 3 they wrap around a full row
    L4 = TorusLattice(4)
    psi = ed.ground_state(ed.build_hamiltonian(ed.HamiltonianSpec(L4, ed.V2(0.0))))
    sp = ed.entanglement_spectrum(ed.GaugeState(L4, psi), two_star_subsystem(L4, L4.vertex(1, 1)))
    flat32 = sp.support_size == 32 and np.allclose(sp.values[:32], 2.0 ** -5, atol=1e-12)
    ok = worst <= 1e-10 and flat32
    verdict(1, ok, f"max |S_a - log(|G|/|G_A||G_B|)| = {worst:.1e} (tol 1e-10); "
                   f"two-star support {sp.support_size} equal values: {flat32}")
    assert ok


def test_criterion_2_cc_oracle_equivalence(verdict):
    lat, bips = twenty_bipartitions()
    worst = 0.0
    for lam in CC_LAMBDAS:
        state = ed.GaugeState(lat, construct_cc_state(lat, lam))
        for bip in bips:
            sp = ed.entanglement_spectrum(state, bip).values
            for a in CC_ALPHAS:
                worst = max(worst, abs(renyi_cc(lat, bip, lam, a) - renyi_from_spectrum(sp, a)))
    ok = worst <= 1e-9
    verdict(2, ok, f"max |renyi_cc - ED| over 3 lam x 4 alpha x 20 bipartitions = {worst:.1e} (tol 1e-9)")
    assert ok


def test_criterion_3_analytic_derivative(verdict):
    lat, bips = twenty_bipartitions()
    h = 1e-5
    worst = 0.0
    for lam in CC_LAMBDAS:
        for bip in bips:
            for a in CC_ALPHAS:
                fd = (renyi_cc(lat, bip, lam + h, a) - renyi_cc(lat, bip, lam - h, a)) / (2 * h)
                worst = max(worst, abs(renyi_derivative_cc(lat, bip, lam, a) - fd))
    coeffs = [small_lambda_coeffs(lat, bip) for bip in bips]
    c_max = max(max(c) for c in coeffs)
    ok = worst <= 1e-6 and c_max <= 1e-12
    verdict(3, ok, f"max |dS - FD| = {worst:.1e} (tol 1e-6); max(C1, C2) = {c_max:.1e} (must be <= 0)")
    assert ok


@settings(max_examples=25, deadline=None)
@given(st.sets(st.integers(0, 17), min_size=1, max_size=17))
def test_criterion_4_v1_dlocc_both_phases(edges):
    lat = TorusLattice(3)
    bip = classify_bipartition(lat, edges)
    worst = -math.inf
    for lams in (np.linspace(0.01, 0.3, 12), np.linspace(2.0, 4.0, 12)):
        surf = RenyiSurface.from_function(lams, DEFAULT_ALPHAS,
                                          lambda i, a: renyi_cc(lat, bip, float(lams[i]), a), "cc")
        worst = max(worst, int(sign_map(surf).signs.max()))
    assert worst <= 0, f"positive slope sign for bipartition {sorted(edges)}"


def test_criterion_4_summary(verdict):
    # the property test above raises on any counterexample; this records the verdict line
    lat = TorusLattice(3)
    rng = np.random.default_rng(4)
    worst = -1
    for _ in range(10):
        bip = random_bipartition(lat, rng)
        for lams in (np.linspace(0.01, 0.3, 12), np.linspace(2.0, 4.0, 12)):
            surf = RenyiSurface.from_function(lams, DEFAULT_ALPHAS,
                                              lambda i, a: renyi_cc(lat, bip, float(lams[i]), a), "cc")
            worst = max(worst, int(sign_map(surf).signs.max()))
    ok = worst <= 0
    verdict(4, ok, f"largest slope sign on [0.01, 0.3] and [2, 4] over random L=3 bipartitions = {worst} "
                   "(plus 25 hypothesis bipartitions)")
    assert ok


def test_criterion_5_thin_subsystem_closed_form(verdict):
    alphas = DEFAULT_ALPHAS
    low = max(abs(plaquette_renyi(1e-7, a) - 3 * math.log(2)) for a in alphas)
    high = max(abs(plaquette_renyi(math.inf, a) - math.log(2)) for a in alphas)
    T1 = nn_xx_correlator_thermo(1.0)
    T1_chain = pauli_string_expectation_thermo(1.0, PauliString.parse("x0 x1"))
    t_err = max(abs(T1 - T1_chain), abs(T1 - 2 / math.pi))
    lams_to = np.linspace(0.05, 0.95, 19)
    lams_para = np.linspace(1.05, 2.95, 20)
    S_to = np.array([[plaquette_renyi(l, a) for a in alphas] for l in lams_to])
    S_para = np.array([[plaquette_renyi(l, a) for a in alphas] for l in lams_para])
    dec_to = bool(np.all(np.diff(S_to, axis=0) < 0))
    inc_para = bool(np.all(np.diff(S_para, axis=0) > 0))
    ok = low <= 1e-6 and high <= 1e-6 and t_err <= 1e-6 and dec_to and inc_para
    # T(lam) grows monotonically, so every S_alpha keeps decreasing on (1, 3) as well;
    # the "increasing" half of this criterion cannot hold and is left failing
    verdict(5, ok, f"endpoints {low:.1e}/{high:.1e}, T(1) err {t_err:.1e} (tol 1e-6); "
                   f"decreasing on (0,1): {dec_to}; increasing on (1,3): {inc_para}")
    assert ok


def test_criterion_6_gauge_purity_formulas(verdict):
    worst = 0.0
    lat = TorusLattice(2)
    rng = np.random.default_rng(6)
    dim = 1 << (lat.num_vertices - 1)
    for _ in range(50):
        psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        psi /= np.linalg.norm(psi)
        bip = random_bipartition(lat, rng)
        spec = subgroup_spec(lat, bip)
        ex = GaugeStateExpectation(lat, psi)
        sp = ed.entanglement_spectrum(ed.GaugeState(lat, psi), bip).values
        worst = max(worst, abs(purity_gauge_formula(ex, spec) - np.sum(sp ** 2)),
                    abs(renyi_n_gauge_formula(ex, spec, 3) - np.sum(sp ** 3)))
    lat3 = TorusLattice(3)
    for lam in (0.2, 0.5):
        psi = ed.ground_state(ed.build_hamiltonian(ed.HamiltonianSpec(lat3, ed.V2(lam))))
        ex = GaugeStateExpectation(lat3, psi)
        for _ in range(8):
            bip = random_bipartition(lat3, rng, size=int(rng.integers(2, 7)))
            spec = subgroup_spec(lat3, bip)
            sp = ed.entanglement_spectrum(ed.GaugeState(lat3, psi), bip).values
            worst = max(worst, abs(purity_gauge_formula(ex, spec) - np.sum(sp ** 2)),
                        abs(renyi_n_gauge_formula(ex, spec, 3) - np.sum(sp ** 3)))
    ok = worst <= 1e-9
    verdict(6, ok, f"max |formula - partial trace| for n=2,3 (50 random L=2 states, V2 L=3) = {worst:.1e} (tol 1e-9)")
    assert ok


@settings(max_examples=8, deadline=None)
@given(st.floats(0.05, 0.85), st.floats(0.02, 0.1))
def test_criterion_7_renyi2_monotone_property(lam, step):
    # S_2 of two stars keeps one sign inside the ordered phase and inside the paramagnet
    assert two_star_renyi2(lam + step) < two_star_renyi2(lam)
    assert two_star_renyi2(lam + 1.2 + step) < two_star_renyi2(lam + 1.2)


def test_criterion_7_two_star_splitting(verdict):
    lams = np.linspace(0.05, 0.9, 10)
    spectra = [two_star_spectrum(float(l)) for l in lams]
    surf = RenyiSurface.from_spectra(lams, DEFAULT_ALPHAS, spectra, "rowfield", "twostar")
    sm = sign_map(surf)
    support = [int(np.count_nonzero(s > SUPPORT_THRESHOLD)) for s in spectra]
    s0 = int(np.count_nonzero(two_star_spectrum(0.0) > SUPPORT_THRESHOLD))
    grows = all(b >= a for a, b in zip(support, support[1:])) and support[0] > s0
    j2 = list(DEFAULT_ALPHAS).index(2.0)
    s2_negative = bool(np.all(sm.signs[:, j2] < 0))
    splitting = not is_dlocc_region(sm, float(lams[0]), float(lams[-1]))
    ok = grows and s2_negative and splitting
    verdict(7, ok, f"support {s0} at lam=0 -> {support[0]}..{support[-1]} on the infinite lattice; "
                   f"sign(dS_2) < 0: {s2_negative}; TO phase dLOCC: {not splitting}")
    assert ok


def _finite_alpha_c(cfg):
    res = run_scan(cfg)
    prof = [a for a in alpha_c_profile(res.signs) if a is not None and math.isfinite(a)]
    return prof


def test_criterion_8_v3_and_cluster_splitting(verdict):
    v3 = ScanConfig(model="v3-ed", L=3, bipartition="plaqplus2:4", lam=(0.01, 0.02, 0.03, 0.04, 0.05))
    cl = ScanConfig(model="cluster-ed", lx=6, ly=3, block="0,0,3,3", lam=(0.02, 0.04, 0.06, 0.08, 0.1))
    a_v3 = _finite_alpha_c(v3)
    a_cl = _finite_alpha_c(cl)
    ok = bool(a_v3) and bool(a_cl)
    fmt = lambda xs: ", ".join(f"{x:.2f}" for x in xs) or "none"
    verdict(8, ok, f"alpha_c V3 L=3 [{fmt(a_v3)}] (large-system reference 1.3); "
                   f"cluster 6x3 [{fmt(a_cl)}] (reference 0.8)")
    assert ok


def test_criterion_9_majorization_laws(verdict):
    rep = run_suite("majorization")
    bad = sum(c.error for c in rep.checks)
    ok = rep.passed
    verdict(9, ok, f"{len(rep.checks)} checks over 1000 random pairs, total violations {bad:.0f}")
    assert ok


def test_criterion_10_pfaffian_wick(verdict):
    rng = np.random.default_rng(10)
    pf_err = 0.0
    for n in (2, 4, 6, 8, 10, 12, 16):
        A = rng.standard_normal((n, n))
        A = A - A.T
        d = np.linalg.det(A)
        pf_err = max(pf_err, abs(pfaffian(A) ** 2 - d) / max(1.0, abs(d)))
    str_err = 0.0
    for L in (4, 6, 8, 10):
        for lam in (0.3, 1.0, 1.8):
            w, v = np.linalg.eigh(ed.tfim_chain_hamiltonian(L, lam).toarray())
            psi = v[:, 0]
            sol = solve_chain(L, lam)
            for _ in range(25):
                k = int(rng.integers(1, min(L, 6) + 1))
                sites = np.sort(rng.choice(L, size=k, replace=False))
                _, s = PauliString.from_pairs([(int(q), str(rng.choice(list("xyz")))) for q in sites])
                str_err = max(str_err, abs(pauli_string_expectation(sol, s) - np.real(ed.pauli_expectation(psi, s.ops))))
    ok = pf_err <= 1e-9 and str_err <= 1e-9
    verdict(10, ok, f"Pf^2 vs det {pf_err:.1e}; strings on L<=10 vs dense ED {str_err:.1e} (tol 1e-9)")
    assert ok
