import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from toric_dlocc import ed
from toric_dlocc.errors import CapacityError, DomainError
from toric_dlocc.freefermion import PauliString, pauli_string_expectation, solve_chain
from toric_dlocc.gauge import subgroup_spec
from toric_dlocc.lattice import TorusLattice, plaquette_subsystem, random_bipartition, two_star_subsystem
from toric_dlocc.rowfield import (
    GaugeStateExpectation,
    plaquette_correlator,
    plaquette_rdm_diagonal,
    plaquette_renyi,
    plaquette_renyi_closed_form,
    printed_two_star_purity,
    purity_gauge_formula,
    renyi_n_gauge_formula,
    sigma_string_to_tau,
    subsystem_rdm,
    tau_expectation,
    two_star_purity,
    two_star_renyi2,
    two_star_spectrum,
    two_star_terms,
)
from toric_dlocc.spectra import renyi_from_spectrum


@lru_cache(maxsize=None)
def v2_ground(L, lam):
    lat = TorusLattice(L)
    psi = ed.ground_state(ed.build_hamiltonian(ed.HamiltonianSpec(lat, ed.V2(lam))))
    return lat, psi


def random_gauge_state(rng, lat):
    psi = rng.standard_normal(1 << (lat.num_vertices - 1)) + 1j * rng.standard_normal(1 << (lat.num_vertices - 1))
    return psi / np.linalg.norm(psi)


# ---------------------------------------------------------------- sigma -> tau


def test_horizontal_edge_maps_to_xx():
    lat = TorusLattice(4)
    phase, rows = sigma_string_to_tau(lat, [lat.edge(2, 1, 0)])
    assert phase == 1
    assert rows == {2: PauliString.parse("x1 x2")}


def test_star_maps_to_z():
    lat = TorusLattice(4)
    phase, rows = sigma_string_to_tau(lat, (), stars=[lat.vertex(1, 3)])
    assert phase == 1 and rows == {1: PauliString.parse("z3")}


def test_vertical_pair_collapses_to_single_x_factors():
    lat = TorusLattice(4)
    # two vertical edges stacked in a column leave single tau^x at the far ends
    _, rows = sigma_string_to_tau(lat, [lat.edge(0, 1, 1), lat.edge(1, 1, 1)])
    assert rows == {0: PauliString.parse("x1"), 2: PauliString.parse("x1")}
    sol = solve_chain(4, 0.6)
    assert all(pauli_string_expectation(sol, p) == 0.0 for p in rows.values())


@given(st.integers(0, 15), st.integers(0, 31))
def test_map_preserves_anticommutation(s, e):
    lat = TorusLattice(4)
    _, zimg = sigma_string_to_tau(lat, (), stars=[s])
    _, ximg = sigma_string_to_tau(lat, [e])
    sigma_anti = bool(lat.star_masks[s] >> e & 1)
    overlaps = 0
    for r, p in zimg.items():
        q = ximg.get(r)
        if q is not None:
            overlaps += len(set(p.sites) & set(q.sites))
    assert (overlaps % 2 == 1) == sigma_anti


# ---------------------------------------------------------------- single plaquette


def test_plaquette_rdm_extremes():
    assert np.allclose(plaquette_rdm_diagonal(0.0), 1 / 8)
    top = plaquette_rdm_diagonal(1.0)
    assert np.allclose(top[:2], 0.5) and np.allclose(top[2:], 0.0)
    with pytest.raises(DomainError):
        plaquette_rdm_diagonal(1.2)


@given(st.floats(0.0, 1.0))
def test_plaquette_rdm_simplex(T):
    p = plaquette_rdm_diagonal(T)
    assert np.all(p >= 0) and p.sum() == pytest.approx(1.0, abs=1e-14)


@given(st.floats(0.0, 0.999), st.sampled_from([0.3, 0.5, 2.0, 3.0]))
def test_plaquette_closed_form_matches_spectrum(T, alpha):
    assert plaquette_renyi_closed_form(T, alpha) == pytest.approx(
        renyi_from_spectrum(plaquette_rdm_diagonal(T), alpha), abs=1e-10)


def test_plaquette_critical_value():
    assert plaquette_renyi(1.0, 2.0) == pytest.approx(1.399, abs=5e-4)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_plaquette_limits(alpha):
    assert plaquette_renyi(1e-6, alpha) == pytest.approx(3 * math.log(2), abs=1e-6)
    assert plaquette_renyi(1e6, alpha) == pytest.approx(math.log(2), abs=1e-3)


@pytest.mark.parametrize("lam", [0.3, 0.9, 1.6])
def test_plaquette_spectrum_matches_4x4_ed(lam):
    lat, psi = v2_ground(4, lam)
    spec = ed.entanglement_spectrum(ed.GaugeState(lat, psi), plaquette_subsystem(lat, 0)).values
    T = pauli_string_expectation(solve_chain(4, lam), PauliString.parse("x0 x1"))
    assert np.allclose(np.sort(spec)[::-1], plaquette_rdm_diagonal(T), atol=1e-10)


def test_plaquette_correlator_zero_field():
    assert plaquette_correlator(0.0) == 0.0


# ---------------------------------------------------------------- gauge-sector formulas


@pytest.mark.parametrize("L", [2, 3])
def test_gauge_formulas_match_partial_trace(L):
    lat = TorusLattice(L)
    rng = np.random.default_rng(10 + L)
    for _ in range(6 if L == 2 else 3):
        psi = random_gauge_state(rng, lat)
        bip = random_bipartition(lat, rng, size=int(rng.integers(2, 6)))
        spec = subgroup_spec(lat, bip)
        expect = GaugeStateExpectation(lat, psi)
        sp = ed.entanglement_spectrum(ed.GaugeState(lat, psi), bip).values
        p2 = purity_gauge_formula(expect, spec)
        assert p2 == pytest.approx(np.sum(sp ** 2), abs=1e-10)
        assert renyi_n_gauge_formula(expect, spec, 2) == pytest.approx(p2, abs=1e-14)
        assert renyi_n_gauge_formula(expect, spec, 3) == pytest.approx(np.sum(sp ** 3), abs=1e-9)


def test_product_state_purity_is_one():
    lat = TorusLattice(3)
    psi = np.zeros(1 << (lat.num_vertices - 1))
    psi[0] = 1.0
    spec = subgroup_spec(lat, plaquette_subsystem(lat, 4))
    assert purity_gauge_formula(GaugeStateExpectation(lat, psi), spec) == pytest.approx(1.0, abs=1e-12)


def test_two_star_flat_spectrum_at_zero_field():
    lat = TorusLattice(4)
    sol = solve_chain(4, 0.0)
    spec = subgroup_spec(lat, two_star_subsystem(lat, lat.vertex(1, 1)))
    ex = lambda g, z: tau_expectation(lat, sol, g, z)
    assert purity_gauge_formula(ex, spec) == pytest.approx(2.0 ** -5, abs=1e-12)
    assert renyi_n_gauge_formula(ex, spec, 3) == pytest.approx(2.0 ** -10, abs=1e-12)


def test_two_star_wraps_a_row_on_l3():
    # on the 3x3 torus the three horizontal edges of the two stars close a row loop
    lat = TorusLattice(3)
    spec = subgroup_spec(lat, two_star_subsystem(lat, lat.vertex(1, 1)))
    ex = lambda g, z: tau_expectation(lat, solve_chain(3, 0.0), g, z)
    assert purity_gauge_formula(ex, spec) == pytest.approx(2.0 ** -4, abs=1e-12)


def test_renyi_n_guards():
    lat = TorusLattice(3)
    spec = subgroup_spec(lat, two_star_subsystem(lat, lat.vertex(1, 1)))
    ex = lambda g, z: 1.0
    with pytest.raises(DomainError):
        renyi_n_gauge_formula(ex, spec, 1)
    with pytest.raises(CapacityError):
        renyi_n_gauge_formula(ex, spec, 6, budget=1000)


# ---------------------------------------------------------------- two stars


@pytest.mark.parametrize("L", [3, 4])
@pytest.mark.parametrize("lam", [0.2, 0.8, 1.5])
def test_two_star_purity_matches_ed(L, lam):
    lat, psi = v2_ground(L, lam)
    sp = ed.entanglement_spectrum(ed.GaugeState(lat, psi), two_star_subsystem(lat, lat.vertex(1, 1))).values
    assert two_star_purity(lam, L) == pytest.approx(np.sum(sp ** 2), abs=1e-10)


@pytest.mark.parametrize("lam", [0.3, 1.2])
def test_two_star_spectrum_matches_ed(lam):
    lat, psi = v2_ground(4, lam)
    sp = ed.entanglement_spectrum(ed.GaugeState(lat, psi), two_star_subsystem(lat, lat.vertex(1, 1))).values
    ours = two_star_spectrum(lam, 4)
    n = max(len(sp), len(ours))
    a = np.zeros(n); a[:len(sp)] = np.sort(sp)[::-1]
    b = np.zeros(n); b[:len(ours)] = ours
    assert np.allclose(a, b, atol=1e-10)


def test_explicit_rdm_matches_l2_partial_trace():
    lat = TorusLattice(2)
    rng = np.random.default_rng(3)
    psi = random_gauge_state(rng, lat)
    bip = random_bipartition(lat, rng, size=4)
    rho = subsystem_rdm(lat, bip, GaugeStateExpectation(lat, psi))
    assert np.allclose(rho, rho.conj().T) and np.trace(rho) == pytest.approx(1.0)
    sp = ed.entanglement_spectrum(ed.GaugeState(lat, psi), bip).values
    ev = np.sort(np.linalg.eigvalsh(rho))[::-1]
    assert np.allclose(ev[:len(sp)], np.sort(sp)[::-1], atol=1e-10)
    assert np.allclose(ev[len(sp):], 0.0, atol=1e-10)


def test_two_star_limits():
    assert two_star_purity(0.0) == pytest.approx(2.0 ** -5, abs=1e-12)
    assert two_star_renyi2(0.0) == pytest.approx(5 * math.log(2), abs=1e-10)
    # each row of vertical edges is a cat state at large field: one bit per row crossed
    assert two_star_purity(200.0) == pytest.approx(0.25, abs=1e-3)


def test_two_star_renyi2_decreasing():
    lams = np.linspace(0.05, 2.0, 14)
    s2 = [two_star_renyi2(l) for l in lams]
    assert all(b < a for a, b in zip(s2, s2[1:]))


@pytest.mark.parametrize("alpha", [2.5, 3.0, 5.0])
def test_renyi2_bounds_higher_orders(alpha):
    lat, psi = v2_ground(4, 0.7)
    sp = ed.entanglement_spectrum(ed.GaugeState(lat, psi), two_star_subsystem(lat, lat.vertex(1, 1))).values
    assert -math.log(two_star_purity(0.7, 4)) >= renyi_from_spectrum(sp, alpha) - 1e-12


def test_term_types_present():
    types = {t["type"] for t in two_star_terms(0.5, 16)}
    assert types == {"i", "ii", "iii"}


def test_printed_expression_misses_one_star_term():
    assert printed_two_star_purity(0.0) == pytest.approx(3 / 128, abs=1e-12)
    assert two_star_purity(0.0) == pytest.approx(4 / 128, abs=1e-12)
