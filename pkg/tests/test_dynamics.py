"""Class reduction, integration, equilibrium location, and shooting orbits."""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from crnlift import models
from crnlift.bifurcation import lotka_first_integral
from crnlift.dynamics import (
    ConvergenceError,
    ReducedSystem,
    find_all_equilibria,
    find_equilibrium,
    find_periodic_orbit,
    integrate,
    reduce_to_class,
)
from crnlift.kinetics import mass_action_model, model_from_network, ode_jacobian, ode_rhs
from crnlift.lifting import lift_species


def full_system(model) -> ReducedSystem:
    n = model.net.n_species
    return ReducedSystem(
        dimension=n,
        rhs=lambda u: ode_rhs(model, np.maximum(u, 0.0)),
        jacobian=lambda u: ode_jacobian(model, np.maximum(u, 0.0)),
        embedding=lambda u: np.asarray(u, dtype=float),
        class_levels=(),
        species=model.net.species,
        free_indices=tuple(range(n)),
    )


@pytest.fixture
def homog_brusselator_sys():
    model = mass_action_model(models.brusselator_homogenised(), [1, 1, 3, 1])
    return reduce_to_class(model, [6.0])


class TestReduceToClass:
    def test_full_rank_is_identity(self, lotka_model):
        sys = reduce_to_class(lotka_model, [])
        assert sys.dimension == 2
        assert sys.free_indices == (0, 1)
        x = np.array([1.3, 0.7])
        assert np.array_equal(sys.embedding(x), x)
        assert np.allclose(sys.rhs(x), ode_rhs(lotka_model, x))

    def test_homog_brusselator_closed_form(self):
        k1, k2, k3, k4, c = 2.0, 4.0, 9.0, 3.0, 6.0
        model = mass_action_model(models.brusselator_homogenised(), [k1, k2, k3, k4])
        sys = reduce_to_class(model, [c])
        assert sys.free_indices == (0, 1)  # z is eliminated
        rng = np.random.default_rng(0)
        for _ in range(15):
            x, y = rng.uniform(0.1, 2.5, size=2)
            got = sys.rhs(np.array([x, y]))
            want = np.array([
                k1 * (c - x - y) - k2 * x - k3 * x + k4 * x * x * y,
                k3 * x - k4 * x * x * y,
            ])
            assert np.allclose(got, want, rtol=1e-12, atol=1e-12)

    def test_lifted_schlogl_scalar_reduction(self, schlogl_model):
        family = lift_species(schlogl_model, [Fraction(-1)], "Y", r=[2, 1, 1, 0])
        eps = 0.01
        sys = reduce_to_class(family.model_at(eps), [100.0], check_feasible=False)
        assert sys.dimension == 1
        for x in (0.5, 2.0, 3.5):
            want = (-x**3 + 6 * x**2 * (1 - eps * x) - 11 * x * (1 - eps * x)
                    + 6 * (1 - eps * x) ** 2)
            assert math.isclose(sys.rhs(np.array([x]))[0], want, rel_tol=1e-10)
        state = sys.embedding(np.array([2.0]))
        assert math.isclose(state.sum(), 100.0)

    def test_level_count_checked(self):
        model = mass_action_model(models.lotka_lifted(), [1, 1, 1])
        with pytest.raises(ValueError):
            reduce_to_class(model, [])
        with pytest.raises(ValueError):
            reduce_to_class(model, [1.0, 2.0])

    def test_infeasible_class_rejected(self):
        model = mass_action_model(models.lotka_lifted(), [1, 1, 1])
        with pytest.raises(ValueError):
            reduce_to_class(model, [-1.0])

    def test_interior_point_validated(self):
        model = mass_action_model(models.lotka_lifted(), [1, 1, 1])
        sys = reduce_to_class(model, [3.0], interior_point=[1.0, 1.0, 1.0])
        assert sys.dimension == 2
        with pytest.raises(ValueError):
            reduce_to_class(model, [3.0], interior_point=[1.0, 1.0, 2.0])

    def test_eigenvalues_invariant_under_pivot_choice(self, homog_brusselator_sys):
        model = mass_action_model(models.brusselator_homogenised(), [1, 1, 3, 1])
        rec_z = find_equilibrium(homog_brusselator_sys, [1.0, 2.8])
        for eliminate in ([0], [1]):
            alt = reduce_to_class(model, [6.0], eliminate=eliminate, check_feasible=False)
            rec_alt = find_equilibrium(alt, alt.project(rec_z.point))
            assert np.allclose(
                np.sort(rec_alt.reduced_eigenvalues),
                np.sort(rec_z.reduced_eigenvalues),
                atol=1e-8,
            )
            assert np.allclose(np.sort(rec_alt.point), np.sort(rec_z.point), atol=1e-9)


class TestIntegrate:
    def test_lotka_first_integral_conserved(self, lotka_model):
        sys = reduce_to_class(lotka_model, [])
        traj = integrate(sys, [2.0, 1.0], 100.0, tol=1e-10)
        assert traj.success
        values = [lotka_first_integral([1, 1, 1], x, y) for x, y in traj.states]
        assert (max(values) - min(values)) / values[0] < 1e-6

    def test_homogeneous_total_conserved(self):
        model = mass_action_model(models.brusselator_homogenised(), [1, 1, 3, 1])
        traj = integrate(full_system(model), [1.0, 2.0, 3.0], 50.0, tol=1e-10)
        totals = traj.states.sum(axis=1)
        assert np.abs(totals - 6.0).max() < 1e-9

    def test_positivity_preserved(self):
        cases = [
            (models.schlogl(), None, [0.5]),
            (models.lotka(), [1, 1, 1], [2.0, 1.0]),
            (models.lva(), [1, 1, 1, 0.4], [0.5, 0.4]),
            (models.brusselator(), [1, 1, 3, 1], [2.0, 2.0]),
        ]
        for net, kappa, x0 in cases:
            model = mass_action_model(net, kappa) if kappa else model_from_network(net)
            traj = integrate(full_system(model), x0, 50.0, tol=1e-9)
            assert traj.success
            assert traj.states.min() > -1e-9

    def test_brusselator_approaches_orbit(self, brusselator_model):
        sys = reduce_to_class(brusselator_model, [])
        traj = integrate(sys, [2.0, 2.0], 80.0, tol=1e-9)
        tail = traj.states[traj.t > 40.0]
        # on the attracting orbit the x-amplitude stays large and bounded
        assert tail[:, 0].max() > 2.0
        assert tail[:, 0].min() < 0.7
        assert tail.max() < 6.0

    def test_dense_output_available(self, lotka_model):
        sys = reduce_to_class(lotka_model, [])
        traj = integrate(sys, [1.5, 1.0], 10.0, tol=1e-9)
        mid = traj.at(5.0)
        assert mid.shape == (2,)

    def test_start_outside_domain_rejected(self, schlogl_model):
        from crnlift.kinetics import DomainError

        family = lift_species(schlogl_model, [Fraction(-1)], "Y", r=[2, 1, 1, 0])
        sys = family.reduced_system(0.5)  # chart breaks down at x = 2
        with pytest.raises(DomainError):
            integrate(sys, [2.5], 5.0, tol=1e-8)

    def test_domain_exit_shrinks_step_and_reports_last_state(self):
        from crnlift.kinetics import DomainError

        def rhs(u):
            if u[0] > 2.0:
                raise DomainError("outside chart")
            return np.array([1.0])

        sys = ReducedSystem(
            dimension=1,
            rhs=rhs,
            jacobian=lambda u: np.array([[0.0]]),
            embedding=lambda u: u,
            class_levels=(),
        )
        traj = integrate(sys, [1.0], 5.0, tol=1e-8)
        assert not traj.success
        assert traj.t[-1] == pytest.approx(1.0, abs=1e-6)
        assert traj.states[-1, 0] == pytest.approx(2.0, abs=1e-6)


class TestEquilibria:
    def test_schlogl_three_states(self, schlogl_model):
        sys = reduce_to_class(schlogl_model, [])
        records = find_all_equilibria(sys, (0.1, 5.0), grid=25)
        assert [round(r.reduced[0], 9) for r in records] == [1.0, 2.0, 3.0]
        assert [r.classification for r in records] == ["stable", "unstable", "stable"]
        assert all(r.residual < 1e-10 for r in records)

    def test_brusselator_unit_parameters(self):
        model = mass_action_model(models.brusselator(), [1, 1, 1, 1])
        sys = reduce_to_class(model, [])
        rec = find_equilibrium(sys, [0.9, 1.2])
        assert np.allclose(rec.point, [1.0, 1.0], atol=1e-12)
        assert rec.classification == "stable"

    def test_lva_equilibrium(self):
        model = mass_action_model(models.lva(), [1, 1, 1, 0.4])
        sys = reduce_to_class(model, [])
        rec = find_equilibrium(sys, [0.5, 0.2])
        assert np.allclose(rec.point, [0.4, 0.24], atol=1e-12)
        assert np.allclose(ode_rhs(model, [0.4, 0.24]), 0.0, atol=1e-15)

    def test_lifted_schlogl_small_eps(self, schlogl_model):
        family = lift_species(schlogl_model, [Fraction(-1)], "Y", r=[2, 1, 1, 0])
        eps = 0.002
        sys = reduce_to_class(family.model_at(eps), [1 / eps], check_feasible=False)
        records = find_all_equilibria(sys, (0.1, 5.0), grid=30)
        # oracle: roots of the expanded cubic
        roots = np.roots([-(1 + 6 * eps), 6 + 11 * eps + 6 * eps**2, -(11 + 12 * eps), 6.0])
        roots = np.sort(roots.real[np.abs(roots.imag) < 1e-12])
        assert len(records) == 3
        assert np.allclose([r.reduced[0] for r in records], roots, atol=1e-9)
        assert [r.classification for r in records] == ["stable", "unstable", "stable"]
        assert max(abs(r.reduced[0] - t) for r, t in zip(records, (1, 2, 3))) < 0.11

    def test_lifted_schlogl_unscaled_large_class(self, schlogl_model):
        # fixed rate constants on a large class: a unique equilibrium
        family = lift_species(schlogl_model, [Fraction(-1)], "Y", r=[2, 1, 1, 0])
        sys = reduce_to_class(family.model_at(1.0), [1e4], check_feasible=False)
        records = find_all_equilibria(sys, (1.0, 9999.0), grid=40)
        assert len(records) == 1

    def test_lifted_lotka_class_threshold(self, lotka_model):
        family = lift_species(lotka_model, [Fraction(-1), Fraction(-1)], "Z")
        lifted = family.model_at(1.0)
        below = reduce_to_class(lifted, [0.8], check_feasible=False)
        assert find_all_equilibria(below, (0.02, 0.8), grid=12) == []
        above = reduce_to_class(lifted, [3.0], check_feasible=False)
        records = find_all_equilibria(above, (0.02, 3.0), grid=12)
        assert len(records) == 1
        assert np.allclose(records[0].point, [1.0, 1.0, 1.0], atol=1e-10)

    def test_singular_jacobian_reports_fold_suspicion(self):
        sys = ReducedSystem(
            dimension=1,
            rhs=lambda u: np.array([u[0] ** 2 + 1.0]),
            jacobian=lambda u: np.array([[2.0 * u[0]]]),
            embedding=lambda u: u,
            class_levels=(),
        )
        with pytest.raises(ConvergenceError) as err:
            find_equilibrium(sys, [0.0])
        assert err.value.fold_suspected


class TestPeriodicOrbits:
    def test_brusselator_orbit_stable(self, brusselator_model):
        sys = reduce_to_class(brusselator_model, [])
        transient = integrate(sys, [2.0, 2.0], 60.0, tol=1e-10)
        orbit = find_periodic_orbit(sys, transient.states[-1], t_guess=7.0)
        assert orbit.stability == "linearly stable"
        trivial = min(abs(m - 1.0) for m in orbit.floquet)
        assert trivial < 1e-8
        nontrivial = sorted(np.abs(orbit.floquet))[0]
        assert 0.0 < nontrivial < 1.0
        assert orbit.residual < 1e-8

    def test_orbit_closes_under_flow(self, brusselator_model):
        sys = reduce_to_class(brusselator_model, [])
        transient = integrate(sys, [2.0, 2.0], 60.0, tol=1e-10)
        orbit = find_periodic_orbit(sys, transient.states[-1], t_guess=7.0)
        sol = solve_ivp(lambda t, u: sys.rhs(u), (0, orbit.period), orbit.reduced_anchor,
                        method="DOP853", rtol=1e-12, atol=1e-13)
        assert np.linalg.norm(sol.y[:, -1] - orbit.reduced_anchor, np.inf) < 1e-8

    def test_lotka_center_is_degenerate(self, lotka_model):
        sys = reduce_to_class(lotka_model, [])
        orbit = find_periodic_orbit(sys, np.array([2.0, 1.0]), t_guess=2 * math.pi,
                                    ode_tol=1e-12)
        assert orbit.stability == "nonhyperbolic"
        assert np.abs(np.abs(orbit.floquet) - 1.0).max() < 1e-4

    def test_liouville_identity(self, brusselator_model):
        sys = reduce_to_class(brusselator_model, [])
        transient = integrate(sys, [2.0, 2.0], 60.0, tol=1e-10)
        orbit = find_periodic_orbit(sys, transient.states[-1], t_guess=7.0)

        def augmented(t, z):
            u = z[:2]
            return np.concatenate([sys.rhs(u), [np.trace(sys.jacobian(u))]])

        sol = solve_ivp(augmented, (0, orbit.period),
                        np.concatenate([orbit.reduced_anchor, [0.0]]),
                        method="DOP853", rtol=1e-12, atol=1e-13)
        product = np.prod(orbit.floquet).real
        assert abs(product - math.exp(sol.y[2, -1])) < 1e-6

    def test_equilibrium_seed_rejected(self, brusselator_model):
        sys = reduce_to_class(brusselator_model, [])
        with pytest.raises(ConvergenceError):
            find_periodic_orbit(sys, [1.0, 3.0], t_guess=7.0)

    def test_no_return_detected(self):
        model = mass_action_model(models.brusselator(), [1, 1, 1, 1])
        sys = reduce_to_class(model, [])  # stable focus, no orbit
        with pytest.raises((ConvergenceError, ValueError)):
            find_periodic_orbit(sys, [2.0, 2.0], t_guess=5.0)

    def test_dimension_guard(self, schlogl_model):
        sys = reduce_to_class(schlogl_model, [])
        with pytest.raises(ValueError):
            find_periodic_orbit(sys, [1.5], t_guess=1.0)
