"""Resource and gain optimization, squeezing sweet spot, affinity."""

import math

import numpy as np
import pytest

from telefid import (AlphabetPrior, GainSetting, NoiseParams, ParameterError,
                     ResourceSpec, average_fidelity, classical_benchmark,
                     fidelity_closed)
from telefid.optimize import (_avg_objective, _build_spec, _pss_delta,
                              affinity, golden_section_max,
                              one_shot_fidelity, optimize_beta_independent,
                              optimize_gain_average, r_max)

NONIDEAL = NoiseParams(tau=0.3, r2=0.05)


class TestGoldenSection:

    def test_parabola(self):
        x, fx, nfev = golden_section_max(lambda x: 2 - (x - 0.7) ** 2,
                                         -1.0, 2.0)
        assert x == pytest.approx(0.7, abs=1e-8)
        assert fx == pytest.approx(2.0, abs=1e-12)
        assert nfev > 2

    def test_edge_maximum(self):
        x, fx, _ = golden_section_max(lambda x: x, 0.0, 1.0)
        assert x == pytest.approx(1.0, abs=1e-7)


class TestSqueezingSweetSpot:
    """With channel loss, more squeezing is not always better."""

    CASES = [(0.1, 1.844544, 0.913106434),
             (0.2, 1.498283, 0.846547053),
             (0.3, 1.296070, 0.794166511)]

    @pytest.mark.parametrize("tau,r_star,f_star", CASES)
    def test_location(self, tau, r_star, f_star):
        assert r_max(tau) == pytest.approx(r_star, abs=1e-5)

    @pytest.mark.parametrize("tau,r_star,f_star", CASES)
    def test_is_the_argmax(self, tau, r_star, f_star):
        noise = NoiseParams(tau=tau)
        gain = GainSetting.unity_over_t()

        def f(r):
            return fidelity_closed(ResourceSpec.twin_beam(r), noise,
                                   gain).value

        x, fx, _ = golden_section_max(f, 0.0, 3.0)
        assert x == pytest.approx(r_max(tau), abs=1e-3)
        assert fx == pytest.approx(f_star, abs=1e-6)

    @pytest.mark.parametrize("tau,r_star,f_star", CASES)
    def test_optimized_families_share_the_maximum(self, tau, r_star, f_star):
        """At the sweet spot the optimal Bell and cat parameters vanish,
        so all three families top out at the same fidelity."""
        noise = NoiseParams(tau=tau)
        rs = r_max(tau)
        twb = optimize_beta_independent("twin-beam", rs, noise).best_value
        sb = optimize_beta_independent("squeezed-bell", rs, noise).best_value
        sc = optimize_beta_independent("squeezed-cat", rs, noise).best_value
        assert twb == pytest.approx(f_star, abs=1e-6)
        assert sb == pytest.approx(f_star, abs=1e-6)
        assert sc == pytest.approx(f_star, abs=1e-6)

    def test_validation(self):
        assert r_max(0.0) is None
        with pytest.raises(ParameterError):
            r_max(-0.1)


class TestBetaIndependentOptimization:

    NOISES = [NoiseParams(), NoiseParams(tau=0.1, n_th=0.1, r2=0.05),
              NONIDEAL]

    @pytest.mark.parametrize("r", [0.3, 0.8, 1.3])
    @pytest.mark.parametrize("noise", NOISES, ids=["ideal", "mild", "lossy"])
    def test_dominations_hold_exactly(self, r, noise):
        """The optimized families beat their subcases on every tested
        point, with no tolerance: the subcase parameters sit in the
        candidate list of the optimizer."""
        twb = optimize_beta_independent("twin-beam", r, noise).best_value
        pss = optimize_beta_independent("photon-subtracted", r,
                                        noise).best_value
        sb = optimize_beta_independent("squeezed-bell", r, noise).best_value
        sc = optimize_beta_independent("squeezed-cat", r, noise).best_value
        assert sb >= twb
        assert sb >= pss
        assert sc >= twb

    def test_subcase_reductions(self):
        """delta = 0 and gamma = 0 collapse the larger families onto the
        twin beam."""
        noise = NONIDEAL
        gain = GainSetting.unity_over_t()
        for r in (0.4, 0.9):
            twb = fidelity_closed(ResourceSpec.twin_beam(r), noise,
                                  gain).value
            sb0 = fidelity_closed(ResourceSpec.squeezed_bell(r, delta=0.0),
                                  noise, gain).value
            sc0 = fidelity_closed(
                ResourceSpec.squeezed_cat(r, delta=0.0, gamma_mod=0.7),
                noise, gain).value
            scg = fidelity_closed(
                ResourceSpec.squeezed_cat(r, delta=0.3, gamma_mod=0.0),
                noise, gain).value
            assert sb0 == twb
            assert sc0 == pytest.approx(twb, abs=1e-12)
            assert scg == pytest.approx(twb, abs=1e-12)

    def test_optimum_beats_probe_grid(self):
        noise = NONIDEAL
        r = 0.8
        opt = optimize_beta_independent("squeezed-bell", r, noise)
        gain = GainSetting.unity_over_t()
        for d in np.linspace(-1.5, 1.5, 23):
            probe = fidelity_closed(ResourceSpec.squeezed_bell(r, delta=d),
                                    noise, gain).value
            assert opt.best_value >= probe - 1e-12

    def test_cat_optimum_metadata(self):
        opt = optimize_beta_independent("squeezed-cat", 1.0, NONIDEAL)
        assert opt.method == "grid+nelder-mead"
        assert opt.best_value == pytest.approx(0.752540968191, abs=1e-9)
        assert opt.delta_opt == pytest.approx(0.244730616209, abs=1e-5)
        assert opt.gamma_opt == pytest.approx(0.834822832584, abs=1e-5)

    def test_rejects_unknown_family(self):
        with pytest.raises(ParameterError):
            optimize_beta_independent("ghz", 0.5, NoiseParams())


class TestPhotonSubtractionCrossover:
    """Below a crossover squeezing the optimal Bell angle is larger than
    the photon-subtraction angle, above it smaller; at the crossover the
    two resources coincide."""

    def _crossing(self, noise):
        def h(r):
            opt = optimize_beta_independent("squeezed-bell", r, noise)
            return opt.delta_opt - _pss_delta(r)

        a, b = 0.3, 0.8
        ha = h(a)
        assert ha > 0 > h(b)
        for _ in range(30):
            m = 0.5 * (a + b)
            if (h(m) > 0) == (ha > 0):
                a = m
            else:
                b = m
        return 0.5 * (a + b)

    def test_ideal_channel(self):
        assert self._crossing(NoiseParams()) == pytest.approx(
            math.log(3) / 2, abs=1e-3)

    def test_lossy_channel(self):
        assert self._crossing(NONIDEAL) == pytest.approx(0.488693, abs=2e-3)


class TestAveragedOptimization:

    def test_factorized_objective_matches_tensor_average(self):
        """The separable Gauss-Hermite sums inside the optimizer must
        reproduce the public tensor-rule average."""
        rng = np.random.default_rng(31)
        noise = NoiseParams(tau=0.2, n_th=0.1, r2=0.05)
        sigma = 8.0
        prior = AlphabetPrior(sigma)
        for family in ("twin-beam", "squeezed-bell", "buridan",
                       "squeezed-cat", "photon-subtracted"):
            fbar = _avg_objective(family, 0.9, noise, sigma)
            for _ in range(3):
                g = rng.uniform(0.7, 1.4)
                d = rng.uniform(-1.2, 1.2)
                gm = rng.uniform(0.1, 1.5)
                if family == "squeezed-cat":
                    ours = float(fbar(g, np.array([d]), np.array([gm]))[0, 0])
                elif family in ("squeezed-bell", "buridan"):
                    ours = float(fbar(g, np.array([d]))[0])
                elif family == "photon-subtracted":
                    d = _pss_delta(0.9)
                    ours = float(fbar(g, np.array([d]))[0])
                else:
                    ours = float(fbar(g))
                spec = _build_spec(family, 0.9,
                                   None if family == "twin-beam" else d,
                                   gm if family == "squeezed-cat" else None)
                ref = average_fidelity(spec, noise, GainSetting.fixed(g),
                                       prior).value
                assert ours == pytest.approx(ref, abs=1e-12)

    def test_never_below_unity_gain_baseline(self):
        """g = 1/T with the beta-independent optimum is in the candidate
        list, so the averaged optimum cannot fall below it (1e-12 covers
        the recompute through the public average)."""
        prior = AlphabetPrior(10.0)
        for family in ("twin-beam", "squeezed-bell"):
            base = optimize_beta_independent(family, 0.8, NONIDEAL)
            opt = optimize_gain_average(family, 0.8, NONIDEAL, prior)
            assert opt.best_value >= base.best_value - 1e-12

    def test_gain_approaches_unity_for_wide_priors(self):
        noise = NONIDEAL
        T = noise.transmissivity
        devs = []
        for sigma in (10.0, 100.0, 1000.0):
            opt = optimize_gain_average("twin-beam", 0.8, noise,
                                        AlphabetPrior(sigma))
            devs.append(abs(opt.g_opt * T - 1.0))
        assert devs[0] > devs[1] > devs[2]

    def test_squeezed_bell_regression(self):
        opt = optimize_gain_average("squeezed-bell", 0.8, NONIDEAL,
                                    AlphabetPrior(10.0))
        assert opt.best_value == pytest.approx(0.793071310803, abs=1e-9)
        assert opt.g_opt == pytest.approx(0.951308935551, abs=1e-6)
        assert opt.delta_opt == pytest.approx(0.404832762182, abs=1e-5)
        assert opt.method == "grid+nelder-mead"

    def test_beats_classical_benchmark(self):
        prior = AlphabetPrior(10.0)
        opt = optimize_gain_average("squeezed-bell", 1.0, NONIDEAL, prior)
        assert opt.best_value > classical_benchmark(prior)


class TestOneShot:

    def test_wide_prior_levels_the_alphabet(self):
        """At sigma = 100 the optimal gain is so close to unity that the
        one-shot fidelity barely depends on the input amplitude."""
        prior = AlphabetPrior(100.0)
        vals = [one_shot_fidelity("squeezed-bell", 0.8, NONIDEAL, prior,
                                  beta).value
                for beta in (3.0, 5.0, 10.0)]
        assert max(vals) - min(vals) < 0.02
        assert all(v > classical_benchmark(prior) for v in vals)

    def test_report_carries_context(self):
        prior = AlphabetPrior(10.0)
        rep = one_shot_fidelity("twin-beam", 0.8, NONIDEAL, prior, 1 + 1j)
        assert rep.sigma == 10.0
        assert rep.beta == 1 + 1j
        assert 0 < rep.value <= 1

    def test_rejects_beta_outside_prior_support(self):
        with pytest.raises(ParameterError):
            one_shot_fidelity("twin-beam", 0.8, NONIDEAL,
                              AlphabetPrior(0.1), 30.0)


class TestAffinity:
    """Distance of each core from the plain two-mode squeezed vacuum."""

    def test_twin_beam_is_gaussian(self):
        assert affinity(ResourceSpec.twin_beam(0.9)) >= 1 - 1e-9

    def test_cat_collapses_for_small_gamma(self):
        spec = ResourceSpec.squeezed_cat(0.8, delta=0.3, gamma_mod=1e-6)
        assert affinity(spec) >= 1 - 1e-9

    def test_squeezed_fock_pair(self):
        # core |11>: the best squeezed-vacuum overlap is exactly 1/4
        spec = ResourceSpec.squeezed_bell(0.8, delta=math.pi / 2)
        assert affinity(spec) == pytest.approx(0.25, abs=1e-5)

    def test_known_values(self):
        assert affinity(ResourceSpec.photon_subtracted(0.9)) \
            == pytest.approx(0.921834, abs=1e-5)
        spec = ResourceSpec.squeezed_cat(0.8, delta=0.3, gamma_mod=0.9)
        assert affinity(spec) == pytest.approx(0.953765, abs=1e-5)

    def test_warns_when_cutoff_too_small(self):
        with pytest.warns(UserWarning, match="tail weight"):
            affinity(ResourceSpec.twin_beam(2.5))
