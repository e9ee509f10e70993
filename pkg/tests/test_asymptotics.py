import numpy as np
import pytest
from numpy.testing import assert_allclose

from arisim.asymptotics import (AsymptoticParams, crossover_elements,
                                element_power_model, min_distance_active_wins,
                                snr_active_asymptotic, snr_active_exact,
                                snr_passive_asymptotic, snr_passive_exact,
                                su_siso_optimal)
from arisim.channels import ChannelSet, rayleigh_vector
from arisim.system import Precoder, SystemConfig, sinr_values, ris_power
from arisim.units import db2lin, dbm2watt, lin2db


def reference_params(n=256):
    # 2 W single-budget passive system vs 1 W + 1 W active split,
    # -100 dBm noise, -70 dB link gains
    return AsymptoticParams(n=n, p_bs_max=1.0, p_a_max=1.0, p_bs_p_max=2.0,
                            sigma2=dbm2watt(-100.0), sigma_v2=dbm2watt(-100.0),
                            rho_f2=db2lin(-70.0), rho_g2=db2lin(-70.0))


def siso_cfg(n, p_bs=1.0, p_a=1.0, sigma2=1e-13, sigma_v2=1e-13):
    return SystemConfig(m=1, k=1, n=n, p_bs_max=p_bs, p_a_max=p_a,
                        sigma2=sigma2, sigma_v2=sigma_v2)


class TestAsymptoticSnr:
    def test_passive_reference_value(self):
        assert abs(lin2db(snr_passive_asymptotic(reference_params())) - 39.0) <= 0.1

    def test_active_reference_value(self):
        assert abs(lin2db(snr_active_asymptotic(reference_params())) - 79.0) <= 0.1

    def test_passive_quadratic_scaling(self):
        p1, p2 = reference_params(100), reference_params(200)
        assert_allclose(snr_passive_asymptotic(p2), 4.0 * snr_passive_asymptotic(p1), rtol=1e-12)

    def test_passive_noise_scaling(self):
        p = reference_params()
        p10 = AsymptoticParams(**{**p.__dict__, "sigma2": 10 * p.sigma2})
        assert_allclose(snr_passive_asymptotic(p10), snr_passive_asymptotic(p) / 10, rtol=1e-12)

    def test_active_linear_scaling(self):
        p1, p2 = reference_params(100), reference_params(200)
        assert_allclose(snr_active_asymptotic(p2), 2.0 * snr_active_asymptotic(p1), rtol=1e-12)

    def test_active_high_bs_power_limit(self):
        p = reference_params()
        big = AsymptoticParams(**{**p.__dict__, "p_bs_max": 1e12})
        limit = p.n * p.p_a_max * np.pi ** 2 * p.rho_f2 / (16.0 * p.sigma2)
        assert_allclose(snr_active_asymptotic(big), limit, rtol=1e-3)


class TestCrossover:
    def test_reference_value(self):
        assert_allclose(crossover_elements(reference_params()), 2.5e6, rtol=0.01)

    def test_passive_budget_halves_threshold(self):
        p = reference_params()
        p2 = AsymptoticParams(**{**p.__dict__, "p_bs_p_max": 2 * p.p_bs_p_max})
        assert_allclose(crossover_elements(p2), crossover_elements(p) / 2, rtol=1e-12)

    def test_dominant_term_reduction(self):
        # when the BS-side noise product dominates, the threshold approaches
        # p_a / (p_bs_p * rho_g2)
        p = AsymptoticParams(n=1, p_bs_max=1.0, p_a_max=1.0, p_bs_p_max=2.0,
                             sigma2=1e-10, sigma_v2=1e-30,
                             rho_f2=1e-7, rho_g2=1e-7)
        expect = (p.p_bs_max / p.p_bs_p_max) * p.p_a_max / (p.p_bs_max * p.rho_g2)
        assert_allclose(crossover_elements(p), expect, rtol=1e-6)

    def test_snr_ordering_flips_at_threshold(self):
        p = reference_params()
        n_star = crossover_elements(p)
        below = AsymptoticParams(**{**p.__dict__, "n": 0.5 * n_star})
        above = AsymptoticParams(**{**p.__dict__, "n": 2.0 * n_star})
        at = AsymptoticParams(**{**p.__dict__, "n": n_star})
        assert snr_active_asymptotic(below) > snr_passive_asymptotic(below)
        assert snr_active_asymptotic(above) < snr_passive_asymptotic(above)
        assert_allclose(snr_active_asymptotic(at), snr_passive_asymptotic(at), rtol=1e-9)


class TestMinDistance:
    def test_reference_value(self):
        d = min_distance_active_wins(d_t=20.0, alpha=2.0, beta=2.0,
                                     l0=db2lin(-30.0), p_max=2.0,
                                     sigma2=dbm2watt(-100.0), n=1024)
        assert abs(d - 1.43) <= 0.01

    def test_plug_back_equality(self):
        args = dict(d_t=20.0, alpha=2.0, beta=2.5, l0=1e-3, p_max=2.0,
                    sigma2=1e-13, n=777)
        d_r = min_distance_active_wins(**args)
        lhs = 1.0 / (args["d_t"] ** -args["alpha"] + d_r ** -args["beta"])
        rhs = (2 * args["n"] * args["p_max"] * args["l0"]
               / (args["p_max"] - 4 * args["n"] * args["sigma2"]))
        assert_allclose(lhs, rhs, rtol=1e-9)

    def test_monotone_in_elements(self):
        common = dict(d_t=20.0, alpha=2.0, beta=2.0, l0=1e-3, p_max=2.0, sigma2=1e-13)
        ds = [min_distance_active_wins(n=n, **common) for n in (1, 16, 256, 1024)]
        assert all(b > a for a, b in zip(ds, ds[1:]))

    def test_degenerate_power_rejected(self):
        with pytest.raises(ValueError):
            min_distance_active_wins(d_t=20.0, alpha=2.0, beta=2.0, l0=1e-3,
                                     p_max=1e-10, sigma2=1e-3, n=1000)

    def test_close_bs_ris_link_never_wins(self):
        # BS so close to the RIS that the condition fails at every distance
        d = min_distance_active_wins(d_t=1.01, alpha=2.0, beta=2.0, l0=1e-3,
                                     p_max=2.0, sigma2=1e-13, n=1024)
        assert np.isinf(d)


class TestSuSisoOptimal:
    def test_scalar_phase(self):
        cfg = siso_cfg(1)
        w, theta, p = su_siso_optimal(np.array([1.0 + 0j]), np.array([1.0 + 0j]), cfg)
        assert_allclose(theta, [0.0])
        assert_allclose(w, 1.0)

    def test_reflect_budget_saturated(self, rng):
        n = 8
        f = rayleigh_vector(rng, n, 1.0)
        g = rayleigh_vector(rng, n, 1.0)
        cfg = siso_cfg(n, p_bs=2.0, p_a=3.0, sigma2=0.5, sigma_v2=0.25)
        w, theta, p = su_siso_optimal(f, g, cfg)
        psi = p * np.exp(-1j * theta)            # reflection entries p*e^{j theta}
        realized = ris_power(psi, g[:, None], np.array([[w]]), cfg.sigma_v2)
        assert_allclose(realized, cfg.p_a_max, rtol=1e-12)

    def test_beats_random_search(self, rng):
        n = 4
        f = rayleigh_vector(rng, n, 1.0)
        g = rayleigh_vector(rng, n, 1.0)
        cfg = siso_cfg(n, p_bs=2.0, p_a=1.0, sigma2=0.3, sigma_v2=0.2)
        achieved = snr_active_exact(f, g, cfg)
        p_cap = np.sqrt(cfg.p_a_max / (cfg.p_bs_max * np.sum(np.abs(g) ** 2)
                                       + n * cfg.sigma_v2))
        samples = 100_000
        theta = rng.uniform(0, 2 * np.pi, (samples, n))
        p = p_cap * np.sqrt(rng.uniform(0, 1, samples))
        cascade = np.abs(np.sum(np.abs(f) * np.abs(g)
                                * np.exp(1j * (theta - (np.angle(f) - np.angle(g))[None, :])),
                                axis=1))
        snr = (p ** 2 * cfg.p_bs_max * cascade ** 2
               / (p ** 2 * cfg.sigma_v2 * np.sum(np.abs(f) ** 2) + cfg.sigma2))
        assert achieved >= np.max(snr) - 1e-12


class TestExactSnr:
    def test_scalar_active(self):
        cfg = siso_cfg(1, p_bs=1.0, p_a=1.0, sigma2=1.0, sigma_v2=1.0)
        got = snr_active_exact(np.array([1.0 + 0j]), np.array([1.0 + 0j]), cfg)
        assert_allclose(got, 1.0 / 3.0, rtol=1e-12)

    def test_scalar_passive(self):
        got = snr_passive_exact(np.array([1.0 + 0j]), np.array([1.0 + 0j]), 1.0, 1.0)
        assert_allclose(got, 1.0)
        assert_allclose(snr_passive_exact(np.array([1.0 + 0j]), np.array([1.0 + 0j]), 5.0, 1.0), 5.0)

    def test_matches_system_model_sinr(self, rng):
        n = 6
        f = rayleigh_vector(rng, n, 1.0)
        g = rayleigh_vector(rng, n, 1.0)
        cfg = siso_cfg(n, p_bs=2.0, p_a=1.0, sigma2=0.4, sigma_v2=0.3)
        w, theta, p = su_siso_optimal(f, g, cfg)
        ch = ChannelSet(G=g[:, None], h=np.zeros((1, 1), complex), f=f[None, :])
        pre = Precoder(w=np.array([[w + 0j]]), psi=p * np.exp(-1j * theta))
        got = sinr_values(ch, pre.w, pre.psi, cfg)[0]
        assert_allclose(got, snr_active_exact(f, g, cfg), rtol=1e-9)

    def test_bounded_by_power_limits(self, rng):
        # gamma is increasing in both budgets, so each same-draw limit bounds it
        for _ in range(5):
            n = 16
            f = rayleigh_vector(rng, n, 1.0)
            g = rayleigh_vector(rng, n, 1.0)
            cfg = siso_cfg(n, p_bs=2.0, p_a=1.0, sigma2=0.3, sigma_v2=0.2)
            sfg = np.sum(np.abs(f) * np.abs(g))
            lim_bs = cfg.p_a_max * sfg ** 2 / (cfg.sigma_v2 * np.sum(np.abs(f) ** 2))
            lim_a = cfg.p_bs_max * sfg ** 2 / (cfg.sigma2 * np.sum(np.abs(g) ** 2))
            got = snr_active_exact(f, g, cfg)
            assert got <= min(lim_bs, lim_a) * (1 + 1e-12)

    def test_mc_mean_approaches_asymptote(self):
        # sample mean over Rayleigh draws lands within 1 dB of the large-N
        # value, and the gap shrinks as N grows; the shrinkage follows the
        # estimator's 1/sqrt(N * draws) scale, pinned at this seed
        rng = np.random.default_rng(0)
        errors = []
        for n in (256, 1024, 4096):
            p = reference_params(n)
            cfg = siso_cfg(n, p_bs=p.p_bs_max, p_a=p.p_a_max,
                           sigma2=p.sigma2, sigma_v2=p.sigma_v2)
            vals = []
            for _ in range(300):
                f = rayleigh_vector(rng, n, p.rho_f2)
                g = rayleigh_vector(rng, n, p.rho_g2)
                vals.append(snr_active_exact(f, g, cfg))
            err = abs(lin2db(np.mean(vals)) - lin2db(snr_active_asymptotic(p)))
            errors.append(err)
        assert errors[0] <= 1.0
        assert errors[1] < errors[0] and errors[2] < errors[1]

    def test_passive_mc_mean_approaches_asymptote(self):
        rng = np.random.default_rng(7)
        n = 4096
        p = reference_params(n)
        vals = []
        for _ in range(200):
            f = rayleigh_vector(rng, n, p.rho_f2)
            g = rayleigh_vector(rng, n, p.rho_g2)
            vals.append(snr_passive_exact(f, g, p.p_bs_p_max, p.sigma2))
        err = abs(lin2db(np.mean(vals)) - lin2db(snr_passive_asymptotic(p)))
        assert err <= 1.0


class TestElementPowerModel:
    def test_unity_gain_no_noise(self):
        assert_allclose(element_power_model(1.0, 2.5, 0.0, 0.0), 2.5)

    def test_zero_gain_leaves_static_noise(self):
        assert_allclose(element_power_model(0.0, 2.5, 1.0, 0.7), 0.7)

    def test_linear_in_gain(self):
        g, px, sv, ss = 3.0, 0.5, 0.1, 0.01
        diff = element_power_model(2 * g, px, sv, ss) - element_power_model(g, px, sv, ss)
        assert_allclose(diff, g * (px + sv), rtol=1e-12)

    def test_bandwidth_scales_noise_only(self):
        a = element_power_model(2.0, 1.0, 0.1, 0.2, bandwidth=10.0)
        assert_allclose(a, 2.0 * 1.0 + (2.0 * 0.1 + 0.2) * 10.0)
