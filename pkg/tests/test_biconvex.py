import numpy as np
import pytest

from gkpcap import biconvex, choi, gkp
from gkpcap.biconvex import (OptimizationConfig, SdpSettings, SolverFailure,
                             alternate_optimize, clean_choi, decoder_sdp_step,
                             encoder_sdp_step, gkp_encoding_choi,
                             pure_loss_choi, random_isometry_encoding)
from conftest import random_hermitian, random_kraus_channel
import sdp_reference


class TestConfig:
    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            OptimizationConfig(eta=0.0)
        with pytest.raises(ValueError):
            OptimizationConfig(eta=1.2)
        with pytest.raises(ValueError):
            OptimizationConfig(eta=0.9, fock_dim=2, code_dim=2)
        with pytest.raises(ValueError):
            OptimizationConfig(eta=0.9, energy_bound=0.0)

    def test_accepts_boundary_eta(self):
        OptimizationConfig(eta=1.0)


class TestRandomIsometryEncoding:
    def test_is_cptp_and_rank_one(self):
        XE = random_isometry_encoding(6, 2, seed=4)
        XE.validate()
        w = np.sort(np.linalg.eigvalsh(XE.X))[::-1]
        assert w[0] == pytest.approx(2.0, abs=1e-10)
        assert np.abs(w[1:]).max() < 1e-10

    def test_seed_determinism(self):
        a = random_isometry_encoding(5, 2, seed=7)
        b = random_isometry_encoding(5, 2, seed=7)
        c = random_isometry_encoding(5, 2, seed=8)
        np.testing.assert_array_equal(a.X, b.X)
        assert np.abs(a.X - c.X).max() > 1e-3

    def test_dimension_guard(self):
        with pytest.raises(ValueError):
            random_isometry_encoding(2, 3, seed=0)


class TestCleanChoi:
    def test_restores_invariants(self, rng):
        X = choi.choi_from_kraus(random_kraus_channel(3, 4, 2, rng)).X
        noise = 1e-6 * (rng.standard_normal(X.shape)
                        + 1j * rng.standard_normal(X.shape))
        fixed = clean_choi(X + noise, 3, 4)
        fixed.validate()
        min_eig, tp = sdp_reference.feasibility_defects(fixed.X, 3, 4)
        assert min_eig > -1e-12
        assert tp < 1e-12
        assert np.abs(fixed.X - X).max() < 1e-4

    def test_exact_input_unchanged(self, rng):
        X = choi.choi_from_kraus(random_kraus_channel(2, 3, 2, rng)).X
        np.testing.assert_allclose(clean_choi(X, 2, 3).X, X, atol=1e-12)

    def test_rejects_unrepairable_iterate(self):
        with pytest.raises(SolverFailure, match="repair"):
            clean_choi(1e-3 * np.eye(4), 2, 2)


class TestDecoderStep:
    def test_matches_real_embedding_reference(self):
        n, d = 3, 2
        XE = random_isometry_encoding(n, d, seed=1)
        XN = pure_loss_choi(0.8, n)
        M = choi.f_n_map(XN, XE.X)
        XD = decoder_sdp_step(M, n, d)
        XD.validate()
        X_ref, obj_ref = sdp_reference.decoder_step_real_embedding(M, n, d)
        obj = np.trace(XD.X @ M).real
        assert obj == pytest.approx(obj_ref, abs=1e-5)
        assert np.abs(XD.X - X_ref).max() < 1e-4

    def test_beats_random_feasible_points(self, rng):
        n, d = 3, 2
        M = choi.f_n_map(pure_loss_choi(0.75, n),
                         random_isometry_encoding(n, d, seed=2).X)
        XD = decoder_sdp_step(M, n, d)
        best = np.trace(XD.X @ M).real
        for k in (2, 3, 4):
            Y = choi.choi_from_kraus(random_kraus_channel(n, d, k, rng)).X
            assert np.trace(Y @ M).real <= best + 1e-6

    def test_beats_projected_perturbations(self, rng):
        n, d = 3, 2
        M = choi.f_n_map(pure_loss_choi(0.9, n),
                         random_isometry_encoding(n, d, seed=3).X)
        XD = decoder_sdp_step(M, n, d)
        best = np.trace(XD.X @ M).real
        for scale in (1e-2, 1e-1):
            Y0 = XD.X + scale * random_hermitian(n * d, rng)
            Y = sdp_reference.dykstra_feasible(Y0, n, d)
            min_eig, tp = sdp_reference.feasibility_defects(Y, n, d)
            assert tp < 1e-10 and min_eig > -1e-6
            assert np.trace(Y @ M).real <= best + 1e-5

    def test_single_input_level_is_eigenvalue_problem(self, rng):
        # with one input level, CPTP decoders are exactly the density
        # matrices, so the linear objective peaks at the top eigenvalue
        M = random_hermitian(4, rng)
        XD = decoder_sdp_step(M, 1, 4)
        XD.validate()
        top = float(np.linalg.eigvalsh(M).max())
        assert np.trace(XD.X @ M).real == pytest.approx(top, abs=1e-7)

    def test_recovers_isometry_adjoint(self):
        # noiseless channel: the best decoder undoes the encoding exactly
        n, d = 4, 2
        XE = random_isometry_encoding(n, d, seed=5)
        XN = choi.identity_choi(n)
        XD = decoder_sdp_step(choi.f_n_map(XN, XE.X), n, d)
        F = choi.entanglement_fidelity(XE, XN, XD, d)
        assert F == pytest.approx(1.0, abs=1e-6)


class TestEncoderStep:
    @staticmethod
    def _setup(n, d, eta, seed):
        XN = pure_loss_choi(eta, n)
        XE0 = random_isometry_encoding(n, d, seed=seed)
        XD = decoder_sdp_step(choi.f_n_map(XN, XE0.X), n, d)
        return XN, choi.encoder_objective(XN, XD)

    def test_respects_energy_bound(self):
        n, d, bound = 6, 2, 0.8
        _, ME = self._setup(n, d, 0.85, seed=6)
        energy_op = np.diag(np.arange(n, dtype=float))
        XE = encoder_sdp_step(ME, energy_op, bound, d, n)
        XE.validate()
        out = choi.average_output_state(XE)
        energy = np.trace(out @ energy_op).real
        assert energy <= bound + 1e-6

    def test_tight_budget_is_active(self):
        # starving the encoder makes the energy constraint bind
        n, d, bound = 6, 2, 0.6
        _, ME = self._setup(n, d, 0.9, seed=7)
        energy_op = np.diag(np.arange(n, dtype=float))
        XE = encoder_sdp_step(ME, energy_op, bound, d, n)
        out = choi.average_output_state(XE)
        energy = np.trace(out @ energy_op).real
        assert energy == pytest.approx(bound, abs=1e-4)

    def test_objective_nondecreasing_in_budget(self):
        # each solve is a global SDP optimum and the feasible set grows
        # with the budget, so the optimal value cannot decrease
        n, d = 6, 2
        _, ME = self._setup(n, d, 0.9, seed=8)
        energy_op = np.diag(np.arange(n, dtype=float))
        values = []
        for bound in (0.5, 1.0, 3.0):
            XE = encoder_sdp_step(ME, energy_op, bound, d, n)
            values.append(np.trace(XE.X @ ME).real)
        assert values[0] <= values[1] + 1e-7
        assert values[1] <= values[2] + 1e-7


class TestAlternateOptimize:
    def test_noiseless_channel_reaches_unit_fidelity(self):
        config = OptimizationConfig(eta=1.0, fock_dim=8, code_dim=2,
                                    energy_bound=3.0, max_iters=10, seed=0)
        trace = alternate_optimize(config)
        assert trace.infidelity <= 1e-6
        early = [r.fidelity for r in trace.records if r.iteration <= 2]
        assert max(early) >= 1.0 - 1e-6
        assert trace.converged
        trace.validate()

    def test_lossy_smoke_run(self):
        calls = []
        config = OptimizationConfig(eta=0.9, fock_dim=6, code_dim=2,
                                    energy_bound=2.0, max_iters=3, seed=1)
        trace = alternate_optimize(config, checkpoint_iters=(1, 2, 50),
                                   progress=lambda it, f: calls.append((it, f)))
        trace.validate()
        assert len(trace.records) == 6
        assert [r.phase for r in trace.records[:2]] == ["decoder", "encoder"]
        trace.X_E.validate()
        trace.X_D.validate()
        assert (trace.X_E.dim_in, trace.X_E.dim_out) == (2, 6)
        assert (trace.X_D.dim_in, trace.X_D.dim_out) == (6, 2)
        assert trace.infidelity == pytest.approx(
            1.0 - trace.records[-1].fidelity, abs=1e-15)
        assert sorted(trace.checkpoints) == [1, 2]
        pops = np.diag(choi.average_output_state(trace.X_E)).real
        assert trace.top_level_population == pytest.approx(pops[-2:].sum(),
                                                           abs=1e-12)
        assert 0.0 <= trace.top_level_population <= 1.0
        assert [it for it, _ in calls] == [1, 2, 3]
        final = dict(calls)[3]
        assert final == pytest.approx(trace.records[-1].fidelity, abs=1e-12)

    def test_seed_determinism(self):
        config = OptimizationConfig(eta=0.9, fock_dim=5, code_dim=2,
                                    energy_bound=2.0, max_iters=2, seed=3)
        a = alternate_optimize(config)
        b = alternate_optimize(config)
        assert a.records[-1].fidelity == pytest.approx(
            b.records[-1].fidelity, abs=1e-9)

    def test_solver_failure_carries_partial_trace(self, monkeypatch):
        real_solve = biconvex._CachedSdp.solve
        counter = {"n": 0}

        def failing_solve(self, M, settings):
            counter["n"] += 1
            if counter["n"] >= 3:
                raise SolverFailure("synthetic failure")
            return real_solve(self, M, settings)

        monkeypatch.setattr(biconvex._CachedSdp, "solve", failing_solve)
        config = OptimizationConfig(eta=0.9, fock_dim=5, code_dim=2,
                                    energy_bound=2.0, max_iters=4, seed=2)
        with pytest.raises(SolverFailure) as info:
            alternate_optimize(config)
        trace = info.value.trace
        assert trace is not None
        assert not trace.converged
        assert len(trace.records) == 2       # one full iteration completed
        assert trace.records[-1].phase == "encoder"

    def test_validate_flags_decreasing_fidelity(self):
        config = OptimizationConfig(eta=0.9, fock_dim=5, code_dim=2)
        records = [biconvex.IterationRecord(1, "decoder", 0.5),
                   biconvex.IterationRecord(1, "encoder", 0.6),
                   biconvex.IterationRecord(2, "decoder", 0.4)]
        XE = random_isometry_encoding(5, 2, seed=0)
        trace = biconvex.OptimizationTrace(config, records, XE, XE, 0.6,
                                           False, 0.0)
        with pytest.raises(ValueError, match="decreased"):
            trace.validate()

    def test_first_encoder_step_dip_is_exempt(self):
        config = OptimizationConfig(eta=0.9, fock_dim=5, code_dim=2)
        records = [biconvex.IterationRecord(1, "decoder", 0.9),
                   biconvex.IterationRecord(1, "encoder", 0.3),
                   biconvex.IterationRecord(2, "decoder", 0.35)]
        XE = random_isometry_encoding(5, 2, seed=0)
        biconvex.OptimizationTrace(config, records, XE, XE, 0.65,
                                   False, 0.0).validate()


class TestGkpEncodingBridge:
    def test_grid_encoding_is_cptp_after_truncation(self):
        lat = gkp.square_lattice(2)
        fe = gkp.finite_energy_codewords(lat, 2, 0.45, 120)
        XE = gkp_encoding_choi(fe, fock_dim=24)
        XE.validate()
        assert (XE.dim_in, XE.dim_out) == (2, 24)

    def test_zero_padding_preserves_words(self):
        lat = gkp.square_lattice(2)
        fe = gkp.finite_energy_codewords(lat, 2, 0.6, 40)
        XE = gkp_encoding_choi(fe, fock_dim=50)
        XE.validate()
        assert (XE.dim_in, XE.dim_out) == (2, 50)
        w = np.sort(np.linalg.eigvalsh(XE.X))[::-1]
        assert w[0] == pytest.approx(2.0, abs=1e-9)

    def test_hexagonal_code_with_optimal_decoder_nears_optimized_rate(self):
        # the best known alternating-SDP infidelity for this channel and
        # budget is ~2.1e-3; a hexagonal grid encoding with only the
        # decoder optimized must land within a factor two of it
        n, d, eta = 20, 2, 0.9
        lat = gkp.hexagonal_lattice(d)
        delta = gkp.delta_for_mean_photon(lat, d, 3.0, 140)
        fe = gkp.finite_energy_codewords(lat, d, delta, 140)
        XE = gkp_encoding_choi(fe, fock_dim=n)
        XE.validate()
        XN = pure_loss_choi(eta, n)
        XD = decoder_sdp_step(choi.f_n_map(XN, XE.X), n, d)
        infid = 1.0 - choi.entanglement_fidelity(XE, XN, XD, d)
        assert 0.002 <= infid <= 0.0042
