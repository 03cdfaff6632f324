import json

import numpy as np
import pytest

from noisyrk import (
    BoundKind,
    ExperimentConfig,
    NoiseModel,
    RkConfig,
    Spacing,
    SpectrumSpec,
    TABLE2_GRID,
    additive_noise,
    apply_paper_scale,
    bound_additive,
    generate_system,
    initial_iterate,
    run_figure_experiment,
    run_preconditioner_demo,
    run_table2,
)

SPEC = SpectrumSpec(m=30, n=15, r=15, sigma_min=1.0, sigma_max=4.0)


def make_config(tmp_path=None, **overrides):
    defaults = dict(
        spectrum=SPEC,
        rk=RkConfig(max_iterations=3000, trials=5, record_stride=150, seed=42),
        master_seed=42,
        noise_model=NoiseModel.ADDITIVE,
        noise_grid=((0.0, 0.0),),
        bound_kinds=(BoundKind.ADDITIVE,),
        output_dir=str(tmp_path) if tmp_path is not None else None,
    )
    defaults.update(overrides)
    return ExperimentConfig(**defaults)


class TestFigureExperiment:
    def test_noiseless_point_decays_and_is_dominated(self, tmp_path):
        cfg = make_config(tmp_path, bound_kinds=(BoundKind.NOISELESS, BoundKind.ADDITIVE))
        results = run_figure_experiment(cfg)
        res = results[(0.0, 0.0)]
        mse = res.trajectory.mean_squared_error
        assert mse[-1] <= 1e-6 * mse[0]
        for curve in res.curves.values():
            assert np.all(mse <= curve.values + 1e-12)
        assert (tmp_path / "traj_0_0.csv").exists()
        assert (tmp_path / "band_0_0.csv").exists()
        assert (tmp_path / "bound_noiseless_0_0.csv").exists()
        assert (tmp_path / "meta.json").exists()

    def test_larger_noise_larger_final_error(self, tmp_path):
        grid = ((0.01, 0.01), (0.1, 0.1), (0.5, 0.5))
        cfg = make_config(tmp_path, noise_grid=grid)
        results = run_figure_experiment(cfg)
        finals = [results[g].trajectory.mean_squared_error[-1] for g in grid]
        assert finals[0] < finals[1] < finals[2]

    def test_multiplicative_regime_emits_bound(self, tmp_path):
        cfg = make_config(
            tmp_path,
            noise_model=NoiseModel.MULTIPLICATIVE,
            use_f=False,
            noise_grid=((0.05, 0.05),),
            bound_kinds=(BoundKind.MULTIPLICATIVE,),
        )
        results = run_figure_experiment(cfg)
        res = results[(0.05, 0.05)]
        assert BoundKind.MULTIPLICATIVE in res.curves
        assert (tmp_path / "bound_multiplicative_0.05_0.05.csv").exists()

    def test_partial_regime_emits_both_horizon_bounds(self, tmp_path):
        # matrix-noise-only grid point comparing the perturbation-route
        # bound against the hypothesis-free one on the same dataset
        cfg = make_config(
            tmp_path,
            noise_model=NoiseModel.PARTIAL_CONSISTENT,
            noise_grid=((0.4, 0.0),),
            bound_kinds=(BoundKind.PERTURBATION_PARTIAL, BoundKind.ADDITIVE),
        )
        results = run_figure_experiment(cfg)
        res = results[(0.4, 0.0)]
        assert not res.bound_errors
        partial_curve = res.curves[BoundKind.PERTURBATION_PARTIAL]
        direct_curve = res.curves[BoundKind.ADDITIVE]
        assert not partial_curve.squared and direct_curve.squared
        # the direct route gives the smaller horizon here (unsquared comparison)
        assert np.sqrt(direct_curve.horizon) <= partial_curve.horizon + 1e-12
        assert (tmp_path / "bound_perturbation_partial_0.4_0.csv").exists()

    def test_invalid_bound_recorded_not_fatal(self, tmp_path):
        cfg = make_config(
            tmp_path,
            noise_grid=((0.1, 0.1),),
            bound_kinds=(BoundKind.NOISELESS, BoundKind.ADDITIVE),
        )
        results = run_figure_experiment(cfg)
        res = results[(0.1, 0.1)]
        assert BoundKind.ADDITIVE in res.curves
        assert BoundKind.NOISELESS in res.bound_errors
        meta = json.loads((tmp_path / "meta.json").read_text())
        assert "noiseless" in meta["bound_errors"]["0.1_0.1"]

    def test_noise_draw_shared_across_grid(self):
        cfg = make_config(noise_grid=((0.01, 0.01), (0.5, 0.5)))
        results = run_figure_experiment(cfg)
        e1 = results[(0.01, 0.01)].noisy.e
        e2 = results[(0.5, 0.5)].noisy.e
        assert np.array_equal(e1, e2)

    def test_byte_identical_under_same_config(self, tmp_path):
        out = tmp_path / "runs"
        cfg = make_config(out, noise_grid=((0.0, 0.0), (0.1, 0.1)))
        run_figure_experiment(cfg)
        snapshot = {p.name: p.read_bytes() for p in out.iterdir()}
        run_figure_experiment(cfg)
        again = {p.name: p.read_bytes() for p in out.iterdir()}
        assert snapshot == again

    def test_threads_do_not_change_results(self, tmp_path):
        out = tmp_path / "runs"
        cfg = make_config(out, noise_grid=((0.0, 0.0), (0.05, 0.05), (0.2, 0.2)))
        run_figure_experiment(cfg, threads=1)
        snapshot = {p.name: p.read_bytes() for p in out.iterdir()}
        run_figure_experiment(cfg, threads=2)
        again = {p.name: p.read_bytes() for p in out.iterdir()}
        assert snapshot == again

    def test_grid_required(self):
        with pytest.raises(ValueError, match="grid"):
            run_figure_experiment(make_config(noise_grid=None))


class TestTable2:
    def test_rows_and_csv(self, tmp_path):
        cfg = make_config(tmp_path, noise_grid=((0.0, 0.0), (0.0, 1.0)))
        rows = run_table2(cfg)
        assert [(r.sigma_a, r.sigma_b) for r in rows] == [(0.0, 0.0), (0.0, 1.0)]
        clean = rows[0]
        assert clean.theoretical_horizon == 0.0
        assert clean.empirical_horizon <= 1e-10
        noisy = rows[1]
        assert noisy.theoretical_horizon > 0
        assert noisy.empirical_horizon <= noisy.theoretical_horizon
        lines = (tmp_path / "table2.csv").read_text().splitlines()
        assert lines[0] == "sigma_a,sigma_b,kappa,r_tilde,theo_horizon,emp_horizon"
        assert len(lines) == 3

    def test_rhs_only_horizon_independent_of_matrix_draw(self):
        cfg = make_config(noise_grid=((1.0, 0.0),))
        rows = run_table2(cfg)
        # with sigma_b = 0 the horizon only carries the matrix term
        sys_ = generate_system(SPEC, cfg.master_seed)
        noisy = additive_noise(sys_, 1.0, 0.0, cfg.master_seed)
        mism = noisy.matrix_noise() @ sys_.x_ls
        from noisyrk import sigma_min_nonzero

        expected = float(mism @ mism) / sigma_min_nonzero(noisy.a_tilde) ** 2
        assert rows[0].theoretical_horizon == pytest.approx(expected, rel=1e-12)

    def test_default_grid_is_standard(self):
        cfg = make_config(noise_grid=None)
        assert cfg.noise_grid is None
        assert len(TABLE2_GRID) == 10

    def test_non_additive_rejected(self):
        cfg = make_config(noise_model=NoiseModel.MULTIPLICATIVE, noise_grid=((0.0, 0.0),))
        with pytest.raises(ValueError, match="additive"):
            run_table2(cfg)

    def test_diagonal_horizon_monotone_at_desk_scale(self):
        spec = SpectrumSpec(m=200, n=100, r=100, sigma_min=5.0, sigma_max=50.0)
        sys_ = generate_system(spec, seed=1)
        x0 = initial_iterate(sys_.a, RkConfig(max_iterations=1, seed=1), 0)
        horizons = []
        for s in (0.005, 0.01, 0.05, 0.1, 0.5):
            noisy = additive_noise(sys_, s, s, seed=1)
            horizons.append(bound_additive(sys_, noisy, x0, [0]).horizon)
        assert all(a < b for a, b in zip(horizons, horizons[1:]))


class TestPreconditionerDemo:
    def test_small_flat_top_constants(self, tmp_path):
        spec = SpectrumSpec(m=20, n=10, r=10, sigma_min=1.0, sigma_max=4.0, spacing=Spacing.FLAT_TOP)
        rk = RkConfig(max_iterations=2000, trials=4, record_stride=100, seed=3)
        demo = run_preconditioner_demo(spec, tau=5.0, rk=rk, master_seed=3, output_dir=tmp_path)
        assert demo.r == pytest.approx(9 * 16 + 1, rel=1e-9)
        assert demo.r_tilde == pytest.approx(10.0, rel=1e-9)
        assert demo.k_noisy < demo.k_noiseless
        assert (tmp_path / "traj_noiseless.csv").exists()
        assert (tmp_path / "traj_noisy.csv").exists()
        summary = json.loads((tmp_path / "preconditioner.json").read_text())
        assert summary["k_noiseless"] == demo.k_noiseless

    def test_toy_override_count(self):
        spec = SpectrumSpec(m=3, n=3, r=3, sigma_min=1.0, sigma_max=3.0, spacing=Spacing.FLAT_TOP)
        rk = RkConfig(max_iterations=10, trials=2, seed=1)
        demo = run_preconditioner_demo(spec, tau=0.5, rk=rk, master_seed=2, initial_sq_error=1e6)
        assert demo.k_noiseless == 269

    def test_shared_start_points(self):
        spec = SpectrumSpec(m=20, n=10, r=10, sigma_min=1.0, sigma_max=4.0, spacing=Spacing.FLAT_TOP)
        rk = RkConfig(max_iterations=50, trials=3, record_stride=50, seed=3)
        demo = run_preconditioner_demo(spec, tau=5.0, rk=rk, master_seed=3)
        start_noisy = demo.traj_noisy.per_trial_squared_error[:, 0]
        start_clean = demo.traj_noiseless.per_trial_squared_error[:, 0]
        assert np.array_equal(start_noisy, start_clean)


class TestConfigSerialization:
    def test_roundtrip(self, tmp_path):
        cfg = make_config(
            tmp_path,
            noise_grid=((0.0, 0.0), (0.1, 0.2)),
            bound_kinds=(BoundKind.ADDITIVE, BoundKind.RHS_NOISE),
        )
        back = ExperimentConfig.from_dict(cfg.to_dict())
        assert back.spectrum == cfg.spectrum
        assert back.noise_grid == cfg.noise_grid
        assert back.bound_kinds == cfg.bound_kinds
        assert back.rk.max_iterations == cfg.rk.max_iterations
        assert back.rk.seed == cfg.rk.seed
        assert back.master_seed == cfg.master_seed

    def test_paper_scale_swaps_dimensions(self):
        cfg = make_config()
        big = apply_paper_scale(cfg)
        assert (big.spectrum.m, big.spectrum.n, big.spectrum.r) == (500, 300, 300)
        assert big.rk.max_iterations == 300_000
        assert big.rk.trials == 10
        assert big.spectrum.sigma_min == cfg.spectrum.sigma_min
