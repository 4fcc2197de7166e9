"""Smoke tests for the _tudiff extension module."""

import math

import numpy as np
import pytest

import tudiff as td


def test_schedule_arrays_and_identities():
    s = td.make_schedule("uniform-radial", 100)
    assert s.T == 100
    np.testing.assert_allclose(s.c**2 + s.sigma**2, 1.0, atol=1e-12)
    np.testing.assert_allclose(np.diff(s.sigma), 0.01, atol=1e-12)
    assert td.validate_schedule(s, 1e-12) == []

    conv = td.make_schedule("conventional", 1000)
    assert conv.alpha_bar[-1] == pytest.approx(4.035829765375676e-05, rel=1e-9)

    with pytest.raises(Exception):
        td.make_schedule("cosine", 10)


def test_geometry_surface():
    assert td.rho_epsilon(0.01) == pytest.approx(1.2349089035228469)
    assert td.kappa_epsilon(0.01) == pytest.approx(0.2101089107188102)
    assert td.prop3_min_dt(0.01) == pytest.approx(0.1907103644166163)

    amb = td.AmbientConfig(1024, 2)
    s = td.make_schedule("conventional", 1000)
    rep = td.audit_disjointness(s, amb, 0.01)
    assert not rep.all_pass()
    assert rep.first_fail == 3
    assert rep.last_fail == 999

    cov = td.mc_shell_coverage(td.make_schedule("uniform-radial", 4), 2,
                               td.AmbientConfig(3, 2), 0.04, 20000, 1)
    closed = 2 * (0.5 * math.erfc(-math.sqrt(1.48) / math.sqrt(2)) -
                  0.5 * math.erfc(-math.sqrt(0.6) / math.sqrt(2)))
    assert cov == pytest.approx(closed, abs=0.02)


def test_dataset_and_embedding():
    roll = td.swiss_roll(256, 0.01, seed=3)
    assert roll.data.shape == (256, 2)
    assert roll.d_prime == 2
    np.testing.assert_allclose(roll.data.mean(axis=0), 0.0, atol=1e-12)
    assert np.linalg.norm(roll.data, axis=1).max() == pytest.approx(1.0)

    wide = td.embed(roll, 32)
    assert wide.data.shape == (256, 32)
    assert td.distance_to_M0(wide.data[0], 2) == 0.0

    mix = td.gaussian_mixture(64, [(0.5, 0.0), (-0.5, 0.0)], scale=0.1, seed=7)
    assert len(mix.labels) == 64
    assert set(mix.labels) <= {0, 1}


def test_forward_and_reverse_kernels():
    s = td.make_schedule("conventional", 20)
    amb = td.AmbientConfig(8, 2)
    ortho = td.axis_ortho_config(amb, 0.7)
    rng = np.random.default_rng(0)
    x0 = np.zeros(8)
    x0[:2] = [0.4, -0.2]
    z = rng.standard_normal(8)

    xk = td.forward_plain(x0, 5, s, z)
    back = td.ddim_step_plain(xk, z, s, 5)
    np.testing.assert_allclose(back, td.forward_plain(x0, 4, s, z), atol=1e-12)

    xo = td.forward_ortho(x0, 5, s, ortho, z)
    assert xo @ ortho.direction == pytest.approx(s.grid[5] * 0.7, abs=1e-10)
    z_perp = td.project_ortho(z, ortho)
    back_o = td.ddim_step_ortho(xo, z_perp, s, ortho, 5)
    np.testing.assert_allclose(back_o, td.forward_ortho(x0, 4, s, ortho, z), atol=1e-12)


def test_train_sample_eval_checkpoint(tmp_path):
    amb = td.AmbientConfig(8, 2)
    cfg = td.TrainConfig()
    cfg.schedule = td.make_schedule("uniform-radial", 8)
    cfg.ambient = amb
    cfg.hidden = [16, 16]
    cfg.epochs = 5
    cfg.batch_size = 64
    cfg.seed = 1

    data = td.embed(td.swiss_roll(64, 0.01, seed=1), 8)
    model, losses = td.train(cfg, data)
    assert len(losses) == 5
    assert all(math.isfinite(v) for v in losses)
    assert model.parameter_count == 8 * 16 + 16 + 16 * 16 + 16 + 16 * 8 + 8

    out = td.sample(model, cfg.schedule, None, amb, n=16, seed=2)
    assert out.data.shape == (16, 8)
    again = td.sample(model, cfg.schedule, None, amb, n=16, seed=2)
    np.testing.assert_array_equal(out.data, again.data)

    report = td.evaluate(out, data, td.EvalSettings(d_prime=2, n_projections=16, seed=0))
    assert report.sliced_distance >= 0.0
    assert math.isfinite(report.mean_manifold_distance)

    ckpt = td.Checkpoint()
    ckpt.ambient = amb
    ckpt.schedule = cfg.schedule
    ckpt.model = model
    path = str(tmp_path / "model.tudm")
    td.save_checkpoint(path, ckpt)
    back = td.load_checkpoint(path)
    redo = td.sample(back.model, back.schedule, None, back.ambient, n=16, seed=2)
    np.testing.assert_array_equal(out.data, redo.data)

    bad = tmp_path / "junk.tudm"
    bad.write_bytes(b"not a checkpoint")
    with pytest.raises(td.CheckpointError):
        td.load_checkpoint(str(bad))
