"""Homogeneous ReLU networks, the sample loss and training."""

import math

import numpy as np
import pytest
import torch

from jsrlab.errors import ShapeError
from jsrlab.schemas import NetworkParams, SampleSet, TrainConfig
from jsrlab.tools import neural as neural_module
from jsrlab.tools.neural import (
    HomogeneousReLUNet,
    evaluate_loss,
    forward,
    loss,
    project_output_nonneg,
    sample_sphere,
    surrogate_loss,
    train,
)


def _random_params(rng, dims, nonnegative_output=True) -> NetworkParams:
    layers = [rng.standard_normal((d_out, d_in)).tolist() for d_in, d_out in zip(dims[:-1], dims[1:])]
    output = rng.standard_normal(dims[-1])
    if nonnegative_output:
        output = np.abs(output)
    return NetworkParams(layers=layers, output=output.tolist())


def _quick_config(**overrides) -> TrainConfig:
    values = {"hidden_layers": 1, "width": 5, "n_samples": 40, "n_seeds": 1, "epochs": 60, "eval_every": 5}
    values.update(overrides)
    return TrainConfig(**values)


class TestForward:
    def test_positive_homogeneity(self, rng):
        for _ in range(100):
            params = _random_params(rng, [3, 6, 4], nonnegative_output=False)
            x = rng.standard_normal(3)
            c = float(rng.uniform(0, 10))
            assert forward(params, c * x) == pytest.approx(c * forward(params, x), rel=1e-10, abs=1e-12)

    def test_batch_matches_single(self, rng):
        params = _random_params(rng, [2, 5])
        points = rng.standard_normal((7, 2))
        batch = forward(params, points)
        np.testing.assert_allclose(batch, [forward(params, p) for p in points])

    def test_l1_network(self, l1_network):
        assert forward(l1_network, np.array([3.0, -4.0])) == pytest.approx(7.0)

    def test_dimension_mismatch(self, l1_network):
        with pytest.raises(ShapeError):
            forward(l1_network, np.ones(3))

    def test_torch_and_numpy_agree(self, rng):
        net = HomogeneousReLUNet(3, 8, hidden_layers=2, generator=torch.Generator().manual_seed(3))
        x = rng.standard_normal((20, 3))
        with torch.no_grad():
            expected = net(torch.as_tensor(x)).numpy()
        np.testing.assert_allclose(forward(net.to_params(), x), expected, rtol=1e-12, atol=1e-14)

    def test_params_round_trip_through_module(self, rng):
        params = _random_params(rng, [2, 4, 4])
        assert HomogeneousReLUNet.from_params(params).to_params() == params

    def test_initial_output_nonnegative(self):
        net = HomogeneousReLUNet(4, 10, generator=torch.Generator().manual_seed(0))
        assert net.to_params().is_output_nonnegative


class TestLoss:
    def test_l1_network_against_brute_force(self, l1_network, sigma2):
        samples = sample_sphere(2, 64, seed=5)
        points = samples.to_array()
        expected = max(
            np.abs(a @ x).sum() / np.abs(x).sum() for a in sigma2.arrays() for x in points
        )
        assert loss(l1_network, samples, sigma2) == pytest.approx(expected, rel=1e-12)

    def test_argmax_is_reported(self, l1_network, sigma2):
        samples = sample_sphere(2, 32, seed=2)
        evaluation = evaluate_loss(l1_network, samples, sigma2)
        a = sigma2.arrays()[evaluation.argmax_matrix - 1]
        x = samples.to_array()[evaluation.argmax_sample]
        assert np.abs(a @ x).sum() / np.abs(x).sum() == pytest.approx(evaluation.value)
        assert evaluation.degenerate_count == 0

    def test_scale_invariance(self, rng, sigma2):
        checked = 0
        while checked < 100:
            params = _random_params(rng, [2, 6])
            samples = sample_sphere(2, 30, seed=int(rng.integers(1_000_000)))
            if forward(params, samples.to_array()).min() < 1e-3:
                continue
            base = evaluate_loss(params, samples, sigma2)
            c = float(rng.uniform(0.1, 5.0))
            assert loss(params, samples, sigma2.scaled(c)) == pytest.approx(c * base.value, rel=1e-10)
            rescaled = params.model_copy(update={"output": [c * w for w in params.output]})
            assert loss(rescaled, samples, sigma2) == pytest.approx(base.value, rel=1e-10)
            checked += 1

    def test_degenerate_samples_counted(self, sigma2):
        # V vanishes on the half-plane x_1 <= 0
        params = NetworkParams(layers=[[[1.0, 0.0]]], output=[1.0])
        samples = SampleSet(points=[[1.0, 0.0], [-1.0, 0.0]])
        assert evaluate_loss(params, samples, sigma2).degenerate_count == 1


class TestProjection:
    def test_idempotent(self, rng):
        for _ in range(100):
            params = _random_params(rng, [3, 5], nonnegative_output=False)
            once = project_output_nonneg(params)
            assert project_output_nonneg(once) == once
            assert once.is_output_nonnegative
            assert once.layers == params.layers


class TestSampling:
    def test_unit_norm_and_seeded(self):
        first = sample_sphere(8, 100, seed=11)
        np.testing.assert_allclose(np.linalg.norm(first.to_array(), axis=1), 1.0, atol=1e-12)
        assert sample_sphere(8, 100, seed=11) == first
        assert sample_sphere(8, 100, seed=12) != first

    def test_uniform_moments(self):
        for seed in range(100):
            n = 2 + seed % 7
            points = sample_sphere(n, 4000, seed=seed).to_array()
            assert np.linalg.norm(points.mean(axis=0)) < 0.1
            assert abs(float((points[:, 0] > 0).mean()) - 0.5) < 0.05

    def test_schema_rejects_off_sphere_points(self):
        with pytest.raises(ValueError):
            SampleSet(points=[[1.0, 1.0]])


class TestSurrogate:
    def test_upper_bounds_exact_loss(self, sigma2):
        net = HomogeneousReLUNet(2, 6, generator=torch.Generator().manual_seed(1))
        samples = sample_sphere(2, 50, seed=0)
        exact = loss(net.to_params(), samples, sigma2)
        for temperature in (1.0, 1e-2, 1e-4):
            with torch.no_grad():
                value = surrogate_loss(
                    net,
                    torch.as_tensor(samples.to_array()),
                    torch.as_tensor(sigma2.arrays()),
                    temperature,
                    1e-6,
                    hinge_weight=0.0,
                ).item()
            assert exact - 1e-9 <= value <= exact + temperature * math.log(2 * 50) + 1e-9

    def test_gradient_matches_central_differences(self, rng, sigma2):
        matrices = torch.as_tensor(sigma2.arrays())
        h = 1e-6
        checked = 0
        while checked < 100:
            seed = int(rng.integers(1_000_000))
            net = HomogeneousReLUNet(2, 5, int(rng.integers(1, 3)), torch.Generator().manual_seed(seed))
            samples = torch.as_tensor(sample_sphere(2, 20, seed=seed).to_array())
            with torch.no_grad():
                if net(samples).min().item() < 0.05:
                    continue  # V(x) near the eps floor
            inputs = torch.cat([samples, torch.einsum("mij,nj->mni", matrices, samples).reshape(-1, 2)])

            def value() -> float:
                return surrogate_loss(net, samples, matrices, 1.0, 1e-6).item()

            def pattern() -> torch.Tensor:
                signs, hidden = [], inputs
                for layer in net.hidden:
                    pre = layer(hidden)
                    signs.append((pre > 0).reshape(-1))
                    hidden = torch.relu(pre)
                return torch.cat(signs)

            net.zero_grad()
            surrogate_loss(net, samples, matrices, 1.0, 1e-6).backward()
            parameters = list(net.parameters())
            weight = parameters[int(rng.integers(len(parameters)))]
            index = tuple(int(rng.integers(size)) for size in weight.shape)
            analytic = weight.grad[index].item()

            with torch.no_grad():
                original = weight[index].item()
                weight[index] = original + h
                plus, plus_pattern = value(), pattern()
                weight[index] = original - h
                minus, minus_pattern = value(), pattern()
                weight[index] = original
            if not torch.equal(plus_pattern, minus_pattern):
                continue  # a ReLU switches inside the difference stencil
            assert (plus - minus) / (2 * h) == pytest.approx(analytic, rel=1e-4, abs=1e-7)
            checked += 1


class TestTrain:
    def test_result_consistency(self, sigma2):
        result = train(_quick_config(), sigma2, seed=0)
        final = [p.loss for p in result.trace if p.sample_count == len(result.samples)]
        assert result.best_loss == pytest.approx(min(final))
        assert result.best_params.is_output_nonnegative
        assert loss(result.best_params, result.samples, sigma2) == pytest.approx(result.best_loss, rel=1e-12)
        assert result.trace[0].epoch == 0
        assert result.epochs_run == 60

    def test_deterministic(self, sigma2):
        first = train(_quick_config(), sigma2, seed=4)
        second = train(_quick_config(), sigma2, seed=4)
        assert first.best_loss == second.best_loss
        assert first.samples == second.samples

    def test_incremental_schedule(self, sigma2):
        config = _quick_config(n_samples=50, epochs=40).with_default_incremental()
        assert config.initial_samples == 10
        result = train(config, sigma2, seed=1)
        assert len(result.samples) == 50
        counts = [p.sample_count for p in result.trace]
        assert counts == sorted(counts)
        assert sum("enlarged" in event for event in result.events) == 4
        assert loss(result.best_params, result.samples, sigma2) == pytest.approx(result.best_loss, rel=1e-12)

    def test_time_budget(self, sigma2):
        result = train(_quick_config(time_budget=1e-9), sigma2, seed=0)
        assert result.epochs_run == 1
        assert any("time budget" in event for event in result.events)

    def test_improves_on_initialization(self, sigma2):
        result = train(_quick_config(epochs=200, width=10), sigma2, seed=3)
        assert result.best_loss <= result.trace[0].loss

    def test_best_loss_nonincreasing_over_epochs(self, sigma2):
        for seed in range(20):
            result = train(_quick_config(width=3, n_samples=20, epochs=30), sigma2, seed)
            running = np.minimum.accumulate([point.loss for point in result.trace])
            assert (np.diff(running) <= 0).all()
            assert running[-1] == result.best_loss
            assert all(result.best_loss <= point.loss for point in result.trace)

    def test_output_nonnegative_after_every_step(self, sigma2, monkeypatch):
        observed = []
        original = neural_module.surrogate_loss

        def recording(net, *args, **kwargs):
            observed.append(float(net.output.weight.min()))
            return original(net, *args, **kwargs)

        monkeypatch.setattr(neural_module, "surrogate_loss", recording)
        train(_quick_config(epochs=50, learning_rate=0.5), sigma2, seed=2)
        assert len(observed) == 50
        assert min(observed) >= 0.0


class TestIncrementalSchedule:
    def test_rejects_steps_after_last_epoch(self):
        with pytest.raises(ValueError):
            TrainConfig(width=4, n_samples=50, epochs=10, incremental=[{"epoch": 20, "count": 40}])

    def test_default_schedule_fits_short_runs(self, sigma2):
        config = _quick_config(n_samples=50, epochs=3).with_default_incremental()
        assert all(step.epoch <= 3 for step in config.incremental)
        assert len(train(config, sigma2, seed=0).samples) == 50

    def test_enlargement_survives_non_finite_surrogate(self, sigma2, monkeypatch):
        def diverging(*args, **kwargs):
            return torch.tensor(float("nan"), dtype=torch.float64)

        monkeypatch.setattr(neural_module, "surrogate_loss", diverging)
        config = _quick_config(n_samples=50, epochs=20).with_default_incremental()
        result = train(config, sigma2, seed=1)
        assert len(result.samples) == 50
        assert sum("enlarged" in event for event in result.events) == 4
        assert sum("reinitialized" in event for event in result.events) == 20
        assert loss(result.best_params, result.samples, sigma2) == pytest.approx(result.best_loss, rel=1e-12)


@pytest.mark.slow
class TestReproduction:
    def test_sigma2_one_layer_ten_neurons(self, sigma2):
        config = TrainConfig(hidden_layers=1, width=10, n_samples=500, n_seeds=20)
        losses = [train(config, sigma2, seed).best_loss for seed in range(20)]
        assert min(losses) <= 8.80
        assert float(np.mean(losses)) <= 9.0

    def test_sigma8_overfits(self, sigma8):
        config = TrainConfig(hidden_layers=1, width=30, n_samples=500, n_seeds=10)
        losses = [train(config, sigma8, seed).best_loss for seed in range(10)]
        assert min(losses) < 1.0
