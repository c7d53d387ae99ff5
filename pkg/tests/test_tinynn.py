"""
Test suite for the numpy networks

Forward and backward passes of the MLP against hand-written and finite
difference references, SGD, the subset registry, checkpoints and the
Gaussian policy head.
"""

import numpy as np
import pytest

from targetnet.core.errors import ArgumentError, ConfigError, ContractError, NumericError, ShapeError
from targetnet.core.params import ParamSubset
from targetnet.nn import (
    LOG_STD_ID,
    LOG_STD_MAX,
    LOG_STD_MIN,
    GaussianPolicy,
    Mlp,
    backward,
    clip_grad_norm,
    forward,
    sgd_step,
)
from targetnet.utils import serialization


def output_dot(net, x, upstream):
    return float(np.sum(net.predict(x) * upstream))


def finite_difference(fn, array, index, h=1e-6):
    original = array.flat[index]
    array.flat[index] = original + h
    plus = fn()
    array.flat[index] = original - h
    minus = fn()
    array.flat[index] = original
    return (plus - minus) / (2.0 * h)


class TestMlpForward:
    """Test cases for the forward pass"""

    def test_zero_weights_give_zero(self):
        """Test an all-zero network outputs zero"""
        net = Mlp((3, 5, 2))
        net.assign([ParamSubset(s.id, np.zeros(s.size)) for s in net.subsets()])
        np.testing.assert_array_equal(net.forward(np.ones((4, 3))), np.zeros((4, 2)))

    def test_matches_explicit_formula(self, rng):
        """Test the forward pass against an explicit two-layer evaluation"""
        net = Mlp((3, 4, 2), rng=rng)
        x = rng.normal(size=(5, 3))
        expected = np.tanh(x @ net.weights[0] + net.biases[0]) @ net.weights[1] + net.biases[1]
        np.testing.assert_allclose(net.forward(x), expected, rtol=1e-14)

    def test_identity_layer_at_zero(self):
        """Test an identity-weighted layer maps a zero input to zero"""
        net = Mlp((3, 3))
        net.assign([ParamSubset("l0.weight", np.eye(3)), ParamSubset("l0.bias", np.zeros(3))])
        np.testing.assert_array_equal(net.forward(np.zeros(3)), np.zeros(3))

    def test_single_input(self, rng):
        """Test a 1-D input gives a 1-D output equal to the batched row"""
        net = Mlp((3, 4, 2), rng=rng)
        x = rng.normal(size=3)
        np.testing.assert_array_equal(net.forward(x), net.forward(x[None, :])[0])
        assert net.forward(x).shape == (2,)

    def test_input_shape_checked(self):
        """Test a wrong input width raises ShapeError"""
        with pytest.raises(ShapeError):
            Mlp((3, 2)).forward(np.ones(4))

    def test_invalid_sizes(self):
        """Test degenerate layer sizes are rejected"""
        with pytest.raises(ConfigError):
            Mlp((3,))
        with pytest.raises(ConfigError):
            Mlp((3, 0, 1))

    def test_zero_output_layer(self, rng):
        """Test zero_output starts the last layer at zero"""
        net = Mlp((2, 8, 1), rng=rng, zero_output=True)
        assert np.all(net.weights[-1] == 0.0)
        assert np.any(net.weights[0] != 0.0)


class TestMlpBackward:
    """Test cases for reverse-mode gradients"""

    def test_linear_neuron(self):
        """Test the gradient of a single affine unit is (x, 1)"""
        net = Mlp((3, 1))
        x = np.array([1.0, -2.0, 0.5])
        net.forward(x)
        grads = net.backward(np.array([1.0]))
        np.testing.assert_array_equal(grads["l0.weight"], x)
        np.testing.assert_array_equal(grads["l0.bias"], [1.0])

    def test_zero_upstream(self, rng):
        """Test a zero upstream gradient gives zero gradients"""
        net = Mlp((3, 4, 2), rng=rng)
        net.forward(rng.normal(size=(2, 3)))
        for grad in net.backward(np.zeros((2, 2))).values():
            np.testing.assert_array_equal(grad, 0.0)

    def test_finite_differences(self):
        """Test analytic gradients against central differences on random networks"""
        gen = np.random.default_rng(7)
        for _ in range(100):
            sizes = [int(gen.integers(1, 5)) for _ in range(int(gen.integers(2, 5)))]
            net = Mlp(sizes, rng=gen)
            x = gen.normal(size=(int(gen.integers(1, 4)), sizes[0]))
            upstream = gen.normal(size=(x.shape[0], sizes[-1]))
            net.forward(x)
            grads = net.backward(upstream)

            k = int(gen.integers(0, net.n_layers))
            for array, key in ((net.weights[k], f"l{k}.weight"), (net.biases[k], f"l{k}.bias")):
                index = int(gen.integers(0, array.size))
                numeric = finite_difference(lambda: output_dot(net, x, upstream), array, index)
                analytic = grads[key][index]
                assert abs(numeric - analytic) <= 1e-4 * max(1.0, abs(analytic))

    def test_gradient_keys_match_registry(self, rng):
        """Test backward returns one gradient per registered subset"""
        net = Mlp((2, 3, 3, 1), rng=rng)
        net.forward(np.ones(2))
        grads = net.backward(np.ones(1))
        assert list(grads) == net.param_ids
        for subset in net.subsets():
            assert grads[subset.id].shape == (subset.size,)

    def test_backward_without_forward(self):
        """Test backward before any forward pass is a contract error"""
        with pytest.raises(ContractError):
            Mlp((2, 1)).backward(np.ones(1))

    def test_stale_cache(self, rng):
        """Test backward after a parameter change is a contract error"""
        net = Mlp((2, 3, 1), rng=rng)
        net.forward(np.ones(2))
        grads = net.backward(np.ones(1))
        net.sgd_step(grads, 0.1)
        with pytest.raises(ContractError):
            net.backward(np.ones(1))

    def test_predict_keeps_cache(self, rng):
        """Test predict does not replace the cached forward pass"""
        net = Mlp((2, 3, 1), rng=rng)
        x = np.array([0.3, -0.4])
        net.forward(x)
        net.predict(np.array([5.0, 5.0]))
        np.testing.assert_array_equal(net.cached_input(), x)

    def test_module_backward_checks_input(self, rng):
        """Test the functional backward refuses an input without a cached pass"""
        net = Mlp((2, 3, 1), rng=rng)
        x = np.array([0.3, -0.4])
        forward(net, x)
        grads = backward(net, x, np.ones(1))
        assert set(grads) == set(net.param_ids)
        with pytest.raises(ContractError):
            backward(net, np.array([0.0, 0.0]), np.ones(1))

    def test_upstream_shape_checked(self, rng):
        """Test a mismatched upstream gradient raises ShapeError"""
        net = Mlp((2, 3, 1), rng=rng)
        net.forward(np.ones((4, 2)))
        with pytest.raises(ShapeError):
            net.backward(np.ones((3, 1)))


class TestSgdAndRegistry:
    """Test cases for SGD, the subset registry and checkpoints"""

    def test_sgd_example(self):
        """Test theta = 1, g = 2, lr = 0.1 gives 0.8"""
        net = Mlp((1, 1))
        net.assign([ParamSubset("l0.weight", [1.0]), ParamSubset("l0.bias", [1.0])])
        sgd_step(net, {"l0.weight": np.array([2.0]), "l0.bias": np.array([2.0])}, 0.1)
        assert net.weights[0][0, 0] == pytest.approx(0.8)
        assert net.biases[0][0] == pytest.approx(0.8)

    def test_sgd_no_op(self, rng):
        """Test zero gradients or a zero learning rate leave the network unchanged"""
        net = Mlp((2, 3, 1), rng=rng)
        before = [s.values.copy() for s in net.subsets()]
        zeros = {s.id: np.zeros(s.size) for s in net.subsets()}
        ones = {s.id: np.ones(s.size) for s in net.subsets()}
        net.sgd_step(zeros, 0.1).sgd_step(ones, 0.0)
        for subset, values in zip(net.subsets(), before):
            np.testing.assert_array_equal(subset.values, values)

    def test_sgd_key_mismatch(self):
        """Test missing or unknown gradient keys are argument errors"""
        net = Mlp((1, 1))
        with pytest.raises(ArgumentError):
            net.sgd_step({"l0.weight": np.array([2.0])}, 0.1)
        with pytest.raises(ArgumentError):
            net.sgd_step({"l0.weight": np.zeros(1), "l0.bias": np.zeros(1), "l1.bias": np.zeros(1)}, 0.1)

    def test_registry_is_a_bijection(self, rng):
        """Test subsets cover every parameter exactly once"""
        net = Mlp((4, 5, 3), rng=rng)
        subsets = net.subsets()
        assert [s.id for s in subsets] == ["l0.weight", "l0.bias", "l1.weight", "l1.bias"]
        assert sum(s.size for s in subsets) == net.n_params == 4 * 5 + 5 + 5 * 3 + 3

    def test_assign_round_trip(self, rng):
        """Test assigning another network's subsets reproduces its outputs"""
        a, b = Mlp((3, 4, 1), rng=rng), Mlp((3, 4, 1), rng=rng)
        b.assign(a.subsets())
        x = rng.normal(size=(6, 3))
        np.testing.assert_array_equal(a.forward(x), b.forward(x))

    def test_assign_errors(self):
        """Test unknown ids and wrong sizes are rejected"""
        net = Mlp((2, 1))
        with pytest.raises(ArgumentError):
            net.assign([ParamSubset("l5.weight", [1.0, 2.0])])
        with pytest.raises(ArgumentError):
            net.assign([ParamSubset("theta", [1.0])])
        with pytest.raises(ShapeError):
            net.assign([ParamSubset("l0.weight", [1.0])])

    def test_copy_is_independent(self, rng):
        """Test a copy does not share parameter arrays"""
        net = Mlp((2, 3, 1), rng=rng)
        clone = net.copy()
        net.weights[0][0, 0] += 1.0
        assert clone.weights[0][0, 0] != net.weights[0][0, 0]

    def test_max_abs(self):
        """Test the largest magnitude is reported with its subset, inf for NaN"""
        net = Mlp((1, 1))
        net.assign([ParamSubset("l0.weight", [-3.0]), ParamSubset("l0.bias", [2.0])])
        assert net.max_abs() == (3.0, "l0.weight")
        net.biases[0] = np.array([np.nan])
        assert net.max_abs() == (float("inf"), "l0.bias")

    def test_clip_grad_norm(self):
        """Test clipping rescales all subsets together and leaves small gradients alone"""
        grads = {"l0.weight": np.array([3.0]), "l0.bias": np.array([4.0])}
        clipped, norm = clip_grad_norm(grads, 1.0)
        assert norm == 5.0
        np.testing.assert_allclose(clipped["l0.weight"], [0.6])
        np.testing.assert_allclose(clipped["l0.bias"], [0.8])
        unchanged, _ = clip_grad_norm(grads, 10.0)
        assert unchanged is grads
        with pytest.raises(ConfigError):
            clip_grad_norm(grads, 0.0)
        with pytest.raises(NumericError):
            clip_grad_norm({"l0.weight": np.array([np.inf])}, 1.0)

    def test_state_dict_round_trip(self, rng):
        """Test a checkpoint survives JSON serialization exactly"""
        net = Mlp((3, 4, 2), rng=rng, name="value")
        doc = serialization.loads(serialization.dumps(net.state_dict()))
        restored = Mlp.from_state_dict(doc)
        assert restored.name == "value"
        x = rng.normal(size=(5, 3))
        np.testing.assert_array_equal(restored.forward(x), net.forward(x))

    def test_state_dict_mismatch(self, rng):
        """Test loading into a differently shaped network fails"""
        doc = Mlp((3, 4, 2), rng=rng).state_dict()
        with pytest.raises(ShapeError):
            Mlp((3, 5, 2)).load_state_dict(doc)
        with pytest.raises(ArgumentError):
            Mlp.from_state_dict({"format": "other"})


class TestGaussianPolicy:
    """Test cases for the Gaussian policy head"""

    @pytest.fixture
    def policy(self, rng):
        policy = GaussianPolicy(2, 1, hidden=(4,), rng=rng)
        policy.net.weights[-1] = rng.normal(size=policy.net.weights[-1].shape)
        policy.log_std = np.array([-0.3])
        return policy

    def test_fresh_policy(self, rng):
        """Test a fresh policy has zero mean and unit standard deviation"""
        policy = GaussianPolicy(3, 2, rng=rng)
        np.testing.assert_array_equal(policy.mean(np.ones(3)), np.zeros(2))
        np.testing.assert_array_equal(policy.std, np.ones(2))
        expected = -np.log(2.0 * np.pi)
        assert policy.log_prob(np.ones(3), np.zeros(2)) == pytest.approx(expected)

    def test_param_ids(self, policy):
        """Test the log_std vector is registered after the mean network"""
        assert policy.param_ids == ["l0.weight", "l0.bias", "l1.weight", "l1.bias", LOG_STD_ID]
        assert [s.id for s in policy.subsets()] == policy.param_ids

    def test_action_shape_checked(self, policy):
        """Test log_prob rejects mismatched actions"""
        with pytest.raises(ShapeError):
            policy.log_prob(np.ones((3, 2)), np.ones((3, 2)))

    def test_sample_statistics(self, policy):
        """Test samples are centred on the mean with the policy's spread"""
        obs = np.array([0.2, -0.1])
        gen = np.random.default_rng(3)
        samples = np.array([policy.sample(obs, gen) for _ in range(20000)])
        assert samples.mean() == pytest.approx(policy.mean(obs)[0], abs=0.02)
        assert samples.std() == pytest.approx(np.exp(-0.3), rel=0.03)

    def test_log_prob_grad_finite_differences(self, policy, rng):
        """Test the weighted log-likelihood gradient against central differences"""
        obs = rng.normal(size=(4, 2))
        action = rng.normal(size=(4, 1))
        weights = rng.normal(size=4)

        def objective():
            return float(np.sum(weights * policy.log_prob(obs, action)))

        grads = policy.log_prob_grad(obs, action, weights)
        numeric = finite_difference(objective, policy.log_std, 0)
        assert numeric == pytest.approx(grads[LOG_STD_ID][0], rel=1e-5, abs=1e-7)
        for k in range(policy.net.n_layers):
            for array, key in ((policy.net.weights[k], f"l{k}.weight"), (policy.net.biases[k], f"l{k}.bias")):
                for index in range(array.size):
                    numeric = finite_difference(objective, array, index)
                    assert numeric == pytest.approx(grads[key][index], rel=1e-4, abs=1e-6)

    def test_sgd_moves_log_std(self, policy):
        """Test SGD updates log_std along with the mean network"""
        grads = {pid: np.zeros(s.size) for pid, s in zip(policy.param_ids, policy.subsets())}
        grads[LOG_STD_ID] = np.array([1.0])
        policy.sgd_step(grads, 0.5)
        np.testing.assert_allclose(policy.log_std, [-0.8])

    def test_sgd_keeps_log_std_in_range(self, policy):
        """Test large log_std steps stop at the configured bounds"""
        grads = {pid: np.zeros(s.size) for pid, s in zip(policy.param_ids, policy.subsets())}
        grads[LOG_STD_ID] = np.array([-1e6])
        policy.sgd_step(grads, 1.0)
        assert policy.log_std[0] == LOG_STD_MAX
        grads[LOG_STD_ID] = np.array([1e6])
        policy.sgd_step(grads, 1.0)
        assert policy.log_std[0] == LOG_STD_MIN

    def test_state_dict_round_trip(self, policy, rng):
        """Test policy checkpoints carry log_std"""
        doc = serialization.loads(serialization.dumps(policy.state_dict()))
        restored = GaussianPolicy.from_state_dict(doc)
        obs = rng.normal(size=(3, 2))
        action = rng.normal(size=(3, 1))
        np.testing.assert_array_equal(restored.log_std, policy.log_std)
        np.testing.assert_array_equal(restored.log_prob(obs, action), policy.log_prob(obs, action))

    def test_max_abs_includes_log_std(self, rng):
        """Test a large log_std is reported as the largest parameter"""
        policy = GaussianPolicy(2, 1, hidden=(2,), rng=rng)
        policy.log_std = np.array([50.0])
        assert policy.max_abs() == (50.0, LOG_STD_ID)


if __name__ == "__main__":
    pytest.main([__file__, "-v", "--tb=short"])
