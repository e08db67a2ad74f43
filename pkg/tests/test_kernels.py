import math
import random

import pytest

from lanempc import kernels

TABLE = dict(m=2000.0, iz=1300.0, lf=1.2, lr=1.05, caf=12000.0, car=12000.0,
             rw=0.3)

needs_compiled = pytest.mark.skipif(
    "compiled" not in kernels.available(),
    reason="compiled backend not built")


def _random_case(rng, n):
    state = (rng.uniform(5, 15), rng.uniform(-1.5, 1.5),
             rng.uniform(-0.8, 0.8), rng.uniform(-10, 120),
             rng.uniform(-1.5, 5.0), rng.uniform(-0.4, 0.4))
    controls = [rng.uniform(-0.785, 0.785) if i % 2 == 0
                else rng.uniform(-160, 200) for i in range(2 * n)]
    refs = tuple(rng.uniform(-10, 130) for _ in range(2 * n))
    return state, controls, refs


def _cost_args(state, controls, refs, diff_mode=1, obs=(), ow=0.0):
    return (*state, controls, TABLE["m"], TABLE["iz"], TABLE["lf"],
            TABLE["lr"], TABLE["caf"], TABLE["car"], TABLE["rw"], 0.1, False,
            refs, 5.25, -1.75, 1.0, 0.001, 0.001, 0.01, diff_mode, obs, ow)


class TestBackendSelection:
    def test_python_backend_always_available(self):
        assert "python" in kernels.available()

    def test_active_is_module_with_kernels(self):
        mod = kernels.active()
        assert callable(mod.predict_steps)
        assert callable(mod.horizon_cost)
        assert callable(mod.trajectory_cost)

    def test_switching(self):
        before = kernels.backend_name()
        try:
            for name in kernels.available():
                kernels.use(name)
                assert kernels.backend_name() == name
        finally:
            kernels.use(before)

    def test_unknown_backend_rejected(self):
        with pytest.raises(KeyError):
            kernels.use("fortran")


@needs_compiled
class TestBackendParity:
    def test_bitwise_identical_costs(self):
        comp = kernels.get("compiled")
        pure = kernels.get("python")
        rng = random.Random(101)
        for trial in range(400):
            n = rng.choice([1, 2, 3, 5])
            state, controls, refs = _random_case(rng, n)
            diff = rng.choice([0, 1, 2])
            obs = tuple(rng.uniform(0, 100) for _ in range(4)) \
                if rng.random() < 0.3 else ()
            ow = 0.2 if obs else 0.0
            args = _cost_args(state, controls, refs, diff, obs, ow)
            a = comp.horizon_cost(*args)
            b = pure.horizon_cost(*args)
            assert a == b, f"trial {trial}: {a!r} != {b!r}"

    def test_bitwise_identical_predictions(self):
        comp = kernels.get("compiled")
        pure = kernels.get("python")
        rng = random.Random(77)
        for _ in range(200):
            n = rng.choice([1, 3])
            state, controls, _ = _random_case(rng, n)
            args = (*state, controls, TABLE["m"], TABLE["iz"], TABLE["lf"],
                    TABLE["lr"], TABLE["caf"], TABLE["car"], TABLE["rw"],
                    0.1, False)
            assert comp.predict_steps(*args) == pure.predict_steps(*args)


class TestFusedMatchesComposition:
    @pytest.mark.parametrize("backend", ["python", "compiled"])
    def test_horizon_cost_equals_predict_plus_cost(self, backend):
        if backend not in kernels.available():
            pytest.skip("backend not built")
        mod = kernels.get(backend)
        rng = random.Random(5)
        for _ in range(100):
            n = rng.choice([1, 3])
            state, controls, refs = _random_case(rng, n)
            fused = mod.horizon_cost(*_cost_args(state, controls, refs))
            xa, ya, _, _, rs, _, _, _, _, _ = mod.predict_steps(
                *state, controls, TABLE["m"], TABLE["iz"], TABLE["lf"],
                TABLE["lr"], TABLE["caf"], TABLE["car"], TABLE["rw"],
                0.1, False)
            composed = mod.trajectory_cost(
                xa, ya, rs, state[2], 0.1, refs, xa, (5.25,) * n,
                xa, (-1.75,) * n, 1.0, 0.001, 0.001, 0.01, 1, (), 0.0)
            assert fused == composed


@needs_compiled
def test_closed_loop_runs_bitwise_identical_across_backends(params, cfg,
                                                            small_scenario):
    # Guards against compiler transformations (fused multiply-add, sincos
    # fusion) sneaking last-ulp differences into the compiled backend.
    from lanempc.harness import run
    before = kernels.backend_name()
    try:
        kernels.use("compiled")
        a = run(small_scenario, params, cfg)
        kernels.use("python")
        b = run(small_scenario, params, cfg)
    finally:
        kernels.use(before)
    assert a == b


class TestKernelContracts:
    def test_speed_floor_raises(self):
        mod = kernels.active()
        with pytest.raises(ValueError):
            mod.predict_steps(0.05, 0.0, 0.0, 0.0, 0.0, 0.0, [0.0, 0.0],
                              TABLE["m"], TABLE["iz"], TABLE["lf"],
                              TABLE["lr"], TABLE["caf"], TABLE["car"],
                              TABLE["rw"], 0.1, False)

    def test_horizon_cap(self):
        mod = kernels.active()
        controls = [0.0, 0.0] * (kernels.MAX_STEPS + 1)
        with pytest.raises(ValueError):
            mod.predict_steps(10.0, 0.0, 0.0, 0.0, 0.0, 0.0, controls,
                              TABLE["m"], TABLE["iz"], TABLE["lf"],
                              TABLE["lr"], TABLE["caf"], TABLE["car"],
                              TABLE["rw"], 0.1, False)

    def test_fused_returns_inf_on_floor(self):
        mod = kernels.active()
        state = (0.15, 0.0, 0.0, 0.0, 0.0, 0.0)
        controls = [0.0, -160.0] * 3
        refs = (1.0, 0.0, 2.0, 0.0, 3.0, 0.0)
        assert mod.horizon_cost(*_cost_args(state, controls, refs)) == math.inf

    def test_diff_mode_variants(self):
        mod = kernels.active()
        rs = (0.1, 0.3, 0.2)
        xa = (1.0, 2.0, 3.0)
        ya = (0.0, 0.0, 0.0)
        refs = (1.0, 0.0, 2.0, 0.0, 3.0, 0.0)

        def yaw_cost(diff_mode):
            return mod.trajectory_cost(xa, ya, rs, 0.0, 0.1, refs,
                                       xa, (99.0,) * 3, xa, (-99.0,) * 3,
                                       0.0, 0.0, 0.0, 1.0, diff_mode, (), 0.0)

        backward = ((0.1 / 0.1) ** 2 + (0.2 / 0.1) ** 2 + (-0.1 / 0.1) ** 2)
        forward = ((0.2 / 0.1) ** 2 + (-0.1 / 0.1) ** 2 + (-0.1 / 0.1) ** 2)
        centered = ((0.3 / 0.2) ** 2 + (0.1 / 0.2) ** 2 + (-0.1 / 0.1) ** 2)
        assert yaw_cost(0) == pytest.approx(backward, rel=1e-12)
        assert yaw_cost(1) == pytest.approx(forward, rel=1e-12)
        assert yaw_cost(2) == pytest.approx(centered, rel=1e-12)
