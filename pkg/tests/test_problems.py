import math

import numpy as np
import pytest

from commsim import (LeastSquaresSpec, chain_decay_ratio, format_metadata,
                     gen_constructed_quadratic, gen_least_squares,
                     gen_zero_chain_gc, gen_zero_chain_gc3, gen_zero_chain_sc,
                     least_squares_from_matrices, load_libsvm, parse_libsvm,
                     prog, write_libsvm)


class TestLeastSquares:
    def test_condition_number_target(self, least_squares):
        assert least_squares.metadata["kappa_f"] == pytest.approx(1e4, rel=0.01)
        assert least_squares.metadata["L_avg_hessian"] == pytest.approx(
            1e4 / 400, rel=1e-6)

    def test_identity_single_worker(self):
        prob = least_squares_from_matrices(np.eye(3)[None, :, :])
        x = np.array([1.0, -2.0, 0.5])
        assert prob.f(x) == pytest.approx(0.5 * float(x @ x))
        np.testing.assert_allclose(prob.x_star, np.zeros(3))
        assert prob.f_star == 0.0

    def test_normal_equations_match_descent(self, small_least_squares):
        prob = small_least_squares
        # independent oracle: plain gradient descent on the averaged objective
        x = np.zeros(prob.d)
        eta = 0.9 / prob.metadata["L_avg_hessian"]
        for _ in range(60_000):
            x = x - eta * prob.grad(x)
        np.testing.assert_allclose(x, prob.x_star, atol=1e-8)
        assert prob.f(x) == pytest.approx(prob.f_star, abs=1e-12)

    def test_assumption_constants_cover_every_worker(self, least_squares):
        # declared L/mu must bound each local Hessian; the averaged system is
        # milder and recorded in metadata
        assert least_squares.L >= least_squares.metadata["L_avg_hessian"]
        assert least_squares.mu <= least_squares.metadata["mu_avg_hessian"]
        rng = np.random.default_rng(0)
        for _ in range(20):
            i = int(rng.integers(least_squares.n))
            v = rng.standard_normal(least_squares.d)
            v /= np.linalg.norm(v)
            curv = float(v @ (least_squares.worker_grad(i, v)
                              - least_squares.worker_grad(i, np.zeros(least_squares.d))))
            assert least_squares.mu - 1e-9 <= curv <= least_squares.L + 1e-9

    def test_start_distance(self, least_squares):
        assert least_squares.delta == pytest.approx(10 * least_squares.d, rel=1e-9)

    def test_too_few_rows_rejected(self):
        with pytest.raises(ValueError, match="rows"):
            LeastSquaresSpec(n=1, M=2, d=3)


class TestLibsvm:
    def _write(self, tmp_path, lines, name="data.libsvm"):
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n")
        return path

    def test_single_point_logistic_loss(self, tmp_path):
        path = self._write(tmp_path, ["+1 1:1.0"])
        prob = load_libsvm(path, n=1)
        assert prob.d == 1
        assert prob.f(np.zeros(1)) == pytest.approx(math.log(2.0))

    def test_contiguous_partition_shapes(self, tmp_path):
        rng = np.random.default_rng(1)
        lines = []
        for r in range(325):
            feats = sorted(rng.choice(np.arange(1, 124), size=5, replace=False))
            toks = [f"{int(i)}:{rng.integers(1, 3)}" for i in feats]
            lines.append(("+1 " if r % 2 else "-1 ") + " ".join(toks))
        path = self._write(tmp_path, lines)
        prob = load_libsvm(path, n=4)
        assert prob.metadata["points_per_worker"] == 81   # floor(325/4)
        assert prob.d == 123
        assert prob.mu == 0.0 and prob.L > 0

    def test_partition_rows_are_contiguous(self, tmp_path):
        # encode the datapoint index in the feature value to track assignment
        lines = [f"+1 1:{r + 1}" for r in range(8)]
        path = self._write(tmp_path, lines)
        prob = load_libsvm(path, n=4)
        for i in range(4):
            g = prob.worker_grad(i, np.zeros(1))
            # gradient at 0 is -(1/M) sum of 0.5 * value
            expected = -0.25 * ((2 * i + 1) + (2 * i + 2))
            assert g[0] == pytest.approx(expected)

    def test_label_mapping(self, tmp_path):
        path = self._write(tmp_path, ["0 1:1", "1 1:1"])
        prob = load_libsvm(path, n=1)
        m = prob.worker_grads(np.zeros(1))
        assert m.shape == (1, 1)

    def test_malformed_line_reports_number(self, tmp_path):
        path = self._write(tmp_path, ["+1 1:1.0", "+1 nonsense", "-1 2:0.5"])
        with pytest.raises(ValueError, match="line 2"):
            parse_libsvm(path)

    def test_too_few_points(self, tmp_path):
        path = self._write(tmp_path, ["+1 1:1.0"])
        with pytest.raises(ValueError, match="fewer"):
            load_libsvm(path, n=2)

    def test_round_trip(self, tmp_path):
        lines = ["+1 1:0.5 7:2", "-1 3:1.25", "+1 2:4"]
        path = self._write(tmp_path, lines)
        labels, rows, d = parse_libsvm(path)
        out = tmp_path / "echo.libsvm"
        write_libsvm(labels, rows, out)
        labels2, rows2, d2 = parse_libsvm(out)
        assert d2 == d and np.array_equal(labels, labels2)
        for (i1, v1), (i2, v2) in zip(rows, rows2):
            assert np.array_equal(i1, i2) and np.array_equal(v1, v2)

    def test_gradient_matches_finite_difference(self, tmp_path):
        rng = np.random.default_rng(2)
        lines = []
        for r in range(12):
            toks = [f"{j}:{rng.standard_normal():.4f}" for j in range(1, 5)]
            lines.append(("+1 " if r % 3 else "-1 ") + " ".join(toks))
        prob = load_libsvm(self._write(tmp_path, lines), n=3)
        x = rng.standard_normal(prob.d)
        g = prob.worker_grad(1, x)
        h = 1e-6
        for j in range(prob.d):
            e = np.zeros(prob.d)
            e[j] = h
            fd = (prob.worker_value(1, x + e) - prob.worker_value(1, x - e)) / (2 * h)
            assert g[j] == pytest.approx(fd, abs=1e-6)


class TestConstructedQuadratic:
    def test_gradient_at_origin_single_coordinate(self, constructed):
        g = constructed.grad(np.zeros(20))
        nz = np.nonzero(g)[0]
        assert list(nz) == [0]
        assert g[0] == pytest.approx(-(1e4 - 1) / 4.0)

    def test_equal_constants_reduce_to_plain_quadratic(self):
        prob = gen_constructed_quadratic(mu=2.0, L=2.0, d=4, n=4)
        x = np.array([1.0, -1.0, 2.0, 0.5])
        for i in range(4):
            assert prob.worker_value(i, x) == pytest.approx(float(x @ x))

    def test_optimum_matches_accelerated_run(self, constructed):
        # independent oracle: long uncompressed accelerated descent
        x = np.zeros(20)
        z = x.copy()
        eta, theta = 1e-4, 7.6e-2
        for _ in range(4000):
            y = (1 - theta) * x + theta * z
            x_new = y - eta * constructed.grad(y)
            z = x + (x_new - x) / theta
            x = x_new
        assert constructed.f(x) == pytest.approx(constructed.f_star, abs=1e-8)

    def test_parity_validation(self):
        with pytest.raises(ValueError, match="even"):
            gen_constructed_quadratic(d=19, n=400)
        with pytest.raises(ValueError, match="even"):
            gen_constructed_quadratic(d=20, n=401)

    def test_per_worker_smoothness_is_exact(self, constructed):
        rng = np.random.default_rng(3)
        for i in (0, 399):
            for _ in range(50):
                v = rng.standard_normal(20)
                v /= np.linalg.norm(v)
                curv = float(v @ (constructed.worker_grad(i, v)
                                  - constructed.worker_grad(i, np.zeros(20))))
                assert 1.0 - 1e-9 <= curv <= 1e4 + 1e-6
        # a chain-link difference direction attains the top curvature exactly
        v = np.zeros(20)
        v[0], v[1] = 1.0, -1.0
        v /= math.sqrt(2.0)
        curv = float(v @ (constructed.worker_grad(constructed.n - 1, v)
                          - constructed.worker_grad(constructed.n - 1, np.zeros(20))))
        assert curv == pytest.approx(1e4, rel=1e-12)


def random_prefix_probe(rng, d, k):
    x = np.zeros(d)
    if k:
        x[:k] = rng.standard_normal(k)
        x[k - 1] = rng.standard_normal() + 2.0   # keep the reach exact
    return x


class TestZeroChainSC:
    def test_decay_ratio_values(self):
        assert chain_decay_ratio(1e4, 400) == pytest.approx(0.7543322992322722, rel=1e-12)
        assert chain_decay_ratio(1e4, 1) == pytest.approx(0.9859568136154407, rel=1e-12)
        assert chain_decay_ratio(1.0, 7) == 0.0

    def test_start_distance_matches_request(self):
        hard = gen_zero_chain_sc(L=1e4, mu=1.0, n=8, d=300, delta=1.0)
        assert hard.problem.delta == pytest.approx(1.0, rel=1e-6)
        assert not hard.problem.metadata["truncation_warning"]

    def test_shallow_truncation_flagged(self):
        # at d=200 the free-boundary correction still moves delta by ~3e-6
        hard = gen_zero_chain_sc(L=1e4, mu=1.0, n=8, d=200, delta=1.0)
        assert hard.problem.delta == pytest.approx(1.0, rel=1e-5)
        assert hard.problem.metadata["truncation_warning"]
        hard = gen_zero_chain_sc(L=1e4, mu=1.0, n=8, d=40, delta=1.0)
        assert hard.problem.metadata["truncation_warning"]

    def test_minimizer_geometric_profile(self):
        hard = gen_zero_chain_sc(L=100.0, mu=1.0, n=4, d=120, delta=2.0)
        xs = hard.problem.x_star
        # early coordinates follow lam * q^j before the boundary correction
        expected = hard.lam * hard.q ** np.arange(1, 21)
        np.testing.assert_allclose(xs[:20], expected, rtol=1e-8)
        assert float(xs @ xs) == pytest.approx(2.0, rel=1e-6)

    def test_single_worker_reduces_to_classical_chain(self):
        hard = gen_zero_chain_sc(L=1e4, mu=1.0, n=1, d=300, delta=1.0)
        assert hard.q == pytest.approx(1 - 2 / (1 + math.sqrt(2e4 - 1)), rel=1e-12)

    def test_zero_chain_property(self):
        hard = gen_zero_chain_sc(L=50.0, mu=1.0, n=3, d=30, delta=1.0)
        prob = hard.problem
        rng = np.random.default_rng(4)
        for _ in range(1000):
            k = int(rng.integers(0, prob.d - 1))
            x = random_prefix_probe(rng, prob.d, k)
            i = int(rng.integers(prob.n))
            reach = prog(prob.worker_grad(i, x))
            assert reach <= k + 1
            if reach == k + 1:
                assert i == hard.advancing_worker(k)

    def test_floor_holds_on_prefix_probes(self):
        hard = gen_zero_chain_sc(L=1e3, mu=1.0, n=4, d=150, delta=1.0)
        prob = hard.problem
        rng = np.random.default_rng(5)
        for _ in range(300):
            k = int(rng.integers(0, 60))
            x = 0.3 * random_prefix_probe(rng, prob.d, k)
            gap = prob.f(x) - prob.f_star
            assert gap >= hard.floor(prog(x)) * (1 - 1e-9)

    def test_homogeneous_family_declares_true_smoothness(self):
        hard = gen_zero_chain_sc(L=100.0, mu=1.0, n=3, d=50, delta=1.0,
                                 family="sc-homogeneous")
        assert hard.problem.L > 100.0        # overlapping links exceed the target
        assert hard.q == pytest.approx(chain_decay_ratio(100.0, 1), rel=1e-12)


class TestZeroChainGC:
    def test_optimal_value_formula(self):
        hard = gen_zero_chain_gc(L=1.0, n=2, d=4, delta=1.0)
        assert hard.problem.f_star == pytest.approx(-0.075, rel=1e-12)
        # independent oracle: direct solve of the averaged quadratic
        d = 4
        M = 2 * np.eye(d) - np.eye(d, k=1) - np.eye(d, k=-1)
        lam = math.sqrt(3 / 4)
        c = np.zeros(d)
        c[0] = lam
        xs = np.linalg.solve(M, c)
        f_direct = 0.25 / 2 * float(xs @ (M @ xs)) - 0.25 * lam * xs[0]
        assert f_direct == pytest.approx(hard.problem.f_star, rel=1e-12)

    def test_minimizer_is_linear_profile(self):
        hard = gen_zero_chain_gc(L=3.0, n=2, d=10, delta=1.0)
        ks = np.arange(1, 11)
        np.testing.assert_allclose(hard.problem.x_star,
                                   hard.lam * (1 - ks / 11.0), rtol=1e-10)

    def test_prefix_optimum_endpoints(self):
        hard = gen_zero_chain_gc(L=1.0, n=2, d=4, delta=1.0)
        assert hard.opt_at_prog(0) == 0.0
        assert hard.opt_at_prog(4) == pytest.approx(hard.problem.f_star, rel=1e-12)

    def test_zero_chain_property(self):
        hard = gen_zero_chain_gc(L=2.0, n=3, d=24, delta=1.0)
        prob = hard.problem
        rng = np.random.default_rng(6)
        for _ in range(500):
            k = int(rng.integers(0, prob.d - 1))
            x = random_prefix_probe(rng, prob.d, k)
            i = int(rng.integers(prob.n))
            reach = prog(prob.worker_grad(i, x))
            assert reach <= k + 1

    def test_dense_pull_family(self):
        hard = gen_zero_chain_gc3(L=2.0, n=4, d=6, delta=9.0)
        prob = hard.problem
        np.testing.assert_allclose(prob.x_star,
                                   -hard.lam / 2.0 * np.ones(6), rtol=1e-12)
        assert float(prob.x_star @ prob.x_star) == pytest.approx(9.0, rel=1e-12)
        assert prob.f_star == pytest.approx(-hard.lam ** 2 * 6 / 4.0, rel=1e-12)


def test_metadata_dump_is_flat_text(constructed):
    text = format_metadata(constructed)
    assert "name = constructed_quadratic" in text
    assert "n = 400" in text
    assert all("=" in line for line in text.splitlines())
