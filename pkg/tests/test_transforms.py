import numpy as np
import pytest

from tlbo.box import Box
from tlbo.tasks import TaskDataset
from tlbo.transforms import minmax_normalize, source_normalize, target_normalize


def random_task(rng, n_points=None, n_dims=None):
    n_points = n_points or int(rng.integers(2, 30))
    n_dims = n_dims or int(rng.integers(1, 4))
    return TaskDataset(
        "t",
        rng.uniform(-5, 5, size=(n_points, n_dims)),
        rng.normal(size=n_points) * rng.uniform(0.5, 20),
    )


class TestSourceNormalize:
    def test_worked_example(self):
        task = TaskDataset("a", [[2.0], [4.0], [6.0]], [5.0, 1.0, 3.0])
        norm, t = source_normalize(task)
        np.testing.assert_allclose(t.input_shift, [4.0])
        np.testing.assert_allclose(t.input_scale, [4.0])
        assert t.output_mean == pytest.approx(3.0)
        assert t.output_std == pytest.approx(np.sqrt(8.0 / 3.0))
        np.testing.assert_allclose(norm.inputs.ravel(), [-0.5, 0.0, 0.5])
        np.testing.assert_allclose(
            norm.outputs, [1.2247448, -1.2247448, 0.0], atol=1e-6
        )

    def test_optimum_row_maps_to_origin(self):
        rng = np.random.default_rng(20)
        for _ in range(50):
            task = random_task(rng)
            norm, _ = source_normalize(task)
            i = int(np.argmin(task.outputs))
            np.testing.assert_allclose(norm.inputs[i], 0.0, atol=0.0)

    def test_standardized_outputs_have_unit_stats(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            task = random_task(rng, n_points=12)
            norm, t = source_normalize(task)
            if not t.std_floored:
                assert np.mean(norm.outputs) == pytest.approx(0.0, abs=1e-10)
                assert np.std(norm.outputs) == pytest.approx(1.0, abs=1e-10)

    def test_ranking_preserved(self):
        rng = np.random.default_rng(22)
        task = random_task(rng, n_points=15)
        norm, _ = source_normalize(task)
        np.testing.assert_array_equal(
            np.argsort(norm.outputs), np.argsort(task.outputs)
        )

    def test_constant_outputs_floor_std(self):
        task = TaskDataset("a", [[0.0], [1.0]], [7.0, 7.0])
        norm, t = source_normalize(task)
        assert t.std_floored
        np.testing.assert_allclose(norm.outputs, 0.0)

    def test_argmin_tie_breaks_to_lowest_index(self):
        task = TaskDataset("a", [[1.0], [2.0], [3.0]], [1.0, 1.0, 5.0])
        _, t = source_normalize(task)
        np.testing.assert_allclose(t.input_shift, [1.0])

    def test_zero_input_range_floored_and_flagged(self):
        task = TaskDataset("a", [[1.0, 0.0], [1.0, 2.0]], [0.0, 1.0])
        _, t = source_normalize(task)
        assert t.floored_dims == (0,)
        np.testing.assert_allclose(t.input_scale, [1.0, 2.0])

    def test_single_point_rejected(self):
        with pytest.raises(ValueError):
            source_normalize(TaskDataset("a", [[0.0]], [1.0]))


class TestTargetNormalize:
    def test_worked_example(self):
        box = Box([0.0], [10.0])
        task = TaskDataset("t", [[6.0]], [2.0])
        norm, t = target_normalize(task, [4.0], box)
        assert norm.inputs[0, 0] == pytest.approx(0.2)

    def test_start_point_maps_to_origin(self):
        box = Box([0.0, 0.0], [2.0, 4.0])
        task = TaskDataset("t", [[1.0, 3.0], [0.5, 2.0]], [5.0, 6.0])
        norm, _ = target_normalize(task, [1.0, 3.0], box)
        np.testing.assert_allclose(norm.inputs[0], 0.0)

    def test_equal_outputs_floored(self):
        box = Box([0.0], [10.0])
        task = TaskDataset("t", [[1.0], [2.0]], [10.0, 10.0])
        norm, t = target_normalize(task, [1.0], box)
        assert t.std_floored
        np.testing.assert_allclose(norm.outputs, [0.0, 0.0])

    def test_invalid_box_rejected(self):
        with pytest.raises(ValueError):
            Box([1.0], [1.0])

    def test_x0_outside_box_rejected(self):
        box = Box([0.0], [10.0])
        with pytest.raises(ValueError):
            target_normalize(TaskDataset("t", [[1.0]], [0.0]), [11.0], box)


class TestRoundTrips:
    def test_input_output_round_trip(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            task = random_task(rng)
            _, t = source_normalize(task)
            x = rng.uniform(-10, 10, size=t.n_dims)
            back = t.invert_input(t.apply_input(x))
            assert np.max(np.abs(back - x) / np.maximum(np.abs(x), 1e-30)) < 1e-12
            y = rng.normal() * 100
            assert t.invert_output(t.apply_output(y)) == pytest.approx(y, rel=1e-12)

    def test_shift_point_maps_to_zero(self):
        task = TaskDataset("a", [[2.0, 3.0], [4.0, 1.0]], [1.0, 2.0])
        _, t = source_normalize(task)
        np.testing.assert_allclose(t.apply_input(t.input_shift), 0.0)

    def test_standardization_center(self):
        task = TaskDataset("a", [[2.0], [4.0]], [1.0, 2.0])
        _, t = source_normalize(task)
        assert t.invert_output(0.0) == pytest.approx(t.output_mean)


class TestMinMaxNormalize:
    def test_shifts_by_minimum(self):
        task = TaskDataset("a", [[2.0], [4.0], [6.0]], [5.0, 1.0, 3.0])
        norm, t = minmax_normalize(task)
        np.testing.assert_allclose(t.input_shift, [2.0])
        np.testing.assert_allclose(norm.inputs.ravel(), [0.0, 0.5, 1.0])


class TestTaskDataset:
    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            TaskDataset("a", [[np.nan]], [1.0])

    def test_appended_grows_by_one(self):
        task = TaskDataset("a", [[0.0]], [1.0])
        grown = task.appended([2.0], 3.0)
        assert grown.n_points == 2
        assert task.n_points == 1

    def test_best_breaks_ties_by_index(self):
        task = TaskDataset("a", [[0.0], [1.0]], [2.0, 2.0])
        x, y = task.best()
        assert x[0] == 0.0 and y == 2.0
