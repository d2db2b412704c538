import numpy as np

from proxitrack.kalman import (KalmanBoxFilter, box_to_measurement,
                               measurement_to_box)


def test_measurement_conversion_round_trip():
    box = np.array([10.0, 20.0, 8.0, 16.0])
    z = box_to_measurement(box)
    assert np.allclose(z, [14.0, 28.0, 128.0, 0.5])
    assert np.allclose(measurement_to_box(z), box)


def test_zero_velocity_prediction_is_fixed_point():
    kf = KalmanBoxFilter((0.0, 0.0, 10.0, 10.0))
    before = kf.x.copy()
    kf.predict()
    assert np.allclose(kf.x, before)


def test_known_velocity_moves_center():
    kf = KalmanBoxFilter((0.0, 0.0, 10.0, 10.0))
    kf.x[4] = 2.0  # du
    kf.predict()
    assert np.isclose(kf.x[0], 5.0 + 2.0)


def test_ten_predictions_match_matrix_power():
    kf = KalmanBoxFilter((10.0, 20.0, 16.0, 24.0))
    kf.x[4:] = [2.0, -1.0, 3.0]
    x0 = kf.x.copy()
    f10 = np.linalg.matrix_power(kf.f, 10)
    for _ in range(10):
        kf.predict()
    assert np.abs(kf.x - f10 @ x0).max() < 1e-9


def test_negative_area_clamped_and_rate_zeroed():
    kf = KalmanBoxFilter((0.0, 0.0, 2.0, 2.0))
    kf.x[6] = -100.0  # ds drives area negative
    kf.predict()
    assert kf.x[2] > 0
    assert kf.x[6] == 0.0


def test_update_with_predicted_mean_keeps_mean_and_shrinks_covariance():
    kf = KalmanBoxFilter((5.0, 5.0, 10.0, 20.0))
    kf.predict()
    box = kf.box.copy()
    x_before = kf.x.copy()
    trace_before = np.trace(kf.p)
    kf.update(box)
    assert np.abs(kf.x - x_before).max() < 1e-9
    assert np.trace(kf.p) < trace_before


def test_zero_noise_limit_posterior_equals_measurement():
    kf = KalmanBoxFilter((0.0, 0.0, 10.0, 10.0), measurement_noise=1e-12)
    target = np.array([30.0, 40.0, 12.0, 6.0])
    kf.predict()
    kf.update(target)
    assert np.abs(kf.box - target).max() < 1e-6


def test_linear_motion_converges_under_half_pixel():
    kf = KalmanBoxFilter((0.0, 0.0, 10.0, 20.0))
    for t in range(1, 11):
        kf.predict()
        kf.update((2.0 * t, 0.0, 10.0, 20.0))
    # simulated noise-free trajectory: true box x = 2 * t
    assert abs(kf.box[0] - 20.0) < 0.5
    assert abs(kf.box[1] - 0.0) < 0.5


def test_covariance_stays_symmetric_psd_through_random_sequences():
    rng = np.random.default_rng(30)
    kf = KalmanBoxFilter((0.0, 0.0, 10.0, 10.0))
    for _ in range(200):
        kf.predict()
        if rng.random() < 0.7:
            kf.update((rng.uniform(-5, 5), rng.uniform(-5, 5),
                       rng.uniform(5, 20), rng.uniform(5, 20)))
        assert np.abs(kf.p - kf.p.T).max() < 1e-9
        assert np.linalg.eigvalsh(kf.p).min() > -1e-9


def test_singular_innovation_regularized():
    kf = KalmanBoxFilter((0.0, 0.0, 4.0, 4.0), measurement_noise=0.0)
    kf.p[:4, :4] = 0.0  # innovation covariance becomes exactly singular
    kf.update((1.0, 1.0, 4.0, 4.0))
    assert np.isfinite(kf.x).all()
