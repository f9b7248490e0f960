import numpy as np
import pytest

from mvperf.synthetic import GenSpec, SplitMix64, generate


def test_splitmix_reference_values():
    # first outputs for seed 0 of the standard SplitMix64 generator
    rng = SplitMix64(0)
    assert [rng.next_u64() for _ in range(3)] == [
        0xE220A8397B1DCDAF,
        0x6E789E6AA1B965F4,
        0x06C45D188009454F,
    ]


def test_uniform_range():
    rng = SplitMix64(7)
    u = np.array([rng.uniform() for _ in range(2000)])
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.03


def test_same_seed_same_data():
    a = generate(GenSpec(seed=11))
    b = generate(GenSpec(seed=11))
    assert a.same_as(b)
    assert not a.same_as(generate(GenSpec(seed=12)))


FROZEN_LABELS = [1, -1, -1, 1, -1, 1]
FROZEN_VIEW1 = [
    [1.043187656187, 0.429431176476],
    [-0.869130891492, 1.484192154738],
    [-0.824241023556, 1.977722519776],
    [1.0037731698, -0.003901482953],
    [-0.996542728392, 0.083394752851],
    [1.10145481304, 1.070034780663],
]


def test_frozen_values():
    ds = generate(GenSpec(n=6, m=2, dims=[2, 1], seed=5))
    assert ds.labels.tolist() == FROZEN_LABELS
    np.testing.assert_allclose(ds.dense_view(0), FROZEN_VIEW1, rtol=0, atol=1e-11)
    # a one-dimensional view is all class direction
    np.testing.assert_array_equal(np.abs(ds.dense_view(1)), 1.0)


def test_balance():
    ds = generate(GenSpec(n=100, balance=0.5, seed=3))
    assert int(np.sum(ds.labels > 0)) == 50
    ds = generate(GenSpec(n=10, balance=0.25, seed=3))
    assert int(np.sum(ds.labels > 0)) in (2, 3)


def test_both_classes_always_present():
    ds = generate(GenSpec(n=4, balance=0.01, seed=1))
    assert set(ds.labels.tolist()) == {1, -1}


def test_noise_free_views_separable_along_direction():
    spec = GenSpec(n=80, dims=[4, 3], margin=2.0, noise=0.0, seed=9)
    ds = generate(spec)
    for j in range(ds.m):
        X = ds.dense_view(j)
        # projections onto the class direction are exactly +-1
        proj = np.linalg.lstsq(X, ds.labels.astype(float), rcond=None)[0]
        assert np.all(ds.labels * (X @ proj) > 0)


@pytest.mark.parametrize("bad", [
    dict(n=1), dict(dims=[3]), dict(balance=1.0), dict(margin=-1.0),
    dict(noise=-0.1), dict(noise=[0.1]), dict(correlation=1.5), dict(dims=[0, 2]),
])
def test_invalid_specs(bad):
    with pytest.raises(ValueError):
        generate(GenSpec(**bad))
