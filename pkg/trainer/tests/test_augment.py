import numpy as np

from tubetrainer.data import TubeSample, apply_flip, apply_transpose, random_patch


def toy_arrays(rng):
    volume = rng.random((6, 6, 6)).astype(np.float32)
    field = rng.normal(0, 2, (6, 6, 6, 3)).astype(np.float32)
    closeness = (rng.random((6, 6, 6)) < 0.5).astype(np.float32)
    return volume, field, closeness


def test_flip_is_involution_and_negates_component():
    rng = np.random.default_rng(0)
    volume, field, closeness = toy_arrays(rng)
    for axis in range(3):
        v1, f1, c1 = apply_flip(volume, field, closeness, axis)
        assert np.array_equal(np.abs(f1[..., axis]), np.abs(np.flip(field, axis)[..., axis]))
        v2, f2, c2 = apply_flip(v1, f1, c1, axis)
        assert np.array_equal(v2, volume)
        assert np.array_equal(f2, field)
        assert np.array_equal(c2, closeness)


def test_flip_preserves_norms():
    rng = np.random.default_rng(1)
    volume, field, closeness = toy_arrays(rng)
    _, f1, _ = apply_flip(volume, field, closeness, 1)
    norms = np.linalg.norm(field, axis=-1)
    assert np.array_equal(np.linalg.norm(f1, axis=-1), np.flip(norms, 1))


def test_transpose_permutes_components_with_axes():
    rng = np.random.default_rng(2)
    volume, field, closeness = toy_arrays(rng)
    perm = (2, 0, 1)
    v1, f1, c1 = apply_transpose(volume, field, closeness, perm)
    assert np.array_equal(v1, np.transpose(volume, perm))
    # spot-check one voxel: vector components follow the axis permutation
    src = (1, 2, 3)
    dst = tuple(src[p] for p in perm)
    assert np.array_equal(f1[dst], field[src][list(perm)])
    # inverse permutation restores everything
    inv = tuple(np.argsort(perm))
    v2, f2, c2 = apply_transpose(v1, f1, c1, inv)
    assert np.array_equal(v2, volume)
    assert np.array_equal(f2, field)
    assert np.array_equal(c2, closeness)


def test_random_patch_shapes_and_determinism(tube_dataset):
    sample = TubeSample.load(tube_dataset["volume"], tube_dataset["field"],
                             tube_dataset["closeness"])
    a = random_patch(sample, 24, np.random.default_rng(5), augment=True)
    b = random_patch(sample, 24, np.random.default_rng(5), augment=True)
    assert a[0].shape == (24, 24, 24)
    assert a[1].shape == (24, 24, 24, 3)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)
