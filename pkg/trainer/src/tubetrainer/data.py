"""Patch sampling and geometric augmentation for one (volume, field,
closeness) triple.

Augmentations are limited to axis flips and axis transpositions; both act on
the vector channels accordingly (components permute with the axes and negate
under flips).  Only sensible for isotropic spacing, which the loader checks.
"""

from __future__ import annotations

import numpy as np

from . import wire


class TubeSample:
    """One training volume with its ground truth, in channels-last layout."""

    def __init__(self, volume: np.ndarray, field: np.ndarray, closeness: np.ndarray,
                 header: dict):
        self.volume = volume.astype(np.float32)
        self.field = field.astype(np.float32)
        self.closeness = closeness.astype(np.float32)
        self.header = header

    @classmethod
    def load(cls, volume_path, field_path, closeness_path) -> "TubeSample":
        header, volume = wire.read_volume(volume_path)
        fheader, field = wire.read_volume(field_path)
        cheader, closeness = wire.read_volume(closeness_path)
        if tuple(fheader["shape"]) != tuple(header["shape"]) or \
                tuple(cheader["shape"]) != tuple(header["shape"]):
            raise ValueError("volume and ground-truth shapes differ")
        sx, sy, sz = header["spacing"]
        if not (sx == sy == sz):
            raise ValueError("augmentation assumes isotropic spacing")
        return cls(volume, field, closeness, header)

    @property
    def shape(self):
        return self.volume.shape


def apply_flip(volume, field, closeness, axis: int):
    volume = np.flip(volume, axis=axis)
    closeness = np.flip(closeness, axis=axis)
    field = np.flip(field, axis=axis).copy()
    field[..., axis] = -field[..., axis]
    return volume.copy(), field, closeness.copy()


def apply_transpose(volume, field, closeness, perm):
    perm = tuple(perm)
    volume = np.transpose(volume, perm)
    closeness = np.transpose(closeness, perm)
    field = np.transpose(field, (*perm, 3))[..., list(perm)]
    return volume.copy(), field.copy(), closeness.copy()


def random_patch(sample: TubeSample, patch: int, rng: np.random.Generator,
                 augment: bool = True):
    """Random crop plus optional flip/transpose augmentation.

    Returns (volume, field, closeness) arrays of spatial shape patch^3,
    channels last for the field.
    """
    nx, ny, nz = sample.shape
    if min(nx, ny, nz) < patch:
        raise ValueError(f"patch {patch} exceeds volume shape {sample.shape}")
    ox = int(rng.integers(0, nx - patch + 1))
    oy = int(rng.integers(0, ny - patch + 1))
    oz = int(rng.integers(0, nz - patch + 1))
    sl = (slice(ox, ox + patch), slice(oy, oy + patch), slice(oz, oz + patch))
    volume = sample.volume[sl]
    field = sample.field[sl]
    closeness = sample.closeness[sl]
    if augment:
        for axis in range(3):
            if rng.random() < 0.5:
                volume, field, closeness = apply_flip(volume, field, closeness, axis)
        perm = tuple(rng.permutation(3))
        if perm != (0, 1, 2):
            volume, field, closeness = apply_transpose(volume, field, closeness, perm)
    return volume, field, closeness


def batch_tensors(patches):
    """Stack patches into channels-first torch tensors."""
    import torch

    volumes = np.stack([p[0] for p in patches])[:, None]
    fields = np.stack([np.moveaxis(p[1], -1, 0) for p in patches])
    closeness = np.stack([p[2] for p in patches])
    return (
        torch.from_numpy(np.ascontiguousarray(volumes)),
        torch.from_numpy(np.ascontiguousarray(fields)),
        torch.from_numpy(np.ascontiguousarray(closeness)),
    )
