"""Small residual encoder-decoder with a vector head and a closeness head.

The field head regresses displacements in millimeters; the closeness head
emits logits (sigmoid applied at export time).
"""

from __future__ import annotations

import torch.nn as nn


class ResBlock(nn.Module):
    def __init__(self, channels: int):
        super().__init__()
        self.conv1 = nn.Conv3d(channels, channels, 3, padding=1)
        self.conv2 = nn.Conv3d(channels, channels, 3, padding=1)
        self.norm1 = nn.GroupNorm(4, channels)
        self.norm2 = nn.GroupNorm(4, channels)
        self.act = nn.ReLU(inplace=True)

    def forward(self, x):
        h = self.act(self.norm1(self.conv1(x)))
        h = self.norm2(self.conv2(h))
        return self.act(h + x)


class TwoHeadNet(nn.Module):
    """Input: (B, 1, nx, ny, nz) intensities.

    Output: field (B, 3, ...) in mm and closeness logits (B, 1, ...).
    Spatial sizes must be divisible by 4.
    """

    def __init__(self, base_channels: int = 12):
        super().__init__()
        c = base_channels
        self.stem = nn.Conv3d(1, c, 3, padding=1)
        self.enc0 = ResBlock(c)
        self.down1 = nn.Conv3d(c, 2 * c, 2, stride=2)
        self.enc1 = ResBlock(2 * c)
        self.down2 = nn.Conv3d(2 * c, 4 * c, 2, stride=2)
        self.mid = ResBlock(4 * c)
        self.up1 = nn.ConvTranspose3d(4 * c, 2 * c, 2, stride=2)
        self.dec1 = ResBlock(2 * c)
        self.up2 = nn.ConvTranspose3d(2 * c, c, 2, stride=2)
        self.dec0 = ResBlock(c)
        self.field_head = nn.Conv3d(c, 3, 1)
        self.closeness_head = nn.Conv3d(c, 1, 1)

    def forward(self, x):
        e0 = self.enc0(self.stem(x))
        e1 = self.enc1(self.down1(e0))
        m = self.mid(self.down2(e1))
        d1 = self.dec1(self.up1(m) + e1)
        d0 = self.dec0(self.up2(d1) + e0)
        return self.field_head(d0), self.closeness_head(d0)
