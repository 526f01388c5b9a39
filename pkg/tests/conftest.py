import numpy as np
import pytest

from sweepvol.frameio import AcquisitionMeta, FrameStack
from sweepvol.phantom import TubePhantomParams, synth_tube_stack


def make_stack(frames, psx=0.3, psy=0.3, fsz=0.8) -> FrameStack:
    frames = np.asarray(frames, dtype=np.uint8)
    n, h, w = frames.shape
    meta = AcquisitionMeta(width=w, height=h, frame_count=n,
                           pixel_spacing_x=psx, pixel_spacing_y=psy,
                           frame_spacing_z=fsz)
    return FrameStack(meta=meta, frames=frames)


@pytest.fixture(scope="session")
def small_phantom():
    """Short slanted-tube acquisition shared across tests (seed 42)."""
    params = TubePhantomParams(
        width=100, height=128, frame_count=12, tube_radius_mm=4.0,
        slant_deg=20.0, frame_spacing_z=0.2, seed=42,
    )
    stack, masks = synth_tube_stack(params)
    return params, stack, masks


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
