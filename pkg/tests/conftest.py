import os

# Pin BLAS threading before numpy loads so acceptance timings are single-threaded.
for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
    os.environ.setdefault(var, "1")

from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"


def natural_images(count: int = 5, size: int = 32):
    """Small natural test images (c, size, size) from the scikit-image samples."""
    from skimage import data as skdata
    from skimage.transform import resize

    from curvekit.tensor_io import ImageTensor

    sources = [
        skdata.astronaut(),
        skdata.chelsea(),
        skdata.coffee(),
        skdata.rocket(),
        skdata.camera(),
        skdata.moon(),
        skdata.coins(),
    ]
    images = []
    for raw in sources[:count]:
        arr = np.asarray(raw, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        side = min(arr.shape[:2])
        arr = arr[:side, :side]
        arr = resize(arr, (size, size), anti_aliasing=True)
        images.append(ImageTensor(np.moveaxis(arr, -1, 0)))
    return images


@pytest.fixture(scope="session")
def test_images():
    return natural_images(5)


@pytest.fixture
def fixtures_dir():
    return FIXTURES
