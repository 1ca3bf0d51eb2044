import numpy as np
import pytest
from PIL import Image

from featdump import extract_features, load_backbone

SIZES = [(320, 240), (400, 300), (448, 448), (600, 400), (256, 384),
         (512, 288), (350, 350), (480, 320), (300, 500), (640, 360)]
FORMATS = ["jpg", "png", "bmp", "jpg", "png", "jpg", "bmp", "png", "jpg", "png"]


def paint_image(index: int, width: int, height: int) -> Image.Image:
    rng = np.random.default_rng(1000 + index)
    canvas = (rng.random((height, width, 3)) * 90).astype(np.uint8)
    x0, y0 = int(width * 0.2), int(height * 0.25)
    x1, y1 = int(width * 0.7), int(height * 0.8)
    canvas[y0:y1, x0:x1] = (40 * index % 256, 220, 120)
    canvas[y0 + 10:y0 + 30, x0 + 10:x0 + 40] = (250, 60, 60)
    return Image.fromarray(canvas)


@pytest.fixture(scope="session")
def image_paths(tmp_path_factory):
    root = tmp_path_factory.mktemp("images")
    paths = []
    for index, ((w, h), ext) in enumerate(zip(SIZES, FORMATS)):
        path = root / f"bird_{index:02d}.{ext}"
        paint_image(index, w, h).save(path)
        paths.append(str(path))
    return paths


@pytest.fixture(scope="session")
def dump_dir(tmp_path_factory, image_paths):
    out = tmp_path_factory.mktemp("features")
    manifest = extract_features(image_paths, str(out), weights="none")
    assert manifest.ok_count == len(image_paths)
    return out


@pytest.fixture(scope="session")
def trunk():
    return load_backbone("vgg16", weights="none")
