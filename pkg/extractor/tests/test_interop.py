"""End-to-end smoke: dumped tensors drive the part-mining pipeline.

The miner is exercised through its public command line; tensors cross the
boundary only as NPY files and results come back only as layout JSON.
Box quality is not asserted — with unseeded backbone weights the parts are
plumbing-level output — only that every image yields the right number of
in-bounds boxes.
"""
import json
import shutil
import subprocess

import pytest

partmine = pytest.importorskip("partmine")

pytestmark = pytest.mark.skipif(
    shutil.which("partmine") is None,
    reason="part-mining CLI not installed")


def test_read_tensor_parses_the_dumped_files(dump_dir):
    relu = partmine.read_tensor(str(dump_dir / "bird_00.relu5.npy"))
    pool = partmine.read_tensor(str(dump_dir / "bird_00.pool5.npy"))
    assert relu.data.shape == (512, 28, 28)
    assert pool.data.shape == (512, 14, 14)
    assert relu.data.min() >= 0 and pool.data.min() >= 0


def test_ten_real_images_localize_four_parts_each(dump_dir, tmp_path):
    run_dir = tmp_path / "run"
    proc = subprocess.run(
        [shutil.which("partmine"), "mine",
         "--features", str(dump_dir), "--out", str(run_dir),
         "--beta", "0.07", "--max-pattern-len", "1", "--seed", "0"],
        capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stderr

    layouts = sorted(run_dir.glob("*.layout.json"))
    assert len(layouts) == 10
    for path in layouts:
        doc = json.loads(path.read_text())
        assert len(doc["parts"]) == 4
        for part in doc["parts"]:
            x, y, w, h = part["box"]
            assert x >= 0 and y >= 0
            assert x + w <= 448 and y + h <= 448
    print("[PASS] extractor-to-miner smoke: 10 images, "
          "4 in-bounds part boxes each")
