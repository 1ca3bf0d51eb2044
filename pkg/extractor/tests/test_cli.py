import json
import shutil

import pytest

from featdump.cli import main, read_list_file
from featdump.errors import ConfigError


@pytest.fixture()
def listed_images(tmp_path, image_paths):
    """Two images next to a list file that names them relatively."""
    for source in image_paths[:2]:
        shutil.copy(source, tmp_path)
    listing = tmp_path / "images.txt"
    listing.write_text(
        "# session images\n"
        "\n"
        "bird_00.jpg\n"
        "bird_01.png\n"
    )
    return listing


class TestReadListFile:
    def test_comments_blanks_and_relative_paths(self, listed_images, tmp_path):
        paths = read_list_file(str(listed_images))
        assert paths == [str(tmp_path / "bird_00.jpg"),
                         str(tmp_path / "bird_01.png")]

    def test_absolute_entries_kept_verbatim(self, tmp_path, image_paths):
        listing = tmp_path / "abs.txt"
        listing.write_text(image_paths[0] + "\n")
        assert read_list_file(str(listing)) == [image_paths[0]]

    def test_missing_list_file_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            read_list_file(str(tmp_path / "nope.txt"))

    def test_empty_list_file_rejected(self, tmp_path):
        listing = tmp_path / "empty.txt"
        listing.write_text("# nothing here\n\n")
        with pytest.raises(ConfigError):
            read_list_file(str(listing))


class TestMain:
    def test_happy_path_prints_per_image_lines(self, listed_images, tmp_path,
                                               capsys):
        out = tmp_path / "feats"
        code = main(["--list", str(listed_images), "--out", str(out),
                     "--weights", "none"])
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "ok     bird_00"
        assert lines[1] == "ok     bird_01"
        assert lines[2].startswith("2/2 images extracted -> ")
        doc = json.loads((out / "manifest.json").read_text())
        assert [e["image"] for e in doc["images"]] == ["bird_00", "bird_01"]

    def test_missing_list_is_usage_error(self, tmp_path, capsys):
        code = main(["--list", str(tmp_path / "ghost.txt"),
                     "--out", str(tmp_path / "o"), "--weights", "none"])
        assert code == 2
        assert "ghost.txt" in capsys.readouterr().err

    def test_unknown_layer_is_usage_error(self, listed_images, tmp_path, capsys):
        code = main(["--list", str(listed_images), "--out", str(tmp_path / "o"),
                     "--layers", "relu5,fc7", "--weights", "none"])
        assert code == 2
        assert "fc7" in capsys.readouterr().err

    def test_all_images_failing_exits_nonzero(self, tmp_path, capsys):
        bad = tmp_path / "bad.jpg"
        bad.write_bytes(b"nope")
        listing = tmp_path / "bad.txt"
        listing.write_text("bad.jpg\n")
        code = main(["--list", str(listing), "--out", str(tmp_path / "o"),
                     "--weights", "none"])
        assert code == 1
        assert "failed bad" in capsys.readouterr().out
