import json
import subprocess

import pytest


def run_magniglyph(*args):
    """Invoke the primary toolkit's CLI as an external command."""
    return subprocess.run(["magniglyph", *map(str, args)],
                          capture_output=True, text=True)


def make_dataset(out_dir, spec_path, count, base_seed, rates="1.2",
                 split=1.0, extra=None):
    doc = {"count": count, "base_seed": base_seed,
           "image_size": [64, 64], "char_count": [2, 3],
           "glyph_height": [12, 16], "distractor_count": 1}
    doc.update(extra or {})
    spec_path.write_text(json.dumps(doc), encoding="utf-8")
    proc = run_magniglyph("generate", "--synthetic", spec_path,
                          "--rates", rates, "--split", split,
                          "--out", out_dir)
    assert proc.returncode == 0, proc.stderr
    return out_dir


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("small")
    return make_dataset(root / "data", root / "spec.json",
                        count=4, base_seed=900)
