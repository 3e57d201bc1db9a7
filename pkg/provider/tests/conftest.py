import random

import pytest

from emoship import protocol


def region_obj(cx, cy, w, h, feature, tag):
    return {"rect": [cx, cy, w, h], "feature": list(feature), "tag": tag}


def write_annotation(frames_dir, frame_id, regions, gt_attended=None):
    frames_dir.mkdir(parents=True, exist_ok=True)
    line = protocol.encode_response(
        {"op": "regions", "frame_id": frame_id, "regions": regions})
    if gt_attended is not None:
        import json
        obj = json.loads(line)
        obj["gt_attended"] = gt_attended
        line = (json.dumps(obj, separators=(",", ":")) + "\n").encode()
    (frames_dir / f"{frame_id}.json").write_bytes(line)


@pytest.fixture
def model_env(tmp_path):
    """A model directory (d_vis=4) with two annotated frames + one image."""
    model_dir = tmp_path / "model"
    model_dir.mkdir()
    (model_dir / "model.txt").write_text("d_vis = 4\nmax_regions = 5\n")
    frames = model_dir / "frames"
    # f0: features already at d_vis; Dog uppercased to exercise lowercasing
    write_annotation(frames, "f0", [
        region_obj(0.5, 0.5, 0.2, 0.2, [1.0, 2.0, 3.0, 4.0], "Dog"),
        region_obj(0.2, 0.8, 0.1, 0.1, [0.1, 0.2, 0.3, 0.4], "cat"),
    ], gt_attended=0)
    # f1: one short and one long feature, to exercise pad/truncate
    write_annotation(frames, "f1", [
        region_obj(0.4, 0.4, 0.3, 0.3, [9.0, 8.0], "tree"),
        region_obj(0.6, 0.6, 0.2, 0.2, [1, 2, 3, 4, 5, 6, 7], "tree"),
        region_obj(0.1, 0.1, 0.1, 0.1, [0.5] * 4, "car"),
    ])
    image_root = tmp_path / "images"
    image_root.mkdir()
    (image_root / "img0.png").write_bytes(
        bytes(random.Random(7).randrange(256) for _ in range(512)))
    return model_dir, image_root
