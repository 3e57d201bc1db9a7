import pytest

from emoship import protocol
from emoship.errors import InputError, ProtocolError

from pyprovider.backend import Backend, load_backend


class TestAssets:
    def test_missing_model_file_rejected(self, tmp_path):
        with pytest.raises(InputError, match="model.txt"):
            load_backend(tmp_path)

    def test_missing_d_vis_rejected(self, tmp_path):
        (tmp_path / "model.txt").write_text("max_regions = 3\n")
        with pytest.raises(InputError, match="d_vis"):
            load_backend(tmp_path)

    def test_malformed_line_cites_location(self, tmp_path):
        (tmp_path / "model.txt").write_text("d_vis 4\n")
        with pytest.raises(InputError, match=":1"):
            load_backend(tmp_path)


class TestRegions:
    def test_annotation_served_with_lowercased_tags(self, model_env):
        backend = Backend(*model_env)
        regions = backend.regions("f0")
        assert [r["tag"] for r in regions] == ["dog", "cat"]
        assert all(len(r["feature"]) == 4 for r in regions)

    def test_feature_pad_and_truncate_to_d_vis(self, model_env):
        backend = Backend(*model_env)
        regions = backend.regions("f1")
        assert regions[0]["feature"] == [9.0, 8.0, 0.0, 0.0]
        assert regions[1]["feature"] == [1.0, 2.0, 3.0, 4.0]

    def test_image_fallback_is_stable_and_well_formed(self, model_env):
        backend = Backend(*model_env)
        regions = backend.regions("img0")
        assert regions and regions == Backend(*model_env).regions("img0")
        for r in regions:
            cx, cy, w, h = r["rect"]
            assert w > 0 and h > 0
            assert 0 <= cx - w / 2 and cx + w / 2 <= 1
            assert 0 <= cy - h / 2 and cy + h / 2 <= 1
            assert len(r["feature"]) == 4
            assert r["tag"] == r["tag"].lower() != ""

    def test_unknown_frame_raises_protocol_error(self, model_env):
        backend = Backend(*model_env)
        with pytest.raises(ProtocolError, match="ghost"):
            backend.regions("ghost")


class TestAnswers:
    def test_vqa_prefers_tag_mentioned_in_question(self, model_env):
        backend = Backend(*model_env)
        assert backend.vqa("f0", "is there a cat here", [0, 1]) == "cat"
        assert backend.vqa("f0", "what is this", [0, 1]) == "dog"

    def test_caption_modal_tag(self, model_env):
        backend = Backend(*model_env)
        assert backend.caption("f1", [0, 1, 2]) == "a scene of tree"
        assert backend.caption("f0", [1]) == "a scene of cat"

    def test_empty_candidates_rejected(self, model_env):
        backend = Backend(*model_env)
        with pytest.raises(ProtocolError):
            backend.vqa("f0", "q", [])

    def test_out_of_range_candidate_rejected(self, model_env):
        backend = Backend(*model_env)
        with pytest.raises(ProtocolError):
            backend.caption("f0", [5])


class TestWire:
    def test_round_trip_through_primary_decoder(self, model_env):
        backend = Backend(*model_env)
        request = protocol.encode_request({"op": "regions", "frame_id": "f0"})
        response = backend.handle_line(request)
        decoded = protocol.decode_response(response, expected_op="regions",
                                           d_vis=4)
        assert decoded["frame_id"] == "f0"
        assert len(decoded["regions"]) == 2

    def test_identical_bytes_on_repeat(self, model_env):
        backend = Backend(*model_env)
        request = protocol.encode_request(
            {"op": "vqa", "frame_id": "f0", "question": "what",
             "candidate_ids": [0, 1]})
        assert backend.handle_line(request) == backend.handle_line(request)

    def test_unknown_frame_yields_error_response(self, model_env):
        backend = Backend(*model_env)
        request = protocol.encode_request({"op": "regions",
                                           "frame_id": "ghost"})
        decoded = protocol.decode_response(backend.handle_line(request))
        assert "error" in decoded and decoded["frame_id"] == "ghost"

    def test_empty_candidates_yield_error_response(self, model_env):
        backend = Backend(*model_env)
        request = protocol.encode_request(
            {"op": "vqa", "frame_id": "f0", "question": "q",
             "candidate_ids": []})
        assert "error" in protocol.decode_response(
            backend.handle_line(request))

    def test_undecodable_request_yields_error_line_not_crash(self, model_env):
        backend = Backend(*model_env)
        decoded = protocol.decode_response(backend.handle_line(b"garbage\n"))
        assert "error" in decoded
