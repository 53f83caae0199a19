import pytest
from hypothesis import given, strategies as st

from roitel import (
    DetectionStream,
    DuplicateKey,
    FrameClock,
    InvalidParam,
    ParseError,
    gen_synthetic,
    inject_confidence_noise,
    parse_generic_csv,
    parse_sidecar_csv,
    parse_uavdt_gt,
    parse_visdrone_mot,
    write_generic_csv,
)
from helpers import mk_det, mk_stream


# --- generic CSV ------------------------------------------------------------


def test_generic_row_parses():
    stream = parse_generic_csv("0,-1,10,20,30,40,0.9,2\n")
    assert stream.n_detections == 1
    det = next(stream.iter_detections())
    assert det.frame_index == 0
    assert det.track_hint is None  # -1 means no hint
    assert (det.bbox.x, det.bbox.y, det.bbox.w, det.bbox.h) == (10.0, 20.0, 30.0, 40.0)
    assert det.confidence == 0.9
    assert det.class_id == 2


def test_generic_hint_preserved():
    det = next(parse_generic_csv("3,17,0,0,5,5,0.5,0\n").iter_detections())
    assert det.frame_index == 3
    assert det.track_hint == 17


def test_generic_skips_comments_and_blanks():
    text = "# a comment\n\n0,-1,0,0,5,5,0.5,0\n   \n# more\n1,-1,0,0,5,5,0.5,0\n"
    stream = parse_generic_csv(text)
    assert stream.n_detections == 2
    assert [f for f, _ in stream.frames] == [0, 1]


def test_generic_crlf_accepted():
    stream = parse_generic_csv("0,-1,0,0,5,5,0.5,0\r\n1,-1,0,0,5,5,0.5,0\r\n")
    assert stream.n_detections == 2


@pytest.mark.parametrize(
    "row,fragment",
    [
        ("0,-1,10,20,30,40,1.5,2", "confidence out of range"),
        ("0,-1,10,20,30,40,-0.1,2", "confidence out of range"),
        ("0,-1,10,20,0,40,0.9,2", "non-positive width"),
        ("0,-1,10,20,30,-1,0.9,2", "non-positive height"),
        ("-1,-1,10,20,30,40,0.9,2", "negative frame"),
        ("0,-1,10,20,30,40,0.9", "expected 8 columns"),
        ("0,-1,ten,20,30,40,0.9,2", "non-numeric x"),
    ],
)
def test_generic_rejects_bad_rows(row, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_generic_csv(row + "\n")


def test_parse_error_carries_line_number():
    text = "0,-1,0,0,5,5,0.5,0\n1,-1,0,0,5,5,1.5,0\n"
    with pytest.raises(ParseError) as exc:
        parse_generic_csv(text)
    assert exc.value.line_no == 2


def test_errors_out_collects_all_and_keeps_good_rows():
    text = (
        "0,-1,0,0,5,5,0.5,0\n"
        "1,-1,0,0,5,5,1.5,0\n"  # bad conf
        "2,-1,0,0,0,5,0.5,0\n"  # bad width
        "3,-1,0,0,5,5,0.5,0\n"
    )
    errors: list[ParseError] = []
    stream = parse_generic_csv(text, errors_out=errors)
    assert stream.n_detections == 2
    assert [e.line_no for e in errors] == [2, 3]


def test_column_order_override():
    cols = ("conf", "frame", "track_hint", "x", "y", "w", "h", "class")
    stream = parse_generic_csv("0.7,4,-1,1,2,3,4,0\n", columns=cols)
    det = next(stream.iter_detections())
    assert det.frame_index == 4
    assert det.confidence == 0.7


def test_column_override_missing_required_name():
    with pytest.raises(InvalidParam, match="conf"):
        parse_generic_csv("", columns=("frame", "track_hint", "x", "y", "w", "h", "class"))


def test_clock_comment_and_precedence():
    text = "# clock: fps=30.0 stride=2\n0,-1,0,0,5,5,0.5,0\n"
    stream = parse_generic_csv(text)
    assert stream.clock == FrameClock(fps=30.0, frame_stride=2)
    # an explicit clock argument beats the file comment
    forced = parse_generic_csv(text, clock=FrameClock(fps=10.0, frame_stride=1))
    assert forced.clock == FrameClock(fps=10.0, frame_stride=1)
    # neither present: defaults
    bare = parse_generic_csv("0,-1,0,0,5,5,0.5,0\n")
    assert bare.clock == FrameClock()


# --- benchmark formats ------------------------------------------------------


def test_uavdt_row_normalizes():
    stream = parse_uavdt_gt("1,3,100,50,20,10,0,0,1\n")
    det = next(stream.iter_detections())
    assert det.frame_index == 0  # 1-based input
    assert det.track_hint == 3
    assert det.confidence == 1.0
    assert det.class_id == 1
    assert (det.bbox.x, det.bbox.y, det.bbox.w, det.bbox.h) == (100.0, 50.0, 20.0, 10.0)


def test_uavdt_rejects_frame_zero():
    with pytest.raises(ParseError, match=">= 1"):
        parse_uavdt_gt("0,3,100,50,20,10,0,0,1\n")


def test_uavdt_rejects_wrong_arity():
    with pytest.raises(ParseError, match="expected 9 columns"):
        parse_uavdt_gt("1,3,100,50,20,10,0,0\n")


def test_visdrone_score_clamped_to_confidence():
    text = "1,5,0,0,10,10,0.8,2,0,0\n2,5,0,0,10,10,1.5,2,0,0\n3,5,0,0,10,10,-0.5,2,0,0\n"
    stream = parse_visdrone_mot(text)
    confs = [d.confidence for d in stream.iter_detections()]
    assert confs == [0.8, 1.0, 0.0]


def test_visdrone_rejects_wrong_arity():
    with pytest.raises(ParseError, match="expected 10 columns"):
        parse_visdrone_mot("1,5,0,0,10,10,0.8,2,0\n")


# --- sidecar ----------------------------------------------------------------


def test_sidecar_full_row():
    sc = parse_sidecar_csv("10,4,0.20,0.35,7,7,1.9,1.1,1300\n")
    rec = sc.get(10, 4)
    assert rec is not None
    assert rec.video_conf == 0.20
    assert rec.still_conf == 0.35
    assert (rec.video_label, rec.still_label) == (7, 7)
    assert rec.video_entropy == 1.9
    assert rec.still_entropy == 1.1
    assert rec.payload_bytes == 1300


def test_sidecar_payload_optional():
    sc = parse_sidecar_csv("10,4,0.20,0.35,7,7,1.9,1.1\n")
    assert sc.get(10, 4).payload_bytes is None
    assert len(sc) == 1
    assert (10, 4) in sc
    assert sc.get(10, 5) is None


def test_sidecar_duplicate_key_rejected():
    text = "10,4,0.2,0.3,7,7,1.9,1.1\n10,4,0.2,0.3,7,7,1.9,1.1\n"
    with pytest.raises(DuplicateKey):
        parse_sidecar_csv(text)


@pytest.mark.parametrize(
    "row,fragment",
    [
        ("10,4,1.2,0.3,7,7,1.9,1.1", "video_conf"),
        ("10,4,0.2,0.3,7,7,-0.5,1.1", "video_entropy"),
        ("10,4,0.2,0.3,7,7,1.9,1.1,0", "payload_bytes"),
        ("10,4,0.2,0.3,7,7,1.9", "expected 8 or 9 columns"),
    ],
)
def test_sidecar_rejects_bad_rows(row, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_sidecar_csv(row + "\n")


def test_sidecar_errors_out_collects():
    text = "10,4,0.2,0.3,7,7,1.9,1.1\n11,4,1.2,0.3,7,7,1.9,1.1\n12,4,0.2,0.3,7,7,1.9,1.1\n"
    errors: list[ParseError] = []
    sc = parse_sidecar_csv(text, errors_out=errors)
    assert len(sc) == 2
    assert [e.line_no for e in errors] == [2]


# --- stream container -------------------------------------------------------


def test_from_frames_requires_increasing_indices():
    with pytest.raises(InvalidParam, match="strictly increase"):
        mk_stream([(0, []), (0, [])])
    with pytest.raises(InvalidParam, match="strictly increase"):
        mk_stream([(5, []), (3, [])])


def test_from_frames_checks_detection_frame_match():
    with pytest.raises(InvalidParam, match="does not match"):
        mk_stream([(0, [mk_det(1)])])


def test_stream_properties():
    stream = mk_stream([(2, [mk_det(2)]), (7, []), (9, [mk_det(9), mk_det(9, x=50)])])
    assert stream.first_frame == 2
    assert stream.last_frame == 9
    assert stream.n_detections == 3
    empty = mk_stream([])
    assert empty.first_frame is None
    assert empty.last_frame is None
    assert empty.n_detections == 0


# --- writer round trip ------------------------------------------------------


def test_write_then_parse_round_trips():
    stream = gen_synthetic(seed=7, n_frames=40, mean_objects=3.0, clock=FrameClock())
    # drop empty frames first: they are not representable in the CSV
    dense = DetectionStream.from_frames(
        stream.clock, ((f, d) for f, d in stream.frames if d)
    )
    again = parse_generic_csv(write_generic_csv(dense))
    assert again == dense


def test_round_trip_drops_empty_frames():
    stream = mk_stream([(0, [mk_det(0)]), (1, []), (2, [mk_det(2)])])
    again = parse_generic_csv(write_generic_csv(stream))
    assert [f for f, _ in again.frames] == [0, 2]
    assert again.n_detections == 2


def test_writer_embeds_clock():
    stream = mk_stream([(0, [mk_det(0)])], clock=FrameClock(fps=24.0, frame_stride=3))
    assert parse_generic_csv(write_generic_csv(stream)).clock == stream.clock


@given(seed=st.integers(0, 2**32 - 1))
def test_round_trip_property(seed):
    stream = gen_synthetic(seed=seed, n_frames=20, mean_objects=2.0, clock=FrameClock())
    dense = DetectionStream.from_frames(
        stream.clock, ((f, d) for f, d in stream.frames if d)
    )
    assert parse_generic_csv(write_generic_csv(dense)) == dense


# --- synthetic generator ----------------------------------------------------


def test_gen_synthetic_deterministic():
    a = gen_synthetic(seed=1, n_frames=60, mean_objects=5.0, clock=FrameClock())
    b = gen_synthetic(seed=1, n_frames=60, mean_objects=5.0, clock=FrameClock())
    assert a == b


def test_gen_synthetic_golden_count():
    stream = gen_synthetic(seed=1, n_frames=60, mean_objects=5.0, clock=FrameClock())
    assert stream.n_detections == 242


def test_gen_synthetic_all_frames_present():
    stream = gen_synthetic(seed=3, n_frames=50, mean_objects=1.0, clock=FrameClock())
    assert [f for f, _ in stream.frames] == list(range(50))


def test_gen_synthetic_zero_objects():
    stream = gen_synthetic(seed=0, n_frames=10, mean_objects=0.0, clock=FrameClock())
    assert stream.n_detections == 0
    assert len(stream.frames) == 10


def test_gen_synthetic_detections_in_bounds():
    stream = gen_synthetic(
        seed=9, n_frames=80, mean_objects=4.0, clock=FrameClock(), frame_w=640.0, frame_h=480.0
    )
    assert stream.n_detections > 0
    for det in stream.iter_detections():
        assert 0.0 <= det.confidence <= 1.0
        assert det.bbox.x >= 0.0
        assert det.bbox.y >= 0.0
        assert 8.0 <= det.bbox.w <= 80.0
        assert 8.0 <= det.bbox.h <= 60.0
        assert 0 <= det.class_id < 5
        assert det.track_hint is not None


def test_gen_synthetic_validates_args():
    with pytest.raises(InvalidParam):
        gen_synthetic(seed=0, n_frames=0, mean_objects=1.0, clock=FrameClock())
    with pytest.raises(InvalidParam):
        gen_synthetic(seed=0, n_frames=10, mean_objects=-1.0, clock=FrameClock())


# --- confidence noise -------------------------------------------------------


def test_inject_confidence_noise_lowers_within_bound():
    stream = gen_synthetic(seed=2, n_frames=30, mean_objects=4.0, clock=FrameClock())
    noisy = inject_confidence_noise(stream, amount=0.3, seed=11)
    assert noisy.clock == stream.clock
    for before, after in zip(stream.iter_detections(), noisy.iter_detections()):
        assert after.bbox == before.bbox
        assert after.confidence <= before.confidence
        assert after.confidence >= max(before.confidence - 0.3, 0.0) - 1e-12
        assert after.confidence >= 0.0


def test_inject_confidence_noise_deterministic():
    stream = gen_synthetic(seed=2, n_frames=30, mean_objects=4.0, clock=FrameClock())
    assert inject_confidence_noise(stream, 0.2, seed=5) == inject_confidence_noise(
        stream, 0.2, seed=5
    )


def test_inject_confidence_noise_zero_amount_is_identity():
    stream = gen_synthetic(seed=2, n_frames=10, mean_objects=2.0, clock=FrameClock())
    assert inject_confidence_noise(stream, 0.0, seed=5) == stream


def test_inject_confidence_noise_rejects_negative():
    stream = mk_stream([(0, [mk_det(0)])])
    with pytest.raises(InvalidParam):
        inject_confidence_noise(stream, -0.1, seed=0)
