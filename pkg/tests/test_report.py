import io

from ctcrex import Decoding, RecordResult, Region, Span
from ctcrex.report import format_results, parse_predictions, write_results


def make_result():
    d = Decoding(text=" Jua Burgues ", log_score=-2.5,
                 alignment=tuple(range(13)), path_weight=-0.5,
                 char_tags=(None,) * 13, spans=())
    spans = (
        Span("name", "husband", 1, 4, 1, 4, "Jua"),
        Span("surname", "husband", 5, 12, 5, 12, "Burgues"),
    )
    region = Region("husband", 0, 13, d, spans)
    return RecordResult("7", True, "", (region,))


def test_round_trip_items():
    text = format_results([make_result()])
    parsed = parse_predictions(io.StringIO(text))
    assert parsed == {"7": [("husband", "name", "Jua"),
                            ("husband", "surname", "Burgues")]}


def test_format_is_tab_separated_blocks():
    text = format_results([make_result()])
    assert "record\t7" in text
    assert "status\tok" in text
    assert "region\thusband" in text
    assert "span\tname" in text
    assert "chars\t1 4" in text
    assert "frames\t1 4" in text
    for line in text.strip().split("\n"):
        assert line == "" or "\t" in line


def test_escaping_round_trip():
    d = Decoding(text="a\nb", log_score=0.0, alignment=(0, 1, 2),
                 path_weight=0.0, char_tags=(None,) * 3, spans=())
    span = Span("name", "husband", 0, 3, 0, 3, "a\nb")
    rr = RecordResult("0", True, "", (Region("husband", 0, 3, d, (span,)),))
    text = format_results([rr])
    assert "a\\nb" in text
    parsed = parse_predictions(io.StringIO(text))
    assert parsed["0"] == [("husband", "name", "a\nb")]


def test_noparse_record():
    rr = RecordResult("3", False, "coarse: nothing", ())
    text = format_results([rr])
    assert "status\tnoparse" in text and "reason\tcoarse: nothing" in text
    assert parse_predictions(io.StringIO(text)) == {"3": []}


def test_region_noparse_block():
    rr = RecordResult("4", True, "",
                      (Region("wife", 2, 9, None, (), "region 'wife': dead"),))
    text = format_results([rr])
    assert "noparse\tregion 'wife': dead" in text
    assert parse_predictions(io.StringIO(text)) == {"4": []}


def test_write_results_to_path(tmp_path):
    path = tmp_path / "out.tsv"
    write_results([make_result()], path)
    assert parse_predictions(path)["7"][0] == ("husband", "name", "Jua")
