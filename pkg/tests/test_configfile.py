import pytest

from chronoseq.codec import TokenSequence, read_sequences, write_sequences
from chronoseq.configfile import ConfigParseError, format_kv, parse_kv_blocks, parse_kv_text


def test_scalars_and_types():
    kv = parse_kv_text(
        'name: "quoted"\nbare: word\nnum: 42\nrate: 1e-3\nflag_t: true\nflag_f: false\nempty:\n'
    )
    assert kv == {
        "name": "quoted",
        "bare": "word",
        "num": 42,
        "rate": 1e-3,
        "flag_t": True,
        "flag_f": False,
        "empty": "",
    }


def test_equals_sign_and_comments():
    kv = parse_kv_text("a = 3  # trailing comment\n# whole-line comment\nb: 'has # inside'\n")
    assert kv == {"a": 3, "b": "has # inside"}


def test_inline_and_multiline_lists():
    kv = parse_kv_text('xs: ["1", "2", "3"]\nys: [\n  "10",\n  "20",\n]\nzs: [4, 5]\n')
    assert kv["xs"] == ["1", "2", "3"]
    assert kv["ys"] == ["10", "20"]
    assert kv["zs"] == [4, 5]


def test_unterminated_list_rejected():
    with pytest.raises(ConfigParseError):
        parse_kv_text('xs: [\n "1",\n')


def test_line_without_separator_rejected():
    with pytest.raises(ConfigParseError):
        parse_kv_text("justaword\n")


def test_blocks():
    blocks = parse_kv_blocks("a: 1\nb: 2\n\n\nc: 3\n")
    assert blocks == [{"a": 1, "b": 2}, {"c": 3}]


def test_format_roundtrip():
    d = {"s": "text", "n": 5, "f": True, "xs": ["a", "b"]}
    assert parse_kv_text(format_kv(d)) == d


def test_sequence_file_flags_roundtrip(tmp_path):
    seqs = [
        TokenSequence(("year:2000", "age:1", "gender:2", "race:3", "[VS]", "v:9202", "[VE]", "[END]"),
                      person_id="p1"),
        TokenSequence(("year:2001", "age:2", "gender:2", "race:3", "[VS]", "v:9202", "[VE]"),
                      person_id=None, hit_max_tokens=True),
    ]
    path = tmp_path / "seqs.txt"
    write_sequences(seqs, path)
    back = read_sequences(path)
    assert back[0].person_id == "p1" and not back[0].hit_max_tokens
    assert back[1].person_id is None and back[1].hit_max_tokens
    assert back[0].tokens == seqs[0].tokens and back[1].tokens == seqs[1].tokens
