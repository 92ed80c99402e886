import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chronoseq.codec import (
    LONG_GAP_DAYS,
    MAX_ATT_DAYS,
    TimeTriple,
    TokenClass,
    UnknownTokenError,
    att_days_of,
    att_token,
    classify_token,
    decompose_interval,
    recompose_interval,
)


def test_att_token_paper_examples():
    assert att_token(10) == "D10"
    assert att_token(1081) == "[LT]"
    assert att_token(0) == "D0"
    assert att_token(1080) == "D1080"  # boundary: 1080 still gets a day token


def test_att_token_rejects_negative():
    with pytest.raises(ValueError):
        att_token(-1)


@given(st.integers(min_value=0, max_value=5000))
@settings(max_examples=200)
def test_att_token_total_and_classified(n):
    tok = att_token(n)
    cls = classify_token(tok)
    if n <= MAX_ATT_DAYS:
        assert cls is TokenClass.ATT_DAY
        assert att_days_of(tok) == n
    else:
        assert cls is TokenClass.ATT_LT
        assert att_days_of(tok) == LONG_GAP_DAYS


def test_decompose_paper_examples():
    assert decompose_interval(396) == TimeTriple(1, 1, 1)
    assert decompose_interval(1) == TimeTriple(0, 0, 1)
    assert decompose_interval(0) == TimeTriple(0, 0, 0)
    assert decompose_interval(730) == TimeTriple(2, 0, 0)


@given(st.integers(min_value=0, max_value=1079))
@settings(max_examples=300)
def test_decompose_recomposition_identity(d):
    t = decompose_interval(d)
    assert recompose_interval(t) == d
    assert t.years >= 0 and 0 <= t.months <= 12 and 0 <= t.days <= 29


def test_classify_token_classes():
    cases = {
        "[PAD]": TokenClass.PAD,
        "[VS]": TokenClass.VS,
        "[VE]": TokenClass.VE,
        "[LT]": TokenClass.ATT_LT,
        "[END]": TokenClass.END,
        "D0": TokenClass.ATT_DAY,
        "D1080": TokenClass.ATT_DAY,
        "i-D4": TokenClass.ATT_DAY,
        "year:1995": TokenClass.YEAR,
        "age:45": TokenClass.AGE,
        "gender:8532": TokenClass.GENDER,
        "race:8527": TokenClass.RACE,
        "v:9202": TokenClass.VT,
        "dis:8536": TokenClass.DISCHARGE,
        "c:320128": TokenClass.CONCEPT,
        "d:1125315": TokenClass.CONCEPT,
        "p:4336464": TokenClass.CONCEPT,
    }
    for text, cls in cases.items():
        assert classify_token(text) is cls


def test_classify_rejects_junk():
    for text in ("D1081", "D-1", "i-D0", "foo", "x:12", "c:abc", ""):
        with pytest.raises(UnknownTokenError):
            classify_token(text)
