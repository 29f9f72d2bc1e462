import pytest
from hypothesis import given, strategies as st

from bytedoc.swum import (
    CAMEL,
    FRAG,
    NP,
    PASCAL,
    S,
    SINV,
    SNAKE,
    UNKNOWN,
    ZIPF,
    PhraseUnavailable,
    analyze,
    generate_phrase,
    join_words,
    segment,
    tag_and_classify,
    third_person,
)


@pytest.mark.parametrize(
    "name, words, convention",
    [
        ("isPresaleReady", ("is", "presale", "ready"), CAMEL),
        ("TotalSupply", ("total", "supply"), PASCAL),
        ("claimed_tokens", ("claimed", "tokens"), SNAKE),
        ("MAX_INVESTMENTS_BEFORE_CHANGE", ("max", "investments", "before", "change"), SNAKE),
        ("getBlockNM", ("get", "block", "nm"), CAMEL),
        ("totalsupply", ("total", "supply"), ZIPF),
        ("balanceof", ("balance", "of"), ZIPF),
    ],
)
def test_segment(name, words, convention):
    seg = segment(name)
    assert seg.words == words and seg.convention == convention and not seg.unknown_word


def test_unsplittable_word_flagged():
    seg = segment("xqzkw")
    assert seg.unknown_word and seg.convention == ZIPF


@given(st.lists(st.sampled_from(["total", "supply", "owner", "block", "reward", "token", "max"]), min_size=2, max_size=4))
def test_camel_join_inverts_segment(words):
    name = words[0] + "".join(w.capitalize() for w in words[1:])
    seg = segment(name)
    assert seg.words == tuple(words) and join_words(seg) == name


@pytest.mark.parametrize(
    "words, cls",
    [
        (("is", "presale", "ready"), SINV),
        (("give", "block", "reward"), FRAG),
        (("owner", "withdraws"), S),
        (("total", "supply"), NP),
        (("approve",), UNKNOWN),
        (("balance", "of"), UNKNOWN),
    ],
)
def test_syntax_classes(words, cls):
    assert tag_and_classify(words).syntax_class == cls


@pytest.mark.parametrize(
    "sig, phrase",
    [
        ("isPresaleReady()", "Checks whether the presale is ready"),
        ("getBlockNM()", "Gets block nm"),
        ("totalSupply()", "Gets total supply"),
        ("giveBlockReward(address)", "Gives block reward"),
        ("claimed_tokens()", "Gets claimed tokens"),
        ("ownerWithdraws()", "Owner withdraws"),
    ],
)
def test_generate_phrase(sig, phrase):
    assert generate_phrase(sig) == phrase


@pytest.mark.parametrize("sig", ["MAX_INVESTMENTS_BEFORE_CHANGE()", "approve(address,uint256)", "xqzkw()", "f-g()"])
def test_phrase_unavailable(sig):
    with pytest.raises(PhraseUnavailable):
        generate_phrase(sig)


def test_analyze_reports_tags():
    _, tagged = analyze("MAX_INVESTMENTS_BEFORE_CHANGE()")
    assert "IN" in tagged.tags and tagged.syntax_class == UNKNOWN


@pytest.mark.parametrize("verb, form", [("get", "gets"), ("push", "pushes"), ("carry", "carries"), ("pay", "pays")])
def test_third_person(verb, form):
    assert third_person(verb) == form
