import pytest
from hypothesis import assume, given, strategies as st

from oracles import brute_lcs, raw_splice
from slidewin.merge import (
    MatchResult,
    MergeParams,
    WindowTranslationError,
    longest_common_substring,
    merge_with_backoff,
    splice,
    tail_base,
)

tokens = st.lists(st.sampled_from("abcd"), max_size=12)


def identity(ts):
    return list(ts)


def as_tuple(m):
    return (m.length, m.start_in_tail, m.start_in_window)


@pytest.mark.parametrize(
    "a, b",
    [("cdef", "abcd"), ("xyz", "xyz"), ("pq", "rs"), ("", "abc"), ("abab", "ab"), ("aaaa", "aa")],
)
def test_lcs_examples_match_oracle(a, b):
    assert as_tuple(longest_common_substring(list(a), list(b))) == brute_lcs(a, b)


def test_lcs_frozen_examples():
    assert as_tuple(longest_common_substring(list("cdef"), list("abcd"))) == (2, 0, 2)
    assert as_tuple(longest_common_substring(list("xyz"), list("xyz"))) == (3, 0, 0)
    assert longest_common_substring(list("pq"), list("rs")).length == 0
    # ties resolved towards the latest start in a, then in b
    assert as_tuple(longest_common_substring(list("abab"), list("ab"))) == (2, 2, 0)
    assert as_tuple(longest_common_substring(list("aaa"), list("aa"))) == (2, 1, 0)


def test_lcs_works_on_multichar_tokens():
    a = ["the", "cat", "sat"]
    b = ["a", "cat", "sat", "down"]
    assert as_tuple(longest_common_substring(a, b)) == (2, 1, 1)


@given(tokens, tokens)
def test_lcs_agrees_with_brute_force(a, b):
    m = longest_common_substring(a, b)
    assert as_tuple(m) == brute_lcs(a, b)
    assert a[m.start_in_tail : m.start_in_tail + m.length] == b[m.start_in_window : m.start_in_window + m.length]


def test_splice_with_match():
    out = splice(list("wxyz"), list("yzq"), MatchResult(2, 1, 0))
    assert out == list("wxyzq")


def test_splice_no_match_appends():
    assert splice(list("abc"), list("xyz"), MatchResult(0, 0, 0)) == list("abcxyz")


def test_splice_empty_stream():
    assert splice([], list("hi"), MatchResult(0, 0, 0)) == list("hi")


@given(tokens, tokens)
def test_splice_conservation_and_bounded_rewrite(output, window):
    base = tail_base(len(output), len(window))
    length, i, j = brute_lcs(output[base:], window)
    result = splice(output, window, MatchResult(length, i, j))
    assert result == raw_splice(output, window, length, i, j)
    if length:
        assert len(result) == base + i + len(window) - j
        assert result[: base + i] == output[: base + i]
    else:
        assert result == output + window
    # nothing further than |window| from the old end changes
    frozen = max(0, len(output) - len(window))
    assert result[:frozen] == output[:frozen]


def test_merge_identity_example():
    out, stats = merge_with_backoff(list("abc"), list("abcd"), identity, MergeParams(3, 0.4))
    assert out == list("abcd")
    assert stats.extra_retranslations == 0
    assert stats.match_len == 2 and stats.window_len_out == 3
    assert not stats.accepted_via_fallback


def test_merge_constant_translator_uses_subthreshold_match():
    calls = []

    def kappa(ts):
        calls.append(len(ts))
        return ["k"] * len(ts)

    out, stats = merge_with_backoff(["k"], list("abcdefghij"), kappa, MergeParams(3, 0.4, 5))
    # k = 0..5 history tokens, then the cap stops the loop
    assert calls == [3, 4, 5, 6, 7, 8]
    assert stats.extra_retranslations == 5
    assert stats.match_len == 1 and stats.window_len_out == 8
    assert not stats.accepted_via_fallback
    # match sits at the last window position, so only one token survives
    assert out == ["k"]


def test_merge_stops_when_history_is_exhausted():
    calls = []

    def kappa(ts):
        calls.append(len(ts))
        return ["k"] * len(ts)

    _, stats = merge_with_backoff(["k"], list("abcd"), kappa, MergeParams(3, 0.4, 5))
    assert calls == [3, 4]
    assert stats.extra_retranslations == 1


def test_merge_empty_output_falls_back():
    out, stats = merge_with_backoff([], ["a"], identity, MergeParams(3, 0.4))
    assert out == ["a"]
    assert stats.accepted_via_fallback
    assert stats.extra_retranslations == 0


def test_merge_zero_backoff_cap():
    calls = []

    def shift(ts):
        calls.append(1)
        return [t + "'" for t in ts]

    out, stats = merge_with_backoff(list("abc"), list("abcdefg"), shift, MergeParams(3, 0.4, 0))
    assert len(calls) == 1 and stats.accepted_via_fallback
    assert out == list("abc") + ["e'", "f'", "g'"]


def test_translator_failure_carries_window():
    def broken(ts):
        raise RuntimeError("boom")

    with pytest.raises(WindowTranslationError) as info:
        merge_with_backoff([], list("abcde"), broken, MergeParams(3, 0.4))
    assert info.value.window == list("cde")
    assert isinstance(info.value.__cause__, RuntimeError)


def test_empty_input_rejected():
    with pytest.raises(ValueError):
        merge_with_backoff([], [], identity)


@pytest.mark.parametrize("kwargs", [dict(window_len=0), dict(threshold=0.0), dict(threshold=1.0), dict(backoff_cap=-1)])
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        MergeParams(**kwargs)


def test_default_params():
    assert MergeParams() == MergeParams(16, 0.4, 5)


@given(st.lists(st.integers(0, 10**6), min_size=1, max_size=60, unique=True), st.integers(3, 16),
       st.sampled_from([0.1, 0.2, 0.3, 0.4]))
def test_identity_stream_fixpoint(ids, window_len, threshold):
    stream = [f"w{i}" for i in ids]
    params = MergeParams(window_len, threshold)
    out = []
    for n in range(1, len(stream) + 1):
        out, stats = merge_with_backoff(out, stream[:n], identity, params)
        assert out == stream[:n]
        assert stats.extra_retranslations == 0


@given(tokens, st.lists(st.sampled_from("abcd"), min_size=1, max_size=12), st.integers(1, 6),
       st.sampled_from([0.2, 0.4, 0.6]))
def test_no_backoff_when_first_match_suffices(output, inp, window_len, threshold):
    params = MergeParams(window_len, threshold)
    first = inp[-window_len:]
    m = longest_common_substring(output[tail_base(len(output), len(first)) :], first)
    assume(m.length >= len(first) * threshold)
    _, stats = merge_with_backoff(output, inp, identity, params)
    assert stats.extra_retranslations == 0


@given(tokens, st.lists(st.sampled_from("abcd"), min_size=1, max_size=12), st.integers(1, 6),
       st.integers(0, 5))
def test_merge_bounded_by_extra_cap(output, inp, window_len, cap):
    rev = lambda ts: list(reversed(ts))
    new, stats = merge_with_backoff(output, inp, rev, MergeParams(window_len, 0.5, cap))
    assert 0 <= stats.extra_retranslations <= cap
    keep = max(0, len(output) - stats.window_len_out)
    assert new[:keep] == output[:keep]
