import io

import pytest
from hypothesis import given, strategies as st

from oracles import prefix_offsets
from slidewin.align_windows import (
    AlignmentLink,
    AlignmentParseError,
    CorpusValidationError,
    collapse_corpus,
    emit_training_pairs,
    extract_windows,
    parse_alignment_line,
    read_alignments,
)


@pytest.mark.parametrize(
    "line, links",
    [
        ("0-0 1-2", [(0, 0), (1, 2)]),
        ("", []),
        ("3-1 3-2 4-1", [(3, 1), (3, 2), (4, 1)]),
        ("  10-7\n", [(10, 7)]),
    ],
)
def test_parse_alignment_line(line, links):
    assert parse_alignment_line(line) == links


@pytest.mark.parametrize("line, column", [("0-0 12", 5), ("0-0 1-x", 5), ("a-1", 1), ("0-0  -1", 6)])
def test_parse_errors_name_line_and_column(line, column):
    with pytest.raises(AlignmentParseError) as info:
        parse_alignment_line(line, lineno=7)
    assert (info.value.line, info.value.column) == (7, column)
    assert "line 7" in str(info.value)


def test_read_alignments_reports_line_number():
    with pytest.raises(AlignmentParseError, match="line 2"):
        read_alignments(["0-0", "0_0"])


def test_collapse_two_sentences():
    corpus = collapse_corpus([("a b", "x"), ("c", "y z")], [[(0, 0)], [(0, 1)]])
    assert corpus.source_tokens == ("a", "b", "c")
    assert corpus.target_tokens == ("x", "y", "z")
    assert corpus.link_set == {(0, 0), (2, 2)}


def test_collapse_single_pair_unchanged():
    corpus = collapse_corpus([("a b c", "x y")], [[(2, 0), (0, 1)]])
    assert corpus.link_set == {(2, 0), (0, 1)}


def test_collapse_empty_target_sentence():
    corpus = collapse_corpus([("a", ""), ("b", "x")], [[], [(0, 0)]])
    assert corpus.link_set == {(1, 0)}


def test_collapse_out_of_range_names_sentence():
    with pytest.raises(CorpusValidationError, match="sentence 2"):
        collapse_corpus([("a", "x"), ("b", "y")], [[(0, 0)], [(1, 0)]])


def test_collapse_count_mismatch():
    with pytest.raises(CorpusValidationError):
        collapse_corpus([("a", "x")], [])


def test_window_covering_all():
    corpus = collapse_corpus([("a b", "x"), ("c", "y z")], [[(0, 0)], [(0, 1)]])
    (w,) = extract_windows(corpus, 3, 3, seed=0)
    assert w.target == ("x", "y", "z")
    assert w.source == ("a", "b", "c")
    assert (w.span.src_start, w.span.src_end) == (0, 2)
    assert not w.partial


def test_single_link_window_gives_one_token():
    src = [f"s{i}" for i in range(8)]
    corpus = collapse_corpus([(src, ["t0", "t1"])], [[(5, 1)]])
    (w,) = extract_windows(corpus, 2, 2)
    assert w.source == ("s5",)


def test_unaligned_window_flagged_and_skipped():
    corpus = collapse_corpus([("a b", "x y z w")], [[(0, 0), (1, 1)]])
    windows = extract_windows(corpus, 2, 2)
    assert [w.aligned for w in windows] == [True, False]
    assert windows[1].source == ()
    buf = io.StringIO()
    assert emit_training_pairs(windows, buf) == 1
    assert buf.getvalue() == "a b ||| x y\n"


def test_final_window_partial():
    corpus = collapse_corpus([("a", "x y z w v")], [[(0, 0)]])
    windows = extract_windows(corpus, 2, 2)
    assert [len(w.target) for w in windows] == [2, 2, 1]
    assert [w.partial for w in windows] == [False, False, True]


def test_emit_counts(tmp_path):
    corpus = collapse_corpus([("a b", "x y"), ("c d", "z w")], [[(0, 0), (1, 1)], [(0, 0), (1, 1)]])
    windows = extract_windows(corpus, 2, 2)
    path = tmp_path / "pairs.txt"
    assert emit_training_pairs(windows, path) == 2
    assert path.read_text().splitlines() == ["a b ||| x y", "c d ||| z w"]
    empty = tmp_path / "empty.txt"
    assert emit_training_pairs([], empty) == 0
    assert empty.read_text() == ""


def test_emit_io_error_names_path(tmp_path):
    bad = tmp_path / "missing-dir" / "out.txt"
    with pytest.raises(OSError, match="missing-dir"):
        emit_training_pairs([], bad)


def test_invalid_lengths():
    corpus = collapse_corpus([("a", "x")], [[(0, 0)]])
    with pytest.raises(ValueError):
        extract_windows(corpus, 0, 3)
    with pytest.raises(ValueError):
        extract_windows(corpus, 4, 3)


@st.composite
def toy_corpora(draw):
    n = draw(st.integers(1, 5))
    pairs, aligns = [], []
    for k in range(n):
        s = [f"s{k}.{i}" for i in range(draw(st.integers(0, 6)))]
        t = [f"t{k}.{j}" for j in range(draw(st.integers(0, 6)))]
        links = []
        if s and t:
            links = draw(st.lists(st.tuples(st.integers(0, len(s) - 1), st.integers(0, len(t) - 1)), max_size=8))
        pairs.append((s, t))
        aligns.append(links)
    return pairs, aligns


@given(toy_corpora())
def test_collapse_offsets_match_prefix_sums(data):
    pairs, aligns = data
    corpus = collapse_corpus(pairs, aligns)
    src_off = prefix_offsets([s for s, _ in pairs])
    tgt_off = prefix_offsets([t for _, t in pairs])
    expected = {(i + src_off[k], j + tgt_off[k]) for k, links in enumerate(aligns) for i, j in links}
    assert corpus.link_set == expected
    for k, links in enumerate(aligns):
        s, t = pairs[k]
        for i, j in links:
            assert corpus.source_tokens[i + src_off[k]] == s[i]
            assert corpus.target_tokens[j + tgt_off[k]] == t[j]


@given(toy_corpora(), st.integers(1, 4), st.integers(0, 3), st.integers(0, 2**32))
def test_windows_tile_and_cover_links(data, min_len, extra, seed):
    corpus = collapse_corpus(*data)
    windows = extract_windows(corpus, min_len, min_len + extra, seed)
    assert sum((w.target for w in windows), ()) == corpus.target_tokens
    pos = 0
    for w in windows:
        assert w.span.tgt_start == pos
        pos += w.span.tgt_len
        inside = [i for i, j in corpus.links if pos - w.span.tgt_len <= j < pos]
        if inside:
            assert (w.span.src_start, w.span.src_end) == (min(inside), max(inside))
            assert w.source == corpus.source_tokens[min(inside) : max(inside) + 1]
        else:
            assert not w.aligned and w.source == ()
        if w is not windows[-1]:
            assert min_len <= w.span.tgt_len <= min_len + extra


@given(toy_corpora(), st.integers(0, 1000))
def test_window_determinism(data, seed):
    corpus = collapse_corpus(*data)
    assert extract_windows(corpus, 1, 4, seed) == extract_windows(corpus, 1, 4, seed)


def test_links_are_namedtuples():
    assert parse_alignment_line("1-2")[0] == AlignmentLink(src=1, tgt=2)
