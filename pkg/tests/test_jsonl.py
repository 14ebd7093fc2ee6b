"""JSONL reading (strict and lenient) and writing."""

import json
import logging

import pytest

from outlinekit.jsonl import read_jsonl, read_jsonl_lenient, write_jsonl


class TestStrictRead:
    def test_reads_objects_and_skips_blanks(self, tmp_path):
        p = tmp_path / "a.jsonl"
        p.write_text('{"x": 1}\n\n{"x": 2}\n')
        assert list(read_jsonl(p)) == [{"x": 1}, {"x": 2}]

    def test_malformed_line_raises(self, tmp_path):
        p = tmp_path / "a.jsonl"
        p.write_text('{"x": 1}\n{broken\n')
        with pytest.raises(json.JSONDecodeError):
            list(read_jsonl(p))

    def test_non_object_raises(self, tmp_path):
        p = tmp_path / "a.jsonl"
        p.write_text("[1, 2]\n")
        with pytest.raises(ValueError, match="expected an object"):
            list(read_jsonl(p))

    def test_is_lazy(self, tmp_path):
        p = tmp_path / "a.jsonl"
        p.write_text('{"x": 1}\n{broken\n')
        it = read_jsonl(p)
        assert next(it) == {"x": 1}  # the bad line only fails when reached


class TestLenientRead:
    def test_fixture_file(self, data_dir):
        objs, skipped = read_jsonl_lenient(data_dir / "malformed.jsonl")
        assert [o["id"] for o in objs] == ["ok-1", "ok-2", "ok-3"]
        assert skipped == 2

    def test_logs_skips(self, tmp_path, caplog):
        p = tmp_path / "a.jsonl"
        p.write_text('{"x": 1}\nnonsense{\n"just a string"\n')
        with caplog.at_level(logging.WARNING, logger="outlinekit.jsonl"):
            objs, skipped = read_jsonl_lenient(p)
        assert objs == [{"x": 1}]
        assert skipped == 2
        messages = "\n".join(r.getMessage() for r in caplog.records)
        assert "skipping malformed line" in messages
        assert "skipping non-object line" in messages

    def test_clean_file(self, tmp_path):
        p = tmp_path / "a.jsonl"
        p.write_text('{"a": true}\n')
        assert read_jsonl_lenient(p) == ([{"a": True}], 0)


class TestWrite:
    def test_round_trip(self, tmp_path):
        p = tmp_path / "out.jsonl"
        rows = [{"id": "a", "n": 1}, {"id": "b", "note": "café"}]
        assert write_jsonl(p, rows) == 2
        assert list(read_jsonl(p)) == rows

    def test_creates_parent_dirs(self, tmp_path):
        p = tmp_path / "deep" / "nested" / "out.jsonl"
        assert write_jsonl(p, [{"x": 1}]) == 1
        assert p.exists()

    def test_unicode_not_escaped(self, tmp_path):
        p = tmp_path / "out.jsonl"
        write_jsonl(p, [{"t": "café"}])
        assert "café" in p.read_text(encoding="utf-8")

    def test_empty_iterable(self, tmp_path):
        p = tmp_path / "out.jsonl"
        assert write_jsonl(p, []) == 0
        assert p.read_text() == ""
