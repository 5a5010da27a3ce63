import io

import pytest

from erode.errors import CsvFormatError, RecordError, StoreFormatError
from erode.store import (
    CSV_HEADER,
    ExperimentRecord,
    ExperimentStore,
    QueryFilter,
    extract_dataset,
    load_store,
    parse_csv,
    read_store,
    save_store,
    to_csv,
)

HEADER = ",".join(CSV_HEADER) + "\n"


def rec(**kw):
    base = dict(po_material="PC52", to_material="OL37", machine="MEC-50", operation="debiting",
                regime="I", voltage_u=16.0, current_i=30.0, power_p=480.0, time_tp=152.0)
    base.update(kw)
    return ExperimentRecord(**base)


class TestParseCsv:
    def test_first_row(self):
        (r,) = parse_csv(HEADER + "PC52,OL37,MEC-50,debiting,I,16,30,480,152\n")
        assert (r.voltage_u, r.current_i, r.power_p, r.time_tp) == (16, 30, 480, 152)
        assert r.po_material == "PC52" and r.regime == "I" and r.id is None

    def test_header_only(self):
        assert parse_csv(HEADER) == []

    def test_empty_text(self):
        assert parse_csv("") == []

    def test_comments_and_blank_lines(self):
        text = "# note\n" + HEADER + "\n# another\nPC52,OL37,MEC-50,debiting,I,16,30,480,152\n"
        assert len(parse_csv(text)) == 1

    def test_power_mismatch_rejected(self):
        with pytest.raises(CsvFormatError) as exc:
            parse_csv(HEADER + "PC52,OL37,MEC-50,debiting,I,16,30,500,152\n")
        msg = str(exc.value)
        assert exc.value.line == 2
        assert "500" in msg and "480" in msg

    def test_wrong_column_count(self):
        with pytest.raises(CsvFormatError, match="line 3") as exc:
            parse_csv(HEADER + "PC52,OL37,MEC-50,debiting,I,16,30,480,152\nPC52,OL37,1\n")
        assert exc.value.line == 3

    def test_non_numeric(self):
        with pytest.raises(CsvFormatError) as exc:
            parse_csv(HEADER + "PC52,OL37,MEC-50,debiting,I,16,abc,480,152\n")
        assert exc.value.line == 2 and exc.value.column == "current_a"

    def test_bad_header(self):
        with pytest.raises(CsvFormatError, match="header"):
            parse_csv("a,b,c\n")

    def test_decimal_product(self, table1_records):
        r = table1_records[4]
        assert (r.voltage_u, r.current_i, r.power_p) == (15.5, 35.0, 542.5)

    def test_quoted_text_round_trip(self):
        r = rec(po_material="steel, alloyed")
        assert parse_csv(to_csv([r])) == [r]


class TestStore:
    def test_add_first(self):
        s = ExperimentStore()
        assert s.add(rec()) == 1
        assert len(s) == 1
        assert s.get(1).id == 1

    def test_add_table1(self, table1_records):
        s = ExperimentStore()
        assert [s.add(r) for r in table1_records] == list(range(1, 13))

    def test_negative_time_rejected(self, table1_store):
        with pytest.raises(RecordError):
            table1_store.add(rec(time_tp=-3.0))
        assert len(table1_store) == 12

    def test_ids_continue_after_load(self, tmp_path, table1_store):
        save_store(table1_store, tmp_path / "s")
        s = load_store(tmp_path / "s")
        assert s.add(rec()) == 13


class TestQuery:
    def test_by_po_material(self, table1_store):
        assert len(table1_store.query(QueryFilter(po_material="PC52"))) == 12

    def test_regime_iv(self, table1_store):
        got = table1_store.query(QueryFilter(regime="IV"))
        assert [r.power_p for r in got] == [3000, 4500, 7000]

    def test_no_match(self, table1_store):
        assert table1_store.query(QueryFilter(machine="XYZ")) == []

    def test_case_sensitive(self, table1_store):
        assert table1_store.query(QueryFilter(po_material="pc52")) == []

    def test_conjunction(self, table1_store):
        got = table1_store.query(QueryFilter(regime="IV", to_material="OL37"))
        assert len(got) == 3

    def test_ordered_by_id(self, table1_store):
        ids = [r.id for r in table1_store.query()]
        assert ids == sorted(ids)


class TestDataset:
    def test_sums(self, table1_store):
        d = extract_dataset(table1_store.records)
        assert sum(d.x) == 29902.5
        assert sum(d.y) == 1023
        assert d.label == "PC52/OL37 debiting"

    def test_single(self, table1_store):
        d = extract_dataset([table1_store.get(1)])
        assert d.points == ((480.0, 152.0),)

    def test_empty(self):
        with pytest.raises(ValueError):
            extract_dataset([])

    def test_mixed_label(self):
        d = extract_dataset([rec(), rec(po_material="X", operation="cut")])
        assert d.label == "mixed/OL37 mixed operations"


class TestStoreFile:
    def test_round_trip(self, tmp_path, table1_store):
        save_store(table1_store, tmp_path / "s")
        assert load_store(tmp_path / "s") == table1_store
        assert (tmp_path / "s").read_text().splitlines()[0] == "erode-store v1"

    def test_empty_file(self, tmp_path):
        (tmp_path / "s").write_text("")
        assert len(load_store(tmp_path / "s")) == 0

    def test_missing_field(self, table1_store):
        buf = io.StringIO()
        from erode.store import dump_store

        dump_store(table1_store, buf)
        lines = buf.getvalue().splitlines()
        lines[3] = lines[3].rsplit("\t", 1)[0]
        with pytest.raises(StoreFormatError) as exc:
            read_store(io.StringIO("\n".join(lines)))
        assert exc.value.line == 4

    def test_version_mismatch(self):
        with pytest.raises(StoreFormatError, match="version"):
            read_store(io.StringIO("erode-store v9\n"))

    def test_not_a_store(self):
        with pytest.raises(StoreFormatError):
            read_store(io.StringIO("hello\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_store(tmp_path / "nope")

    def test_invariant_checked_on_load(self):
        line = ("id=1\tpo_material=a\tto_material=b\tmachine=m\toperation=o\tregime=I\t"
                "voltage_u=1.0\tcurrent_i=1.0\tpower_p=5.0\ttime_tp=1.0")
        with pytest.raises(StoreFormatError, match="line 2"):
            read_store(io.StringIO("erode-store v1\n" + line + "\n"))
