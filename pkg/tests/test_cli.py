import csv
import io
import json

import pytest

from conftest import data_file
from nlum.cli import main
from nlum.consistency import is_coherent
from nlum.documents import DocumentError, ModelDocument
from nlum.fuzz import FAMILIES, case_seed, fuzz, make_case


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


# ---------------------------------------------------------------- classify


def test_classify_examples(capsys):
    code, out, _ = run(capsys, "classify", data_file("hbm_precise_01.json"))
    assert code == 0
    assert out.splitlines()[0] == "HBM, c=-1/10, b+2a=19/20"
    _, out, _ = run(capsys, "classify", data_file("pmm.json"))
    assert out.startswith("PMM,")
    _, report = run_json(capsys, "classify", data_file("not_nl.json"), "--json")
    assert report["tag"] == "NotNL"


def test_classify_counts(capsys):
    _, report = run_json(capsys, "classify", data_file("hbm_coherent.json"), "--json")
    assert (report["null"], report["universal"], report["essential"]) == (6, 2, 0)


# ---------------------------------------------------------------- check


def test_check_incoherent_hbm_names_atom_pair(capsys):
    code, verdict = run_json(capsys, "check", data_file("hbm_incoherent.json"), "--notion", "coherence")
    assert code == 1 and not verdict["holds"]
    assert verdict["witness"]["events"] == [["w1"], ["w2"]]


def test_check_exit_codes(capsys):
    code, verdict = run_json(capsys, "check", data_file("hbm_precise_two_atoms.json"), "--notion", "precise")
    assert code == 0 and verdict["holds"]
    code, verdict = run_json(capsys, "check", data_file("vacuous.json"), "--notion", "coherence")
    assert code == 0 and verdict["holds"] and verdict["method"] == "envelope"


def test_check_rationals_are_strings(capsys):
    _, verdict = run_json(capsys, "check", data_file("hbm_coherent.json"), "--notion", "asl")
    probs = verdict["witness"]["probabilities"]
    assert all(isinstance(x, str) for p in probs for x in p)


def test_unknown_notion_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["check", data_file("pmm.json"), "--notion", "3coherence"])
    assert exc.value.code == 2


def test_missing_file(capsys):
    code, _, err = run(capsys, "check", "/nonexistent.json", "--notion", "capacity")
    assert code == 2 and "cannot read" in err


@pytest.mark.parametrize("doc, field", [
    ({"atoms": ["w1", "w2"], "p0": ["1/2", "x"], "a": "0", "b": "1"}, "p0[1]"),
    ({"atoms": ["w1", "w2"], "p0": ["1/2", "1/2"], "b": "1"}, "a"),
    ({"atoms": ["w1", "w2"], "p0": ["1/2", "1/3"], "a": "0", "b": "1"}, "p0"),
    ({"atoms": ["w1", "w2"], "p0": ["1/2"], "a": "0", "b": "1"}, "p0"),
    ({"atoms": ["w1", "w2"], "p0": ["1/2", "1/2"], "a": 0.5, "b": "1"}, "a"),
    ({"atoms": ["w1", "w2"], "p0": ["1/2", "1/2"], "a": "0", "b": "1", "orientation": "sideways"}, "orientation"),
    ({"atoms": "w1", "p0": [], "a": "0", "b": "1"}, "atoms"),
])
def test_parse_errors_name_the_field(capsys, tmp_path, doc, field):
    code, _, err = run(capsys, "classify", write(tmp_path, "m.json", doc))
    assert code == 2
    assert err.startswith(f"error: {field}:")
    with pytest.raises(DocumentError) as exc:
        ModelDocument.from_json(doc)
    assert exc.value.field == field


def test_check_assessment_document(capsys, tmp_path):
    doc = {"atoms": ["w1", "w2"], "orientation": "lower",
           "values": [{"event": ["w1"], "value": "3/5"}, {"event": ["w2"], "value": "3/5"}]}
    code, verdict = run_json(capsys, "check", write(tmp_path, "a.json", doc), "--notion", "2coherence")
    assert code == 1 and verdict["witness"]["events"]


# ---------------------------------------------------------------- table


def test_table_precise_01_model(capsys):
    code, out, _ = run(capsys, "table", data_file("hbm_precise_01.json"))
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0][1:] == ["{}", "{w1}", "{w2}", "{w3}", "{w1,w2}", "{w1,w3}", "{w2,w3}", "{w1,w2,w3}"]
    assert rows[1] == ["P0", "0", "1/50", "1/50", "24/25", "1/25", "49/50", "49/50", "1"]
    assert rows[2] == ["lower", "0", "0", "0", "1", "0", "1", "1", "1"]
    assert rows[3] == ["upper", "0", "0", "0", "1", "0", "1", "1", "1"]


def test_table_coherent_hbm(capsys):
    _, doc = run_json(capsys, "table", data_file("hbm_coherent.json"), "--format", "json")
    values = {r["measure"]: r["values"] for r in doc["rows"]}
    assert values["P0"] == ["0", "1/2", "29/60", "1/60", "59/60", "31/60", "1/2", "1"]
    assert values["lower"] == ["0", "0", "0", "0", "1", "0", "0", "1"]
    assert values["upper"] == ["0", "1", "1", "0", "1", "1", "1", "1"]


def test_table_two_atom_rrm(capsys):
    _, doc = run_json(capsys, "table", data_file("rrm_two_atoms.json"), "--format", "json")
    assert len(doc["events"]) == 4
    from fractions import Fraction
    lower = [Fraction(x) for x in doc["rows"][1]["values"]]
    assert all(Fraction(1, 10) <= x <= Fraction(6, 10) for x in lower[1:3])


def test_table_decimal_columns_are_marked(capsys):
    _, out, _ = run(capsys, "table", data_file("pmm.json"), "--decimal")
    header = next(csv.reader(io.StringIO(out)))
    assert header[1:3] == ["{}", "{} ~approx"] and "{w1,w2} ~approx" in header
    assert len(header) == 1 + 2 * 8


def test_table_plot_data(capsys):
    _, data = run_json(capsys, "table", data_file("pmm.json"), "--plot-data", "--format", "json")
    assert len(data) == 8
    assert data[1] == {"event": ["w1"], "p0": "1/3", "lower": "4/15", "upper": "11/30"}


@pytest.mark.parametrize("name", ["hbm_incoherent.json", "hbm_coherent.json", "pmm.json", "hbm_precise_two_atoms.json"])
@pytest.mark.parametrize("notion", ["capacity", "2coherence", "asl", "2monotone", "subadditive", "convex", "precise", "coherence"])
def test_table_round_trip(capsys, tmp_path, name, notion):
    _, doc = run_json(capsys, "table", data_file(name), "--format", "json")
    table = write(tmp_path, "t.json", doc)
    if notion == "coherence":
        _, direct = run_json(capsys, "check", data_file(name), "--notion", notion)
        _, via = run_json(capsys, "check", table, "--notion", notion)
        assert direct["holds"] == via["holds"] == direct["details"].get("envelope", direct["holds"])
        return
    _, direct = run_json(capsys, "check", data_file(name), "--notion", notion)
    _, via = run_json(capsys, "check", table, "--notion", notion)
    assert direct == via


# ---------------------------------------------------------------- extend-interval


def test_extend_interval_event(capsys):
    code, doc = run_json(capsys, "extend-interval", data_file("interval_vacuous.json"), "--event", "w1,w2")
    assert code == 0 and (doc["lower"], doc["upper"]) == ("0", "1")


def test_extend_interval_unreachable(capsys):
    code, out, err = run(capsys, "extend-interval", data_file("interval_unreachable.json"))
    assert code == 1
    assert "i=1" in err
    assert json.loads(out)["reachable"] is False


def test_extend_interval_pmm_atoms(capsys, tmp_path):
    interval = {"atoms": ["w1", "w2", "w3"], "l": ["4/15"] * 3, "u": ["11/30"] * 3}
    _, ext = run_json(capsys, "extend-interval", write(tmp_path, "i.json", interval))
    _, table = run_json(capsys, "table", data_file("pmm.json"), "--format", "json")
    assert ext["rows"] == table["rows"][1:]


def test_extend_interval_unknown_atom(capsys):
    code, _, _ = run(capsys, "extend-interval", data_file("interval_vacuous.json"), "--event", "w9")
    assert code == 2


# ---------------------------------------------------------------- fuzz


def test_fuzz_deterministic(capsys):
    args = ("fuzz", "--cases", "6", "--seed", "7", "--atoms", "3-4")
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
    assert json.loads(first)["failures"] == []


def test_fuzz_workers_do_not_change_report():
    one = fuzz(8, "all", (3, 4), 3, workers=1)
    two = fuzz(8, "all", (3, 4), 3, workers=2)
    assert one.to_json({}) == two.to_json({})


def test_fuzz_replay(capsys):
    code, doc = run_json(capsys, "fuzz", "--replay", str(case_seed(5, 2)), "--family", "hbm", "--atoms", "3")
    assert code == 0 and doc["failures"] == []
    case = make_case(case_seed(5, 2), "hbm", (3, 3), 60)
    assert doc["model"] == ModelDocument.from_model(case.model).to_json()


def test_fuzz_rrm_three_atoms_never_coherent():
    for i in range(20):
        case = make_case(case_seed(1, i), "rrm", (3, 3), 60)
        assert not is_coherent(case.model.to_assessment())


def test_fuzz_report_written(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, _, _ = run(capsys, "fuzz", "--cases", "2", "--family", "vbm", "--atoms", "3", "--output", str(out))
    assert code == 0 and json.loads(out.read_text())["cases_run"] == 2


def test_families_cover_all():
    assert set(FAMILIES) == {"vbm", "hbm", "rrm", "hurwicz"}
