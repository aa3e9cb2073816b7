import json
import subprocess
import sys

import pytest

from costparity.cli import main, money
from costparity.corpus import case_map
from costparity.cost_model import canonical_schedule, schedule_from_dict
from costparity.workload import evaluate, task_from_dict


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc), encoding="utf-8")
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def export(tmp_path):
    def _export(case, part):
        return write(tmp_path, f"{case}_{part}.json", case_map()[case].export()[part])

    return _export


@pytest.fixture
def trends(tmp_path):
    def _trends(**halving):
        return write(tmp_path, "trends.json", halving)

    return _trends


def test_money_rendering():
    assert money(1e-5) == "10µ$"
    assert money(1.234e-5) == "12.3µ$"
    assert money(0.1) == "$0.100"
    assert money(40.0) == "$40.00"
    assert money(1005.0) == "$1,005.00"
    assert money(0) == "$0"


def test_schedule_default(capsys):
    code, out, _ = run(capsys, "schedule")
    assert code == 0
    assert "WAN: 1 GB per $1" in out
    assert "Instructions: 10 T instructions per $1" in out
    assert "CPU time: 8 cpu-hours per $1" in out
    assert "DB accesses: 10 M accesses per $1" in out
    assert "Disk bandwidth: 10 TB per $1" in out


def test_schedule_project_zero_is_identity(capsys, trends):
    path = trends(wan=12, instruction=18)
    _, plain, _ = run(capsys, "schedule")
    code, projected, _ = run(capsys, "schedule", "--project", "0", "--trends", path)
    assert code == 0
    assert projected == plain


def test_schedule_derive(capsys, tmp_path):
    baseline = write(tmp_path, "hw.json", {
        "cpu_price": 2000, "cpu_clock_hz": "2G", "disk_price": 200, "disk_capacity": "200GB",
        "disk_accesses_per_sec": 100, "disk_transfer_bytes_per_sec": "50MB",
        "wan_price_per_month": 100, "wan_bits_per_sec": "1M",
    })
    code, out, _ = run(capsys, "schedule", "--derive", "--baseline", baseline)
    assert code == 0
    assert out.count("vs canonical") == 8
    code, out, _ = run(capsys, "schedule", "--derive", "--baseline", baseline, "--json")
    ratios = json.loads(out)["ratio_to_canonical"]
    assert all(1 / 3 <= r <= 3 for r in ratios.values())


def test_schedule_flag_conflicts(capsys, tmp_path):
    path = write(tmp_path, "s.json", {})
    assert run(capsys, "schedule", "--file", path, "--derive", "--baseline", path)[0] == 1
    assert run(capsys, "schedule", "--project", "3")[0] == 1


def test_schedule_file_errors(capsys, tmp_path):
    assert run(capsys, "schedule", "--file", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "schedule", "--file", write(tmp_path, "bad.json", "{not json"))[0] == 2
    code, _, err = run(capsys, "schedule", "--file", write(tmp_path, "s.json", {"usd_per_x": 1}))
    assert code == 1 and "usd_per_x" in err


def test_schedule_json_round_trip(capsys, tmp_path):
    code, out, _ = run(capsys, "schedule", "--json")
    assert code == 0
    assert schedule_from_dict(json.loads(out)["schedule"]) == canonical_schedule()


def test_task_cost_ftp(capsys, export):
    code, out, _ = run(capsys, "task", "cost", "--task", export("ftp_100mb", "task"))
    assert code == 0
    assert "$0.100" in out
    assert "99.0%" in out


def test_task_cost_json_round_trip(capsys, export):
    path = export("html_access", "task")
    code, out, _ = run(capsys, "task", "cost", "--task", path, "--json")
    assert code == 0
    doc = json.loads(out)
    again = evaluate(task_from_dict(json.loads(open(path).read())), canonical_schedule())
    assert doc["total"] == again.total
    assert doc["fractions"]["network"] == again.fractions["network"]


def test_task_cost_micro_dollars(capsys, export):
    _, out, _ = run(capsys, "task", "cost", "--task", export("html_access", "task"))
    assert "µ$" in out


def test_task_cost_empty(capsys, tmp_path):
    code, out, _ = run(capsys, "task", "cost", "--task", write(tmp_path, "e.json", {"name": "empty"}))
    assert code == 0
    assert "total" in out and "$0" in out


def test_task_classify(capsys, export):
    code, out, _ = run(capsys, "task", "classify", "--task", export("data_loading", "task"))
    assert code == 0
    assert "StayHome (1,000 instr/B < 10,000)" in out
    _, out, _ = run(capsys, "task", "classify", "--task", export("sloan_vision", "task"))
    assert "BreakEven (10,000 <= 10,000 instr/B < 30,000)" in out
    _, out, _ = run(capsys, "task", "classify", "--task", export("crack_propagation", "task"))
    assert "Mobile" in out and "Advisory" in out
    _, out, _ = run(capsys, "task", "classify", "--task", export("pixar_render", "task"), "--json")
    assert json.loads(out)["class"] == "Mobile"


def test_task_errors(capsys, tmp_path):
    both = write(tmp_path, "both.json", {"instructions": 1, "cpu_hours": 1})
    assert run(capsys, "task", "cost", "--task", both)[0] == 1
    assert run(capsys, "task", "cost", "--task", str(tmp_path / "nope.json"))[0] == 2
    local = write(tmp_path, "local.json", {"instructions": 10})
    code, _, err = run(capsys, "task", "classify", "--task", local)
    assert code == 1 and "intensity undefined" in err


def test_place_filter_demo(capsys, export):
    code, out, _ = run(capsys, "place", "--plan", export("filter_pushdown_demo", "plan"))
    assert code == 0
    assert "filter -> archive" in out
    assert "Total: $1.00" in out


def test_place_blast(capsys, export):
    code, out, _ = run(capsys, "place", "--plan", export("blast_swissprot", "plan"))
    assert code == 0
    assert "search -> server" in out
    assert "$40.00 to ship 40GB" in out


def test_place_single_source(capsys, tmp_path):
    plan = write(tmp_path, "p.json", {
        "sites": [{"id": "a"}, {"id": "b"}],
        "client_site": "b",
        "root": {"source": {"site": "a", "bytes": "2GB"}},
    })
    code, out, _ = run(capsys, "place", "--plan", plan, "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["assignment"] == {}
    assert doc["total_cost"] == pytest.approx(2.0)


def test_place_errors(capsys, tmp_path):
    pinned = write(tmp_path, "p.json", {
        "sites": [{"id": "a"}],
        "client_site": "a",
        "root": {"operator": {"pinned_site": "zz", "children": [{"source": {"site": "a", "bytes": 1}}]}},
    })
    assert run(capsys, "place", "--plan", pinned)[0] == 1
    assert run(capsys, "place", "--plan", str(tmp_path / "none.json"))[0] == 2


def test_corpus_run(capsys):
    code, out, _ = run(capsys, "corpus", "run")
    assert code == 0
    assert "12/12 pass" in out


def test_corpus_single_case(capsys):
    code, out, _ = run(capsys, "corpus", "run", "--case", "ftp_100mb")
    assert code == 0
    assert "PASS ftp_100mb" in out
    assert "1/1 pass" in out


def test_corpus_json(capsys):
    code, out, _ = run(capsys, "corpus", "run", "--json")
    doc = json.loads(out)
    assert code == 0
    assert doc["passed"] == 12 and doc["failed"] == 0
    assert [c["name"] for c in doc["cases"]] == sorted(c["name"] for c in doc["cases"])


def test_corpus_unknown_case(capsys):
    assert run(capsys, "corpus", "run", "--case", "nope")[0] == 1


def test_corpus_failure_exit_code(capsys, tmp_path):
    # off-canonical schedules skip the price-bound assertions
    cheap = write(tmp_path, "s.json", {"usd_per_wan_byte": 2e-9})
    code, out, _ = run(capsys, "corpus", "run", "--schedule", cheap)
    assert code == 0
    assert "[skip]" in out


def test_crossover(capsys, trends):
    path = trends(wan=12, instruction=18)
    code, out, _ = run(capsys, "crossover", "--trends", path, "--intensity", "5000")
    assert code == 0
    assert out.splitlines()[0] == "36 months"
    _, out, _ = run(capsys, "crossover", "--trends", path, "--intensity", "10000")
    assert out.splitlines()[0] == "0 months"
    moore = trends(wan="constant", instruction=18)
    _, out, _ = run(capsys, "crossover", "--trends", moore, "--intensity", "5000")
    assert out.strip() == "never"
    _, out, _ = run(capsys, "crossover", "--trends", moore, "--intensity", "5000", "--json")
    assert json.loads(out)["months"] == "never"


def test_crossover_errors(capsys, trends):
    assert run(capsys, "crossover", "--trends", trends(wan=-1), "--intensity", "5")[0] == 1
    assert run(capsys, "crossover", "--trends", trends(wan=12), "--intensity", "0")[0] == 1


def test_module_entry_point(tmp_path):
    bad = write(tmp_path, "bad.json", {"instructions": 1, "cpu_hours": 2})
    proc = subprocess.run(
        [sys.executable, "-m", "costparity", "task", "cost", "--task", bad],
        capture_output=True, text=True,
    )
    assert proc.returncode == 1
    assert proc.stdout == ""
    assert "error" in proc.stderr
