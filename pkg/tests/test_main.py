import json
import shutil

from typer.testing import CliRunner

from main import app, run, selftest_rows

runner = CliRunner()


def invoke(*args):
    return runner.invoke(app, list(args))


def test_analyze_smooth_sextic(sample_path):
    result = invoke("analyze", sample_path('smooth_d6.json'))
    assert result.exit_code == 0
    assert result.stdout.splitlines()[0] == "sigma=6 gamma=0 route=Smooth"


def test_analyze_json_is_stable(sample_path):
    first = invoke("analyze", sample_path('smooth_d6.json'), "--json")
    second = invoke("analyze", sample_path('smooth_d6.json'), "--json")
    assert first.stdout == second.stdout
    data = json.loads(first.stdout)
    assert data["sigma"] == "6"
    assert data["route"] == "Smooth"


def test_analyze_catalog_row(tmp_path):
    path = tmp_path / 'y42.json'
    path.write_text(invoke("catalog", "--spec", "Y_{4,2}").stdout)
    result = invoke("analyze", str(path), "--json")
    assert result.exit_code == 0
    assert json.loads(result.stdout)["gamma"] == "3/2"


def test_lct_of_the_tacnode(sample_path):
    result = invoke("lct", sample_path('cubic.json'), sample_path('tacnode.json'))
    assert result.stdout.strip() == "3/4"


def test_lc_check(sample_path):
    result = invoke("lc-check", sample_path('smooth_d6.json'), sample_path('hexagon.json'))
    assert result.stdout.strip() == "LC"


def test_curves_and_graph(sample_path):
    curves = invoke("curves", sample_path('smooth_d6.json'))
    assert "curves=6" in curves.stdout
    graph = invoke("graph", sample_path('smooth_d6.json'))
    assert "tree=false" in graph.stdout
    assert "content=6" in graph.stdout
    dot = invoke("graph", sample_path('smooth_d6.json'), "--dot")
    assert dot.stdout.lstrip().startswith("graph")


def test_decompose(sample_path):
    result = invoke("decompose", sample_path('smooth_d6.json'), "--class", "H-E1")
    assert result.exit_code == 0
    assert result.stdout.startswith("class=H-E1 decompositions=")


def test_blowup_writes_a_spec(sample_path, tmp_path):
    out = tmp_path / 'd5.json'
    result = invoke("blowup", sample_path('smooth_d6.json'), "--out", str(out))
    assert result.exit_code == 0
    assert json.loads(out.read_text())["degree"] == 5


def test_catalog_listing():
    result = invoke("catalog", "--degree", "2", "--json")
    names = [row["name"] for row in json.loads(result.stdout)]
    assert names == ["Y_{2,1}", "Y_{2,2}", "Y_{2,3}", "Y_{2,4}"]


def test_batch(sample_path, tmp_path):
    for name in ('smooth_d6.json', 'cubic.json'):
        shutil.copy(sample_path(name), tmp_path / name)
    result = invoke("analyze", "--batch", str(tmp_path), "--json", "--workers", "2")
    assert result.exit_code == 0
    data = json.loads(result.stdout)
    assert list(data) == ['cubic.json', 'smooth_d6.json']
    assert data['smooth_d6.json']["sigma"] == "6"


def test_silent_mode_writes_the_log(sample_path, tmp_path):
    log = tmp_path / 'log.txt'
    result = invoke("--silent", "--log-file", str(log), "analyze", sample_path('smooth_d6.json'))
    assert result.exit_code == 0
    assert "sigma=6 gamma=0 route=Smooth" in log.read_text()


def test_run_exit_codes(sample_path, tmp_path, capsys):
    assert run(["analyze", sample_path('smooth_d6.json')]) == 0
    assert "route=Smooth" in capsys.readouterr().out
    broken = tmp_path / 'broken.json'
    broken.write_text('{"degree": 12}')
    assert run(["analyze", str(broken)]) == 1
    assert "error" in capsys.readouterr().err
    assert run(["analyze", str(tmp_path / 'missing.json')]) == 1
    assert run(["no-such-command"]) == 1


def test_lc_check_rejects_a_coefficient_above_one(sample_path, tmp_path, capsys):
    boundary = tmp_path / "heavy.json"
    boundary.write_text(json.dumps([{"curve": "E1", "coeff": "2"}]))
    assert run(["lc-check", sample_path("cubic.json"), str(boundary)]) == 1
    assert "outside (0, 1]" in capsys.readouterr().err


def test_selftest_rows_pass():
    rows = selftest_rows(silent=True)
    assert rows
    assert all(row[3] == "ok" for row in rows), [row for row in rows if row[3] != "ok"]
