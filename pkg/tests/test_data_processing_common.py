from data_processing_common import report_message, silenced_stdout


def test_silenced_stdout_appends_to_the_log(tmp_path, capsys):
    log = tmp_path / "run.log"
    with silenced_stdout(str(log)):
        print("stray")
        report_message("kept", silent=True, log_file=str(log))
    print("visible")
    assert sorted(log.read_text().split()) == ["kept", "stray"]
    assert capsys.readouterr().out == "visible\n"


def test_silenced_stdout_without_a_log_discards(capsys):
    with silenced_stdout():
        print("gone")
    assert capsys.readouterr().out == ""
