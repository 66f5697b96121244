import msgspec
import pytest

from dbs_placement.cli import EXIT_CONFIG_ERROR, EXIT_INFEASIBLE, EXIT_IO_ERROR, EXIT_OK, main
from dbs_placement.scenario import Grid, load_demand_csv


def test_defaults(capsys):
    assert main(['defaults']) == EXIT_OK

    document = msgspec.toml.decode(capsys.readouterr().out.encode('utf-8'))

    assert document['radio']['dbs_bandwidth'] == 5e6


def test_run_quickstart(tmp_path, quickstart_config_path, capsys):
    exit_code = main(['run', str(quickstart_config_path), '-o', str(tmp_path)])
    out = capsys.readouterr().out

    assert exit_code in (EXIT_OK, EXIT_INFEASIBLE)
    assert 'slot=1 method=ssc' in out
    assert (tmp_path / 'report.csv').is_file()


def test_run_missing_config(tmp_path):
    assert main(['run', str(tmp_path / 'missing.toml')]) == EXIT_CONFIG_ERROR


def test_run_infeasible(tmp_path, demand_csv):
    demand_csv(['0,0,1000000.0,100000'], name='flood.csv')
    path = tmp_path / 'flood.toml'
    path.write_text('[grid]\nwidth_cells = 1\nheight_cells = 1\n[demand]\ncsv = ["flood.csv"]\n', encoding='utf-8')

    assert main(['run', str(path), '-o', str(tmp_path / 'out')]) == EXIT_INFEASIBLE


def test_run_unwritable_output(tmp_path, quickstart_config_path):
    blocker = tmp_path / 'blocker'
    blocker.write_text('not a directory', encoding='utf-8')

    assert main(['run', str(quickstart_config_path), '-o', str(blocker)]) == EXIT_IO_ERROR


def test_generate(tmp_path, quickstart_config_path):
    output = tmp_path / 'demand'

    assert main(['generate', str(quickstart_config_path), '-o', str(output)]) == EXIT_OK

    files = sorted(output.glob('*.csv'))

    assert [f.name for f in files] == ['demand_slot_000.csv', 'demand_slot_001.csv']
    assert load_demand_csv(files[1], Grid(width_cells=10, height_cells=10, cell_size=100.0)).arrival_rate.sum() > 0


def test_validate_reports_sections(tmp_path, quickstart_config_path, capsys):
    path = tmp_path / 'validate.toml'
    path.write_text(
        quickstart_config_path.read_text(encoding='utf-8') + '\n[validation]\nqueue_jobs = 2000\nkkt_pairs = 20\n',
        encoding='utf-8',
    )

    assert main(['validate', str(path)]) in (EXIT_OK, EXIT_CONFIG_ERROR)
    assert '[kkt]' in capsys.readouterr().out


def test_requires_subcommand():
    with pytest.raises(SystemExit):
        main([])
