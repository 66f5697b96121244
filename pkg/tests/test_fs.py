from dbs_placement.fs import ensure_dir, iter_files


def test_iter_files(tmp_path):
    (tmp_path / 'b.csv').touch()
    (tmp_path / 'a.csv').touch()
    (tmp_path / 'c.txt').touch()
    ensure_dir(tmp_path / 'nested' / 'deeper')
    (tmp_path / 'nested' / 'deeper' / 'd.csv').touch()

    assert [p.name for p in iter_files(tmp_path, suffix='.csv')] == ['a.csv', 'b.csv', 'd.csv']
    assert [p.name for p in iter_files(tmp_path, recursive=False)] == ['a.csv', 'b.csv', 'c.txt']


def test_ensure_dir_is_idempotent(tmp_path):
    target = tmp_path / 'output' / 'run'

    assert ensure_dir(target) == target
    assert ensure_dir(target).is_dir()
