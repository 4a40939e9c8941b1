'''
File Readers and Writers

Benchmark result tables are read and written with the pandas reader or writer matching the file
extension.

'''
import pandas as pd
from pathlib import Path

__READERS__ = {
        '.csv': pd.read_csv,
        '.csv.gz': pd.read_csv,
        '.xlsx': pd.read_excel,
        '.json': pd.read_json,
        '.html': pd.read_html,
        '.parquet': pd.read_parquet,
        '.pkl': pd.read_pickle
}

__WRITERS__ = {
        '.csv': 'to_csv',
        '.csv.gz': 'to_csv',
        '.xlsx': 'to_excel',
        '.json': 'to_json',
        '.html': 'to_html',
        '.parquet': 'to_parquet',
        '.pkl': 'to_pickle'
}

__DEFAULTS__ = {
        'to_csv': {'index': False},
        'to_excel': {'index': False},
        'to_json': {'orient': 'records', 'indent': 4},
}


def guess_extension(url: Path):
    '''
    Guess Extension

    Determine the file extension based on the url, e.g. ``.csv.gz``.

    :param url: the path to the file.
    '''
    return ''.join(Path(url).suffixes).lower()


def read_file(url: Path, *args, **kwargs):
    '''
    Read File

    Read a result table based on the file extension; unknown extensions are read as csv.

    :param url: the path to the file.
    :param args: additional arguments passed to the reader.
    :param kwargs: additional key word arguments passed to the reader.

    '''
    if guess_extension(url) == '.json':
        kwargs.setdefault('orient', 'records')
    return __READERS__.get(guess_extension(url), pd.read_csv)(url, *args, **kwargs)


def write_file(df: pd.DataFrame, url: Path, *args, **kwargs):
    '''
    Write File

    Write a result table based on the file extension; unknown extensions are written as csv.

    :param df: a pandas dataframe.
    :param url: the path to the file.
    :param args: additional arguments passed to the writer.
    :param kwargs: additional key word arguments passed to the writer.

    '''
    writer = __WRITERS__.get(guess_extension(url), 'to_csv')
    kwargs = {**__DEFAULTS__.get(writer, {}), **kwargs}
    getattr(df, writer)(url, *args, **kwargs)
