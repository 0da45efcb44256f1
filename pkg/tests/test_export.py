"""Tests for CSV tables, JSON reports and the Excel workbook."""

import json

import numpy as np
import pandas as pd
import pytest
from openpyxl import load_workbook

from utils.singular_flux.curves import stationary_curve
from utils.singular_flux.export import (
    curves_to_frame,
    dumps_report,
    export_to_excel,
    measure_to_frame,
    profile_to_frame,
    read_json,
    series_to_frame,
    write_csv,
    write_json,
)
from utils.singular_flux.measures import AtomicVectorMeasure
from utils.singular_flux.wasserstein import VariationProfile


CHECKS = [
    {'name': 'ce_residual', 'pass': True, 'value': 1e-12, 'tol': 1e-10, 'per_fn': [0.0, 1e-12]},
    {'name': 'minimal_flux', 'pass': False, 'value': 0.3, 'tol': 1e-6, 'detail': 'flux kept'},
]


class TestFrames:

    def test_measure_columns(self):
        measure = AtomicVectorMeasure(np.array([0.0, 1.0]), np.array([[0.0, 1.0], [1.0, 2.0]]), np.ones((2, 2)))
        df = measure_to_frame(measure)
        assert list(df.columns) == ['t', 'x1', 'x2', 'w1', 'w2']
        assert len(df) == 2

    def test_curves_frame(self):
        df = curves_to_frame([stationary_curve([0.0], 1.0), stationary_curve([1.0], 2.0)])
        assert list(df.columns) == ['curve', 's', 't', 'x1']
        assert sorted(df['curve'].unique()) == [0, 1]
        assert curves_to_frame([]).empty

    def test_profile_and_series(self):
        profile = VariationProfile(np.array([0.0, 1.0]), np.array([0.0, 0.5]))
        assert list(profile_to_frame(profile)['V']) == [0.0, 0.5]
        series = series_to_frame([1, 2], [0.1, 0.05], [1e-2, 2.5e-3])
        assert list(series.columns) == ['level', 'h', 'value']

    def test_write_csv(self, tmp_path):
        path = write_csv(pd.DataFrame({'a': [1, 2]}), tmp_path / 'nested' / 'table.csv')
        assert path.exists()
        assert pd.read_csv(path)['a'].tolist() == [1, 2]


class TestJsonReports:

    def test_sorted_with_newline(self):
        text = dumps_report({'b': 1, 'a': np.float64(0.5), 'c': np.arange(2)})
        assert text.endswith("\n")
        assert text.index('"a"') < text.index('"b"') < text.index('"c"')
        assert json.loads(text) == {'a': 0.5, 'b': 1, 'c': [0, 1]}

    def test_deterministic(self):
        report = {'z': [1.0, 2.0], 'y': {'k': True}}
        assert dumps_report(report) == dumps_report(dict(reversed(list(report.items()))))

    def test_unserializable(self):
        with pytest.raises(TypeError):
            dumps_report({'x': object()})

    def test_write_and_read(self, tmp_path):
        path = write_json({'ok': True}, tmp_path / 'out' / 'report.json')
        assert read_json(path) == {'ok': True}


class TestExcel:

    def test_summary_sheet(self):
        output = export_to_excel(CHECKS)
        workbook = load_workbook(output)
        assert workbook.sheetnames == ['Summary', 'ce_residual', 'minimal_flux']
        sheet = workbook['Summary']
        assert [c.value for c in sheet[1]] == ['check', 'status', 'value', 'tolerance', 'detail']
        assert sheet['B2'].value == 'PASS'
        assert sheet['B3'].value == 'FAIL'

    def test_duplicate_names(self, tmp_path):
        path = tmp_path / 'checks.xlsx'
        export_to_excel([{'name': 'x', 'pass': True}, {'name': 'x', 'pass': True}], path)
        assert load_workbook(path).sheetnames == ['Summary', 'x', 'x_1']
