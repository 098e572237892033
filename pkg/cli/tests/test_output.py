import json
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from cli.exceptions import CliError
from cli.output import (
    fit_table,
    read_csv,
    read_json,
    read_series,
    series_path,
    write_csv,
    write_json,
    write_series,
    write_timings,
)
from evolution.models import SERIES_COLUMNS, ObserverCurve, ObserverSeries


def sample_series(curve=None, rows=5):
    curve = curve or ObserverCurve("constant_r", 10.0)
    tau = np.linspace(0.0, 2.0, rows)
    columns = {name: np.sin(tau + i) for i, name in enumerate(SERIES_COLUMNS)}
    columns["tau"] = tau
    return ObserverSeries(curve=curve, tau_offset=0.0, **columns)


class TestCsv(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.directory = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_seventeen_digits_and_newlines(self):
        path = write_csv(
            self.directory / "a.csv", {"x": [0.1, 1.0 / 3.0], "y": [2, -0.0]}
        )

        self.assertEqual(
            path.read_bytes(),
            b"x,y\n0.10000000000000001,2\n0.33333333333333331,-0\n",
        )

    def test_values_read_back_exactly(self):
        values = np.random.default_rng(7).normal(size=50) * 1e-7
        path = write_csv(self.directory / "b.csv", {"v": values})

        np.testing.assert_array_equal(read_csv(path)["v"], values)

    def test_series_file_named_after_curve(self):
        series = sample_series(ObserverCurve("horizon_proxy", -75.0))
        path = write_series(self.directory, series)

        self.assertEqual(path.name, "series_horizon_-75.csv")
        self.assertEqual(path, series_path(self.directory, "horizon=-75"))

    def test_series_read_back(self):
        series = sample_series()
        write_series(self.directory, series)
        loaded = read_series(self.directory, "r=10", tau_offset=3.0)

        self.assertEqual(loaded.curve, series.curve)
        self.assertEqual(loaded.tau_offset, 3.0)
        np.testing.assert_array_equal(loaded.v2dvphi, series.v2dvphi)

    def test_missing_series(self):
        with self.assertRaises(CliError):
            read_series(self.directory, "scri")


class TestJson(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.directory = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_sorted_with_trailing_newline(self):
        path = write_json(self.directory / "r.json", {"b": 1, "a": [1.5]})

        self.assertEqual(
            path.read_text(), '{\n  "a": [\n    1.5\n  ],\n  "b": 1\n}\n'
        )

    def test_schema_checked_before_writing(self):
        path = self.directory / "c.json"

        with self.assertRaises(CliError):
            write_json(path, {"schema": 1}, schema="convergence")
        self.assertFalse(path.exists())

    def test_unreadable_json(self):
        path = self.directory / "bad.json"
        path.write_text("[", encoding="utf-8")

        with self.assertRaises(CliError):
            read_json(path)

    def test_timings_merge(self):
        write_timings(self.directory, {"evolve": {"total": 1.0}})
        write_timings(self.directory, {"tail": {"total": 2.0}})
        timings = json.loads((self.directory / "timings.json").read_text())

        self.assertEqual(set(timings), {"evolve", "tail"})


class TestFitTable(SimpleTestCase):
    def test_columns_line_up(self):
        fits = [
            {
                "scenario": "interior_zeroNP",
                "k": 0,
                "curve": "r=10",
                "field": "psi",
                "p_inf": 3.0012,
                "p_theory": 3.0,
                "amplitude": -0.8,
                "target": -0.8,
                "deviation": 0.0,
                "passes": True,
            },
            {
                "scenario": "interior_zeroNP",
                "k": 0,
                "curve": "r=10",
                "field": "psi",
                "p_inf": None,
                "p_theory": 3.0,
                "amplitude": 1e-14,
                "target": 0.0,
                "deviation": 1e-14,
                "passes": True,
            },
        ]
        lines = fit_table(fits).splitlines()

        self.assertEqual(len(lines), 3)
        self.assertTrue(lines[0].startswith("scenario"))
        self.assertIn("3.0012", lines[1])
        self.assertIn(" - ", lines[2])
        self.assertTrue(lines[1].endswith("yes"))
        self.assertEqual(lines[0].index("k"), lines[1].index("0"))
