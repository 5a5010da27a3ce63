import pytest

from erode.optimizer import Range
from erode.polyfit import fit_many
from erode.reference import REFERENCE_OPTIMA
from erode.report import (
    compare_coefficients,
    compare_optima,
    curve_grid,
    read_scatter,
    render_discrepancy,
    write_report,
)

from oracles import exact_lstsq


def test_scatter_round_trip(table1_dataset, tmp_path):
    paths = write_report(table1_dataset, tmp_path)
    assert read_scatter(paths["scatter"]).points == table1_dataset.points


def test_curve_grid_contains_data_powers():
    ps = curve_grid(Range(), [3000.0, 542.5, 9999.0])
    assert len(ps) >= 200
    assert 3000.0 in ps and 542.5 in ps and 9999.0 not in ps
    assert list(ps) == sorted(set(ps))


def test_curve_file_reference_linear_at_3000(table1_dataset, tmp_path):
    paths = write_report(table1_dataset, tmp_path)
    lines = paths["curves"].read_text().splitlines()
    header = lines[0].split(",")
    row = next(l.split(",") for l in lines[1:] if float(l.split(",")[0]) == 3000.0)
    assert float(row[header.index("published_linear")]) == pytest.approx(71.75, abs=0.01)
    assert {"fit_degree_1", "fit_degree_2", "fit_degree_3"} <= set(header)
    assert len(lines) - 1 >= 200


def test_comparison_uses_selected_model(table1_dataset, tmp_path):
    paths = write_report(table1_dataset, tmp_path)
    lines = paths["comparison"].read_text().splitlines()
    assert lines[0] == "power_w,observed_s,model_s,residual_s"
    assert len(lines) == 13


def test_coefficient_rows(table1_dataset):
    reports, _ = fit_many(table1_dataset, [1, 2, 3])
    for row in compare_coefficients(reports):
        want = exact_lstsq(table1_dataset.x, table1_dataset.y, row["degree"])
        assert row["refit"] == pytest.approx(want, rel=1e-8)


def test_optima_rows(table1_dataset):
    reports, _ = fit_many(table1_dataset, [1, 2, 3])
    rows = {c.degree: c for c in compare_optima(reports, Range())}
    assert rows[1].reference_at_published_p == pytest.approx(71.7528)
    assert rows[2].reference_at_published_p == pytest.approx(37.3628, abs=1e-4)
    assert rows[2].reference_argmin == pytest.approx(5195.4555, abs=1e-3)
    assert rows[3].reference_argmin == 7000.0
    assert rows[3].reference_stationary == pytest.approx((3587.19, 5687.19), abs=0.01)
    assert (rows[3].published_p, rows[3].published_t) == REFERENCE_OPTIMA[3]


def test_discrepancy_without_cubic(table1_dataset):
    reports, _ = fit_many(table1_dataset, [1])
    text = render_discrepancy(table1_dataset, reports, Range())
    assert "n/a" in text
