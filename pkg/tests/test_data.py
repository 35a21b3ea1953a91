import datetime as dt

import numpy as np
import pytest

from weathertune import data as d
from weathertune.errors import (
    AllColumnsDropped,
    ConstantColumn,
    EmptyFile,
    EmptySplit,
    LeadingGapUnfillable,
    MissingColumn,
    SeriesTooShort,
    ShapeMismatch,
    TimestampDisorder,
    TimestampGap,
)
from weathertune.synthetic import generate_synthetic_weather


def make_table(n, cols=("temperature", "pressure"), start="2021-01-01", seed=0):
    rng = np.random.default_rng(seed)
    stamps = np.datetime64(start, "s") + np.arange(n) * np.timedelta64(1, "h")
    return d.TimeSeriesTable(stamps, list(cols), rng.normal(size=(n, len(cols))))


def write_csv(tmp_path, rows, header="date,time," + ",".join(d.FEATURE_COLUMNS)):
    path = tmp_path / "w.csv"
    path.write_text("\n".join([header, *rows]) + "\n")
    return path


class TestLoadWeatherCsv:
    def test_fully_populated(self, tmp_path):
        rows = [f"2021-01-01,{h},1,2,3,4,5,6,0" for h in range(3)]
        t = d.load_weather_csv(write_csv(tmp_path, rows))
        assert len(t) == 3
        assert t.missing_count() == 0
        assert t.columns == d.FEATURE_COLUMNS

    def test_blank_cell_becomes_missing(self, tmp_path):
        rows = ["2021-01-01,0,1,2,3,4,5,6,0", "2021-01-01,1,,2,3,4,5,6,0"]
        t = d.load_weather_csv(write_csv(tmp_path, rows))
        assert t.missing_count() == 1
        assert np.isnan(t.column("temperature")[1])

    def test_missing_column(self, tmp_path):
        path = write_csv(tmp_path, ["2021-01-01,0,1"], header="date,time,temperature")
        with pytest.raises(MissingColumn):
            d.load_weather_csv(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "e.csv"
        path.write_text("")
        with pytest.raises(EmptyFile):
            d.load_weather_csv(path)
        path.write_text("date,time," + ",".join(d.FEATURE_COLUMNS) + "\n")
        with pytest.raises(EmptyFile):
            d.load_weather_csv(path)

    def test_disorder(self, tmp_path):
        rows = ["2021-01-01,1,1,2,3,4,5,6,0", "2021-01-01,0,1,2,3,4,5,6,0"]
        with pytest.raises(TimestampDisorder):
            d.load_weather_csv(write_csv(tmp_path, rows))

    def test_gap_rejected_then_filled(self, tmp_path):
        rows = ["2021-01-01,0,1,2,3,4,5,6,0", "2021-01-01,2,1,2,3,4,5,6,0"]
        path = write_csv(tmp_path, rows)
        with pytest.raises(TimestampGap):
            d.load_weather_csv(path)
        t = d.load_weather_csv(path, allow_gaps=True)
        assert len(t) == 3
        assert np.isnan(t.values[1]).all()


class TestCleanMissing:
    def test_column_dropped_at_threshold(self):
        t = make_table(10)
        t.values[:6, 1] = np.nan  # 60% missing
        out = d.clean_missing(t, drop_threshold=0.5)
        assert out.columns == ["temperature"]
        assert out.missing_count() == 0

    def test_midpoint_interpolation(self):
        t = make_table(3, cols=("temperature",))
        t.values[:, 0] = [10.0, np.nan, 12.0]
        out = d.clean_missing(t)
        assert np.allclose(out.values[:, 0], [10.0, 11.0, 12.0])

    def test_forward_fill(self):
        t = make_table(3, cols=("temperature",))
        t.values[:, 0] = [10.0, np.nan, 12.0]
        out = d.clean_missing(t, fill_policy="forward-fill")
        assert np.allclose(out.values[:, 0], [10.0, 10.0, 12.0])

    def test_leading_gap_unfillable(self):
        t = make_table(3, cols=("temperature",))
        t.values[0, 0] = np.nan
        with pytest.raises(LeadingGapUnfillable):
            d.clean_missing(t, fill_policy="forward-fill")

    def test_all_columns_dropped(self):
        t = make_table(4)
        t.values[:] = np.nan
        with pytest.raises(AllColumnsDropped):
            d.clean_missing(t)

    def test_synthetic_pipeline_drops_precipitation(self):
        t = generate_synthetic_weather(days=10, seed=3)
        out = d.clean_missing(t)
        assert "precipitation" not in out.columns
        assert "temperature" in out.columns
        assert out.missing_count() == 0

    def test_idempotent(self):
        t = generate_synthetic_weather(days=10, seed=3)
        once = d.clean_missing(t)
        twice = d.clean_missing(once)
        assert twice.columns == once.columns
        assert np.array_equal(twice.values, once.values)


class TestSplitByDate:
    def test_six_two_two_days(self):
        t = make_table(240)  # 10 days
        spec = d.SplitSpec(
            train=(dt.date(2021, 1, 1), dt.date(2021, 1, 6)),
            validation=(dt.date(2021, 1, 7), dt.date(2021, 1, 8)),
            test=(dt.date(2021, 1, 9), dt.date(2021, 1, 10)),
        )
        tr, va, te = d.split_by_date(t, spec)
        assert (len(tr), len(va), len(te)) == (144, 48, 48)

    def test_empty_split(self):
        t = make_table(48)
        spec = d.SplitSpec(
            train=(dt.date(2021, 1, 1), dt.date(2021, 1, 2)),
            validation=(dt.date(2021, 2, 1), dt.date(2021, 2, 1)),
            test=(dt.date(2021, 3, 1), dt.date(2021, 3, 1)),
        )
        with pytest.raises(EmptySplit):
            d.split_by_date(t, spec)

    def test_ranges_must_be_ordered(self):
        with pytest.raises(ValueError):
            d.SplitSpec(
                train=(dt.date(2021, 1, 5), dt.date(2021, 1, 6)),
                validation=(dt.date(2021, 1, 1), dt.date(2021, 1, 2)),
                test=(dt.date(2021, 1, 7), dt.date(2021, 1, 8)),
            )


class TestScaler:
    def test_hand_computed_population_moments(self):
        # oracle: mean 2, population std sqrt(2/3) for [1, 2, 3]
        t = make_table(3, cols=("x",))
        t.values[:, 0] = [1.0, 2.0, 3.0]
        s = d.fit_scaler(t)
        assert s.mean[0] == pytest.approx(2.0)
        assert s.std[0] == pytest.approx(np.sqrt(2.0 / 3.0))
        fwd = d.scaler_apply(s, t, "forward")
        assert np.allclose(fwd.values[:, 0], [-1.2247448, 0.0, 1.2247448], atol=1e-6)

    def test_round_trip(self):
        t = make_table(50, seed=4)
        s = d.fit_scaler(t)
        back = d.scaler_apply(s, d.scaler_apply(s, t, "forward"), "inverse")
        assert np.max(np.abs(back.values - t.values)) < 1e-9

    def test_constant_column(self):
        t = make_table(3, cols=("x",))
        t.values[:, 0] = 5.0
        with pytest.raises(ConstantColumn):
            d.fit_scaler(t)

    def test_shape_mismatch_at_apply(self):
        s = d.fit_scaler(make_table(10))
        with pytest.raises(ShapeMismatch):
            d.scaler_apply(s, make_table(10, cols=("a", "b", "c")), "forward")

    def test_scaled_train_has_unit_moments(self):
        t = make_table(200, seed=7)
        s = d.fit_scaler(t)
        fwd = d.scaler_apply(s, t, "forward")
        assert np.max(np.abs(fwd.values.mean(axis=0))) < 1e-9
        assert np.max(np.abs(fwd.values.std(axis=0) - 1.0)) < 1e-9

    def test_no_leakage(self):
        # fitting reads only the training rows, so the presence or absence of
        # later splits cannot change the statistics
        t = make_table(240, seed=8)
        train = t.take_rows(np.arange(len(t)) < 144)
        s_alone = d.fit_scaler(train)
        s_with_rest = d.fit_scaler(t.take_rows(np.arange(len(t)) < 144))
        assert np.array_equal(s_alone.mean, s_with_rest.mean)
        assert np.array_equal(s_alone.std, s_with_rest.std)


class TestMakeWindows:
    def test_counts_single_feature(self):
        t = make_table(30, cols=("temperature",))
        ds = d.make_windows(t, "temperature", 3, 24)
        assert len(ds) == 4
        assert ds.inputs.shape == (4, 3, 1)
        assert ds.targets.shape == (4, 24)

    def test_flat_layout_width(self):
        cols = [f"f{i}" for i in range(7)] + ["temperature"]
        t = make_table(40, cols=cols)
        ds = d.make_windows(t, "temperature", 3, 24, layout="flat")
        assert ds.inputs.shape[1] == 24  # 3 steps x 8 features

    def test_exactly_one_sample(self):
        t = make_table(27, cols=("temperature",))
        ds = d.make_windows(t, "temperature", 3, 24)
        assert len(ds) == 1

    def test_too_short(self):
        t = make_table(26, cols=("temperature",))
        with pytest.raises(SeriesTooShort):
            d.make_windows(t, "temperature", 3, 24)

    def test_window_count_formula_exhaustive(self):
        L, H = 3, 24
        for T in range(L + H, L + H + 51):
            t = make_table(T, cols=("temperature",))
            assert len(d.make_windows(t, "temperature", L, H)) == T - L - H + 1

    def test_window_contents(self):
        t = make_table(30, cols=("temperature", "pressure"))
        ds = d.make_windows(t, "temperature", 3, 24)
        i = 2
        assert np.array_equal(ds.inputs[i], t.values[i : i + 3])
        assert np.array_equal(ds.targets[i], t.column("temperature")[i + 3 : i + 27])

    def test_save_load_round_trip(self, tmp_path):
        t = make_table(40)
        ds = d.make_windows(t, "temperature", 3, 24)
        path = tmp_path / "ds.npz"
        ds.save(path)
        back = d.WindowedDataset.load(path)
        assert np.array_equal(back.inputs, ds.inputs)
        assert np.array_equal(back.targets, ds.targets)
        assert (back.lookback, back.horizon, back.layout) == (3, 24, "sequential")
