import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from rssbag._algae.exceptions import ContractViolation, ParseError, StructuralError
from rssbag.data.dataset import Dataset, Standardization, encode_labels, load_csv, load_features, standardize
from rssbag.data.splits import load_splits, make_splits, save_splits, train_size


class TestDataset:

    def test_rejects_out_of_range_labels(self):
        with pytest.raises(ContractViolation):
            Dataset(np.zeros((2, 1)), [0, 2], 2)

    def test_rejects_non_finite_features(self):
        with pytest.raises(ContractViolation):
            Dataset([[0.0], [np.inf]], [0, 1], 2)

    def test_is_read_only(self, binary):
        with pytest.raises(ValueError):
            binary.features[0, 0] = 1.0

    def test_subset_keeps_metadata(self, binary):
        part = binary.subset([0, 0, 3])

        assert len(part) == 3
        assert part.classes == binary.classes
        assert_array_equal(part.labels, binary.labels[[0, 0, 3]])


class TestLabels:

    def test_integer_labels_ascending(self):
        codes, classes = encode_labels(['3', '1', '2', '1'])

        assert classes == ('1', '2', '3')
        assert_array_equal(codes, [2, 0, 1, 0])

    def test_string_labels_first_appearance(self):
        codes, classes = encode_labels(['no', 'yes', 'no'])

        assert classes == ('no', 'yes')
        assert_array_equal(codes, [0, 1, 0])

    def test_decode_inverts_encode(self):
        raw = ['b', 'a', 'c', 'a']
        codes, classes = encode_labels(raw)
        data = Dataset(np.zeros((4, 1)), codes, len(classes), classes=classes)

        assert data.decode(codes) == raw


class TestLoadCsv:

    def test_loads_features_and_labels(self, csv_file):
        data = load_csv(csv_file('a,b,label\n1,2,x\n3,4.5,y\n-1,0,x\n'))

        assert data.name == 'data'
        assert data.feature_names == ('a', 'b')
        assert data.class_count == 2
        assert_array_equal(data.features, [[1, 2], [3, 4.5], [-1, 0]])
        assert_array_equal(data.labels, [0, 1, 0])

    def test_label_column_position(self, csv_file):
        data = load_csv(csv_file('label,a\n1,0.5\n0,0.25\n'), label_column=0)

        assert data.feature_names == ('a',)
        assert_array_equal(data.labels, [1, 0])

    def test_bad_cell_names_line_and_column(self, csv_file):
        with pytest.raises(ParseError, match=r"line 3, column 'b'"):
            load_csv(csv_file('a,b,label\n1,2,x\n3,oops,y\n'))

    def test_ragged_row(self, csv_file):
        with pytest.raises(StructuralError):
            load_csv(csv_file('a,b,label\n1,2,x\n3,4,5,y\n'))

    def test_missing_file(self, tmp_path):
        with pytest.raises(StructuralError):
            load_csv(tmp_path / 'absent.csv')

    def test_header_only(self, csv_file):
        with pytest.raises(StructuralError):
            load_csv(csv_file('a,b,label\n'))

    def test_to_csv_reloads(self, ternary, tmp_path):
        ternary.to_csv(tmp_path / 'out.csv')
        again = load_csv(tmp_path / 'out.csv')

        assert_array_equal(again.features, ternary.features)
        assert_array_equal(again.labels, ternary.labels)

    def test_decimal_text_is_exact(self, csv_file):
        data = load_csv(csv_file('a,label\n0.1,x\n0.30000000000000004,y\n-2.2250738585072014e-308,x\n'))

        assert data.features[:, 0].tolist() == [0.1, 0.30000000000000004, -2.2250738585072014e-308]

    def test_nan_cell_is_rejected(self, csv_file):
        with pytest.raises(ParseError, match=r"line 2, column 'a'"):
            load_csv(csv_file('a,label\nnan,x\n1,y\n'))

    def test_not_utf8(self, tmp_path):
        path = tmp_path / 'latin.csv'
        path.write_bytes(b'a,label\n1,\xff\n2,y\n')

        with pytest.raises(ParseError, match='UTF-8'):
            load_csv(path)


class TestLoadFeatures:

    def test_features_only(self, csv_file):
        assert_array_equal(load_features(csv_file('a,b\n1,2\n3,4\n'), 2), [[1, 2], [3, 4]])

    def test_drops_label_column(self, csv_file):
        assert_array_equal(load_features(csv_file('a,b,label\n1,2,x\n'), 2), [[1, 2]])

    def test_wrong_width(self, csv_file):
        with pytest.raises(StructuralError):
            load_features(csv_file('a,b,c,d\n1,2,3,4\n'), 2)


class TestStandardize:

    def test_uses_train_statistics(self):
        train = Dataset([[0.0, 5.0], [2.0, 5.0]], [0, 1], 2)
        test = Dataset([[4.0, 7.0]], [0], 2)
        train_s, test_s, scaler = standardize(train, test)

        assert_allclose(train_s.features, [[-1.0, 0.0], [1.0, 0.0]])
        assert_allclose(test_s.features, [[3.0, 2.0]])
        assert_allclose(scaler.std, [1.0, 1.0])

    def test_scaler_serializes(self, binary):
        _, _, scaler = standardize(binary)
        again = Standardization.from_dict(scaler.to_dict())

        assert_allclose(again.transform(binary.features), scaler.transform(binary.features))

    def test_single_column_example(self):
        scaled, _, _ = standardize(Dataset([[1.0], [2.0], [3.0]], [0, 1, 0], 2))

        assert_allclose(scaled.features[:, 0], [-1.224744871391589, 0.0, 1.224744871391589], atol=1e-12)

    def test_unit_moments(self, ternary):
        scaled, _, _ = standardize(ternary)

        assert_allclose(scaled.features.mean(axis=0), 0.0, atol=1e-12)
        assert_allclose(scaled.features.std(axis=0), 1.0, atol=1e-12)

    def test_idempotent(self, ternary):
        once, _, _ = standardize(ternary)
        twice, _, _ = standardize(once)

        assert_allclose(twice.features, once.features, atol=1e-12)

    def test_constant_column_keeps_unit_scale(self):
        scaled, _, scaler = standardize(Dataset([[4.0, 1.0], [4.0, 3.0]], [0, 1], 2))

        assert_array_equal(scaled.features[:, 0], [0.0, 0.0])
        assert scaler.std[0] == 1.0


class TestSplits:

    @pytest.mark.parametrize('n, ratio, expected', [(10, 0.7, 7), (5, 0.7, 4), (2, 0.7, 1), (3, 0.1, 1)])
    def test_train_size(self, n, ratio, expected):
        assert train_size(n, ratio) == expected

    def test_partitions(self):
        for plan in make_splits(50, repeats=5, seed=3):
            assert len(plan.train) == 35
            assert_array_equal(np.sort(np.concatenate([plan.train, plan.test])), np.arange(50))

    def test_reproducible_and_distinct(self):
        a, b = make_splits(30, repeats=3, seed=1), make_splits(30, repeats=3, seed=1)

        assert all(np.array_equal(x.train, y.train) for x, y in zip(a, b))
        assert not np.array_equal(a[0].train, a[1].train)

    def test_save_and_load(self, tmp_path):
        plans = make_splits(20, repeats=2, seed=4)
        save_splits(tmp_path / 'splits.json', plans)

        assert all(np.array_equal(x.test, y.test) for x, y in zip(plans, load_splits(tmp_path / 'splits.json')))

    @pytest.mark.parametrize('n, ratio, repeats', [(1, 0.7, 1), (10, 1.0, 1), (10, 0.7, 0)])
    def test_contracts(self, n, ratio, repeats):
        with pytest.raises(ContractViolation):
            make_splits(n, ratio, repeats)
