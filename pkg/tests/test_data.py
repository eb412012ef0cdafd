import numpy as np
import pytest

from ridgelab.data import (
    LabeledImages,
    RffConfig,
    load_csv,
    load_idx,
    normalize_pixels,
    rff_transform,
    sample_rff_matrix,
    standardize,
    write_idx,
)
from ridgelab.errors import (
    BadMagicError,
    CountMismatchError,
    DimensionMismatchError,
    InvalidInputError,
    ParseError,
    TruncatedFileError,
)
from ridgelab.linalg import Dataset


@pytest.fixture()
def idx_pair(tmp_path):
    rng = np.random.default_rng(0)
    pixels = rng.integers(0, 256, size=(2, 784)).astype(np.uint8)
    labels = np.array([3, 7], dtype=np.uint8)
    ip, lp = tmp_path / "imgs", tmp_path / "lbls"
    write_idx(ip, lp, pixels, labels)
    return ip, lp, pixels, labels


class TestIdx:
    def test_round_trip(self, idx_pair):
        ip, lp, pixels, labels = idx_pair
        loaded = load_idx(ip, lp)
        assert loaded.count == 2
        assert np.array_equal(loaded.pixels, pixels.astype(float))
        assert np.array_equal(loaded.labels, labels)

    def test_bad_magic(self, idx_pair):
        ip, lp, *_ = idx_pair
        with pytest.raises(BadMagicError):
            load_idx(ip, ip)  # images magic where labels expected

    def test_truncated_payload(self, tmp_path, idx_pair):
        ip, lp, *_ = idx_pair
        cut = tmp_path / "cut"
        cut.write_bytes(ip.read_bytes()[:-10])
        with pytest.raises(TruncatedFileError):
            load_idx(cut, lp)

    def test_count_mismatch(self, tmp_path, idx_pair):
        ip, _, pixels, _ = idx_pair
        lp3 = tmp_path / "lbls3"
        import struct

        with open(lp3, "wb") as fh:
            fh.write(struct.pack(">ii", 0x00000801, 3))
            fh.write(bytes([1, 2, 3]))
        with pytest.raises(CountMismatchError):
            load_idx(ip, lp3)


class TestNormalizePixels:
    def test_endpoints_and_midpoint(self):
        raw = LabeledImages(
            pixels=np.array([[0.0, 255.0, 127.0]]), labels=np.array([1])
        )
        out = normalize_pixels(raw)
        assert out.pixels[0, 0] == -1.0
        assert out.pixels[0, 1] == 1.0
        assert out.pixels[0, 2] == pytest.approx(-1.0 / 255.0)


class TestRff:
    def test_matrix_std(self):
        w = sample_rff_matrix(RffConfig(input_dim=784, n_features=1000, kernel_sigma=0.1, seed=0))
        assert w.shape == (784, 1000)
        assert w.std() == pytest.approx(0.1, rel=0.01)

    def test_deterministic(self):
        cfg = RffConfig(seed=5)
        assert np.array_equal(sample_rff_matrix(cfg), sample_rff_matrix(cfg))

    def test_zero_sigma_rejected(self):
        with pytest.raises(InvalidInputError):
            RffConfig(kernel_sigma=0.0)

    def test_transform_conventions(self):
        # projection value 0 -> (cos, -sin) = (1, 0); pi/2 -> (0, -1)
        x = np.array([[0.0], [np.pi / 2]])
        w = np.array([[1.0]])
        f = rff_transform(x, w)
        assert f[0] == pytest.approx([1.0, 0.0])
        assert f[1] == pytest.approx([0.0, -1.0], abs=1e-12)

    def test_trig_identity_and_range(self):
        r = np.random.default_rng(1)
        x = r.standard_normal((10, 4))
        w = r.standard_normal((4, 6))
        f = rff_transform(x, w)
        assert np.all(np.abs(f) <= 1.0)
        assert np.allclose(f[:, :6] ** 2 + f[:, 6:] ** 2, 1.0, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            rff_transform(np.zeros((2, 3)), np.zeros((4, 5)))

    def test_gaussian_kernel_approximation(self):
        # feature inner products concentrate on the Gaussian kernel value
        r = np.random.default_rng(2)
        sigma_w = 0.5
        cfg = RffConfig(input_dim=50, n_features=4000, kernel_sigma=sigma_w, seed=3)
        w = sample_rff_matrix(cfg)
        a = r.standard_normal(50)
        b = r.standard_normal(50)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        f = rff_transform(np.vstack([a, b]), w)
        approx = float(f[0] @ f[1]) / cfg.n_features
        exact = np.exp(-(sigma_w**2) * np.linalg.norm(a - b) ** 2 / 2.0)
        assert approx == pytest.approx(exact, abs=0.05)


class TestCsv:
    def write(self, tmp_path, text):
        path = tmp_path / "d.csv"
        path.write_text(text, encoding="utf-8")
        return path

    def test_basic_load(self, tmp_path):
        path = self.write(tmp_path, "a,b,y\n1,2,3\n4,5,6\n")
        data = load_csv(path, "y")
        assert data.x.shape == (2, 2)
        assert np.array_equal(data.y, [3.0, 6.0])

    def test_missing_response(self, tmp_path):
        path = self.write(tmp_path, "a,b\n1,2\n")
        with pytest.raises(ParseError):
            load_csv(path, "y")

    def test_ragged_row(self, tmp_path):
        path = self.write(tmp_path, "a,y\n1,2\n3\n")
        with pytest.raises(ParseError):
            load_csv(path, "y")

    def test_non_numeric(self, tmp_path):
        path = self.write(tmp_path, "a,y\nfoo,2\n")
        with pytest.raises(ParseError):
            load_csv(path, "y")


class TestStandardize:
    def test_unit_sd_column(self):
        data = Dataset(x=np.array([[1.0], [2.0], [3.0]]), y=np.array([0.0, 1.0, 2.0]))
        out = standardize(data)
        assert np.allclose(out.x[:, 0], [-1.0, 0.0, 1.0])

    def test_constant_column_warns(self):
        data = Dataset(x=np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 3.0]]), y=np.zeros(3))
        with pytest.warns(UserWarning):
            out = standardize(data)
        assert np.allclose(out.x[:, 0], 0.0)

    def test_idempotent(self):
        r = np.random.default_rng(4)
        data = Dataset(x=r.standard_normal((20, 5)) * 3 + 1, y=r.standard_normal(20))
        once = standardize(data)
        twice = standardize(once)
        assert np.allclose(once.x, twice.x, atol=1e-12)
        assert np.allclose(once.y, twice.y, atol=1e-12)
