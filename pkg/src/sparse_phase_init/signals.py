"""Ground-truth signals, Gaussian sensing matrices and magnitude measurements."""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

FIXTURE_MAGIC = b"SPIFXT01"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SparseSignal:
    values: np.ndarray
    support: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        object.__setattr__(self, "support", np.sort(np.asarray(self.support, dtype=np.int64)))
        mask = np.ones(self.n, dtype=bool)
        mask[self.support] = False
        if np.any(self.values[mask] != 0):
            raise ValueError("nonzero entry outside support")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("signal has non-finite entries")
        if not np.linalg.norm(self.values) > 0:
            raise ValueError("signal must be nonzero")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def s(self) -> int:
        return self.support.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    @property
    def direction(self) -> np.ndarray:
        return self.values / self.norm

    def __neg__(self) -> "SparseSignal":
        return SparseSignal(-self.values, self.support)


@dataclass(frozen=True)
class SensingMatrix:
    entries: np.ndarray
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen(self.entries))

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float = 0.0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")


@dataclass(frozen=True)
class MeasurementSet:
    y: np.ndarray
    eta: np.ndarray
    matrix: SensingMatrix = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "y", _frozen(self.y))
        object.__setattr__(self, "eta", _frozen(self.eta))
        if self.y.shape != (self.matrix.rows,) or self.eta.shape != self.y.shape:
            raise ValueError("measurement length does not match sensing matrix rows")

    @property
    def A(self) -> np.ndarray:
        return self.matrix.entries


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def gen_sparse_signal(n: int, s: int, rng) -> SparseSignal:
    """Uniformly random size-``s`` support with i.i.d. standard normal nonzeros."""
    if not (1 <= s <= n):
        raise ValueError(f"need 1 <= s <= n, got s={s}, n={n}")
    rng = _as_generator(rng)
    support = np.sort(rng.choice(n, size=s, replace=False))
    values = np.zeros(n)
    values[support] = rng.standard_normal(s)
    return SparseSignal(values, support)


def gen_sensing_matrix(m: int, n: int, seed: int) -> SensingMatrix:
    if m < 1 or n < 1:
        raise ValueError(f"matrix dimensions must be positive, got {m}x{n}")
    entries = np.random.default_rng(seed).standard_normal((m, n))
    return SensingMatrix(entries, int(seed))


def iter_sensing_rows(m: int, n: int, seed: int, block: int = 1024) -> Iterator[np.ndarray]:
    """Yield row blocks of the matrix ``gen_sensing_matrix(m, n, seed)`` would build.

    The concatenation of the blocks is bit-identical to the dense matrix.
    """
    if m < 1 or n < 1:
        raise ValueError(f"matrix dimensions must be positive, got {m}x{n}")
    rng = np.random.default_rng(seed)
    for start in range(0, m, block):
        yield rng.standard_normal((min(block, m - start), n))


def measure(A: SensingMatrix, x: SparseSignal, noise: NoiseSpec, rng) -> MeasurementSet:
    """Magnitude measurements ``y = |A x| + eta`` with ``eta ~ N(0, sigma^2 ||x||^2)``."""
    if A.cols != x.n:
        raise ValueError(f"matrix has {A.cols} columns but signal has length {x.n}")
    rng = _as_generator(rng)
    eta = noise.sigma * x.norm * rng.standard_normal(A.rows)
    y = np.abs(A.entries @ x.values) + eta
    return MeasurementSet(y, eta, A)


def trial_seeds(master_seed: int, *keys: int) -> dict[str, int]:
    """Split one master seed into independent 64-bit seeds for signal, matrix and noise."""
    ss = np.random.SeedSequence([int(master_seed), *[int(k) for k in keys]])
    children = ss.spawn(3)
    names = ("signal", "matrix", "noise")
    return {
        name: int(child.generate_state(1, dtype=np.uint64)[0])
        for name, child in zip(names, children)
    }


def make_instance(n: int, s: int, m: int, sigma: float, seeds: dict[str, int]):
    """Build the (signal, measurements) pair for one trial from its seed triple."""
    x = gen_sparse_signal(n, s, np.random.default_rng(seeds["signal"]))
    A = gen_sensing_matrix(m, n, seeds["matrix"])
    meas = measure(A, x, NoiseSpec(sigma), np.random.default_rng(seeds["noise"]))
    return x, meas


def dump_fixture(path, x: np.ndarray, A: np.ndarray, y: np.ndarray, eta: np.ndarray) -> None:
    """Write ``(x, A, y, eta)`` as magic header, two uint64 dims, then little-endian float64."""
    x = np.asarray(x, dtype="<f8")
    A = np.asarray(A, dtype="<f8")
    m, n = A.shape
    if x.shape != (n,) or np.shape(y) != (m,) or np.shape(eta) != (m,):
        raise ValueError("fixture arrays have inconsistent shapes")
    with open(path, "wb") as fh:
        fh.write(FIXTURE_MAGIC)
        fh.write(struct.pack("<QQ", m, n))
        for arr in (x, A, y, eta):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_fixture(path) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    data = Path(path).read_bytes()
    if data[:8] != FIXTURE_MAGIC:
        raise ValueError(f"{path}: bad magic header")
    m, n = struct.unpack("<QQ", data[8:24])
    expected = 24 + 8 * (n + m * n + 2 * m)
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(data)}")
    flat = np.frombuffer(data, dtype="<f8", offset=24).astype(np.float64)
    x = flat[:n]
    A = flat[n : n + m * n].reshape(m, n)
    y = flat[n + m * n : n + m * n + m]
    eta = flat[n + m * n + m :]
    return x, A, y, eta
