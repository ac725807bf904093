"""Point-cloud sampling for the hyperbolic and Euclidean models.

Clouds are Poisson(n)-sized.  Radial draws use inverse-CDF sampling
against the closed-form CDF of the radius (bisection to 1e-12 * R);
angular draws use the beta-transform for the polar angles and a uniform
azimuth.  Every draw is tied to an :class:`RngStream` so that a cloud is
reproducible bit for bit from ``(params, seed, stream_index)``.

RNG consumption order within a cloud is fixed: point count, then
depths, then angles.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .geometry import (
    ModelParams,
    HyperbolicPoint,
    direction_from_angles,
    _scaled_sinh_power_integral,
)

__all__ = [
    "RngStream",
    "PointCloud",
    "sample_point_count",
    "sample_radial_depth",
    "sample_angles",
    "sample_point_cloud",
    "sample_euclidean_cloud",
    "radial_depth_cdf",
    "cloud_with_points",
    "save_point_cloud",
    "load_point_cloud",
]

_BISECTION_REL_TOL = 1e-12


class RngStream:
    """A reproducible random stream derived from (master_seed, stream_index).

    Distinct stream indices give statistically independent streams
    (SeedSequence spawn keys over PCG64); reconstructing with the same
    pair replays the stream exactly.
    """

    def __init__(self, master_seed: int, stream_index=0):
        key = (stream_index,) if isinstance(stream_index, int) else tuple(stream_index)
        self.master_seed = int(master_seed)
        self.stream_index = stream_index
        self._gen = np.random.default_rng(
            np.random.SeedSequence(self.master_seed, spawn_key=key))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def __repr__(self) -> str:  # pragma: no cover
        return f"RngStream(master_seed={self.master_seed}, stream_index={self.stream_index!r})"


# ---------------------------------------------------------------------------
# elementary draws


def sample_point_count(n: float, rng: RngStream) -> int:
    """Poisson(n) number of points."""
    if not n > 0:
        raise ValueError("intensity must be positive")
    return int(rng.generator.poisson(n))


def radial_depth_cdf(params: ModelParams, R: float):
    """CDF of the depth t = R - r as a callable (vectorised).

    P(T <= t) = 1 - F_r(R - t) with F_r the closed-form radius CDF.
    """
    m = params.d - 1
    a = params.alpha
    scale = m * a * R
    denom = float(_scaled_sinh_power_integral(a, np.asarray(R, float), m, scale))

    def cdf(t):
        t = np.asarray(t, dtype=float)
        num = _scaled_sinh_power_integral(a, R - t, m, scale)
        out = 1.0 - num / denom
        return float(out) if np.ndim(out) == 0 else out

    return cdf


def sample_radial_depth(params: ModelParams, R: float, rng: RngStream,
                        size: int | None = None, max_depth: float | None = None):
    """Depth draws t = R - r with r distributed by the radial density.

    Inverse-CDF sampling: the closed-form radius CDF is inverted by
    bisection to absolute tolerance 1e-12 * R.  ``max_depth`` conditions
    the draw on t <= max_depth by rescaling the uniform input (exact).
    """
    m = params.d - 1
    a = params.alpha
    scale = m * a * R
    denom = float(_scaled_sinh_power_integral(a, np.asarray(R, float), m, scale))

    def radius_cdf(r):
        return _scaled_sinh_power_integral(a, r, m, scale) / denom

    count = 1 if size is None else int(size)
    if count == 0:
        return np.empty(0)
    u = rng.generator.random(count)
    lo_r = 0.0
    if max_depth is not None:
        if not 0.0 < max_depth <= R:
            raise ValueError("max_depth must lie in (0, R]")
        lo_r = R - max_depth
        base = float(radius_cdf(np.asarray(lo_r, float)))
        u = base + u * (1.0 - base)

    lo = np.full(count, lo_r)
    hi = np.full(count, float(R))
    tol = _BISECTION_REL_TOL * R
    # ~40 halvings take the bracket below 1e-12 * R
    while (hi - lo).max() > tol:
        mid = 0.5 * (lo + hi)
        below = radius_cdf(mid) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    r = 0.5 * (lo + hi)
    t = R - r
    return float(t[0]) if size is None else t


def sample_angles(d: int, rng: RngStream, size: int | None = None):
    """Angular draws matching the uniform direction density.

    Polar angle i (i = 1..d-2) has density sin^{d-i-1}(theta)/kappa_{d-i-1}
    on [0, pi], drawn via cos(theta) = 1 - 2 V with V ~ Beta((m+1)/2, (m+1)/2);
    the azimuth is uniform on [0, 2 pi).
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    count = 1 if size is None else int(size)
    gen = rng.generator
    out = np.empty((count, d - 1))
    for col in range(d - 2):
        mexp = d - col - 2  # sin-power of this polar angle
        shape = (mexp + 1) / 2.0
        v = gen.beta(shape, shape, size=count)
        out[:, col] = np.arccos(np.clip(1.0 - 2.0 * v, -1.0, 1.0))
    out[:, d - 2] = gen.uniform(0.0, 2.0 * np.pi, size=count)
    return out[0] if size is None else out


# ---------------------------------------------------------------------------
# clouds


@dataclass(frozen=True, eq=False)
class PointCloud:
    """A sampled configuration on the ball of radius R.

    Column arrays: depths ``t`` (N,), ``angles`` (N, d-1) and cached unit
    ``directions`` (N, d).  ``annulus_gamma`` is set when the cloud has
    been restricted to depths t <= gamma * R.
    """

    params: ModelParams
    R: float
    t: np.ndarray
    angles: np.ndarray
    directions: np.ndarray
    seed: int
    stream_index: object = 0
    annulus_gamma: float | None = None

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        if t.size and (t.min() < 0.0 or t.max() > self.R * (1.0 + 1e-12)):
            raise ValueError("depths must lie in [0, R]")
        if self.annulus_gamma is not None and t.size:
            if t.max() > self.annulus_gamma * self.R * (1.0 + 1e-12):
                raise ValueError("annulus-restricted cloud has depths beyond gamma * R")

    def __len__(self) -> int:
        return self.t.shape[0]

    @property
    def radii(self) -> np.ndarray:
        return self.R - self.t

    def point(self, i: int) -> HyperbolicPoint:
        return HyperbolicPoint(t=float(self.t[i]), r=float(self.R - self.t[i]),
                               angles=self.angles[i], direction=self.directions[i])

    def subset(self, mask_or_index, annulus_gamma: float | None = None) -> "PointCloud":
        idx = np.asarray(mask_or_index)
        return replace(self, t=self.t[idx], angles=self.angles[idx],
                       directions=self.directions[idx],
                       annulus_gamma=self.annulus_gamma if annulus_gamma is None else annulus_gamma)


def sample_point_cloud(params: ModelParams, seed: int, stream_index=0) -> PointCloud:
    """Sample a Poisson(n) cloud; bit-identical for equal (params, seed, stream)."""
    R = params.radius()
    rng = RngStream(seed, stream_index)
    count = sample_point_count(params.n, rng)
    t = sample_radial_depth(params, R, rng, size=count)
    angles = sample_angles(params.d, rng, size=count)
    if count == 0:
        t = np.empty(0)
        angles = np.empty((0, params.d - 1))
    directions = direction_from_angles(angles) if count else np.empty((0, params.d))
    return PointCloud(params=params, R=R, t=t, angles=angles, directions=directions,
                      seed=int(seed), stream_index=stream_index)


def cloud_with_points(cloud: PointCloud, t_new, angles_new) -> PointCloud:
    """Cloud with extra points appended (difference-operator checks, grids)."""
    t_new = np.atleast_1d(np.asarray(t_new, dtype=float))
    angles_new = np.atleast_2d(np.asarray(angles_new, dtype=float))
    dirs = direction_from_angles(angles_new)
    return replace(cloud,
                   t=np.concatenate([cloud.t, t_new]),
                   angles=np.concatenate([cloud.angles, angles_new]),
                   directions=np.concatenate([cloud.directions, dirs]))


def sample_euclidean_cloud(n: float, r: float, d: int, rng: RngStream) -> np.ndarray:
    """Poisson(n) points uniform in the Euclidean ball of radius r; shape (N, d)."""
    if not (n > 0 and r > 0 and d >= 1):
        raise ValueError("need n > 0, r > 0, d >= 1")
    gen = rng.generator
    count = int(gen.poisson(n))
    raw = gen.standard_normal((count, d))
    norms = np.linalg.norm(raw, axis=1)
    norms[norms == 0.0] = 1.0
    radii = r * gen.random(count) ** (1.0 / d)
    return raw / norms[:, None] * radii[:, None]


# ---------------------------------------------------------------------------
# on-disk format: CSV of angles/depths plus a JSON sidecar


def _sidecar_path(csv_path: Path) -> Path:
    return csv_path.with_name(csv_path.stem + ".meta.json")


def save_point_cloud(cloud: PointCloud, path) -> Path:
    """Write ``t,theta_1,...,theta_{d-1}`` rows plus a metadata sidecar JSON."""
    path = Path(path)
    d = cloud.params.d
    header = ["t"] + [f"theta_{i}" for i in range(1, d)]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(len(cloud)):
            writer.writerow([repr(float(cloud.t[i]))]
                            + [repr(float(v)) for v in cloud.angles[i]])
    meta = {
        "params": cloud.params.to_dict(),
        "seed": cloud.seed,
        "stream_index": list(cloud.stream_index) if isinstance(cloud.stream_index, tuple)
        else cloud.stream_index,
        "R": cloud.R,
        "annulus_gamma": cloud.annulus_gamma,
        "num_points": len(cloud),
    }
    _sidecar_path(path).write_text(json.dumps(meta, indent=2))
    return path


def load_point_cloud(path) -> PointCloud:
    """Rebuild a cloud from the CSV and its sidecar (directions recomputed)."""
    path = Path(path)
    meta = json.loads(_sidecar_path(path).read_text())
    params = ModelParams.from_dict(meta["params"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # empty data file
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if rows.size == 0:
        rows = rows.reshape(0, params.d)
    t = rows[:, 0]
    angles = rows[:, 1:]
    directions = direction_from_angles(angles) if len(t) else np.empty((0, params.d))
    stream = meta.get("stream_index", 0)
    if isinstance(stream, list):
        stream = tuple(stream)
    return PointCloud(params=params, R=float(meta["R"]), t=t, angles=angles,
                      directions=directions, seed=int(meta["seed"]),
                      stream_index=stream, annulus_gamma=meta.get("annulus_gamma"))
