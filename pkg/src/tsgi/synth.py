"""Deterministic, seeded generators for the synthetic study datasets.

Exact curve parametrizations (Archimedean spiral, folium-of-Descartes
loop, jittered limb-like sinusoids, chord-profile chroma frames) are
fixture choices of this package, frozen so downstream tests are stable.
``noise_std`` is relative to the clean trajectory's RMS scale.
Corruption order is always rotation, then noise, then time warp.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = ("spiral2d", "spiral3d", "folium", "random_walk", "chroma_like", "motion_like")


@dataclass
class GeneratorSpec:
    """Recipe for one synthetic series."""

    kind: str
    length: int = 64
    dim: int | None = None
    noise_std: float = 0.0
    theta: float | None = None
    rotation: np.ndarray | None = None
    warp_seed: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if self.length < 2:
            raise ValueError(f"length must be >= 2, got {self.length}")
        if self.noise_std < 0:
            raise ValueError(f"noise_std must be >= 0, got {self.noise_std}")


def rotation_matrix(theta: float, p: int) -> np.ndarray:
    """2d rotation by theta, or for p=3 the rotation about the z-axis."""
    c, s = np.cos(theta), np.sin(theta)
    if p == 2:
        return np.array([[c, -s], [s, c]])
    if p == 3:
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    raise ValueError(f"angle-based rotation defined for p in (2, 3), got p={p}")


def random_warp(length: int, seed: int, low: float = 0.35, high: float = 1.65) -> np.ndarray:
    """Strictly increasing reparametrization of [0, T-1] onto itself."""
    rng = np.random.default_rng(seed)
    inc = rng.uniform(low, high, length - 1)
    grid = np.concatenate([[0.0], np.cumsum(inc)])
    return grid * (length - 1) / grid[-1]


def random_smooth_warp(length: int, seed: int, strength: float = 0.8) -> np.ndarray:
    """Smooth strictly increasing reparametrization of [0, T-1] onto itself.

    The local speed is the exponential of a low-frequency random
    waveform, so whole segments are stretched or compressed instead of
    the jitter (which averages out) of per-step random increments.
    """
    rng = np.random.default_rng(seed)
    u = np.linspace(0.0, 1.0, length - 1)
    log_speed = (strength * rng.uniform(0.5, 1.0) * np.sin(2.0 * np.pi * u + rng.uniform(0, 2 * np.pi))
                 + 0.5 * strength * rng.uniform(0.5, 1.0) * np.sin(4.0 * np.pi * u + rng.uniform(0, 2 * np.pi)))
    grid = np.concatenate([[0.0], np.cumsum(np.exp(log_speed))])
    return grid * (length - 1) / grid[-1]


def warp_series(x: np.ndarray, warp: np.ndarray) -> np.ndarray:
    """Resample a series at warped (possibly fractional) time indices."""
    told = np.arange(x.shape[0], dtype=np.float64)
    return np.column_stack([np.interp(warp, told, x[:, d]) for d in range(x.shape[1])])


def _spiral2d(length: int) -> np.ndarray:
    u = np.linspace(0.0, 1.0, length)
    phi = 4.0 * np.pi * u
    return np.column_stack([u * np.cos(phi), u * np.sin(phi)])


def _spiral3d(length: int) -> np.ndarray:
    flat = _spiral2d(length)
    return np.column_stack([flat, np.linspace(0.0, 1.0, length)])


def _folium(length: int) -> np.ndarray:
    psi = np.linspace(0.0, np.pi / 2 - 0.12, length)
    t = np.tan(psi)
    denom = 1.0 + t ** 3
    return np.column_stack([3.0 * t / denom, 3.0 * t ** 2 / denom])


def _random_walk(length: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    steps = rng.standard_normal((length, dim))
    return np.cumsum(steps, axis=0) / np.sqrt(length)


def chord_profile(root: int, p: int = 12, amp: float = 1.0) -> np.ndarray:
    """Sparse chroma-style template: root, fifth and major third."""
    prof = np.zeros(p)
    prof[root % p] = 1.0
    prof[(root + 7) % p] = 0.6
    prof[(root + 4) % p] = 0.4
    return amp * prof


def _chroma_like(length: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    hold = max(2, length // 16)
    frames = np.empty((length, dim))
    root = int(rng.integers(dim))
    for t in range(length):
        if t % hold == 0 and t > 0:
            root = (root + int(rng.integers(1, 5))) % dim
        frames[t] = chord_profile(root, dim)
    frames += 0.02 * rng.standard_normal((length, dim))
    return np.clip(frames, 0.0, None)


def _motion_like(length: int, rng: np.random.Generator) -> np.ndarray:
    # Fixed frequencies keep futures predictable from neighbors; only
    # amplitudes and phases carry per-sample identity.
    u = np.linspace(0.0, 1.0, length)
    freqs = np.array([1.0, 1.5, 0.5])
    amps = np.array([1.0, 0.8, 0.4]) * (1.0 + 0.05 * rng.uniform(-1, 1, 3))
    phases = np.array([0.0, np.pi / 3, np.pi / 5]) + 0.05 * rng.uniform(-1, 1, 3)
    cols = [a * np.sin(2.0 * np.pi * f * u + ph) for f, a, ph in zip(freqs, amps, phases)]
    return np.column_stack(cols)


def generate(spec: GeneratorSpec) -> np.ndarray:
    """Generate one series; identical specs always yield identical output."""
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "spiral2d":
        x = _spiral2d(spec.length)
    elif spec.kind == "spiral3d":
        x = _spiral3d(spec.length)
    elif spec.kind == "folium":
        x = _folium(spec.length)
    elif spec.kind == "random_walk":
        x = _random_walk(spec.length, spec.dim or 8, rng)
    elif spec.kind == "chroma_like":
        x = _chroma_like(spec.length, spec.dim or 12, rng)
    else:
        x = _motion_like(spec.length, rng)

    if spec.rotation is not None:
        q = np.asarray(spec.rotation, dtype=np.float64)
        if q.shape != (x.shape[1], x.shape[1]):
            raise ValueError(f"rotation must be ({x.shape[1]}, {x.shape[1]}), got {q.shape}")
        x = x @ q.T
    elif spec.theta is not None:
        x = x @ rotation_matrix(spec.theta, x.shape[1]).T

    if spec.noise_std > 0:
        centered = x - x.mean(axis=0)
        scale = float(np.sqrt((centered ** 2).sum(axis=1).mean()))
        x = x + spec.noise_std * scale * rng.standard_normal(x.shape)

    if spec.warp_seed is not None:
        x = warp_series(x, random_warp(spec.length, spec.warp_seed))
    return x


def pair_seed(master_seed: int, trial: int, angle_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master_seed, trial, angle_index])


def generate_pairs_for_rotation_study(
    n_trials: int,
    angles: np.ndarray,
    length: int = 48,
    noise_std: float = 0.05,
    master_seed: int = 0,
) -> list[tuple[np.ndarray, np.ndarray, float]]:
    """(reference, rotated) spiral pairs per angle with independent noise.

    Both members of a pair share the same clean spiral; seeds derive
    deterministically from (trial, angle).
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    pairs = []
    for a_idx, theta in enumerate(np.asarray(angles, dtype=np.float64)):
        for trial in range(n_trials):
            s1, s2 = pair_seed(master_seed, trial, a_idx).spawn(2)
            seed_x = int(s1.generate_state(1)[0])
            seed_y = int(s2.generate_state(1)[0])
            x = generate(GeneratorSpec("spiral2d", length, noise_std=noise_std, seed=seed_x))
            y = generate(GeneratorSpec(
                "spiral2d", length, noise_std=noise_std, theta=float(theta), seed=seed_y,
            ))
            pairs.append((x, y, float(theta)))
    return pairs


def make_forecast_corpus(
    n_train: int = 12,
    n_test: int = 2,
    length: int = 48,
    split: int = 24,
    noise_std: float = 0.01,
    warp: bool = True,
    seed: int = 0,
):
    """Rotated/warped limb-trajectory corpus for the forecasting study.

    Every sample is a jittered 3d sinusoidal trajectory, rotated about
    the z-axis by its own random angle and (optionally) smoothly
    time-reparametrized.  Returns (train, test) arrays of shapes
    (n_train, T, 3) and (n_test, T, 3); test futures are the ground
    truth for prediction error.
    """
    root = np.random.SeedSequence([seed, n_train, n_test, length])
    children = root.spawn(n_train + n_test)
    samples = []
    for i, child in enumerate(children):
        sub = child.generate_state(3)
        theta = np.random.default_rng(int(sub[1])).uniform(0.0, 2.0 * np.pi)
        x = generate(GeneratorSpec(
            "motion_like", length, noise_std=noise_std, theta=float(theta), seed=int(sub[0]),
        ))
        if warp:
            x = warp_series(x, random_smooth_warp(length, int(sub[2])))
        samples.append(x)
    samples = np.asarray(samples)
    return samples[:n_train], samples[n_train:]


def make_chroma_retrieval_corpus(
    n_pairs: int = 40,
    frames_per_chord: int = 4,
    bridge_frames: int = 14,
    bridge_amp: float = 1.25,
    noise_std: float = 0.015,
    seed: int = 0,
):
    """Query/cover chroma corpus whose covers modulate mid-song.

    Each song walks a chord root over all 12 semitones (song identity is
    the walk order, and the time-averaged profile of that body section is
    flat) and ends on a sustained louder bridge chord.  The cover
    transposes the body by one shift and the bridge by a different one,
    so a transposition index estimated from average energy locks onto the
    bridge while the cost-optimal single shift is the body's.

    Returns (queries, covers, names): the true match of queries[i] is
    covers[i].
    """
    rng = np.random.default_rng(seed)
    p = 12
    queries, covers, names = [], [], []
    for s in range(n_pairs):
        order = rng.permutation(p)
        bridge_root = int(rng.integers(p))
        k_body = int(rng.integers(1, p))
        k_bridge = int((k_body + rng.integers(1, p - 1)) % p)

        def build(shift_body, shift_bridge, noise_rng, warp_seed):
            rows = []
            for root in order:
                prof = chord_profile(int(root) + shift_body, p)
                rows.extend([prof] * frames_per_chord)
            bridge = chord_profile(bridge_root + shift_bridge, p, amp=bridge_amp)
            rows.extend([bridge] * bridge_frames)
            frames = np.asarray(rows)
            frames = frames + noise_std * noise_rng.standard_normal(frames.shape)
            frames = np.clip(frames, 0.0, None)
            return warp_series(frames, random_warp(frames.shape[0], warp_seed, 0.75, 1.25))

        seeds = rng.integers(0, 2 ** 31, size=4)
        queries.append(build(0, 0, np.random.default_rng(int(seeds[0])), int(seeds[1])))
        covers.append(build(k_body, k_bridge, np.random.default_rng(int(seeds[2])), int(seeds[3])))
        names.append(f"song{s:03d}")
    return queries, covers, names
