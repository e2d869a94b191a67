"""
Simulation engine: seeded channels, received-signal synthesis, matched
filtering, beampattern sweeps with and without NSP, output SINR trials and
the K sweep.

Random streams are derived from ``(seed, purpose, index)`` through
``numpy.random.SeedSequence``, so a trial's draws do not depend on which
worker runs it or in what order.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from omimo.array_model import UniformLinearArray
from omimo.nsp import (
    InfeasibleProjectionError,
    ProjectionMatrix,
    feasibility,
    null_space_projection,
)
from omimo.overlapped import (
    SubarrayPartition,
    beampattern,
    build_mixing_matrix,
    effective_aperture,
    transmit_weights,
)
from omimo.waveforms import WaveformBank, matched_filter

GAIN_FLOOR_DB = -300.0
SINR_CAP_DB = 300.0

_CHANNEL_STREAM = 1
_TRIAL_STREAM = 2


class ConfigError(ValueError):
    pass


def random_stream(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))


@dataclass(frozen=True)
class ScenarioConfig:
    """
    Every knob of a run. Angles are in degrees; powers in dB relative to a
    unit reference. ``snr_db`` sets the noise variance seen by each
    matched-filter output, ``10 ** (-snr_db / 10)``; ``inf`` disables noise.
    ``k`` is the subarray count used by SINR trials, ``k_list`` the set
    swept by beampatterns.
    """

    mt: int = 20
    mr: int = 20
    nr: int = 4
    dt: float = 0.5
    dr: float = 0.5
    theta_s_deg: float = 15.0
    interferers: tuple = ((-30.0, 30.0), (-10.0, 30.0))
    k_list: tuple = (1, 5, 10, 20)
    k: int = 5
    snr_db: float = 10.0
    signal_power_db: float = 0.0
    trials: int = 100
    seed: int = 0
    grid: tuple = (-90.0, 90.0, 0.1)
    num_samples: int = 1024
    index_mode: str = "linear"
    nsp: bool = False

    def __post_init__(self):
        for name in ("mt", "mr", "nr", "trials", "num_samples"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.dt <= 0 or self.dr <= 0:
            raise ConfigError("element spacings must be positive")
        if not self.k_list:
            raise ConfigError("k_list is empty")
        for k in (*self.k_list, self.k):
            if not 1 <= k <= self.mt:
                raise ConfigError(f"K={k} outside 1..mt={self.mt}")
        lo, hi, step = self.grid
        if not step > 0 or hi < lo:
            raise ConfigError(f"bad grid {self.grid}: need min <= max and step > 0")
        for angle in (self.theta_s_deg, *(a for a, _ in self.interferers), lo, hi):
            if not -90.0 <= angle <= 90.0:
                raise ConfigError(f"angle {angle} deg outside [-90, 90]")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 unsigned bits")

    @property
    def theta_s(self) -> float:
        return np.deg2rad(self.theta_s_deg)

    @property
    def tx(self) -> UniformLinearArray:
        return UniformLinearArray(self.mt, self.dt)

    @property
    def rx(self) -> UniformLinearArray:
        return UniformLinearArray(self.mr, self.dr)

    def theta_grid_deg(self) -> np.ndarray:
        lo, hi, step = self.grid
        n = int(np.floor((hi - lo) / step + 1e-9)) + 1
        return np.round(lo + step * np.arange(n), 10)


# ----------------------------------------------------------------- channels

def sample_channel(num_rx: int, num_tx: int, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. CN(0, 1) entries; magnitudes are Rayleigh distributed."""
    re = rng.standard_normal((num_rx, num_tx))
    im = rng.standard_normal((num_rx, num_tx))
    return (re + 1j * im) / np.sqrt(2.0)


def interference_suppression(H, W, P) -> float:
    """10 log10(||H P W||_F^2 / ||H W||_F^2); -inf when fully nulled."""
    H = np.asarray(H)
    W = np.asarray(W)
    P = P.matrix if isinstance(P, ProjectionMatrix) else np.asarray(P)
    before = np.linalg.norm(H @ W) ** 2
    if before == 0.0:
        raise ValueError("H W is zero; suppression ratio undefined")
    after = np.linalg.norm(H @ P @ W) ** 2
    if after == 0.0:
        return float("-inf")
    return float(10.0 * np.log10(after / before))


# -------------------------------------------------------- transmit geometry

def excitation(mixing: np.ndarray, theta, spacing: float, projection=None) -> np.ndarray:
    """
    Far-field coefficient of every waveform toward ``theta``:
    ``(P W)^H a(theta)``. Shape ``theta.shape + (M_m * K,)``.
    """
    tx = UniformLinearArray(mixing.shape[0], spacing)
    M = mixing if projection is None else _matrix(projection) @ mixing
    return tx.steering_vector(theta) @ M.conj()


def _matrix(projection):
    return projection.matrix if isinstance(projection, ProjectionMatrix) else np.asarray(projection)


def nsp_beampattern(
    partition: SubarrayPartition,
    weights,
    projection,
    theta_s: float,
    theta,
    spacing: float,
    rx: UniformLinearArray,
) -> np.ndarray:
    """
    Beampattern after projecting the physical excitation:
    ``u_P(theta) = ((P W)^H a(theta)) kron b(theta)``, normalized by
    ``||u_P(theta_s)||^4``. With P = I this is the plain pattern.
    """
    W = build_mixing_matrix(partition, weights)
    ref = np.kron(excitation(W, theta_s, spacing, projection), rx.steering_vector(theta_s))
    coeff = excitation(W, theta, spacing, projection)
    b = rx.steering_vector(theta)
    u = (coeff[..., :, None] * b[..., None, :]).reshape(coeff.shape[:-1] + (ref.size,))
    energy = np.vdot(ref, ref).real
    if energy == 0.0:
        raise ZeroDivisionError("projection removes the whole target-direction response")
    return np.abs(u @ ref.conj()) ** 2 / energy**2


# ----------------------------------------------------------- beampatterns

@dataclass
class BeampatternTable:
    theta_deg: np.ndarray
    columns: dict = field(default_factory=dict)

    def add(self, label: str, gain: np.ndarray):
        gain = np.asarray(gain, dtype=float)
        if gain.shape != self.theta_deg.shape:
            raise ValueError(f"column {label!r} has {gain.shape}, grid has {self.theta_deg.shape}")
        peak = gain.max()
        rel = np.maximum(gain / peak, 10.0 ** (GAIN_FLOOR_DB / 10.0))
        self.columns[label] = 10.0 * np.log10(rel)


def column_label(k: int, nsp: bool = False) -> str:
    return f"gain_db_K{k}" + ("_nsp" if nsp else "")


def channel_for(config: ScenarioConfig) -> np.ndarray:
    """The seeded interference channel used by beampattern sweeps."""
    return sample_channel(config.nr, config.mt, random_stream(config.seed, _CHANNEL_STREAM))


def _sweep_column(args):
    config, k, projection = args
    theta = np.deg2rad(config.theta_grid_deg())
    part = SubarrayPartition(config.mt, k)
    w = transmit_weights(part, config.theta_s, config.dt)
    if projection is not None:
        return nsp_beampattern(part, w, projection, config.theta_s, theta, config.dt, config.rx)
    return beampattern(part, w, config.theta_s, theta, config.dt, config.rx)


def beampattern_sweep(
    config: ScenarioConfig,
    use_nsp: bool = False,
    channel=None,
    projection=None,
    workers: int = 1,
) -> BeampatternTable:
    """
    Normalized beampattern (dB, 0 dB peak) for every K in ``config.k_list``.

    With ``use_nsp`` the columns are the projected patterns; ``projection``
    overrides the projector built from ``channel`` (or from the seeded
    channel when neither is given). Columns are computed independently, so
    ``workers`` does not change the result.
    """
    table = BeampatternTable(config.theta_grid_deg())
    if use_nsp and projection is None:
        if channel is None:
            check = feasibility(config.mt, config.nr)
            if not check:
                raise InfeasibleProjectionError(check.message)
            channel = channel_for(config)
        projection = null_space_projection(channel)
        if projection.rank == 0:
            raise InfeasibleProjectionError(
                f"channel of shape {np.shape(channel)} has a trivial null space"
            )
    jobs = [(config, k, projection if use_nsp else None) for k in config.k_list]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            gains = list(pool.map(_sweep_column, jobs))
    else:
        gains = [_sweep_column(j) for j in jobs]
    for k, g in zip(config.k_list, gains):
        table.add(column_label(k, use_nsp), g)
    return table


@dataclass(frozen=True)
class SidelobeMetrics:
    psl_db: float
    mainlobe_width_deg: float
    peak_deg: float


def sidelobe_metrics(theta_deg, gain_db, mainlobe_exclusion_deg: float | None = None) -> SidelobeMetrics:
    """
    Peak sidelobe level and null-to-null mainlobe width of a pattern.

    The mainlobe runs from the peak out to the first local minimum on each
    side. PSL is the largest gain outside the mainlobe, or outside
    ``peak +/- mainlobe_exclusion_deg`` when that is given. A flat pattern
    has no sidelobes and yields NaN for both metrics; a grid whose samples
    next to the peak are already 3 dB down raises ``ValueError``.
    """
    theta_deg = np.asarray(theta_deg, dtype=float)
    g = np.asarray(gain_db, dtype=float)
    if g.max() - g.min() < 1e-9:
        return SidelobeMetrics(float("nan"), float("nan"), float(theta_deg[np.argmax(g)]))
    i = int(np.argmax(g))
    lo = i
    while lo > 0 and g[lo - 1] <= g[lo]:
        lo -= 1
    hi = i
    while hi < g.size - 1 and g[hi + 1] <= g[hi]:
        hi += 1
    neighbours = g[max(i - 1, 0):i + 2]
    if hi - lo < 2 or neighbours.min() < g[i] - 3.0:
        # the half-power beam must span at least one sample each side
        raise ValueError("theta grid too coarse to resolve the mainlobe and its nulls")
    if mainlobe_exclusion_deg is None:
        outside = np.ones(g.size, dtype=bool)
        outside[lo:hi + 1] = False
    else:
        outside = np.abs(theta_deg - theta_deg[i]) > mainlobe_exclusion_deg
    psl = float(g[outside].max()) if outside.any() else float("nan")
    return SidelobeMetrics(psl, float(theta_deg[hi] - theta_deg[lo]), float(theta_deg[i]))


# -------------------------------------------------------- received signals

@dataclass(frozen=True)
class ReceivedSignal:
    """Per-element sample streams, each ``(M_R, N_s)``, split by source."""

    signal: np.ndarray
    interference: np.ndarray
    noise: np.ndarray
    beta_s: complex
    beta_i: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.signal + self.interference + self.noise


def _unit_phase(rng, size=None):
    return np.exp(2j * np.pi * rng.random(size))


def simulate_received(
    config: ScenarioConfig,
    weights,
    bank: WaveformBank,
    rng: np.random.Generator,
    projection=None,
    beta_s: complex | None = None,
    beta_i=None,
) -> ReceivedSignal:
    """
    Target echo plus interferers plus AWGN at the receive array.

    Each source at ``theta`` returns ``beta * sum((P W)^H a(theta) * phi)``
    on every receive element, scaled by ``b(theta)``. Reflection
    coefficients have uniform phase and the configured power unless given.
    The rng is consumed in a fixed order: target phase, interferer phases,
    noise.
    """
    part = SubarrayPartition(config.mt, bank.num_subarrays)
    W = build_mixing_matrix(part, weights)
    phi = bank.matrix
    rx = config.rx

    drawn_s = np.sqrt(10.0 ** (config.signal_power_db / 10.0)) * _unit_phase(rng)
    n_int = len(config.interferers)
    powers = np.array([p for _, p in config.interferers], dtype=float)
    drawn_i = np.sqrt(10.0 ** (powers / 10.0)) * _unit_phase(rng, n_int)
    beta_s = drawn_s if beta_s is None else beta_s
    beta_i = drawn_i if beta_i is None else np.asarray(beta_i, dtype=complex)

    def echo(theta, beta):
        r = beta * (excitation(W, theta, config.dt, projection) @ phi)
        return np.outer(rx.steering_vector(theta), r)

    signal = echo(config.theta_s, beta_s)
    interference = np.zeros_like(signal)
    for (angle, _), beta in zip(config.interferers, beta_i):
        interference += echo(np.deg2rad(angle), beta)

    shape = (config.mr, bank.num_samples)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    # per-sample variance chosen so each matched-filter output sees 10^(-snr/10)
    var = 10.0 ** (-config.snr_db / 10.0) * bank.num_samples / bank.pulse.duration
    noise = np.sqrt(var / 2.0) * (re + 1j * im)
    return ReceivedSignal(signal, interference, noise, complex(beta_s), beta_i)


# --------------------------------------------------------------------- SINR

@dataclass(frozen=True)
class TrialStats:
    sinr_db: np.ndarray
    suppression_db: np.ndarray

    @staticmethod
    def _agg(x):
        return {"mean": float(np.mean(x)), "median": float(np.median(x)), "std": float(np.std(x))}

    @property
    def sinr(self) -> dict:
        return self._agg(self.sinr_db)

    @property
    def suppression(self) -> dict:
        return self._agg(self.suppression_db)


def _trial(args):
    config, index = args
    rng = random_stream(config.seed, _TRIAL_STREAM, index)
    part = SubarrayPartition(config.mt, config.k)
    weights = transmit_weights(part, config.theta_s, config.dt)
    W = build_mixing_matrix(part, weights)

    H = sample_channel(config.nr, config.mt, rng)
    if config.nsp:
        proj = null_space_projection(H)
    else:
        proj = ProjectionMatrix.identity(config.mt)
    suppression = interference_suppression(H, W, proj)

    bank = WaveformBank.for_partition(part, num_samples=config.num_samples, mode=config.index_mode)
    rec = simulate_received(config, weights, bank, rng, projection=proj)

    rx_b = config.rx.steering_vector(config.theta_s)
    w_d = np.kron(excitation(W, config.theta_s, config.dt, proj), rx_b)
    w_d /= np.sqrt(config.mt / config.k)

    def beamform(stream):
        y = matched_filter(stream, bank).T.reshape(-1)
        return np.vdot(w_d, y)

    num = abs(beamform(rec.signal)) ** 2
    den = abs(beamform(rec.interference + rec.noise)) ** 2
    if den == 0.0:
        sinr = SINR_CAP_DB
    elif num == 0.0:
        sinr = float("-inf")
    else:
        sinr = min(10.0 * np.log10(num / den), SINR_CAP_DB)
    return float(sinr), suppression


def output_sinr(config: ScenarioConfig, workers: int = 1) -> TrialStats:
    """
    Beamformed output SINR over ``config.trials`` independent trials.

    The receive beamformer is the non-adaptive ``(c * d)(theta_s) kron
    b(theta_s)`` (projected when ``config.nsp``). Denominators of exactly
    zero report ``SINR_CAP_DB``.
    """
    jobs = [(config, t) for t in range(config.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_trial(j) for j in jobs]
    sinr = np.array([r[0] for r in results])
    supp = np.array([r[1] for r in results])
    return TrialStats(sinr, supp)


# ------------------------------------------------------------------ K sweep

def k_sweep(num_elements: int) -> list[tuple[int, int]]:
    """(K, M_eps) for K = 1..M_T."""
    if num_elements < 1:
        raise ValueError("M_T must be at least 1")
    return [(k, effective_aperture(num_elements, k)) for k in range(1, num_elements + 1)]


def sweep_argmax(sweep) -> tuple[int, list[int]]:
    best = max(m for _, m in sweep)
    return best, [k for k, m in sweep if m == best]
