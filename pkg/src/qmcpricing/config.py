"""Experiment configuration and its INI file format.

Every section and key is optional; unknown sections or keys are rejected::

    [market]    s0, strike, rate, vol, maturity, drift
    [grid]      qubits, cutoff, payoff_bits (``none`` for the ideal oracle)
    [qae]       phase_bits, repetitions, shots_per_bit
    [classical] ks, trials               (ks: comma-separated integers)
    [quantum]   bits, trials             (bits: comma-separated, or ``lo-hi``)
    [sweep]     strikes
    [asian]     periods, period_qubits, kind
    [fig1]      paths, steps
    [run]       seed, runs
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from .bsm import MarketParams
from .errors import DomainError
from .estimation import QaeConfig

DEFAULT_SEED = 20190129


def _half_decades(lo_exp: int, hi_exp: int) -> tuple[int, ...]:
    return tuple(int(round(10 ** (e / 2))) for e in range(2 * lo_exp, 2 * hi_exp + 1))


@dataclass(frozen=True)
class GridConfig:
    qubits: int = 8
    cutoff: float = 4.0
    payoff_bits: int | None = 16


@dataclass(frozen=True)
class ClassicalConfig:
    ks: tuple[int, ...] = _half_decades(2, 6)
    trials: int = 100


@dataclass(frozen=True)
class QuantumSweepConfig:
    bits: tuple[int, ...] = tuple(range(7, 21))
    trials: int = 100


@dataclass(frozen=True)
class AsianConfig:
    periods: int = 2
    period_qubits: int = 4
    kind: str = "arithmetic"


@dataclass(frozen=True)
class ExperimentConfig:
    market: MarketParams = field(default_factory=MarketParams)
    grid: GridConfig = field(default_factory=GridConfig)
    qae: QaeConfig = field(default_factory=lambda: QaeConfig(seed=DEFAULT_SEED))
    classical: ClassicalConfig = field(default_factory=ClassicalConfig)
    quantum: QuantumSweepConfig = field(default_factory=QuantumSweepConfig)
    strikes: tuple[float, ...] = (60.0, 80.0, 100.0, 120.0, 140.0)
    asian: AsianConfig = field(default_factory=AsianConfig)
    fig1_paths: int = 5
    fig1_steps: int = 100
    seed: int = DEFAULT_SEED
    runs: int = 1

    def __post_init__(self) -> None:
        if not self.strikes:
            raise DomainError("strike list must not be empty")
        if self.classical.trials < 1 or self.quantum.trials < 1:
            raise DomainError("trial counts must be >= 1")
        if len(self.classical.ks) < 3 or len(self.quantum.bits) < 3:
            raise DomainError("scaling sweeps need at least 3 points")
        if any(k < 2 for k in self.classical.ks):
            raise DomainError("classical sample counts must be >= 2")
        if any(b < 1 for b in self.quantum.bits):
            raise DomainError("phase bits must be >= 1")
        if self.seed < 0:
            raise DomainError("seed must be nonnegative")
        if self.runs < 1 or self.fig1_paths < 1 or self.fig1_steps < 1:
            raise DomainError("runs, fig1 paths and steps must be >= 1")

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=seed, qae=replace(self.qae, seed=seed))


_SCHEMA = {
    "market": {"s0", "strike", "rate", "vol", "maturity", "drift"},
    "grid": {"qubits", "cutoff", "payoff_bits"},
    "qae": {"phase_bits", "repetitions", "shots_per_bit"},
    "classical": {"ks", "trials"},
    "quantum": {"bits", "trials"},
    "sweep": {"strikes"},
    "asian": {"periods", "period_qubits", "kind"},
    "fig1": {"paths", "steps"},
    "run": {"seed", "runs"},
}


def _ints(text: str) -> tuple[int, ...]:
    text = text.strip()
    if "-" in text and "," not in text:
        lo, hi = (int(s) for s in text.split("-"))
        return tuple(range(lo, hi + 1))
    return tuple(int(s) for s in text.split(",") if s.strip())


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(s) for s in text.split(",") if s.strip())


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise DomainError(f"malformed config: {exc}") from exc
    for section in cp.sections():
        if section not in _SCHEMA:
            raise DomainError(f"unknown config section [{section}]")
        extra = set(cp[section]) - _SCHEMA[section]
        if extra:
            raise DomainError(f"unknown keys in [{section}]: {', '.join(sorted(extra))}")

    def get(section, key, conv, default):
        if cp.has_option(section, key):
            try:
                return conv(cp.get(section, key))
            except ValueError as exc:
                raise DomainError(f"bad value for {section}.{key}: {exc}") from exc
        return default

    base = ExperimentConfig()
    m = base.market
    drift = get("market", "drift", float, m.drift)
    market = MarketParams(
        s0=get("market", "s0", float, m.s0),
        strike=get("market", "strike", float, m.strike),
        rate=get("market", "rate", float, m.rate),
        vol=get("market", "vol", float, m.vol),
        maturity=get("market", "maturity", float, m.maturity),
        drift=drift,
    )
    bits_text = get("grid", "payoff_bits", str, None)
    payoff_bits = base.grid.payoff_bits
    if bits_text is not None:
        payoff_bits = None if bits_text.strip().lower() == "none" else int(bits_text)
    grid = GridConfig(
        qubits=get("grid", "qubits", int, base.grid.qubits),
        cutoff=get("grid", "cutoff", float, base.grid.cutoff),
        payoff_bits=payoff_bits,
    )
    seed = get("run", "seed", int, base.seed)
    qae = QaeConfig(
        phase_bits=get("qae", "phase_bits", int, base.qae.phase_bits),
        repetitions=get("qae", "repetitions", int, base.qae.repetitions),
        shots_per_bit=get("qae", "shots_per_bit", int, base.qae.shots_per_bit),
        seed=seed,
    )
    return ExperimentConfig(
        market=market,
        grid=grid,
        qae=qae,
        classical=ClassicalConfig(
            ks=get("classical", "ks", _ints, base.classical.ks),
            trials=get("classical", "trials", int, base.classical.trials),
        ),
        quantum=QuantumSweepConfig(
            bits=get("quantum", "bits", _ints, base.quantum.bits),
            trials=get("quantum", "trials", int, base.quantum.trials),
        ),
        strikes=get("sweep", "strikes", _floats, base.strikes),
        asian=AsianConfig(
            periods=get("asian", "periods", int, base.asian.periods),
            period_qubits=get("asian", "period_qubits", int, base.asian.period_qubits),
            kind=get("asian", "kind", str, base.asian.kind),
        ),
        fig1_paths=get("fig1", "paths", int, base.fig1_paths),
        fig1_steps=get("fig1", "steps", int, base.fig1_steps),
        seed=seed,
        runs=get("run", "runs", int, base.runs),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DomainError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
