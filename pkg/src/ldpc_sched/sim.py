"""Monte Carlo experiments: paired average-NMP comparisons and per-step trajectories."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .channel import ChannelSpec, channel_densities, sample_llr
from .de import TauConfig, TauEvaluator
from .decoder import ScheduleSequence, decode, decode_batch
from .density import GridSpec
from .graph import TannerGraph, load_code

Z95 = 1.959963984540054


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    code: str | None = None
    ebn0_db: float = 3.0
    rate: float | None = None  # None: design rate of the loaded code
    schedule: str = "row"  # schedule file, policy name, or "ssbp"
    mode: str = "serial"
    iterations: int = 5
    trials: int = 1000
    seed: int = 0
    out: str | None = None
    stop_check: str = "step"
    punctured: tuple[int, ...] = ()

    def validate(self) -> "ExperimentConfig":
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if self.mode not in ("serial", "flooding"):
            raise ConfigError(f"mode must be 'serial' or 'flooding', got {self.mode!r}")
        if self.stop_check not in ("step", "iteration"):
            raise ConfigError(f"stop_check must be 'step' or 'iteration', got {self.stop_check!r}")
        if self.code is not None and not Path(self.code).is_file():
            raise ConfigError(f"code file not found: {self.code}")
        if self.rate is not None and not 0 < self.rate < 1:
            raise ConfigError("rate must lie in (0, 1)")
        return self

    def load_graph(self) -> TannerGraph:
        if self.code is None:
            raise ConfigError("no code file given")
        return load_code(self.code, self.punctured)

    def channel(self, graph: TannerGraph) -> ChannelSpec:
        return ChannelSpec(self.ebn0_db, self.rate if self.rate is not None else design_rate(graph))

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        if "punctured" in d:
            d["punctured"] = tuple(int(i) for i in d["punctured"])
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a flat JSON object")
        return cls.from_dict(data)


def design_rate(graph: TannerGraph) -> float:
    """(N - M) / transmitted bits, assuming a full-rank parity-check matrix."""
    sent = graph.n_vars - len(graph.punctured)
    return (graph.n_vars - graph.n_checks) / sent


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def sample_trials(spec: ChannelSpec, graph: TannerGraph, seed: int, trials: int) -> np.ndarray:
    """One LLR row per trial, each drawn from its own derived stream."""
    out = np.empty((trials, graph.n_vars))
    for t in range(trials):
        out[t] = sample_llr(spec, graph, trial_rng(seed, t))
    return out


def _half_width(x: np.ndarray) -> float:
    if len(x) < 2:
        return float("nan")
    return float(Z95 * x.std(ddof=1) / math.sqrt(len(x)))


@dataclass
class ScheduleStats:
    name: str
    avg_nmp: float
    nmp_half_width: float
    ber: float
    ber_half_width: float
    bler: float
    bler_half_width: float
    trials: int
    reduction_ratio: float | None = None
    # paired NMP difference (this - baseline) and its 95% half-width
    diff_vs_baseline: float | None = None
    diff_half_width: float | None = None


@dataclass
class ExperimentReport:
    stats: list[ScheduleStats]
    baseline: str | None
    config: dict = field(default_factory=dict)
    # per-trial NMP counts, shared noise across schedules; not serialized
    per_trial_nmp: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def paired_difference(self, a: str, b: str) -> tuple[float, float]:
        """Mean per-trial NMP difference a - b and its 95% half-width."""
        d = self.per_trial_nmp[a].astype(float) - self.per_trial_nmp[b]
        return float(d.mean()), _half_width(d)

    def __getitem__(self, name: str) -> ScheduleStats:
        for s in self.stats:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_csv(self) -> str:
        lines = ["schedule_name,avg_nmp,reduction_ratio,ber,bler,trials"]
        for s in self.stats:
            rr = "" if s.reduction_ratio is None else f"{s.reduction_ratio:.12g}"
            lines.append(f"{s.name},{s.avg_nmp:.12g},{rr},{s.ber:.12g},{s.bler:.12g},{s.trials}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps({"baseline": self.baseline, "config": self.config,
                           "schedules": [asdict(s) for s in self.stats]}, indent=2)


def run_average_nmp(config: ExperimentConfig, schedules: dict[str, ScheduleSequence],
                    graph: TannerGraph | None = None, baseline: str | None = "row",
                    early_stop: bool = True) -> ExperimentReport:
    """Decode the same noise draws under every schedule and average the counters.

    ``baseline`` names the row-order entry used for reduction ratios; it is
    ignored when absent from ``schedules``.
    """
    config.validate()
    graph = graph if graph is not None else config.load_graph()
    if not schedules:
        raise ConfigError("no schedules to simulate")
    spec = config.channel(graph)
    llrs = sample_trials(spec, graph, config.seed, config.trials)
    sent = graph.n_vars - len(graph.punctured)
    raw = {}
    for name, sched in schedules.items():
        sched = sched.with_iterations(config.iterations)
        raw[name] = decode_batch(llrs, graph, sched, config.mode, config.stop_check, early_stop)
    base = raw.get(baseline) if baseline is not None else None
    stats = []
    for name, r in raw.items():
        nmp = r.nmp.astype(float)
        ber_t = r.bit_errors / sent
        blk = r.block_errors.astype(float)
        s = ScheduleStats(name, float(nmp.mean()), _half_width(nmp), float(ber_t.mean()),
                          _half_width(ber_t), float(blk.mean()), _half_width(blk), config.trials)
        if base is not None:
            bnmp = base.nmp.astype(float)
            s.reduction_ratio = 1.0 - nmp.mean() / bnmp.mean()
            d = nmp - bnmp
            s.diff_vs_baseline = float(d.mean())
            s.diff_half_width = _half_width(d)
        stats.append(s)
    return ExperimentReport(stats, baseline if base is not None else None, asdict(config),
                            {name: r.nmp for name, r in raw.items()})


@dataclass
class TrajectoryReport:
    # name -> rows (nmp, ber, bler), first row before decoding
    monte_carlo: dict[str, np.ndarray]
    # name -> rows (nmp, ae, gap) from scheduled density evolution
    density: dict[str, np.ndarray]

    def mc_csv(self) -> str:
        lines = ["schedule_name,nmp,ber,bler"]
        for name, rows in self.monte_carlo.items():
            lines += [f"{name},{int(r[0])},{r[1]:.12e},{r[2]:.12e}" for r in rows]
        return "\n".join(lines) + "\n"

    def de_csv(self) -> str:
        lines = ["schedule_name,nmp,ae,gap"]
        for name, rows in self.density.items():
            lines += [f"{name},{int(r[0])},{r[1]:.12e},{r[2]:.12e}" for r in rows]
        return "\n".join(lines) + "\n"


def run_trajectory(config: ExperimentConfig, schedules: dict[str, ScheduleSequence],
                   graph: TannerGraph | None = None, grid: GridSpec = GridSpec(),
                   with_density: bool = True) -> TrajectoryReport:
    """BER/BLER after every check step (all T iterations, no early stop) plus DE curves.

    Density curves are only produced for serial decoding.
    """
    config.validate()
    graph = graph if graph is not None else config.load_graph()
    spec = config.channel(graph)
    sent = graph.n_vars - len(graph.punctured)
    llrs = sample_trials(spec, graph, config.seed, config.trials)
    mc, de = {}, {}
    dens = None
    for name, sched in schedules.items():
        sched = sched.with_iterations(config.iterations)
        acc = None
        for llr in llrs:
            tr = decode(llr, graph, sched, config.mode, record_trajectory=True,
                        early_stop=False).trajectory
            if acc is None:
                acc = np.zeros(tr.shape)
                acc[:, 0] = tr[:, 0]
            acc[:, 1:] += tr[:, 1:]
        acc[:, 1] /= config.trials * sent
        acc[:, 2] /= config.trials
        mc[name] = acc
        if with_density and config.mode == "serial":
            if dens is None:
                dens = channel_densities(spec, graph, grid)
            ev = TauEvaluator(graph, dens, TauConfig(iterations=sched.iterations))
            de[name] = ev.curve(sched)
    return TrajectoryReport(mc, de)
