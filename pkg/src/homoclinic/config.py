"""Run configuration: an INI file with the sections documented in
configs/default.ini.  Every key has a default, so an empty file is valid."""

import configparser
from dataclasses import asdict, dataclass, field
import hashlib
import math
import os

from .errors import ConfigError
from .problem import CATALOG, DIFFUSIONS, NONLINEARITIES, WEIGHTS

OUTPUT_ENV = "HOMOCLINIC_OUTPUT_DIR"


@dataclass
class InstanceConfig:
    name: str = "quadratic"
    diffusion: str = ""
    weight: str = ""
    nonlinearity: str = ""
    q: float = 1.5
    p: float = 3.0
    theta: float = math.nan
    gamma: float = 0.5
    weight_scale: float = 1.0
    lam: float = math.nan
    lambda_fraction: float = 0.5


@dataclass
class DiscretizationConfig:
    n: float = 5.0
    M: int = 0
    M_per_unit: float = 8.0


@dataclass
class ContinuationConfig:
    k_cap: float = 1e12
    k_fallback: float = 1000.0
    n_schedule: tuple = (2.0, 4.0, 8.0, 16.0, 32.0)
    lambda_fractions: tuple = tuple(0.5 ** j for j in range(7))
    sweep_n: float = 5.0
    certificate_samples: int = 200
    seed: int = 0


@dataclass
class ToleranceConfig:
    newton: float = 1e-10
    k_drift: float = 1e-8
    strauss_uniform: float = 1e-6
    agreement: float = 1e-6
    tail: float = 1e-6
    bound_slack: float = 1e-8
    weak_residual: float = 1e-8


@dataclass
class ValidationConfig:
    grid_radius: float = 20.0
    grid_points: int = 10_000
    truncation_radius: float = 12.0


@dataclass
class StraussReportConfig:
    k_values: tuple = (10.0, 100.0, 1000.0, 10000.0)
    radius: float = 1.0
    samples: int = 10_001


@dataclass
class ProbeConfig:
    R: float = 1.0
    delta: float = 0.5
    factor: float = 10.0


@dataclass
class OutputConfig:
    directory: str = "runs"
    threads: int = 1


@dataclass
class RunConfig:
    instance: InstanceConfig = field(default_factory=InstanceConfig)
    discretization: DiscretizationConfig = field(
        default_factory=DiscretizationConfig)
    continuation: ContinuationConfig = field(default_factory=ContinuationConfig)
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    validation: ValidationConfig = field(default_factory=ValidationConfig)
    strauss_report: StraussReportConfig = field(
        default_factory=StraussReportConfig)
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    source_hash: str = ""

    def to_dict(self):
        d = asdict(self)
        d.pop("source_hash")
        return d


# key in the file -> attribute name, where they differ
_ALIASES = {("instance", "lambda"): "lam"}


def _parse_value(raw, default, where):
    try:
        if isinstance(default, tuple):
            items = [s.strip() for s in raw.split(",") if s.strip()]
            return tuple(float(s) for s in items)
        if isinstance(default, bool):
            return raw.strip().lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"config error: {where} = {raw!r} is not a valid "
                          f"{type(default).__name__}") from None
    return raw.strip()


def load_config(path=None, text=None):
    """Read a RunConfig from ``path`` (or from the string ``text``)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # keys are case sensitive (M, R)
    if path is not None:
        try:
            with open(path, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            raise ConfigError(f"config error: cannot read {path}: {exc}") from None
        text = raw.decode("utf-8")
    text = text or ""
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config error: {exc}") from None
    cfg = RunConfig(source_hash=hashlib.sha256(text.encode()).hexdigest())
    for section in parser.sections():
        target = getattr(cfg, section, None)
        if target is None or section == "source_hash":
            raise ConfigError(f"config error: unknown section [{section}]")
        for key, raw in parser.items(section):
            attr = _ALIASES.get((section, key), key)
            if not hasattr(target, attr):
                raise ConfigError(
                    f"config error: unknown key {key!r} in [{section}]")
            default = getattr(target, attr)
            setattr(target, attr, _parse_value(raw, default, f"{section}.{key}"))
    env = os.environ.get(OUTPUT_ENV)
    if env:
        cfg.output.directory = env
    validate_config(cfg)
    return cfg


def _increasing(seq):
    return len(seq) > 0 and all(b > a for a, b in zip(seq, seq[1:]))


def validate_config(cfg):
    inst = cfg.instance
    if inst.name not in CATALOG:
        raise ConfigError(f"config error: unknown instance {inst.name!r}")
    for attr, table in (("diffusion", DIFFUSIONS), ("weight", WEIGHTS),
                        ("nonlinearity", NONLINEARITIES)):
        value = getattr(inst, attr)
        if value and value not in table:
            raise ConfigError(f"config error: unknown {attr} {value!r}")
    if not math.isnan(inst.lam) and inst.lam < 0:
        raise ConfigError("config error: lambda must be nonnegative")
    if not inst.lambda_fraction >= 0:
        raise ConfigError("config error: lambda_fraction must be nonnegative")
    for name, value in asdict(cfg.tolerances).items():
        if not value > 0:
            raise ConfigError(f"config error: tolerance {name} must be > 0, "
                              f"got {value!r}")
    cont = cfg.continuation
    if not _increasing(list(cont.n_schedule)):
        raise ConfigError("config error: n_schedule must be nonempty and "
                          "increasing")
    if any(f < 0 for f in cont.lambda_fractions) or not cont.lambda_fractions:
        raise ConfigError("config error: lambda_fractions must be nonempty "
                          "and nonnegative")
    if not _increasing(list(cfg.strauss_report.k_values)) or min(
            cfg.strauss_report.k_values) < 1:
        raise ConfigError("config error: strauss k_values must be increasing "
                          "and >= 1")
    if cont.k_cap < 1 or cont.k_fallback < 1:
        raise ConfigError("config error: k_cap and k_fallback must be >= 1")
    if cfg.discretization.n <= 0 or cfg.discretization.M_per_unit <= 0:
        raise ConfigError("config error: n and M_per_unit must be positive")
    if cfg.discretization.M < 0:
        raise ConfigError("config error: M must be nonnegative (0 = auto)")
    if cfg.output.threads < 1:
        raise ConfigError("config error: threads must be >= 1")
    if cfg.probe.R <= 0 or not 0 < cfg.probe.delta < 1 or cfg.probe.factor <= 1:
        raise ConfigError("config error: probe needs R > 0, 0 < delta < 1 "
                          "and factor > 1")
    if cfg.validation.grid_points < 2 or cfg.validation.grid_radius <= 0:
        raise ConfigError("config error: validation grid must have >= 2 "
                          "points and positive radius")
    return cfg


def build_instance(cfg, lam=0.0):
    """ProblemInstance for the configured catalog entry at parameter ``lam``."""
    from .problem import catalog_instance

    ic = cfg.instance
    overrides = {"q": ic.q, "p": ic.p, "gamma": ic.gamma,
                 "weight_scale": ic.weight_scale, "lam": lam}
    if not math.isnan(ic.theta):
        overrides["theta"] = ic.theta
    for attr in ("diffusion", "weight", "nonlinearity"):
        if getattr(ic, attr):
            overrides[attr] = getattr(ic, attr)
    return catalog_instance(ic.name, **overrides)
