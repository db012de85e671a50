"""Experiment configuration: dataclass, YAML loading and validation.

Keys that correspond to the LTE-like parameter table keep its names
(``N_r``, ``N_t``, ``R_c``, ``T_ts``, ``M_spts``, ``M_RB``, ``M_f``, ``B``).
"""

import dataclasses
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import yaml

from .errors import ConfigError
from .modem import DEFAULT_ENUMERATION_CAP
from .throughput import LteParams

LS_SYSTEM = "LS_MIMO_uncoded_ZF"
BENCHMARK_SYSTEM = "small_MIMO_coded_ML"
SYSTEMS = (LS_SYSTEM, BENCHMARK_SYSTEM)


class ConfigWarning(UserWarning):
    pass


@dataclass
class SystemConfig:
    system: str = LS_SYSTEM
    N_r: int = 40
    N_t: int = 4
    M: int = 4  # QAM order
    R_c: Fraction = Fraction(1)
    code_mode: str = "feedforward"
    decoder_input: str = "soft"
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP

    snr_db: list[float] = field(default_factory=lambda: [-6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0, 8.0, 10.0])
    min_trials: int = 0  # channel uses per SNR point before the error-count rule may stop
    max_trials: int = 1_000_000
    target_errors: int = 200
    batch_uses: int = 2000  # channel uses per uncoded Monte Carlo batch
    block_bits: int = 1000  # information bits per user per coded block
    seed: int = 0
    workers: int = 1

    # packetized video transport
    max_payload_bits: int = 12000
    repetitions: int = 2000
    video_path: str | None = None
    width: int = 416
    height: int = 240
    frames: int = 30
    frame_rate: float = 30.0
    bitrate_bps: float = 600_000.0
    intra_ratio: float = 4.0  # I-picture size relative to an inter picture
    size_jitter: float = 0.0055  # relative spread of picture sizes; calibrated to about 30 padding bits per packet
    reference: str = "hierarchical"
    gop: int = 8
    intra_period: int = 32
    dpb_capacity: int = 4
    psnr_cap_db: float = 100.0

    # LTE-like slot structure
    T_ts: float = 0.5e-3
    M_spts: int = 7
    M_RB: int = 100
    M_f: int = 12
    B: float = 20e6

    output: str | None = None

    @property
    def coded(self) -> bool:
        return self.R_c != 1

    @property
    def detector(self) -> str:
        return "ZF" if self.system == LS_SYSTEM else "ML"

    @property
    def bits_per_symbol(self) -> int:
        return self.M.bit_length() - 1

    def lte(self) -> LteParams:
        return LteParams(M_b=self.bits_per_symbol, N_t=self.N_t, N_r=self.N_r, T_ts=self.T_ts,
                         M_spts=self.M_spts, B=self.B, M_RB=self.M_RB, M_f=self.M_f, R_c=self.R_c)

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["R_c"] = str(self.R_c)
        return out


def benchmark_config(**overrides) -> SystemConfig:
    """The 4x4 ML detector with the rate-1/3 convolutional code."""
    base = dict(system=BENCHMARK_SYSTEM, N_r=4, N_t=4, R_c=Fraction(1, 3))
    base.update(overrides)
    return SystemConfig(**base)


def ls_config(**overrides) -> SystemConfig:
    base = dict(system=LS_SYSTEM, N_r=40, N_t=4, R_c=Fraction(1))
    base.update(overrides)
    return SystemConfig(**base)


def parse_rate(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    return Fraction(str(value).strip()).limit_denominator(1000)


_FIELDS = {f.name: f for f in dataclasses.fields(SystemConfig)}


def check(cfg: SystemConfig) -> tuple[list[str], list[str]]:
    """Return (errors, warnings) for a fully built configuration."""
    errors, warns = [], []

    def need(ok, key, constraint):
        if not ok:
            errors.append(f"{key}: {constraint}")

    need(cfg.system in SYSTEMS, "system", f"must be one of {', '.join(SYSTEMS)}")
    need(cfg.N_t >= 1, "N_t", "must be >= 1")
    need(cfg.N_r >= cfg.N_t, "N_r", "must be >= N_t")
    m_ok = cfg.M >= 4 and cfg.M & (cfg.M - 1) == 0 and cfg.bits_per_symbol % 2 == 0
    need(m_ok, "M", "QAM order must be a power of 4")
    need(0 < cfg.R_c <= 1, "R_c", "must lie in (0, 1]")
    if cfg.system == BENCHMARK_SYSTEM:
        need(cfg.R_c == Fraction(1, 3), "R_c", "R_c must be 1/3 for benchmark")
        if (cfg.N_r, cfg.N_t) != (4, 4):
            warns.append("N_r, N_t: benchmark is defined as a 4x4 system")
        if m_ok and cfg.N_t >= 1:
            need(cfg.M**cfg.N_t <= cfg.enumeration_cap, "enumeration_cap", f"must be >= M**N_t = {cfg.M**cfg.N_t}")
    elif cfg.system == LS_SYSTEM:
        need(cfg.R_c == 1, "R_c", "R_c must be 1 for the uncoded LS-MIMO system")
        if cfg.N_r < 4 * cfg.N_t:
            warns.append(f"N_r: N_r >> N_t violated (N_r={cfg.N_r} < 4*N_t={4 * cfg.N_t})")
    need(cfg.code_mode in ("feedforward", "rsc"), "code_mode", "must be feedforward or rsc")
    need(cfg.decoder_input in ("soft", "hard"), "decoder_input", "must be soft or hard")
    need(len(cfg.snr_db) > 0, "snr_db", "must be a non-empty list")
    need(cfg.max_trials >= 1, "max_trials", "must be >= 1")
    need(cfg.min_trials >= 0, "min_trials", "must be >= 0")
    need(cfg.target_errors >= 1, "target_errors", "must be >= 1")
    need(cfg.batch_uses >= 1, "batch_uses", "must be >= 1")
    need(cfg.block_bits >= 1, "block_bits", "must be >= 1")
    need(cfg.workers >= 1, "workers", "must be >= 1")
    need(0 <= cfg.seed < 2**64, "seed", "must be an unsigned 64-bit integer")
    need(cfg.max_payload_bits >= 1, "max_payload_bits", "must be >= 1")
    need(cfg.repetitions >= 1, "repetitions", "must be >= 1")
    need(cfg.width >= 2 and cfg.height >= 2 and cfg.frames >= 1, "width/height/frames", "must be positive")
    need(cfg.bitrate_bps > 0 and cfg.frame_rate > 0, "bitrate_bps/frame_rate", "must be positive")
    need(cfg.intra_ratio >= 1, "intra_ratio", "must be >= 1")
    need(0 <= cfg.size_jitter < 1, "size_jitter", "must lie in [0, 1)")
    need(cfg.reference in ("hierarchical", "low_delay"), "reference", "must be hierarchical or low_delay")
    need(cfg.gop >= 1 and cfg.dpb_capacity >= 1 and cfg.intra_period >= 0, "gop/dpb_capacity/intra_period",
         "gop and dpb_capacity must be >= 1, intra_period >= 0")
    for key in ("T_ts", "M_spts", "M_RB", "M_f", "B", "psnr_cap_db"):
        need(getattr(cfg, key) > 0, key, "must be positive")
    return errors, warns


def from_mapping(data: dict | None) -> tuple[SystemConfig, list[str]]:
    """Build and validate a config; missing keys take their defaults."""
    data = dict(data or {})
    errors = [f"{k}: unknown key" for k in data if k not in _FIELDS]
    kwargs = {}
    system = data.get("system", LS_SYSTEM)
    defaults = benchmark_config() if system == BENCHMARK_SYSTEM else SystemConfig()
    for name, f in _FIELDS.items():
        if name not in data:
            kwargs[name] = getattr(defaults, name)
            continue
        value = data[name]
        try:
            if name == "R_c":
                value = parse_rate(value)
            elif name == "snr_db":
                value = [float(v) for v in (value if isinstance(value, list) else [value])]
            elif name in ("video_path", "output", "system", "code_mode", "decoder_input", "reference"):
                value = None if value is None else str(value)
            elif isinstance(f.default, bool):
                value = bool(value)
            elif isinstance(f.default, int):
                if isinstance(value, float) and not value.is_integer():
                    raise ValueError("not an integer")
                value = int(value)
            elif isinstance(f.default, float):
                value = float(value)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            errors.append(f"{name}: cannot parse {value!r} ({exc})")
            continue
        kwargs[name] = value
    if errors:
        raise ConfigError(errors)
    cfg = SystemConfig(**kwargs)
    errs, warns = check(cfg)
    if errs:
        raise ConfigError(errs)
    return cfg, warns


def validate_config(path) -> tuple[SystemConfig, list[str]]:
    """Load a YAML key-value file, fill defaults and check every field.

    Raises :class:`ConfigError` listing every violation; warnings (such as
    an LS-MIMO array that is not much larger than the user count) are
    returned alongside the config and also issued as ``ConfigWarning``.
    """
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config: not valid YAML: {exc}") from exc
    if data is not None and not isinstance(data, dict):
        raise ConfigError("config: top level must be a key-value mapping")
    cfg, warns = from_mapping(data)
    for w in warns:
        warnings.warn(w, ConfigWarning, stacklevel=2)
    return cfg, warns
