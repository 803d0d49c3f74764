"""Run configuration: INI-style ``key = value`` files with sections, plus overrides.

Recognized sections and keys (all optional unless a command needs them)::

    [model]     chain = N | matrix = PATH
    [protocol]  r, alpha, tau, a, b
    [initial]   kind = vacuum|filled|ground_half|domain_wall|random, wall_site
    [run]       steps, stride, checkpoint_stride, kernel = site|energy, seed
    [steady]    method = direct|fixed_point, tol, max_iter, allow_large
    [lindblad]  gamma_a, gamma_b, dt, steps, order_check
    [oracle]    steps
    [sweep]     r, alpha, tau, a, b   (comma-separated value lists)
"""

import configparser
from dataclasses import dataclass, field, fields

from .errors import ConfigError

SECTIONS = ("model", "protocol", "initial", "run", "steady", "lindblad", "oracle", "sweep")


@dataclass
class RunConfig:
    chain: object = None
    matrix: object = None
    r: float = 0.01
    alpha: float = 0.7
    tau: float = 0.1
    a: int = 1
    b: object = None
    initial: str = "vacuum"
    wall_site: object = None
    steps: int = 0
    stride: int = 1
    checkpoint_stride: object = None
    kernel: str = "site"
    seed: int = 0
    method: str = "direct"
    tol: float = 1e-12
    max_iter: int = 1_000_000
    allow_large: bool = False
    gamma_a: float = 1e-3
    gamma_b: float = 1e-3
    dt: float = 0.05
    lindblad_steps: int = 0
    order_check: bool = False
    oracle_steps: int = 50
    sweep: dict = field(default_factory=dict)

    def validate(self):
        if (self.chain is None) == (self.matrix is None):
            raise ConfigError("exactly one of model.chain and model.matrix must be given")
        if self.stride < 1:
            raise ConfigError("stride must be >= 1")
        if self.checkpoint_stride is not None and self.checkpoint_stride < 1:
            raise ConfigError("checkpoint_stride must be >= 1")
        if self.steps < 0 or self.lindblad_steps < 0 or self.oracle_steps < 0:
            raise ConfigError("step counts must be >= 0")
        if self.kernel not in ("site", "energy"):
            raise ConfigError(f"unknown kernel {self.kernel!r}")
        if self.method not in ("direct", "fixed_point"):
            raise ConfigError(f"unknown steady method {self.method!r}")
        return self


# (section, key) -> (RunConfig attribute, parser)
def _int_or_none(s):
    return None if s.strip().lower() in ("", "none") else int(s)


def _bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _list(conv):
    return lambda s: [conv(x) for x in s.replace(",", " ").split()]


KEYS = {
    ("model", "chain"): ("chain", int),
    ("model", "matrix"): ("matrix", str),
    ("protocol", "r"): ("r", float),
    ("protocol", "alpha"): ("alpha", float),
    ("protocol", "tau"): ("tau", float),
    ("protocol", "a"): ("a", int),
    ("protocol", "b"): ("b", int),
    ("initial", "kind"): ("initial", str),
    ("initial", "wall_site"): ("wall_site", _int_or_none),
    ("run", "steps"): ("steps", int),
    ("run", "stride"): ("stride", int),
    ("run", "checkpoint_stride"): ("checkpoint_stride", _int_or_none),
    ("run", "kernel"): ("kernel", str),
    ("run", "seed"): ("seed", int),
    ("steady", "method"): ("method", str),
    ("steady", "tol"): ("tol", float),
    ("steady", "max_iter"): ("max_iter", int),
    ("steady", "allow_large"): ("allow_large", _bool),
    ("lindblad", "gamma_a"): ("gamma_a", float),
    ("lindblad", "gamma_b"): ("gamma_b", float),
    ("lindblad", "dt"): ("dt", float),
    ("lindblad", "steps"): ("lindblad_steps", int),
    ("lindblad", "order_check"): ("order_check", _bool),
    ("oracle", "steps"): ("oracle_steps", int),
}

SWEEP_KEYS = {"r": float, "alpha": float, "tau": float, "a": int, "b": int}


def _assign(cfg, section, key, value):
    if section == "sweep":
        if key not in SWEEP_KEYS:
            raise ConfigError(f"unknown sweep key {key!r}")
        try:
            cfg.sweep[key] = _list(SWEEP_KEYS[key])(value)
        except ValueError as exc:
            raise ConfigError(f"sweep.{key}: {exc}") from None
        return
    try:
        attr, conv = KEYS[(section, key)]
    except KeyError:
        raise ConfigError(f"unknown configuration key {section}.{key}") from None
    try:
        setattr(cfg, attr, conv(value))
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: {exc}") from None


def load_config(path=None, overrides=()):
    """Build a :class:`RunConfig` from an optional file and ``section.key=value`` overrides.

    Overrides are applied after the file, so they win. Validation of the
    combined result is left to :meth:`RunConfig.validate`.
    """
    cfg = RunConfig()
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        for section in parser.sections():
            if section not in SECTIONS:
                raise ConfigError(f"{path}: unknown section [{section}]")
            for key, value in parser.items(section):
                _assign(cfg, section, key, value)
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        lhs, value = item.split("=", 1)
        section, key = lhs.strip().split(".", 1)
        _assign(cfg, section.strip(), key.strip(), value.strip())
    return cfg


def config_dict(cfg):
    return {f.name: getattr(cfg, f.name) for f in fields(cfg)}
