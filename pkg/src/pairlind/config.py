"""INI-style configuration for sweeps and single-point runs.

Sections and keys (frequencies are cyclic, Hz)::

    [model]
    omega_c_hz = 27.5e6
    delta_q_hz = 3e9
    g_hz = 18e6
    gamma0_hz = 0.5e6
    kappa_hz = 2e3          ; or give a [bath] section instead
    chi_bar_hz = 0          ; optional, default 0
    n_bar = 2               ; single-point commands
    delta_omega_hz = 50e6   ; single-point commands
    omega_r_hz = 55e6       ; optional override of the resonance solve

    [bath]                  ; optional, replaces kappa_hz / chi_bar_hz
    nu_hz = 55e6
    chi_tilde_hz = 1e3
    chi_hz = 1e6

    [sweep]
    j = 0.25                ; 0.25, 0.75 or both
    delta_omega_min_hz = -55e6
    delta_omega_max_hz = 55e6
    points = 401
    n_bar_list = 1, 2, 4
    mode = analytic         ; analytic, reduced-numeric, full-numeric

    [tolerances]
    tail = 1e-10
    residual = 1e-10
    much_less = 10
    resonance_rel = 1e-12

    [outputs]
    csv_path = sweep.csv
    svg_path = sweep.svg
    svg_y = n_mean
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace

from .algebra import check_j
from .errors import InvalidArgument
from .model import BathParams, ModelParams, TWO_PI, bath_rates

MODES = ("analytic", "reduced-numeric", "full-numeric")

# reference device values, Hz
REFERENCE_HZ = {
    "omega_c": 27.5e6,
    "delta_q": 3e9,
    "g": 18e6,
    "gamma0": 0.5e6,
    "kappa": 2e3,
}


class ConfigError(InvalidArgument):
    pass


@dataclass(frozen=True)
class Tolerances:
    tail: float = 1e-10
    residual: float = 1e-10
    much_less: float = 10.0
    resonance_rel: float = 1e-12


@dataclass(frozen=True)
class SweepConfig:
    """Everything a sweep needs.  Frequencies in ``model_hz`` are cyclic."""

    model_hz: dict = field(default_factory=lambda: dict(REFERENCE_HZ))
    chi_bar_hz: float = 0.0
    omega_r_hz: float | None = None
    js: tuple = (0.25,)
    delta_omega_min_hz: float | None = None
    delta_omega_max_hz: float | None = None
    points: int = 401
    n_bar_list: tuple = (2.0,)
    mode: str = "analytic"
    tolerances: Tolerances = field(default_factory=Tolerances)
    csv_path: str | None = None
    svg_path: str | None = None
    svg_y: str = "n_mean"
    # single-point values
    n_bar: float = 0.0
    delta_omega_hz: float | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        object.__setattr__(self, "js", tuple(check_j(j) for j in self.js))
        if self.points < 2:
            raise ConfigError("[sweep] points must be >= 2")
        lo, hi = self.grid_bounds()
        if not lo < hi:
            raise ConfigError("[sweep] delta_omega_min_hz must be < delta_omega_max_hz")
        if any(n < 0 for n in self.n_bar_list):
            raise ConfigError("[sweep] n_bar_list entries must be >= 0")

    def grid_bounds(self):
        """Defaults to +-Omega_R (explicit override or the bare 2 omega_c)."""
        span = self.omega_r_hz if self.omega_r_hz is not None else 2.0 * self.model_hz["omega_c"]
        lo = -span if self.delta_omega_min_hz is None else self.delta_omega_min_hz
        hi = span if self.delta_omega_max_hz is None else self.delta_omega_max_hz
        return lo, hi

    def params(self, n_bar: float, delta_omega_hz: float) -> ModelParams:
        return ModelParams.from_hz(
            **self.model_hz,
            n_bar=n_bar,
            chi_bar=self.chi_bar_hz,
            delta_omega=delta_omega_hz,
            omega_r=self.omega_r_hz,
        )

    def with_overrides(self, **kw) -> "SweepConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def parse_j(text: str) -> tuple:
    text = text.strip().lower()
    if text == "both":
        return (0.25, 0.75)
    try:
        return (check_j(text),)
    except InvalidArgument as exc:
        raise ConfigError(f"j: {exc}") from None


def _float(section, key, raw):
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} as a number") from None
    if math.isnan(value):
        raise ConfigError(f"[{section}] {key}: NaN not allowed")
    return value


_KNOWN = {
    "model": {"omega_c_hz", "delta_q_hz", "g_hz", "gamma0_hz", "kappa_hz", "chi_bar_hz",
              "n_bar", "delta_omega_hz", "omega_r_hz"},
    "bath": {"nu_hz", "chi_tilde_hz", "chi_hz"},
    "sweep": {"j", "delta_omega_min_hz", "delta_omega_max_hz", "points", "n_bar_list", "mode"},
    "tolerances": {"tail", "residual", "much_less", "resonance_rel"},
    "outputs": {"csv_path", "svg_path", "svg_y"},
}


def parse_config(text: str, source: str = "<config>") -> SweepConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None

    for section in cp.sections():
        if section not in _KNOWN:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key in cp[section]:
            if key not in _KNOWN[section]:
                raise ConfigError(f"{source}: unknown key [{section}] {key}")

    if "model" not in cp:
        raise ConfigError(f"{source}: missing [model] section")
    m = cp["model"]
    model_hz = {}
    for key in ("omega_c", "delta_q", "g", "gamma0"):
        if f"{key}_hz" not in m:
            raise ConfigError(f"{source}: [model] {key}_hz is required")
        model_hz[key] = _float("model", f"{key}_hz", m[f"{key}_hz"])

    chi_bar = _float("model", "chi_bar_hz", m["chi_bar_hz"]) if "chi_bar_hz" in m else 0.0
    if "bath" in cp:
        if "kappa_hz" in m or "chi_bar_hz" in m:
            raise ConfigError(f"{source}: give either [bath] or [model] kappa_hz/chi_bar_hz, not both")
        b = cp["bath"]
        try:
            bath = BathParams.from_hz(*(_float("bath", k, b[k]) for k in ("nu_hz", "chi_tilde_hz", "chi_hz")))
        except KeyError as exc:
            raise ConfigError(f"{source}: [bath] missing key {exc}") from None
        except InvalidArgument as exc:
            raise ConfigError(f"{source}: [bath] {exc}") from None
        kappa, chi_bar_ang = bath_rates(bath, TWO_PI * model_hz["omega_c"])
        model_hz["kappa"] = kappa / TWO_PI
        chi_bar = chi_bar_ang / TWO_PI
    elif "kappa_hz" in m:
        model_hz["kappa"] = _float("model", "kappa_hz", m["kappa_hz"])
    else:
        raise ConfigError(f"{source}: [model] kappa_hz (or a [bath] section) is required")

    kw = dict(model_hz=model_hz, chi_bar_hz=chi_bar)
    if "omega_r_hz" in m:
        kw["omega_r_hz"] = _float("model", "omega_r_hz", m["omega_r_hz"])
    if "n_bar" in m:
        kw["n_bar"] = _float("model", "n_bar", m["n_bar"])
    if "delta_omega_hz" in m:
        kw["delta_omega_hz"] = _float("model", "delta_omega_hz", m["delta_omega_hz"])

    if "sweep" in cp:
        s = cp["sweep"]
        if "j" in s:
            kw["js"] = parse_j(s["j"])
        for key in ("delta_omega_min_hz", "delta_omega_max_hz"):
            if key in s:
                kw[key] = _float("sweep", key, s[key])
        if "points" in s:
            try:
                kw["points"] = int(s["points"])
            except ValueError:
                raise ConfigError(f"{source}: [sweep] points: {s['points']!r} is not an integer") from None
        if "n_bar_list" in s:
            kw["n_bar_list"] = tuple(
                _float("sweep", "n_bar_list", v) for v in s["n_bar_list"].split(",") if v.strip()
            )
        if "mode" in s:
            kw["mode"] = s["mode"].strip()

    if "tolerances" in cp:
        t = cp["tolerances"]
        kw["tolerances"] = Tolerances(**{k: _float("tolerances", k, t[k]) for k in t})

    if "outputs" in cp:
        o = cp["outputs"]
        for key in ("csv_path", "svg_path", "svg_y"):
            if key in o:
                kw[key] = o[key].strip()

    try:
        return SweepConfig(**kw)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    except InvalidArgument as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path) -> SweepConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, source=str(path))
