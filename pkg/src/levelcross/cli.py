"""Command-line front end: ``levelcross <subcommand> [--config FILE] [--key value ...]``.

Configuration is a flat ``key = value`` file; flags with the same names
override it.  Each run writes its artifacts plus ``manifest.txt`` (the fully
resolved configuration followed by sha256 checksums as comments), so a
manifest can be fed back with ``--config`` to reproduce a run.

Exit status: 0 on success, 2 for configuration errors, 3 for numerical or
domain failures.  Output files are staged in a temporary directory and
only moved into place once the whole run has succeeded.
"""

from __future__ import annotations

import argparse
import math
import os
import shutil
import sys
import tempfile
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import io
from .billiards import DEFAULT_GAMMA, DomainError, get_model
from .crossings import CrossingWindow, enumerate_crossings
from .harness import (HistogramSpec, bin_crossings, compare_to_smooth, detect_peaks, ks_one_sample,
                      linear_slope_fit)
from .osc import OscWindow, TruncationSpec, cyl_integrated_osc1_curve, cyl_integrated_osc2, osc_grid
from .smooth import cyl_distribution, cyl_gv, rect_distribution, rect_gv
from .spectrum import SpectrumWindow, level_table

SUBCOMMANDS = ("levels", "crossings", "smooth", "gv", "osc-grid", "flux-integrated", "compare")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""

    def __init__(self, key, msg):
        super().__init__(f"{key}: {msg}")
        self.key = key


def _bool(s):
    if isinstance(s, bool):
        return s
    t = str(s).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


@dataclass
class RunConfig:
    """Flat run configuration.  ``None`` means "model-dependent default"."""

    model: str = "rect"
    eps_min: float | None = None
    eps_max: float = 100.0
    mu_min: float | None = None
    mu_max: float | None = None
    mu: float | None = None
    gamma: float = DEFAULT_GAMMA
    m_max: int = 150
    m2_max: int = 500
    bins: int = 0
    n_eps: int = 512
    n_mu: int = 512
    samples: int = 201
    sub: int = 64
    closed: bool = False
    level_cutoff: str = "crossing"
    workers: int = 1
    out: str = "out"
    seed: int = 0

    def resolve(self) -> "RunConfig":
        """Validate and fill model-dependent defaults."""
        if self.model not in ("rect", "cylinder"):
            raise ConfigError("model", "must be 'rect' or 'cylinder'")
        lo, hi = (1.0, 2.0) if self.model == "rect" else (0.0, 1.0)
        if self.mu_min is None:
            self.mu_min = lo
        if self.mu_max is None:
            self.mu_max = hi
        if self.mu is None:
            self.mu = self.mu_min
        if self.eps_min is None:
            self.eps_min = 0.0
        for k in ("eps_min", "eps_max", "mu_min", "mu_max", "mu", "gamma"):
            if not math.isfinite(getattr(self, k)):
                raise ConfigError(k, "must be finite")
        if self.eps_max < 0:
            raise ConfigError("eps_max", "must be >= 0")
        if not 0 <= self.eps_min <= self.eps_max:
            raise ConfigError("eps_min", "must lie in [0, eps_max]")
        if self.model == "rect":
            if self.mu_min <= 0:
                raise ConfigError("mu_min", "rectangle shape parameter must be positive")
            if self.mu <= 0:
                raise ConfigError("mu", "rectangle shape parameter must be positive")
        if not self.mu_max > self.mu_min:
            raise ConfigError("mu_max", "must exceed mu_min")
        if not self.gamma > 0:
            raise ConfigError("gamma", "must be positive")
        for k in ("m_max", "m2_max", "bins"):
            if getattr(self, k) < 0:
                raise ConfigError(k, "must be >= 0")
        for k in ("n_eps", "n_mu", "samples", "sub", "workers"):
            if getattr(self, k) < 1:
                raise ConfigError(k, "must be >= 1")
        if self.level_cutoff not in ("crossing", "window"):
            raise ConfigError("level_cutoff", "must be 'crossing' or 'window'")
        return self

    def echo(self) -> list[str]:
        return [f"{f.name} = {_echo_value(getattr(self, f.name))}" for f in fields(self)]


def _echo_value(v):
    if isinstance(v, float):
        return repr(v)
    return str(v).lower() if isinstance(v, bool) else str(v)


_CASTS = {"model": str, "out": str, "level_cutoff": str, "closed": _bool,
          "m_max": int, "m2_max": int, "bins": int, "n_eps": int, "n_mu": int, "samples": int,
          "sub": int, "workers": int, "seed": int}
_KEYS = [f.name for f in fields(RunConfig)]


def _cast(key, raw):
    try:
        return _CASTS.get(key, float)(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(key, f"cannot parse {raw!r}: {exc}") from None


def parse_config_text(text: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(key, "unknown configuration key")
        out[key] = _cast(key, val)
    return out


def build_config(file_values: dict, flag_values: dict) -> RunConfig:
    merged = dict(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    return RunConfig(**merged).resolve()


# ---------------------------------------------------------------------------
# subcommands; each returns a dict of artifact name -> writer(path)
# ---------------------------------------------------------------------------

def _crossings(cfg):
    model = get_model(cfg.model, cfg.gamma)
    win = CrossingWindow(model, cfg.eps_max, cfg.mu_min, cfg.mu_max, cfg.closed, cfg.level_cutoff)
    return enumerate_crossings(win, cfg.workers)


def _summary_writer(items):
    def write(path):
        with open(path, "w", newline="\n") as fh:
            for k, v in items:
                fh.write(f"{k} = {io.fmt(v)}\n")
    return write


def _smooth_density(cfg, eps):
    """Predicted crossings per unit energy over the configured parameter range."""
    eps = np.asarray(eps, dtype=float)
    if cfg.model == "rect":
        return 0.25 * eps * math.log(cfg.mu_max / cfg.mu_min)
    return 2.0 * np.sqrt(eps / cfg.gamma) * (cfg.mu_max - cfg.mu_min)


def cmd_levels(cfg):
    model = get_model(cfg.model, cfg.gamma)
    n1, n2, e = level_table(SpectrumWindow(model, cfg.eps_max, cfg.mu))
    return {"levels.csv": lambda p: io.write_levels(p, n1, n2, e)}


def cmd_crossings(cfg):
    cs = _crossings(cfg)
    summary = [("n_crossings", len(cs))]
    if cfg.model == "cylinder":
        summary += [("n_plus", cs.n_plus), ("n_minus", cs.n_minus)]
    return {"crossings.csv": lambda p: io.write_crossings(p, cs), "summary.txt": _summary_writer(summary)}


def cmd_smooth(cfg):
    eps = np.linspace(0.0, cfg.eps_max, cfg.samples)
    dens = _smooth_density(cfg, eps)
    return {"smooth.csv": lambda p: io.write_table(p, ("eps", "density"), (eps, dens))}


def cmd_gv(cfg):
    cs = _crossings(cfg)
    dist = rect_distribution() if cfg.model == "rect" else cyl_distribution()
    top = dist.support
    v = np.linspace(0.0, top, cfg.samples)
    files = {}
    if cfg.model == "rect":
        g = np.array([rect_gv(x) for x in v])
        files["gv.csv"] = lambda p: io.write_table(p, ("v", "g"), (v, g))
    else:
        parts = np.array([cyl_gv(x) for x in v])
        files["gv.csv"] = lambda p: io.write_table(p, ("v", "g"), (v, parts[:, 0]))
        files["gv_components.csv"] = lambda p: io.write_table(p, ("v", "g_plus", "g_minus"),
                                                              (v, parts[:, 1], parts[:, 2]))
    bins = cfg.bins or 50
    hist = bin_crossings(cs, HistogramSpec(0.0, top, bins, "v", "probability"))
    # expected counts per bin from the tabulated CDF
    expected = np.diff(dist.cdf(hist.edges)) * max(len(cs), 1)
    report = compare_to_smooth(hist, expected)
    ks = ks_one_sample(cs.v, dist.cdf) if len(cs) else float("nan")
    summary = [("n_c", len(cs))]
    if cfg.model == "cylinder":
        summary += [("n_plus", cs.n_plus), ("n_minus", cs.n_minus),
                    ("fraction_plus", cs.n_plus / max(len(cs), 1)),
                    ("fraction_minus", cs.n_minus / max(len(cs), 1))]
    summary += [("ks", ks), ("chi2", report.chi2), ("dof", report.dof)]
    files["gv_hist.csv"] = lambda p: io.write_comparison(p, report)
    files["summary.txt"] = _summary_writer(summary)
    return files


def cmd_osc_grid(cfg):
    model = get_model(cfg.model, cfg.gamma)
    lo = cfg.eps_min if cfg.eps_min > 0 else None
    if lo is None:
        raise ConfigError("eps_min", "osc-grid needs eps_min > 0")
    win = OscWindow(lo, cfg.eps_max, cfg.mu_min, cfg.mu_max)
    trunc = TruncationSpec(max(cfg.m_max, 1), cfg.n_eps, cfg.n_mu)
    e, m, vals = osc_grid(model, win, trunc, cfg.workers)
    return {"osc_grid.dat": lambda p: io.write_grid(p, e, m, vals)}


def _energy_hist(cfg, cs, default_bins):
    lo = cfg.eps_min
    bins = cfg.bins or default_bins
    span = cfg.mu_max - cfg.mu_min
    return bin_crossings(cs, HistogramSpec(lo, cfg.eps_max, bins, "energy", "per_eps", span))


def cmd_flux_integrated(cfg):
    if cfg.model != "cylinder":
        raise ConfigError("model", "flux-integrated is defined for the cylinder")
    if cfg.eps_max <= cfg.eps_min:
        raise ConfigError("eps_max", "must exceed eps_min")
    cs = _crossings(cfg)
    # default: unit-width energy bins
    hist = _energy_hist(cfg, cs, max(1, int(round(cfg.eps_max - cfg.eps_min))))
    edges = hist.edges
    width = np.diff(edges)
    x = edges[:-1, None] + width[:, None] * (np.arange(cfg.sub) + 0.5)[None, :] / cfg.sub
    x = np.maximum(x, 1e-12)
    span = cfg.mu_max - cfg.mu_min
    smooth = (2.0 * np.sqrt(x / cfg.gamma)).mean(axis=1) * span
    osc1 = cyl_integrated_osc1_curve(x, cfg.gamma, cfg.m2_max).mean(axis=1) * span
    centres = hist.centers
    osc2 = np.array([cyl_integrated_osc2(max(c, 1e-12), cfg.gamma, cfg.m_max) for c in centres]) * span
    peaks_pred = detect_peaks(smooth + osc1)
    peaks_exact = detect_peaks(hist.density)
    files = {
        "flux_integrated.csv": lambda p: io.write_table(
            p, ("bin_left", "bin_right", "exact", "smooth", "smooth_osc1", "smooth_osc1_osc2"),
            (edges[:-1], edges[1:], hist.density, smooth, smooth + osc1, smooth + osc1 + osc2)),
        "peaks.csv": lambda p: io.write_table(
            p, ("source", "bin_left"),
            (["prediction"] * len(peaks_pred) + ["exact"] * len(peaks_exact),
             np.concatenate([edges[peaks_pred], edges[peaks_exact]]))),
    }
    return files


def cmd_compare(cfg):
    cs = _crossings(cfg)
    if cfg.eps_max <= cfg.eps_min:
        raise ConfigError("eps_max", "must exceed eps_min")
    hist = _energy_hist(cfg, cs, 100)
    report = compare_to_smooth(hist, lambda e: _smooth_density(cfg, e))
    slope, icpt = linear_slope_fit(hist.centers, hist.density)
    summary = [("n_crossings", len(cs)), ("chi2", report.chi2), ("dof", report.dof),
               ("chi2_per_dof", report.chi2_per_dof), ("fit_slope", slope), ("fit_intercept", icpt)]
    if cfg.model == "rect":
        summary.append(("predicted_slope", 0.25 * math.log(cfg.mu_max / cfg.mu_min)))
    return {"comparison.csv": lambda p: io.write_comparison(p, report), "summary.txt": _summary_writer(summary)}


COMMANDS = {"levels": cmd_levels, "crossings": cmd_crossings, "smooth": cmd_smooth, "gv": cmd_gv,
            "osc-grid": cmd_osc_grid, "flux-integrated": cmd_flux_integrated, "compare": cmd_compare}


def write_outputs(subcommand, cfg, writers) -> Path:
    """Stage every artifact plus the manifest, then move them into ``cfg.out``."""
    out = Path(cfg.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=".levelcross-", dir=out.parent))
    try:
        sums = []
        for name, writer in writers.items():
            writer(stage / name)
            sums.append((name, io.sha256_file(stage / name)))
        with open(stage / "manifest.txt", "w", newline="\n") as fh:
            fh.write(f"# levelcross {subcommand}\n")
            for line in cfg.echo():
                fh.write(line + "\n")
            for name, digest in sums:
                fh.write(f"# sha256 {digest} {name}\n")
        out.mkdir(parents=True, exist_ok=True)
        for name in list(writers) + ["manifest.txt"]:
            os.replace(stage / name, out / name)
    finally:
        shutil.rmtree(stage, ignore_errors=True)
    return out


def run(subcommand: str, cfg: RunConfig) -> Path:
    writers = COMMANDS[subcommand](cfg)
    return write_outputs(subcommand, cfg, writers)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="levelcross", description="Level-crossing statistics of integrable billiards.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", help="key = value configuration file")
    for key in _KEYS:
        p.add_argument(f"--{key}", f"--{key.replace('_', '-')}", dest=key, default=None, metavar=key.upper())
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        file_values = {}
        if args.config:
            try:
                text = Path(args.config).read_text()
            except OSError as exc:
                raise ConfigError("config", str(exc)) from None
            file_values = parse_config_text(text)
        flags = {k: _cast(k, getattr(args, k)) for k in _KEYS if getattr(args, k) is not None}
        cfg = build_config(file_values, flags)
        out = run(args.subcommand, cfg)
    except ConfigError as exc:
        print(f"levelcross: config error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, FloatingPointError, ArithmeticError) as exc:
        print(f"levelcross: numeric error: {exc}", file=sys.stderr)
        return 3
    print(f"levelcross: wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
