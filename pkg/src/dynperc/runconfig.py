"""Experiment configuration and run manifests.

Configs are plain JSON objects validated against per-subcommand schemas
shipped with the package (unknown keys are rejected).  Resolution
order: built-in defaults, then the --config file, then command-line
flag overrides.  The hash of the resolved config is recorded in the
run manifest together with per-file checksums, so identical
(config, seed) reruns are checkable byte for byte.
"""

import copy
import hashlib
import json
import os
from importlib import resources

import jsonschema

OUT_ENV_VAR = "DYNPERC_OUT"

DEFAULTS = {
    "msd": {
        "lattice": "hypercubic",
        "d": 2,
        "L": None,
        "p": 0.25,
        "mu": 0.1,
        "t_grid": [250.0, 500.0, 750.0, 1000.0],
        "replicas": 1000,
        "seed": 1,
        "threads": 1,
        "out": "runs/msd",
    },
    "sigma-sweep": {
        "cases": [
            {"lattice": "hypercubic", "d": 2, "p": 0.25},
            {"lattice": "triangular", "d": 2, "p": 0.5},
            {"lattice": "hypercubic", "d": 2, "p": 0.8},
        ],
        "mus": [0.02, 0.05, 0.1, 0.2],
        "t": 1000.0,
        "n_checkpoints": 8,
        "replicas": 400,
        "seed": 1,
        "threads": 1,
        "out": "runs/sigma-sweep",
    },
    "onearm": {
        "lattice": "triangular",
        "d": 2,
        "r_grid": [8, 16, 32, 64],
        "trials": 20000,
        "p": None,
        "rule": "fixed",
        "window_exponent": 0.75,
        "fit_cutoff": 8,
        "seed": 1,
        "threads": 1,
        "out": "runs/onearm",
    },
    "hcluster": {
        "lattice": "triangular",
        "r": 16,
        "mus": [0.05, 0.2],
        "ts": [5.0, 20.0],
        "trials": 20000,
        "p": None,
        "seed": 1,
        "threads": 1,
        "out": "runs/hcluster",
    },
    "theta": {
        "lattice": "hypercubic",
        "Ls": [32, 64],
        "p": 0.8,
        "replicas": 2000,
        "seed": 1,
        "threads": 1,
        "out": "runs/theta",
    },
    "evolving-check": {
        "instances": 200,
        "sides": [4, 6],
        "mus": [0.05, 0.2],
        "ps": [0.3, 0.5, 0.8],
        "seed": 1,
        "threads": 1,
        "out": "runs/evolving-check",
    },
    "df-check": {
        "side": 4,
        "p": 0.5,
        "mu": 0.2,
        "steps": 4,
        "runs": 100000,
        "seed": 1,
        "threads": 1,
        "out": "runs/df-check",
    },
    "growth": {
        "L": 64,
        "p": 1.0,
        "mu": 0.01,
        "steps": 128,
        "runs": 200,
        "fit_lo": None,
        "fit_hi": None,
        "seed": 1,
        "threads": 1,
        "out": "runs/growth",
    },
    "tail": {
        "lattice": "hypercubic",
        "d": 2,
        "p": 1.0,
        "mu": 0.1,
        "t": 100.0,
        "levels": [10, 12, 14, 16, 18, 20, 22, 24, 26, 28, 30, 32, 34, 36, 38, 40],
        "replicas": 100000,
        "seed": 1,
        "threads": 1,
        "out": "runs/tail",
    },
    "markov-type": {
        "lattice": "triangular",
        "p": 0.5,
        "mu": 0.05,
        "s": 200.0,
        "ks": [2, 4, 8],
        "replicas": 2000,
        "seed": 1,
        "threads": 1,
        "out": "runs/markov-type",
    },
}

SUBCOMMANDS = tuple(sorted(DEFAULTS))


class ConfigError(Exception):
    pass


def load_schema(subcommand):
    ref = resources.files("dynperc").joinpath("schemas", f"{subcommand}.json")
    return json.loads(ref.read_text())


def resolve_config(subcommand, config_path=None, overrides=None):
    """defaults <- config file <- flag overrides, then schema-validate.

    Returns the effective config dict.  Any unknown key, missing file,
    invalid JSON, or schema violation raises ConfigError.
    """
    if subcommand not in DEFAULTS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    cfg = copy.deepcopy(DEFAULTS[subcommand])
    if config_path is not None:
        try:
            with open(config_path) as fh:
                user = json.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from e
        if not isinstance(user, dict):
            raise ConfigError("config root must be a JSON object")
        cfg.update(user)
    for k, v in (overrides or {}).items():
        if v is not None:
            cfg[k] = v
    try:
        jsonschema.validate(cfg, load_schema(subcommand))
    except jsonschema.ValidationError as e:
        raise ConfigError(f"config rejected: {e.message}") from e
    return cfg


def config_hash(cfg):
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def resolve_out(cfg, flag_out=None):
    """Output directory precedence: --out flag, then the environment
    override, then the config value."""
    if flag_out:
        return flag_out
    env = os.environ.get(OUT_ENV_VAR)
    if env:
        return os.path.join(env, os.path.basename(cfg["out"]))
    return cfg["out"]


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(outdir, subcommand, cfg, wall_time_s, files, version):
    manifest = {
        "subcommand": subcommand,
        "config": cfg,
        "config_hash": config_hash(cfg),
        "seed": cfg["seed"],
        "version": version,
        "wall_time_s": round(wall_time_s, 3),
        "files": {os.path.basename(f): sha256_file(f) for f in sorted(files)},
    }
    path = os.path.join(outdir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
