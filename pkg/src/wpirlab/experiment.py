"""Experiment orchestration: sessions, trial loops, config files, results.

Config files are flat ``key = value`` text with dotted keys, e.g.::

    setting.variant = mds
    setting.N = 5
    setting.K = 3
    setting.M = 2
    field.kind = binary
    field.modulus = 0x11B
    dist.pmf = 0.5,0.5
    trials = 10000
    seed = 7
    metrics = MIL,MaxL

The environment variable WPIR_SEED overrides the config seed (an explicit
--seed flag still wins).  Result files are a JSON document mirroring the
experiment result plus a per-trial CSV; both are byte-identical across runs
with the same seed, so wall-clock time is reported on stdout only.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from .core import (PirSetting, RetrievalTranscript, Variant, generate_library,
                   mds, replicated, tcollusion)
from .galois import Field, default_field, field_from_spec
from .leakage import leakage_report
from .rng import substream
from .transport import InProcessTransport
from .wire import decode_answer, encode_query
from .wpir import MPrimeDistribution, wpir_decode, wpir_query, wpir_rate


class DecodeMismatchError(Exception):
    """Decoded file disagrees with the library: an implementation fault."""


def run_session(setting: PirSetting, theta: int, dist: MPrimeDistribution,
                seed: int, transport):
    """One full retrieval over the transport; returns (transcript, file)."""
    field = transport.field
    tokens, rand = wpir_query(setting, theta, dist, field,
                              rng=substream(seed, "session"))
    answers = []
    for l, token in enumerate(tokens):
        answer_bytes = transport.exchange(l, encode_query(token, field))
        answers.append(decode_answer(answer_bytes, field))
    decoded = wpir_decode(theta, rand, answers, setting, field)
    library = getattr(transport, "library", None)
    if library is not None and not np.array_equal(decoded, library.file(theta)):
        raise DecodeMismatchError(
            f"decode mismatch at {setting.describe()} theta={theta} seed={seed}")
    transcript = RetrievalTranscript(
        theta=theta, queries=tuple(tokens), answers=tuple(answers),
        download_bits=sum(a.bit_length for a in answers), seed=seed)
    return transcript, decoded


@dataclass(frozen=True)
class ExperimentConfig:
    setting: PirSetting
    dist: MPrimeDistribution
    trials: int
    seed: int
    field: Field = dc_field(default_factory=default_field)
    metrics: tuple[str, ...] = ()
    leakage_method: str = "exhaustive"
    leakage_samples: int = 0
    out: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.dist.M != self.setting.M:
            raise ValueError("distribution support must be [0:M-1]")
        for m in self.metrics:
            if m not in ("MIL", "MaxL"):
                raise ValueError(f"unknown metric {m!r}")

    def echo(self) -> dict:
        s = self.setting
        out = {"setting.variant": s.variant.value, "setting.N": s.N, "setting.M": s.M,
               "field.kind": self.field.kind, "field.modulus": self.field.modulus,
               "dist.pmf": list(self.dist.pmf), "trials": self.trials,
               "seed": self.seed, "metrics": list(self.metrics)}
        if s.K is not None:
            out["setting.K"] = s.K
        if s.T is not None:
            out["setting.T"] = s.T
        return out


@dataclass(frozen=True)
class ExperimentResult:
    config: dict
    empirical_rate: float
    analytic_rate: str
    analytic_rate_float: float
    total_download_bits: int
    mean_download_bits: float
    per_trial_download_bits: tuple[int, ...]
    per_trial_theta: tuple[int, ...]
    leakage: tuple[dict, ...]
    wall_clock_seconds: float  # reporting only; never persisted

    def to_json(self) -> str:
        payload = {
            "config": self.config,
            "empirical_rate": self.empirical_rate,
            "analytic_rate": self.analytic_rate,
            "analytic_rate_float": self.analytic_rate_float,
            "total_download_bits": self.total_download_bits,
            "mean_download_bits": self.mean_download_bits,
            "leakage": list(self.leakage),
            "trials": len(self.per_trial_download_bits),
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def trials_csv(self) -> str:
        lines = ["trial,theta,download_bits"]
        for i, (theta, bits) in enumerate(zip(self.per_trial_theta,
                                              self.per_trial_download_bits)):
            lines.append(f"{i},{theta},{bits}")
        return "\n".join(lines) + "\n"


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run the configured trials with theta drawn uniformly per trial."""
    setting, field = config.setting, config.field
    t0 = time.perf_counter()
    library = generate_library(setting.M, setting.file_length, field, config.seed)
    transport = InProcessTransport(setting, library)
    bits, thetas = [], []
    for i in range(config.trials):
        trial_rng = substream(config.seed, "trial", i)
        theta = int(trial_rng.integers(1, setting.M + 1))
        session_seed = int(trial_rng.integers(1 << 63))
        transcript, _ = run_session(setting, theta, config.dist, session_seed, transport)
        bits.append(transcript.download_bits)
        thetas.append(theta)
    total_bits = sum(bits)
    file_bits = setting.file_length * field.bits_per_symbol
    empirical_rate = file_bits * config.trials / total_bits
    analytic = wpir_rate(setting, config.dist)
    reports = []
    for metric in config.metrics:
        rep = leakage_report(setting, config.dist, metric,
                             method=config.leakage_method,
                             samples=config.leakage_samples, seed=config.seed,
                             field=field)
        reports.append(rep.__dict__.copy())
    result = ExperimentResult(
        config=config.echo(),
        empirical_rate=empirical_rate,
        analytic_rate=str(analytic),
        analytic_rate_float=float(analytic),
        total_download_bits=total_bits,
        mean_download_bits=total_bits / config.trials,
        per_trial_download_bits=tuple(bits),
        per_trial_theta=tuple(thetas),
        leakage=tuple(reports),
        wall_clock_seconds=time.perf_counter() - t0,
    )
    if config.out:
        persist_result(result, config.out)
    return result


def persist_result(result: ExperimentResult, out_prefix: str):
    os.makedirs(os.path.dirname(os.path.abspath(out_prefix)), exist_ok=True)
    with open(out_prefix + ".json", "w", newline="\n") as fh:
        fh.write(result.to_json())
    with open(out_prefix + ".csv", "w", newline="\n") as fh:
        fh.write(result.trials_csv())


# -- config files -------------------------------------------------------------

def parse_config_text(text: str) -> dict[str, str]:
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        mapping[key.strip()] = value.strip()
    return mapping


def load_config_file(path: str) -> dict[str, str]:
    with open(path) as fh:
        return parse_config_text(fh.read())


def setting_from_mapping(mapping: dict[str, str]) -> PirSetting:
    variant = mapping.get("setting.variant", "replicated").lower()
    N = int(mapping["setting.N"])
    M = int(mapping["setting.M"])
    if variant == Variant.REPLICATED.value:
        return replicated(N, M)
    if variant == Variant.MDS.value:
        return mds(N, int(mapping["setting.K"]), M)
    if variant == Variant.T_COLLUSION.value:
        return tcollusion(N, int(mapping["setting.T"]), M)
    raise ValueError(f"unknown variant {variant!r}")


def field_from_mapping(mapping: dict[str, str]) -> Field:
    kind = mapping.get("field.kind", "binary")
    modulus = int(mapping.get("field.modulus", "0x11B"), 0)
    return field_from_spec(kind, modulus)


def dist_from_mapping(mapping: dict[str, str], M: int) -> MPrimeDistribution:
    raw = mapping.get("dist.pmf")
    if raw is None:
        pmf = [0.0] * M
        pmf[M - 1] = 1.0
    else:
        pmf = [float(x) for x in raw.split(",")]
    return MPrimeDistribution(tuple(pmf))


def resolve_seed(flag_seed: int | None, mapping: dict[str, str]) -> int:
    if flag_seed is not None:
        return flag_seed
    env = os.environ.get("WPIR_SEED")
    if env is not None:
        return int(env, 0)
    return int(mapping.get("seed", "0"), 0)


def experiment_from_mapping(mapping: dict[str, str], *, seed: int | None = None,
                            trials: int | None = None,
                            out: str | None = None) -> ExperimentConfig:
    setting = setting_from_mapping(mapping)
    metrics = tuple(m for m in mapping.get("metrics", "").split(",") if m)
    return ExperimentConfig(
        setting=setting,
        dist=dist_from_mapping(mapping, setting.M),
        trials=trials if trials is not None else int(mapping.get("trials", "1")),
        seed=resolve_seed(seed, mapping),
        field=field_from_mapping(mapping),
        metrics=metrics,
        leakage_method=mapping.get("leakage.method", "exhaustive"),
        leakage_samples=int(mapping.get("leakage.samples", "0")),
        out=out if out is not None else mapping.get("out"),
    )
