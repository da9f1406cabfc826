"""Registered experiments: configuration schema, validation and runners.

A runner receives the validated configuration and returns ``{file name: text}``;
writing files and the manifest is left to the caller.  Every data file depends
only on the configuration and the seed.
"""
from __future__ import annotations

import io
import json
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import jsonschema
import numpy as np

from .ring import ModelParams, ParamError, make_omega

PARAMS_SCHEMA = {
    "type": "object",
    "required": ["N_A", "N_B", "N_C", "beta"],
    "additionalProperties": False,
    "properties": {
        "N_A": {"type": "integer", "minimum": 1},
        "N_B": {"type": "integer", "minimum": 1},
        "N_C": {"type": "integer", "minimum": 1},
        "beta": {"type": "number", "minimum": 0},
    },
}


@dataclass(frozen=True)
class Experiment:
    kind: str
    summary: str
    needs_params: bool
    options: dict
    columns: str
    runner: Callable


REGISTRY: dict[str, Experiment] = {}


def register(kind: str, summary: str, options: dict, columns: str, needs_params: bool = True):
    def wrap(fn):
        REGISTRY[kind] = Experiment(kind, summary, needs_params, options, columns, fn)
        return fn
    return wrap


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


def config_schema() -> dict:
    branches = []
    for exp in REGISTRY.values():
        then = {"properties": {"options": {"type": "object", "additionalProperties": False,
                                           "properties": exp.options}}}
        if exp.needs_params:
            then["required"] = ["params"]
        branches.append({"if": {"properties": {"kind": {"const": exp.kind}}}, "then": then})
    return {
        "type": "object",
        "required": ["name", "kind", "seed"],
        "additionalProperties": False,
        "properties": {
            "name": {"type": "string", "minLength": 1},
            "kind": {"enum": sorted(REGISTRY)},
            "params": PARAMS_SCHEMA,
            "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
            "output": {"type": "string"},
            "options": {"type": "object"},
        },
        "allOf": branches,
    }


def _field(error: jsonschema.ValidationError) -> str:
    path = list(error.absolute_path)
    if error.validator == "required":
        missing = error.message.split("'")[1]
        path.append(missing)
    return ".".join(str(p) for p in path) or "<config>"


def validate(config: dict) -> dict:
    """Check a configuration and fill option defaults; raise ConfigError naming the field."""
    validator = jsonschema.Draft202012Validator(config_schema())
    errors = sorted(validator.iter_errors(config), key=lambda e: (len(list(e.absolute_path)), e.message))
    if errors:
        e = errors[0]
        raise ConfigError(_field(e), e.message)
    exp = REGISTRY[config["kind"]]
    if "params" in config:
        pp = config["params"]
        try:
            ModelParams(pp["N_A"], pp["N_B"], pp["N_C"], float(pp["beta"]))
        except ParamError as err:
            name = {"n_a": "N_A", "n_b": "N_B", "n_c": "N_C"}.get(err.field, err.field)
            raise ConfigError("params." + name.replace("n_a+n_b+n_c", "N_A+N_B+N_C"),
                              err.message) from None
    opts = {k: v["default"] for k, v in exp.options.items() if "default" in v}
    opts.update(config.get("options", {}))
    out = dict(config)
    out["options"] = opts
    return out


def model_params(config: dict) -> ModelParams:
    pp = config["params"]
    return ModelParams(pp["N_A"], pp["N_B"], pp["N_C"], float(pp["beta"]))


def _csv(header: str, rows) -> str:
    buf = io.StringIO()
    buf.write(header + "\n")
    for row in rows:
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    return buf.getvalue()


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


# ----------------------------------------------------------------------------
# experiments


_SAMPLES = {"type": "integer", "minimum": 1, "default": 10000}
_EVENT_CAP = {"type": "integer", "minimum": 1, "default": 10 ** 9}


@register("trace-rates", "transition samples out of a segregated state; rate estimates vs limit rates",
          {"samples": _SAMPLES, "event_cap": _EVENT_CAP,
           "start_k": {"type": "integer", "default": 0},
           "embedded": {"type": "boolean", "default": False}},
          "rates.csv: k,count,rate,ci_low,ci_high,scaled_rate,scaled_half_width,limit_rate,status; "
          "transitions.csv: sample_id,displacement,time,events,meeting_alpha,meeting_i,censored")
def _trace_rates(config: dict, threads: int) -> dict:
    from .estimators import estimate_trace_rates, meeting_histogram
    from .ideal_chain import limit_rates
    from .kmc import run_transitions, transitions_csv
    p = model_params(config)
    o = config["options"]
    samples = run_transitions(p, o["start_k"], o["samples"], config["seed"],
                              event_cap=o["event_cap"], threads=threads, embedded=o["embedded"])
    est = estimate_trace_rates(samples, p)
    limit = limit_rates(p, exact=False)
    scale = est.scale()
    rows = []
    for k in sorted(est.entries):
        e = est.entries[k]
        lo, hi = e.interval if e.sufficient else ("", "")
        hw = e.half_width * scale if e.sufficient else ""
        rows.append((k, e.count, e.rate, lo, hi, e.rate * scale, hw, float(limit[k]),
                     "ok" if e.sufficient else "insufficient"))
    hist = meeting_histogram(samples, p.M)
    summary = {"total_time": est.total_time, "samples": est.n_samples, "censored": est.n_censored,
               "mean_time_scaled": est.total_time / est.n_samples * scale,
               "limit_mean_time": 1.0 / float(limit.total),
               "meeting": hist.to_dict()}
    return {
        "rates.csv": _csv("k,count,rate,ci_low,ci_high,scaled_rate,scaled_half_width,limit_rate,status", rows),
        "transitions.csv": transitions_csv(samples),
        "summary.json": _dump(summary),
    }


@register("meeting-dist", "positions where excursions first reach red depth M",
          {"samples": _SAMPLES, "event_cap": _EVENT_CAP},
          "meeting.csv: i,count,frequency,profile")
def _meeting(config: dict, threads: int) -> dict:
    from .estimators import meeting_histogram
    from .kmc import run_transitions
    p = model_params(config)
    o = config["options"]
    samples = run_transitions(p, 0, o["samples"], config["seed"], event_cap=o["event_cap"],
                              threads=threads)
    h = meeting_histogram(samples, p.M)
    rows = [(i, h.counts[i], h.frequencies[i], h.profile[i]) for i in range(p.M + 1)]
    return {"meeting.csv": _csv("i,count,frequency,profile", rows),
            "meeting.json": _dump(h.to_dict())}


@lru_cache(maxsize=8)
def xi_table(params: ModelParams) -> np.ndarray:
    """Structural Xi membership over all base-3 codes (tiny rings only)."""
    from .exact import enumerate_states, state_codes
    from .neighborhoods import xi_membership
    from .ring import RingConfig
    arr, _ = enumerate_states(params)
    table = np.zeros(3 ** params.ring_size, dtype=np.uint8)
    for code, row in zip(state_codes(params), arr):
        table[code] = xi_membership(params, RingConfig._trusted(params, row))
    return table


@register("occupation", "fraction of time outside the segregated states and outside Xi, per beta",
          {"betas": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1,
                     "default": [3.0, 4.0, 5.0]},
           "events": {"type": "integer", "minimum": 1, "default": 10 ** 7}},
          "occupation.csv: beta,events,elapsed,outside_omega0,outside_xi "
          "(outside_xi empty beyond ring size 13)")
def _occupation(config: dict, threads: int) -> dict:
    from .kmc import MaxEvents, replica_seed, simulate
    from .neighborhoods import BFS_RING_LIMIT
    base = model_params(config)
    o = config["options"]
    rows = []
    for j, beta in enumerate(o["betas"]):
        p = base.with_beta(float(beta))
        table = xi_table(p.with_beta(0.0)) if p.ring_size <= BFS_RING_LIMIT else None
        r = simulate(p, make_omega(p, 0), MaxEvents(o["events"]), replica_seed(config["seed"], j),
                     record=False, table=table)
        outside_xi = r.time_outside_table / r.elapsed if table is not None else ""
        rows.append((float(beta), r.events, r.elapsed, r.time_outside_omega0 / r.elapsed, outside_xi))
    return {"occupation.csv": _csv("beta,events,elapsed,outside_omega0,outside_xi", rows)}


@register("rw-scaling", "coarse random walk with the limit rates; drift and variance vs references",
          {"horizon": {"type": "number", "exclusiveMinimum": 0, "default": 1.0},
           "replicas": {"type": "integer", "minimum": 2, "default": 10000}},
          "scaling_report.json; rates.json: limit rates r(k) in units of exp(-M beta)")
def _rw(config: dict, threads: int) -> dict:
    from .estimators import rw_simulate
    from .ideal_chain import limit_rates
    p = model_params(config)
    o = config["options"]
    rates = limit_rates(p, exact=False)
    rep = rw_simulate(rates, p, float(o["horizon"]), o["replicas"], config["seed"])
    return {"scaling_report.json": rep.to_json() + "\n", "rates.json": rates.to_json() + "\n"}


@register("velocity-table", "drift v(l, m): closed form against the elimination oracle",
          {"l_min": {"type": "integer", "minimum": 3, "default": 3},
           "l_max": {"type": "integer", "minimum": 3, "default": 12},
           "m_min": {"type": "integer", "minimum": 3, "default": 3},
           "m_max": {"type": "integer", "minimum": 3, "default": 12}},
          "velocity.csv: l,m,v,v_oracle,abs_diff,v_times_3_pow_m,ballistic", needs_params=False)
def _velocity(config: dict, threads: int) -> dict:
    from .velocity import ballistic_velocity, velocity, velocity_oracle
    o = config["options"]
    rows = []
    for l in range(o["l_min"], o["l_max"] + 1):
        for m in range(o["m_min"], o["m_max"] + 1):
            v, w = velocity(l, m), velocity_oracle(l, m)
            rows.append((l, m, float(v), float(w), float(abs(v - w)), float(v * 3 ** m),
                         float(ballistic_velocity(l, m))))
    return {"velocity.csv": _csv("l,m,v,v_oracle,abs_diff,v_times_3_pow_m,ballistic", rows)}


@register("identity", "binomial identity behind the meeting weights, exact for every M",
          {"M_min": {"type": "integer", "minimum": 2, "default": 2},
           "M_max": {"type": "integer", "minimum": 2, "default": 60}},
          "identity_report.json: rows {M, identity, weighted_sum_is_one}", needs_params=False)
def _identity(config: dict, threads: int) -> dict:
    from .combinatorics import identity_check, lhs_exact
    o = config["options"]
    rows = [{"M": M, "identity": identity_check(M),
             "weighted_sum_is_one": all(lhs_exact(M, i) == 1 for i in range(1, M))}
            for M in range(o["M_min"], o["M_max"] + 1)]
    return {"identity_report.json": _dump({"rows": rows, "all_true": all(
        r["identity"] and r["weighted_sum_is_one"] for r in rows)})}


@register("gibbs-check", "stationary law of the full generator vs the Gibbs weights; simulated occupation",
          {"betas": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1,
                     "default": [0.5, 1.0, 2.0]},
           "events": {"type": "integer", "minimum": 0, "default": 10 ** 7}},
          "gibbs.csv: beta,max_relative_error,tv_simulated,events")
def _gibbs(config: dict, threads: int) -> dict:
    from .exact import enumerate_states, gibbs, state_codes, stationary
    from .kmc import MaxEvents, replica_seed, simulate
    base = model_params(config)
    o = config["options"]
    rows = []
    for j, beta in enumerate(o["betas"]):
        p = base.with_beta(float(beta))
        pi, mu = stationary(p, p.beta), gibbs(p, p.beta)
        err = float(np.max(np.abs(pi - mu) / mu))
        tv = ""
        if o["events"]:
            codes = state_codes(p)
            hist = np.zeros(3 ** p.ring_size)
            simulate(p, make_omega(p, 0), MaxEvents(o["events"]), replica_seed(config["seed"], j),
                     record=False, time_by_code=hist)
            emp = hist[codes] / hist.sum()
            tv = float(0.5 * np.abs(emp - mu).sum())
        rows.append((float(beta), err, tv, o["events"]))
    return {"gibbs.csv": _csv("beta,max_relative_error,tv_simulated,events", rows)}


def run_experiment(config: dict, threads: int = 1) -> dict:
    """Validate and execute; returns ``{file name: text}``."""
    cfg = validate(config)
    return REGISTRY[cfg["kind"]].runner(cfg, max(1, int(threads)))


def default_threads() -> int:
    env = os.environ.get("ABC_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
