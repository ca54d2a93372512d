"""Config file schema, env overrides, and backend-profile construction.

Config is one JSON file (all keys optional):

    {
      "master_seed": 42,
      "fixture_root": "fixtures",
      "service": {"host": "127.0.0.1", "port": 8000, "data_dir": "data",
                  "max_concurrent": 4, "ui_dir": "frontend/dist"},
      "profiles": {
        "sim": {"provider": "sim", "sim": {...SimParams...}, "pacing_s": 0.0,
                 "parse_repair_budget": 1, "policy": {"retry_budget": 3},
                 "quality_floor": 0.8},
        "live": {"provider": "remote", "endpoints": {"generator": "http://...", ...},
                  "timeout_s": 10.0}
      },
      "default_profile": "sim"
    }

Environment overrides: GENFLOW_SEED replaces master_seed and the sim seed of
every profile; GENFLOW_ENDPOINT_<ROLE> (EXTRACTOR/ENHANCER/DIRECTOR/
GENERATOR/DIRECTOR_AGENT/BRAND_SAFETY_AGENT) replaces that role's endpoint
in every remote profile.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .backends.base import BackendSet
from .backends.sim import SimParams, build_sim_backends, sim_params_from_dict
from .errors import ConfigError
from .qc import QcPolicy

ENDPOINT_ROLES = (
    "extractor",
    "enhancer",
    "director",
    "generator",
    "director_agent",
    "brand_safety_agent",
)


@dataclass
class BackendProfile:
    name: str = "sim"
    provider: str = "sim"
    sim: SimParams = field(default_factory=lambda: sim_params_from_dict(None))
    policy: QcPolicy = field(default_factory=QcPolicy)
    parse_repair_budget: int = 1
    quality_floor: float = 0.8
    pacing_s: float = 0.0
    endpoints: dict[str, str] = field(default_factory=dict)
    timeout_s: float = 10.0

    def build_backends(self, run_seed: int, fixture_root: str = "fixtures") -> BackendSet:
        if self.provider == "sim":
            return build_sim_backends(
                self.sim, run_seed, fixture_root=fixture_root, quality_floor=self.quality_floor
            )
        if self.provider == "remote":
            from .backends.remote import (
                EndpointConfig,
                RemoteDirector,
                RemoteEnhancer,
                RemoteEvaluator,
                RemoteExtractor,
                RemoteGenerator,
            )

            def endpoint(role: str) -> EndpointConfig:
                url = self.endpoints.get(role) or self.endpoints.get("default")
                if not url:
                    raise ConfigError(f"profile {self.name!r} has no endpoint for role {role!r}")
                return EndpointConfig(url=url, timeout_s=self.timeout_s)

            return BackendSet(
                extractor=RemoteExtractor(endpoint("extractor")),
                enhancer=RemoteEnhancer(endpoint("enhancer")),
                director=RemoteDirector(endpoint("director")),
                generator=RemoteGenerator(endpoint("generator")),
                director_agent=RemoteEvaluator("director_agent", endpoint("director_agent")),
                brand_safety_agent=RemoteEvaluator("brand_safety_agent", endpoint("brand_safety_agent")),
            )
        raise ConfigError(f"unknown backend provider {self.provider!r}")


@dataclass
class AppConfig:
    master_seed: int = 42
    fixture_root: str = "fixtures"
    host: str = "127.0.0.1"
    port: int = 8000
    data_dir: str = "data"
    max_concurrent: int = 4
    ui_dir: str | None = None
    default_profile: str = "sim"
    profiles: dict[str, BackendProfile] = field(default_factory=dict)

    def profile(self, name: str | None) -> BackendProfile:
        key = name or self.default_profile
        if key not in self.profiles:
            raise ConfigError(f"unknown backend profile {key!r}")
        return self.profiles[key]


def _profile_from_dict(name: str, doc: Mapping[str, Any], master_seed: int) -> BackendProfile:
    policy_doc = doc.get("policy") or {}
    try:
        policy = QcPolicy(
            retry_budget=int(policy_doc.get("retry_budget", 3)),
            consensus=str(policy_doc.get("consensus", "strict_and")),
        )
    except ValueError as exc:
        raise ConfigError(f"profile {name!r}: {exc}") from exc
    return BackendProfile(
        name=name,
        provider=str(doc.get("provider", "sim")),
        sim=sim_params_from_dict(doc.get("sim"), master_seed=doc.get("sim", {}).get("master_seed", master_seed)),
        policy=policy,
        parse_repair_budget=int(doc.get("parse_repair_budget", 1)),
        quality_floor=float(doc.get("quality_floor", 0.8)),
        pacing_s=float(doc.get("pacing_s", 0.0)),
        endpoints=dict(doc.get("endpoints") or {}),
        timeout_s=float(doc.get("timeout_s", 10.0)),
    )


def load_config(path: str | Path | None = None) -> AppConfig:
    """Load config JSON (defaults when absent) and apply env overrides."""
    doc: dict[str, Any] = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except (OSError, ValueError) as exc:
            raise ConfigError(f"config file unreadable: {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"config root must be a JSON object: {path}")

    master_seed = int(doc.get("master_seed", 42))
    env_seed = os.environ.get("GENFLOW_SEED")
    if env_seed is not None:
        try:
            master_seed = int(env_seed)
        except ValueError as exc:
            raise ConfigError(f"GENFLOW_SEED must be an integer, got {env_seed!r}") from exc

    service_doc = doc.get("service") or {}
    profiles_doc = doc.get("profiles") or {"sim": {"provider": "sim"}}
    if not isinstance(profiles_doc, dict) or not profiles_doc:
        raise ConfigError("profiles must be a non-empty object")
    profiles = {
        name: _profile_from_dict(name, profile_doc or {}, master_seed)
        for name, profile_doc in profiles_doc.items()
    }

    for role in ENDPOINT_ROLES:
        override = os.environ.get(f"GENFLOW_ENDPOINT_{role.upper()}")
        if override:
            for profile in profiles.values():
                profile.endpoints[role] = override

    default_profile = str(doc.get("default_profile", next(iter(profiles))))
    if default_profile not in profiles:
        raise ConfigError(f"default_profile {default_profile!r} is not a configured profile")

    return AppConfig(
        master_seed=master_seed,
        fixture_root=str(doc.get("fixture_root", "fixtures")),
        host=str(service_doc.get("host", "127.0.0.1")),
        port=int(service_doc.get("port", 8000)),
        data_dir=str(service_doc.get("data_dir", "data")),
        max_concurrent=int(service_doc.get("max_concurrent", 4)),
        ui_dir=service_doc.get("ui_dir"),
        default_profile=default_profile,
        profiles=profiles,
    )
